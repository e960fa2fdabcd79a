"""
gradcs 核心模块

包含工具包的数值组件：
- transforms: DFT、周期梯度、Haar 变换与 TV 范数
- sampling: 频率采样方案与测量
- solver: 分裂 Bregman TV 最小化
- oracles: 小规模凸规划参考解
- analysis: Fejér 核、对偶证书、相干性与 RIP 诊断
- signals: 测试信号、扰动与误差度量
- experiment_runner: 数值实验编排
- report_builder: 实验报告与 CSV/SVG 输出
"""

__version__ = "0.1.0"
__author__ = "gradcs Team"
