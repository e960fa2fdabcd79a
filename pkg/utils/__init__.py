"""
gradcs 工具模块

包含工具包的通用支撑代码：
- config_manager: 配置管理
- logger_setup: 日志设置
- errors: 异常与退出码
- rng: 可复现随机数约定
- file_formats: 信号/频谱/采样掩码文本格式
"""

__version__ = "0.1.0"
