"""
gradcs 测试模块

包含各数值模块、文件格式、命令行与验收实验的测试用例
"""
