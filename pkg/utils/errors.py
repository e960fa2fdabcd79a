"""
异常定义

工具包内的错误类型及命令行退出码
"""


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3


class ToolkitError(Exception):
    """工具包错误基类"""


class InputValidationError(ToolkitError, ValueError):
    """输入不满足前置条件（尺寸、范围、形状等）"""


class ConvergenceFailure(ToolkitError):
    """求解器在迭代上限内未收敛"""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


def require(condition: bool, message: str):
    """前置条件检查，失败时抛出 InputValidationError"""
    if not condition:
        raise InputValidationError(message)
