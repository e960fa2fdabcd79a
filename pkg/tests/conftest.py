"""
测试公共夹具
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from utils.config_manager import ConfigManager
from utils.rng import make_rng


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo 与验收实验（运行时间较长）")


@pytest.fixture
def config_manager(tmp_path, monkeypatch):
    """指向不存在文件的配置管理器，即全部使用默认值"""
    monkeypatch.delenv("GRADCS_CONFIG", raising=False)
    monkeypatch.delenv("GRADCS_THREADS", raising=False)
    monkeypatch.delenv("GRADCS_LOG_LEVEL", raising=False)
    return ConfigManager(str(tmp_path / "missing.yaml"))


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240601)
