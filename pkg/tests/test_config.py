#!/usr/bin/env python3
"""
配置、日志、错误与随机数约定测试
"""

import numpy as np
import pytest

from core.solver import SolverConfig
from utils.config_manager import ConfigManager
from utils.errors import ConvergenceFailure, InputValidationError, ToolkitError, require
from utils.logger_setup import setup_logger
from utils.rng import derive_seed, make_rng, normalize_seed


class TestConfigManager:
    """配置管理器"""

    def test_defaults(self, config_manager):
        config = config_manager.get_config()
        assert config["solver"]["max_outer"] == 500
        assert config_manager.get("experiments.master_seed") == 2024
        assert config_manager.get("solver.missing", "fallback") == "fallback"

    def test_yaml_partial_override(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("solver:\n  mu: 4.0\nexperiments:\n  trials: 2\n", encoding="utf-8")
        manager = ConfigManager(str(path))
        assert manager.get("solver.mu") == 4.0
        assert manager.get("solver.lambda") == 1.0
        assert manager.get("experiments.trials") == 2

    def test_flat_file(self, tmp_path):
        path = tmp_path / "solver.cfg"
        path.write_text("# 求解器参数\nlambda=2\nmu = 5.5\nlog_every=10\nbroken line\n", encoding="utf-8")
        manager = ConfigManager(str(path))
        cfg = SolverConfig.from_config(manager.get_config())
        assert (cfg.lam, cfg.mu, cfg.log_every) == (2.0, 5.5, 10)

    def test_invalid_yaml_falls_back(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("solver: [unclosed\n", encoding="utf-8")
        assert ConfigManager(str(path)).get("solver.max_outer") == 500

    def test_config_from_environment(self, tmp_path, monkeypatch):
        path = tmp_path / "env.yaml"
        path.write_text("runtime:\n  threads: 3\n", encoding="utf-8")
        monkeypatch.setenv("GRADCS_CONFIG", str(path))
        monkeypatch.delenv("GRADCS_THREADS", raising=False)
        assert ConfigManager().thread_limit() == 3

    def test_thread_limit_environment(self, config_manager, monkeypatch):
        monkeypatch.setenv("GRADCS_THREADS", "2")
        assert config_manager.thread_limit() == 2
        monkeypatch.setenv("GRADCS_THREADS", "many")
        assert config_manager.thread_limit() >= 1


class TestLogger:
    """日志设置"""

    def test_file_sinks(self, tmp_path):
        setup_logger({"level": "DEBUG", "file_enabled": True, "log_dir": str(tmp_path / "logs")})
        from loguru import logger
        logger.error("写入错误日志")
        logger.complete()
        assert (tmp_path / "logs" / "gradcs.log").exists()
        assert (tmp_path / "logs" / "error.log").exists()
        setup_logger({"level": "WARNING"})

    def test_solver_trace_sink(self, tmp_path, monkeypatch):
        monkeypatch.delenv("GRADCS_LOG_LEVEL", raising=False)
        sinks = setup_logger({"level": "WARNING", "solver_trace": True, "log_dir": str(tmp_path)})
        assert len(sinks) == 2
        assert not (tmp_path / "gradcs.log").exists()
        setup_logger({"level": "WARNING"})

    def test_level_from_environment(self, monkeypatch, capsys):
        from loguru import logger
        monkeypatch.setenv("GRADCS_LOG_LEVEL", "ERROR")
        assert len(setup_logger({"level": "DEBUG"})) == 1
        logger.warning("被过滤的警告")
        logger.error("保留的错误")
        err = capsys.readouterr().err
        assert "被过滤的警告" not in err
        assert "保留的错误" in err
        monkeypatch.delenv("GRADCS_LOG_LEVEL")
        setup_logger({"level": "WARNING"})


class TestErrors:
    """错误类型"""

    def test_hierarchy(self):
        assert issubclass(InputValidationError, ValueError)
        assert issubclass(InputValidationError, ToolkitError)
        assert issubclass(ConvergenceFailure, ToolkitError)

    def test_require(self):
        require(True, "不会抛出")
        with pytest.raises(InputValidationError, match="坏输入"):
            require(False, "坏输入")


class TestRandomness:
    """随机数约定"""

    def test_make_rng_reproducible(self):
        assert np.array_equal(make_rng(5).random(4), make_rng(5).random(4))

    def test_normalize_negative_seed(self):
        assert normalize_seed(-1) == 2 ** 64 - 1

    def test_derive_seed(self):
        a = derive_seed(2024, "mask", 0)
        assert a == derive_seed(2024, "mask", 0)
        assert a != derive_seed(2024, "mask", 1)
        assert a != derive_seed(2024, "noise", 0)
        assert 0 <= a < 2 ** 64
