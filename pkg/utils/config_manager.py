"""
配置管理器

负责加载和管理工具包配置（YAML 或扁平 key=value 文件）
"""

import copy
import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dotenv import load_dotenv
from loguru import logger


# 扁平配置文件中的键映射到 solver 配置段
FLAT_SECTION = "solver"


def _coerce(value: str) -> Any:
    """把扁平配置中的字符串值转换为 bool/int/float"""
    text = value.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """递归合并两个配置字典，override 优先"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """配置管理器"""

    def __init__(self, config_path: Optional[str] = None):
        """初始化配置管理器"""
        load_dotenv()
        self.config_path = config_path or os.environ.get("GRADCS_CONFIG") or "config/config.yaml"
        self.config = _deep_merge(self._get_default_config(), self._load_config())
        logger.info(f"配置已加载: {self.config_path}")

    def _load_config(self) -> Dict[str, Any]:
        """加载配置文件"""
        config_file = Path(self.config_path)

        if not config_file.exists():
            logger.warning(f"配置文件不存在，使用默认配置: {config_file}")
            return {}

        try:
            if config_file.suffix.lower() in (".yaml", ".yml"):
                with open(config_file, 'r', encoding='utf-8') as f:
                    config = yaml.safe_load(f) or {}
            else:
                config = {FLAT_SECTION: self._load_flat(config_file)}
            logger.success(f"配置文件加载成功: {config_file}")
            return config
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"加载配置文件失败: {e}")
            return {}

    @staticmethod
    def _load_flat(config_file: Path) -> Dict[str, Any]:
        """解析扁平 key=value 配置（# 开头为注释）"""
        values: Dict[str, Any] = {}
        for raw in config_file.read_text(encoding='utf-8').splitlines():
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                logger.warning(f"忽略无法解析的配置行: {raw!r}")
                continue
            key, value = line.split('=', 1)
            values[key.strip()] = _coerce(value)
        return values

    def _get_default_config(self) -> Dict[str, Any]:
        """获取默认配置"""
        return {
            "solver": {
                "lambda": 1.0,
                "mu": 10.0,
                "max_outer": 500,
                "max_inner": 2,
                "tol_rel": 1e-10,
                "tol_feas": 1e-8,
                "log_every": 50
            },
            "sampling": {
                "scheme": "uniform",
                "seed": 0
            },
            "experiments": {
                "master_seed": 2024,
                "trials": 5,
                "exact_threshold": 1e-3,
                "max_outer": 3000
            },
            "runtime": {
                "threads": None
            },
            "logging": {
                "level": "INFO",
                "file_enabled": False,
                "solver_trace": False
            }
        }

    def get_config(self) -> Dict[str, Any]:
        """获取配置"""
        return self.config

    def get(self, key: str, default=None):
        """获取配置项"""
        keys = key.split('.')
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def thread_limit(self) -> int:
        """并行线程上限：GRADCS_THREADS 优先，其次 runtime.threads，最后 CPU 数"""
        env_value = os.environ.get("GRADCS_THREADS")
        if env_value:
            try:
                return max(1, int(env_value))
            except ValueError:
                logger.warning(f"GRADCS_THREADS 不是整数，已忽略: {env_value!r}")
        configured = self.get("runtime.threads")
        if configured:
            return max(1, int(configured))
        return os.cpu_count() or 1
