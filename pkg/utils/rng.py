"""
随机数约定

所有随机性都来自 numpy 的 PCG64 生成器，种子为 64 位无符号整数。
子流种子 = BLAKE2b("{master}:{tag}:{index}") 的前 8 字节（小端）。
"""

import hashlib
import numpy as np


SEED_MASK = (1 << 64) - 1


def normalize_seed(seed: int) -> int:
    """把任意整数种子规整到 [0, 2^64)"""
    return int(seed) & SEED_MASK


def make_rng(seed: int) -> np.random.Generator:
    """按 64 位种子创建 PCG64 生成器"""
    return np.random.Generator(np.random.PCG64(normalize_seed(seed)))


def derive_seed(master_seed: int, tag: str, index: int = 0) -> int:
    """由 (主种子, 用途标签, 试验序号) 派生子流种子"""
    payload = f"{normalize_seed(master_seed)}:{tag}:{int(index)}".encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """派生子流生成器"""
    return make_rng(derive_seed(master_seed, tag, index))
