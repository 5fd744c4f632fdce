"""Synthetic checkpoints and fixtures shared by the test modules."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from weightscope import rng as R
from weightscope.checkpoint import Role
from weightscope.checkpoint.formats import write_safetensors

LLAMA_NAMES = {
    Role.WQ: "self_attn.q_proj.weight",
    Role.WK: "self_attn.k_proj.weight",
    Role.WV: "self_attn.v_proj.weight",
    Role.WO: "self_attn.o_proj.weight",
    Role.MLP_UP: "mlp.up_proj.weight",
    Role.MLP_DOWN: "mlp.down_proj.weight",
    Role.MLP_GATE: "mlp.gate_proj.weight",
}
MIXTRAL_EXPERT = {Role.EXPERT_W1: "w1", Role.EXPERT_W2: "w2", Role.EXPERT_W3: "w3"}


def stored(role: Role, oriented: np.ndarray) -> np.ndarray:
    """Checkpoint layout of an oriented matrix (undo the orientation transpose)."""
    return np.ascontiguousarray(oriented.T if role.transposed else oriented)


def llama_tensors(layers: list[dict[Role, np.ndarray]], dtype=np.float32) -> dict:
    out = {}
    for i, mats in enumerate(layers):
        for role, m in mats.items():
            out[f"model.layers.{i}.{LLAMA_NAMES[role]}"] = stored(role, m).astype(dtype)
    return out


def write_llama(path: Path, layers: list[dict[Role, np.ndarray]], dtype=np.float32) -> Path:
    write_safetensors(path, llama_tensors(layers, dtype))
    return path


def write_role_series(path: Path, role: Role, oriented: list[np.ndarray]) -> Path:
    return write_llama(path, [{role: m} for m in oriented])


def write_mixtral(path: Path, experts: dict[int, dict[Role, list[np.ndarray]]]) -> Path:
    tensors = {}
    for layer, by_role in experts.items():
        for role, mats in by_role.items():
            for e, m in enumerate(mats):
                name = f"model.layers.{layer}.block_sparse_moe.experts.{e}.{MIXTRAL_EXPERT[role]}.weight"
                tensors[name] = stored(role, m).astype(np.float32)
    write_safetensors(path, tensors)
    return path


def gaussian(seed: int, shape) -> np.ndarray:
    return R.normal(R.generator(seed), shape)


def planted_cluster(seed: int, n: int = 64, m: int = 128,
                    clusters=((0, 4), (4, 8), (8, 12)), sigma: float = 0.5) -> list[np.ndarray]:
    """Oriented layers sharing a per-cluster base plus independent noise."""
    g = R.generator(seed)
    mats = []
    for lo, hi in clusters:
        base = R.normal(g, (n, m))
        mats.extend(base + sigma * R.normal(g, (n, m)) for _ in range(lo, hi))
    return mats


def ratio_fixture(seed: int, layers: int = 2, n: int = 256, m: int = 512):
    """(A, B, C) per layer: B is A plus noise at 1% of each column norm, C is fresh."""
    g = R.generator(seed)
    a, b, c = [], [], []
    for _ in range(layers):
        x = R.normal(g, (n, m))
        scale = 0.01 * np.linalg.norm(x, axis=0) / np.sqrt(n)
        a.append(x)
        b.append(x + scale * R.normal(g, (n, m)))
        c.append(R.normal(g, (n, m)))
    return a, b, c
