from .formats import TensorRecord, bf16_bits, read_safetensors_header, write_safetensors
from .index import (CheckpointIndex, WeightMatrix, load_matrix, load_oriented,
                    open_checkpoint, orient_matrix)
from .naming import PRESETS, NamingConfig, resolve_naming
from .roles import Role, RoleTag

__all__ = [
    "CheckpointIndex", "NamingConfig", "PRESETS", "Role", "RoleTag", "TensorRecord",
    "WeightMatrix", "bf16_bits", "load_matrix", "load_oriented", "open_checkpoint",
    "orient_matrix", "read_safetensors_header", "resolve_naming", "write_safetensors",
]
