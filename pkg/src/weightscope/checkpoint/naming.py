"""Regex naming configs that map raw tensor names to (layer, role) slots.

A config is JSON of the form::

    {"patterns": [{"regex": "model\\.layers\\.(?P<layer>\\d+)\\.mlp\\.up_proj\\.weight",
                   "role": "MlpUp"}]}

Each regex is matched against the full tensor name. It must define a named
group ``layer``; expert roles additionally need ``expert``. The first
matching pattern wins.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from ..errors import ParseError
from .roles import Role, RoleTag


@dataclass(frozen=True)
class NamingPattern:
    regex: re.Pattern
    role: Role


@dataclass(frozen=True)
class NamingConfig:
    patterns: tuple[NamingPattern, ...]

    @classmethod
    def from_dict(cls, doc) -> "NamingConfig":
        if not isinstance(doc, dict) or not isinstance(doc.get("patterns"), list):
            raise ParseError('naming config must be an object with a "patterns" list')
        patterns = []
        for i, entry in enumerate(doc["patterns"]):
            if not isinstance(entry, dict) or not {"regex", "role"} <= entry.keys():
                raise ParseError(f"pattern {i}: expected keys 'regex' and 'role'")
            try:
                regex = re.compile(entry["regex"])
                role = Role(entry["role"])
            except (re.error, ValueError, TypeError) as exc:
                raise ParseError(f"pattern {i}: {exc}") from None
            if "layer" not in regex.groupindex:
                raise ParseError(f"pattern {i}: regex lacks a named group 'layer'")
            if role.is_expert and "expert" not in regex.groupindex:
                raise ParseError(f"pattern {i}: expert role needs a named group 'expert'")
            patterns.append(NamingPattern(regex, role))
        return cls(tuple(patterns))

    @classmethod
    def load(cls, path) -> "NamingConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None
        return cls.from_dict(doc)

    def match(self, name: str) -> tuple[int, RoleTag] | None:
        for pat in self.patterns:
            m = pat.regex.fullmatch(name)
            if m is None:
                continue
            expert = int(m["expert"]) if pat.role.is_expert else None
            return int(m["layer"]), RoleTag(pat.role, expert)
        return None


def _hf_patterns(prefix: str, mlp: dict[str, str]) -> dict:
    layer = prefix + r"layers\.(?P<layer>\d+)\."
    pats = [
        {"regex": layer + r"self_attn\.q_proj\.weight", "role": "Wq"},
        {"regex": layer + r"self_attn\.k_proj\.weight", "role": "Wk"},
        {"regex": layer + r"self_attn\.v_proj\.weight", "role": "Wv"},
        {"regex": layer + r"self_attn\.o_proj\.weight", "role": "Wo"},
    ]
    pats += [{"regex": layer + rx, "role": role} for rx, role in mlp.items()]
    return {"patterns": pats}


_DENSE_MLP = {
    r"mlp\.up_proj\.weight": "MlpUp",
    r"mlp\.down_proj\.weight": "MlpDown",
    r"mlp\.gate_proj\.weight": "MlpGate",
}

PRESETS: dict[str, dict] = {
    "llama": _hf_patterns(r"model\.", _DENSE_MLP),
    # Gemma-2 uses Llama module names; multimodal exports nest under language_model.
    "gemma": _hf_patterns(r"(?:language_model\.)?model\.", _DENSE_MLP),
    "mixtral": _hf_patterns(r"model\.", {
        r"block_sparse_moe\.experts\.(?P<expert>\d+)\.w1\.weight": "ExpertW1",
        r"block_sparse_moe\.experts\.(?P<expert>\d+)\.w2\.weight": "ExpertW2",
        r"block_sparse_moe\.experts\.(?P<expert>\d+)\.w3\.weight": "ExpertW3",
    }),
}


def resolve_naming(naming) -> NamingConfig:
    """Accept a NamingConfig, a preset name, or a path to a JSON config."""
    if isinstance(naming, NamingConfig):
        return naming
    if isinstance(naming, dict):
        return NamingConfig.from_dict(naming)
    key = str(naming)
    if key in PRESETS:
        return NamingConfig.from_dict(PRESETS[key])
    path = Path(key)
    if not path.is_file():
        raise ParseError(f"unknown naming preset or missing file: {key!r} "
                         f"(presets: {', '.join(sorted(PRESETS))})")
    return NamingConfig.load(path)
