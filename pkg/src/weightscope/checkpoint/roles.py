"""Weight-matrix role tags and the orientation convention."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class Role(str, Enum):
    WQ = "Wq"
    WK = "Wk"
    WV = "Wv"
    WO = "Wo"
    MLP_UP = "MlpUp"
    MLP_DOWN = "MlpDown"
    MLP_GATE = "MlpGate"
    EXPERT_W1 = "ExpertW1"
    EXPERT_W2 = "ExpertW2"
    EXPERT_W3 = "ExpertW3"

    @property
    def is_expert(self) -> bool:
        return self in _EXPERT_ROLES

    @property
    def transposed(self) -> bool:
        """Whether the stored (out, in) layout must be transposed so that
        columns are neuron weight vectors."""
        return self in _TRANSPOSED_ROLES


_EXPERT_ROLES = frozenset({Role.EXPERT_W1, Role.EXPERT_W2, Role.EXPERT_W3})
_TRANSPOSED_ROLES = frozenset({
    Role.WQ, Role.WK, Role.WV, Role.MLP_UP, Role.MLP_GATE,
    Role.EXPERT_W1, Role.EXPERT_W3,
})

_TAG_RE = re.compile(r"(?P<role>[A-Za-z0-9]+)(?:[:\[](?P<expert>\d+)\]?)?")


@dataclass(frozen=True)
class RoleTag:
    role: Role
    expert: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        if self.role.is_expert:
            if self.expert is None or self.expert < 0:
                raise ValueError(f"{self.role.value} needs a non-negative expert index")
        elif self.expert is not None:
            raise ValueError(f"{self.role.value} does not take an expert index")

    @classmethod
    def parse(cls, text: str) -> "RoleTag":
        """Parse ``"MlpUp"`` or ``"ExpertW1:3"`` (also ``"ExpertW1[3]"``)."""
        m = _TAG_RE.fullmatch(text.strip())
        if m is None:
            raise ValueError(f"cannot parse role tag {text!r}")
        try:
            role = Role(m["role"])
        except ValueError:
            raise ValueError(f"unknown role {m['role']!r}") from None
        expert = int(m["expert"]) if m["expert"] is not None else None
        return cls(role, expert)

    def sort_key(self) -> tuple[str, int]:
        return (self.role.value, -1 if self.expert is None else self.expert)

    def __str__(self) -> str:
        if self.expert is None:
            return self.role.value
        return f"{self.role.value}:{self.expert}"
