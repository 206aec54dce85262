"""
Step-size schedules: a constant rate or base/√t.
"""
import math
from dataclasses import dataclass
from typing import Union

CONSTANT = "constant"
SQRT = "sqrt"


@dataclass(frozen=True)
class StepSchedule:
    kind: str = CONSTANT
    base: float = 1.0

    def __post_init__(self):
        if self.kind not in (CONSTANT, SQRT):
            raise ValueError(f"unknown step schedule {self.kind!r}; expected '{CONSTANT}' or '{SQRT}'")
        if not self.base > 0 or not math.isfinite(self.base):
            raise ValueError(f"step size must be positive and finite, got {self.base}")

    def rate(self, t: int) -> float:
        """α^t for the 1-based iteration t."""
        if t < 1:
            raise ValueError(f"iterations are 1-based, got {t}")
        if self.kind == SQRT:
            return self.base / math.sqrt(t)
        return self.base

    @classmethod
    def parse(cls, text: Union[str, float], scale: float = 1.0) -> "StepSchedule":
        """'sqrt' gives scale/√t; a number gives that constant rate (times scale)."""
        if isinstance(text, str) and text.strip().lower() == SQRT:
            return cls(SQRT, float(scale))
        try:
            value = float(text)
        except (TypeError, ValueError):
            raise ValueError(f"learning rate must be a number or '{SQRT}', got {text!r}") from None
        return cls(CONSTANT, value * float(scale))

    def describe(self) -> str:
        if self.kind == SQRT:
            return f"{self.base!r}/sqrt(t)"
        return repr(self.base)
