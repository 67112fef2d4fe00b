"""Tagged amplitude samples shared by every evaluation method."""
from __future__ import annotations

from dataclasses import dataclass

METHODS = ("series", "star_series", "rational", "asymptotic", "volterra", "laplace")

# Methods whose values are physical amplitudes and must be contractive.
# "asymptotic" is exempt: its formula is meaningful only at large t and its
# error field is a heuristic shell estimate, not a bound.
_CONTRACTIVE = frozenset(METHODS) - {"asymptotic"}

_CONTRACTIVITY_SLACK = 1e-9


@dataclass(frozen=True)
class GSample:
    """One evaluation of the survival amplitude G at time t.

    value carries the complex amplitude, error_bound the method's achieved
    absolute-error estimate, method the tag of the producing evaluator.
    """

    t: float
    value: complex
    error_bound: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not self.error_bound >= 0.0:
            raise ValueError("error_bound must be >= 0")
        if self.t < 0.0:
            raise ValueError("t must be >= 0")
        if self.method in _CONTRACTIVE:
            if abs(self.value) > 1.0 + self.error_bound + _CONTRACTIVITY_SLACK:
                raise ValueError(
                    f"non-contractive amplitude |G|={abs(self.value):.6g} at "
                    f"t={self.t:.6g} exceeds 1 + error_bound ({self.method})"
                )
