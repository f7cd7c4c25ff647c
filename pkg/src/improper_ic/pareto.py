"""Rate profiles and Pareto points shared by all two-user solvers."""

from dataclasses import dataclass, field

import numpy as np

from .rates import LN2, rate_pair


@dataclass(frozen=True)
class RateProfile:
    """Target split ``(alpha1, alpha2)`` of the sum rate, both positive, summing to 1."""

    alpha1: float
    alpha2: float

    def __post_init__(self):
        a1, a2 = float(self.alpha1), float(self.alpha2)
        if not (a1 > 0 and a2 > 0):
            raise ValueError(f"rate profile entries must be positive, got ({a1}, {a2})")
        if abs(a1 + a2 - 1.0) > 1e-12:
            raise ValueError(f"rate profile must sum to 1, got {a1 + a2}")
        object.__setattr__(self, "alpha1", a1)
        object.__setattr__(self, "alpha2", a2)

    @classmethod
    def from_first(cls, alpha1):
        return cls(alpha1, 1.0 - alpha1)

    def __iter__(self):
        return iter((self.alpha1, self.alpha2))

    def __getitem__(self, k):
        return (self.alpha1, self.alpha2)[k]


def as_profile(alpha):
    if isinstance(alpha, RateProfile):
        return alpha
    a1, a2 = alpha
    return RateProfile(a1, a2)


@dataclass
class ParetoPoint:
    """A solver's answer for one rate profile.

    ``R`` is the profile value in nats (``min_k R_k / alpha_k`` for the
    returned strategy, or the certified bisection value for exact solvers);
    ``rates`` are the per-user rates in nats recomputed from ``strategies``.
    """

    R: float
    rates: tuple
    strategies: tuple
    alpha: RateProfile
    method: str
    diagnostics: dict = field(default_factory=dict)

    def sum_rate(self, units="bits"):
        s = float(sum(self.rates))
        return s / LN2 if units == "bits" else s

    def rates_in(self, units="bits"):
        return tuple(r / LN2 for r in self.rates) if units == "bits" else tuple(self.rates)

    def R_in(self, units="bits"):
        return self.R / LN2 if units == "bits" else self.R

    @property
    def min_weighted(self):
        return float(min(r / a for r, a in zip(self.rates, self.alpha)))

    def to_dict(self, units="bits"):
        return {
            "method": self.method,
            "alpha": [self.alpha.alpha1, self.alpha.alpha2],
            "units": units,
            "R": self.R_in(units),
            "rates": list(self.rates_in(units)),
            "sum_rate": self.sum_rate(units),
            "strategies": [s.to_dict() for s in self.strategies],
            "diagnostics": _jsonable(self.diagnostics),
        }


def make_point(instance, strategies, alpha, method, R=None, **diagnostics):
    rates = rate_pair(instance, strategies)
    value = float(min(r / a for r, a in zip(rates, alpha))) if R is None else float(R)
    return ParetoPoint(value, rates, tuple(strategies), alpha, method, diagnostics)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj
