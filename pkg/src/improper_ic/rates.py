"""
Achievable rates under improper Gaussian signaling with interference
treated as noise.

All computations are done in nats; :class:`RateBreakdown` carries a
``units`` flag and converts on request.
"""

from dataclasses import dataclass

import numpy as np

from .signal_model import received_stats

LN2 = np.log(2.0)
_CLAMP = 1e-15


def _clean(r):
    return 0.0 if abs(r) < _CLAMP else float(r)


@dataclass(frozen=True)
class RateBreakdown:
    """Rate split into the proper-signaling term and the improper correction."""

    total: float
    proper_part: float
    improper_part: float
    units: str = "nats"

    def to(self, units):
        if units == self.units:
            return self
        if {units, self.units} != {"nats", "bits"}:
            raise ValueError(f"unknown units {units!r}")
        f = 1 / LN2 if units == "bits" else LN2
        return RateBreakdown(self.total * f, self.proper_part * f, self.improper_part * f, units)


def _logdet_hpd(A):
    """log det of a Hermitian positive definite matrix via Cholesky."""
    L = np.linalg.cholesky(A)
    return 2.0 * float(np.sum(np.log(np.real(np.diag(L)))))


def _improper_factor(Cy, Cty):
    """log det(I - Cy^{-1} Cty Cy^{-T} Cty^H)."""
    Ci = np.linalg.inv(Cy)
    n = Cy.shape[0]
    W = np.eye(n) - Ci @ Cty @ Ci.T @ Cty.conj().T
    sign, logabs = np.linalg.slogdet(W)
    if np.real(sign) <= 0:
        raise FloatingPointError("improper correction determinant is not positive")
    return float(logabs)


def mimo_rate(instance, strategies, k, units="nats"):
    """Rate of user ``k`` (0-based) in a K-user MIMO-IC.

    ``total`` is half the log-ratio of augmented determinants; the proper
    and improper parts are computed separately from their own formulas, so
    ``total == proper_part + improper_part`` is a genuine check.
    """
    st = received_stats(instance, strategies)[k]

    def aug(C, Ct):
        return np.block([[C, Ct], [Ct.conj(), C.conj()]])

    total = 0.5 * (_logdet_hpd(aug(st.Cy, st.Cty)) - _logdet_hpd(aug(st.Cs, st.Cts)))
    proper_part = _logdet_hpd(st.Cy) - _logdet_hpd(st.Cs)
    improper_part = 0.5 * (_improper_factor(st.Cy, st.Cty) - _improper_factor(st.Cs, st.Cts))
    return RateBreakdown(_clean(total), _clean(proper_part), _clean(improper_part)).to(units)


def siso_rate_arrays(h, sigma2, C1, C2, X1, X2):
    """Vectorized two-user SISO rates (nats).

    ``C*`` are powers and ``X*`` pseudo-covariances; all arguments
    broadcast. Returns ``(R1, R2)``.
    """
    g = np.abs(h) ** 2
    h2 = h ** 2
    s2 = sigma2
    Cs1 = g[0, 1] * C2 + s2
    Cs2 = g[1, 0] * C1 + s2
    Cy1 = g[0, 0] * C1 + Cs1
    Cy2 = g[1, 1] * C2 + Cs2
    Cts1 = h2[0, 1] * X2
    Cts2 = h2[1, 0] * X1
    Cty1 = h2[0, 0] * X1 + Cts1
    Cty2 = h2[1, 1] * X2 + Cts2
    R1 = 0.5 * np.log((Cy1 ** 2 - np.abs(Cty1) ** 2) / (Cs1 ** 2 - np.abs(Cts1) ** 2))
    R2 = 0.5 * np.log((Cy2 ** 2 - np.abs(Cty2) ** 2) / (Cs2 ** 2 - np.abs(Cts2) ** 2))
    return R1, R2


def siso_rate(instance, strategies, k, units="nats"):
    """Rate of user ``k`` (0-based) in the two-user SISO-IC, scalar closed forms."""
    st = received_stats(instance, strategies)[k]
    kb = 1 - k
    g = instance.gains
    C = [s.C for s in strategies]
    num = st.Cy ** 2 - abs(st.Cty) ** 2
    den = st.Cs ** 2 - abs(st.Cts) ** 2
    total = 0.5 * np.log(num / den)
    proper_part = np.log1p(g[k, k] * C[k] / (instance.sigma2 + g[k, kb] * C[kb]))
    improper_part = 0.5 * (np.log1p(-abs(st.Cty) ** 2 / st.Cy ** 2)
                           - np.log1p(-abs(st.Cts) ** 2 / st.Cs ** 2))
    return RateBreakdown(_clean(total), _clean(proper_part), _clean(improper_part)).to(units)


def rate_pair(instance, strategies, units="nats"):
    """(R1, R2) totals."""
    return tuple(siso_rate(instance, strategies, k, units).total for k in range(2))


def rate_region_sample(instance, strategy_grid, units="nats"):
    """Rate pairs achieved by each strategy pair in ``strategy_grid``.

    Returns an array of shape (n, 2).
    """
    pairs = [rate_pair(instance, sp, units) for sp in strategy_grid]
    return np.array(pairs, dtype=float).reshape(-1, 2)


def single_user_rate(instance, k):
    """Interference-free rate ``log(1 + |h_kk|^2 P_k / sigma2)`` (nats)."""
    return float(np.log1p(instance.gains[k, k] * instance.P[k] / instance.sigma2))


def profile_value(rates, alpha):
    """``min_k R_k / alpha_k``."""
    return float(min(r / a for r, a in zip(rates, alpha)))


def lemma3_residuals(instance, strategies):
    """``C_y^2 - |Ct_y|^2`` and ``C_s^2 - |Ct_s|^2`` at both receivers (4 values)."""
    out = []
    for st in received_stats(instance, strategies):
        out.append(st.Cy ** 2 - abs(st.Cty) ** 2)
        out.append(st.Cs ** 2 - abs(st.Cts) ** 2)
    return np.array(out)


__all__ = [
    "RateBreakdown", "mimo_rate", "siso_rate", "siso_rate_arrays", "rate_pair",
    "rate_region_sample", "single_user_rate", "profile_value", "lemma3_residuals",
]
