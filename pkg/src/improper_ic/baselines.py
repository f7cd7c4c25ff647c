"""
Reference points: brute-force grid oracle, TDMA and max-min dispatch.

The oracle searches the SISO strategy space directly. By the common-phase
rotation invariance of the rates, user 1's pseudo-covariance can be taken
real and nonnegative, leaving five axes: the two powers, the two
pseudo-covariance magnitudes as fractions of the powers, and the phase of
user 2's pseudo-covariance.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .pareto import as_profile, make_point
from .rates import siso_rate_arrays
from .signal_model import SignalStrategy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution for :func:`grid_oracle`."""

    n_power: int = 21
    n_mag: int = 11
    n_theta: int = 72
    refine: int = 3

    def __post_init__(self):
        if self.n_power < 2:
            raise ValueError("n_power must be >= 2")
        if self.n_mag < 1 or self.n_theta < 1:
            raise ValueError("n_mag and n_theta must be >= 1")
        if self.refine < 0:
            raise ValueError("refine must be >= 0")

    @property
    def size(self):
        return self.n_power ** 2 * self.n_mag ** 2 * self.n_theta

    def proper_only(self):
        """Same powers, pseudo-covariances pinned at zero."""
        return GridSpec(self.n_power, 1, 1, self.refine)


def _objective(h, s2, alpha, C1, C2, m1, m2, th):
    X1 = m1 * C1
    X2 = m2 * C2 * np.exp(1j * th)
    R1, R2 = siso_rate_arrays(h, s2, C1, C2, X1, X2)
    return np.minimum(R1 / alpha[0], R2 / alpha[1])


def _best_on_axes(h, s2, alpha, axes, chunk=2_000_000):
    """Max of the objective over the tensor grid ``axes``; ties go to the lowest flat index."""
    a1, a2, a3, a4, a5 = axes
    inner = a2.size * a3.size * a4.size * a5.size
    per = max(1, chunk // max(inner, 1))
    best_val, best_idx = -np.inf, None
    C2, m1, m2, th = np.meshgrid(a2, a3, a4, a5, indexing="ij")
    for start in range(0, a1.size, per):
        C1 = a1[start:start + per][:, None, None, None, None]
        v = _objective(h, s2, alpha, C1, C2[None], m1[None], m2[None], th[None])
        v = np.where(np.isnan(v), -np.inf, v)
        i = int(np.argmax(v))
        if v.flat[i] > best_val:
            best_val = float(v.flat[i])
            idx = np.unravel_index(i, v.shape)
            best_idx = (idx[0] + start,) + tuple(idx[1:])
    point = tuple(ax[j] for ax, j in zip(axes, best_idx))
    return best_val, point


def grid_oracle(instance, alpha, spec=None, proper=False):
    """Brute-force Pareto point for profile ``alpha``.

    Parameters
    ----------
    spec : GridSpec, optional
        Defaults to ``GridSpec()``.
    proper : bool
        Restrict the search to zero pseudo-covariances.

    The full search also refines the proper subspace on its own and keeps
    the better of the two, so the full value never falls below the
    proper-restricted one.
    """
    alpha = as_profile(alpha)
    spec = spec or GridSpec()
    al = (alpha.alpha1, alpha.alpha2)
    h, s2 = instance.h, instance.sigma2
    P1, P2 = instance.P
    n_mag = 1 if proper else spec.n_mag
    n_th = 1 if proper else spec.n_theta
    n_mag_ax = max(spec.n_mag - 1, 1)
    log.info("grid oracle: %d coarse points", spec.n_power ** 2 * n_mag ** 2 * n_th)

    axes = [np.linspace(0, P1, spec.n_power), np.linspace(0, P2, spec.n_power),
            np.linspace(0, 1, spec.n_mag) if n_mag > 1 else np.zeros(n_mag),
            np.linspace(0, 1, spec.n_mag) if n_mag > 1 else np.zeros(n_mag),
            # (-pi, pi]
            np.linspace(-np.pi, np.pi, n_th + 1)[1:] if n_th > 1 else np.zeros(1)]
    val, pt = _best_on_axes(h, s2, al, axes)
    history = [val]

    lows = np.array([0.0, 0.0, 0.0, 0.0, -np.inf])
    highs = np.array([P1, P2, 1.0, 1.0, np.inf])
    width = np.array([P1 / (spec.n_power - 1), P2 / (spec.n_power - 1),
                      1.0 / n_mag_ax, 1.0 / n_mag_ax,
                      2 * np.pi / spec.n_theta])
    free = [True, True, n_mag > 1, n_mag > 1, n_th > 1]
    for _ in range(spec.refine):
        new_axes = []
        for j in range(5):
            if not free[j]:
                new_axes.append(np.array([pt[j]]))
                continue
            ax = np.clip(pt[j] + width[j] * np.linspace(-1, 1, 5), lows[j], highs[j])
            new_axes.append(np.unique(np.append(ax, pt[j])))
        v, p = _best_on_axes(h, s2, al, new_axes)
        if v > val:
            val, pt = v, p
        history.append(val)
        width = width / 4.0

    if not proper:
        sub = grid_oracle(instance, alpha, spec, proper=True)
        if sub.R > val:
            val = sub.R
            pt = (sub.strategies[0].C, sub.strategies[1].C, 0.0, 0.0, 0.0)
            history.append(val)

    C1, C2, m1, m2, th = (float(x) for x in pt)
    th = float(np.angle(np.exp(1j * th)))
    strategies = (SignalStrategy(C1, complex(m1 * C1)),
                  SignalStrategy(C2, complex(m2 * C2 * np.exp(1j * th))))
    method = "oracle-proper" if proper else "oracle"
    return make_point(instance, strategies, alpha, method, grid=spec.__dict__.copy(),
                      coarse_points=int(spec.n_power ** 2 * n_mag ** 2 * n_th),
                      refine_history=history, theta=th)


def tdma_maxmin(instance):
    """Max-min rate of equal-time TDMA at power ``P_k`` (nats)."""
    g = instance.gains
    return float(min(0.5 * np.log1p(g[k, k] * instance.P[k] / instance.sigma2) for k in range(2)))


def maxmin_point(instance, method, **kwargs):
    """Max-min point with ``alpha = (1/2, 1/2)`` by the named method.

    ``method`` is one of ``proper``, ``separate``, ``joint``, ``oracle``,
    ``tdma``. The scalar figure of merit is ``min(point.rates)``; for
    ``tdma`` the returned point carries equal rates and no strategies.
    """
    alpha = as_profile((0.5, 0.5))
    if method == "tdma":
        from .pareto import ParetoPoint
        r = tdma_maxmin(instance)
        return ParetoPoint(2 * r, (r, r), (), alpha, "tdma", {"time_share": 0.5})
    if method == "oracle":
        return grid_oracle(instance, alpha, kwargs.get("spec"))
    if method == "proper":
        from .separate import proper_point
        return proper_point(instance, alpha, **kwargs)
    if method == "separate":
        from .separate import improper_pareto_point
        return improper_pareto_point(instance, alpha, **kwargs)
    if method == "joint":
        from .joint import joint_pareto_point
        return joint_pareto_point(instance, alpha, **kwargs)
    raise ValueError(f"unknown method {method!r}")
