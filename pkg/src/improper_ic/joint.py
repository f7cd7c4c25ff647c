"""
Joint covariance / pseudo-covariance optimization by semidefinite relaxation.

The rate-profile problem is rewritten as a max-min of log-ratios of
quadratics in ``c = (C1, C2)`` and ``q = (Ct1, Ct2)``, homogenized with an
extra variable ``t`` and lifted to ``C = [t; c][t; c]^T``, ``Q = q q^H``.
Dropping the rank-1 constraints gives a quasi-convex problem solved by
bisection on SDP feasibility; a rank-1 answer is then extracted by Gaussian
randomization.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .conic import bisect_sup, sdp_feasible
from .pareto import as_profile, make_point
from .signal_model import SignalStrategy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SdrData:
    """Constant data of the lifted problem for one channel and profile.

    Index ``k`` (0-based) runs over users. ``A[k] = [s2; a_k][s2; a_k]^T``,
    ``F[k] = f_k f_k^H`` and likewise ``B``, ``G``.
    """

    a: np.ndarray
    b: np.ndarray
    f: np.ndarray
    g: np.ndarray
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    G: np.ndarray
    K: np.ndarray
    Ehat: np.ndarray
    E: np.ndarray
    alpha: tuple
    P: tuple
    sigma2: float

    def quadratics(self, c, q, t=1.0):
        """Numerators and denominators ``(sigma2 t + a_k.c)^2 - |f_k^H q|^2`` etc."""
        c = np.asarray(c, float)
        q = np.asarray(q, complex)
        num = (self.sigma2 * t + c @ self.a.T) ** 2 - np.abs(q @ self.f.conj().T) ** 2
        den = (self.sigma2 * t + c @ self.b.T) ** 2 - np.abs(q @ self.g.conj().T) ** 2
        return num, den

    def lifted(self, C, Q):
        """``Tr(A_k C) - Tr(F_k Q)`` and ``Tr(B_k C) - Tr(G_k Q)`` for k = 1, 2."""
        num = np.array([np.trace(self.A[k] @ C) - np.real(np.trace(self.F[k] @ Q)) for k in range(2)])
        den = np.array([np.trace(self.B[k] @ C) - np.real(np.trace(self.G[k] @ Q)) for k in range(2)])
        return num, den

    def objective(self, c, q):
        """Profile value ``min_k log(num_k / den_k) / (2 alpha_k)`` (nats); vectorized over rows."""
        num, den = self.quadratics(c, q)
        return np.min(np.log(num / den) / (2 * np.asarray(self.alpha)), axis=-1)

    def upper_bound(self):
        """Target above which the lifted problem is provably infeasible.

        ``Tr(A_k C) <= (s2 + a_k . P)^2`` for any PSD ``C`` with ``C11 = 1`` and
        diagonal bounded by ``P^2``, while the denominators are at least
        ``s2^2``.
        """
        P = np.asarray(self.P)
        return float(min(np.log1p(self.a[k] @ P / self.sigma2) / self.alpha[k] for k in range(2)))


def build_sdr(instance, alpha):
    alpha = as_profile(alpha)
    h, s2 = instance.h, instance.sigma2
    g = np.abs(h) ** 2
    a = np.array([[g[0, 0], g[0, 1]], [g[1, 0], g[1, 1]]])
    b = np.array([[0.0, g[0, 1]], [g[1, 0], 0.0]])
    h2 = h ** 2
    f = np.conj(np.array([[h2[0, 0], h2[0, 1]], [h2[1, 0], h2[1, 1]]]))
    gg = np.conj(np.array([[0.0, h2[0, 1]], [h2[1, 0], 0.0]]))

    def lift(v):
        w = np.concatenate([[s2], v])
        return np.outer(w, w)

    A = np.array([lift(a[k]) for k in range(2)])
    B = np.array([lift(b[k]) for k in range(2)])
    F = np.array([np.outer(f[k], f[k].conj()) for k in range(2)])
    G = np.array([np.outer(gg[k], gg[k].conj()) for k in range(2)])
    E = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    K = np.zeros((2, 3, 3))
    Ehat = np.zeros((2, 3, 3))
    for k in range(2):
        K[k, 0, k + 1] = K[k, k + 1, 0] = 0.5
        Ehat[k, 1:, 1:] = E[k]
    return SdrData(a, b, f, gg, A, B, F, G, K, Ehat, E, (alpha.alpha1, alpha.alpha2),
                   tuple(instance.P), s2)


@dataclass
class SdrSolution:
    C: np.ndarray
    Q: np.ndarray
    R_sdr: float
    R_feasible: float
    iterations: int
    undecided: int
    history: list


def solve_sdr(sdr, tol=1e-4, sdp_tol=1e-7, max_newton=200):
    """Bisection on lifted SDP feasibility.

    ``R_sdr`` is the smallest rejected target (an upper bound on the rank-1
    optimum); ``(C, Q)`` is the witness of the largest accepted target
    ``R_feasible``.
    """
    def oracle(R):
        return sdp_feasible(sdr, R, tol=sdp_tol, max_iter=max_newton)

    res = bisect_sup(oracle, 0.0, sdr.upper_bound(), tol=tol)
    if res.empty:
        raise RuntimeError("lifted problem infeasible at zero rate")
    C, Q = res.witness
    undecided = sum(1 for _, st in res.history if st == "undecided")
    return SdrSolution(C=C, Q=Q, R_sdr=res.upper, R_feasible=res.value,
                       iterations=res.iterations, undecided=undecided, history=res.history)


def is_rank1(M, tol=1e-6):
    """True iff the second-largest eigenvalue is at most ``tol`` times the largest."""
    w = np.linalg.eigvalsh(np.asarray(M))
    if w[-1] <= 0:
        return True
    return bool(w[-2] <= tol * w[-1])


def _psd_factor(M):
    w, V = np.linalg.eigh(M)
    return V * np.sqrt(np.clip(w, 0.0, None))


def principal_candidate(C, Q):
    """(c, q) from the principal eigenvectors of the lifted solution, or None."""
    w, V = np.linalg.eigh(C)
    v = V[:, -1] * np.sqrt(max(w[-1], 0.0))
    if abs(v[0]) < 1e-12:
        return None
    wq, U = np.linalg.eigh(Q)
    beta = U[:, -1] * np.sqrt(max(wq[-1], 0.0))
    return v[1:] / v[0], beta / v[0]


def project(sdr, c, q):
    """Clip powers into the box and shrink each pseudo-covariance to ``|q_k| <= c_k``."""
    P = np.asarray(sdr.P)
    c_hat = np.clip(c, 0.0, P)
    mag = np.abs(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(mag > c_hat, c_hat / np.where(mag > 0, mag, 1.0), 1.0)
    return c_hat, eta * q


def randomize(C, Q, sdr, L=1000, seed=0):
    """Gaussian randomization from the lifted solution.

    Trial 0 is the principal-component candidate; trials ``1..L-1`` draw
    ``[t; xi] ~ N(0, C)`` and ``beta ~ CN(0, Q)``. Returns
    ``(c_hat, q_hat, value, info)`` for the best projected trial.
    """
    rng = np.random.default_rng(seed)
    Lc = _psd_factor(0.5 * (C + C.T))
    Lq = _psd_factor(0.5 * (Q + Q.conj().T))
    cs = np.empty((L, 2))
    qs = np.empty((L, 2), dtype=complex)
    start = 0
    pc = principal_candidate(C, Q)
    if pc is not None:
        cs[0], qs[0] = pc
        start = 1
    n = L - start
    redraws = 0
    if n > 0:
        z = rng.standard_normal((n, 3)) @ Lc.T
        small = np.abs(z[:, 0]) < 1e-12
        while np.any(small):
            redraws += int(small.sum())
            z[small] = rng.standard_normal((int(small.sum()), 3)) @ Lc.T
            small = np.abs(z[:, 0]) < 1e-12
        beta = ((rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))) / np.sqrt(2.0)) @ Lq.T
        cs[start:] = z[:, 1:] / z[:, :1]
        qs[start:] = beta / z[:, :1]
    if redraws:
        log.info("randomization redrew %d trials with t ~ 0", redraws)
    c_hat, q_hat = project(sdr, cs, qs)
    vals = sdr.objective(c_hat, q_hat)
    best = int(np.argmax(vals))
    info = {"trials": L, "best_trial": best, "principal_included": pc is not None,
            "principal_value": float(vals[0]) if pc is not None else None, "redraws": redraws}
    return c_hat[best], q_hat[best], float(vals[best]), info


def joint_pareto_point(instance, alpha, L=1000, seed=0, tol=1e-4):
    """Pareto point for profile ``alpha`` by SDR plus Gaussian randomization."""
    alpha = as_profile(alpha)
    sdr = build_sdr(instance, alpha)
    sol = solve_sdr(sdr, tol=tol)
    c, q, value, info = randomize(sol.C, sol.Q, sdr, L=L, seed=seed)
    strategies = (SignalStrategy(float(c[0]), complex(q[0])),
                  SignalStrategy(float(c[1]), complex(q[1])))
    pt = make_point(instance, strategies, alpha, "joint")
    pt.diagnostics.update(
        R_sdr=sol.R_sdr,
        R_sdr_feasible=sol.R_feasible,
        rank1_C=is_rank1(sol.C),
        rank1_Q=is_rank1(sol.Q),
        randomized_value=value,
        sdp_probes=sol.iterations,
        sdp_undecided=sol.undecided,
        ray_deviation=pt.rates[0] / sum(pt.rates) - alpha.alpha1 if sum(pt.rates) > 0 else 0.0,
        seed=seed,
        **info,
    )
    return pt
