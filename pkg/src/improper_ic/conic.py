"""
Small fixed-shape feasibility solvers and a bisection driver.

* :func:`bisect_sup` -- supremum of a monotone feasibility oracle.
* :func:`lp2_feasible` -- two-variable LP feasibility by vertex enumeration.
* :func:`socp2_min_residual` / :func:`socp2_feasible` -- the two-cone,
  two-variable SOCP used for pseudo-covariance feasibility, vectorized over
  the phase of the second pseudo-covariance.
* :func:`sdp_feasible` -- max-slack phase-I barrier method for the lifted
  problem with one 3x3 real symmetric and one 2x2 Hermitian block.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

log = logging.getLogger(__name__)

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class FeasibilityVerdict:
    """Outcome of one feasibility probe.

    ``status`` is ``"feasible"``, ``"infeasible"`` or ``"undecided"``; an
    undecided verdict reports ``feasible=False``.
    """

    feasible: bool
    witness: object = None
    max_violation: float = np.nan
    status: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.status:
            self.status = "feasible" if self.feasible else "infeasible"


@dataclass
class BisectionResult:
    """Result of :func:`bisect_sup`.

    ``value`` is the last feasible probe, ``upper`` the last infeasible one
    (equal to ``value`` when the upper bracket itself was feasible).
    ``value`` is nan when even the lower bracket is infeasible.
    """

    value: float
    upper: float
    witness: object
    verdict: FeasibilityVerdict
    iterations: int
    history: list

    @property
    def empty(self):
        return np.isnan(self.value)


def bisect_sup(oracle, lo, hi, tol=1e-4, max_iter=200):
    """Largest target accepted by a monotone feasibility ``oracle``.

    The oracle maps a float to a :class:`FeasibilityVerdict`; its feasible
    set must be an interval closed downward.
    """
    if hi < lo:
        raise ValueError("hi must be >= lo")
    history = []

    def probe(r):
        v = oracle(r)
        history.append((float(r), v.status))
        if v.status == "undecided":
            log.warning("undecided feasibility probe at %.9g", r)
        return v

    v_lo = probe(lo)
    if not v_lo.feasible:
        return BisectionResult(np.nan, float(lo), None, v_lo, 1, history)
    v_hi = probe(hi)
    if v_hi.feasible:
        return BisectionResult(float(hi), float(hi), v_hi.witness, v_hi, 2, history)
    best, it = v_lo, 2
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        v = probe(mid)
        it += 1
        if v.feasible:
            lo, best = mid, v
        else:
            hi = mid
    return BisectionResult(float(lo), float(hi), best.witness, best, it, history)


# --------------------------------------------------------------------------
# LP in two variables
# --------------------------------------------------------------------------

def lp2_feasible(constraints, P, slack=1e-12):
    """Feasibility of ``{c in [0,P1] x [0,P2] : g . c >= r for (g1, g2, r) in constraints}``.

    Decided by enumerating pairwise intersections of constraint and box
    lines. The witness is the mean of the feasible vertices (a point of the
    convex feasible polygon).
    """
    P1, P2 = float(P[0]), float(P[1])
    if P1 < 0 or P2 < 0:
        return FeasibilityVerdict(False, max_violation=max(-P1, -P2))
    rows = [tuple(map(float, c)) for c in constraints]
    if len(rows) > 8:
        raise ValueError("at most 8 constraints are supported")
    rows += [(1.0, 0.0, 0.0), (-1.0, 0.0, -P1), (0.0, 1.0, 0.0), (0.0, -1.0, -P2)]
    G = np.array([r[:2] for r in rows])
    r = np.array([r[2] for r in rows])

    def violation(c):
        lhs = G @ c
        scale = np.maximum(1.0, np.maximum(np.abs(r), np.abs(G) @ np.abs(c)))
        return float(np.max((r - lhs) / scale))

    verts = []
    for i, j in combinations(range(len(rows)), 2):
        A = G[[i, j]]
        det = np.linalg.det(A)
        if abs(det) < 1e-14 * max(1.0, np.abs(A).max() ** 2):
            continue
        c = np.linalg.solve(A, r[[i, j]])
        if violation(c) <= slack:
            verts.append(c)
    if not verts:
        return FeasibilityVerdict(False, max_violation=np.inf)
    w = np.mean(verts, axis=0)
    w = np.clip(w, 0.0, [P1, P2])
    return FeasibilityVerdict(True, witness=w, max_violation=max(0.0, violation(w)),
                              info={"vertices": np.array(verts)})


# --------------------------------------------------------------------------
# Two-cone SOCP over (X1, t), vectorized over theta
# --------------------------------------------------------------------------

def _golden_argmin(f, lo, hi, iters):
    """Vectorized golden-section minimization of a convex ``f`` on [lo, hi]."""
    a, b = np.array(lo, float), np.array(hi, float)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
        fnew = f(new)
        c, d, fc, fd = (np.where(left, new, d), np.where(left, c, new),
                        np.where(left, fnew, fd), np.where(left, fc, fnew))
    # endpoints too: the minimizer of a convex function on a box may sit on it
    cand = np.stack([c, d, np.array(lo, float) + 0 * c, np.array(hi, float) + 0 * c])
    vals = np.stack([fc, fd, f(cand[2]), f(cand[3])])
    i = np.argmin(vals, axis=0)[None]
    return (np.take_along_axis(cand, i, axis=0)[0],
            np.take_along_axis(vals, i, axis=0)[0])


@dataclass
class SocpProblem:
    """Data of the pseudo-covariance feasibility cone pair.

    Constraints, with ``X1`` real in [0, X1max] and ``t`` in [0, tmax]::

        sqrt(a1 |u1 X1 + v1 t e^{i theta}|^2 + b1) <= t
        sqrt(a2 |u2 X1 + v2 t e^{i theta}|^2 + b2) <= X1

    where ``u1 = h11^2, v1 = h12^2, u2 = h21^2, v2 = h22^2``.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    h: np.ndarray
    X1max: float
    tmax: float

    @property
    def scale(self):
        return max(1.0, self.X1max, self.tmax)

    def residuals(self, X1, t, theta):
        h2 = np.asarray(self.h) ** 2
        e = np.exp(1j * np.asarray(theta))
        r1 = np.sqrt(self.a1 * np.abs(h2[0, 0] * X1 + h2[0, 1] * t * e) ** 2 + self.b1) - t
        r2 = np.sqrt(self.a2 * np.abs(h2[1, 0] * X1 + h2[1, 1] * t * e) ** 2 + self.b2) - X1
        return r1, r2


def socp2_min_residual(prob, theta, iters=45, n_grid=33, rel_width=1e-12):
    """Minimize ``max(r1, r2)`` over the box for each angle in ``theta``.

    The objective is jointly convex in (X1, t), so its partial minimum over
    ``t`` is convex in ``X1``. The inner minimum is found by golden-section
    search, run for a whole grid of ``X1`` values at once; the outer search
    keeps the two grid cells around the best ``X1`` (which must contain the
    minimizer of a convex function) and repeats until the bracket is below
    ``rel_width`` of the box. Returns ``(F, X1, t)`` arrays.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    h2 = np.asarray(prob.h) ** 2
    e = np.exp(1j * theta)[:, None]
    a1, a2, b1, b2 = prob.a1, prob.a2, prob.b1, prob.b2

    def F(X1, t):
        r1 = np.sqrt(a1 * np.abs(h2[0, 0] * X1 + h2[0, 1] * t * e) ** 2 + b1) - t
        r2 = np.sqrt(a2 * np.abs(h2[1, 0] * X1 + h2[1, 1] * t * e) ** 2 + b2) - X1
        return np.maximum(r1, r2)

    frac = np.linspace(0.0, 1.0, n_grid)
    lo, hi = np.zeros(n), np.full(n, float(prob.X1max))
    zeros, tmax = np.zeros((n, n_grid)), np.full((n, n_grid), float(prob.tmax))
    rows = np.arange(n)
    best_f, best_x, best_t = np.full(n, np.inf), np.zeros(n), np.zeros(n)
    stop = rel_width * max(1.0, float(prob.X1max))
    for _ in range(64):
        X = lo[:, None] + (hi - lo)[:, None] * frac
        t, f = _golden_argmin(lambda tt: F(X, tt), zeros, tmax, iters)
        i = np.argmin(f, axis=1)
        fi = f[rows, i]
        better = fi < best_f
        best_f = np.where(better, fi, best_f)
        best_x = np.where(better, X[rows, i], best_x)
        best_t = np.where(better, t[rows, i], best_t)
        lo = X[rows, np.maximum(i - 1, 0)]
        hi = X[rows, np.minimum(i + 1, n_grid - 1)]
        if np.all(hi - lo <= stop):
            break
    return best_f, best_x, best_t


def socp2_feasible(prob, theta, tol=1e-9):
    """Feasibility of the cone pair at one angle ``theta``."""
    F, X1, t = socp2_min_residual(prob, [theta])
    ok = bool(F[0] <= tol * prob.scale)
    return FeasibilityVerdict(ok, witness=(float(X1[0]), float(t[0])) if ok else None,
                              max_violation=max(0.0, float(F[0])),
                              info={"min_residual": float(F[0]), "argmin": (float(X1[0]), float(t[0]))})


# --------------------------------------------------------------------------
# Lifted SDP feasibility
# --------------------------------------------------------------------------

def _sym_basis():
    """Affine parametrization of C in S^3 with C11 = 1 and Q in H^2."""
    Cb = np.zeros((10, 3, 3))
    Qb = np.zeros((10, 2, 2), dtype=complex)
    for i, (r, c) in enumerate([(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]):
        Cb[i, r, c] = Cb[i, c, r] = 1.0
    Qb[5, 0, 0] = 1.0
    Qb[6, 1, 1] = 1.0
    Qb[7, 0, 1] = Qb[7, 1, 0] = 1.0
    Qb[8, 0, 1], Qb[8, 1, 0] = 1j, -1j
    # slack direction
    Cb[9] = -np.eye(3)
    Qb[9] = -np.eye(2)
    C0 = np.zeros((3, 3))
    C0[0, 0] = 1.0
    return C0, Cb, Qb


_C0, _CB, _QB = _sym_basis()


def unpack_cq(x):
    """(C, Q) from the 9 free parameters."""
    C = _C0 + np.tensordot(x[:9], _CB[:9], axes=1)
    Q = np.tensordot(x[:9], _QB[:9], axes=1)
    return C, Q


def pack_cq(C, Q):
    return np.array([C[0, 1], C[0, 2], C[1, 1], C[1, 2], C[2, 2],
                     Q[0, 0].real, Q[1, 1].real, Q[0, 1].real, Q[0, 1].imag])


def sdp_constraint_rows(sdr, R):
    """Affine rows ``g(x) = W x + c >= 0`` of the lifted feasibility problem.

    Returns ``(W, c, names)`` with each row scaled to unit coefficient norm.
    """
    rows, names = [], []

    def lin(fC=None, fQ=None, const=0.0):
        # coefficients of x -> Tr(fC C) + Re Tr(fQ Q) + const
        w = np.zeros(9)
        c = const
        if fC is not None:
            w += np.einsum("ab,iba->i", fC, _CB[:9])
            c += float(np.trace(fC @ _C0))
        if fQ is not None:
            w += np.real(np.einsum("ab,iba->i", fQ, _QB[:9]))
        return w, c

    s4 = sdr.sigma2 ** 2
    for k in range(2):
        Ek = np.zeros((3, 3))
        Ek[k + 1, k + 1] = 1.0
        Kk = np.zeros((3, 3))
        Kk[0, k + 1] = Kk[k + 1, 0] = 0.5
        Eq = np.zeros((2, 2))
        Eq[k, k] = 1.0
        wA, cA = lin(sdr.A[k], -sdr.F[k])
        wB, cB = lin(sdr.B[k], -sdr.G[k])
        gain = np.exp(2 * sdr.alpha[k] * R)
        for name, (w, c) in [
            (f"power{k}", lin(-Ek, None, sdr.P[k] ** 2)),
            (f"sign{k}", lin(Kk)),
            (f"pseudo{k}", lin(Ek, -Eq)),
            (f"lemma_y{k}", (wA, cA - s4)),
            (f"lemma_s{k}", (wB, cB - s4)),
            (f"rate{k}", (wA - gain * wB, cA - gain * cB)),
        ]:
            nrm = np.linalg.norm(w)
            nrm = nrm if nrm > 0 else 1.0
            rows.append((w / nrm, c / nrm))
            names.append(name)
    W = np.array([r[0] for r in rows])
    c = np.array([r[1] for r in rows])
    return W, c, names


def _min_slack(x, W, c):
    C, Q = unpack_cq(x)
    return min(float(np.min(W @ x + c)),
               float(np.linalg.eigvalsh(C)[0]),
               float(np.linalg.eigvalsh(Q)[0]))


def sdp_feasible(sdr, R, tol=1e-7, max_iter=200, x0=None):
    """Decide feasibility of the lifted problem at target ``R`` (nats).

    Maximizes the common slack ``s`` of all normalized linear rows and of
    the smallest eigenvalues of ``C`` and ``Q`` with a log-barrier interior
    point method over ``(x, s)``. Stops as soon as ``s >= -tol`` (feasible),
    when the duality-gap bound certifies ``s* < -tol`` (infeasible), or at
    ``max_iter`` Newton steps (undecided).
    """
    W, c, names = sdp_constraint_rows(sdr, R)
    m = W.shape[0]
    nu = m + 3 + 2
    if x0 is None:
        c1, c2 = 0.5 * sdr.P[0], 0.5 * sdr.P[1]
        x0 = np.array([c1, c2, c1 * c1 + 0.1 * sdr.P[0] ** 2, c1 * c2,
                       c2 * c2 + 0.1 * sdr.P[1] ** 2, 0.0, 0.0, 0.0, 0.0])
    x = np.asarray(x0, float)
    s = _min_slack(x, W, c) - 1.0
    y = np.append(x, s)
    Wa = np.hstack([W, -np.ones((m, 1))])

    def barrier_parts(y):
        gx = Wa @ y + c
        if np.any(gx <= 0):
            return None
        C = _C0 + np.tensordot(y, _CB, axes=1)
        Q = np.tensordot(y, _QB, axes=1)
        try:
            LC = np.linalg.cholesky(C)
            LQ = np.linalg.cholesky(Q)
        except np.linalg.LinAlgError:
            return None
        val = (-np.sum(np.log(gx)) - 2 * np.sum(np.log(np.diag(LC)))
               - 2 * np.sum(np.log(np.real(np.diag(LQ)))))
        return val, gx, C, Q

    def phi(y, t):
        p = barrier_parts(y)
        return np.inf if p is None else -t * y[9] + p[0]

    t = 1.0
    steps = 0
    status = "undecided"
    while steps < max_iter:
        # centering
        while steps < max_iter:
            val, gx, C, Q = barrier_parts(y)
            Ci = np.linalg.inv(C)
            Qi = np.linalg.inv(Q)
            MC = Ci @ _CB
            MQ = Qi @ _QB
            grad = -Wa.T @ (1.0 / gx) - np.einsum("iaa->i", MC) - np.real(np.einsum("iaa->i", MQ))
            grad[9] -= t
            H = ((Wa / gx[:, None] ** 2).T @ Wa
                 + np.einsum("iab,jba->ij", MC, MC)
                 + np.real(np.einsum("iab,jba->ij", MQ, MQ)))
            try:
                dy = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                dy = -np.linalg.lstsq(H, grad, rcond=None)[0]
            dec = -grad @ dy
            steps += 1
            if dec / 2 < 1e-10:
                break
            f0 = -t * y[9] + val
            step = 1.0
            while step > 1e-14:
                yn = y + step * dy
                fn = phi(yn, t)
                if fn <= f0 - 0.25 * step * dec:
                    break
                step *= 0.5
            else:
                break
            y = yn
            if y[9] >= -tol:
                break
        s = y[9]
        if s >= -tol:
            status = "feasible"
            break
        if s + nu / t < -tol:
            status = "infeasible"
            break
        if nu / t < 0.1 * tol:
            status = "infeasible"
            break
        t *= 20.0
    x = y[:9]
    C, Q = unpack_cq(x)
    slack = _min_slack(x, W, c)
    info = {"slack": slack, "newton_steps": steps, "t": t, "R": R}
    if status == "feasible":
        return FeasibilityVerdict(True, witness=(C, Q), max_violation=max(0.0, -slack),
                                  status=status, info=info)
    if status == "undecided":
        log.warning("SDP probe at R=%.6g undecided after %d Newton steps (slack %.3e)",
                    R, steps, slack)
    return FeasibilityVerdict(False, witness=None, max_violation=max(0.0, -slack),
                              status=status, info=info)
