"""
Separate covariance and pseudo-covariance optimization.

Step 1 finds the best proper-signaling point for a rate profile by bisection
on a two-variable LP. Step 2 freezes those powers and bisects on the
pseudo-covariance feasibility problem: two quadratic constraints plus the
magnitude bounds ``|X_k| <= C_k``. With ``X1`` real (common phase rotation)
and ``X2 = t e^{i theta}``, each fixed ``theta`` gives a two-cone SOCP, and
only a finite set of angles needs to be checked: the two antiphase angles
and the roots of the two "both quadratics tight" systems with one magnitude
pinned at its bound.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .conic import FeasibilityVerdict, SocpProblem, bisect_sup, lp2_feasible, socp2_min_residual
from .pareto import as_profile, make_point
from .signal_model import SignalStrategy, wrap_phase

log = logging.getLogger(__name__)

GAIN_EPS = 1e-12
ACOS_CLAMP = 1e-10
ROOT_RESIDUAL = 1e-8
FALLBACK_GRID = 720


# --------------------------------------------------------------------------
# proper signaling
# --------------------------------------------------------------------------

def _proper_rows(instance, alpha, r):
    g, s2 = instance.gains, instance.sigma2
    e1 = np.expm1(alpha[0] * r)
    e2 = np.expm1(alpha[1] * r)
    return [(g[0, 0], -g[0, 1] * e1, s2 * e1),
            (-g[1, 0] * e2, g[1, 1], s2 * e2)]


def proper_pareto_point(instance, alpha, tol=1e-7):
    """Best proper-signaling profile value ``r*`` and its powers.

    Returns ``(r_star, C1, C2)`` with ``r_star`` in nats; the powers are the
    witness of the largest accepted ``r``, so ``R_k >= alpha_k r_star`` holds
    at them.
    """
    alpha = as_profile(alpha)
    g, s2, P = instance.gains, instance.sigma2, instance.P
    hi = min(np.log1p(g[k, k] * P[k] / s2) / alpha[k] for k in range(2))

    def oracle(r):
        return lp2_feasible(_proper_rows(instance, alpha, r), P)

    res = bisect_sup(oracle, 0.0, hi, tol=tol)
    C1, C2 = (float(x) for x in res.witness)
    return float(res.value), C1, C2


def proper_point(instance, alpha, tol=1e-7):
    """:func:`proper_pareto_point` packaged as a :class:`ParetoPoint`."""
    alpha = as_profile(alpha)
    r, C1, C2 = proper_pareto_point(instance, alpha, tol=tol)
    return make_point(instance, (SignalStrategy(C1, 0j), SignalStrategy(C2, 0j)), alpha,
                      "proper", R=r)


# --------------------------------------------------------------------------
# pseudo-covariance coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoCoeffs:
    """Coefficients of the pseudo-covariance feasibility problem at target ``R``.

    Constraints (``X1``, ``X2`` complex)::

        a1 |h11^2 X1 + h12^2 X2|^2 + b1 <= |X2|^2
        a2 |h21^2 X1 + h22^2 X2|^2 + b2 <= |X1|^2
        |X1| <= C1,  |X2| <= C2
    """

    a: tuple
    b: tuple
    beta: tuple
    C: tuple
    Cy: tuple
    Cs: tuple
    R: float
    r_star: float
    degenerate: bool = False

    def constraint_values(self, h, X1, X2):
        """LHS minus RHS of the two quadratic constraints (feasible iff both <= 0)."""
        h2 = np.asarray(h) ** 2
        f1 = self.a[0] * np.abs(h2[0, 0] * X1 + h2[0, 1] * X2) ** 2 + self.b[0] - np.abs(X2) ** 2
        f2 = self.a[1] * np.abs(h2[1, 0] * X1 + h2[1, 1] * X2) ** 2 + self.b[1] - np.abs(X1) ** 2
        return f1, f2

    def socp(self, h):
        return SocpProblem(self.a[0], self.a[1], self.b[0], self.b[1], np.asarray(h),
                           self.C[0], self.C[1])


def pseudo_coeffs(instance, C_star, r_star, R, alpha):
    """Coefficients ``a_k, b_k, beta_k`` for target ``R >= r_star`` (nats).

    A cross gain below ``1e-12`` in magnitude sets ``degenerate`` and leaves
    the affected coefficients infinite.
    """
    alpha = as_profile(alpha)
    if R < r_star - 1e-12:
        raise ValueError("target must not be below the proper value")
    g, s2 = instance.gains, instance.sigma2
    C1, C2 = float(C_star[0]), float(C_star[1])
    Cs = (s2 + g[0, 1] * C2, s2 + g[1, 0] * C1)
    Cy = (Cs[0] + g[0, 0] * C1, Cs[1] + g[1, 1] * C2)
    cross = (g[0, 1], g[1, 0])
    beta = tuple(float(np.exp(2 * alpha[k] * max(R - r_star, 0.0))) for k in range(2))
    a, b = [], []
    degenerate = False
    for k in range(2):
        c4 = cross[k] ** 2
        if np.sqrt(cross[k]) < GAIN_EPS:
            degenerate = True
            a.append(np.inf)
            b.append(np.inf if beta[k] > 1 else 0.0)
            continue
        a.append(Cs[k] ** 2 / (beta[k] * Cy[k] ** 2 * c4))
        b.append((1.0 - 1.0 / beta[k]) * Cs[k] ** 2 / c4)
    if min(abs(instance.h[0, 0]), abs(instance.h[1, 1])) < GAIN_EPS:
        degenerate = True
    return PseudoCoeffs(tuple(a), tuple(b), beta, (C1, C2), Cy, Cs, float(R), float(r_star),
                        degenerate)


# --------------------------------------------------------------------------
# candidate angles
# --------------------------------------------------------------------------

def solve_angle_system(A1, B1, D1, A2, B2, D2, omega, u_max):
    """Solve ``A1 u^2 + B1 u cos(psi) + D1 = 0``, ``A2 u^2 + B2 u cos(psi + omega) + D2 = 0``.

    Unknowns ``u in (0, u_max]`` and ``psi``. Dividing by ``B1``, ``B2``
    gives ``u cos(psi) + d1 u^2 + d2 = 0`` and the same with ``d3, d4`` and
    ``psi + omega``; eliminating ``psi`` leaves a quadratic in ``z = u^2``.
    Both ``arccos`` branches are emitted for each admissible root and then
    filtered by the second equation, since squaring admits spurious roots.

    Returns a list of ``(psi, u)`` with ``psi`` in (-pi, pi].
    """
    if B1 <= 0 or B2 <= 0:
        return []
    d1, d2, d3, d4 = A1 / B1, D1 / B1, A2 / B2, D2 / B2
    cw, sw = np.cos(omega), np.sin(omega)
    e1 = d3 ** 2 + d1 ** 2 - 2 * d1 * d3 * cw
    e2 = 2 * (d1 * d2 + d3 * d4) - 2 * (d1 * d4 + d2 * d3) * cw - sw ** 2
    e3 = d2 ** 2 + d4 ** 2 - 2 * d2 * d4 * cw
    scale = max(abs(e1), abs(e2), abs(e3))

    if scale == 0 or max(abs(e1), abs(e2), abs(e3)) < 1e-14 * max(1.0, d1 * d1 + d2 * d2):
        # the two equations coincide: eq. 1 alone has a one-parameter family;
        # keep its ends where cos(psi) = -1 or +1, and the pinned magnitude
        zs = []
        for sgn in (1.0, -1.0):
            zs += [u * u for u in _real_roots([d1, sgn, d2]) if u > 0]
        zs.append(u_max ** 2)
    else:
        zs = _real_roots([e1, e2, e3])

    out = []
    for z in zs:
        if not (-1e-12 * u_max ** 2 <= z <= u_max ** 2 * (1 + 1e-12)):
            continue
        u = float(np.sqrt(min(max(z, 0.0), u_max ** 2)))
        if u == 0.0:
            continue
        cpsi = -(d1 * u * u + d2) / u
        if abs(cpsi) > 1.0 + ACOS_CLAMP:
            continue
        base = float(np.arccos(np.clip(cpsi, -1.0, 1.0)))
        for psi in (base, 2 * np.pi - base):
            psi, u2 = _polish(psi, u, d1, d2, d3, d4, omega)
            if not (0.0 < u2 <= u_max * (1 + 1e-12)):
                continue
            r1 = u2 * np.cos(psi) + d1 * u2 * u2 + d2
            r2 = u2 * np.cos(psi + omega) + d3 * u2 * u2 + d4
            nrm = max(1.0, abs(d1) * u2 * u2, abs(d2), abs(d3) * u2 * u2, abs(d4), u2)
            if max(abs(r1), abs(r2)) <= 1e-9 * nrm:
                out.append((float(wrap_phase(psi)), min(u2, u_max)))
    return out


def _real_roots(coeffs):
    c = np.asarray(coeffs, float)
    nz = np.flatnonzero(np.abs(c) > 0)
    if nz.size == 0:
        return []
    c = c[nz[0]:]
    if c.size == 1:
        return []
    r = np.roots(c)
    tol = 1e-9 * max(1.0, np.max(np.abs(r)))
    return [float(x.real) for x in r if abs(x.imag) <= tol]


def _polish(psi, u, d1, d2, d3, d4, omega, iters=6):
    """A few Newton steps on the 2x2 system in ``(psi, u)``."""
    x = np.array([psi, u], float)
    for _ in range(iters):
        p, v = x
        F = np.array([v * np.cos(p) + d1 * v * v + d2,
                      v * np.cos(p + omega) + d3 * v * v + d4])
        J = np.array([[-v * np.sin(p), np.cos(p) + 2 * d1 * v],
                      [-v * np.sin(p + omega), np.cos(p + omega) + 2 * d3 * v]])
        if abs(np.linalg.det(J)) < 1e-14:
            break
        step = np.linalg.solve(J, F)
        if not np.all(np.isfinite(step)) or abs(step[1]) > 0.1 * max(v, 1e-12):
            break
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    return float(x[0]), float(x[1])


@dataclass
class ThetaCandidateSet:
    """Angles ``theta`` (phase of ``X2`` with ``X1`` real) to probe.

    ``theta_A`` pairs carry the companion magnitude ``t = |X2|`` (with ``X1``
    pinned at ``C1``); ``theta_B`` pairs carry ``X1`` (with ``|X2|`` pinned
    at ``C2``). ``fallback`` marks a degenerate channel, in which case
    ``angles`` is a dense grid.
    """

    closed_form: tuple
    theta_A: list
    theta_B: list
    fallback: bool = False
    audit: list = field(default_factory=list)

    @property
    def angles(self):
        if self.fallback:
            return np.linspace(-np.pi, np.pi, FALLBACK_GRID + 1)[1:]
        raw = list(self.closed_form) + [th for th, _ in self.theta_A] + [th for th, _ in self.theta_B]
        out = []
        for th in raw:
            if all(abs(wrap_phase(th - o)) > 1e-9 for o in out):
                out.append(th)
        return np.array(out)


def _system_A(pc, instance):
    g = instance.gains
    (a1, a2), (b1, b2), (C1, C2) = pc.a, pc.b, pc.C
    return (a1 * g[0, 1] ** 2 - 1.0, 2 * a1 * g[0, 0] * g[0, 1] * C1, a1 * g[0, 0] ** 2 * C1 ** 2 + b1,
            a2 * g[1, 1] ** 2, 2 * a2 * g[1, 0] * g[1, 1] * C1, a2 * g[1, 0] ** 2 * C1 ** 2 + b2 - C1 ** 2,
            C2)


def _system_B(pc, instance):
    # roles swapped: |X2| pinned at C2, X1 free; the first equation is now
    # quadratic in X1 with the X1^2 term from a1|h11|^4 only, the second
    # carries the -X1^2 from its right-hand side
    g = instance.gains
    (a1, a2), (b1, b2), (C1, C2) = pc.a, pc.b, pc.C
    return (a1 * g[0, 0] ** 2, 2 * a1 * g[0, 0] * g[0, 1] * C2, a1 * g[0, 1] ** 2 * C2 ** 2 + b1 - C2 ** 2,
            a2 * g[1, 0] ** 2 - 1.0, 2 * a2 * g[1, 0] * g[1, 1] * C2, a2 * g[1, 1] ** 2 * C2 ** 2 + b2,
            C1)


def solve_theta_system(pc, instance, frozen):
    """Angles where both quadratic constraints are tight with one magnitude pinned.

    ``frozen="X1"`` pins ``X1 = C1`` and returns ``(theta, t)``;
    ``frozen="X2"`` pins ``|X2| = C2`` and returns ``(theta, X1)``.
    """
    phi = instance.phi
    omega = 2 * (phi[1, 1] + phi[0, 0] - phi[0, 1] - phi[1, 0])
    shift = 2 * (phi[0, 1] - phi[0, 0])  # eta = theta + shift
    if frozen == "X1":
        A1, B1, D1, A2, B2, D2, umax = _system_A(pc, instance)
    elif frozen == "X2":
        A1, B1, D1, A2, B2, D2, umax = _system_B(pc, instance)
    else:
        raise ValueError("frozen must be 'X1' or 'X2'")
    if umax <= 0:
        return []
    sols = solve_angle_system(A1, B1, D1, A2, B2, D2, omega, umax)
    out = []
    h = instance.h
    C1, C2 = pc.C
    nrm = max(C1, C2, 1e-300) ** 2
    for psi, u in sols:
        theta = float(wrap_phase(psi - shift))
        X1, X2 = (C1, u * np.exp(1j * theta)) if frozen == "X1" else (u, C2 * np.exp(1j * theta))
        f1, f2 = pc.constraint_values(h, X1, X2)
        if max(abs(f1), abs(f2)) <= ROOT_RESIDUAL * nrm:
            out.append((theta, u))
    return out


def theta_candidates(pc, instance):
    """Finite angle set sufficient for the pseudo-covariance feasibility decision."""
    phi = instance.phi
    closed = (float(wrap_phase(np.pi + 2 * (phi[0, 0] - phi[0, 1]))),
              float(wrap_phase(np.pi + 2 * (phi[1, 0] - phi[1, 1]))))
    if pc.degenerate or min(pc.C) <= 0:
        return ThetaCandidateSet(closed, [], [], fallback=True)
    thA = solve_theta_system(pc, instance, "X1")
    thB = solve_theta_system(pc, instance, "X2")
    audit = []
    for name, sols in (("A", thA), ("B", thB)):
        for th, u in sols:
            X1, X2 = (pc.C[0], u * np.exp(1j * th)) if name == "A" else (u, pc.C[1] * np.exp(1j * th))
            f1, f2 = pc.constraint_values(instance.h, X1, X2)
            audit.append({"set": name, "theta": th, "companion": u, "residuals": (float(f1), float(f2))})
    return ThetaCandidateSet(closed, thA, thB, fallback=False, audit=audit)


# --------------------------------------------------------------------------
# feasibility and bisection
# --------------------------------------------------------------------------

def pseudo_feasible(instance, pc, angles=None, tol=1e-9):
    """Feasibility of the pseudo-covariance problem at ``pc.R``.

    Evaluates the two-cone SOCP at every candidate angle (or at ``angles``
    if given). Among feasible angles the witness maximizes the minimum
    constraint slack.
    """
    if angles is None:
        cand = theta_candidates(pc, instance)
        angles = cand.angles
    else:
        cand = None
    angles = np.atleast_1d(np.asarray(angles, float))
    prob = pc.socp(instance.h)
    F, X1, t = socp2_min_residual(prob, angles)
    i = int(np.argmin(F))
    ok = bool(F[i] <= tol * prob.scale)
    witness = (float(X1[i]), complex(t[i] * np.exp(1j * angles[i]))) if ok else None
    return FeasibilityVerdict(ok, witness=witness, max_violation=max(0.0, float(F[i])),
                              info={"theta": float(angles[i]), "n_angles": int(angles.size),
                                    "fallback": bool(cand.fallback) if cand is not None else None,
                                    "min_residual": float(F[i])})


def improper_pareto_point(instance, alpha, tol=1e-4, proper_tol=1e-7):
    """Pareto point for profile ``alpha`` by separate optimization.

    Proper powers first, then bisection on the pseudo-covariances over
    ``[r*, r_ub]`` with the powers frozen. The result never falls below the
    proper value: ``R* >= r*``.
    """
    alpha = as_profile(alpha)
    r_star, C1, C2 = proper_pareto_point(instance, alpha, tol=proper_tol)
    proper_strats = (SignalStrategy(C1, 0j), SignalStrategy(C2, 0j))
    g, s2, P = instance.gains, instance.sigma2, instance.P
    base = dict(r_star=r_star, C_star=(C1, C2))

    if min(g[0, 1], g[1, 0]) < GAIN_EPS ** 2:
        # a user without incoming interference can only lose by going improper,
        # and with its pseudo-covariance zero the other user's correction is <= 0
        return make_point(instance, proper_strats, alpha, "separate", R=r_star,
                          early_exit="zero cross gain", **base)

    r_ub = min(np.log1p(g[k, k] * P[k] / s2) / alpha[k] for k in range(2))
    probes = []

    def oracle(R):
        pc = pseudo_coeffs(instance, (C1, C2), r_star, R, alpha)
        v = pseudo_feasible(instance, pc)
        probes.append({"R": R, "feasible": v.feasible, **v.info})
        return v

    res = bisect_sup(oracle, r_star, max(r_ub, r_star), tol=tol)
    X1, X2 = res.witness if res.witness is not None else (0.0, 0j)
    strategies = (SignalStrategy(C1, complex(X1)), SignalStrategy(C2, X2))
    pt = make_point(instance, strategies, alpha, "separate", R=res.value,
                    R_upper=res.upper, probes=probes, **base)
    return pt
