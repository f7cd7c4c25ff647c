import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from conftest import no_interference, random_channel
from improper_ic.conic import (
    FeasibilityVerdict, SocpProblem, bisect_sup, lp2_feasible, pack_cq, sdp_constraint_rows,
    sdp_feasible, socp2_feasible, socp2_min_residual, unpack_cq,
)
from improper_ic.joint import build_sdr
from improper_ic.pareto import RateProfile
from improper_ic.separate import proper_pareto_point


def _below(x):
    return lambda r: FeasibilityVerdict(r <= x, witness=r if r <= x else None)


def test_bisection_on_threshold_oracle():
    res = bisect_sup(_below(3.7), 0.0, 10.0, tol=1e-4)
    assert 3.7 - 1e-4 <= res.value <= 3.7 < res.upper
    assert res.upper - res.value <= 1e-4


def test_bisection_always_feasible_returns_hi():
    res = bisect_sup(lambda r: FeasibilityVerdict(True, witness=r), 0.0, 5.0)
    assert res.value == 5.0 and res.iterations == 2


def test_bisection_empty_and_bad_bracket():
    assert bisect_sup(_below(-1.0), 0.0, 1.0).empty
    with pytest.raises(ValueError):
        bisect_sup(_below(1.0), 2.0, 1.0)


def test_lp_zero_rate_feasible_at_origin():
    inst = random_channel(np.random.default_rng(0))
    from improper_ic.separate import _proper_rows
    v = lp2_feasible(_proper_rows(inst, (0.5, 0.5), 0.0), inst.P)
    assert v.feasible
    assert any(np.allclose(x, 0) for x in v.info["vertices"])


def test_lp_empty_box():
    assert not lp2_feasible([(1.0, 0.0, 0.0)], (-1.0, 1.0)).feasible


def test_lp_too_many_rows():
    with pytest.raises(ValueError):
        lp2_feasible([(1.0, 1.0, 0.0)] * 9, (1.0, 1.0))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_lp_matches_linprog(seed):
    rng = np.random.default_rng(seed)
    rows = [tuple(rng.normal(size=3)) for _ in range(int(rng.integers(1, 5)))]
    P = rng.uniform(0.1, 3, 2)
    v = lp2_feasible(rows, P)
    # maximize the uniform slack s subject to g.c - r >= s: sign of s* decides
    A = np.array([[-g1, -g2, 1.0] for g1, g2, _ in rows])
    b = np.array([-r for _, _, r in rows])
    res = linprog([0, 0, -1], A_ub=A, b_ub=b, bounds=[(0, P[0]), (0, P[1]), (None, 10)])
    s = -res.fun
    if abs(s) > 1e-9:
        assert v.feasible == (s > 0)
    if v.feasible:
        c = v.witness
        assert np.all(c >= 0) and np.all(c <= P)
        assert all(g1 * c[0] + g2 * c[1] >= r - 1e-9 for g1, g2, r in rows)


def test_proper_value_without_interference():
    inst = no_interference((2.0, 3.0))
    alpha = RateProfile(0.3, 0.7)
    r, _, _ = proper_pareto_point(inst, alpha)
    exp = min(np.log1p(inst.gains[k, k] * inst.P[k]) / alpha[k] for k in range(2))
    assert r == pytest.approx(exp, abs=2e-7)


def test_socp_trivial_cases():
    h = np.zeros((2, 2))
    prob = SocpProblem(1.0, 1.0, 0.0, 0.0, h, 1.0, 1.0)
    v = socp2_feasible(prob, 0.3)
    # the origin is feasible; the returned witness is the max-slack point
    assert v.feasible and max(prob.residuals(0.0, 0.0, 0.3)) <= 0
    assert max(prob.residuals(*v.witness, 0.3)) <= 0
    # second cone needs X1 >= sqrt(b2) > X1max
    hr = np.ones((2, 2), complex)
    for th in np.linspace(-3, 3, 7):
        assert not socp2_feasible(SocpProblem(0.1, 0.1, 0.0, 4.5, hr, 2.0, 5.0), th).feasible


def _brute(prob, theta, n=400):
    X = np.linspace(0, prob.X1max, n)[:, None]
    t = np.linspace(0, prob.tmax, n)[None, :]
    r1, r2 = prob.residuals(X, t, theta)
    return float(np.min(np.maximum(r1, r2)))


@pytest.mark.parametrize("seed", range(12))
def test_socp_against_grid_scan(seed):
    rng = np.random.default_rng(seed)
    h = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
    g = np.abs(h) ** 2
    prob = SocpProblem(rng.uniform(0, 0.3) / g[0, 1] ** 2, rng.uniform(0, 0.3) / g[1, 0] ** 2,
                       rng.uniform(0, 0.5), rng.uniform(0, 0.5), h, rng.uniform(0.5, 2), rng.uniform(0.5, 2))
    theta = rng.uniform(-np.pi, np.pi)
    F, X1, t = socp2_min_residual(prob, [theta])
    Fb = _brute(prob, theta)
    # the grid value can only be above the true minimum, by at most one cell's variation
    step = max(prob.X1max, prob.tmax) / 399
    lip = 2 + np.sqrt(max(prob.a1, prob.a2)) * np.abs(h).max() ** 2 * 2
    assert F[0] <= Fb + 1e-9
    assert Fb - F[0] <= lip * step
    r1, r2 = prob.residuals(X1[0], t[0], theta)
    assert max(r1, r2) == pytest.approx(F[0], abs=1e-12)
    if Fb <= 0:
        assert socp2_feasible(prob, theta).feasible


def _pack_order_check():
    x = np.arange(1.0, 10.0)
    C, Q = unpack_cq(x)
    return np.allclose(pack_cq(C, Q), x)


def test_pack_unpack_roundtrip():
    assert _pack_order_check()
    C, Q = unpack_cq(np.arange(1.0, 10.0))
    assert C[0, 0] == 1.0 and np.allclose(C, C.T) and np.allclose(Q, Q.conj().T)


def _cvx_feasible(sdr, R):
    cp = pytest.importorskip("cvxpy")
    C = cp.Variable((3, 3), symmetric=True)
    Q = cp.Variable((2, 2), hermitian=True)
    s4 = sdr.sigma2 ** 2
    cons = [C >> 0, Q >> 0, C[0, 0] == 1]
    for k in range(2):
        n = cp.trace(sdr.A[k] @ C) - cp.real(cp.trace(sdr.F[k] @ Q))
        d = cp.trace(sdr.B[k] @ C) - cp.real(cp.trace(sdr.G[k] @ Q))
        cons += [C[k + 1, k + 1] <= sdr.P[k] ** 2, C[0, k + 1] >= 0, cp.real(Q[k, k]) <= C[k + 1, k + 1],
                 n >= s4, d >= s4, n >= np.exp(2 * sdr.alpha[k] * R) * d]
    prob = cp.Problem(cp.Minimize(0), cons)
    try:
        prob.solve(solver="CLARABEL")
    except cp.error.SolverError:
        prob.solve(solver="SCS", eps=1e-9)
    return prob.status in ("optimal", "optimal_inaccurate")


def _cvx_sup(sdr, tol=1e-6):
    res = bisect_sup(lambda r: FeasibilityVerdict(_cvx_feasible(sdr, r)), 0.0, sdr.upper_bound(), tol=tol)
    return res.value


@pytest.mark.parametrize("seed", range(4))
def test_sdp_feasibility_matches_cvxpy(seed):
    rng = np.random.default_rng(100 + seed)
    inst = random_channel(rng, P=(10 ** rng.uniform(-0.5, 1), 10 ** rng.uniform(-0.5, 1)))
    sdr = build_sdr(inst, RateProfile.from_first(float(rng.uniform(0.2, 0.8))))
    R_ref = _cvx_sup(sdr)
    for R in (0.0, 0.5 * R_ref, R_ref - 1e-3, R_ref + 1e-3, 1.2 * R_ref + 0.01):
        v = sdp_feasible(sdr, R)
        assert v.status != "undecided"
        assert v.feasible == (R < R_ref), (R, R_ref)
        if v.feasible:
            C, Q = v.witness
            assert np.linalg.eigvalsh(C)[0] >= -1e-7 and np.linalg.eigvalsh(Q)[0] >= -1e-7
            W, c, _ = sdp_constraint_rows(sdr, R)
            assert np.min(W @ pack_cq(C, Q) + c) >= -1e-7


def test_sdp_infeasible_above_single_user_bound():
    inst = random_channel(np.random.default_rng(7))
    sdr = build_sdr(inst, (0.5, 0.5))
    assert not sdp_feasible(sdr, sdr.upper_bound() * 1.01).feasible
    assert sdp_feasible(sdr, 0.0).feasible
