"""
Channel and transmit-strategy types for Gaussian interference channels
with improper signaling.

A transmit strategy is the pair (covariance, pseudo-covariance). The pair
is realizable iff the augmented covariance [[C, Ct], [Ct*, C*]] is PSD.
For single-antenna users this collapses to ``C >= 0`` and ``|Ct| <= C``.
"""

from dataclasses import dataclass, field

import numpy as np

#: Minimum eigenvalue accepted for the augmented covariance.
PSD_TOL = 1e-9
#: Hermitian / symmetric structure tolerance (relative to the matrix scale).
STRUCT_TOL = 1e-12
#: Power budget slack.
POWER_TOL = 1e-9


def wrap_phase(phi):
    """Map angles into (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    out = np.mod(phi + np.pi, 2 * np.pi) - np.pi
    out = np.where(out <= -np.pi, out + 2 * np.pi, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MimoIcInstance:
    """K-user MIMO interference channel.

    Parameters
    ----------
    H : complex array, shape (K, K, N, M)
        ``H[k, j]`` is the channel from transmitter ``j`` to receiver ``k``.
    sigma2 : float
        Noise power at each receiver.
    P : array of float, shape (K,)
        Per-user power budgets.
    """

    H: np.ndarray
    sigma2: float
    P: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 4 or H.shape[0] != H.shape[1]:
            raise ValueError(f"H must have shape (K, K, N, M), got {H.shape}")
        P = np.asarray(self.P, dtype=float).reshape(-1)
        if P.shape[0] != H.shape[0]:
            raise ValueError("one power budget per user is required")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if np.any(P < 0):
            raise ValueError("power budgets must be nonnegative")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "P", P)

    @property
    def K(self):
        return self.H.shape[0]

    @property
    def N(self):
        return self.H.shape[2]

    @property
    def M(self):
        return self.H.shape[3]


@dataclass(frozen=True)
class SisoIcInstance:
    """Two-user SISO interference channel ``y_k = h_k1 x_1 + h_k2 x_2 + n_k``.

    ``h[k, j]`` (0-based) is the gain from transmitter ``j`` to receiver
    ``k``; ``phi`` caches its phase in (-pi, pi].
    """

    h: np.ndarray
    sigma2: float = 1.0
    P: tuple = (1.0, 1.0)
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.shape != (2, 2):
            raise ValueError(f"h must be 2x2, got shape {h.shape}")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        P = tuple(float(p) for p in np.broadcast_to(np.asarray(self.P, float), (2,)))
        if min(P) < 0:
            raise ValueError("power budgets must be nonnegative")
        h.setflags(write=False)
        phi = wrap_phase(np.angle(h))
        phi.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_polar(cls, mag, phase, sigma2=1.0, P=(1.0, 1.0)):
        return cls(np.asarray(mag) * np.exp(1j * np.asarray(phase)), sigma2, P)

    @property
    def gains(self):
        """|h|^2 as a 2x2 real array."""
        return np.abs(self.h) ** 2

    def with_power(self, P, sigma2=None):
        return SisoIcInstance(self.h, self.sigma2 if sigma2 is None else sigma2, P)

    def to_mimo(self):
        """Embed as a 1x1 MIMO instance."""
        return MimoIcInstance(self.h.reshape(2, 2, 1, 1), self.sigma2, np.array(self.P))


@dataclass(frozen=True)
class SignalStrategy:
    """Covariance ``C`` and pseudo-covariance ``Ct`` of one transmitter.

    For SISO users both are scalars (``C`` real, ``Ct`` complex); otherwise
    both are M x M complex arrays.
    """

    C: object
    Ct: object = 0.0

    def __post_init__(self):
        C = np.asarray(self.C)
        Ct = np.asarray(self.Ct, dtype=complex)
        if C.ndim == 0:
            if abs(np.imag(C)) > STRUCT_TOL * max(1.0, abs(C)):
                raise ValueError("scalar covariance must be real")
            if Ct.ndim != 0:
                raise ValueError("scalar covariance needs a scalar pseudo-covariance")
            object.__setattr__(self, "C", float(np.real(C)))
            object.__setattr__(self, "Ct", complex(Ct))
            return
        C = C.astype(complex)
        if C.ndim != 2 or C.shape[0] != C.shape[1] or Ct.shape != C.shape:
            raise ValueError(f"C and Ct must be equal square matrices, got {C.shape}, {Ct.shape}")
        scale = max(1.0, float(np.max(np.abs(C), initial=0.0)), float(np.max(np.abs(Ct), initial=0.0)))
        if np.max(np.abs(C - C.conj().T)) > STRUCT_TOL * scale:
            raise ValueError("covariance is not Hermitian")
        if np.max(np.abs(Ct - Ct.T)) > STRUCT_TOL * scale:
            raise ValueError("pseudo-covariance is not symmetric")
        C.setflags(write=False)
        Ct.setflags(write=False)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Ct", Ct)

    @property
    def is_scalar(self):
        return np.ndim(self.C) == 0

    @property
    def M(self):
        return 1 if self.is_scalar else self.C.shape[0]

    @property
    def power(self):
        return self.C if self.is_scalar else float(np.real(np.trace(self.C)))

    def matrices(self):
        """(C, Ct) as M x M complex arrays, scalars included."""
        return (np.atleast_2d(np.asarray(self.C, dtype=complex)),
                np.atleast_2d(np.asarray(self.Ct, dtype=complex)))

    def augmented(self):
        return augmented_covariance(self)

    def to_dict(self):
        if self.is_scalar:
            return {"C": self.C, "Ct": _cplx(self.Ct)}
        return {"C": [[_cplx(v) for v in row] for row in self.C],
                "Ct": [[_cplx(v) for v in row] for row in self.Ct]}

    @classmethod
    def from_dict(cls, d):
        C, Ct = d["C"], d.get("Ct", 0.0)
        if isinstance(C, list):
            return cls(np.array([[_uncplx(v) for v in row] for row in C]),
                       np.array([[_uncplx(v) for v in row] for row in Ct]))
        return cls(_uncplx(C).real if isinstance(C, dict) else float(C), _uncplx(Ct))


def proper(C):
    """Strategy with zero pseudo-covariance."""
    if np.ndim(C) == 0:
        return SignalStrategy(float(C), 0.0)
    return SignalStrategy(C, np.zeros_like(np.asarray(C, dtype=complex)))


def augmented_covariance(s):
    """Augmented covariance [[C, Ct], [Ct*, C*]] (2M x 2M)."""
    C, Ct = s.matrices()
    return np.block([[C, Ct], [Ct.conj(), C.conj()]])


@dataclass(frozen=True)
class StrategyCheck:
    valid: bool
    power: float
    min_eig: float
    reason: str = ""

    def __bool__(self):
        return self.valid


def validate_strategy(s, P=np.inf):
    """Check that ``s`` is a realizable strategy within power budget ``P``.

    Dimension or structure errors raise ``ValueError`` at construction of
    the strategy; this function only judges realizability and power.
    """
    if s.is_scalar:
        C, Ct = s.C, s.Ct
        power = C
        # |Ct| <= C, reported as the smaller eigenvalue of the 2x2 augmented matrix
        min_eig = C - abs(Ct)
        if C < 0:
            return StrategyCheck(False, power, min_eig, "negative power")
        if abs(Ct) > C:
            return StrategyCheck(False, power, min_eig, "|Ct| exceeds C")
    else:
        power = s.power
        min_eig = float(np.linalg.eigvalsh(augmented_covariance(s))[0])
        if min_eig < -PSD_TOL:
            return StrategyCheck(False, power, min_eig, "augmented covariance not PSD")
    if power > P + POWER_TOL:
        return StrategyCheck(False, power, min_eig, "power budget exceeded")
    return StrategyCheck(True, power, min_eig)


@dataclass(frozen=True)
class SecondOrderStats:
    """Received covariance/pseudo-covariance and their interference-plus-noise parts."""

    Cy: object
    Cty: object
    Cs: object
    Cts: object


def received_stats(instance, strategies):
    """Second-order statistics at every receiver.

    Returns one :class:`SecondOrderStats` per receiver; scalars for a
    :class:`SisoIcInstance`, N x N matrices for a :class:`MimoIcInstance`.
    """
    if isinstance(instance, SisoIcInstance):
        h, s2 = instance.h, instance.sigma2
        C = np.array([s.C for s in strategies], dtype=float)
        X = np.array([s.Ct for s in strategies], dtype=complex)
        out = []
        for k in range(2):
            kb = 1 - k
            Cs = abs(h[k, kb]) ** 2 * C[kb] + s2
            Cts = h[k, kb] ** 2 * X[kb]
            out.append(SecondOrderStats(
                Cy=abs(h[k, k]) ** 2 * C[k] + Cs,
                Cty=h[k, k] ** 2 * X[k] + Cts,
                Cs=Cs,
                Cts=Cts,
            ))
        return out

    K, N = instance.K, instance.N
    if len(strategies) != K:
        raise ValueError("one strategy per user is required")
    mats = [s.matrices() for s in strategies]
    if any(C.shape != (instance.M, instance.M) for C, _ in mats):
        raise ValueError("strategy dimension does not match transmit antennas")
    out = []
    for k in range(K):
        Cs = instance.sigma2 * np.eye(N, dtype=complex)
        Cts = np.zeros((N, N), dtype=complex)
        for j in range(K):
            if j == k:
                continue
            Hkj = instance.H[k, j]
            Cs = Cs + Hkj @ mats[j][0] @ Hkj.conj().T
            Cts = Cts + Hkj @ mats[j][1] @ Hkj.T
        Hkk = instance.H[k, k]
        out.append(SecondOrderStats(
            Cy=Cs + Hkk @ mats[k][0] @ Hkk.conj().T,
            Cty=Cts + Hkk @ mats[k][1] @ Hkk.T,
            Cs=Cs,
            Cts=Cts,
        ))
    return out


def complex_to_real(s):
    """Covariance of the real composite ``[Re x; Im x]``.

    Equal to ``0.5 * T^H Cbar T``; for a scalar strategy this is
    ``0.5 * [[Re(C+Ct), Im Ct], [Im Ct, Re(C-Ct)]]`` and its trace is ``C``.
    """
    C, Ct = s.matrices()
    Q = 0.5 * np.block([[np.real(C + Ct), np.imag(Ct - C)],
                        [np.imag(C + Ct), np.real(C - Ct)]])
    return 0.5 * (Q + Q.T)


def real_to_complex(Q, tol=1e-12):
    """Inverse of :func:`complex_to_real`."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if Q.ndim != 2 or n != Q.shape[1] or n % 2:
        raise ValueError(f"Q must be a (2M x 2M) matrix, got shape {Q.shape}")
    if np.max(np.abs(Q - Q.T)) > tol * max(1.0, np.max(np.abs(Q))):
        raise ValueError("Q is not symmetric")
    m = n // 2
    Q11, Q12, Q21, Q22 = Q[:m, :m], Q[:m, m:], Q[m:, :m], Q[m:, m:]
    C = (Q11 + Q22) + 1j * (Q21 - Q12)
    Ct = (Q11 - Q22) + 1j * (Q21 + Q12)
    if m == 1:
        return SignalStrategy(float(C[0, 0].real), complex(Ct[0, 0]))
    # symmetrize away round-off before the strict structure checks
    return SignalStrategy(0.5 * (C + C.conj().T), 0.5 * (Ct + Ct.T))


def interference_ratio(instance, k):
    """``|h_{k,kbar}|^2 / |h_kk|^2`` for user ``k`` (0-based); inf if the direct gain is 0."""
    g = instance.gains
    direct, cross = g[k, k], g[k, 1 - k]
    if direct == 0:
        return 0.0 if cross == 0 else np.inf
    return float(cross / direct)


def _cplx(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _uncplx(v):
    if isinstance(v, dict):
        return complex(v["re"], v.get("im", 0.0))
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)
