"""
Widely linear precoding ``x = B1 d + B2 conj(d)``.

Maps a proper Gaussian codeword ``d ~ CN(0, I)`` to a transmit signal with a
prescribed covariance / pseudo-covariance pair. The factor comes from the
real symmetric EVD of ``T^H Cbar T = V Lambda V^T``, where
``T = [[I, iI], [I, -iI]]/sqrt(2)`` and ``Cbar`` is the augmented covariance.
The symmetric root ``T (V Lambda^{1/2} V^T) T^H`` has the conjugate-block
structure [[B1, B2], [B2*, B1*]] and does not depend on the choice of
eigenbasis, so a proper strategy gives ``B2 = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .signal_model import PSD_TOL, SignalStrategy


def unitary_T(M):
    """The fixed 2M x 2M unitary ``(1/sqrt 2) [[I, iI], [I, -iI]]``."""
    I = np.eye(M)
    return np.block([[I, 1j * I], [I, -1j * I]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class WidelyLinearFactor:
    B1: np.ndarray
    B2: np.ndarray
    eigvals: np.ndarray
    V: np.ndarray

    @property
    def M(self):
        return self.B1.shape[0]

    @property
    def T(self):
        return unitary_T(self.M)

    def sqrt_matrix(self):
        """The structured square root ``[[B1, B2], [B2*, B1*]]``."""
        return np.block([[self.B1, self.B2], [self.B2.conj(), self.B1.conj()]])

    def covariance(self):
        return self.B1 @ self.B1.conj().T + self.B2 @ self.B2.conj().T

    def pseudo_covariance(self):
        return self.B1 @ self.B2.T + self.B2 @ self.B1.T


def _real_augmented(s):
    C, Ct = s.matrices()
    return np.block([[np.real(C + Ct), np.imag(Ct - C)],
                     [np.imag(C + Ct), np.real(C - Ct)]])


def augmented_sqrt(s):
    """Structured square root of the augmented covariance of ``s``.

    Raises
    ------
    ValueError
        If the augmented covariance has an eigenvalue below ``-1e-9``.
    """
    M = s.M
    R = _real_augmented(s)
    R = 0.5 * (R + R.T)
    lam, V = np.linalg.eigh(R)
    lam, V = lam[::-1], V[:, ::-1]
    if lam[-1] < -PSD_TOL:
        raise ValueError(f"invalid strategy: augmented covariance eigenvalue {lam[-1]:.3e}")
    lam = np.clip(lam, 0.0, None)
    T = unitary_T(M)
    S = T @ ((V * np.sqrt(lam)) @ V.T) @ T.conj().T
    return WidelyLinearFactor(B1=S[:M, :M].copy(), B2=S[:M, M:].copy(), eigvals=lam, V=V)


def precode(f, d):
    """Apply ``B1 d + B2 conj(d)``.

    ``d`` may be a single M-vector or an (n, M) batch.
    """
    d = np.asarray(d, dtype=complex)
    if d.shape[-1] != f.M:
        raise ValueError(f"expected last dimension {f.M}, got {d.shape}")
    return d @ f.B1.T + d.conj() @ f.B2.T


def real_representation(f):
    """Real 2M x 2M map from ``[Re d; Im d]`` to ``[Re x; Im x]``."""
    B1, B2 = f.B1, f.B2
    return np.block([[np.real(B1 + B2), np.imag(B2 - B1)],
                     [np.imag(B2 + B1), np.real(B1 - B2)]])


def sample_improper(s, n, rng=None):
    """Draw ``n`` transmit vectors with the second-order statistics of ``s``.

    ``rng`` is a ``numpy.random.Generator`` or a seed. Returns an (n, M)
    complex array.
    """
    rng = np.random.default_rng(rng)
    f = augmented_sqrt(s)
    if n == 0:
        return np.zeros((0, f.M), dtype=complex)
    d = (rng.standard_normal((n, f.M)) + 1j * rng.standard_normal((n, f.M))) / np.sqrt(2.0)
    return precode(f, d)


def empirical_stats(x):
    """Sample covariance and pseudo-covariance of an (n, M) batch."""
    x = np.asarray(x)
    n = x.shape[0]
    return x.T @ x.conj() / n, x.T @ x / n


def strategy_from_factor(f):
    """Strategy realized by a factor (for round-trip checks)."""
    C, Ct = f.covariance(), f.pseudo_covariance()
    if f.M == 1:
        return SignalStrategy(float(C[0, 0].real), complex(Ct[0, 0]))
    return SignalStrategy(0.5 * (C + C.conj().T), 0.5 * (Ct + Ct.T))
