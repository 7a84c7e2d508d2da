"""Spin density matrices under the accumulated Wigner map.

Entropies are in bits. The accumulated map is not trace preserving, so
traces are carried along rather than assumed to be 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DecompositionError, DomainError
from .wigner import IDENTITY, SIGMA_1, unitarity_deviation

SPIN_UP = np.array([[1, 0], [0, 0]], dtype=complex)
PAULI = (
    IDENTITY,
    SIGMA_1,
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
EIGEN_TOL = 1e-12
PQ_TOL = 1e-6


@dataclass(frozen=True)
class ChannelParams:
    p: float
    q: float
    residual: float = 0.0

    def matrix(self):
        return self.p * IDENTITY - (1.0 - self.q) * SIGMA_1


@dataclass(frozen=True)
class ChannelReport:
    params: ChannelParams
    entropy_paper: float
    entropy_normalized: float
    purity: float
    unitarity_dev: float
    trace_out: float
    bitflip_distance: float


def apply_map(rho, D):
    """rho' = D rho D^dagger (trace not renormalised)."""
    D = np.asarray(D, dtype=complex)
    out = D @ np.asarray(rho, dtype=complex) @ D.conj().T
    return 0.5 * (out + out.conj().T)


def spin_up_output(p, q):
    """Image of the spin-up state under p I - (1 - q) sigma_1."""
    s = 1.0 - q
    return np.array([[p * p, -p * s], [-p * s, s * s]], dtype=complex)


def extract_pq(D, tol=PQ_TOL):
    """Read (p, q) off a map of the form p I - (1 - q) sigma_1.

    Diagonal and off-diagonal entries are averaged; the residual of the
    reconstruction, relative to max(1, |D|), is returned in the result.
    Raises DecompositionError if it exceeds ``tol``.
    """
    D = np.asarray(D, dtype=complex)
    p = 0.5 * (D[0, 0] + D[1, 1]).real
    one_minus_q = -0.5 * (D[0, 1] + D[1, 0]).real
    params = ChannelParams(p=float(p), q=float(1.0 - one_minus_q))
    residual = float(np.linalg.norm(D - params.matrix()) / max(1.0, np.linalg.norm(D)))
    if not residual <= tol:
        raise DecompositionError(f"map is not in the real span of I and sigma_1 (residual {residual:.3g})")
    return ChannelParams(p=params.p, q=params.q, residual=residual)


def _eigenvalues(rho):
    rho = np.asarray(rho, dtype=complex)
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam.min() < -EIGEN_TOL * max(1.0, lam.max()):
        raise DomainError(f"density matrix has a negative eigenvalue {lam.min():.3g}")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho, normalize=True):
    """-Tr(rho log2 rho).

    With ``normalize=False`` the eigenvalues are used as they are, which for
    the rank-one image of a pure state gives -t log2 t with t its trace.
    """
    lam = _eigenvalues(rho)
    if normalize:
        total = lam.sum()
        if not total > 0:
            raise DomainError("cannot normalise a density matrix with zero trace")
        lam = lam / total
    lam = lam[lam > 0]
    with np.errstate(over="ignore"):
        return float(-np.sum(lam * np.log2(lam))) + 0.0


def purity(rho):
    rho = np.asarray(rho, dtype=complex)
    rho = rho / np.trace(rho).real
    return float(np.trace(rho @ rho).real)


def transfer_matrix(A, rho=SPIN_UP):
    """Pauli transfer matrix of X -> A X A^dagger / Tr(A rho A^dagger)."""
    A = np.asarray(A, dtype=complex)
    norm = np.trace(apply_map(rho, A)).real
    R = np.empty((4, 4))
    for i, Pi in enumerate(PAULI):
        for j, Pj in enumerate(PAULI):
            R[i, j] = 0.5 * np.trace(Pi @ A @ Pj @ A.conj().T).real
    return R / norm


def bitflip_transfer_matrix(lam):
    return np.diag([1.0, 1.0, 1.0 - 2.0 * lam, 1.0 - 2.0 * lam])


def nearest_bitflip(params, step=1e-4):
    """Closest bit-flip channel to the normalised map of ``params``.

    Returns ``(lam, distance)``: a dense scan over lam in [0, 1] followed by
    a bounded local refinement. The distance is the Frobenius norm between
    Pauli transfer matrices.
    """
    A = params.matrix()
    if np.trace(apply_map(SPIN_UP, A)).real == 0.0:
        return math.nan, math.nan
    R = transfer_matrix(A)
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    # only the (2, 2) and (3, 3) entries of the bit-flip matrix depend on lam
    fixed = R - bitflip_transfer_matrix(0.5)
    fixed_sq = np.sum(fixed**2) - fixed[2, 2] ** 2 - fixed[3, 3] ** 2
    c = 1.0 - 2.0 * grid
    dist = np.sqrt(np.maximum(fixed_sq + (R[2, 2] - c) ** 2 + (R[3, 3] - c) ** 2, 0.0))
    k = int(np.argmin(dist))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(
        lambda x: np.linalg.norm(R - bitflip_transfer_matrix(x)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if res.fun < dist[k]:
        return float(res.x), float(res.fun)
    return float(grid[k]), float(dist[k])


def bitflip_distance(params):
    return nearest_bitflip(params)[1]


def channel_report(D):
    """Everything reported about one accumulated map acting on spin-up."""
    params = extract_pq(D)
    rho_out = apply_map(SPIN_UP, D)
    return ChannelReport(
        params=params,
        entropy_paper=von_neumann_entropy(rho_out, normalize=False),
        entropy_normalized=von_neumann_entropy(rho_out, normalize=True),
        purity=purity(rho_out),
        unitarity_dev=unitarity_deviation(D),
        trace_out=float(np.trace(rho_out).real),
        bitflip_distance=bitflip_distance(params),
    )
