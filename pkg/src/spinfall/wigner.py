"""Spin-1/2 Wigner step matrices and their accumulation along a worldline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularInputError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)


def scalar_a(r, M=1.0):
    """a = (r/2M)^(1/2) (1 - 2M/r) exp(r/4M); overflows to inf for r >~ 2800 M."""
    if not r >= 2.0 * M:
        raise DomainError(f"r = {r!r} is inside the horizon")
    growth = math.exp(r / (4.0 * M)) if r / (4.0 * M) < 709.0 else math.inf
    return math.sqrt(r / (2.0 * M)) * (1.0 - 2.0 * M / r) * growth


def scalar_b(r, M=1.0):
    """b = (2M/r - 1)^2."""
    if not r >= 2.0 * M:
        raise DomainError(f"r = {r!r} is inside the horizon")
    return (2.0 * M / r - 1.0) ** 2


@dataclass(frozen=True)
class StepInputs:
    a: float
    b: float
    beta: float
    K: float
    T: float
    X: float
    dT: float = 0.0
    dtheta: float = 0.0
    dphi: float = 0.0


def _radial_coefficients(beta, K):
    """Diagonal and off-diagonal dT coefficients, without the common b/X factor."""
    coth = 1.0 / math.tanh(beta)
    one_minus = 1.0 - K * K
    diag = K * K * coth / one_minus
    off = (1.0 + 2.0 * K * coth - K * K) / (2.0 * one_minus)
    return diag, off


def step_matrix(inputs):
    """Infinitesimal Wigner rotation for one coordinate displacement.

    Identity plus terms first order in (dT, dtheta, dphi), with every entry
    as in the published step matrix, angular terms included.
    """
    a, b, beta, K, T, X = inputs.a, inputs.b, inputs.beta, inputs.K, inputs.T, inputs.X
    dT, dth, dph = inputs.dT, inputs.dtheta, inputs.dphi
    if dT == 0.0 and dth == 0.0 and dph == 0.0:
        return IDENTITY.copy()
    if beta == 0.0:
        raise SingularInputError("beta = 0: coth(beta) diverges")
    if X == 0.0:
        raise SingularInputError("X = 0: step coefficients diverge")
    if dth != 0.0 and T == 0.0:
        raise SingularInputError("T = 0 with dtheta != 0: angular coefficients diverge")
    if not 0.0 <= K < 1.0:
        raise SingularInputError(f"K = {K!r} is outside [0, 1)")

    coth = 1.0 / math.tanh(beta)
    one_minus = 1.0 - K * K
    diag_c, off_c = _radial_coefficients(beta, K)
    diag_real = 1.0 - diag_c * b * dT / X
    off_real = -off_c * b * dT / X
    if dth != 0.0:
        xt = 2.0 * one_minus * X * T
        diag_imag = (2.0 * K * X - T - K * K * (3.0 * T + 2.0 * X * coth)) * a * dth / xt
        theta_off = ((1.0 - 2.0 * K * coth + K * K) - 4.0 * K * T) / xt * a * dth
    else:
        diag_imag = theta_off = 0.0
    return np.array(
        [
            [diag_real + 1j * diag_imag, off_real - 0.5j * (dph - theta_off)],
            [off_real - 0.5j * (dph + theta_off), diag_real - 1j * diag_imag],
        ]
    )


def flat_limit_matrix(dphi):
    """Limit of :func:`step_matrix` for K -> 0, X -> infinity.

    Only the dphi term survives: I - (i dphi / 2) sigma_1, which has the
    SU(2) shape and is unitary to first order.
    """
    return IDENTITY - 0.5j * dphi * SIGMA_1


def expm2(G):
    """Exact exponential of a 2x2 complex matrix."""
    mu = 0.5 * (G[0, 0] + G[1, 1])
    A = G - mu * IDENTITY
    delta = A[0, 0] * A[0, 0] + A[0, 1] * A[1, 0]  # A @ A = delta I
    s = np.sqrt(complex(delta))
    if abs(s) < 1e-8:
        sinhc = 1.0 + delta / 6.0
    else:
        sinhc = np.sinh(s) / s
    return np.exp(mu) * (np.cosh(s) * IDENTITY + sinhc * A)


# ---------------------------------------------------------------------------
# accumulation


def _scaled_kruskal(log_R, u, shift):
    au = abs(u)
    mag = math.exp(log_R + au - shift)
    X = 0.5 * mag * (1.0 + math.exp(-2.0 * au))
    T = math.copysign(-0.5 * mag * math.expm1(-2.0 * au), u)
    return T, X


def segment_inputs(worldline, mom):
    """Midpoint :class:`StepInputs` for every segment of a radial worldline.

    T, X and dT are rescaled by a common per-segment factor so that they
    stay finite far from the hole; the radial entries depend only on dT/X
    and are unaffected.
    """
    M = worldline[0].mass
    out = []
    for s0, s1 in zip(worldline[:-1], worldline[1:]):
        shift = max(s0.log_R + abs(s0.u), s1.log_R + abs(s1.u))
        T0, X0 = _scaled_kruskal(s0.log_R, s0.u, shift)
        T1, X1 = _scaled_kruskal(s1.log_R, s1.u, shift)
        out.append(
            StepInputs(
                a=0.0,
                b=0.5 * (scalar_b(s0.r, M) + scalar_b(s1.r, M)),
                beta=0.5 * (s0.beta + s1.beta),
                K=mom.K,
                T=0.5 * (T0 + T1),
                X=0.5 * (X0 + X1),
                dT=T1 - T0,
            )
        )
    return out


def accumulate(worldline, mom, method="exponential", reverse=False):
    """Ordered product of step matrices along ``worldline``.

    Later factors multiply on the left: D = D_N ... D_2 D_1. With
    ``method="linear"`` each factor is the first-order step matrix itself;
    the default ``"exponential"`` exponentiates each step's generator, which
    has the same first-order content and makes the midpoint product
    converge at second order. ``reverse=True`` multiplies in the opposite
    order (a diagnostic for commuting steps).
    """
    if not worldline:
        raise DomainError("empty worldline")
    if method not in ("exponential", "linear"):
        raise ValueError(f"unknown accumulation method {method!r}")
    return cumulative_maps(worldline, mom, method=method, reverse=reverse)[-1]


def cumulative_maps(worldline, mom, method="exponential", reverse=False):
    """Accumulated map after each sample; element 0 is the identity."""
    D = IDENTITY.copy()
    maps = [D.copy()]
    with np.errstate(over="ignore", invalid="ignore"):
        maps.extend(_ordered_products(worldline, mom, method, reverse))
    return maps


def _ordered_products(worldline, mom, method, reverse):
    D = IDENTITY.copy()
    for i, inputs in enumerate(segment_inputs(worldline, mom)):
        try:
            step = step_matrix(inputs)
        except SingularInputError as exc:
            raise SingularInputError(f"segment {i}: {exc}", index=i) from exc
        if method == "exponential":
            step = expm2(step - IDENTITY)
        D = D @ step if reverse else step @ D
        yield D


def closed_form_radial(worldline, mom):
    """Exponential-of-integral matrix with the printed closed-form integrands.

    Diagonal exp(-int K^2 coth(beta) b/((1-K^2) X) dT); off-diagonal
    exp(-int (1 + K coth(beta) - K^2) b/(2 (1-K^2) X) dT) - 1, both by the
    composite midpoint rule. Its off-diagonal integrand differs from the step
    matrix's (K coth vs 2 K coth), so this is a comparator only.
    """
    diag_int = off_int = 0.0
    for i, inputs in enumerate(segment_inputs(worldline, mom)):
        if inputs.dT == 0.0:
            continue
        if inputs.beta == 0.0:
            raise SingularInputError(f"segment {i}: beta = 0", index=i)
        K = inputs.K
        coth = 1.0 / math.tanh(inputs.beta)
        weight = inputs.b * inputs.dT / inputs.X
        diag_int += K * K * coth / (1.0 - K * K) * weight
        off_int += (1.0 + K * coth - K * K) / (2.0 * (1.0 - K * K)) * weight
    with np.errstate(over="ignore"):
        p = np.exp(-diag_int)
        off = np.expm1(-off_int)
    return np.array([[p, off], [off, p]], dtype=complex)


def unitarity_deviation(D):
    """Frobenius norm of D^dagger D - I.

    A map whose entries overflowed is reported as infinitely far from unitary.
    """
    D = np.asarray(D)
    if not np.all(np.isfinite(D)):
        return math.inf
    return float(np.linalg.norm(D.conj().T @ D - np.eye(D.shape[0])))


def su2_form_check(D, tol=1e-12):
    """True if D has the shape ((A, B), (-B*, A*)) with |A|^2 + |B|^2 = 1."""
    D = np.asarray(D)
    A, B = D[0, 0], D[0, 1]
    return bool(
        abs(D[1, 1] - np.conj(A)) <= tol
        and abs(D[1, 0] + np.conj(B)) <= tol
        and abs(abs(A) ** 2 + abs(B) ** 2 - 1.0) <= tol
    )
