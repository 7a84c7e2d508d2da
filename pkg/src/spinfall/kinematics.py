"""Chart maps, the radial-infall worldline and momentum bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepError
from .geometry import HORIZON_EPS, ChartPoint, metric_at, radius_from_kruskal, tetrad_at


def _check_exterior(r, M):
    if not M > 0:
        raise DomainError(f"mass must be positive, got {M!r}")
    if not r > 2.0 * M * (1.0 + HORIZON_EPS):
        raise DomainError(f"r = {r!r} is at or inside the horizon guard 2M(1 + {HORIZON_EPS})")


def kruskal_log_coordinates(t, r, M=1.0):
    """Return ``(log_R, u)`` with X = e^log_R cosh u and T = e^log_R sinh u.

    ``log_R = ln(r/2M - 1)/2 + r/4M`` and ``u = t/4M``. Far from the hole
    X and T overflow double precision long before these two numbers do.
    """
    _check_exterior(r, M)
    return 0.5 * math.log(r / (2.0 * M) - 1.0) + r / (4.0 * M), t / (4.0 * M)


def _exp_times(log_scale, value):
    # e^log_scale * value without spurious overflow for value == 0
    if value == 0.0:
        return 0.0
    log_mag = log_scale + math.log(abs(value))
    if log_mag > 709.0:
        return math.copysign(math.inf, value)
    return math.copysign(math.exp(log_mag), value)


def kruskal_from_log(log_R, u):
    """(T, X) from log coordinates; components overflow to inf when too large."""
    au = abs(u)
    # cosh u = e^|u| (1 + e^-2|u|) / 2, sinh u = sign(u) e^|u| (1 - e^-2|u|) / 2
    X = _exp_times(log_R + au, 0.5 * (1.0 + math.exp(-2.0 * au)))
    T = _exp_times(log_R + au, -0.5 * math.expm1(-2.0 * au))
    return math.copysign(T, u) if T != 0.0 else 0.0, X


def kruskal_from_schwarzschild(t, r, M=1.0):
    """Map exterior Schwarzschild (t, r) to Kruskal (T, X)."""
    return kruskal_from_log(*kruskal_log_coordinates(t, r, M))


def schwarzschild_from_kruskal(T, X, M=1.0):
    """Map a region-I Kruskal point (T, X) back to (t, r)."""
    if not (X > 0 and X > abs(T)):
        raise DomainError(f"(T, X) = ({T!r}, {X!r}) is not in the exterior region X > |T|")
    r = radius_from_kruskal((X - T) * (X + T), M)
    return 4.0 * M * math.atanh(T / X), r


def kruskal_jacobian(t, r, M=1.0):
    """Jacobian d(T, X)/d(t, r) of the chart map, rows (T, X), columns (t, r)."""
    T, X = kruskal_from_schwarzschild(t, r, M)
    dlogR = r / (4.0 * M * (r - 2.0 * M))
    return np.array([[X / (4.0 * M), T * dlogR], [T / (4.0 * M), X * dlogR]])


def radial_velocity(r, alpha, M=1.0):
    """Four-velocity U^mu (Schwarzschild components) of radial infall at rapidity alpha."""
    _check_exterior(r, M)
    s = math.sqrt(1.0 - 2.0 * M / r)
    return np.array([math.cosh(alpha) / s, -s * math.sinh(alpha), 0.0, 0.0])


def local_velocity(r, alpha, M=1.0):
    """U^a = e^a_mu U^mu in the static Schwarzschild tetrad."""
    U = radial_velocity(r, alpha, M)
    return tetrad_at(ChartPoint.schwarzschild(0.0, r, mass=M)).inverse @ U


def kruskal_frame_velocity(t, r, alpha, M=1.0):
    """Local velocity in the Kruskal tetrad.

    Infall at static-frame rapidity alpha appears in the Kruskal frame as
    (cosh(alpha - t/4M), -sinh(alpha - t/4M), 0, 0).
    """
    U = radial_velocity(r, alpha, M)
    J = kruskal_jacobian(t, r, M)
    T, X = kruskal_from_schwarzschild(t, r, M)
    U_kr = np.array([*(J @ U[:2]), 0.0, 0.0])
    return tetrad_at(ChartPoint.kruskal(T, X, mass=M)).inverse @ U_kr


def norm_squared(U, point):
    return float(U @ metric_at(point) @ U)


@dataclass(frozen=True)
class MomentumState:
    m: float
    p0: float
    alpha: float
    K: float


def momentum_state(p0, m=1.0):
    """Rapidity and kinematic factor K for local-frame energy p0 and rest mass m."""
    if not m > 0:
        raise DomainError(f"rest mass must be positive, got {m!r}")
    if not p0 >= m:
        raise DomainError(f"p0 = {p0!r} is below the rest mass {m!r}")
    K = math.sqrt((p0 - m) / (p0 + m)) if math.isfinite(p0) else 1.0
    return MomentumState(m=m, p0=p0, alpha=math.acosh(p0 / m), K=K)


def momentum_from_rapidity(alpha, m=1.0):
    """MomentumState for p0 = m cosh(alpha); K = tanh(alpha/2)."""
    return MomentumState(m=m, p0=m * math.cosh(alpha), alpha=abs(alpha), K=math.tanh(abs(alpha) / 2.0))


@dataclass(frozen=True)
class WorldlineSample:
    tau: float
    t: float
    r: float
    T: float
    X: float
    log_R: float
    beta: float
    U_coord: np.ndarray
    U_local: np.ndarray
    dT: float
    mass: float

    @property
    def point(self):
        return ChartPoint.schwarzschild(self.t, self.r, mass=self.mass)

    @property
    def kruskal_point(self):
        return ChartPoint.kruskal(self.T, self.X, mass=self.mass)

    @property
    def u(self):
        return self.t / (4.0 * self.mass)


def _dt_dr(r, alpha, M):
    return -1.0 / (math.tanh(alpha) * (1.0 - 2.0 * M / r))


def _dtau_dr(r, alpha, M):
    return -1.0 / (math.sqrt(1.0 - 2.0 * M / r) * math.sinh(alpha))


def coordinate_time_exact(r, r_start, alpha, M=1.0, t_start=0.0):
    """Closed-form t(r) along the constant-alpha radial family."""
    def primitive(x):
        return x + 2.0 * M * math.log(x - 2.0 * M)

    return t_start - (primitive(r) - primitive(r_start)) / math.tanh(alpha)


def integrate_worldline(r_start, r_end, alpha0, M=1.0, n_steps=1000, t_start=0.0):
    """Sample a radial infall from r_start down to r_end.

    The worldline is parameterised by r on ``n_steps`` equal intervals;
    coordinate and proper time are advanced with a classical fourth-order
    Runge-Kutta step. Returns ``n_steps + 1`` samples.
    """
    if not M > 0:
        raise DomainError(f"mass must be positive, got {M!r}")
    if not 2.0 * M * (1.0 + HORIZON_EPS) < r_end < r_start:
        raise DomainError(f"need 2M(1 + eps) < r_end < r_start, got r_start={r_start!r}, r_end={r_end!r}")
    if n_steps < 2:
        raise DomainError(f"n_steps must be at least 2, got {n_steps!r}")
    if not alpha0 > 0:
        raise DomainError(f"alpha0 must be positive, got {alpha0!r}")

    radii = np.linspace(r_start, r_end, n_steps + 1)
    t, tau = float(t_start), 0.0
    times, taus = [t], [tau]
    for i in range(n_steps):
        r0, r1 = radii[i], radii[i + 1]
        h = r1 - r0
        rm = 0.5 * (r0 + r1)
        # dt/dr depends on r only, so the RK4 stages reduce to Simpson weights
        t += h / 6.0 * (_dt_dr(r0, alpha0, M) + 4.0 * _dt_dr(rm, alpha0, M) + _dt_dr(r1, alpha0, M))
        tau += h / 6.0 * (_dtau_dr(r0, alpha0, M) + 4.0 * _dtau_dr(rm, alpha0, M) + _dtau_dr(r1, alpha0, M))
        times.append(t)
        taus.append(tau)

    kruskal = []
    for i, (t, r) in enumerate(zip(times, radii)):
        log_R, u = kruskal_log_coordinates(t, r, M)
        if not math.isfinite(log_R + u):
            raise StepError(f"sample {i}: Kruskal image of (t={t!r}, r={r!r}) is not finite", index=i)
        kruskal.append((log_R, u, *kruskal_from_log(log_R, u)))

    samples = []
    for i, (t, r, tau) in enumerate(zip(times, radii, taus)):
        log_R, u, T, X = kruskal[i]
        if i + 1 < len(kruskal):
            dT = kruskal[i + 1][2] - T
        else:
            dT = 0.0
        samples.append(
            WorldlineSample(
                tau=tau,
                t=t,
                r=float(r),
                T=T,
                X=X,
                log_R=log_R,
                beta=alpha0 + t / (4.0 * M),
                U_coord=radial_velocity(r, alpha0, M),
                U_local=local_velocity(r, alpha0, M),
                dT=dT if math.isfinite(dT) else math.inf,
                mass=M,
            )
        )
    return samples


def worldline_normalization_residual(samples):
    """Largest deviation of g(U, U) from -1 and of the local-frame norm from 1."""
    coord = max(abs(norm_squared(s.U_coord, s.point) + 1.0) for s in samples)
    local = max(abs(s.U_local[0] ** 2 - s.U_local[1] ** 2 - 1.0) for s in samples)
    return coord, local
