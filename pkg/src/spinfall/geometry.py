"""Metrics, tetrads, connection coefficients and the Killing field.

Two charts of the Schwarzschild spacetime are supported: the static
Schwarzschild chart ``(t, r, theta, phi)`` and the Kruskal chart
``(T, X, theta, phi)``. Geometric units (G = c = 1), signature (-,+,+,+).
Both metrics are diagonal, which the closed forms below rely on.

Array index conventions:

* ``metric[mu, nu]`` is g_{mu nu}
* ``christoffel[mu, nu, lam]`` is Gamma^mu_{nu lam}
* ``Tetrad.forward[a, mu]`` is e_a^mu, ``Tetrad.inverse[a, mu]`` is e^a_mu
* ``ConnectionOneForms.omega[a, b, nu]`` is omega^a_{b nu}, so that the
  infinitesimal local Lorentz transformation is delta omega^a_b =
  omega^a_{b nu} dx^nu
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

#: Schwarzschild-chart operations reject r <= 2M (1 + HORIZON_EPS).
HORIZON_EPS = 1e-9

#: Minkowski metric diag(-1, 1, 1, 1).
ETA = np.diag([-1.0, 1.0, 1.0, 1.0])

NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-12


class Chart(str, enum.Enum):
    SCHWARZSCHILD = "schwarzschild"
    KRUSKAL = "kruskal"


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates tagged with their chart and the black-hole mass."""

    chart: Chart
    coords: tuple[float, float, float, float]
    mass: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "chart", Chart(self.chart))
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if len(self.coords) != 4:
            raise ValueError("a chart point needs exactly 4 coordinates")

    @classmethod
    def schwarzschild(cls, t, r, theta=math.pi / 2, phi=0.0, mass=1.0):
        return cls(Chart.SCHWARZSCHILD, (t, r, theta, phi), mass)

    @classmethod
    def kruskal(cls, T, X, theta=math.pi / 2, phi=0.0, mass=1.0):
        return cls(Chart.KRUSKAL, (T, X, theta, phi), mass)

    def shifted(self, index, delta):
        coords = list(self.coords)
        coords[index] += delta
        return ChartPoint(self.chart, tuple(coords), self.mass)


@dataclass(frozen=True)
class Tetrad:
    forward: np.ndarray
    inverse: np.ndarray
    point: ChartPoint


@dataclass(frozen=True)
class ConnectionOneForms:
    omega: np.ndarray
    point: ChartPoint

    def lowered(self):
        """omega_{ab nu} = eta_{ac} omega^c_{b nu}."""
        return np.einsum("ac,cbn->abn", ETA, self.omega)

    def antisymmetry_residual(self):
        low = self.lowered()
        return float(np.max(np.abs(low + low.transpose(1, 0, 2))))

    def contract(self, displacement):
        """delta omega^a_b for a coordinate displacement dx^nu."""
        return self.omega @ np.asarray(displacement, dtype=float)


@dataclass(frozen=True)
class KillingField:
    vector: np.ndarray
    norm: float
    point: ChartPoint

    @property
    def causal_character(self):
        if self.norm < 0:
            return "timelike"
        if self.norm > 0:
            return "spacelike"
        return "null"


# ---------------------------------------------------------------------------
# Kruskal radius


def radius_from_kruskal(v, mass=1.0, full_output=False):
    """Solve ``(r/2M - 1) exp(r/2M) = v`` for the areal radius r.

    ``v`` is X^2 - T^2 and must exceed -1. Newton's method on the convex,
    increasing residual started to the right of the root converges
    monotonically. For ``v > e^2`` the iteration runs on the logarithm of
    the equation instead, started from the lower bound ln x - ln ln x of
    the Lambert function, because the exponential form needs a number of
    iterations proportional to r/2M from that starting guess.

    Returns r, or ``(r, iterations)`` if ``full_output``.
    """
    v = float(v)
    if not v > -1.0 or not math.isfinite(v):
        raise DomainError(f"X^2 - T^2 = {v!r} is outside the Kruskal chart (must exceed -1)")
    if v <= math.e**2:
        y = 1.0 + max(v, 1e-3) / math.e
        for it in range(1, NEWTON_MAX_ITER + 1):
            ey = math.exp(y)
            step = ((y - 1.0) * ey - v) / (y * ey)
            y -= step
            if abs(step) < NEWTON_TOL:
                break
        else:
            raise ConvergenceError(f"radius solve did not converge for X^2 - T^2 = {v!r}")
    else:
        # w = y - 1 solves w e^w = v / e
        log_x = math.log(v) - 1.0
        w = log_x - math.log(log_x)
        for it in range(1, NEWTON_MAX_ITER + 1):
            step = (math.log(w) + w - log_x) / (1.0 / w + 1.0)
            w -= step
            if abs(step) < NEWTON_TOL * max(1.0, w):
                break
        else:
            raise ConvergenceError(f"radius solve did not converge for X^2 - T^2 = {v!r}")
        y = w + 1.0
    r = 2.0 * mass * y
    if full_output:
        return r, it
    return r


def areal_radius(point):
    if point.chart is Chart.SCHWARZSCHILD:
        return point.coords[1]
    T, X = point.coords[0], point.coords[1]
    return radius_from_kruskal((X - T) * (X + T), point.mass)


def check_point(point):
    """Raise DomainError unless ``point`` lies inside its chart."""
    M = point.mass
    if not M > 0:
        raise DomainError(f"mass must be positive, got {M!r}")
    if not all(math.isfinite(c) for c in point.coords):
        raise DomainError(f"non-finite coordinates {point.coords!r}")
    theta = point.coords[2]
    if not 0.0 < theta < math.pi:
        raise DomainError(f"theta = {theta!r} is outside (0, pi)")
    if point.chart is Chart.SCHWARZSCHILD:
        r = point.coords[1]
        if not r > 2.0 * M * (1.0 + HORIZON_EPS):
            raise DomainError(f"r = {r!r} is at or inside the horizon guard 2M(1 + {HORIZON_EPS})")
    else:
        T, X = point.coords[0], point.coords[1]
        if not (X - T) * (X + T) > -1.0:
            raise DomainError(f"X^2 - T^2 = {X * X - T * T!r} must exceed -1")


def _diagonal_metric(point):
    """Diagonal metric components and their gradient.

    Returns ``(diag, grad)`` with ``diag[mu] = g_{mu mu}`` and
    ``grad[sigma, mu] = d_sigma g_{mu mu}``.
    """
    check_point(point)
    M = point.mass
    theta = point.coords[2]
    s, c = math.sin(theta), math.cos(theta)
    grad = np.zeros((4, 4))
    if point.chart is Chart.SCHWARZSCHILD:
        r = point.coords[1]
        f = 1.0 - 2.0 * M / r
        df = 2.0 * M / r**2
        diag = np.array([-f, 1.0 / f, r * r, r * r * s * s])
        grad[1] = [-df, -df / f**2, 2.0 * r, 2.0 * r * s * s]
    else:
        T, X = point.coords[0], point.coords[1]
        r = areal_radius(point)
        F = 32.0 * M**3 / r * math.exp(-r / (2.0 * M))
        dF_dr = -F * (1.0 / r + 1.0 / (2.0 * M))
        common = 8.0 * M * M * math.exp(-r / (2.0 * M)) / r
        dr = {0: -common * T, 1: common * X}
        diag = np.array([-F, F, r * r, r * r * s * s])
        for sigma in (0, 1):
            grad[sigma] = dr[sigma] * np.array([-dF_dr, dF_dr, 2.0 * r, 2.0 * r * s * s])
    grad[2, 3] = 2.0 * r * r * s * c
    return diag, grad


def metric_at(point):
    """Metric components g_{mu nu} at ``point`` as a 4x4 array."""
    diag, _ = _diagonal_metric(point)
    return np.diag(diag)


def tetrad_at(point):
    """Diagonal orthonormal tetrad and its inverse at ``point``."""
    diag, _ = _diagonal_metric(point)
    scale = np.sqrt(np.abs(diag))
    return Tetrad(forward=np.diag(1.0 / scale), inverse=np.diag(scale), point=point)


def _christoffel_from_derivatives(ginv, dg):
    # dg[s, m, n] = d_s g_{mn}; lower[s, n, l] = Gamma_{s n l}
    lower = 0.5 * (np.einsum("nsl->snl", dg) + np.einsum("lsn->snl", dg) - dg)
    return np.einsum("ms,snl->mnl", ginv, lower)


def christoffel_analytic(point):
    """Closed-form Christoffel symbols Gamma^mu_{nu lam} of a diagonal metric."""
    diag, grad = _diagonal_metric(point)
    dg = np.zeros((4, 4, 4))
    for mu in range(4):
        dg[:, mu, mu] = grad[:, mu]
    return _christoffel_from_derivatives(np.diag(1.0 / diag), dg)


def _default_steps(point):
    return np.array([1e-6 * max(1.0, abs(x)) for x in point.coords])


def coordinate_derivative(func, point, h=None):
    """Central-difference derivatives of ``func(point)`` along each coordinate.

    One Richardson level is applied: ``(4 D(h/2) - D(h)) / 3``. Returns an
    array with the derivative index first. Raises DomainError if the
    stencil leaves the chart.
    """
    steps = _default_steps(point) if h is None else np.full(4, float(h))
    out = []
    for k in range(4):
        def central(hk):
            try:
                plus = np.asarray(func(point.shifted(k, hk)))
                minus = np.asarray(func(point.shifted(k, -hk)))
            except DomainError as exc:
                raise DomainError(f"finite-difference stencil leaves the chart: {exc}") from exc
            return (plus - minus) / (2.0 * hk)

        out.append((4.0 * central(steps[k] / 2.0) - central(steps[k])) / 3.0)
    return np.array(out)


def christoffel_numeric(point, h=None):
    """Christoffel symbols from finite differences of :func:`metric_at`.

    Independent of the closed forms: only metric values are used.
    """
    check_point(point)
    dg = coordinate_derivative(metric_at, point, h)
    return _christoffel_from_derivatives(np.linalg.inv(metric_at(point)), dg)


def connection_one_forms(point, numeric=False):
    """Connection one-forms omega^a_{b nu} = e^a_mu nabla_nu e_b^mu.

    With ``numeric=True`` the Christoffel symbols and the tetrad
    derivatives are both taken from finite differences.
    """
    tetrad = tetrad_at(point)
    if numeric:
        gamma = christoffel_numeric(point)
        de = coordinate_derivative(lambda p: tetrad_at(p).forward, point)
    else:
        gamma = christoffel_analytic(point)
        diag, grad = _diagonal_metric(point)
        e = np.diag(tetrad.forward)
        de = np.zeros((4, 4, 4))  # de[nu, a, mu] = d_nu e_a^mu
        for a in range(4):
            de[:, a, a] = -0.5 * e[a] * grad[:, a] / diag[a]
    # nabla_nu e_b^mu = d_nu e_b^mu + Gamma^mu_{nu lam} e_b^lam
    cov = np.einsum("nbm->bmn", de) + np.einsum("mnl,bl->bmn", gamma, tetrad.forward)
    omega = np.einsum("am,bmn->abn", tetrad.inverse, cov)
    return ConnectionOneForms(omega=omega, point=point)


def lorentz_step(forms, displacement):
    """Infinitesimal local Lorentz matrix Lambda^a_b = delta^a_b + delta omega^a_b."""
    return np.eye(4) + forms.contract(displacement)


def literal_kruskal_one_forms(point):
    """Closed-form one-form coefficients as printed in the source derivation.

    Kept as a diagnostic only; the prefactors do not agree with the
    one-forms built from the tetrad and Christoffel symbols. Returns a dict
    keyed like ``"0_1,T"`` (omega^0_{1, T}).
    """
    if point.chart is not Chart.KRUSKAL:
        raise DomainError("the printed one-forms are written in the Kruskal chart")
    check_point(point)
    M = point.mass
    T, X, theta, _ = point.coords
    r = areal_radius(point)
    f = 1.0 - 2.0 * M / r
    growth = math.exp(r / (4.0 * M))
    s = math.sqrt(r / (2.0 * M))
    with np.errstate(divide="ignore"):
        inv_T = np.float64(1.0) / np.float64(T)
    return {
        "0_1,T": -(1.0 / X) * (2.0 * M / r - 1.0) ** 2,
        "2_0,theta": math.sqrt(2.0 * r / (2.0 * M)) * f * inv_T * growth,
        "3_0,phi": s * f * inv_T * growth * math.sin(theta),
        "3_2,phi": math.cos(theta),
        "2_1,theta": s * f / X * growth,
        "3_1,phi": s * f / X * growth * math.sin(theta),
    }


def compare_literal_one_forms(point):
    """Rows ``(name, printed, computed)`` comparing printed and computed one-forms."""
    literal = literal_kruskal_one_forms(point)
    omega = connection_one_forms(point).omega
    index = {"T": 0, "X": 1, "theta": 2, "phi": 3}
    rows = []
    for name, value in literal.items():
        ab, nu = name.split(",")
        a, b = (int(x) for x in ab.split("_"))
        rows.append((name, float(value), float(omega[a, b, index[nu]])))
    return rows


# ---------------------------------------------------------------------------
# Killing field


def killing_vector(point):
    """The static Killing field (1/4M)(X d/dT + T d/dX) in the Kruskal chart."""
    if point.chart is not Chart.KRUSKAL:
        raise DomainError("the Killing field is evaluated in the Kruskal chart")
    check_point(point)
    T, X = point.coords[0], point.coords[1]
    M = point.mass
    xi = np.array([X, T, 0.0, 0.0]) / (4.0 * M)
    g_xx = metric_at(point)[1, 1]
    # g_TT = -g_XX, so the norm factorises; this keeps it exactly zero on the horizon
    norm = g_xx * (T - X) * (T + X) / (16.0 * M * M)
    return KillingField(vector=xi, norm=float(norm), point=point)


def killing_residual(point, h=None):
    """max |nabla_(mu xi_nu)| in orthonormal-frame components.

    Derivatives are finite differences (Christoffel symbols from
    :func:`christoffel_numeric`). Frame components are used because the
    Kruskal metric is badly scaled away from the horizon (g_TT ~ e^(-r/2M)
    against g_thetatheta ~ r^2), which makes coordinate components
    incomparable.
    """
    def covector(p):
        return metric_at(p) @ killing_vector(p).vector

    d_xi = coordinate_derivative(covector, point, h)  # d_xi[mu, nu] = d_mu xi_nu
    gamma = christoffel_numeric(point, h)
    cov = d_xi - np.einsum("lmn,l->mn", gamma, covector(point))
    e = tetrad_at(point).forward
    return float(np.max(np.abs(e @ (cov + cov.T) @ e.T)))
