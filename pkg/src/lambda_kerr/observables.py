"""Observables of the joint state: atomic entropy, photon statistics,
higher-order squeezing and the Husimi distribution.

Every function accepts a :class:`~lambda_kerr.dynamics.JointState` evaluated at
a single time or at an array of times; results carry the leading time axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import entr, gammaln
from scipy.stats import poisson

from .dynamics import JointState
from .errors import NumericalConsistencyError, UndefinedStatisticsError

EIG_GUARD = 1e-8


def reduce_to_atom(state: JointState):
    """Exact partial trace over the field; returns rho with shape ``(..., 3, 3)``.

    Lab-frame phases are kept, so off-diagonal elements rotate at the atomic
    transition frequencies.
    """
    psi = state.coefficients(lab_frame=True)
    return np.einsum("...im,...jm->...ij", psi, psi.conj())


class EigenTriple(NamedTuple):
    xi: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray
    beta: np.ndarray


def _char_coeffs(rho):
    r = rho
    alpha1 = -(r[..., 0, 0] + r[..., 1, 1] + r[..., 2, 2]).real
    alpha2 = (
        r[..., 0, 0] * r[..., 1, 1] + r[..., 1, 1] * r[..., 2, 2] + r[..., 2, 2] * r[..., 0, 0]
        - r[..., 0, 1] * r[..., 1, 0] - r[..., 1, 2] * r[..., 2, 1] - r[..., 2, 0] * r[..., 0, 2]
    ).real
    alpha3 = (
        -r[..., 0, 0] * r[..., 1, 1] * r[..., 2, 2]
        - r[..., 0, 1] * r[..., 1, 2] * r[..., 2, 0]
        - r[..., 0, 2] * r[..., 2, 1] * r[..., 1, 0]
        + r[..., 0, 0] * r[..., 1, 2] * r[..., 2, 1]
        + r[..., 1, 1] * r[..., 2, 0] * r[..., 0, 2]
        + r[..., 2, 2] * r[..., 0, 1] * r[..., 1, 0]
    ).real
    return alpha1, alpha2, alpha3


def eigenvalues_cardano(rho):
    """Eigenvalues of a 3x3 density matrix from its characteristic cubic.

    The trigonometric formula gives first estimates. The root farthest from
    the other two is Newton-polished and the remaining pair is recovered from
    the deflated quadratic, which keeps a near-double root (rank-1 densities)
    at roundoff level instead of sqrt(roundoff). Values are clamped to
    [0, 1]; a clamp larger than 1e-8 raises NumericalConsistencyError.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3) density, got shape {rho.shape}")
    a1, a2, a3 = _char_coeffs(rho)
    p = a1 * a1 - 3 * a2
    # a triple root leaves only roundoff in p
    triple = p <= 64 * np.finfo(float).eps * a1 * a1
    p = np.where(triple, 0.0, p)
    sp = np.sqrt(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (9 * a1 * a2 - 2 * a1 ** 3 - 27 * a3) / (2 * p * sp)
    arg = np.where(p > 0, arg, 1.0)
    beta = np.arccos(np.clip(arg, -1.0, 1.0)) / 3
    j = np.arange(3)
    xi = -a1[..., None] / 3 + (2.0 / 3.0) * sp[..., None] * np.cos(
        beta[..., None] + 2 * np.pi * j / 3
    )
    xi = -np.sort(-xi, axis=-1)

    # polish the isolated root, deflate for the other two
    upper_isolated = (xi[..., 0] - xi[..., 1]) >= (xi[..., 1] - xi[..., 2])
    r = np.where(upper_isolated, xi[..., 0], xi[..., 2])
    for _ in range(2):
        val = ((r + a1) * r + a2) * r + a3
        der = (3 * r + 2 * a1) * r + a2
        ok = np.abs(der) > 1e-12
        step = np.where(ok, val / np.where(ok, der, 1.0), 0.0)
        r = r - step
    s = -a1 - r
    prod = a2 - r * s
    tiny = 64 * np.finfo(float).eps * np.maximum(a1 * a1, 1e-300)
    prod = np.where(np.abs(prod) < tiny, 0.0, prod)
    disc = np.sqrt(np.maximum(s * s - 4 * prod, 0.0))
    big = 0.5 * (s + np.copysign(disc, s))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, prod / big, 0.0)
    pair_hi = np.maximum(big, small)
    pair_lo = np.minimum(big, small)
    xi = np.where(
        upper_isolated[..., None],
        np.stack([r, pair_hi, pair_lo], axis=-1),
        np.stack([pair_hi, pair_lo, r], axis=-1),
    )
    xi = np.where(triple[..., None], -a1[..., None] / 3, xi)
    xi = -np.sort(-xi, axis=-1)

    low, high = np.min(xi), np.max(xi)
    if low < -EIG_GUARD or high > 1 + EIG_GUARD:
        raise NumericalConsistencyError(
            f"density eigenvalues outside [0, 1] beyond tolerance: min={low:g}, max={high:g}"
        )
    xi = np.clip(xi, 0.0, 1.0)
    return EigenTriple(xi, a1, a2, a3, beta)


def field_entropy(xi):
    """Von Neumann entropy -sum xi ln xi (nats) with 0 ln 0 = 0.

    Accepts an :class:`EigenTriple` or a raw eigenvalue array.
    """
    if isinstance(xi, EigenTriple):
        xi = xi.xi
    return np.sum(entr(np.asarray(xi, dtype=float)), axis=-1)


def entropy(state: JointState):
    """Field (equivalently atomic) entropy of a pure joint state."""
    return field_entropy(eigenvalues_cardano(reduce_to_atom(state)))


def photon_moments(state: JointState, k):
    """<n^k> for k in {1, 2, 3}."""
    if k not in (1, 2, 3):
        raise ValueError(f"moment order must be 1, 2 or 3, got {k}")
    n = np.arange(state.n_max + 1, dtype=float)
    lower = np.abs(state.B) ** 2 + np.abs(state.C) ** 2
    return np.sum(state.P * (n ** k * np.abs(state.A) ** 2 + (n + 1) ** k * lower), axis=-1)


def photon_distribution(state: JointState):
    """Photon-number probabilities p_m for m = 0 .. n_max + 1."""
    P = state.P
    shape = np.shape(state.t) + (state.n_max + 2,)
    p = np.zeros(shape)
    p[..., :-1] += P * np.abs(state.A) ** 2
    p[..., 1:] += P * (np.abs(state.B) ** 2 + np.abs(state.C) ** 2)
    return p


def _sqrt_falling(n, r):
    """sqrt((n + r)! / n!) elementwise."""
    return np.exp(0.5 * (gammaln(n + r + 1) - gammaln(n + 1)))


def ladder_moment(state: JointState, r, lab_frame=False):
    """<a^r> for r = 1 .. 6.

    By default the free rotation exp(-i r Omega t) is left out (field rotating
    frame); ``lab_frame=True`` restores it. <a^dagger^r> is the conjugate.
    """
    if not (isinstance(r, (int, np.integer)) and 1 <= r <= 6):
        raise ValueError(f"ladder moment order must be an integer in 1..6, got {r}")
    N = state.n_max + 1
    if r >= N:
        return np.zeros(np.shape(state.t), dtype=complex)
    q = state.q
    n = np.arange(N - r, dtype=float)
    lo, hi = slice(0, N - r), slice(r, N)
    w = np.conj(q[lo]) * q[hi]
    upper = _sqrt_falling(n, r) * np.conj(state.A[..., lo]) * state.A[..., hi]
    lower = _sqrt_falling(n + 1, r) * (
        np.conj(state.B[..., lo]) * state.B[..., hi] + np.conj(state.C[..., lo]) * state.C[..., hi]
    )
    out = np.sum(w * (upper + lower), axis=-1)
    if lab_frame:
        out = out * np.exp(-1j * r * state.params.Omega * np.asarray(state.t, dtype=float))
    return out


def mandel_q(state: JointState):
    """Mandel parameter (<n^2> - <n>^2 - <n>) / <n>.

    The variance is taken about the mean from the photon distribution, which
    keeps near-Poissonian values resolvable below 1e-13.
    """
    p = photon_distribution(state)
    m = np.arange(p.shape[-1], dtype=float)
    mean = np.sum(p * m, axis=-1)
    if np.any(mean <= 0):
        raise UndefinedStatisticsError("Mandel Q is undefined for <n> = 0")
    var = np.sum(p * (m - mean[..., None]) ** 2, axis=-1)
    return (var - mean) / mean


def squeezing(state: JointState, k, lab_frame=False):
    """Normalised squeezing parameters (S_X, S_Y) of order k in {1, 2, 3}.

    Squeezing in a quadrature shows up as a value in [-1, 0).
    """
    n1 = photon_moments(state, 1)
    if k == 1:
        a1 = ladder_moment(state, 1, lab_frame)
        a2 = ladder_moment(state, 2, lab_frame)
        sx = 2 * n1 + 2 * a2.real - 4 * a1.real ** 2
        sy = 2 * n1 - 2 * a2.real - 4 * a1.imag ** 2
    elif k == 2:
        n2 = photon_moments(state, 2)
        a2 = ladder_moment(state, 2, lab_frame)
        a4 = ladder_moment(state, 4, lab_frame)
        base = 2 * n2 - 2 * n1
        denom = 4 * n1 + 2
        sx = (2 * a4.real + base - 4 * a2.real ** 2) / denom
        sy = (base - 2 * a4.real - 4 * a2.imag ** 2) / denom
    elif k == 3:
        n2 = photon_moments(state, 2)
        n3 = photon_moments(state, 3)
        a3 = ladder_moment(state, 3, lab_frame)
        a6 = ladder_moment(state, 6, lab_frame)
        base = 2 * n3 - 6 * n2 + 4 * n1
        denom = 9 * n2 + 9 * n1 + 6
        sx = (2 * a6.real + base - 4 * a3.real ** 2) / denom
        sy = (base - 2 * a6.real - 4 * a3.imag ** 2) / denom
    else:
        raise ValueError(f"squeezing order must be 1, 2 or 3, got {k}")
    return sx, sy


def _coherent_overlaps(alpha, m_max):
    """<m|alpha> for m = 0 .. m_max, shape ``alpha.shape + (m_max + 1,)``."""
    alpha = np.asarray(alpha, dtype=complex)
    m = np.arange(m_max + 1)
    r = np.abs(alpha)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(r)
        log_mod = -0.5 * r ** 2 + m * log_r - 0.5 * gammaln(m + 1)
    log_mod = np.where((r == 0) & (m == 0), -0.5 * r ** 2, log_mod)
    return np.exp(log_mod) * np.exp(1j * m * np.angle(alpha)[..., None])


def husimi_point(state: JointState, alpha, exact=False, lab_frame=False):
    """Husimi function Q(alpha) of the field (``state`` at a single time).

    The default keeps only the photon-number diagonal of the field density,
    Q = (1/pi) sum_m p_m e^{-|alpha|^2} |alpha|^{2m} / m!, which depends on
    |alpha| alone. ``exact=True`` evaluates (1/pi) sum_level |<level, alpha|psi>|^2
    including field coherences, in the field rotating frame unless
    ``lab_frame`` is set. ``alpha`` may be an array.
    """
    if np.ndim(state.t) != 0:
        raise ValueError("husimi_point needs a single-time state")
    alpha = np.asarray(alpha, dtype=complex)
    if not exact:
        p = photon_distribution(state)
        m = np.arange(p.size)
        weights = poisson.pmf(m, (np.abs(alpha) ** 2)[..., None])
        return np.sum(weights * p, axis=-1) / math.pi
    psi = state.coefficients(lab_frame=lab_frame)  # (3, M)
    overlaps = _coherent_overlaps(alpha, psi.shape[-1] - 1)
    amp = np.einsum("...m,lm->...l", overlaps.conj(), psi)
    return np.sum(np.abs(amp) ** 2, axis=-1) / math.pi


@dataclass(frozen=True)
class HusimiGrid:
    """Q values on a Cartesian grid; ``values[iy, ix]`` sits at (x[ix], y[iy])."""

    x_range: tuple
    y_range: tuple
    resolution: int
    values: np.ndarray

    @property
    def x(self):
        return np.linspace(*self.x_range, self.resolution)

    @property
    def y(self):
        return np.linspace(*self.y_range, self.resolution)

    def total_mass(self):
        """Trapezoidal integral over the grid."""
        return float(np.trapezoid(np.trapezoid(self.values, self.x, axis=1), self.y))

    def value_at(self, x, y):
        ix = int(np.argmin(np.abs(self.x - x)))
        iy = int(np.argmin(np.abs(self.y - y)))
        return float(self.values[iy, ix])


def husimi_grid(state: JointState, x_range=(-7.0, 7.0), y_range=(-7.0, 7.0),
                resolution=201, exact=False, lab_frame=False):
    """Evaluate :func:`husimi_point` on a resolution x resolution grid."""
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    x = np.linspace(*x_range, resolution)
    y = np.linspace(*y_range, resolution)
    alpha = x[None, :] + 1j * y[:, None]
    values = husimi_point(state, alpha, exact=exact, lab_frame=lab_frame)
    return HusimiGrid(tuple(map(float, x_range)), tuple(map(float, y_range)), resolution, values)


class ObservableRecord(NamedTuple):
    tau: float
    entropy: float = math.nan
    mean_n: float = math.nan
    mean_n2: float = math.nan
    mean_n3: float = math.nan
    mandel_q: float = math.nan
    s_x1: float = math.nan
    s_y1: float = math.nan
    s_x2: float = math.nan
    s_y2: float = math.nan
    s_x3: float = math.nan
    s_y3: float = math.nan
