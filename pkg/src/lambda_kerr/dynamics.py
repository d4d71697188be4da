"""Closed-form evolution of the atom-field state, one photon sector at a time.

With the atom starting in the upper level |1>, the initial component |1, n>
only ever mixes with |2, n+1> and |3, n+1>. Inside that sector the amplitudes
are sums of three exponentials exp(i mu_j t) whose frequencies solve a real
cubic. The state is assembled as

    |psi(t)> = sum_n q_n [ A e^{-i g1 t} |1,n> + B e^{-i g2 t} |2,n+1>
                          + C e^{-i g3 t} |3,n+1> ]

with g1 = w1 + n W, g2 = w2 + (n+1) W, g3 = w3 + (n+1) W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateRootsError, NumericalBranchError
from .model import FieldState, ModelParams, NonlinearityFn

TOL_DEGENERATE = 1e-9
TOL_RESIDUAL = 1e-10
# relative chi nudge used to step off a measure-zero root collision
CHI_NUDGE = 1e-9


class SectorCouplings(NamedTuple):
    n: int
    f1: float
    f2: float
    V1: float
    V2: float


class CubicSolution(NamedTuple):
    x1: float
    x2: float
    x3: float
    mu: tuple
    theta: float
    degenerate: bool
    nu: Optional[tuple] = None  # mu + V2, when solved in the shifted variable


class InitialWeights(NamedTuple):
    b: np.ndarray


class AmplitudeTriple(NamedTuple):
    A: complex
    B: complex
    C: complex


def sector_couplings(n, params: ModelParams, f: NonlinearityFn):
    """Effective Rabi couplings and Kerr shifts of photon sector ``n``."""
    if n < 0:
        raise ValueError(f"sector index must be >= 0, got {n}")
    root = math.sqrt(n + 1) * f(n + 1)
    return SectorCouplings(
        n=n,
        f1=params.lambda1 * root,
        f2=params.lambda2 * root,
        V1=params.chi * n * (n - 1),
        V2=params.chi * n * (n + 1),
    )


def cubic_coefficients(sc: SectorCouplings, delta2, delta3):
    """Coefficients of mu^3 + x1 mu^2 + x2 mu + x3 = 0 for one sector.

    Obtained by eliminating A and C from the sector equations with
    B = exp(i mu t); equivalently the characteristic equation
    [(mu + V2)(mu + V1 - d2) - f2^2](mu + V2 + d3 - d2) = f1^2 (mu + V2).
    """
    f1, f2, V1, V2 = sc.f1, sc.f2, sc.V1, sc.V2
    g = f1 * f1 + f2 * f2
    d2, d3 = delta2, delta3
    x1 = 2 * V2 + V1 + d3 - 2 * d2
    x2 = d2 * (d2 - d3 - 3 * V2 - V1) + V2 * (2 * V1 + V2 + d3) + V1 * d3 - g
    x3 = ((V2 + d3 - d2) * (V1 - d2) - g) * V2 - f2 * f2 * (d3 - d2)
    return x1, x2, x3


def shifted_cubic_coefficients(sc: SectorCouplings, delta2, delta3):
    """The same cubic in nu = mu + V2.

    Near-degenerate Kerr shifts put all three mu close to -V2 ~ chi n^2; in nu
    the coefficients stay O(chi n) and the roots keep full relative accuracy.
    """
    a = sc.V1 - sc.V2 - delta2
    c = delta3 - delta2
    return a + c, a * c - sc.f1 ** 2 - sc.f2 ** 2, -sc.f2 ** 2 * c


def solve_sector_cubic(sc: SectorCouplings, delta2, delta3, tol_deg=TOL_DEGENERATE):
    """Sector roots mu_j (descending), solved through the shifted cubic."""
    x = cubic_coefficients(sc, delta2, delta3)
    shifted = solve_cubic(*shifted_cubic_coefficients(sc, delta2, delta3), tol_deg=tol_deg)
    mu = tuple(v - sc.V2 for v in shifted.mu)
    return CubicSolution(*x, mu, shifted.theta, shifted.degenerate, shifted.mu)


def _cubic(mu, x1, x2, x3):
    return ((mu + x1) * mu + x2) * mu + x3


def _residual_scale(x1, x2, x3):
    return max(1.0, abs(x1) ** 3, abs(x2) ** 1.5, abs(x3))


def _polish(mu, x1, x2, x3, steps=2):
    """Newton refinement of a simple root; rejected if it does not help."""
    for _ in range(steps):
        p = _cubic(mu, x1, x2, x3)
        dp = (3 * mu + 2 * x1) * mu + x2
        if p == 0 or dp == 0:
            break
        trial = mu - p / dp
        if abs(_cubic(trial, x1, x2, x3)) < abs(p):
            mu = trial
        else:
            break
    return mu


def solve_cubic(x1, x2, x3, tol_deg=TOL_DEGENERATE):
    """Three real roots of a monic cubic by the trigonometric Cardano formula.

    Roots are returned in descending order. The arccos argument is clamped to
    [-1, 1]; simple roots get a Newton polish afterwards.
    """
    if not all(math.isfinite(x) for x in (x1, x2, x3)):
        raise ValueError(f"cubic coefficients must be finite, got {(x1, x2, x3)}")
    scale = _residual_scale(x1, x2, x3)
    p = x1 * x1 - 3 * x2
    if p <= 0:
        # only a triple root is compatible with all-real roots here
        mu0 = -x1 / 3
        if abs(_cubic(mu0, x1, x2, x3)) > TOL_RESIDUAL * scale:
            raise NumericalBranchError(
                f"x1^2 - 3 x2 = {p:g} <= 0 but -x1/3 is not a root of {(x1, x2, x3)}"
            )
        return CubicSolution(x1, x2, x3, (mu0, mu0, mu0), 0.0, True)
    sp = math.sqrt(p)
    arg = (9 * x1 * x2 - 2 * x1 ** 3 - 27 * x3) / (2 * p * sp)
    theta = math.acos(min(1.0, max(-1.0, arg))) / 3
    mu = [
        -x1 / 3 + 2.0 / 3.0 * sp * math.cos(theta + 2 * math.pi * j / 3)
        for j in range(3)
    ]
    mu.sort(reverse=True)
    root_scale = max(abs(m) for m in mu)
    gap = min(mu[0] - mu[1], mu[1] - mu[2])
    degenerate = gap < tol_deg * max(root_scale, 1e-300)
    if not degenerate:
        mu = sorted((_polish(m, x1, x2, x3) for m in mu), reverse=True)
    return CubicSolution(x1, x2, x3, tuple(mu), theta, degenerate)


def initial_weights_excited(cs: CubicSolution, sc: SectorCouplings, delta2):
    """Weights b_j fixing A(0) = 1 and B(0) = C(0) = 0.

    b_j = (mu_k + mu_l + V1 + V2 - delta2) / ((mu_j - mu_k)(mu_j - mu_l)),
    the Lagrange solution of sum b = 0, sum mu b = -1,
    sum mu^2 b = V1 + V2 - delta2.
    """
    # in nu = mu + V2 the numerator is nu_k + nu_l + V1 - V2 - delta2
    mu = cs.nu if cs.nu is not None else tuple(m + sc.V2 for m in cs.mu)
    const = sc.V1 - sc.V2 - delta2
    b = np.empty(3)
    for j in range(3):
        k, l = (j + 1) % 3, (j + 2) % 3
        djk, djl = mu[j] - mu[k], mu[j] - mu[l]
        scale = max(1.0, max(abs(m) for m in mu))
        if cs.degenerate or abs(djk) < TOL_DEGENERATE * scale or abs(djl) < TOL_DEGENERATE * scale:
            pair = (j, k) if abs(djk) <= abs(djl) else (j, l)
            raise DegenerateRootsError(
                f"roots mu_{pair[0] + 1} and mu_{pair[1] + 1} coincide "
                f"({mu[pair[0]]!r}, {mu[pair[1]]!r})",
                pair=pair,
                n=sc.n,
            )
        b[j] = (mu[k] + mu[l] + const) / (djk * djl)
    return InitialWeights(b)


@dataclass(frozen=True)
class SectorSolution:
    """Time-independent data of every sector n = 0 .. n_max, stacked along axis 0."""

    n: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    mu: np.ndarray  # (N, 3)
    b: np.ndarray  # (N, 3)
    delta2: float
    delta3: float
    nu: Optional[np.ndarray] = None  # mu + V2, exact when solved shifted

    def amplitudes(self, t):
        """Arrays A, B, C of shape ``t.shape + (N,)``."""
        t = np.asarray(t, dtype=float)[..., None]
        V1, V2 = self.V1[:, None], self.V2[:, None]
        nu = self.nu if self.nu is not None else self.mu + V2
        # exp(i mu t) = exp(-i V2 t) exp(i nu t); the first factor is common
        e = np.exp(1j * nu * t[..., None])  # (..., N, 3)
        common = np.exp(-1j * self.V2 * t)
        wa = nu * self.b
        wb = self.f2[:, None] * self.b
        wc = (nu * (nu + V1 - V2 - self.delta2) - self.f2[:, None] ** 2) * self.b
        wc = wc / self.f1[:, None]
        A = -common * np.exp(-1j * self.delta2 * t) * np.sum(wa * e, axis=-1)
        B = common * np.sum(wb * e, axis=-1)
        C = common * np.exp(1j * (self.delta3 - self.delta2) * t) * np.sum(wc * e, axis=-1)
        return A, B, C


def _solve_sector(n, params, f):
    sc = sector_couplings(n, params, f)
    cs = solve_sector_cubic(sc, params.delta2, params.delta3)
    return sc, cs, initial_weights_excited(cs, sc, params.delta2)


def solve_sector(n, params: ModelParams, f: NonlinearityFn):
    """Solve sector ``n``; returns the tuple ``(couplings, cubic, weights)``.

    A root collision is resolved once by nudging chi by one part in 1e9
    (relative to lambda1 when chi is zero); a second collision is raised.
    """
    try:
        return _solve_sector(n, params, f)
    except DegenerateRootsError:
        nudge = CHI_NUDGE * (abs(params.chi) if params.chi else params.lambda1)
        try:
            return _solve_sector(n, params.with_chi(params.chi + nudge), f)
        except DegenerateRootsError as err:
            raise DegenerateRootsError(
                f"sector n={n}: {err} (chi={params.chi}, delta2={params.delta2}, "
                f"delta3={params.delta3}, f={f.label()})",
                pair=err.pair,
                n=n,
            ) from err


def solve_sectors(n_max, params: ModelParams, f: NonlinearityFn):
    rows = [solve_sector(n, params, f) for n in range(n_max + 1)]
    return SectorSolution(
        n=np.arange(n_max + 1),
        f1=np.array([sc.f1 for sc, _, _ in rows]),
        f2=np.array([sc.f2 for sc, _, _ in rows]),
        V1=np.array([sc.V1 for sc, _, _ in rows]),
        V2=np.array([sc.V2 for sc, _, _ in rows]),
        mu=np.array([cs.mu for _, cs, _ in rows]),
        b=np.array([w.b for _, _, w in rows]),
        delta2=params.delta2,
        delta3=params.delta3,
        nu=np.array([cs.nu for _, cs, _ in rows]),
    )


def amplitudes_at(n, t, params: ModelParams, f: NonlinearityFn):
    """A(n, t), B(n+1, t), C(n+1, t) for the atom starting in level 1."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    sc, cs, w = solve_sector(n, params, f)
    sol = SectorSolution(
        np.array([n]), np.array([sc.f1]), np.array([sc.f2]),
        np.array([sc.V1]), np.array([sc.V2]),
        np.array([cs.mu]), np.array([w.b]), params.delta2, params.delta3,
        np.array([cs.nu]),
    )
    A, B, C = sol.amplitudes(t)
    return AmplitudeTriple(complex(A[0]), complex(B[0]), complex(C[0]))


@dataclass(frozen=True)
class JointState:
    """Atom-field state at time ``t`` (scalar or 1-D array of times).

    ``A``, ``B``, ``C`` have shape ``np.shape(t) + (n_max + 1,)``; index n
    holds A(n, t), B(n+1, t), C(n+1, t). The free phases exp(-i gamma t) are
    kept apart in ``gammas`` (shape (n_max + 1, 3)).
    """

    t: object
    params: ModelParams
    field: FieldState
    nonlinearity: NonlinearityFn
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    gammas: np.ndarray

    @property
    def n_max(self):
        return self.field.n_max

    @property
    def q(self):
        return self.field.amplitudes

    @property
    def P(self):
        return self.field.probabilities

    def __len__(self):
        return 0 if np.ndim(self.t) == 0 else len(self.t)

    def __getitem__(self, i):
        """Slice a time-batched state."""
        if np.ndim(self.t) == 0:
            raise TypeError("scalar-time JointState cannot be indexed")
        return JointState(
            np.asarray(self.t)[i], self.params, self.field, self.nonlinearity,
            self.A[i], self.B[i], self.C[i], self.gammas,
        )

    def triple(self, n):
        return AmplitudeTriple(self.A[..., n], self.B[..., n], self.C[..., n])

    def phases(self):
        """exp(-i gamma_j t), shape ``t.shape + (n_max + 1, 3)``."""
        t = np.asarray(self.t, dtype=float)[..., None, None]
        return np.exp(-1j * self.gammas * t)

    def sector_norms(self):
        return np.abs(self.A) ** 2 + np.abs(self.B) ** 2 + np.abs(self.C) ** 2

    def norm(self):
        return np.sum(self.P * self.sector_norms(), axis=-1)

    def excitation_number(self):
        """Expectation of a^dagger a + sigma_11, a constant of motion."""
        n = np.arange(self.n_max + 1)
        return np.sum(self.P * (n + 1) * self.sector_norms(), axis=-1)

    def coefficients(self, lab_frame=True):
        """Amplitudes on |level, m> as an array ``t.shape + (3, n_max + 2)``.

        With ``lab_frame=False`` the free field rotation exp(-i m Omega t) is
        removed, which is the frame used by :func:`ladder_moment`.
        """
        ph = self.phases()
        if not lab_frame:
            n = np.arange(self.n_max + 1)
            t = np.asarray(self.t, dtype=float)[..., None]
            ph = ph * np.exp(1j * self.params.Omega * t * np.stack([n, n + 1, n + 1], -1))
        shape = np.shape(self.t) + (3, self.n_max + 2)
        psi = np.zeros(shape, dtype=complex)
        q = self.q
        psi[..., 0, :-1] = q * self.A * ph[..., 0]
        psi[..., 1, 1:] = q * self.B * ph[..., 1]
        psi[..., 2, 1:] = q * self.C * ph[..., 2]
        return psi


def free_phases(n_max, params: ModelParams):
    n = np.arange(n_max + 1)
    return np.stack(
        [
            params.omega1 + n * params.Omega,
            params.omega2 + (n + 1) * params.Omega,
            params.omega3 + (n + 1) * params.Omega,
        ],
        axis=-1,
    )


def evolve_state(field: FieldState, params: ModelParams, f: NonlinearityFn, t, sectors=None):
    """Joint state at time(s) ``t`` for the atom initially in level 1.

    ``t`` may be a scalar or a 1-D array; pass a precomputed ``sectors``
    (from :func:`solve_sectors`) to reuse root solutions across calls.
    """
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim > 1:
        raise ValueError("t must be a scalar or a 1-D array")
    if np.any(t_arr < 0):
        raise ValueError("times must be >= 0")
    if sectors is None:
        sectors = solve_sectors(field.n_max, params, f)
    A, B, C = sectors.amplitudes(t_arr)
    t_out = float(t_arr) if t_arr.ndim == 0 else t_arr
    return JointState(t_out, params, field, f, A, B, C, free_phases(field.n_max, params))
