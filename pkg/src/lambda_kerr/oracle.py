"""Brute-force reference: full Hamiltonian on the truncated joint space,
integrated numerically.

Basis layout: flat index ``3 * n + (level - 1)`` for atomic level 1..3 and
photon number n = 0 .. n_max, i.e. ``kron(field, atom)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .dynamics import JointState
from .errors import NormDriftError
from .model import FieldState, ModelParams, NonlinearityFn


def basis_index(level, n):
    if level not in (1, 2, 3) or n < 0:
        raise ValueError(f"invalid basis label (level={level}, n={n})")
    return 3 * n + level - 1


def basis_label(index):
    n, level = divmod(index, 3)
    return level + 1, n


def _atom_op(i, j):
    op = np.zeros((3, 3))
    op[i - 1, j - 1] = 1.0
    return op


def field_operators(n_max, f: NonlinearityFn):
    """Number operator and deformed annihilation operator R = a f(n) on 0..n_max."""
    n = np.arange(n_max + 1)
    number = np.diag(n.astype(float))
    R = np.zeros((n_max + 1, n_max + 1))
    if n_max >= 1:
        m = n[1:]
        R[m - 1, m] = np.sqrt(m) * f(m)
    return number, R


def annihilation(n_max):
    m = np.arange(1, n_max + 1)
    a = np.zeros((n_max + 1, n_max + 1))
    a[m - 1, m] = np.sqrt(m)
    return a


def build_hamiltonian(params: ModelParams, f: NonlinearityFn, n_max):
    """Dense Hamiltonian of dimension 3 (n_max + 1).

    H = sum_j w_j s_jj + W a^dag a + chi a^dag^2 a^2
        + l1 (R s_13 + s_31 R^dag) + l2 (R s_12 + s_21 R^dag).
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    number, R = field_operators(n_max, f)
    eye_f = np.eye(n_max + 1)
    H = np.zeros((3 * (n_max + 1),) * 2, dtype=complex)
    for level, w in zip((1, 2, 3), (params.omega1, params.omega2, params.omega3)):
        H += w * np.kron(eye_f, _atom_op(level, level))
    H += params.Omega * np.kron(number, np.eye(3))
    H += params.chi * np.kron(number @ (number - eye_f), np.eye(3))
    H += params.lambda1 * (np.kron(R, _atom_op(1, 3)) + np.kron(R.T, _atom_op(3, 1)))
    H += params.lambda2 * (np.kron(R, _atom_op(1, 2)) + np.kron(R.T, _atom_op(2, 1)))
    return 0.5 * (H + H.conj().T)


def excitation_operator(n_max):
    """a^dag a + sigma_11."""
    number, _ = field_operators(n_max, _UNIT)
    return np.kron(number, np.eye(3)) + np.kron(np.eye(n_max + 1), _atom_op(1, 1))


_UNIT = NonlinearityFn.constant()


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``dt=None`` picks the largest step with ||H|| dt <= ``safety``. ``method``
    is ``"rk4"`` or ``"expm"`` (exact propagator for one step, reused).
    """

    dt: Optional[float] = None
    method: str = "rk4"
    renormalize: bool = False
    safety: float = 0.05
    max_norm_drift: float = 1e-6

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.method not in ("rk4", "expm"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class IntegrationResult:
    psi: np.ndarray
    norm_drift: float
    steps: int
    dt: float


def integrate(H, psi0, t, config: IntegratorConfig = IntegratorConfig()):
    """Solve i dpsi/dt = H psi from 0 to ``t`` with a fixed step."""
    H = np.asarray(H)
    psi = np.array(psi0, dtype=complex)
    norm0 = np.linalg.norm(psi)
    if abs(norm0 - 1) > 1e-10:
        raise ValueError(f"initial state must be normalised, norm={norm0}")
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if t == 0:
        return IntegrationResult(psi, 0.0, 0, 0.0)
    dt = config.dt
    if dt is None:
        dt = config.safety / max(np.linalg.norm(H, 2), 1e-300)
    steps = max(1, math.ceil(t / dt - 1e-12))
    h = t / steps
    if config.method == "expm":
        U = expm(-1j * h * H)
        for _ in range(steps):
            psi = U @ psi
            if config.renormalize:
                psi /= np.linalg.norm(psi)
    else:
        K = -1j * H
        for _ in range(steps):
            k1 = K @ psi
            k2 = K @ (psi + 0.5 * h * k1)
            k3 = K @ (psi + 0.5 * h * k2)
            k4 = K @ (psi + h * k3)
            psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if config.renormalize:
                psi /= np.linalg.norm(psi)
    drift = abs(np.linalg.norm(psi) - 1)
    if drift > config.max_norm_drift:
        raise NormDriftError(
            f"norm drift {drift:.3g} exceeds {config.max_norm_drift:g} after {steps} steps "
            f"of dt={h:.3g}; use a smaller dt"
        )
    return IntegrationResult(psi, float(drift), steps, h)


def initial_vector(field: FieldState):
    """|1> (x) field in the flat basis with photon numbers 0 .. field.n_max + 1."""
    psi = np.zeros(3 * (field.n_max + 2), dtype=complex)
    psi[0:3 * (field.n_max + 1):3] = field.amplitudes
    return psi


def evolve_numeric(field: FieldState, params: ModelParams, f: NonlinearityFn, times,
                   config: IntegratorConfig = IntegratorConfig()):
    """Numerical states at increasing ``times``, one integration leg per gap.

    The basis holds photon numbers up to ``field.n_max + 1`` so every sector
    reached from the initial field fits without truncation.
    """
    n_basis = field.n_max + 1
    H = build_hamiltonian(params, f, n_basis)
    psi = initial_vector(field)
    psi = psi / np.linalg.norm(psi)
    out, now = [], 0.0
    for t in times:
        if t < now:
            raise ValueError("times must be non-decreasing")
        psi = integrate(H, psi, t - now, config).psi
        now = t
        out.append(psi)
    return out


def embed_state(state: JointState, normalize=False):
    """Flatten an analytic single-time state into the oracle basis."""
    if np.ndim(state.t) != 0:
        raise ValueError("embed_state needs a single-time state")
    psi = state.coefficients(lab_frame=True).T.reshape(-1)
    if normalize:
        psi = psi / np.linalg.norm(psi)
    return psi


def fidelity_gap(analytic: JointState, numeric):
    """1 - |<psi_num|psi_ana>|, both taken in the lab frame.

    The analytic state is renormalised by its (truncated) field norm so the
    gap measures dynamics only.
    """
    numeric = np.asarray(numeric)
    psi = embed_state(analytic, normalize=True)
    if numeric.shape != psi.shape:
        raise ValueError(
            f"dimension mismatch: numeric state has shape {numeric.shape}, "
            f"analytic embedding {psi.shape}"
        )
    return max(0.0, float(1 - abs(np.vdot(numeric, psi)) / np.linalg.norm(numeric)))


def reduced_atom(psi):
    """Atomic density from a flat state vector."""
    c = np.asarray(psi).reshape(-1, 3)
    return c.T @ c.conj()


def reduced_field(psi):
    """Field density from a flat state vector."""
    c = np.asarray(psi).reshape(-1, 3)
    return c @ c.conj().T


def expectation(op, psi):
    return np.vdot(psi, op @ psi)


def field_operator(op):
    """Lift a field operator to the joint space."""
    return np.kron(op, np.eye(3))
