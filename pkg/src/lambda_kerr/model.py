"""Model parameters and initial field preparation.

Units: hbar = c = 1, all energies are angular frequencies. Atomic level 1 is
the upper level of the Lambda scheme; levels 2 and 3 are the lower pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson


def detunings(omega1, omega2, omega3, Omega):
    """Return the detunings ``(delta2, delta3)`` of the two allowed transitions."""
    return omega2 - omega1 + Omega, omega3 - omega1 + Omega


@dataclass(frozen=True)
class ModelParams:
    """Level energies, field frequency, couplings and Kerr strength.

    ``delta2`` and ``delta3`` are derived on construction and cannot be set.
    """

    omega1: float
    omega2: float
    omega3: float
    Omega: float
    lambda1: float
    lambda2: float
    chi: float = 0.0
    delta2: float = field(init=False)
    delta3: float = field(init=False)

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError(
                f"couplings must be positive, got lambda1={self.lambda1}, "
                f"lambda2={self.lambda2}"
            )
        d2, d3 = detunings(self.omega1, self.omega2, self.omega3, self.Omega)
        object.__setattr__(self, "delta2", d2)
        object.__setattr__(self, "delta3", d3)

    @classmethod
    def from_detunings(
        cls,
        delta2=0.0,
        delta3=0.0,
        chi=0.0,
        lambda1=1.0,
        lambda2=None,
        Omega=1.0,
        omega1=0.0,
    ):
        """Build parameters from detunings, placing level 1 at ``omega1``.

        ``lambda2`` defaults to ``lambda1``. The absolute energies only enter
        lab-frame phases; every observable in this package depends on the
        detunings alone.
        """
        if lambda2 is None:
            lambda2 = lambda1
        return cls(
            omega1=omega1,
            omega2=delta2 + omega1 - Omega,
            omega3=delta3 + omega1 - Omega,
            Omega=Omega,
            lambda1=lambda1,
            lambda2=lambda2,
            chi=chi,
        )

    def with_chi(self, chi):
        return ModelParams(
            self.omega1, self.omega2, self.omega3, self.Omega,
            self.lambda1, self.lambda2, chi,
        )


_KINDS = ("constant", "inverse-sqrt", "custom")


@dataclass(frozen=True)
class NonlinearityFn:
    """Intensity-dependent coupling function f(n).

    ``kind`` is ``"constant"`` (f = 1), ``"inverse-sqrt"`` (f = 1/sqrt(n)) or
    ``"custom"``. A custom function is given by a table of spectrum values
    ``e_n = n f(n)**2`` indexed from n = 0; ``table[0]`` is never used.
    """

    kind: str = "constant"
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "custom":
            if self.table is None or len(self.table) < 2:
                raise ValueError("custom nonlinearity needs a table with at least e_0 and e_1")
            table = tuple(float(e) for e in self.table)
            if any(e < 0 or not math.isfinite(e) for e in table[1:]):
                raise ValueError("custom table entries e_n must be finite and >= 0")
            object.__setattr__(self, "table", table)
        elif self.table is not None:
            raise ValueError(f"{self.kind} nonlinearity takes no table")

    @classmethod
    def constant(cls):
        return cls("constant")

    @classmethod
    def inverse_sqrt(cls):
        return cls("inverse-sqrt")

    @classmethod
    def from_energies(cls, table: Sequence[float]):
        return cls("custom", tuple(table))

    @classmethod
    def from_file(cls, path):
        """Load an ``e_n`` table from a JSON list or a whitespace separated text file."""
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".json":
            values = json.loads(text)
        else:
            values = np.loadtxt(path, ndmin=1).tolist()
        return cls.from_energies(values)

    def __call__(self, n):
        return nonlinearity_eval(self, n)

    def label(self):
        if self.kind == "custom":
            return f"custom[{len(self.table)}]"
        return self.kind


def nonlinearity_eval(f: NonlinearityFn, n):
    """Evaluate f(n) for an integer or an integer array with every n >= 1.

    f(0) is a domain error for the inverse-sqrt and custom kinds because no
    formula in the model consumes it.
    """
    n_arr = np.asarray(n)
    if not np.issubdtype(n_arr.dtype, np.integer):
        if not np.all(n_arr == np.round(n_arr)):
            raise ValueError(f"photon number must be an integer, got {n}")
        n_arr = n_arr.astype(np.int64)
    if np.any(n_arr < 0):
        raise ValueError(f"photon number must be non-negative, got {n}")
    if f.kind == "constant":
        out = np.ones(n_arr.shape)
    else:
        if np.any(n_arr == 0):
            raise ValueError(f"f(0) is undefined for the {f.kind} nonlinearity")
        if f.kind == "inverse-sqrt":
            out = 1.0 / np.sqrt(n_arr)
        else:
            if np.max(n_arr) >= len(f.table):
                raise ValueError(
                    f"custom table holds e_n up to n={len(f.table) - 1}, "
                    f"f({int(np.max(n_arr))}) requested"
                )
            e = np.asarray(f.table)[n_arr]
            out = np.sqrt(e / n_arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock-space cut-off rule: Poisson tail budget plus a safety margin of levels.

    The margin keeps ladder moments up to a^6 clear of the cut-off.
    """

    epsilon: float = 1e-12
    margin: int = 8

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.margin < 6:
            raise ValueError(f"margin must be >= 6, got {self.margin}")


def choose_truncation(mean_photons, policy: TruncationPolicy = TruncationPolicy()):
    """Smallest N whose Poisson tail P(n > N) is below ``epsilon``, plus the margin."""
    if mean_photons < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mean_photons}")
    if mean_photons == 0:
        return policy.margin
    n = int(poisson.ppf(1.0 - policy.epsilon, mean_photons))
    # ppf works on the cdf and loses the tail below ~1e-16; walk with sf instead
    n = max(n - 5, 0)
    while poisson.sf(n, mean_photons) >= policy.epsilon:
        n += 1
    while n > 0 and poisson.sf(n - 1, mean_photons) < policy.epsilon:
        n -= 1
    return n + policy.margin


@dataclass(frozen=True)
class FieldState:
    """Initial photon-number amplitudes q_n for n = 0 .. n_max."""

    amplitudes: np.ndarray

    def __post_init__(self):
        q = np.array(self.amplitudes, dtype=complex).ravel()
        if q.size < 1:
            raise ValueError("field needs at least one amplitude")
        norm = float(np.sum(np.abs(q) ** 2))
        if norm > 1 + 1e-12:
            raise ValueError(f"field amplitudes have norm {norm} > 1")
        q.flags.writeable = False
        object.__setattr__(self, "amplitudes", q)

    @property
    def n_max(self):
        return self.amplitudes.size - 1

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self):
        return float(np.sum(self.probabilities))


def coherent_field(alpha, policy: TruncationPolicy = TruncationPolicy()):
    """Coherent state amplitudes, evaluated through log-factorials.

    >>> coherent_field(0).amplitudes[:2]
    array([1.+0.j, 0.+0.j])
    """
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    n_max = choose_truncation(mean, policy)
    n = np.arange(n_max + 1)
    if alpha == 0:
        q = np.zeros(n_max + 1, dtype=complex)
        q[0] = 1.0
        return FieldState(q)
    log_mod = -0.5 * mean + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    q = np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))
    return FieldState(q)
