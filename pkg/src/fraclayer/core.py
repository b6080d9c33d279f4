"""Shared domain types: spectral measures, double-well potentials, grids, constants.

Everything here is immutable after construction and safe to share across
parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Probability-measure bookkeeping tolerance.
MASS_TOL = 1e-12

# Fractional orders below this are rejected outright: the singular-integral
# quadrature degrades too fast as s -> 0.
S_SUPPORT_MIN = 0.05

TAILS = ("layer", "periodic", "zero", "constant")


def c_ns(n: int, s: float) -> float:
    """Normalization constant of the fractional Laplacian of order s in R^n.

    c_n(s) = pi^(-n/2) * 2^(2s) * Gamma((n+2s)/2) / Gamma(2-s) * s*(1-s)

    Vanishes linearly at both endpoints s=0 and s=1.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0, 1), got {s}")
    return (
        math.pi ** (-n / 2.0)
        * 2.0 ** (2.0 * s)
        * math.gamma((n + 2.0 * s) / 2.0)
        / math.gamma(2.0 - s)
        * s
        * (1.0 - s)
    )


def phi(n: int, s: float, R: float) -> float:
    """Energy growth benchmark Phi_{n,s}(R).

    R^(n-1) * (R^(1-2s) - 1) / (1-2s) away from s = 1/2 and R^(n-1) * log R
    at s = 1/2; the expm1 form keeps the two branches continuous across
    s = 1/2 to near machine precision.  Decreasing in s for fixed R > 2.
    """
    if R < 2.0:
        raise ValueError(f"growth benchmark requires R >= 2, got R={R}")
    if not 0.0 < s <= 1.0:
        raise ValueError(f"order s must lie in (0, 1], got {s}")
    e = 1.0 - 2.0 * s
    if e == 0.0:
        radial = math.log(R)
    else:
        radial = math.expm1(e * math.log(R)) / e
    return R ** (n - 1) * radial


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite atomic probability measure mixing fractional orders.

    ``atoms`` is a sorted tuple of (s, weight) pairs with s in
    [S_SUPPORT_MIN, 1); mass sitting exactly at s = 1 must be declared
    through ``lap_mass`` and is applied as a classical Laplacian.
    """

    atoms: tuple[tuple[float, float], ...]
    lap_mass: float = 0.0

    def __post_init__(self):
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        object.__setattr__(self, "atoms", tuple(sorted(atoms)))
        if self.lap_mass < 0.0:
            raise ValueError("lap_mass must be nonnegative")
        total = sum(w for _, w in self.atoms) + self.lap_mass
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"measure mass must be 1 within {MASS_TOL}, got {total!r}")
        seen = set()
        for s, w in self.atoms:
            if w <= 0.0:
                raise ValueError(f"atom weights must be positive, got {w} at s={s}")
            if s >= 1.0:
                raise ValueError(
                    f"atom at s={s}: mass at s=1 must go through lap_mass, not an atom"
                )
            if s < S_SUPPORT_MIN:
                raise ValueError(f"atom at s={s} below supported range [{S_SUPPORT_MIN}, 1)")
            if s in seen:
                raise ValueError(f"duplicate atom at s={s}")
            seen.add(s)
        if not self.atoms and self.lap_mass == 0.0:
            raise ValueError("measure must carry some mass")

    @property
    def s_star(self) -> float:
        """Largest lower bound of the support (1.0 for a purely classical measure)."""
        if self.atoms:
            return self.atoms[0][0]
        return 1.0

    @classmethod
    def single(cls, s: float) -> "SpectralMeasure":
        return cls(atoms=((s, 1.0),))

    @classmethod
    def from_config(cls, atoms: Sequence[Sequence[float]], lap_mass: float = 0.0) -> "SpectralMeasure":
        return cls(atoms=tuple((float(s), float(w)) for s, w in atoms), lap_mass=float(lap_mass))


@dataclass(frozen=True)
class Potential:
    """Double-well potential with wells of equal (zero) height at u = -1 and u = 1.

    ``kind`` is one of "quartic", "peierls_nabarro", "polynomial"; for the
    polynomial kind ``coeffs`` holds ascending-power coefficients.
    """

    kind: str
    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("quartic", "peierls_nabarro", "polynomial"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "polynomial" and not self.coeffs:
            raise ValueError("polynomial potential needs coefficients")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def w(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "quartic":
            return (1.0 - t * t) ** 2 / 4.0
        if self.kind == "peierls_nabarro":
            return (1.0 + np.cos(np.pi * t)) / np.pi**2
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def dw(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "quartic":
            return t * t * t - t
        if self.kind == "peierls_nabarro":
            return -np.sin(np.pi * t) / np.pi
        der = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(t, der)

    def d2w(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "quartic":
            return 3.0 * t * t - 1.0
        if self.kind == "peierls_nabarro":
            return -np.cos(np.pi * t)
        der2 = np.polynomial.polynomial.polyder(self.coeffs, 2)
        return np.polynomial.polynomial.polyval(t, der2)

    @classmethod
    def quartic(cls) -> "Potential":
        return cls(kind="quartic")

    @classmethod
    def peierls_nabarro(cls) -> "Potential":
        return cls(kind="peierls_nabarro")

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "Potential":
        return cls(kind="polynomial", coeffs=tuple(coeffs))


@dataclass(frozen=True)
class PotentialCheck:
    name: str
    passed: bool
    worst: float


@dataclass(frozen=True)
class PotentialReport:
    checks: tuple[PotentialCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  worst={c.worst:.3e}")
        return "\n".join(lines)


def validate_potential(p: Potential) -> PotentialReport:
    """Check the double-well requirements; reports failures instead of raising.

    Checks: W(+-1) = 0 within 1e-12, W > 0 on 201 interior samples, and W'
    consistent with central differences of W (h = 1e-5, tolerance 1e-6).
    """
    checks = []

    wells = float(max(abs(p.w(1.0)), abs(p.w(-1.0))))
    checks.append(PotentialCheck("wells at +-1 have zero height", wells <= 1e-12, wells))

    t = np.linspace(-1.0, 1.0, 201)[1:-1]
    interior_min = float(np.min(p.w(t)))
    checks.append(PotentialCheck("positive between the wells", interior_min > 0.0, -interior_min))

    h = 1e-5
    t = np.linspace(-1.4, 1.4, 141)
    fd = (p.w(t + h) - p.w(t - h)) / (2.0 * h)
    deriv_err = float(np.max(np.abs(fd - p.dw(t))))
    checks.append(PotentialCheck("derivative matches finite differences", deriv_err <= 1e-6, deriv_err))

    return PotentialReport(checks=tuple(checks))


class GridFunction:
    """Sampled profile on a uniform truncated grid with declared far-field values.

    dim 1: values over x in [-X, X] (n points, spacing 2X/(n-1)); for
    tail="periodic" the grid covers one period [-X, X) with spacing 2X/n.
    dim 2: values[i, j] = u(x1_i, x2_j) on the square [-X, X]^2, with x2 the
    monotone axis for layer tails.

    Tail kinds declare u beyond the truncation: "layer" is -1 left / +1 right
    in the monotone axis (constant continuation transversally in dim 2),
    "zero" is 0, "constant" continues the edge values, "periodic" wraps.
    """

    __slots__ = ("dim", "X", "n", "values", "tail")

    def __init__(self, dim: int, X: float, n: int, values, tail: str):
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        if tail not in TAILS:
            raise ValueError(f"tail must be one of {TAILS}, got {tail!r}")
        if X <= 0.0:
            raise ValueError("domain half-width must be positive")
        values = np.asarray(values, dtype=float)
        expected = (n,) if dim == 1 else (n, n)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values = values.copy()
        values.setflags(write=False)
        self.dim = dim
        self.X = float(X)
        self.n = int(n)
        self.values = values
        self.tail = tail

    @property
    def h(self) -> float:
        if self.tail == "periodic":
            return 2.0 * self.X / self.n
        return 2.0 * self.X / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return -self.X + self.h * np.arange(self.n)

    def tail_values(self) -> tuple[float, float]:
        """Declared constant values beyond the truncation (left, right)."""
        if self.tail == "periodic":
            raise ValueError("periodic grids have no far-field constants")
        if self.tail == "layer":
            return (-1.0, 1.0)
        if self.tail == "zero":
            return (0.0, 0.0)
        v = self.values
        if self.dim == 1:
            return (float(v[0]), float(v[-1]))
        # dim 2 layer axis is the second index; constants refer to that axis
        return (float(v[:, 0].mean()), float(v[:, -1].mean()))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.dim, self.X, self.n, values, self.tail)

    @classmethod
    def from_callable(cls, f: Callable, X: float, n: int, tail: str = "layer", dim: int = 1) -> "GridFunction":
        if dim == 1:
            h = 2.0 * X / (n if tail == "periodic" else n - 1)
            x = -X + h * np.arange(n)
            return cls(1, X, n, f(x), tail)
        h = 2.0 * X / (n if tail == "periodic" else n - 1)
        x = -X + h * np.arange(n)
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        return cls(2, X, n, f(x1, x2), tail)

    @classmethod
    def constant(cls, value: float, X: float, n: int, tail: str = "constant") -> "GridFunction":
        return cls(1, X, n, np.full(n, float(value)), tail)

    def __repr__(self) -> str:
        return f"GridFunction(dim={self.dim}, X={self.X}, n={self.n}, tail={self.tail!r})"
