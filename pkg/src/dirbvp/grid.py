"""Zero-boundary grid functions, difference operators, and their norms.

A grid function stores samples x(0), ..., x(N) on the uniform grid
t_k = k/N with the Dirichlet constraint x(0) = x(N) = 0.  Everything in
this module is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridFunction",
    "GridNorms",
    "forward_difference",
    "second_difference",
    "norms",
    "summation_by_parts_residual",
    "random_element",
]


@dataclass(frozen=True)
class GridFunction:
    """Samples on k/N for k = 0..n, vanishing at both endpoints.

    ``values`` has length n + 1; entry k is the value at node t = k/n.
    The boundary entries must be exactly zero and every entry finite.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"subdivision count must be >= 2, got {self.n}")
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (self.n + 1,):
            raise ValueError(
                f"expected {self.n + 1} values for n={self.n}, got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("grid values must all be finite")
        if values[0] != 0.0 or values[-1] != 0.0:
            raise ValueError("boundary values x(0) and x(N) must be exactly zero")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, n: int) -> "GridFunction":
        return cls(n, np.zeros(n + 1))

    @classmethod
    def from_interior(cls, interior) -> "GridFunction":
        """Build a grid function from its n-1 interior values."""
        interior = np.asarray(interior, dtype=float)
        if interior.ndim != 1 or interior.size < 1:
            raise ValueError("interior must be a 1-d array with at least one entry")
        values = np.zeros(interior.size + 2)
        values[1:-1] = interior
        return cls(interior.size + 1, values)

    @property
    def interior(self) -> np.ndarray:
        """Values at the interior nodes k = 1..n-1."""
        return self.values[1:-1]

    @property
    def nodes(self) -> np.ndarray:
        """Grid points k/n for k = 0..n."""
        return np.arange(self.n + 1) / self.n


@dataclass(frozen=True)
class GridNorms:
    n_norm: float
    delta_norm: float
    e_norm: float
    sup_norm: float


def forward_difference(x: GridFunction) -> np.ndarray:
    """All N forward differences x(k) - x(k-1), k = 1..N."""
    return np.diff(x.values)


def second_difference(x: GridFunction) -> np.ndarray:
    """Second differences x(k+1) - 2x(k) + x(k-1) at interior k = 1..N-1."""
    v = x.values
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def norms(x: GridFunction) -> GridNorms:
    """The four norms controlling a zero-boundary grid function.

    n_norm is the Euclidean norm of the interior values, delta_norm the
    Euclidean norm of all forward differences, e_norm the Euclidean norm
    of the second differences, and sup_norm the max absolute value.
    """
    return GridNorms(
        n_norm=float(np.linalg.norm(x.interior)),
        delta_norm=float(np.linalg.norm(forward_difference(x))),
        e_norm=float(np.linalg.norm(second_difference(x))),
        sup_norm=float(np.max(np.abs(x.values))),
    )


def summation_by_parts_residual(a, b, m: int) -> float:
    """Absolute defect of the summation-by-parts identity up to index m.

    For sequences a_1..a_{m+1}, b_1..b_{m+1} (stored 0-based) the identity

        sum_{k=1}^{m} a_k (b_{k+1} - b_k)
            = a_{m+1} b_{m+1} - a_1 b_1 - sum_{k=1}^{m} (a_{k+1} - a_k) b_{k+1}

    is exact; the returned value is zero up to roundoff.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < m + 1:
        raise ValueError(f"need at least {m + 1} entries, got {a.size}")
    a = a[: m + 1]
    b = b[: m + 1]
    lhs = np.sum(a[:-1] * np.diff(b))
    rhs = a[-1] * b[-1] - a[0] * b[0] - np.sum(np.diff(a) * b[1:])
    return abs(float(lhs - rhs))


def random_element(n: int, rng: np.random.Generator, amplitude: float = 1.0) -> GridFunction:
    """Random grid function with interior values uniform in [-amplitude, amplitude]."""
    return GridFunction.from_interior(rng.uniform(-amplitude, amplitude, n - 1))
