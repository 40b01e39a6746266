"""Polynomial potentials F(w1, w2) and their critical points.

A potential is stored as a dense coefficient array ``C`` with
``F = sum_ij C[i, j] w1**i w2**j``; derivatives are exact coefficient
manipulations, evaluation is vectorized through numpy.polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.signal import convolve2d

from .errors import ConvergenceError, InputError

DEDUP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Polynomial2:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 2 or not np.all(np.isfinite(c)):
            raise InputError("coefficient table must be a finite 2-d array")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, terms) -> "Polynomial2":
        """From ``[(coeff, (i, j)), ...]`` meaning sum coeff * w1**i * w2**j."""
        terms = list(terms)
        if not terms:
            return cls(np.zeros((1, 1)))
        for _, (i, j) in terms:
            if i < 0 or j < 0 or int(i) != i or int(j) != j:
                raise InputError("powers must be nonnegative integers")
        ni = max(int(i) for _, (i, _) in terms) + 1
        nj = max(int(j) for _, (_, j) in terms) + 1
        c = np.zeros((ni, nj))
        for coeff, (i, j) in terms:
            c[int(i), int(j)] += coeff
        return cls(c)

    @classmethod
    def variable(cls, which: int) -> "Polynomial2":
        return cls(np.array([[0.0, 1.0]]) if which == 2 else np.array([[0.0], [1.0]]))

    @classmethod
    def constant(cls, value: float) -> "Polynomial2":
        return cls(np.array([[float(value)]]))

    def terms(self) -> list:
        return [(float(self.coeffs[i, j]), (int(i), int(j))) for i, j in zip(*np.nonzero(self.coeffs))]

    # -- algebra ------------------------------------------------------------
    def _lift(self, other):
        return other if isinstance(other, Polynomial2) else Polynomial2.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        shape = np.maximum(self.coeffs.shape, other.coeffs.shape)
        c = np.zeros(shape)
        c[: self.coeffs.shape[0], : self.coeffs.shape[1]] += self.coeffs
        c[: other.coeffs.shape[0], : other.coeffs.shape[1]] += other.coeffs
        return Polynomial2(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial2(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        return Polynomial2(convolve2d(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Polynomial2.constant(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def deriv(self, which: int) -> "Polynomial2":
        axis = 0 if which == 1 else 1
        if self.coeffs.shape[axis] == 1:
            return Polynomial2(np.zeros((1, 1)))
        return Polynomial2(P.polyder(self.coeffs, axis=axis))

    # -- evaluation -----------------------------------------------------------
    def __call__(self, w1, w2):
        w1, w2 = np.broadcast_arrays(w1, w2)
        return P.polyval2d(w1, w2, self.coeffs)

    def gradient(self, w1, w2) -> np.ndarray:
        return np.array([self.deriv(1)(w1, w2), self.deriv(2)(w1, w2)])

    def hessian(self, w1, w2) -> np.ndarray:
        """Entries (F_11, F_12, F_22) stacked along the first axis."""
        d1, d2 = self.deriv(1), self.deriv(2)
        return np.array([d1.deriv(1)(w1, w2), d1.deriv(2)(w1, w2), d2.deriv(2)(w1, w2)])


def damped_newton(F: Polynomial2, start, tol: float = 1e-13, max_iter: int = 100) -> np.ndarray:
    """Zero of grad F from ``start`` by Newton with backtracking on |grad F|."""
    z = np.asarray(start, dtype=float).copy()
    g = F.gradient(*z)
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gn < tol:
            return z
        h11, h12, h22 = F.hessian(*z)
        H = np.array([[h11, h12], [h12, h22]])
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Hessian during critical point search")
        t = 1.0
        while t > 1e-10:
            trial = z + t * step
            gt = F.gradient(*trial)
            if np.linalg.norm(gt) < (1 - 1e-4 * t) * gn:
                break
            t *= 0.5
        else:
            raise ConvergenceError("line search stalled")
        z, g = trial, gt
    if np.linalg.norm(g) < 1e3 * tol:
        return z
    raise ConvergenceError("Newton iteration did not converge")


def critical_points(F: Polynomial2, starts) -> list:
    """Distinct critical points reached from the given starting points.

    Starts that fail to converge are skipped; points closer than DEDUP_TOL
    are merged.  Output is sorted lexicographically for determinism.
    """
    found: list = []
    for s in np.asarray(starts, dtype=float).reshape(-1, 2):
        try:
            z = damped_newton(F, s)
        except ConvergenceError:
            continue
        if not any(np.linalg.norm(z - f) < DEDUP_TOL for f in found):
            found.append(z)
    found.sort(key=lambda v: (round(v[0], 9), round(v[1], 9)))
    return [tuple(float(x) for x in z) for z in found]


def grid_starts(lo, hi, n: int) -> np.ndarray:
    """Tensor grid of n x n starting points on the box [lo, hi]^2."""
    lo, hi = np.broadcast_to(np.asarray(lo, float), (2,)), np.broadcast_to(np.asarray(hi, float), (2,))
    g1, g2 = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n), indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def demo_potential(a: float = 4.3, c: float = 9.0) -> Polynomial2:
    """a(w1^3/3 - w1^2/2) + c(w2^3/3 - w2^2/2) + (w1 + w2 - 1)^4.

    Critical points include (1, 0) with Hessian diag(a, -c) and (0, 1) with
    Hessian diag(-a, c); along z(t) = (1-t, t) the quartic term is flat, so the
    Hessian is diag(a(1-2t), c(2t-1)).
    """
    w1, w2 = Polynomial2.variable(1), Polynomial2.variable(2)
    return a * (w1**3 * (1 / 3) - w1**2 * 0.5) + c * (w2**3 * (1 / 3) - w2**2 * 0.5) + (w1 + w2 - 1) ** 4
