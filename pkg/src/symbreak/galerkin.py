"""Spectral Galerkin truncation of the reduced operator on the disc.

Unknowns are coefficients on H^1-orthonormal Neumann eigenfunctions: ``u`` on
the broken basis (modes m > 0 fixed by K, cos and sin slots, both components)
and ``lam`` on the fixed basis (radial modes, both components).  With
w = i(u, lam) the reduced operator is

    A(u, lam)_e = s_c u_e - int dF/dw_c(w) phi_e dx,     s_1 = +1, s_2 = -1,

for the basis function phi_e carried by component c.  On a constant lam = z
and quadratic F its linearization is block diagonal with the 2x2 blocks
T(mu) of the criteria module.  The ``"weak"`` pairing additionally subtracts
int s_c w_c phi_e, which is the literal weak form of -Delta w_1 = ..., Delta w_2 = ...
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .criteria import interval_data
from .errors import ConfigurationError, InputError, PreconditionError
from .isotypic import GroupSpec, fixed_dim
from .polynomial import Polynomial2
from .spectrum import DomainSpec, EigenRecord, Spectrum, eigenfunction_eval, neumann_spectrum

DEFAULT_QUADRATURE = (64, 128)
SIGNS = (1.0, -1.0)
_HESS_INDEX = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}


@dataclass(frozen=True)
class BasisFunction:
    comp: int  # 1 or 2
    record: EigenRecord
    slot: int  # 0 = cos (or radial), 1 = sin

    @property
    def mode(self) -> int:
        return self.record.angular_index

    @property
    def label(self) -> str:
        r = self.record
        return f"w{self.comp}:m{r.angular_index}n{r.radial_index}{'cs'[self.slot]}"


@dataclass(frozen=True)
class Quadrature:
    n_r: int
    n_theta: int
    r: np.ndarray  # flattened node coordinates
    theta: np.ndarray
    weights: np.ndarray  # include the area element r dr dtheta

    @classmethod
    def build(cls, n_r: int, n_theta: int, radius: float = 1.0) -> "Quadrature":
        if n_r < 2 or n_theta < 4:
            raise ConfigurationError("quadrature orders are too small")
        x, wx = leggauss(n_r)
        r = radius * (x + 1) / 2
        wr = wx * radius / 2 * r
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        R, T = np.meshgrid(r, theta, indexing="ij")
        W = np.outer(wr, np.full(n_theta, 2 * np.pi / n_theta))
        return cls(n_r, n_theta, R.ravel(), T.ravel(), W.ravel())

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.ravel(values)))


@dataclass(frozen=True, eq=False)
class GalerkinModel:
    domain: DomainSpec
    group: GroupSpec
    mu_max: float
    spectrum: Spectrum
    F: Polynomial2
    quadrature: Quadrature
    broken_basis: tuple
    fixed_basis: tuple
    pairing: str
    _Bb: np.ndarray  # broken basis values on the grid, (nb, N)
    _Bf: np.ndarray  # fixed basis values on the grid, (nf, N)
    _derivs: tuple  # F_1, F_2, F_11, F_12, F_22

    @property
    def n_broken(self) -> int:
        return len(self.broken_basis)

    @property
    def n_fixed(self) -> int:
        return len(self.fixed_basis)

    @property
    def quadrature_orders(self) -> tuple:
        return (self.quadrature.n_r, self.quadrature.n_theta)

    @property
    def broken_comp(self) -> np.ndarray:
        return np.array([b.comp - 1 for b in self.broken_basis], dtype=int)

    @property
    def fixed_comp(self) -> np.ndarray:
        return np.array([b.comp - 1 for b in self.fixed_basis], dtype=int)

    @property
    def modes(self) -> list:
        return sorted({b.mode for b in self.broken_basis})

    def with_quadrature(self, n_r: int, n_theta: int) -> "GalerkinModel":
        return build_model(self.F, self.group, self.mu_max, (n_r, n_theta), self.domain.radius, self.pairing)


def _basis_values(basis, quad: Quadrature) -> np.ndarray:
    pts = (quad.r, quad.theta)
    if not basis:
        return np.zeros((0, quad.r.size))
    return np.array([eigenfunction_eval(b.record, b.slot, pts) for b in basis])


def build_model(F: Polynomial2, group: GroupSpec, mu_max: float,
                quadrature: Sequence[int] = DEFAULT_QUADRATURE, radius: float = 1.0,
                pairing: str = "tk", critical_hessians: Sequence = ()) -> GalerkinModel:
    """Enumerate the broken and fixed bases up to ``mu_max`` and tabulate them.

    ``critical_hessians`` (HessianData) only feed the truncation warning issued
    when some beta2 exceeds mu_max/2.
    """
    if group.domain_kind != "disc":
        raise ConfigurationError("the Galerkin harness supports the disc only")
    if pairing not in ("tk", "weak"):
        raise ConfigurationError(f"unknown pairing {pairing!r}")
    if not isinstance(F, Polynomial2):
        raise ConfigurationError("F must be a polynomial")
    domain = DomainSpec("disc", radius)
    spectrum = neumann_spectrum(domain, mu_max)
    broken, fixed = [], []
    for rec in spectrum:
        if rec.angular_index == 0:
            fixed += [BasisFunction(c, rec, 0) for c in (1, 2)]
        elif fixed_dim(rec, group, "K") == 2:
            broken += [BasisFunction(c, rec, s) for c in (1, 2) for s in (0, 1)]
    if not broken:
        raise ConfigurationError(f"no broken mode below mu_max={mu_max}")
    for h in critical_hessians:
        if interval_data(h)[2] > mu_max / 2:
            warnings.warn("beta2 of a critical point exceeds mu_max/2; nonlinear coupling may be truncated",
                          stacklevel=2)
    quad = Quadrature.build(*quadrature, radius=radius)
    d1, d2 = F.deriv(1), F.deriv(2)
    derivs = (d1, d2, d1.deriv(1), d1.deriv(2), d2.deriv(2))
    return GalerkinModel(domain, group, float(mu_max), spectrum, F, quad, tuple(broken), tuple(fixed),
                         pairing, _basis_values(broken, quad), _basis_values(fixed, quad), derivs)


# ---------------------------------------------------------------------------
# assembly

def _check_sizes(model: GalerkinModel, u, lam) -> tuple:
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if u.shape != (model.n_broken,) or lam.shape != (model.n_fixed,):
        raise InputError(f"expected u of size {model.n_broken} and lam of size {model.n_fixed}")
    return u, lam


def field_values(model: GalerkinModel, u, lam) -> np.ndarray:
    """w = i(u, lam) on the quadrature grid, shape (2, N)."""
    u, lam = _check_sizes(model, u, lam)
    cb, cf = model.broken_comp, model.fixed_comp
    w = np.zeros((2, model.quadrature.r.size))
    for c in (0, 1):
        w[c] = u[cb == c] @ model._Bb[cb == c] + lam[cf == c] @ model._Bf[cf == c]
    return w


def _grad_F(model, w) -> np.ndarray:
    return np.array([model._derivs[0](w[0], w[1]), model._derivs[1](w[0], w[1])])


def _hess_F(model, w) -> np.ndarray:
    return np.array([d(w[0], w[1]) for d in model._derivs[2:]])


def _project(model, basis_vals, comp, g) -> np.ndarray:
    """int g_{comp_e} phi_e for every row e of ``basis_vals``."""
    weighted = basis_vals * model.quadrature.weights
    full = weighted @ g.T  # (n, 2)
    return full[np.arange(len(comp)), comp]


def assemble_A(model: GalerkinModel, u, lam) -> np.ndarray:
    u, lam = _check_sizes(model, u, lam)
    w = field_values(model, u, lam)
    cb = model.broken_comp
    s = np.take(SIGNS, cb)
    out = s * u - _project(model, model._Bb, cb, _grad_F(model, w))
    if model.pairing == "weak":
        out -= s * _project(model, model._Bb, cb, w)
    return out


def _second_variation(model, rows, rcomp, cols, ccomp, H, w_sign=False) -> np.ndarray:
    Wq = model.quadrature.weights
    out = np.zeros((rows.shape[0], cols.shape[0]))
    for c in (0, 1):
        for d in (0, 1):
            ri, ci = np.flatnonzero(rcomp == c), np.flatnonzero(ccomp == d)
            if ri.size == 0 or ci.size == 0:
                continue
            kernel = H[_HESS_INDEX[(c, d)]].copy()
            if w_sign and c == d:
                kernel = kernel + SIGNS[c]
            out[np.ix_(ri, ci)] = (rows[ri] * (Wq * kernel)) @ cols[ci].T
    return out


def jacobian(model: GalerkinModel, u, lam) -> np.ndarray:
    """dA/du assembled from the Hessian of F on the grid."""
    w = field_values(model, u, lam)
    cb = model.broken_comp
    H = _hess_F(model, w)
    J = -_second_variation(model, model._Bb, cb, model._Bb, cb, H, model.pairing == "weak")
    J[np.diag_indices_from(J)] += np.take(SIGNS, cb)
    return J


def jacobian_lambda(model: GalerkinModel, u, lam) -> np.ndarray:
    """dA/dlam, shape (n_broken, n_fixed)."""
    w = field_values(model, u, lam)
    H = _hess_F(model, w)
    return -_second_variation(model, model._Bb, model.broken_comp, model._Bf, model.fixed_comp, H,
                              model.pairing == "weak")


def functional(model: GalerkinModel, u, lam) -> float:
    """Reduced functional whose u-gradient is assemble_A."""
    u, lam = _check_sizes(model, u, lam)
    w = field_values(model, u, lam)
    quad = 0.5 * (np.dot(np.take(SIGNS, model.broken_comp), u * u) + np.dot(np.take(SIGNS, model.fixed_comp), lam * lam))
    integrand = model.F(w[0], w[1])
    if model.pairing == "weak":
        integrand = integrand + 0.5 * (w[0] ** 2 - w[1] ** 2)
    return float(quad - model.quadrature.integrate(integrand))


def quadrature_check(model: GalerkinModel, u, lam, factor: float = 1.5, tol: float = 1e-6) -> float:
    """Relative change of A(u, lam) under quadrature refinement; warns above ``tol``."""
    fine = model.with_quadrature(int(math.ceil(model.quadrature.n_r * factor)),
                                 int(math.ceil(model.quadrature.n_theta * factor)))
    a, b = assemble_A(model, u, lam), assemble_A(fine, u, lam)
    err = float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))
    if err > tol:
        warnings.warn(f"quadrature under-resolved: refinement changes A by {err:.2e}", stacklevel=2)
    return err


def constant_lambda(model: GalerkinModel, z) -> np.ndarray:
    """Fixed-basis coefficients of the constant function w = z."""
    lam = np.zeros(model.n_fixed)
    for i, b in enumerate(model.fixed_basis):
        if b.record.mu == 0.0:
            # the H^1-normalized constant is 1/(sqrt(pi) R)
            lam[i] = z[b.comp - 1] * math.sqrt(math.pi) * model.domain.radius
    return lam


def rotate(model: GalerkinModel, u, angle: float) -> np.ndarray:
    """Coefficients of w(r, theta - angle) for broken coefficients u."""
    u = np.asarray(u, dtype=float)
    out = u.copy()
    idx = {(b.comp, b.record, b.slot): i for i, b in enumerate(model.broken_basis)}
    for i, b in enumerate(model.broken_basis):
        if b.slot == 0:
            j = idx[(b.comp, b.record, 1)]
            c, s = math.cos(b.mode * angle), math.sin(b.mode * angle)
            out[i], out[j] = c * u[i] - s * u[j], s * u[i] + c * u[j]
    return out


# ---------------------------------------------------------------------------
# paths and singular points

@dataclass(frozen=True)
class Path:
    """Piecewise-linear lam(t), t in [0, 1], through equally spaced nodes."""

    nodes: np.ndarray  # (k, n_fixed)

    @classmethod
    def constant_segment(cls, model: GalerkinModel, z1, z2) -> "Path":
        return cls(np.array([constant_lambda(model, z1), constant_lambda(model, z2)]))

    def _locate(self, t: float) -> tuple:
        if not -1e-12 <= t <= 1 + 1e-12:
            raise InputError("path parameter must lie in [0, 1]")
        k = len(self.nodes) - 1
        i = min(int(t * k), k - 1)
        return i, t * k - i, k

    def __call__(self, t: float) -> np.ndarray:
        i, frac, _ = self._locate(t)
        return (1 - frac) * self.nodes[i] + frac * self.nodes[i + 1]

    def derivative(self, t: float) -> np.ndarray:
        i, _, k = self._locate(t)
        return k * (self.nodes[i + 1] - self.nodes[i])


@dataclass(frozen=True)
class Crossing:
    t: float
    mode: int
    mu: float
    radial_index: int


def _mode_indices(model: GalerkinModel, m: int, slot: int = 0) -> np.ndarray:
    return np.array([i for i, b in enumerate(model.broken_basis) if b.mode == m and b.slot == slot])


def _block_det(model, path, m, t) -> float:
    idx = _mode_indices(model, m)
    J = jacobian(model, np.zeros(model.n_broken), path(t))
    return float(np.linalg.det(J[np.ix_(idx, idx)]))


def detect_singular_points(model: GalerkinModel, path: Path, samples: int = 200, xtol: float = 1e-12) -> list:
    """Parameter values where a per-mode block of dA/du(0, lam(t)) becomes singular.

    The cos and sin slots of a mode carry identical blocks, so the sign of the
    determinant of the cos block is tracked; the full block's determinant is a
    square and never changes sign.
    """
    ts = np.linspace(0.0, 1.0, samples + 1)
    zero = np.zeros(model.n_broken)
    dets = {m: [] for m in model.modes}
    for t in ts:
        J = jacobian(model, zero, path(t))
        for m in model.modes:
            idx = _mode_indices(model, m)
            sub = J[np.ix_(idx, idx)]
            if t in (0.0, 1.0) and np.linalg.svd(sub, compute_uv=False)[-1] < 1e-9:
                raise PreconditionError(f"mode {m} block is singular at path endpoint t={t}")
            dets[m].append(np.linalg.det(sub))
    out = []
    for m in model.modes:
        d = np.sign(dets[m])
        for k in np.flatnonzero(d[:-1] * d[1:] < 0):
            t_star = brentq(lambda t: _block_det(model, path, m, t), ts[k], ts[k + 1], xtol=xtol, rtol=1e-15)
            out.append(_label_crossing(model, path, m, t_star))
    return sorted(out, key=lambda c: (c.t, c.mode))


def _label_crossing(model, path, m, t_star) -> Crossing:
    idx = _mode_indices(model, m)
    J = jacobian(model, np.zeros(model.n_broken), path(t_star))
    _, _, vt = np.linalg.svd(J[np.ix_(idx, idx)])
    null = np.abs(vt[-1])
    weight: dict = {}
    for k, i in enumerate(idx):
        rec = model.broken_basis[i].record
        weight[rec] = weight.get(rec, 0.0) + null[k] ** 2
    rec = max(weight, key=weight.get)
    return Crossing(float(t_star), m, rec.mu, rec.radial_index)


def kernel_vector(model: GalerkinModel, path: Path, crossing: Crossing, angle: float = 0.0) -> np.ndarray:
    """Unit kernel vector of dA/du at the crossing, in the angle-``angle`` orientation."""
    idx = _mode_indices(model, crossing.mode)
    J = jacobian(model, np.zeros(model.n_broken), path(crossing.t))
    _, _, vt = np.linalg.svd(J[np.ix_(idx, idx)])
    v = np.zeros(model.n_broken)
    v[idx] = vt[-1]
    v = rotate(model, v, angle)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# full gradient and symmetry bookkeeping

def full_gradient(model: GalerkinModel, u, lam) -> tuple:
    """Gradient of the functional on every basis function of the truncation.

    Evaluated independently of the cached basis tables: the field is rebuilt
    from eigenfunction values and every mode up to mu_max, including those not
    fixed by K, is tested.  Returns (labels, values).
    """
    u, lam = _check_sizes(model, u, lam)
    pts = (model.quadrature.r, model.quadrature.theta)
    coeff = {(b.comp, b.record, b.slot): x for b, x in zip(model.broken_basis, u)}
    coeff.update({(b.comp, b.record, b.slot): x for b, x in zip(model.fixed_basis, lam)})
    every = []
    for rec in model.spectrum:
        for slot in ((0,) if rec.angular_index == 0 else (0, 1)):
            every += [(c, rec, slot) for c in (1, 2)]
    vals = {key[1:]: eigenfunction_eval(key[1], key[2], pts) for key in every if key[0] == 1}
    w = np.zeros((2, model.quadrature.r.size))
    for key in every:
        if coeff.get(key, 0.0):
            w[key[0] - 1] += coeff[key] * vals[key[1:]]
    g = _grad_F(model, w)
    if model.pairing == "weak":
        g = g + np.array([w[0], -w[1]])
    out = []
    for key in every:
        c = key[0] - 1
        out.append(SIGNS[c] * coeff.get(key, 0.0) - model.quadrature.integrate(g[c] * vals[key[1:]]))
    return every, np.array(out)


def residual_symmetry_check(model: GalerkinModel, u, lam) -> tuple:
    """(f_recovered, symmetry_leak).

    f_recovered holds the gradient on the fixed basis, i.e. the Riesz
    representative of the G-invariant forcing solved by (u, lam); symmetry_leak
    is the norm of the gradient on all non-radial basis functions.
    """
    keys, grad = full_gradient(model, u, lam)
    pos = {k: i for i, k in enumerate(keys)}
    f = np.array([grad[pos[(b.comp, b.record, b.slot)]] for b in model.fixed_basis])
    nonradial = np.array([g for k, g in zip(keys, grad) if k[1].angular_index > 0])
    return f, float(np.linalg.norm(nonradial))


def mode_amplitudes(model: GalerkinModel, u) -> dict:
    """Euclidean norm of the coefficients of each angular mode."""
    out: dict = {}
    for b, x in zip(model.broken_basis, u):
        out[b.mode] = out.get(b.mode, 0.0) + x * x
    return {m: math.sqrt(v) for m, v in sorted(out.items())}
