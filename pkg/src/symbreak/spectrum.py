"""Neumann spectrum of -Laplace on the unit disc and unit ball.

Eigenvalues are squares of zeros of Bessel-function derivatives.  Zeros are
bracketed using interlacing (zeros of J_nu and J_{nu+1} alternate, and the
zeros of J'_nu sit between consecutive zeros of J_nu) and refined by a
bracket-safeguarded Newton iteration.  No tabulated zeros are used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import special

from .errors import InputError

#: relative gap below which two eigenvalues count as coincident for bookkeeping
COINCIDENCE_RTOL = 1e-9


@dataclass(frozen=True)
class DomainSpec:
    kind: str  # "disc" | "ball"
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("disc", "ball"):
            raise InputError(f"unknown domain kind {self.kind!r}")
        if not self.radius > 0:
            raise InputError("radius must be positive")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "disc" else 3


@dataclass(frozen=True)
class EigenRecord:
    """One Neumann eigenvalue together with the indices that produced it.

    ``angular_index`` is the Fourier mode m on the disc and the
    spherical-harmonic degree l on the ball; ``radial_index`` counts zeros of
    the radial derivative, with the constant mode as radial index 1 of
    angular index 0.
    """

    mu: float
    angular_index: int
    radial_index: int
    eigenspace_dim: int
    domain: DomainSpec = DomainSpec("disc")

    @property
    def wavenumber(self) -> float:
        return math.sqrt(self.mu)


@dataclass(frozen=True)
class Spectrum(Sequence):
    """Sorted eigen-records together with the cutoff they are complete up to."""

    domain: DomainSpec
    mu_max: float
    records: tuple

    def __getitem__(self, i):
        return self.records[i]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EigenRecord]:
        return iter(self.records)

    def values(self) -> np.ndarray:
        return np.array([r.mu for r in self.records])

    def distinct_values(self) -> list:
        """Eigenvalues with numerically coincident entries merged, ascending."""
        out: list = []
        for r in self.records:
            if not out or not coincident(out[-1], r.mu):
                out.append(r.mu)
        return out


def coincident(mu_a: float, mu_b: float) -> bool:
    return abs(mu_a - mu_b) < COINCIDENCE_RTOL * (1.0 + abs(mu_a))


# ---------------------------------------------------------------------------
# root refinement

def _safeguarded_newton(f: Callable, df: Callable, lo: float, hi: float,
                        maxiter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise InputError(f"no sign change on [{lo}, {hi}]")
    x = 0.5 * (lo + hi)
    width_prev = hi - lo
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(flo):
            lo, flo = x, fx
        else:
            hi = x
        dfx = df(x)
        step_ok = dfx != 0.0 and math.isfinite(dfx)
        xn = x - fx / dfx if step_ok else 0.5 * (lo + hi)
        # fall back to bisection when Newton leaves the bracket or stalls
        if not (lo < xn < hi) or abs(xn - x) > 0.5 * width_prev:
            xn = 0.5 * (lo + hi)
        width_prev = abs(xn - x)
        if abs(xn - x) <= 4 * np.finfo(float).eps * abs(xn):
            return xn
        x = xn
    return x


# ---------------------------------------------------------------------------
# zeros of J_nu, nu integer or half-integer

@lru_cache(maxsize=None)
def _bessel_zeros(nu2: int, count: int) -> tuple:
    """First ``count`` positive zeros of J_{nu2/2}."""
    base2 = nu2 % 2
    steps = (nu2 - base2) // 2
    n0 = count + steps
    s = np.arange(1, n0 + 1, dtype=float)
    if base2 == 1:
        zeros = list(s * math.pi)  # J_{1/2}(x) = sqrt(2/(pi x)) sin x
    else:
        # the s-th zero of J_0 lies in ((s - 1/4) pi, (s - 1/8) pi)
        f = lambda x: special.j0(x)
        df = lambda x: -special.j1(x)
        zeros = [float(_safeguarded_newton(f, df, (k - 0.5) * math.pi, k * math.pi)) for k in s]
    nu = base2 / 2.0
    for _ in range(steps):
        nu += 1.0
        f = lambda x, nu=nu: special.jv(nu, x)
        df = lambda x, nu=nu: special.jvp(nu, x)
        zeros = [_safeguarded_newton(f, df, zeros[k], zeros[k + 1])
                 for k in range(len(zeros) - 1)]
    return tuple(float(z) for z in zeros[:count])


@lru_cache(maxsize=None)
def _bessel_deriv_zeros(order: int, count: int) -> tuple:
    f = lambda x: special.jvp(order, x)
    df = lambda x: special.jvp(order, x, 2)
    if order == 0:
        jz = _bessel_zeros(0, count + 1)
        brackets = [(jz[k], jz[k + 1]) for k in range(count)]
    else:
        jz = _bessel_zeros(2 * order, count)
        # J_m increases on (0, m]: its first maximum lies beyond x = m
        brackets = [(float(order), jz[0])] + [(jz[k - 1], jz[k]) for k in range(1, count)]
    return tuple(float(_safeguarded_newton(f, df, lo, hi)) for lo, hi in brackets)


def bessel_deriv_zeros(order: int, count: int) -> list:
    """First ``count`` positive zeros of J'_order, strictly increasing.

    >>> round(bessel_deriv_zeros(1, 1)[0], 10)
    1.8411837813
    """
    if order < 0 or int(order) != order:
        raise InputError("order must be a nonnegative integer")
    if count < 1:
        raise InputError("count must be >= 1")
    return list(_bessel_deriv_zeros(int(order), int(count)))


def _sph_deriv(l: int, x: float) -> float:
    return float(special.spherical_jn(l, x, derivative=True))


def _sph_second_deriv(l: int, x: float) -> float:
    # from x^2 y'' + 2 x y' + (x^2 - l(l+1)) y = 0
    y = special.spherical_jn(l, x)
    yp = special.spherical_jn(l, x, derivative=True)
    return float(-2.0 * yp / x - (1.0 - l * (l + 1) / x**2) * y)


@lru_cache(maxsize=None)
def _spherical_deriv_zeros(order: int, count: int) -> tuple:
    f = lambda x: _sph_deriv(order, x)
    df = lambda x: _sph_second_deriv(order, x)
    if order == 0:
        jz = _bessel_zeros(1, count + 1)  # zeros of j_0 = zeros of J_{1/2}
        brackets = [(jz[k], jz[k + 1]) for k in range(count)]
    else:
        jz = _bessel_zeros(2 * order + 1, count)
        # at a critical point of j_l > 0 the ODE forces x^2 > l(l+1)
        brackets = [(math.sqrt(order * (order + 1)), jz[0])]
        brackets += [(jz[k - 1], jz[k]) for k in range(1, count)]
    return tuple(float(_safeguarded_newton(f, df, lo, hi)) for lo, hi in brackets)


def spherical_bessel_deriv_zeros(order: int, count: int) -> list:
    """First ``count`` positive zeros of the derivative of j_order."""
    if order < 0 or int(order) != order:
        raise InputError("order must be a nonnegative integer")
    if count < 1:
        raise InputError("count must be >= 1")
    return list(_spherical_deriv_zeros(int(order), int(count)))


# ---------------------------------------------------------------------------
# spectrum enumeration

def _zeros_up_to(zero_fn: Callable, order: int, x_max: float) -> list:
    count = 4
    while True:
        zs = zero_fn(order, count)
        if zs[-1] > x_max:
            return [z for z in zs if z <= x_max]
        count *= 2


def neumann_spectrum(domain: DomainSpec, mu_max: float) -> Spectrum:
    """All Neumann eigenvalues of -Laplace on ``domain`` that are <= mu_max.

    Enumeration walks the angular index upward until the first derivative
    zero of that order exceeds the cutoff; the first zero is increasing in
    the order, so nothing below ``mu_max`` is skipped.
    """
    if not mu_max > 0:
        raise InputError("mu_max must be positive")
    R = domain.radius
    x_max = math.sqrt(mu_max) * R
    if domain.kind == "disc":
        zero_fn, dim_of = bessel_deriv_zeros, (lambda m: 1 if m == 0 else 2)
    else:
        zero_fn, dim_of = spherical_bessel_deriv_zeros, (lambda l: 2 * l + 1)

    records = [EigenRecord(0.0, 0, 1, 1, domain)]
    order = 0
    while True:
        if order > 0 and zero_fn(order, 1)[0] > x_max:
            break
        shift = 2 if order == 0 else 1
        for s, x in enumerate(_zeros_up_to(zero_fn, order, x_max)):
            records.append(EigenRecord((x / R) ** 2, order, s + shift, dim_of(order), domain))
        order += 1
    records.sort(key=lambda r: (r.mu, r.angular_index, r.radial_index))
    return Spectrum(domain, float(mu_max), tuple(records))


# ---------------------------------------------------------------------------
# eigenfunctions

def _radial_zero(record: EigenRecord) -> float:
    return math.sqrt(record.mu) * record.domain.radius


def _disc_radial(record: EigenRecord, r):
    m, R = record.angular_index, record.domain.radius
    x = _radial_zero(record)
    norm2 = 0.5 * R**2 * (1.0 - m**2 / x**2) * special.jv(m, x) ** 2
    return special.jv(m, x * np.asarray(r) / R) / math.sqrt(norm2)


def _real_sph_harm(l: int, slot: int, theta, phi):
    m = (slot + 1) // 2
    x = np.cos(theta)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m))
    p = special.lpmv(m, l, x)
    if m == 0:
        return norm * p
    trig = np.cos(m * phi) if slot % 2 == 1 else np.sin(m * phi)
    return math.sqrt(2.0) * norm * p * trig


def eigenfunction_eval(record: EigenRecord, basis_slot: int, point):
    """Value of an H^1-unit eigenfunction at ``point``.

    ``point`` is ``(r, theta)`` on the disc and ``(r, theta, phi)`` (polar,
    azimuthal) on the ball; array arguments broadcast.  Disc slot 0 is the
    cosine and slot 1 the sine member; ball slot 0 is the axial harmonic
    and slots 2j-1, 2j the cos/sin harmonics of azimuthal order j.
    """
    if not 0 <= basis_slot < record.eigenspace_dim:
        raise InputError(f"slot {basis_slot} out of range for eigenspace of dim {record.eigenspace_dim}")
    dom = record.domain
    r = np.asarray(point[0], dtype=float)
    if np.any(r < 0) or np.any(r > dom.radius * (1 + 1e-12)):
        raise InputError("point lies outside the domain")
    h1 = 1.0 / math.sqrt(1.0 + record.mu)
    if dom.kind == "disc":
        if len(point) != 2:
            raise InputError("disc points are (r, theta)")
        theta = np.asarray(point[1], dtype=float)
        m = record.angular_index
        shape = np.broadcast(r, theta).shape
        if record.mu == 0.0:
            out = np.full(shape, 1.0 / (math.sqrt(math.pi) * dom.radius))
        elif m == 0:
            out = _disc_radial(record, r) / math.sqrt(2 * math.pi) * np.ones(shape)
        else:
            trig = np.cos(m * theta) if basis_slot == 0 else np.sin(m * theta)
            out = _disc_radial(record, r) * trig / math.sqrt(math.pi)
        return h1 * out
    if len(point) != 3:
        raise InputError("ball points are (r, theta, phi)")
    theta, phi = np.asarray(point[1], dtype=float), np.asarray(point[2], dtype=float)
    l, R = record.angular_index, dom.radius
    if record.mu == 0.0:
        radial = np.full(np.shape(r), 1.0 / math.sqrt(R**3 / 3.0))
    else:
        x = _radial_zero(record)
        norm2 = 0.5 * R**3 * (1.0 - l * (l + 1) / x**2) * special.spherical_jn(l, x) ** 2
        radial = special.spherical_jn(l, x * r / R) / math.sqrt(norm2)
    return h1 * radial * _real_sph_harm(l, basis_slot, theta, phi)
