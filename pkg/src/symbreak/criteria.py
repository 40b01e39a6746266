"""Linearized blocks, Morse data, degrees and symmetry-breaking checks.

At a constant critical point z of F with Hessian [[a, b], [b, c]] the reduced
operator acts on each pair of eigenspace copies through

    T(mu) = [[1 - a/s, -b/s], [-b/s, -1 - c/s]],   s = 1 + mu,

whose determinant is phi(s)/s^2 with phi(x) = -x^2 + (a - c)x + ac - b^2.
The eigenvalues of T share a sign exactly when phi(1 + mu) > 0, i.e. when
mu lies in the open interval (beta1, beta2) between the shifted roots of phi.
Their sum is -(a + c)/s, so on that interval both are positive when a + c < 0
(Morse index 0) and both negative when a + c > 0 (Morse index 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CoverageError, DegenerateError, PreconditionError
from .euler_ring import UNIT, RingElement, deg_minus_id, degrees_distinct, invert
from .isotypic import GroupSpec, broken_block, combine_blocks, is_nontrivial_rep
from .spectrum import Spectrum

#: |phi(1+mu)| < DEGENERACY_TOL * (1+mu)^2, i.e. |det T| < DEGENERACY_TOL, flags a singular block
DEGENERACY_TOL = 1e-9

SIGN_CONVENTION_NOTE = (
    "Morse indices are counted from the eigenvalues of T(mu). On P(z) the index is 0 "
    "when a+c<0 and 2 when a+c>0, so the P-set degree is inverted for a+c<0 and taken "
    "directly for a+c>0."
)
TRIVIAL_BLOCK_NOTE = (
    "A trivial broken block enters the degree only through the parity of its dimension; "
    "an even-dimensional trivial block contributes the unit."
)
GLOBAL_IMPLICATION = "global bifurcation point exists on every path joining (0,lambda_1),(0,lambda_2)"


@dataclass(frozen=True)
class HessianData:
    a: float
    b: float
    c: float

    @property
    def trace(self) -> float:
        return self.a + self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])


def phi(h: HessianData, x):
    return -x * x + (h.a - h.c) * x + h.a * h.c - h.b * h.b


def _check_mu(mu: float) -> float:
    if not mu >= 0:
        raise ValueError("mu must be nonnegative")
    return float(mu)


def tk_matrix(h: HessianData, mu: float) -> np.ndarray:
    s = 1.0 + _check_mu(mu)
    return np.array([[1.0 - h.a / s, -h.b / s], [-h.b / s, -1.0 - h.c / s]])


def tk_det(h: HessianData, mu: float) -> float:
    s = 1.0 + _check_mu(mu)
    return -1.0 + (h.a - h.c) / s + (h.a * h.c - h.b * h.b) / (s * s)


def tk_eigen(h: HessianData, mu: float) -> tuple:
    """Eigenvalues (alpha1 <= alpha2) of T(mu).

    The larger-magnitude root comes from the half-trace and radius; the other
    is recovered from the determinant so that neither Viete identity loses
    digits to cancellation.
    """
    s = 1.0 + _check_mu(mu)
    half_tr = -(h.a + h.c) / (2 * s)
    radius = math.hypot(1.0 - (h.a - h.c) / (2 * s), h.b / s)
    big = half_tr + math.copysign(radius, half_tr) if half_tr != 0 else radius
    small = tk_det(h, mu) / big if big != 0 else 0.0
    return (small, big) if small <= big else (big, small)


def is_degenerate(h: HessianData, mu: float) -> bool:
    return abs(tk_det(h, mu)) < DEGENERACY_TOL


def morse_index(h: HessianData, mu: float) -> int:
    if is_degenerate(h, mu):
        raise DegenerateError(f"T(mu) is singular at mu={mu!r}")
    a1, a2 = tk_eigen(h, mu)
    return int(a1 < 0) + int(a2 < 0)


def interval_data(h: HessianData) -> tuple:
    """(delta, beta1, beta2); the interval collapses to (0, 0) when delta < 0."""
    delta = (h.a + h.c) ** 2 - 4 * h.b * h.b
    if delta < 0:
        return delta, 0.0, 0.0
    root = math.sqrt(delta)
    return delta, (h.a - h.c - root) / 2 - 1, (h.a - h.c + root) / 2 - 1


def _require_coverage(spectrum: Spectrum, bound: float) -> None:
    if spectrum.mu_max < bound:
        raise CoverageError(f"spectrum computed up to {spectrum.mu_max} but {bound} is needed")


def p_set(h: HessianData, spectrum: Spectrum) -> list:
    _, b1, b2 = interval_data(h)
    _require_coverage(spectrum, b2)
    return [r for r in spectrum if b1 < r.mu < b2]


def _broken(spectrum, group) -> list:
    return [(r, broken_block(r, group)) for r in spectrum]


def nondegeneracy(h: HessianData, spectrum: Spectrum, group: GroupSpec) -> tuple:
    """(i0_ok, tilde_i0_ok).

    phi(s) < 0 for s > 1 + beta2, so only eigenvalues up to beta2 can be
    singular; anything beyond is skipped.
    """
    _, _, b2 = interval_data(h)
    _require_coverage(spectrum, b2)
    i0 = tilde = True
    for r in spectrum:
        if r.mu > b2 + 1e-6 * (1 + abs(b2)):
            break
        if is_degenerate(h, r.mu):
            i0 = False
            if not broken_block(r, group).is_zero:
                tilde = False
    return i0, tilde


def degree_from_morse(h: HessianData, spectrum: Spectrum, group: GroupSpec) -> RingElement:
    """deg(-Id, V2) * deg(-Id, V0)^-1 with V_j the broken blocks of Morse index j."""
    _, _, b2 = interval_data(h)
    _require_coverage(spectrum, b2)
    v2, v0 = [], []
    for r, blk in _broken(spectrum, group):
        if blk.is_zero:
            continue
        idx = morse_index(h, r.mu)
        if idx == 2:
            v2.append(blk)
        elif idx == 0:
            v0.append(blk)
    return deg_minus_id(*combine_blocks(v2)) * invert(deg_minus_id(*combine_blocks(v0)))


def degree_from_pset(h: HessianData, spectrum: Spectrum, group: GroupSpec) -> RingElement:
    """Two-case P-set formula: deg(-Id) of the broken part of P, inverted when a+c<0."""
    ps = p_set(h, spectrum)
    if not ps:
        return UNIT
    d = deg_minus_id(*combine_blocks(broken_block(r, group) for r in ps))
    return invert(d) if h.trace < 0 else d


@dataclass
class CriticalPointRecord:
    z: tuple
    hessian: HessianData
    delta: float
    beta1: float
    beta2: float
    p_set: list
    morse_by_mu: dict
    i0_ok: bool
    tilde_i0_ok: bool
    degree: Optional[RingElement] = None
    p_blocks: list = field(default_factory=list)

    @property
    def trace(self) -> float:
        return self.hessian.trace

    @property
    def p_rep_nontrivial(self) -> bool:
        return is_nontrivial_rep(self.p_blocks)


def make_record(z, h: HessianData, spectrum: Spectrum, group: GroupSpec) -> CriticalPointRecord:
    delta, b1, b2 = interval_data(h)
    ps = p_set(h, spectrum)
    i0, tilde = nondegeneracy(h, spectrum, group)
    morse = {}
    for mu in spectrum.distinct_values():
        if mu > max(b2, 0.0):
            break
        if not is_degenerate(h, mu):
            morse[mu] = morse_index(h, mu)
    rec = CriticalPointRecord(
        z=tuple(float(v) for v in z), hessian=h, delta=delta, beta1=b1, beta2=b2,
        p_set=ps, morse_by_mu=morse, i0_ok=i0, tilde_i0_ok=tilde,
        p_blocks=[broken_block(r, group) for r in ps],
    )
    if tilde:
        rec.degree = degree_from_morse(h, spectrum, group)
    return rec


def degree_at(record: CriticalPointRecord, spectrum: Spectrum, group: GroupSpec) -> RingElement:
    if not record.tilde_i0_ok:
        raise PreconditionError(f"linearization at z={record.z} is degenerate on a broken block")
    return degree_from_morse(record.hessian, spectrum, group)


# ---------------------------------------------------------------------------
# theorem checkers

@dataclass
class Verdict:
    theorem: str
    holds: bool
    witnesses: dict
    degrees: Optional[tuple] = None
    implication: str = ""
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.holds and not (self.degrees and degrees_distinct(*self.degrees)):
            raise ValueError("a positive verdict needs two distinct degrees")


def _pair_stage(r1: CriticalPointRecord, r2: CriticalPointRecord, need_full_i0: bool) -> tuple:
    """(stage reached, reason); stage 3 means every hypothesis holds."""
    if need_full_i0 and not (r1.i0_ok and r2.i0_ok):
        return 0, "phi vanishes on 1+spectrum"
    if not (r1.tilde_i0_ok and r2.tilde_i0_ok):
        return 0, "degenerate linearization"
    if not ((r1.p_set and r1.p_rep_nontrivial) or (r2.p_set and r2.p_rep_nontrivial)):
        return 1, "representation trivial"
    if not degrees_distinct(r1.degree, r2.degree):
        return 2, "degrees equal"
    return 3, ""


def _opposite_sign_check(theorem: str, points: Sequence[CriticalPointRecord], need_full_i0: bool) -> Verdict:
    if len(points) < 2:
        raise PreconditionError("at least two critical points are needed")
    neg = [i for i, p in enumerate(points) if p.trace < 0]
    pos = [i for i, p in enumerate(points) if p.trace > 0]
    if not neg or not pos:
        return Verdict(theorem, False, {"reason": "sign condition unsatisfiable"})
    best = None
    tried = []
    for i in neg:
        for j in pos:
            stage, reason = _pair_stage(points[i], points[j], need_full_i0)
            tried.append({"pair": [i, j], "reason": reason or "ok"})
            if best is None or stage > best[0]:
                best = (stage, reason, i, j)
            if stage == 3:
                break
        if best[0] == 3:
            break
    stage, reason, i, j = best
    degs = (points[i].degree, points[j].degree) if stage >= 1 else None
    witnesses = {"pair": [i, j], "z": [list(points[i].z), list(points[j].z)], "pairs_tried": tried}
    witnesses["p_set_mu"] = [[r.mu for r in points[i].p_set], [r.mu for r in points[j].p_set]]
    if stage == 3:
        return Verdict(theorem, True, witnesses, degs, GLOBAL_IMPLICATION, [SIGN_CONVENTION_NOTE])
    witnesses["reason"] = reason
    return Verdict(theorem, False, witnesses, degs, "", [SIGN_CONVENTION_NOTE])


def check_lam1(points: Sequence[CriticalPointRecord], spectrum: Spectrum, group: GroupSpec) -> Verdict:
    """Opposite trace signs at two nondegenerate points with a nontrivial P-representation.

    The degree inequality is always confirmed in the ring, not inferred.
    """
    return _opposite_sign_check("lam1", points, need_full_i0=False)


def check_example_ball(points: Sequence[CriticalPointRecord], spectrum: Spectrum, group: GroupSpec) -> Verdict:
    """Same as check_lam1 but requires phi(., z) to avoid 1+spectrum entirely."""
    v = _opposite_sign_check("example_ball", points, need_full_i0=True)
    if v.holds:
        v.implication = (GLOBAL_IMPLICATION + "; a connected set in H^K minus H^G solves the forced "
                         "system for some G-invariant f")
    return v


def _shared_sign(points) -> None:
    signs = {np.sign(p.trace) for p in points}
    if 0 in signs or len(signs) > 1:
        raise PreconditionError("points must share the sign of a+c; use check_lam1 for mixed signs")


def _window_blocks(spectrum, group, lo, hi) -> list:
    return [broken_block(r, group) for r in spectrum if lo < r.mu < hi]


def _trivial_even(blocks) -> bool:
    return not is_nontrivial_rep(blocks) and all(b.trivial_dim % 2 == 0 for b in blocks)


def _in_gap(spectrum, lo, hi) -> bool:
    """True if some mu_j < lo <= hi < mu_{j+1} for consecutive distinct eigenvalues."""
    vals = spectrum.distinct_values()
    return any(vals[k] < lo and hi < vals[k + 1] for k in range(len(vals) - 1))


def _window_check(theorem: str, points, spectrum, group, open_idx: int) -> Verdict:
    """Shared logic: ``open_idx`` selects which beta window must contain a nontrivial block."""
    if not points:
        raise PreconditionError("no critical points")
    _shared_sign(points)
    betas = [(p.beta1, p.beta2) for p in points]
    other = 1 - open_idx
    i1 = min(range(len(points)), key=lambda k: betas[k][open_idx])
    i2 = max(range(len(points)), key=lambda k: betas[k][open_idx])
    m_open, M_open = betas[i1][open_idx], betas[i2][open_idx]
    m_other = min(b[other] for b in betas)
    M_other = max(b[other] for b in betas)
    _require_coverage(spectrum, max(M_open, M_other))
    witnesses = {
        "extremal_points": [i1, i2],
        "m1": min(b[0] for b in betas), "M1": max(b[0] for b in betas),
        "m2": min(b[1] for b in betas), "M2": max(b[1] for b in betas),
    }
    notes = [SIGN_CONVENTION_NOTE, TRIVIAL_BLOCK_NOTE]
    if not m_open < M_open:
        witnesses["reason"] = "m=M, empty window"
        return Verdict(theorem, False, witnesses, None, "", notes)
    r1, r2 = points[i1], points[i2]
    if not (r1.tilde_i0_ok and r2.tilde_i0_ok):
        witnesses["reason"] = "degenerate linearization"
        return Verdict(theorem, False, witnesses, None, "", notes)
    nontrivial = [r.mu for r in spectrum if m_open < r.mu < M_open
                  and is_nontrivial_rep([broken_block(r, group)])]
    witnesses["nontrivial_mu"] = nontrivial
    degs = (r1.degree, r2.degree)
    if not nontrivial:
        witnesses["reason"] = "representation trivial"
        return Verdict(theorem, False, witnesses, degs, "", notes)
    case1 = _trivial_even(_window_blocks(spectrum, group, m_other, M_other))
    case2 = _in_gap(spectrum, m_other, M_other)
    witnesses["cases"] = [k for k, ok in ((1, case1), (2, case2)) if ok]
    if not (case1 or case2):
        witnesses["reason"] = "second window meets a nontrivial or odd block"
        return Verdict(theorem, False, witnesses, degs, "", notes)
    if not degrees_distinct(*degs):
        witnesses["reason"] = "degrees equal"
        return Verdict(theorem, False, witnesses, degs, "", notes)
    return Verdict(theorem, True, witnesses, degs, GLOBAL_IMPLICATION, notes)


def check_lam2(points, spectrum: Spectrum, group: GroupSpec) -> Verdict:
    """Nontrivial broken block strictly between min and max of beta1."""
    return _window_check("lam2", points, spectrum, group, open_idx=0)


def check_lam3(points, spectrum: Spectrum, group: GroupSpec) -> Verdict:
    """Nontrivial broken block strictly between min and max of beta2."""
    return _window_check("lam3", points, spectrum, group, open_idx=1)


CHECKERS = {"lam1": check_lam1, "lam2": check_lam2, "lam3": check_lam3, "example_ball": check_example_ball}
