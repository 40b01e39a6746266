"""Fixed-point dimensions and the SO(2)-isotypic content of broken blocks.

For an eigenspace V(mu) the *broken block* is V(mu)^K minus V(mu)^G: the
directions fixed by the subgroup K but not by the whole group G.  The degree
formulas only need its decomposition into copies of the SO(2) irreducibles
(the trivial line, and planes on which SO(2) acts with kernel Z_m).
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import InputError
from .spectrum import EigenRecord

AMBIENTS = {"SO2_on_disc": "disc", "SO3_on_ball": "ball"}


@dataclass(frozen=True)
class GroupSpec:
    ambient: str
    k_order: int = 1  # K = Z_q; q = 1 is the trivial subgroup

    def __post_init__(self):
        if self.ambient not in AMBIENTS:
            raise InputError(f"unknown ambient group {self.ambient!r}")
        if int(self.k_order) != self.k_order or self.k_order < 1:
            raise InputError("cyclic subgroup order must be a positive integer")

    @property
    def domain_kind(self) -> str:
        return AMBIENTS[self.ambient]

    @property
    def subgroup_label(self) -> str:
        return "trivial" if self.k_order == 1 else f"cyclic({self.k_order})"

    @classmethod
    def parse(cls, ambient: str, subgroup: str) -> "GroupSpec":
        """Build from labels such as ``"trivial"`` or ``"cyclic(3)"``."""
        if subgroup == "trivial":
            return cls(ambient, 1)
        m = re.fullmatch(r"cyclic\((\d+)\)", subgroup.replace(" ", ""))
        if not m:
            raise InputError(f"cannot parse subgroup {subgroup!r}")
        return cls(ambient, int(m.group(1)))


@dataclass(frozen=True)
class IsotypicBlock:
    mu: float
    trivial_dim: int = 0
    modes: dict = field(default_factory=dict)  # m -> number of 2-dim copies with kernel Z_m

    @property
    def dim(self) -> int:
        return self.trivial_dim + 2 * sum(self.modes.values())

    @property
    def is_zero(self) -> bool:
        return self.dim == 0


def _check(record: EigenRecord, group: GroupSpec) -> None:
    if record.domain.kind != group.domain_kind:
        raise InputError(f"{group.ambient} does not act on a {record.domain.kind}")


def fixed_dim(record: EigenRecord, group: GroupSpec, which: str) -> int:
    """dim V(mu)^K (``which="K"``) or dim V(mu)^G (``which="G"``)."""
    _check(record, group)
    if which not in ("K", "G"):
        raise InputError("which must be 'K' or 'G'")
    n, q = record.angular_index, group.k_order
    if which == "G":
        return 1 if n == 0 else 0
    if group.domain_kind == "disc":
        if n == 0:
            return 1
        return 2 if n % q == 0 else 0
    # rotations about the axis act on the azimuthal order-j harmonics
    return 1 + 2 * (n // q)


def broken_block(record: EigenRecord, group: GroupSpec) -> IsotypicBlock:
    _check(record, group)
    n, q = record.angular_index, group.k_order
    if n == 0:
        return IsotypicBlock(record.mu)
    if group.domain_kind == "disc":
        return IsotypicBlock(record.mu, 0, {n: 1} if n % q == 0 else {})
    # ball, degree l >= 1: axial line is K-fixed but not G-fixed
    return IsotypicBlock(record.mu, 1, {j: 1 for j in range(q, n + 1, q)})


def is_nontrivial_rep(blocks) -> bool:
    return any(any(v for v in b.modes.values()) for b in blocks)


def combine_blocks(blocks) -> tuple:
    """Direct sum of blocks as ``(trivial_total, {m: multiplicity})``."""
    trivial = 0
    modes: Counter = Counter()
    for b in blocks:
        trivial += b.trivial_dim
        modes.update(b.modes)
    return trivial, {m: j for m, j in sorted(modes.items()) if j}
