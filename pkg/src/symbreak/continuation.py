"""Pseudo-arclength continuation of branches bifurcating from A(0, lam(t)) = 0.

The branch is followed inside the subspace fixed by the reflection through
the seed angle alpha: for every mode pair the single direction
cos(m(theta - alpha)).  The reduced operator preserves this subspace, and in
it a simple crossing has a one-dimensional kernel, so the bordered system is
regular along the branch.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .galerkin import (
    Crossing,
    GalerkinModel,
    Path,
    assemble_A,
    jacobian,
    jacobian_lambda,
    kernel_vector,
    mode_amplitudes,
    residual_symmetry_check,
    rotate,
)

MAX_NEWTON = 25
ABS_TOL = 1e-12
REL_TOL = 1e-10


@dataclass
class BranchPoint:
    arclength: float
    t: float
    u: np.ndarray
    lam: np.ndarray
    residual_broken: float
    f_recovered: np.ndarray
    symmetry_leak: float

    @property
    def norm_u(self) -> float:
        return float(np.linalg.norm(self.u))


@dataclass
class Branch:
    crossing: Crossing
    angle: float
    points: list = field(default_factory=list)
    folds: list = field(default_factory=list)
    terminated: str = ""


def reflection_basis(model: GalerkinModel, angle: float) -> np.ndarray:
    """Orthonormal columns spanning the cos(m(theta - angle)) directions."""
    cols = []
    for i, b in enumerate(model.broken_basis):
        if b.slot == 0:
            e = np.zeros(model.n_broken)
            e[i] = 1.0
            cols.append(rotate(model, e, angle))
    return np.array(cols).T


def _system(model, path, Q, x):
    v, t = x[:-1], float(np.clip(x[-1], 0.0, 1.0))
    u, lam = Q @ v, path(t)
    G = Q.T @ assemble_A(model, u, lam)
    Gv = Q.T @ jacobian(model, u, lam) @ Q
    Gt = Q.T @ jacobian_lambda(model, u, lam) @ path.derivative(t)
    return G, np.column_stack([Gv, Gt])


def _tangent(DG, prev):
    M = np.vstack([DG, prev])
    rhs = np.zeros(M.shape[0])
    rhs[-1] = 1.0
    tau = np.linalg.solve(M, rhs)
    return tau / np.linalg.norm(tau)


def _correct(model, path, Q, x_pred, tau):
    x = x_pred.copy()
    for _ in range(MAX_NEWTON):
        G, DG = _system(model, path, Q, x)
        F = np.append(G, tau @ (x - x_pred))
        M = np.vstack([DG, tau])
        dx = np.linalg.solve(M, -F)
        x = x + dx
        if np.linalg.norm(dx) <= ABS_TOL + REL_TOL * np.linalg.norm(x):
            G, _ = _system(model, path, Q, x)
            if np.linalg.norm(G) < 1e-10:
                return x
    raise ConvergenceError("corrector did not converge")


def seed_amplitude(model: GalerkinModel, path: Path, crossing: Crossing, angle: float = 0.0) -> float:
    """1e-3 over the smallest nonzero singular value of the bordered Jacobian at the crossing."""
    Q = reflection_basis(model, angle)
    x = np.append(np.zeros(Q.shape[1]), crossing.t)
    _, DG = _system(model, path, Q, x)
    border = np.zeros(DG.shape[1])
    border[-1] = 1.0  # tangent of the trivial branch
    s = np.linalg.svd(np.vstack([DG, border]), compute_uv=False)
    nonzero = s[s > 1e-8 * s[0]]
    return 1e-3 / nonzero[-1]


def _make_point(model, path, Q, x, arclength) -> BranchPoint:
    u, t = Q @ x[:-1], float(x[-1])
    lam = path(t)
    f, leak = residual_symmetry_check(model, u, lam)
    res = float(np.linalg.norm(assemble_A(model, u, lam)))
    return BranchPoint(arclength, t, u, lam, res, f, leak)


def continue_branch(model: GalerkinModel, path: Path, crossing: Crossing, steps: int = 25,
                    step_size: float = 0.05, angle: float = 0.0, min_step: float = 1e-6) -> Branch:
    """Follow the branch bifurcating at ``crossing`` for ``steps`` accepted points.

    The first point is seeded along the kernel vector; later points use a
    tangent predictor and a Newton corrector on the arclength-bordered system,
    halving the step after a failed correction.
    """
    branch = Branch(crossing, angle)
    Q = reflection_basis(model, angle)
    kern = Q.T @ kernel_vector(model, path, crossing, angle)
    if np.linalg.norm(kern) < 0.99:
        raise PreconditionError("kernel vector does not lie in the reflection subspace")
    kern /= np.linalg.norm(kern)
    x = np.append(np.zeros(Q.shape[1]), crossing.t)
    tau = np.append(kern, 0.0)
    ds = min(seed_amplitude(model, path, crossing, angle), step_size)
    s_total = 0.0
    first = True
    while len(branch.points) < steps:
        x_pred = x + ds * tau
        if not 0.0 <= x_pred[-1] <= 1.0:
            branch.terminated = "left the path parameter range"
            break
        try:
            x_new = _correct(model, path, Q, x_pred, tau)
        except (ConvergenceError, np.linalg.LinAlgError):
            ds /= 2
            if ds < min_step:
                branch.terminated = "step size underflow"
                break
            continue
        s_total += float(np.linalg.norm(x_new - x))
        _, DG = _system(model, path, Q, x_new)
        tau_new = _tangent(DG, tau)
        if tau_new[-1] * tau[-1] < 0 and not first:
            branch.folds.append(float(x_new[-1]))
        x, tau = x_new, tau_new
        branch.points.append(_make_point(model, path, Q, x, s_total))
        if first:
            first = False
            ds = step_size / 4
        else:
            ds = min(step_size, ds * 1.5)
    return branch


def branch_rows(model: GalerkinModel, branch: Branch) -> list:
    modes = model.modes
    rows = []
    for p in branch.points:
        amps = mode_amplitudes(model, p.u)
        row = {"arclength": p.arclength, "t": p.t, "norm_u": p.norm_u}
        row.update({f"amp_m{m}": amps.get(m, 0.0) for m in modes})
        row.update({"norm_f": float(np.linalg.norm(p.f_recovered)), "symmetry_leak": p.symmetry_leak,
                    "residual_broken": p.residual_broken})
        rows.append(row)
    return rows


def write_branch_csv(model: GalerkinModel, branch: Branch, path) -> None:
    rows = branch_rows(model, branch)
    fields = ["arclength", "t", "norm_u"] + [f"amp_m{m}" for m in model.modes] + \
        ["norm_f", "symmetry_leak", "residual_broken"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: f"{v:.17g}" for k, v in r.items()})
