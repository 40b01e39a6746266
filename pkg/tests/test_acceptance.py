"""Acceptance criteria, each at its stated tolerance and runtime bound.

One PASS/FAIL line per criterion is written to the terminal when the module
finishes.  Runtime bounds apply to the package calls; where an independent
oracle runs alongside, its time is reported in the detail column.
"""
import functools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import block_diag
from scipy.optimize import brentq

import oracles
from symbreak.continuation import continue_branch
from symbreak.criteria import (
    DEGENERACY_TOL,
    HessianData,
    check_lam1,
    degree_from_morse,
    degree_from_pset,
    interval_data,
    make_record,
    nondegeneracy,
    phi,
    tk_eigen,
    tk_matrix,
)
from symbreak.euler_ring import UNIT, RingElement, from_text, gamma, invert
from symbreak.galerkin import (
    Path,
    assemble_A,
    build_model,
    constant_lambda,
    detect_singular_points,
    jacobian,
    residual_symmetry_check,
    rotate,
)
from symbreak.isotypic import GroupSpec
from symbreak.polynomial import Polynomial2, demo_potential
from symbreak.spectrum import DomainSpec, eigenfunction_eval, neumann_spectrum

DISC = DomainSpec("disc")
SO2 = GroupSpec("SO2_on_disc")
Z2 = GroupSpec("SO2_on_disc", 2)
H1 = HessianData(4.3, 0.0, -9.0)
H2 = HessianData(-4.3, 0.0, 9.0)

RESULTS = {}
TITLES = {
    1: "spectrum: first five disc Neumann eigenvalues",
    2: "euler ring: randomized axioms and inverses",
    3: "criteria: oracle equivalence on 1000 Hessians",
    4: "lam1 end-to-end",
    5: "galerkin linearization equals T_k direct sum",
    6: "crossing prediction",
    7: "branch existence (symmetry breaking)",
    8: "equivariance regression",
}


def criterion(n):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                msg = str(exc).strip().splitlines()[0] if str(exc).strip() else ""
                RESULTS[n] = ("FAIL", f"{type(exc).__name__}: {msg}"[:160])
                raise
            RESULTS[n] = ("PASS", detail or "")
        return wrapper
    return deco


@pytest.fixture(scope="module", autouse=True)
def acceptance_summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = ["", "acceptance criteria:"]
    for n, title in TITLES.items():
        status, detail = RESULTS.get(n, ("NOT RUN", ""))
        lines.append(f"  criterion {n} [{status}] {title}" + (f"  ({detail})" if detail else ""))
    for line in lines:
        if tr is not None:
            tr.write_line(line)
        else:
            print(line)


class Timer:
    def __init__(self):
        self.elapsed = 0.0

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed += time.perf_counter() - self._t0


def quadratic(h):
    return Polynomial2.from_terms([(h.a / 2, (2, 0)), (h.b, (1, 1)), (h.c / 2, (0, 2))])


# ---------------------------------------------------------------------------

@criterion(1)
def test_criterion_1_spectrum():
    anchors = [0.0, 3.38996, 9.32838, 14.68198, 17.65000]
    with Timer() as tm:
        spec = neumann_spectrum(DISC, 18.0)
    got = [r.mu for r in spec][:5]
    assert tm.elapsed < 1.0
    ref = [0.0]
    for m in range(4):
        ref += [z * z for z in oracles.disc_deriv_zeros(m, 4.3)]
    ref = sorted(float(v) for v in ref)[:5]
    err = max(abs(a - b) for a, b in zip(got, ref))
    assert err < 1e-8
    # the listed anchors are squares of zeros rounded to six digits
    assert max(abs(a - b) for a, b in zip(got, anchors)) < 5e-5
    wavenumbers = [1.84118, 3.05424, 3.83171, 4.20119]
    assert max(abs(math.sqrt(a) - b) for a, b in zip(got[1:], wavenumbers)) < 1e-5
    return f"max |mu - oracle| = {err:.1e}, {tm.elapsed:.3f} s"


def _random_element(rng, unit=None):
    k = rng.integers(0, 6)
    keys = rng.integers(1, 41, size=k)
    vals = rng.integers(-10, 11, size=k)
    u = int(rng.integers(-10, 11)) if unit is None else unit
    return RingElement.from_coeffs(u, {int(a): int(b) for a, b in zip(keys, vals)})


@criterion(2)
def test_criterion_2_ring():
    rng = np.random.default_rng(20240)
    samples = []
    for _ in range(10_000):
        x, y, z = (_random_element(rng) for _ in range(3))
        w = _random_element(rng, unit=int(rng.choice([1, -1])))
        samples.append((x, y, z, w))
    checks = 0
    with Timer() as tm:
        for x, y, z, w in samples:
            assert (x * y) * z == x * (y * z)
            assert x * (y + z) == x * y + x * z
            assert x * y == y * x and x + y == y + x
            assert UNIT * x == x
            assert w * invert(w) == UNIT
            checks += 1
        for m in range(1, 33):
            assert (UNIT - gamma(m)) * (UNIT + gamma(m)) == UNIT
    assert checks == 10_000
    assert tm.elapsed < 1.0
    return f"{checks} randomized checks + 32 pairs, {tm.elapsed:.3f} s"


def _exact_viete_errors(h, mu, a1, a2):
    tr, det = oracles.exact_tk_invariants(h.a, h.b, h.c, mu)
    s = 1 + mu
    # relative to the magnitudes of the summands of each identity
    sum_scale = (abs(h.a) + abs(h.c)) / s + abs(a1) + abs(a2)
    prod_scale = 1 + abs(h.a - h.c) / s + (abs(h.a * h.c) + h.b * h.b) / s**2
    return (abs(float(Fraction(a1 + a2) - tr)) / sum_scale,
            abs(float(Fraction(a1 * a2) - det)) / prod_scale, det)


@criterion(3)
def test_criterion_3_criteria_oracles():
    t_start = time.perf_counter()
    rng = np.random.default_rng(33)
    hs = [HessianData(*rng.uniform(-10, 10, 3)) for _ in range(1000)]
    impl, orac = Timer(), Timer()
    with impl:
        spec = neumann_spectrum(DISC, 200.0)
    mus = spec.distinct_values()
    worst_sum = worst_prod = 0.0
    same_sign_checked = degrees_checked = 0
    for h in hs:
        with impl:
            eig = [tk_eigen(h, mu) for mu in mus]
            _, b1, b2 = interval_data(h)
            phis = [phi(h, 1 + mu) for mu in mus]
        for mu, (a1, a2), p in zip(mus, eig, phis):
            with orac:
                es, ep, det = _exact_viete_errors(h, mu, a1, a2)
                band = abs(float(oracles.exact_phi(h.a, h.b, h.c, 1 + mu))) < DEGENERACY_TOL * (1 + mu) ** 2
            worst_sum, worst_prod = max(worst_sum, es), max(worst_prod, ep)
            if band:
                continue
            same = a1 * a2 > 0
            assert same == (det > 0) == (p > 0) == (b1 < mu < b2)
            same_sign_checked += 1
        with impl:
            if nondegeneracy(h, spec, SO2)[1]:
                assert degree_from_morse(h, spec, SO2) == degree_from_pset(h, spec, SO2)
                degrees_checked += 1
    assert worst_sum < 1e-12 and worst_prod < 1e-12
    assert degrees_checked > 950
    assert impl.elapsed < 10.0
    # the bound also holds with the exact oracle included
    assert time.perf_counter() - t_start < 10.0
    return (f"Viete {max(worst_sum, worst_prod):.1e}, {same_sign_checked} sign checks, "
            f"{degrees_checked} degree pairs, {impl.elapsed:.2f} s (oracle {orac.elapsed:.2f} s)")


@criterion(4)
def test_criterion_4_lam1():
    with Timer() as tm:
        spec = neumann_spectrum(DISC, 60.0)
        recs = [make_record((1, 0), H1, spec, SO2), make_record((0, 1), H2, spec, SO2)]
        v = check_lam1(recs, spec, SO2)
        recs2 = [make_record((1, 0), H1, spec, Z2), make_record((0, 1), H2, spec, Z2)]
        v2 = check_lam1(recs2, spec, Z2)
    assert tm.elapsed < 1.0
    assert recs[0].degree == from_text("I+g_1") and recs[1].degree == UNIT
    assert v.holds and v.degrees == (from_text("I+g_1"), UNIT)
    assert recs2[0].degree == UNIT and recs2[1].degree == UNIT
    assert not v2.holds and v2.witnesses["reason"] == "representation trivial"
    return f"I+g_1 vs I holds; Z_2: I vs I, representation trivial; {tm.elapsed:.3f} s"


@criterion(5)
def test_criterion_5_linearization():
    worst = 0.0
    with Timer() as tm:
        for h in (H1, H2):
            m = build_model(quadratic(h), SO2, 30.0, quadrature=(64, 128))
            J = jacobian(m, np.zeros(m.n_broken), constant_lambda(m, (0.3, -0.6)))
            blocks = [np.kron(tk_matrix(h, m.broken_basis[i].record.mu), np.eye(2))
                      for i in range(0, m.n_broken, 4)]
            worst = max(worst, float(np.max(np.abs(J - block_diag(*blocks)))))
    assert worst < 1e-10
    assert tm.elapsed < 5.0
    return f"max entry error {worst:.1e}, {tm.elapsed:.2f} s"


@pytest.fixture(scope="module")
def demo():
    """Degree-4 potential realizing both Hessians, its model, path and mode-1 branch."""
    F = demo_potential()
    assert np.allclose(F.hessian(1.0, 0.0), [4.3, 0.0, -9.0])
    assert np.allclose(F.hessian(0.0, 1.0), [-4.3, 0.0, 9.0])
    t0 = time.perf_counter()
    model = build_model(F, SO2, 30.0)
    path = Path.constant_segment(model, (1.0, 0.0), (0.0, 1.0))
    crossings = detect_singular_points(model, path, 100)
    t_cross = time.perf_counter() - t0
    t0 = time.perf_counter()
    branch = continue_branch(model, path, crossings[0], steps=25) if crossings else None
    t_branch = time.perf_counter() - t0
    return {"F": F, "model": model, "path": path, "crossings": crossings, "branch": branch,
            "t_cross": t_cross, "t_branch": t_branch}


@criterion(6)
def test_criterion_6_crossings(demo):
    F, model = demo["F"], demo["model"]
    mu1 = neumann_spectrum(DISC, 4.0)[1].mu

    def g(t):
        z = np.array([1 - t, t])
        return phi(HessianData(*map(float, F.hessian(*z))), 1 + mu1)

    ts = np.linspace(0, 1, 2001)
    vals = [g(t) for t in ts]
    roots = [brentq(g, ts[k], ts[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
             for k in range(len(ts) - 1) if vals[k] * vals[k + 1] < 0]
    found = demo["crossings"]
    assert len(found) == len(roots) == 1
    c = found[0]
    assert c.mode == 1 and abs(c.mu - mu1) < 1e-12
    # bisection bracket: the block determinant changes sign across t* +- 1e-10
    idx = [i for i, b in enumerate(model.broken_basis) if b.mode == 1 and b.slot == 0]
    zero = np.zeros(model.n_broken)

    def block_det(t):
        J = jacobian(model, zero, demo["path"](t))
        return np.linalg.det(J[np.ix_(idx, idx)])

    assert block_det(c.t - 1e-10) * block_det(c.t + 1e-10) < 0
    err = abs(c.t - roots[0])
    assert err < 1e-9
    assert demo["t_cross"] < 30.0
    return f"t* = {c.t:.12f}, |t - oracle| = {err:.1e}, {demo['t_cross']:.2f} s"


@criterion(7)
def test_criterion_7_branch(demo):
    model, branch = demo["model"], demo["branch"]
    assert branch is not None
    pts = branch.points
    assert len(pts) >= 20
    norms = [p.norm_u for p in pts]
    assert norms[0] < 1e-2 and all(b > a for a, b in zip(norms, norms[1:]))
    assert max(p.residual_broken for p in pts) < 1e-9
    assert max(p.symmetry_leak for p in pts) < 1e-9
    # f lives on the radial basis; its field is constant along circles
    assert all(b.record.angular_index == 0 for b in model.fixed_basis)
    r = np.full(16, 0.6)
    theta = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    for p in pts:
        for comp in (1, 2):
            field = sum(fi * eigenfunction_eval(b.record, b.slot, (r, theta))
                        for fi, b in zip(p.f_recovered, model.fixed_basis) if b.comp == comp)
            assert np.ptp(field) < 1e-12
    fine = model.with_quadrature(96, 192)
    worst = 0.0
    for p in pts:
        f_fine, _ = residual_symmetry_check(fine, p.u, p.lam)
        worst = max(worst, np.linalg.norm(f_fine - p.f_recovered) / np.linalg.norm(f_fine))
    assert worst < 1e-6
    total = demo["t_cross"] + demo["t_branch"]
    assert total < 120.0
    return (f"{len(pts)} points, |u| {norms[0]:.1e} -> {norms[-1]:.2f}, refinement {worst:.1e}, "
            f"{total:.1f} s")


@criterion(8)
def test_criterion_8_equivariance(demo):
    model, branch = demo["model"], demo["branch"]
    assert branch is not None
    worst = 0.0
    for p in branch.points:
        A = assemble_A(model, p.u, p.lam)
        A_rot = assemble_A(model, rotate(model, p.u, np.pi / 2), p.lam)
        worst = max(worst, float(np.max(np.abs(A_rot - rotate(model, A, np.pi / 2)))),
                    abs(np.linalg.norm(A_rot) - np.linalg.norm(A)))
    assert worst < 1e-10
    return f"max change {worst:.1e} over {len(branch.points)} points"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
