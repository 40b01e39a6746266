"""Pipeline orchestration: spectrum, isotypic data, criteria and optional verification.

``run`` returns a plain JSON-ready dictionary together with an exit status:

    0   some requested criterion holds
    10  no criterion holds and every critical point is nondegenerate
    20  no criterion holds and some critical point is degenerate on a broken block
"""
from __future__ import annotations

import json
import math
import os
import warnings

import jsonschema
import numpy as np
from scipy.optimize import brentq

from . import __version__, continuation
from .config import ProblemConfig, load_schema
from .criteria import (
    CHECKERS,
    DEGENERACY_TOL,
    SIGN_CONVENTION_NOTE,
    TRIVIAL_BLOCK_NOTE,
    CriticalPointRecord,
    HessianData,
    Verdict,
    interval_data,
    make_record,
    phi,
)
from .errors import ConfigurationError, PreconditionError
from .euler_ring import to_text
from .galerkin import Path, build_model, detect_singular_points
from .isotypic import GroupSpec, broken_block, fixed_dim
from .polynomial import Polynomial2, critical_points, grid_starts
from .spectrum import COINCIDENCE_RTOL, DomainSpec, Spectrum, neumann_spectrum

EXIT_POSITIVE = 0
EXIT_NEGATIVE = 10
EXIT_DEGENERATE = 20

RIESZ_NOTE = ("f_recovered is the Riesz representative, in the truncated H^G, of the G-invariant "
              "part of the gradient; it is not a pointwise right-hand side.")
#: margin added above the largest beta2 when the spectrum cutoff has to be extended
COVERAGE_MARGIN = 1.0
#: crossings found and predicted are paired when their parameters agree to this
MATCH_TOL = 1e-9


# ---------------------------------------------------------------------------
# problem setup

def problem_group(config: ProblemConfig) -> GroupSpec:
    return GroupSpec.parse(config["group"]["ambient"], config.subgroup)


def problem_polynomial(config: ProblemConfig) -> Polynomial2:
    return Polynomial2.from_terms([(t["coeff"], tuple(t["powers"])) for t in config["F"]["terms"]])


def critical_data(config: ProblemConfig) -> list:
    """(z, HessianData) for every critical point, in a deterministic order."""
    F = config["F"]
    if F["mode"] == "table":
        return [(tuple(float(v) for v in p["z"]), HessianData(p["a"], p["b"], p["c"])) for p in F["points"]]
    poly = problem_polynomial(config)
    if "points" in F:
        starts = np.array(F["points"], dtype=float)
    else:
        s = F["search"]
        starts = grid_starts(s["lo"], s["hi"], s["n"])
    out = []
    for z in critical_points(poly, starts):
        f11, f12, f22 = poly.hessian(z[0], z[1])
        out.append((tuple(float(v) for v in z), HessianData(float(f11), float(f12), float(f22))))
    return out


def effective_mu_max(requested: float, hessians) -> float:
    """Cutoff reaching past every beta2 so that all degrees are computable."""
    need = max((interval_data(h)[2] for h in hessians), default=0.0)
    if need < requested:
        return float(requested)
    return float(math.ceil(need + COVERAGE_MARGIN))


# ---------------------------------------------------------------------------
# report sections

def _block_json(blk) -> dict:
    return {"trivial_dim": blk.trivial_dim, "modes": {str(m): j for m, j in sorted(blk.modes.items())}}


def spectrum_table(spectrum: Spectrum) -> list:
    return [{"mu": r.mu, "angular_index": r.angular_index, "radial_index": r.radial_index,
             "eigenspace_dim": r.eigenspace_dim} for r in spectrum]


def decomposition_table(spectrum: Spectrum, group: GroupSpec) -> list:
    rows = spectrum_table(spectrum)
    for row, r in zip(rows, spectrum):
        row["dim_K"] = fixed_dim(r, group, "K")
        row["dim_G"] = fixed_dim(r, group, "G")
        row["broken"] = _block_json(broken_block(r, group))
    return rows


def record_json(index: int, rec: CriticalPointRecord) -> dict:
    h = rec.hessian
    return {
        "index": index,
        "z": list(rec.z),
        "hessian": {"a": h.a, "b": h.b, "c": h.c},
        "trace": rec.trace,
        "delta": rec.delta, "beta1": rec.beta1, "beta2": rec.beta2,
        "p_set_mu": [r.mu for r in rec.p_set],
        "p_rep_nontrivial": rec.p_rep_nontrivial,
        "morse_by_mu": [[mu, idx] for mu, idx in sorted(rec.morse_by_mu.items())],
        "i0_ok": rec.i0_ok,
        "tilde_i0_ok": rec.tilde_i0_ok,
        "degree": to_text(rec.degree) if rec.degree is not None else None,
    }


def verdict_json(v: Verdict) -> dict:
    return {
        "theorem": v.theorem,
        "holds": v.holds,
        "witnesses": _plain(v.witnesses),
        "degrees": [to_text(d) if d is not None else None for d in v.degrees] if v.degrees else None,
        "implication": v.implication,
        "notes": list(v.notes),
    }


def run_checks(checks, records, spectrum, group) -> list:
    out = []
    for name in checks:
        try:
            v = CHECKERS[name](records, spectrum, group)
        except PreconditionError as exc:
            v = Verdict(name, False, {"reason": f"precondition failed: {exc}"})
        out.append(v)
    return out


def exit_status(verdicts, records) -> tuple:
    """(exit code, one-line summary)."""
    if any(v.holds for v in verdicts):
        held = ", ".join(v.theorem for v in verdicts if v.holds)
        return EXIT_POSITIVE, f"criterion satisfied: {held}"
    bad = [i for i, r in enumerate(records) if not r.tilde_i0_ok]
    if bad:
        return EXIT_DEGENERATE, f"degenerate linearization at critical points {bad}"
    if records and all(not r.p_set for r in records):
        return EXIT_NEGATIVE, "no criterion satisfied: all P(z) empty"
    reasons = sorted({v.witnesses.get("reason", "") for v in verdicts} - {""})
    return EXIT_NEGATIVE, "no criterion satisfied: " + "; ".join(reasons) if reasons else "no criteria requested"


# ---------------------------------------------------------------------------
# verification

def predicted_crossings(F: Polynomial2, model, z1, z2, samples: int) -> list:
    """Roots in t of phi(1 + mu, Hess F(z(t))) for each broken eigenvalue, by sampling and brentq."""
    z1, z2 = np.asarray(z1, float), np.asarray(z2, float)

    def g(t, mu):
        z = (1 - t) * z1 + t * z2
        f11, f12, f22 = F.hessian(z[0], z[1])
        return phi(HessianData(float(f11), float(f12), float(f22)), 1.0 + mu)

    ts = np.linspace(0.0, 1.0, samples + 1)
    out = []
    for rec in sorted({b.record for b in model.broken_basis}, key=lambda r: (r.mu, r.angular_index)):
        vals = np.array([g(t, rec.mu) for t in ts])
        for k in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            t_star = brentq(g, ts[k], ts[k + 1], args=(rec.mu,), xtol=1e-14, rtol=1e-15)
            out.append({"t": float(t_star), "mode": rec.angular_index, "mu": rec.mu,
                        "radial_index": rec.radial_index})
    return sorted(out, key=lambda c: (c["t"], c["mode"]))


def _default_path(verdicts, records) -> tuple:
    for v in verdicts:
        if v.holds and "pair" in v.witnesses:
            i, j = v.witnesses["pair"]
            return records[i].z, records[j].z
    if len(records) < 2:
        raise ConfigurationError("verify/path: needed when fewer than two critical points exist")
    return records[0].z, records[1].z


def verification(config: ProblemConfig, records, verdicts, group, out_dir=None) -> dict:
    vcfg = config["verify"]
    F = problem_polynomial(config)
    if "path" in vcfg:
        z1, z2 = tuple(vcfg["path"]["from"]), tuple(vcfg["path"]["to"])
    else:
        z1, z2 = _default_path(verdicts, records)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = build_model(F, group, vcfg["mu_max"], tuple(vcfg["quadrature"]),
                            radius=config["domain"]["radius"], pairing=vcfg["pairing"],
                            critical_hessians=[r.hessian for r in records])
        path = Path.constant_segment(model, z1, z2)
        found = detect_singular_points(model, path, samples=vcfg["samples"])
    predicted = predicted_crossings(F, model, z1, z2, vcfg["samples"])
    found_json = [{"t": c.t, "mode": c.mode, "mu": c.mu, "radial_index": c.radial_index} for c in found]
    matched = len(found) == len(predicted) and all(
        f["mode"] == p["mode"] and abs(f["t"] - p["t"]) < MATCH_TOL for f, p in zip(found_json, predicted))
    branches = []
    for k, c in enumerate(found[:vcfg["max_branches"]]):
        br = continuation.continue_branch(model, path, c, steps=vcfg["steps"], step_size=vcfg["step_size"])
        pts = br.points
        entry = {
            "crossing": k, "mode": c.mode, "points": len(pts),
            "max_residual_broken": max((p.residual_broken for p in pts), default=0.0),
            "max_symmetry_leak": max((p.symmetry_leak for p in pts), default=0.0),
            "norm_u_first": pts[0].norm_u if pts else 0.0,
            "norm_u_last": pts[-1].norm_u if pts else 0.0,
            "t_last": pts[-1].t if pts else c.t,
            "max_norm_f": max((float(np.linalg.norm(p.f_recovered)) for p in pts), default=0.0),
            "folds": list(br.folds), "terminated": br.terminated, "file": None,
        }
        if out_dir is not None:
            name = f"branch_{k}_m{c.mode}.csv"
            continuation.write_branch_csv(model, br, os.path.join(out_dir, name))
            entry["file"] = name
        branches.append(entry)
    return {
        "path": {"from": list(map(float, z1)), "to": list(map(float, z2))},
        "model": {"mu_max": model.mu_max, "quadrature": list(model.quadrature_orders),
                  "pairing": model.pairing, "n_broken": model.n_broken, "n_fixed": model.n_fixed,
                  "modes": list(model.modes)},
        "crossings_found": found_json,
        "crossings_predicted": predicted,
        "crossings_match": matched,
        "branches": branches,
        "warnings": sorted({str(w.message) for w in caught}),
        "notes": [RIESZ_NOTE],
    }


# ---------------------------------------------------------------------------
# driver

def prepare(config: ProblemConfig, mu_max: float | None = None) -> tuple:
    """(group, critical data, spectrum) with the cutoff extended past every beta2."""
    group = problem_group(config)
    crit = critical_data(config)
    requested = config.mu_max if mu_max is None else float(mu_max)
    mu_eff = effective_mu_max(requested, [h for _, h in crit])
    domain = DomainSpec(config["domain"]["kind"], config["domain"]["radius"])
    return group, crit, neumann_spectrum(domain, mu_eff), requested


def provenance(requested: float, spectrum: Spectrum) -> dict:
    return {
        "tool": "symbreak",
        "version": __version__,
        "mu_max_requested": requested,
        "mu_max_effective": spectrum.mu_max,
        "tolerances": {
            "degeneracy": DEGENERACY_TOL,
            "eigenvalue_coincidence_rtol": COINCIDENCE_RTOL,
            "newton_max_iterations": continuation.MAX_NEWTON,
            "newton_abs_tol": continuation.ABS_TOL,
            "newton_rel_tol": continuation.REL_TOL,
            "crossing_match": MATCH_TOL,
        },
        "notes": [SIGN_CONVENTION_NOTE, TRIVIAL_BLOCK_NOTE],
    }


def run(config: ProblemConfig, out_dir=None, mu_max: float | None = None,
        sections=("spectrum", "records", "verdicts", "verification")) -> tuple:
    """Run the pipeline; returns (report dict, exit status)."""
    group, crit, spectrum, requested = prepare(config, mu_max)
    records = [make_record(z, h, spectrum, group) for z, h in crit]
    verdicts = run_checks(config["checks"], records, spectrum, group)
    code, summary = exit_status(verdicts, records)
    report = {"config": config.raw, "provenance": provenance(requested, spectrum),
              "status": {"exit_code": code, "summary": summary}}
    if "spectrum" in sections:
        report["spectrum"] = decomposition_table(spectrum, group)
    if "records" in sections:
        report["records"] = [record_json(i, r) for i, r in enumerate(records)]
    if "verdicts" in sections:
        report["verdicts"] = [verdict_json(v) for v in verdicts]
    if "verification" in sections and config["verify"]["enabled"]:
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
        report["verification"] = verification(config, records, verdicts, group, out_dir)
    return _plain(report), code


def _plain(obj):
    """Recursively convert numpy scalars and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(report: dict) -> str:
    """Canonical serialization: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_schema("report.schema.json"),
                        cls=jsonschema.Draft202012Validator)
