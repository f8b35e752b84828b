"""Experiment runner: JSON experiment specs in, JSON reports and CSV summaries out.

    finrank run SPEC [--out DIR] [--seed S] [--format json|csv|both]
    finrank suite --all | NAME ... [--out DIR] [--format ...]
    finrank describe [KIND]

Exit codes: 0 all cases pass, 1 some case failed, 2 the experiment file did not parse
or validate.  The output directory defaults to ``$FINRANK_OUT`` or
``./finrank_out``.  Reports are deterministic given the experiment file; wall-clock
timings go to a ``<name>.timings.json`` sidecar so the report itself stays
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import ensembles
from .moments import analytic_moment_matrix, harmonic_moment_matrix, twist
from .recovery import RecoveryError, cauchy_transform, numerical_rank, recover_1d, recover_multid
from .vandermonde import annihilation_table, check_annihilation, vandermonde_self_pairing
from .polyalg import vandermonde_poly
from .weights import (
    DENSITIES,
    Ambient,
    Atomic,
    Density,
    DifferentialOperator,
    FourierRadial,
    PointDistribution,
    Weight,
    WeightError,
    as_real,
    circle_measure,
)
from .wiener import atom_mass, classify_discreteness, fourier, project, sphere_average_check

log = logging.getLogger("finrank")

KINDS = (
    "rank_table",
    "recovery",
    "wiener",
    "sphere_average",
    "harmonic_growth",
    "vandermonde_check",
    "cauchy_decay",
    "twist_monotonicity",
)
_ALIASES = {
    "RankTable": "rank_table",
    "Recovery": "recovery",
    "Wiener": "wiener",
    "SphereAverage": "sphere_average",
    "HarmonicGrowth": "harmonic_growth",
    "VandermondeCheck": "vandermonde_check",
    "CauchyDecay": "cauchy_decay",
    "TwistMonotonicity": "twist_monotonicity",
}


class SpecError(ValueError):
    """The experiment spec (or an embedded weight) is malformed."""


# --------------------------------------------------------------------------- weights


def _cplx(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SpecError(f"complex numbers are [re, im] pairs, got {v!r}")


def weight_from_json(obj: dict) -> Weight:
    """Parse the weight schema ``{"ambient": {...}, "type": ..., ...}``."""
    try:
        amb = Ambient(obj["ambient"]["kind"], int(obj["ambient"]["dim"]))
        kind = obj["type"]
        if kind == "atomic":
            pts = np.asarray(obj["points"], dtype=float).reshape(-1, amb.real_dim)
            return Atomic(amb, pts, [_cplx(m) for m in obj["masses"]])
        if kind == "point_distribution":
            pts = np.asarray(obj["points"], dtype=float).reshape(-1, amb.real_dim)
            ops = tuple(
                DifferentialOperator(amb.real_dim, {tuple(g): _cplx(c) for g, c in terms}) for terms in obj["operators"]
            )
            return PointDistribution(amb, pts, ops)
        if kind == "density":
            name = obj["name"]
            if name not in DENSITIES:
                raise SpecError(f"unknown density {name!r}; built-ins: {sorted(DENSITIES)}")
            lo, hi = obj["box"]
            return Density.builtin(name, amb, lo, hi, int(obj.get("order", 64)), **obj.get("params", {}))
        if kind == "fourier_radial":
            if obj.get("preset") == "cos_norm":
                return FourierRadial.cos_norm(amb.dim, int(obj.get("K", 24)), float(obj.get("radius", 4.0)))
            return FourierRadial(amb, obj["series"], float(obj.get("radius", 4.0)))
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"bad weight: {exc}") from exc
    raise SpecError(f"unknown weight type {obj.get('type')!r}")


# --------------------------------------------------------------------------- specs


@dataclass
class ExperimentSpec:
    name: str
    kind: str
    seed: int = 0
    weights: list = field(default_factory=list)  # weight JSON or {"weight": ..., "expect": "failure"}
    ensemble: dict | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentSpec":
        if not isinstance(obj, dict):
            raise SpecError("spec must be a JSON object")
        unknown = set(obj) - {"name", "kind", "seed", "weights", "ensemble", "params"}
        if unknown:
            raise SpecError(f"unknown spec fields {sorted(unknown)}")
        kind = _ALIASES.get(obj.get("kind"), obj.get("kind"))
        if kind not in KINDS:
            raise SpecError(f"unknown experiment kind {obj.get('kind')!r}; expected one of {list(KINDS)}")
        seed = obj.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise SpecError("seed must be an integer")
        spec = cls(
            name=str(obj.get("name", kind)),
            kind=kind,
            seed=seed,
            weights=list(obj.get("weights", [])),
            ensemble=obj.get("ensemble"),
            params=dict(obj.get("params", {})),
        )
        spec.validate()
        return spec

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "seed": self.seed, "weights": self.weights}
        out["ensemble"] = self.ensemble
        out["params"] = self.params
        return out

    def validate(self) -> None:
        for w in self.weights:
            weight_from_json(w["weight"] if "weight" in w else w)
        if self.ensemble is not None:
            fam = self.ensemble.get("family")
            if fam not in ENSEMBLES:
                raise SpecError(f"unknown ensemble family {fam!r}; expected one of {sorted(ENSEMBLES)}")
        if self.kind in _NEEDS_CASES and not self.weights and self.ensemble is None:
            raise SpecError(f"{self.kind} needs 'weights' or an 'ensemble'")


_NEEDS_CASES = {"rank_table", "recovery", "sphere_average", "cauchy_decay", "twist_monotonicity"}


def _ens_atomic_disk(e, seed):
    return ensembles.atomic_disk_ensemble(
        int(e.get("count", 10)), seed, tuple(e.get("m_range", (1, 6))), float(e.get("separation", 0.1)), tuple(e.get("mass_range", (0.1, 1.0)))
    )


def _ens_point_distribution(e, seed):
    return ensembles.point_distribution_ensemble(int(e.get("count", 10)), seed, int(e.get("max_points", 3)), int(e.get("max_order", 2)))


def _ens_atomic_polydisk(e, seed):
    rng = np.random.default_rng(seed)
    dims = e.get("dims", [2, 3])
    lo, hi = e.get("m_range", (1, 4))
    return [
        ensembles.atomic_polydisk(rng.integers(1 << 30), int(dims[i % len(dims)]), int(rng.integers(lo, hi + 1)), float(e.get("separation", 0.1)))
        for i in range(int(e.get("count", 10)))
    ]


def _ens_atomic_real(e, seed):
    rng = np.random.default_rng(seed)
    lo, hi = e.get("m_range", (1, 4))
    return [
        ensembles.atomic_real(rng.integers(1 << 30), int(e.get("D", 3)), int(rng.integers(lo, hi + 1)), complex_masses=bool(e.get("complex_masses", False)))
        for _ in range(int(e.get("count", 10)))
    ]


def _ens_circle(e, seed):
    return [circle_measure(int(e.get("nodes", 2048)), float(e.get("radius", 1.0)), subtract_center=True)]


def _ens_collision(e, seed):
    return [ensembles.collision_case()]


ENSEMBLES = {
    "atomic_disk": _ens_atomic_disk,
    "point_distribution": _ens_point_distribution,
    "atomic_polydisk": _ens_atomic_polydisk,
    "atomic_real": _ens_atomic_real,
    "circle_minus_delta": _ens_circle,
    "collision": _ens_collision,
}


def _cases(spec: ExperimentSpec) -> list[tuple[Weight, str]]:
    out = []
    for w in spec.weights:
        if "weight" in w:
            out.append((weight_from_json(w["weight"]), w.get("expect", "success")))
        else:
            out.append((weight_from_json(w), "success"))
    if spec.ensemble is not None:
        e = spec.ensemble
        for W in ENSEMBLES[e["family"]](e, spec.seed):
            out.append((W, e.get("expect", "success")))
    return out


# --------------------------------------------------------------------------- experiments


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _f(x) -> float | None:
    x = float(x)
    return None if math.isnan(x) else x


def _n_atoms(W) -> int:
    return len(W.points) if isinstance(W, (Atomic, PointDistribution)) else -1


def _run_rank_table(spec, cases):
    p = spec.params
    eps = float(p.get("eps_rel", 1e-8))
    basis = p.get("basis", "analytic")
    rows = []
    for i, (W, _) in enumerate(cases):
        m = _n_atoms(W)
        N = 2 * m if p.get("N", "2m") == "2m" else int(p["N"])
        if basis == "analytic":
            rank = numerical_rank(analytic_moment_matrix(W, N), eps)[0]
            expected = m if p.get("expected", "atoms") == "atoms" else int(p["expected"])
            ok = rank == expected
        elif basis == "harmonic":
            N = int(p.get("k_max", 6))
            rank = numerical_rank(harmonic_moment_matrix(as_real(W), N), eps)[0]
            expected = m if p.get("expected", "atoms") == "atoms" else int(p["expected"])
            ok = rank == expected
        elif basis == "embedding":
            # harmonic rank of W read on R^2d must dominate its analytic rank
            rank = numerical_rank(harmonic_moment_matrix(as_real(W), N), eps)[0]
            expected = numerical_rank(analytic_moment_matrix(W, N), eps)[0]
            ok = rank >= expected
        else:
            raise SpecError(f"unknown basis {basis!r}")
        rows.append({"case": i, "atoms": m, "N": N, "rank": int(rank), "expected": int(expected), "pass": bool(ok)})
    return rows


def _match(true_pts: np.ndarray, rec_pts: np.ndarray):
    if len(true_pts) != len(rec_pts):
        return None, None, math.inf
    if len(true_pts) == 0:
        return np.zeros(0, int), np.zeros(0, int), 0.0
    C = np.linalg.norm(true_pts[:, None, :] - rec_pts[None, :, :], axis=2)
    r, c = linear_sum_assignment(C)
    return r, c, float(C[r, c].max())


def _run_recovery(spec, cases):
    p = spec.params
    rows = []
    for i, (W, expect) in enumerate(cases):
        d = W.ambient.dim
        mb = p.get("m_bound", "atoms")
        m_bound = max(_n_atoms(W), 1) if mb == "atoms" else int(mb)
        order_bound = int(p.get("order_bound", 0))
        row = {"case": i, "dim": d, "expect": expect, "atoms": _n_atoms(W), "recovered": -1}
        try:
            if d == 1:
                rep = recover_1d(W, m_bound, order_bound)
            else:
                rep = recover_multid(W, m_bound, order_bound, seed=spec.seed + i, max_retries=int(p.get("max_retries", 3)))
        except RecoveryError as exc:
            row.update(support_error=None, mass_error=None, residual=None, retries=None, message=str(exc))
            row["pass"] = expect == "failure"
            rows.append(row)
            continue
        true_pts = W.complex_points if isinstance(W, (Atomic, PointDistribution)) else np.zeros((0, d))
        r, c, err = _match(true_pts, rep.support)
        mass_err = None
        if isinstance(W, Atomic) and r is not None:
            mass_err = float(np.abs(W.masses[r] - rep.masses[c]).max(initial=0.0))
        ok = (
            expect == "success"
            and err <= float(p.get("support_tol", 1e-6))
            and rep.moment_residual <= float(p.get("residual_tol", 1e-8))
            and (mass_err is None or mass_err <= float(p.get("mass_tol", 1e-6)))
            and rep.retries <= int(p.get("max_retries", 3))
        )
        row.update(
            recovered=len(rep.support),
            support_error=_f(err),
            mass_error=mass_err,
            residual=float(rep.moment_residual),
            retries=int(rep.retries),
            message="",
        )
        row["pass"] = bool(ok)
        rows.append(row)
    return rows


def _run_wiener(spec, cases):
    p = spec.params
    mode = p.get("mode", "atom_mass")
    rows = []
    if mode == "atom_mass":
        R = [float(r) for r in p.get("R_schedule", (2, 4, 8, 16, 32, 64))]
        for i, (W, _) in enumerate(cases):
            try:
                est = atom_mass(W, R)
            except WeightError as exc:
                rows.append({"case": i, "R": R[-1], "value": None, "error_estimate": None, "target": None, "pass": False, "message": str(exc)})
                continue
            val = est.limit
            if "expected" in p:
                target = float(p["expected"])
                ok = abs(val - target) <= float(p.get("tol", 1e-6))
            else:
                target = float(p["max_value"])
                ok = val <= target
            rows.append({"case": i, "R": R[-1], "value": val, "error_estimate": _f(est.error_estimate), "target": target, "pass": bool(ok), "message": ""})
    elif mode == "projection_fourier":
        rng = np.random.default_rng(spec.seed)
        n_dir = int(p.get("pairs", 20))
        t_max = float(p.get("t_max", 10.0))
        tol = float(p.get("tol", 1e-12))
        for i, (W, _) in enumerate(cases):
            worst = 0.0
            for _ in range(n_dir):
                z = rng.standard_normal(W.ambient.real_dim)
                z /= np.linalg.norm(z)
                t = rng.uniform(-t_max, t_max)
                worst = max(worst, abs(fourier(project(W, z), [t]) - fourier(W, t * z)))
            rows.append({"case": i, "pairs": n_dir, "max_error": worst, "pass": bool(worst < tol)})
    elif mode == "discreteness":
        for i, (W, _) in enumerate(cases):
            v = classify_discreteness(W, int(p.get("n_directions", 16)), spec.seed + i)
            rows.append({"case": i, "verdict": v.verdict, "atom_mass": v.atom_mass, "pass": v.verdict == p.get("expected", "discrete")})
    else:
        raise SpecError(f"unknown wiener mode {mode!r}")
    return rows


def _run_sphere_average(spec, cases):
    p = spec.params
    rows = []
    for i, (W, _) in enumerate(cases):
        avg, direct = sphere_average_check(W, int(p.get("n_nodes", 500)))
        rel = abs(avg - direct) / direct if direct else abs(avg)
        rows.append({"case": i, "average": avg, "direct": direct, "rel_error": rel, "pass": bool(rel < float(p.get("rtol", 0.01)))})
    return rows


def _run_harmonic_growth(spec, cases):
    p = spec.params
    ks = [int(k) for k in p.get("k_values", range(2, 9))]
    eps = float(p.get("eps_rel", 1e-10))
    if not cases:
        cases = [(FourierRadial.cos_norm(int(p.get("D", 3))), "success")]
    rows = []
    for i, (W, _) in enumerate(cases):
        prev = None
        for k in ks:
            rank = numerical_rank(harmonic_moment_matrix(W, k), eps)[0]
            ok = prev is None or rank > prev
            rows.append({"case": i, "k_max": k, "rank": int(rank), "pass": bool(ok)})
            prev = rank
    return rows


def _run_vandermonde(spec, cases):
    p = spec.params
    rows = []
    degree = int(p.get("degree", 3))
    n_seeds = int(p.get("seeds", 50))
    for N in p.get("N", [2, 3]):
        for r in annihilation_table(int(N), range(spec.seed, spec.seed + n_seeds), degree, float(p.get("rtol", 1e-10))):
            rows.append({"case": len(rows), "check": "symmetric_pair", "N": int(N), "seed": r["seed"], "value": _c(r["value"]), "scale": r["scale"], "pass": bool(r["pass"])})
    for N, expected in p.get("self_pairing", [[2, 4.0]]):
        V = vandermonde_poly(int(N))
        val = check_annihilation(V, V, int(N))
        ok = abs(val - expected) <= 1e-12 * abs(expected) and abs(val - vandermonde_self_pairing(int(N)) ** 2) <= 1e-12 * abs(val)
        rows.append({"case": len(rows), "check": "vandermonde_self", "N": int(N), "seed": None, "value": _c(val), "scale": float(expected), "pass": bool(ok)})
    return rows


def _run_cauchy(spec, cases):
    p = spec.params
    radii = [float(r) for r in p.get("radii", (1.5, 2.0, 3.0))]
    angles = int(p.get("angles", 8))
    tol = float(p.get("tol", 1e-10))
    rows = []
    for i, (W, _) in enumerate(cases):
        for r in radii:
            zs = r * np.exp(2j * np.pi * (np.arange(angles) + 0.25) / angles)
            worst = max(abs(cauchy_transform(W, z)) for z in zs)
            rows.append({"case": i, "radius": r, "max_abs_G": worst, "pass": bool(worst < tol)})
    return rows


def _run_twist(spec, cases):
    p = spec.params
    rng = np.random.default_rng(spec.seed)
    eps = float(p.get("eps_rel", 1e-10))
    deg_max = int(p.get("deg_max", 3))
    rows = []
    for i, (W, _) in enumerate(cases):
        d = W.ambient.dim
        g = ensembles.holomorphic_poly(rng, d, int(rng.integers(1, deg_max + 1)))
        N = int(p.get("N", 4 if d == 1 else 2))
        rt = numerical_rank(twist(W, g, N), eps)[0]
        r0 = numerical_rank(analytic_moment_matrix(W, N + g.degree), eps)[0]
        rows.append({"case": i, "deg_g": g.degree, "N": N, "rank_twist": int(rt), "rank_untwisted": int(r0), "pass": bool(rt <= r0)})
    return rows


_RUNNERS = {
    "rank_table": _run_rank_table,
    "recovery": _run_recovery,
    "wiener": _run_wiener,
    "sphere_average": _run_sphere_average,
    "harmonic_growth": _run_harmonic_growth,
    "vandermonde_check": _run_vandermonde,
    "cauchy_decay": _run_cauchy,
    "twist_monotonicity": _run_twist,
}

COLUMNS = {
    "rank_table": ["case", "atoms", "N", "rank", "expected", "pass"],
    "recovery": ["case", "dim", "expect", "atoms", "recovered", "support_error", "mass_error", "residual", "retries", "pass", "message"],
    "wiener": None,  # depends on mode; taken from the first row
    "sphere_average": ["case", "average", "direct", "rel_error", "pass"],
    "harmonic_growth": ["case", "k_max", "rank", "pass"],
    "vandermonde_check": ["case", "check", "N", "seed", "value", "scale", "pass"],
    "cauchy_decay": ["case", "radius", "max_abs_G", "pass"],
    "twist_monotonicity": ["case", "deg_g", "N", "rank_twist", "rank_untwisted", "pass"],
}

_WIENER_COLUMNS = {
    "atom_mass": ["case", "R", "value", "error_estimate", "target", "pass", "message"],
    "projection_fourier": ["case", "pairs", "max_error", "pass"],
    "discreteness": ["case", "verdict", "atom_mass", "pass"],
}


@dataclass
class Report:
    spec: ExperimentSpec
    cases: list
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.cases)

    def columns(self) -> list[str]:
        if self.spec.kind == "wiener":
            return _WIENER_COLUMNS[self.spec.params.get("mode", "atom_mass")]
        return COLUMNS[self.spec.kind]

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "cases": self.cases,
            "summary": {"cases": len(self.cases), "passed": sum(bool(c["pass"]) for c in self.cases), "pass": self.passed},
        }


def run_spec(spec: ExperimentSpec) -> Report:
    t0 = time.perf_counter()
    cases = _cases(spec)
    t1 = time.perf_counter()
    rows = _RUNNERS[spec.kind](spec, cases)
    t2 = time.perf_counter()
    return Report(spec, rows, {"build_s": t1 - t0, "run_s": t2 - t1, "total_s": t2 - t0})


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return _c(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def emit_report(report: Report, fmt: str = "json") -> bytes:
    """Serialize a report; ``json`` is the full record, ``csv`` one row per case."""
    if fmt == "json":
        return (json.dumps(_plain(report.to_json()), indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = report.columns()
        w.writerow(cols)
        for row in report.cases:
            out = []
            for c in cols:
                v = _plain(row.get(c))
                if isinstance(v, bool):
                    v = "true" if v else "false"
                elif v is None:
                    v = ""
                elif isinstance(v, list):
                    v = json.dumps(v)
                elif isinstance(v, float):
                    v = repr(v)
                out.append(v)
            w.writerow(out)
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")


def write_report(report: Report, out_dir: str, fmt: str = "both") -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for f in ("json", "csv") if fmt == "both" else (fmt,):
        path = os.path.join(out_dir, f"{report.spec.name}.{f}")
        with open(path, "wb") as fh:
            fh.write(emit_report(report, f))
        paths.append(path)
    with open(os.path.join(out_dir, f"{report.spec.name}.timings.json"), "w") as fh:
        json.dump(report.timings, fh, indent=2)
    return paths


# --------------------------------------------------------------------------- built-in suite


def _density_json(lo, hi, dim=1, kind="complex"):
    return {"ambient": {"kind": kind, "dim": dim}, "type": "density", "name": "uniform_box", "box": [lo, hi], "order": 64, "params": {}}


def builtin_specs() -> dict[str, dict]:
    """One spec per acceptance criterion, keyed by suite name."""
    real1 = {"kind": "real", "dim": 1}
    return {
        "c01_rank_equals_atoms": {
            "kind": "rank_table",
            "seed": 1,
            "ensemble": {"family": "atomic_disk", "count": 100, "m_range": [1, 6], "separation": 0.1},
            "params": {"N": "2m", "eps_rel": 1e-8},
        },
        "c02_recovery_1d": {
            "kind": "recovery",
            "seed": 1,
            "ensemble": {"family": "atomic_disk", "count": 100, "m_range": [1, 6], "separation": 0.1},
            "params": {"m_bound": "atoms", "support_tol": 1e-6, "mass_tol": 1e-6, "residual_tol": 1e-8},
        },
        "c03_distribution_recovery": {
            "kind": "recovery",
            "seed": 3,
            "weights": [{"weight": _density_json([0, 0], [1, 1]), "expect": "failure"}],
            "ensemble": {"family": "point_distribution", "count": 50, "max_points": 3, "max_order": 2},
            "params": {"m_bound": 9, "order_bound": 2, "support_tol": 1e-6, "residual_tol": 1e-8},
        },
        "c04_recovery_multid": {
            "kind": "recovery",
            "seed": 4,
            "weights": [{"weight": ensembles.collision_case().to_json(), "expect": "success"}],
            "ensemble": {"family": "atomic_polydisk", "count": 50, "dims": [2, 3], "m_range": [1, 4]},
            "params": {"m_bound": 4, "support_tol": 1e-5, "mass_tol": 1e-5, "residual_tol": 1e-6, "max_retries": 3},
        },
        "c05_twist_monotonicity": {
            "kind": "twist_monotonicity",
            "seed": 5,
            "ensemble": {"family": "atomic_disk", "count": 100, "m_range": [1, 6], "separation": 0.1},
            "params": {"deg_max": 3, "N": 4, "eps_rel": 1e-10},
        },
        "c06a_wiener_two_atoms": {
            "kind": "wiener",
            "weights": [{"ambient": real1, "type": "atomic", "points": [[1.0], [-1.0]], "masses": [[0.5, 0], [0.5, 0]]}],
            "params": {"mode": "atom_mass", "R_schedule": [2, 4, 8, 16, 32], "expected": 0.5, "tol": 1e-6},
        },
        "c06b_wiener_uniform": {
            "kind": "wiener",
            "weights": [_density_json([0], [1], 1, "real")],
            "params": {"mode": "atom_mass", "R_schedule": [2, 4, 8, 16, 32, 64], "max_value": 0.05},
        },
        "c07_sphere_average": {
            "kind": "sphere_average",
            "seed": 7,
            "ensemble": {"family": "atomic_real", "count": 20, "D": 3, "m_range": [1, 5]},
            "params": {"n_nodes": 500, "rtol": 0.01},
        },
        "c08a_harmonic_rank": {
            "kind": "rank_table",
            "seed": 8,
            "ensemble": {"family": "atomic_real", "count": 20, "D": 3, "m_range": [1, 4]},
            "params": {"basis": "harmonic", "k_max": 6, "eps_rel": 1e-8},
        },
        "c08b_even_embedding": {
            "kind": "rank_table",
            "seed": 8,
            "ensemble": {"family": "atomic_disk", "count": 20, "m_range": [1, 6], "separation": 0.1},
            "params": {"basis": "embedding", "N": 4, "eps_rel": 1e-10},
        },
        "c09_cos_growth": {
            "kind": "harmonic_growth",
            "weights": [{"ambient": {"kind": "real", "dim": 3}, "type": "fourier_radial", "preset": "cos_norm", "K": 24}],
            "params": {"k_values": [2, 3, 4, 5, 6, 7, 8], "eps_rel": 1e-10},
        },
        "c10_vandermonde": {
            "kind": "vandermonde_check",
            "seed": 0,
            "params": {"N": [2, 3], "seeds": 50, "degree": 3, "rtol": 1e-10, "self_pairing": [[2, 4.0]]},
        },
        "c11_cauchy_vanishing": {
            "kind": "cauchy_decay",
            "ensemble": {"family": "circle_minus_delta", "nodes": 2048, "radius": 1.0},
            "params": {"radii": [1.5, 2.0, 3.0], "angles": 8, "tol": 1e-10},
        },
        "c12_projection_fourier": {
            "kind": "wiener",
            "seed": 12,
            "ensemble": {"family": "atomic_real", "count": 50, "D": 3, "m_range": [1, 5], "complex_masses": True},
            "params": {"mode": "projection_fourier", "pairs": 20, "t_max": 10.0, "tol": 1e-12},
        },
    }


def builtin_spec(name: str) -> ExperimentSpec:
    specs = builtin_specs()
    if name not in specs:
        raise SpecError(f"unknown suite entry {name!r}")
    return ExperimentSpec.from_json({"name": name, **copy.deepcopy(specs[name])})


# --------------------------------------------------------------------------- schema


SCHEMA = {
    "spec": {
        "name": "string (report file stem)",
        "kind": list(KINDS),
        "seed": "integer; seeds ensembles, retries and directions",
        "weights": "list of weight objects, or {'weight': weight, 'expect': 'success'|'failure'}",
        "ensemble": {"family": sorted(ENSEMBLES), "count": "int", "...": "family parameters"},
        "params": "kind-specific parameters (see describe KIND)",
    },
    "weight": {
        "ambient": {"kind": ["complex", "real"], "dim": "int >= 1"},
        "type": ["atomic", "point_distribution", "density", "fourier_radial"],
        "atomic": {"points": "list of real vectors (length 2d for complex)", "masses": "list of [re, im]"},
        "point_distribution": {"points": "list of real vectors", "operators": "per point: list of [gamma, [re, im]]"},
        "density": {"name": sorted(DENSITIES), "box": "[lo, hi]", "order": "int", "params": "object"},
        "fourier_radial": {"series": "list of a_k", "radius": "float", "preset": "cos_norm (with K)"},
    },
    "params": {
        "rank_table": {"basis": ["analytic", "harmonic", "embedding"], "N": "int or '2m'", "k_max": "int", "eps_rel": "float", "expected": "'atoms' or int"},
        "recovery": {"m_bound": "int or 'atoms'", "order_bound": "int", "support_tol": "float", "mass_tol": "float", "residual_tol": "float", "max_retries": "int"},
        "wiener": {"mode": list(_WIENER_COLUMNS), "R_schedule": "list", "expected": "float", "tol": "float", "max_value": "float", "pairs": "int", "t_max": "float", "n_directions": "int"},
        "sphere_average": {"n_nodes": "int", "rtol": "float"},
        "harmonic_growth": {"k_values": "list of int", "eps_rel": "float", "D": "int (default weight cos_norm)"},
        "vandermonde_check": {"N": "list of int", "seeds": "int", "degree": "int", "rtol": "float", "self_pairing": "list of [N, expected]"},
        "cauchy_decay": {"radii": "list", "angles": "int", "tol": "float"},
        "twist_monotonicity": {"deg_max": "int", "N": "int", "eps_rel": "float"},
    },
}


# --------------------------------------------------------------------------- entry point


def _load_spec(path: str) -> ExperimentSpec:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: malformed JSON: {exc}") from exc
    if isinstance(obj, dict) and "name" not in obj:
        obj["name"] = os.path.splitext(os.path.basename(path))[0]
    return ExperimentSpec.from_json(obj)


def _execute(spec: ExperimentSpec, out_dir: str, fmt: str) -> bool:
    report = run_spec(spec)
    write_report(report, out_dir, fmt)
    n_ok = sum(bool(c["pass"]) for c in report.cases)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {spec.name}: {n_ok}/{len(report.cases)} cases ({report.timings['total_s']:.2f} s)")
    return report.passed


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finrank", description="Finite-rank moment matrix experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output directory (default $FINRANK_OUT or ./finrank_out)")
        p.add_argument("--format", choices=("json", "csv", "both"), default="both")

    run = sub.add_parser("run", help="run one experiment spec")
    run.add_argument("spec")
    run.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    common(run)

    suite = sub.add_parser("suite", help="run built-in acceptance specs")
    suite.add_argument("names", nargs="*")
    suite.add_argument("--all", action="store_true")
    suite.add_argument("--list", action="store_true")
    common(suite)

    desc = sub.add_parser("describe", help="print the experiment and weight schema")
    desc.add_argument("kind", nargs="?")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "describe":
        if args.kind:
            kind = _ALIASES.get(args.kind, args.kind)
            if kind not in KINDS:
                print(f"error: unknown kind {args.kind!r}", file=sys.stderr)
                return 2
            print(json.dumps({"kind": kind, "params": SCHEMA["params"][kind]}, indent=2))
        else:
            print(json.dumps(SCHEMA, indent=2))
        return 0
    out_dir = args.out or os.environ.get("FINRANK_OUT") or "finrank_out"
    try:
        if args.command == "run":
            spec = _load_spec(args.spec)
            if args.seed is not None:
                spec.seed = args.seed
            return 0 if _execute(spec, out_dir, args.format) else 1
        if args.list:
            print("\n".join(builtin_specs()))
            return 0
        names = list(builtin_specs()) if args.all else args.names
        if not names:
            print("error: give suite names or --all", file=sys.stderr)
            return 2
        specs = [builtin_spec(n) for n in names]
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = [_execute(s, out_dir, args.format) for s in specs]
    return 0 if all(ok) else 1


if __name__ == "__main__":
    sys.exit(main())
