"""Command line front end.

Two subcommands:

    dfs-lab run <scenario.json>   execute one scenario file and emit a report
    dfs-lab selftest              run the acceptance battery

Reports carry every computed number next to the tolerance it was checked
against.  JSON output is canonical (sorted keys, fixed float notation) so two
runs of the same scenario produce identical bytes; wall-clock time goes to
stderr only.  Exit codes: 0 all checks pass, 1 invalid scenario, 2 a check
failed, 3 internal fault.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import traceback

import numpy as np

from . import acceptance
from .duality import Background, ChargeVector, basis_change, coupling_shift, coupling_swap, dual_metric, factorized_inversion, narain_energy, onn_apply, transform_charges
from .dynamics import coherence_experiment
from .errors import DfsLabError, UsageError
from .fock import build_decoherence_model, build_string_model, dfs_from_dirac, duality_substitution, parity_generators, sector_residuals
from .nctorus import FluxMatrix, clock_shift_rep, landau_hamiltonian, weyl_residual
from .opcore import Operator, SubspaceBasis, operator_norm
from .reporting import canonical_json
from .spectral import connes_distance, make_diagonal_triple, make_two_point_triple
from .states import DensityMatrix, StateFunctional, pure_state
from .symmetry import close_group, invariant_projector, joint_kernel, symmetrize_operator

SCHEMA_VERSION = 1
KINDS = ("distance", "symmetrize", "dfs", "decohere", "duality", "nctorus")
BOUNDARY_SLACK = 1e-8


def _fail(msg: str):
    raise UsageError(msg)


def _number(obj, name: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        _fail(f"{name} must be a number")
    return float(obj)


def _complex_entry(obj, name: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (
        isinstance(obj, list)
        and len(obj) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        return complex(obj[0], obj[1])
    _fail(f"{name} must be a number or a [re, im] pair")


def _matrix(obj, name: str) -> np.ndarray:
    """Row-major matrix; entries are numbers or [re, im] pairs."""
    if not (isinstance(obj, list) and obj and all(isinstance(r, list) and r for r in obj)):
        _fail(f"{name} must be a non-empty list of non-empty rows")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        _fail(f"{name} rows have inconsistent lengths")
    out = np.zeros((len(obj), width), dtype=np.complex128)
    for i, row in enumerate(obj):
        for j, entry in enumerate(row):
            out[i, j] = _complex_entry(entry, f"{name}[{i}][{j}]")
    return out


def _real_matrix(obj, name: str) -> np.ndarray:
    m = _matrix(obj, name)
    if np.abs(m.imag).max(initial=0.0) != 0.0:
        _fail(f"{name} must be real")
    return m.real.copy()


def _int_matrix(obj, name: str) -> np.ndarray:
    m = _real_matrix(obj, name)
    if not np.array_equal(m, np.rint(m)):
        _fail(f"{name} must be an integer matrix")
    return m.astype(np.int64)


def _probabilities(obj, name: str) -> np.ndarray:
    if not (isinstance(obj, list) and obj):
        _fail(f"{name} must be a non-empty list")
    p = np.array([_number(v, f"{name}[{k}]") for k, v in enumerate(obj)])
    if p.min() < 0 or abs(p.sum() - 1.0) > 1e-9:
        _fail(f"{name} must be non-negative and sum to 1")
    return p


def _check(name: str, value: float, tolerance: float, passed: bool) -> dict:
    return {"name": name, "value": value, "tolerance": tolerance, "pass": bool(passed)}


def _run_distance(params: dict, tol_scale: float):
    results: dict = {}
    checks: list = []
    if "lambda" in params:
        lam = _complex_entry(params["lambda"], "lambda")
        triple = make_two_point_triple(lam)
        p = np.array([1.0, 0.0])
        q = np.array([0.0, 1.0])
        expected = params.get("expected", 1.0 / abs(lam))
        tol = _number(params.get("tolerance", 1e-6), "tolerance") * tol_scale
    else:
        dirac = _matrix(params.get("dirac") or _fail("need lambda or dirac"), "dirac")
        n = dirac.shape[0]
        triple = make_diagonal_triple(n, Operator(dirac))
        p = _probabilities(params.get("state") or _fail("need state"), "state")
        q = _probabilities(params.get("state_prime") or _fail("need state_prime"), "state_prime")
        if p.size != n or q.size != n:
            _fail("states must have one weight per point")
        expected = params.get("expected")
        tol = _number(params.get("tolerance", 1e-6), "tolerance") * tol_scale
    psi = StateFunctional(DensityMatrix(Operator(np.diag(p.astype(np.complex128)))))
    psi_prime = StateFunctional(DensityMatrix(Operator(np.diag(q.astype(np.complex128)))))
    res = connes_distance(triple, psi, psi_prime)
    results["unbounded"] = bool(res.unbounded)
    results["distance"] = None if res.unbounded else res.value
    results["constraint_norm"] = res.constraint_norm
    results["iterations"] = res.iterations
    if not res.unbounded:
        checks.append(
            _check(
                "constraint-on-boundary",
                max(0.0, res.constraint_norm - 1.0),
                BOUNDARY_SLACK,
                res.constraint_norm <= 1.0 + BOUNDARY_SLACK,
            )
        )
    if expected is not None:
        expected = _number(expected, "expected")
        err = abs(res.value - expected) if not res.unbounded else float("inf")
        checks.append(_check("distance-matches-expected", None if res.unbounded else err, tol, err <= tol))
    return results, checks


def _model_from_params(params: dict):
    n_max = int(params.get("n_max", 3))
    k = _matrix(params.get("K", [[1.0]]), "K")
    lam = _matrix(params.get("Lambda", [[1.0]]), "Lambda")
    w = _matrix(params.get("w", [[0.3]]), "w")
    return build_decoherence_model(k, lam, w, n_max)


def _run_symmetrize(params: dict, tol_scale: float):
    model = _model_from_params(params)
    gens = parity_generators(model)
    rep = close_group(gens)
    killed = operator_norm(symmetrize_operator(rep, model.h_int))
    proj = invariant_projector(rep)
    kernel = joint_kernel(gens)
    sys_dim = model.system_space.dim
    tol = 1e-12 * tol_scale
    results = {
        "group_order": rep.order,
        "projector_rank": proj.rank,
        "symmetrized_interaction_norm": killed,
        "joint_kernel_dim": kernel.size,
    }
    checks = [
        _check("interaction-annihilated", killed, tol, killed <= tol),
        _check("kernel-is-system-times-vacuum", float(kernel.size), 0.0, kernel.size == sys_dim),
    ]
    return results, checks


def _run_dfs(params: dict, tol_scale: float):
    metric = _real_matrix(params.get("metric") or _fail("need metric"), "metric")
    n = metric.shape[0]
    coupling = _real_matrix(params.get("coupling", np.zeros((n, n)).tolist()), "coupling")
    bg = Background(metric, coupling)
    n_max = int(params.get("n_max", 2))
    levels = int(params.get("levels", 1))
    which = params.get("operator", "relative")
    if which not in ("relative", "total"):
        _fail("operator must be 'relative' or 'total'")
    tol = _number(params.get("tol", 1e-9), "tol")
    model = build_string_model(bg, n_max, levels)
    dirac = model.d_bar if which == "relative" else model.d
    kernel = dfs_from_dirac(dirac, tol=tol)
    bound = tol * operator_norm(dirac) * tol_scale
    if kernel.size:
        residual = float(
            max(np.linalg.norm(dirac.mat @ v) for v in kernel.vectors)
        )
        sectors = sector_residuals(model, kernel)
        gamma_worst = float(
            max(max(row["gamma_pair_residuals"]) for row in sectors)
        )
    else:
        residual = 0.0
        gamma_worst = None
    results = {
        "model_dim": model.dim,
        "kernel_dim": kernel.size,
        "kernel_residual": residual,
        "max_gamma_pair_residual": gamma_worst,
    }
    checks = [_check("kernel-residual", residual, bound, residual <= bound)]
    return results, checks


def _run_decohere(params: dict, tol_scale: float):
    model = _model_from_params(params)
    sys_dim = model.system_space.dim
    env_dim = model.env_space.dim
    times_arg = params.get("times", {"start": 0.0, "stop": 20.0, "step": 0.5})
    if isinstance(times_arg, dict):
        start = _number(times_arg.get("start", 0.0), "times.start")
        stop = _number(times_arg.get("stop") if times_arg.get("stop") is not None else _fail("times needs stop"), "times.stop")
        step = _number(times_arg.get("step", 0.5), "times.step")
        if step <= 0 or stop < start:
            _fail("times must advance forward")
        times = np.arange(start, stop + step / 2.0, step)
    elif isinstance(times_arg, list) and times_arg:
        times = np.array([_number(t, "times[]") for t in times_arg])
    else:
        _fail("times must be a {start, stop, step} object or a list")
    amps = params.get("superposition", [1.0, 1.0])
    if not (isinstance(amps, list) and 0 < len(amps) <= sys_dim):
        _fail("superposition must list at most one amplitude per system level")
    v_sys = np.zeros(sys_dim, dtype=np.complex128)
    for k, a in enumerate(amps):
        v_sys[k] = _complex_entry(a, f"superposition[{k}]")
    norm = np.linalg.norm(v_sys)
    if norm == 0:
        _fail("superposition must not be zero")
    v_sys /= norm
    v_env = np.zeros(env_dim, dtype=np.complex128)
    v_env[0] = 1.0
    rho0 = pure_state(np.kron(v_sys, v_env), dims=(sys_dim, env_dim))
    code = SubspaceBasis(sys_dim, np.eye(sys_dim, dtype=np.complex128), "vector-space")
    full, sym = coherence_experiment(model, code, rho0, times)
    cap = _number(params.get("leakage_cap", 1e-10), "leakage_cap") * tol_scale
    floor = params.get("min_full_leakage")
    results = {
        "times": times.tolist(),
        "full_leakages": full.leakages.tolist(),
        "symmetrized_leakages": sym.leakages.tolist(),
        "full_fidelities": full.fidelities.tolist(),
        "symmetrized_fidelities": sym.fidelities.tolist(),
    }
    sym_max = float(sym.leakages.max())
    checks = [_check("symmetrized-leakage-cap", sym_max, cap, sym_max <= cap)]
    if floor is not None:
        floor = _number(floor, "min_full_leakage")
        full_max = float(full.leakages.max())
        checks.append(
            _check("full-leakage-reaches-floor", full_max, floor, full_max >= floor)
        )
    return results, checks


_GEN_KINDS = ("inversion", "shift", "basis", "swap")


def _parse_generator(entry: dict, n: int):
    if not isinstance(entry, dict) or entry.get("kind") not in _GEN_KINDS:
        _fail(f"generator kind must be one of {_GEN_KINDS}")
    kind = entry["kind"]
    if kind == "inversion":
        dirs = entry.get("directions", list(range(n)))
        if not (isinstance(dirs, list) and dirs):
            _fail("inversion needs a non-empty directions list")
        return factorized_inversion(n, [int(d) for d in dirs])
    if kind == "shift":
        return coupling_shift(_int_matrix(entry.get("theta") or _fail("shift needs theta"), "theta"))
    if kind == "basis":
        return basis_change(_int_matrix(entry.get("matrix") or _fail("basis needs matrix"), "matrix"))
    return coupling_swap(n)


def _run_duality(params: dict, tol_scale: float):
    metric = _real_matrix(params.get("metric") or _fail("need metric"), "metric")
    n = metric.shape[0]
    coupling = _real_matrix(params.get("coupling", np.zeros((n, n)).tolist()), "coupling")
    bg = Background(metric, coupling)
    box = int(params.get("box", 3))
    if box < 1:
        _fail("box must be a positive integer")
    word_arg = params.get("word") or [params.get("generator") or _fail("need generator or word")]
    if not isinstance(word_arg, list):
        _fail("word must be a list of generator objects")
    element = _parse_generator(word_arg[0], n)
    for entry in word_arg[1:]:
        element = element.compose(_parse_generator(entry, n))
    bg_new = onn_apply(element, bg)
    grid = np.arange(-box, box + 1)
    mesh = np.meshgrid(*([grid] * (2 * n)), indexing="ij")
    charges = np.stack([m.ravel() for m in mesh], axis=1)
    worst = 0.0
    for row in charges:
        cv = ChargeVector(row[:n], row[n:])
        e_old = narain_energy(bg, cv.m, cv.w)
        cv_new = transform_charges(element, cv)
        worst = max(worst, abs(e_old - narain_energy(bg_new, cv_new.m, cv_new.w)))
    tol = 1e-10 * tol_scale
    results = {
        "element_matrix": element.matrix.tolist(),
        "element_swaps": element.swap,
        "transformed_metric": bg_new.metric.tolist(),
        "transformed_coupling": bg_new.coupling.tolist(),
        "dual_metric": dual_metric(bg).tolist(),
        "charges_checked": int(charges.shape[0]),
        "max_energy_shift": worst,
    }
    checks = [_check("narain-energy-invariance", worst, tol, worst <= tol)]
    sub_arg = params.get("substitution")
    if sub_arg is not None:
        if not isinstance(sub_arg, dict):
            _fail("substitution must be an object")
        model = build_string_model(
            bg, int(sub_arg.get("n_max", 1)), int(sub_arg.get("levels", 1))
        )
        sub = duality_substitution(model)
        results["substitution_max_residual"] = sub.max_residual
        results["substitution_max_gram_residual"] = sub.max_gram_residual
        sub_tol = 1e-12 * tol_scale
        # Raw coefficient arrays are gauge-dependent beyond one direction;
        # compare the gauge-invariant products there instead.
        value = sub.max_residual if n == 1 else sub.max_gram_residual
        checks.append(_check("substitution-match", value, sub_tol, value <= sub_tol))
    return results, checks


def _run_nctorus(params: dict, tol_scale: float):
    q = _int_matrix(params.get("numerator") or _fail("need numerator"), "numerator")
    den = params.get("denominator")
    if not isinstance(den, int) or isinstance(den, bool) or den < 1:
        _fail("denominator must be a positive integer")
    flux = FluxMatrix.from_rational(q, den)
    rep = clock_shift_rep(flux)
    residual = weyl_residual(rep, flux)
    tol = 1e-13 * tol_scale
    results = {
        "flux": flux.omega.tolist(),
        "rep_dim": rep.dim,
        "weyl_residual": residual,
    }
    checks = [_check("weyl-relation", residual, tol, residual <= tol)]
    landau_n_max = params.get("landau_n_max")
    if landau_n_max is not None:
        landau_n_max = int(landau_n_max)
        h = landau_hamiltonian(flux, landau_n_max)
        vals = np.linalg.eigvalsh(h.mat)
        ground = float(vals[0])
        results["landau_ground_level"] = ground
        expect = params.get("landau_expect")
        if expect is not None:
            expect = _number(expect, "landau_expect")
            landau_tol = _number(params.get("landau_tol", 2e-3), "landau_tol") * tol_scale
            err = abs(ground - expect)
            checks.append(_check("landau-ground-level", err, landau_tol, err <= landau_tol))
    return results, checks


_HANDLERS = {
    "distance": _run_distance,
    "symmetrize": _run_symmetrize,
    "dfs": _run_dfs,
    "decohere": _run_decohere,
    "duality": _run_duality,
    "nctorus": _run_nctorus,
}


def run_scenario(scenario: dict, seed: int | None = None, tol_scale: float = 1.0) -> dict:
    """Validate and execute one scenario, returning the report dict.

    Schema problems raise UsageError before any module code runs.
    """
    if not isinstance(scenario, dict):
        _fail("scenario must be a JSON object")
    if scenario.get("schema_version") != SCHEMA_VERSION:
        _fail(f"schema_version must be {SCHEMA_VERSION}")
    kind = scenario.get("kind")
    if kind not in KINDS:
        _fail(f"kind must be one of {KINDS}")
    params = scenario.get("params", {})
    if not isinstance(params, dict):
        _fail("params must be an object")
    if seed is None:
        seed = scenario.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        _fail("seed must be an integer")
    if tol_scale <= 0:
        _fail("tol-scale must be positive")
    results, checks = _HANDLERS[kind](params, tol_scale)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "seed": seed,
        "tol_scale": tol_scale,
        "scenario": params,
        "results": results,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def _emit_csv(report: dict) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "value", "tolerance", "pass"])
    for c in report["checks"]:
        writer.writerow([c["name"], c["value"], c["tolerance"], c["pass"]])
    writer.writerow(["overall", "", "", report["pass"]])
    return buf.getvalue()


def _emit_markdown(report: dict) -> str:
    lines = [
        f"# dfs-lab report: {report['kind']}",
        "",
        f"Overall: {'pass' if report['pass'] else 'FAIL'}",
        "",
        "| check | value | tolerance | pass |",
        "| --- | --- | --- | --- |",
    ]
    for c in report["checks"]:
        value = "n/a" if c["value"] is None else f"{c['value']:.6e}"
        lines.append(f"| {c['name']} | {value} | {c['tolerance']:.6e} | {c['pass']} |")
    lines.append("")
    lines.append("## Results")
    lines.append("")
    for key in sorted(report["results"]):
        lines.append(f"- {key}: {report['results'][key]}")
    lines.append("")
    return "\n".join(lines)


def emit(report: dict, fmt: str = "json", path: str | None = None) -> str:
    """Render a report, write it to path or stdout, and return the text."""
    if fmt == "json":
        text = canonical_json(report)
    elif fmt == "csv":
        text = _emit_csv(report)
    elif fmt == "markdown":
        text = _emit_markdown(report)
    else:
        raise UsageError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _cmd_run(args) -> int:
    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            scenario = json.load(fh)
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"scenario is not valid JSON: {exc}", file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    try:
        report = run_scenario(scenario, seed=args.seed, tol_scale=args.tol_scale)
    except (UsageError, DfsLabError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 3
    wall_ms = 1000.0 * (time.perf_counter() - t0)
    try:
        emit(report, fmt=args.format, path=args.out)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return 3
    print(f"wall_time_ms {wall_ms:.1f}", file=sys.stderr)
    return 0 if report["pass"] else 2


def _cmd_selftest(args) -> int:
    t0 = time.perf_counter()
    try:
        results = acceptance.run_all(tol_scale=args.tol_scale)
    except Exception:
        traceback.print_exc()
        return 3
    wall_ms = 1000.0 * (time.perf_counter() - t0)
    for r in results:
        state = "pass" if r.passed else "FAIL"
        print(f"criterion {r.number:02d} {r.name}: {state} | {r.details}", file=sys.stderr)
    report = acceptance.battery_report(results)
    try:
        emit(report, fmt="json", path=args.out)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return 3
    print(f"wall_time_ms {wall_ms:.1f}", file=sys.stderr)
    return 0 if report["pass"] else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfs-lab",
        description="numerical workbench for protected subspaces and dualities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("scenario", help="path to a scenario JSON file")
    run_p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    run_p.add_argument("--out", default=None, help="write the report here instead of stdout")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    run_p.set_defaults(func=_cmd_run)

    self_p = sub.add_parser("selftest", help="run the acceptance battery")
    self_p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    self_p.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    self_p.set_defaults(func=_cmd_selftest)
    return parser


def entry(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(entry())
