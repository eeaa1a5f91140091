"""Command-line scenario runner.

    edpconv list
    edpconv validate CONFIG
    edpconv run CONFIG [--out DIR] [--threads N] [--tolerance-scale S]

A config is a TOML file with a top-level ``kind`` and a ``[parameters]``
table. Unknown keys are errors. Exit codes: 0 success, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .cell import (CellProblemSpec, cell_solutions, conjecture_check, contact_relation_wiggly_energy,
                   convexity_inequality, joint_convexity_probe, moments, phi_extract,
                   r_eff_wiggly_energy, riemannian_distances)
from .core import PeriodicCoefficient, SampledBipotential, ScalarFunction, classify_bipotential
from .errors import ConfigError, EdpconvError
from .flow import StepControl, WigglyFamily, convergence_study, edp_residual
from .io import csv_bytes, json_bytes, write_all
from .legendre import SampledConvexFunction, biconjugate_check, conjugate
from .membrane import (MembraneProblem, effective_membrane_coefficient, membrane_convergence_study,
                       solve_limit_pde)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class NumericalFailure(Exception):
    def __init__(self, operation: str, cause: BaseException):
        super().__init__(f"{operation}: {type(cause).__name__}: {cause}")
        self.operation = operation


@dataclass
class Context:
    workers: int = 1
    tolerance_scale: float = 1.0
    operation: str = "setup"

    def step(self, name: str) -> "Context":
        self.operation = name
        return self


# ---------------------------------------------------------------------------
# parameter schema

@dataclass(frozen=True)
class Param:
    default: Any
    check: Callable[[Any], bool] = lambda x: True
    help: str = ""


def _num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _pos(x) -> bool:
    return _num(x) and x > 0


def _int_at_least(n):
    return lambda x: isinstance(x, int) and not isinstance(x, bool) and x >= n


def _decreasing_pos_list(x) -> bool:
    return (isinstance(x, list) and len(x) >= 1 and all(_pos(e) and e < 1 for e in x)
            and all(a > b for a, b in zip(x, x[1:])))


def _one_of(*opts):
    return lambda x: x in opts


def _table(x) -> bool:
    return isinstance(x, dict)


COEFFICIENT_KEYS = {
    "cosine": {"amplitude": 0.8, "base": 1.0},
    "power": {"alpha": 0.05, "gamma": 4.0},
    "constant": {"value": 1.0},
}


def _coefficient(tbl: dict, where: str) -> PeriodicCoefficient:
    kind = tbl.get("type", "cosine")
    if kind not in COEFFICIENT_KEYS:
        raise ConfigError(f"{where}.type: expected one of {sorted(COEFFICIENT_KEYS)}, got {kind!r}")
    allowed = COEFFICIENT_KEYS[kind]
    extra = set(tbl) - set(allowed) - {"type"}
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)} for type {kind!r}")
    vals = {k: tbl.get(k, d) for k, d in allowed.items()}
    for k, v in vals.items():
        if not _num(v):
            raise ConfigError(f"{where}.{k}: expected a finite number, got {v!r}")
    try:
        if kind == "cosine":
            return PeriodicCoefficient.cosine(vals["amplitude"], vals["base"])
        if kind == "power":
            return PeriodicCoefficient.power(vals["alpha"], vals["gamma"])
        return PeriodicCoefficient.constant(vals["value"])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _canonical_coefficient(tbl: dict) -> dict:
    kind = tbl.get("type", "cosine")
    out = {"type": kind}
    out.update({k: tbl.get(k, d) for k, d in COEFFICIENT_KEYS.get(kind, {}).items()})
    return out


GRID = {
    "v_min": Param(-2.0, _num), "v_max": Param(2.0, _num), "n_v": Param(65, _int_at_least(3)),
    "xi_min": Param(-2.0, _num), "xi_max": Param(2.0, _num), "n_xi": Param(65, _int_at_least(3)),
}
CELL = {
    "model": Param("wiggly-dissipation", _one_of("wiggly-dissipation", "wiggly-energy")),
    "coefficient": Param({"type": "cosine"}, _table),
    "amplitude": Param(1.0, _pos), "rho": Param(1.0, _pos), "q": Param(0.0, _num),
    **GRID,
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    anchor: str
    schema: dict
    runner: Callable[[dict, Context], dict]


def _validate(kind: str, params: dict, schema: dict) -> dict:
    extra = set(params) - set(schema)
    if extra:
        raise ConfigError(f"parameters: unknown key(s) {sorted(extra)} for kind {kind!r}; "
                          f"allowed: {sorted(schema)}")
    out = {}
    for key, p in schema.items():
        val = params.get(key, p.default)
        if isinstance(val, int) and not isinstance(val, bool) and isinstance(p.default, float):
            val = float(val)
        if not p.check(val):
            raise ConfigError(f"parameters.{key}: invalid value {val!r}")
        if key in ("coefficient",):
            _coefficient(val, f"parameters.{key}")
            val = _canonical_coefficient(val)
        out[key] = val
    for lo, hi in (("v_min", "v_max"), ("xi_min", "xi_max")):
        if lo in out and not out[lo] < out[hi]:
            raise ConfigError(f"parameters: need {lo} < {hi}")
    return out


def _grid(p: dict, axis: str) -> np.ndarray:
    return np.linspace(p[f"{axis}_min"], p[f"{axis}_max"], p[f"n_{axis}"])


def _cell_spec(p: dict, ctx: Context) -> CellProblemSpec:
    rtol = 1e-10 * ctx.tolerance_scale
    if p["model"] == "wiggly-energy":
        return CellProblemSpec.wiggly_energy(p["amplitude"], p["rho"], p["q"], rtol=rtol)
    return CellProblemSpec.wiggly_dissipation(_coefficient(p["coefficient"], "coefficient"),
                                              p["q"], rtol=rtol)


def _solve_grid(spec: CellProblemSpec, p: dict, ctx: Context):
    ctx.step("cell_solutions")
    v, xi = _grid(p, "v"), _grid(p, "xi")
    sols = cell_solutions(spec, v, xi, ctx.workers)
    vals = np.array([s.value for s in sols]).reshape(v.size, xi.size)
    mult = np.array([s.multiplier for s in sols]).reshape(v.size, xi.size)
    return SampledBipotential(v, xi, vals, spec.q), mult


def _grid_csv(M, mult) -> bytes:
    gap = M.gap()
    rows = ((v, x, M.values[i, j], gap[i, j], mult[i, j])
            for i, v in enumerate(M.v_grid) for j, x in enumerate(M.xi_grid))
    return csv_bytes(["v", "xi", "M0", "gap", "multiplier"], rows)


# ---------------------------------------------------------------------------
# scenario runners (each returns {file name: bytes})


def _run_flow(p: dict, ctx: Context) -> dict:
    ctrl = StepControl(rtol=p["rtol"], atol=p["atol"],
                       points_per_period=p["points_per_period"]).scaled(ctx.tolerance_scale)
    tilt = ScalarFunction.linear(p["tilt_slope"]) if p["tilt_slope"] != 0 else None
    fam = WigglyFamily(_coefficient(p["coefficient"], "coefficient"),
                       ScalarFunction.quadratic(p["energy_stiffness"]), p["q0"], tilt)
    ctx.step("convergence_study")
    table = convergence_study(fam, p["eps"], p["T"], ctrl)
    ctx.step("write-flow")
    files = {}

    def traj_csv(tr):
        res = tr.running_residual
        return csv_bytes(["t", "q", "qdot", "E", "intR", "intRstar", "residual"],
                         zip(tr.times, tr.states, tr.rates, tr.energy, tr.int_r, tr.int_rstar, res))

    rows = []
    for e, tr, err in zip(table.eps, table.trajectories, table.errors):
        files[f"trajectory_eps_{float(e)!r}.csv"] = traj_csv(tr)
        rows.append((e, err, edp_residual(tr, fam.system(float(e))), tr.times.size - 1))
    files["limit.csv"] = traj_csv(table.limit)
    files["convergence.csv"] = csv_bytes(["eps", "sup_error", "edp_residual", "steps"], rows)
    files["summary.json"] = json_bytes({
        "decreasing": table.is_decreasing(),
        "limit_edp_residual": edp_residual(table.limit, fam.limit_system()),
        "orders": table.rates().tolist(),
    })
    return files


def _run_cell_grid(p: dict, ctx: Context) -> dict:
    M, mult = _solve_grid(_cell_spec(p, ctx), p, ctx)
    return {"m0_grid.csv": _grid_csv(M, mult)}


def _run_classify(p: dict, ctx: Context) -> dict:
    M, mult = _solve_grid(_cell_spec(p, ctx), p, ctx)
    ctx.step("classify_bipotential")
    c = classify_bipotential(M, p["separability_tolerance"])
    report = "\n".join([
        c.report(),
        f"max_mixed_difference = {c.max_mixed_difference!r}",
        f"separability_threshold = {c.separability_threshold!r}",
        f"contact_equivalent = {c.contact_equivalent}",
        f"contact_pairs = {len(c.contact.pairs)}",
    ]) + "\n"
    return {
        "m0_grid.csv": _grid_csv(M, mult),
        "classification.txt": report.encode(),
        "effective_potential.csv": csv_bytes(["v", "R"], zip(c.v, c.potential)),
    }


def _run_phi(p: dict, ctx: Context) -> dict:
    spec = CellProblemSpec.wiggly_dissipation(_coefficient(p["coefficient"], "coefficient"),
                                              rtol=1e-10 * ctx.tolerance_scale)
    ctx.step("phi_extract")
    tab = phi_extract(spec, np.linspace(0.0, 1.0, p["n_s"]))
    return {
        "phi.csv": csv_bytes(["s", "phi", "lower_bound"], zip(tab.s, tab.phi, tab.lower_bound)),
        "phi_checks.json": json_bytes({
            "expected": {repr(k): v for k, v in tab.expected.items()},
            "endpoint_errors": {repr(k): v for k, v in tab.endpoint_errors().items()},
            "min_margin_over_lower_bound": float(np.min(tab.phi - tab.lower_bound)),
        }),
    }


def _run_conjecture(p: dict, ctx: Context) -> dict:
    spec = CellProblemSpec.wiggly_dissipation(_coefficient(p["coefficient"], "coefficient"),
                                              rtol=1e-10 * ctx.tolerance_scale)
    v, xi = _grid(p, "v"), _grid(p, "xi")
    ctx.step("conjecture_check")
    worst, diff = conjecture_check(spec, v, xi, ctx.workers)
    rows = ((a, b, diff[i, j]) for i, a in enumerate(v) for j, b in enumerate(xi))
    return {
        "conjecture.csv": csv_bytes(["v", "xi", "excess"], rows),
        "summary.json": json_bytes({"max_excess": worst}),
    }


def _run_nonconvexity(p: dict, ctx: Context) -> dict:
    mu = _coefficient(p["coefficient"], "coefficient")
    spec = CellProblemSpec.wiggly_dissipation(mu, rtol=1e-10 * ctx.tolerance_scale)
    ctx.step("joint_convexity_probe")
    probe = joint_convexity_probe(spec, p["v0"])
    m = moments(mu)
    return {"nonconvexity.json": json_bytes({
        "midpoint_violation": probe,
        "inequality_margin": convexity_inequality(mu),
        "mu_bar": m.mean, "mu_half": m.root_mean, "mu_max": m.maximum,
    })}


def _run_distances(p: dict, ctx: Context) -> dict:
    mu = _coefficient(p["coefficient"], "coefficient")
    if not p["q0"] < p["q1"]:
        raise ConfigError("parameters: need q0 < q1")
    ctx.step("riemannian_distances")
    d_eff, d0 = riemannian_distances(mu, p["q0"], p["q1"])
    return {"distances.json": json_bytes({"D_eff": d_eff, "D_0": d0, "ratio": d0 / d_eff})}


def _run_wiggly_energy(p: dict, ctx: Context) -> dict:
    A, rho = p["amplitude"], p["rho"]
    spec = CellProblemSpec.wiggly_energy(A, rho, rtol=1e-10 * ctx.tolerance_scale)
    xi = _grid(p, "xi")
    ctx.step("m0 on the contact relation")
    v = contact_relation_wiggly_energy(A, rho, xi)
    m = np.array([spec.value(a, b) for a, b in zip(v, xi)])
    vv = np.linspace(-p["v_max"], p["v_max"], p["n_v"])
    return {
        "contact.csv": csv_bytes(["xi", "v", "M0", "gap"], zip(xi, v, m, m - v * xi)),
        "effective_potential.csv": csv_bytes(["v", "R_eff"], zip(vv, r_eff_wiggly_energy(A, rho, vv))),
    }


def _membrane_coef(tbl: dict, where: str) -> tuple[Callable, tuple]:
    kind = tbl.get("type", "constant")
    keys = {"constant": {"value"}, "reciprocal-linear": {"slope"}}
    if kind not in keys:
        raise ConfigError(f"{where}.type: expected one of {sorted(keys)}")
    extra = set(tbl) - keys[kind] - {"type"}
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")
    if kind == "constant":
        c = tbl.get("value", 1.0)
        if not _pos(c):
            raise ConfigError(f"{where}.value must be positive")
        return (lambda y: c), ()
    s = tbl.get("slope", 1.0)
    if not (_num(s) and s > -1):
        raise ConfigError(f"{where}.slope must exceed -1")
    return (lambda y: 1.0 / (1.0 + s * y)), ()


def _run_membrane(p: dict, ctx: Context) -> dict:
    a_star, breaks = _membrane_coef(p["a_star"], "parameters.a_star")
    slope = p["potential_slope"]
    prob = MembraneProblem(a_minus=lambda x: p["a_minus"], a_plus=lambda x: p["a_plus"],
                           a_star=a_star, V=lambda x: slope * x, eps=p["eps"][0],
                           n_bulk=p["n_bulk"], n_layer=p["n_layer"], a_star_breaks=breaks)
    datum = "equilibrium" if p["datum"] == "equilibrium" else (lambda x: 1.0 if x < 0 else 0.0)
    ctx.step("membrane_convergence_study")
    tab = membrane_convergence_study(prob, p["eps"], p["T"], datum, snapshots=p["snapshots"],
                                     workers=ctx.workers)
    ctx.step("solve_limit_pde")
    lim = solve_limit_pde(prob, datum, p["T"], max(replace(prob, eps=e).bulk_step()
                                                     for e in p["eps"]) ** 2, p["snapshots"])
    x = 0.5 * (lim.edges[1:] + lim.edges[:-1])
    return {
        "convergence.csv": csv_bytes(["eps", "L1_error"], zip(tab.eps, tab.errors)),
        "limit_final.csv": csv_bytes(["x", "u"], zip(x, lim.final)),
        "summary.json": json_bytes({
            "a_eff": effective_membrane_coefficient(a_star, breaks),
            "decreasing": tab.is_decreasing(),
            "limit_mass_drift": lim.max_mass_drift(),
            "limit_entropy_increase": lim.max_entropy_increase(),
            "limit_ledger_residual": lim.ledger_residual(),
            "dt": lim.dt,
        }),
    }


def _legendre_function(tbl: dict):
    kind = tbl.get("type", "quadratic")
    keys = {"quadratic": {"k": 1.0}, "power": {"p": 3.0}, "abs": {"a": 1.0}}
    if kind not in keys:
        raise ConfigError(f"parameters.function.type: expected one of {sorted(keys)}")
    extra = set(tbl) - set(keys[kind]) - {"type"}
    if extra:
        raise ConfigError(f"parameters.function: unknown key(s) {sorted(extra)}")
    c = {k: tbl.get(k, d) for k, d in keys[kind].items()}
    if not all(_pos(v) for v in c.values()):
        raise ConfigError("parameters.function: coefficients must be positive")
    if kind == "quadratic":
        return lambda v: 0.5 * c["k"] * v * v, lambda xi: 0.5 * xi * xi / c["k"]
    if kind == "power":
        pp = c["p"]
        if pp <= 1:
            raise ConfigError("parameters.function.p must exceed 1")
        qq = pp / (pp - 1)
        return lambda v: np.abs(v) ** pp / pp, lambda xi: np.abs(xi) ** qq / qq
    a = c["a"]
    return lambda v: a * np.abs(v), lambda xi: np.where(np.abs(xi) <= a, 0.0, np.inf)


def _run_legendre(p: dict, ctx: Context) -> dict:
    f, fstar = _legendre_function(p["function"])
    v = _grid(p, "v")
    ctx.step("conjugate")
    F = SampledConvexFunction(v, f(v))
    G = conjugate(F)
    exact = fstar(G.grid)
    return {
        "legendre.csv": csv_bytes(["xi", "conjugate", "exact", "truncated"],
                                  zip(G.grid, G.values, exact, G.truncated)),
        "summary.json": json_bytes({"biconjugate_error": biconjugate_check(F),
                                    "max_error": float(np.max(np.abs(G.values - exact)))}),
    }


SCENARIOS: dict[str, Scenario] = {s.kind: s for s in [
    Scenario("flow", "oscillating-mobility flow against the averaged limit e^-t", {
        "coefficient": Param({"type": "cosine"}, _table),
        "energy_stiffness": Param(1.0, _pos), "q0": Param(1.0, _num), "T": Param(2.0, _pos),
        "eps": Param([0.2, 0.1, 0.05, 0.025], _decreasing_pos_list),
        "rtol": Param(1e-8, _pos), "atol": Param(1e-10, _pos),
        "points_per_period": Param(50, _int_at_least(4)), "tilt_slope": Param(0.0, _num),
    }, _run_flow),
    Scenario("cell-grid", "cell-problem formula for the limit bipotential M0", CELL, _run_cell_grid),
    Scenario("classify", "limit bipotential is contact-equivalent but not a dual sum", {
        **CELL, "separability_tolerance": Param(1e-8, _pos)}, _run_classify),
    Scenario("phi", "homogeneous profile Phi of M0 and its bounds", {
        "coefficient": Param({"type": "cosine"}, _table), "n_s": Param(101, _int_at_least(3))},
        _run_phi),
    Scenario("conjecture", "M0 below the effective dual sum, equality on the contact line", {
        "coefficient": Param({"type": "cosine"}, _table), **GRID}, _run_conjecture),
    Scenario("nonconvexity", "joint non-convexity of M0 for a power-law mobility", {
        "coefficient": Param({"type": "power"}, _table), "v0": Param(1.0, _pos)},
        _run_nonconvexity),
    Scenario("distances", "Riemannian distances induced by mu_bar and mu_half", {
        "coefficient": Param({"type": "cosine"}, _table), "q0": Param(0.0, _num),
        "q1": Param(1.0, _num)}, _run_distances),
    Scenario("wiggly-energy", "oscillating energy: dry-friction threshold and effective potential", {
        "amplitude": Param(1.0, _pos), "rho": Param(1.0, _pos),
        "xi_min": Param(-3.0, _num), "xi_max": Param(3.0, _num), "n_xi": Param(61, _int_at_least(3)),
        "v_max": Param(2.0, _pos), "n_v": Param(41, _int_at_least(3))}, _run_wiggly_energy),
    Scenario("membrane", "thin layer versus the cosh transmission limit", {
        "a_star": Param({"type": "constant"}, _table), "a_minus": Param(1.0, _pos),
        "a_plus": Param(1.0, _pos), "potential_slope": Param(0.0, _num),
        "eps": Param([0.2, 0.1, 0.05], _decreasing_pos_list), "n_bulk": Param(100, _int_at_least(2)),
        "n_layer": Param(32, _int_at_least(32)), "T": Param(1.0, _pos),
        "datum": Param("step", _one_of("step", "equilibrium")),
        "snapshots": Param(50, _int_at_least(1))}, _run_membrane),
    Scenario("legendre-check", "Legendre-Fenchel duality of dissipation potentials", {
        "function": Param({"type": "quadratic"}, _table), "v_min": Param(-2.0, _num),
        "v_max": Param(2.0, _num), "n_v": Param(401, _int_at_least(3))}, _run_legendre),
]}


# ---------------------------------------------------------------------------
# config handling


@dataclass(frozen=True)
class Config:
    kind: str
    parameters: dict
    source: str

    def parameter_hash(self, tolerance_scale: float = 1.0) -> str:
        payload = json_bytes({"kind": self.kind, "parameters": self.parameters,
                              "tolerance_scale": tolerance_scale})
        return hashlib.sha256(payload).hexdigest()


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    if not data:
        raise ConfigError(f"{path}: empty config; expected 'kind' and a [parameters] table")
    extra = set(data) - {"kind", "parameters"}
    if extra:
        raise ConfigError(f"{path}: unknown top-level key(s) {sorted(extra)}")
    kind = data.get("kind")
    if kind not in SCENARIOS:
        raise ConfigError(f"{path}: 'kind' must be one of {sorted(SCENARIOS)}, got {kind!r}")
    params = data.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{path}: 'parameters' must be a table")
    return Config(kind, _validate(kind, params, SCENARIOS[kind].schema), str(path))


def run_config(cfg: Config, out_dir: Path, ctx: Context) -> list[Path]:
    """Compute every output in memory, then write them atomically with a manifest."""
    sc = SCENARIOS[cfg.kind]
    try:
        files = sc.runner(cfg.parameters, ctx)
    except ConfigError:
        raise
    except (EdpconvError, FloatingPointError, ArithmeticError) as exc:
        raise NumericalFailure(ctx.operation, exc) from exc
    manifest = {
        "kind": cfg.kind,
        "anchor": sc.anchor,
        "parameter_hash": cfg.parameter_hash(ctx.tolerance_scale),
        "version": __version__,
        "parameters": cfg.parameters,
        "tolerance_scale": ctx.tolerance_scale,
        "files": {name: hashlib.sha256(data).hexdigest() for name, data in sorted(files.items())},
    }
    files["manifest.json"] = json_bytes(manifest)
    return write_all(out_dir, files)


def catalog() -> list[str]:
    return [f"{s.kind} - {s.anchor}" for s in SCENARIOS.values()]


def _threads(arg: Optional[int]) -> int:
    env = os.environ.get("EDPCONV_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"EDPCONV_THREADS must be an integer, got {env!r}") from exc
    else:
        n = arg if arg is not None else 1
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edpconv", description="EDP-convergence scenario runner")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the scenario catalog")
    v = sub.add_parser("validate", help="parse and check a config without running it")
    v.add_argument("config")
    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: out/<config name>)")
    r.add_argument("--threads", type=int, default=None)
    r.add_argument("--tolerance-scale", type=float, default=1.0)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(catalog()))
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"ok: {cfg.kind} {cfg.parameter_hash()}")
            return EXIT_OK
        if not (args.tolerance_scale > 0 and math.isfinite(args.tolerance_scale)):
            raise ConfigError("--tolerance-scale must be a positive number")
        ctx = Context(_threads(args.threads), args.tolerance_scale)
        out = Path(args.out) if args.out else Path("out") / Path(args.config).stem
        for p in run_config(cfg, out, ctx):
            print(p)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure in {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
