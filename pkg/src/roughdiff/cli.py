"""Config-driven experiment runner.

Usage::

    roughdiff <command> [--config FILE] [--out DIR] [--seed N] [--jobs J] [--format csv|json]
    roughdiff validate --config FILE

The config is a JSON object; command-line flags override its keys. Every
artifact is written to ``<out>/<command>.<format>`` and carries the SHA-256
of the effective config and the seed. Exit status: 0 success, 2 config error,
3 invariant violation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .bounds import BoundInputs, check, lipschitz_rhs, poincare_constant
from .coefficient import (
    CoefficientField,
    ContrastFamily,
    Interval,
    MollifiedSequence,
    PiecewiseFunction,
    coefficient_from_dict,
)
from .errors import InvariantViolation, NumericalError, RoughDiffError
from .exact1d import default_probes, probe_operator_distance, solve_hat, solve_primal
from .limits import convergence_study
from .sampling import random_field

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_NUMERICAL = 0, 2, 3, 4

COMMANDS = ("solve", "example1", "bounds-audit", "lipschitz", "spectrum",
            "limit-converge", "resolvent-check", "kernel2d", "strong2d")

SWEEP_KEYS = ("M", "lambdas", "sizes", "nus", "widths")

DEFAULTS: dict[str, Any] = {"seed": 0, "jobs": 1, "format": "csv", "out": "out"}

_TOP_KEYS = {"command", "seed", "jobs", "format", "out", "coefficient", "coefficient_file",
             "other", "data", "grid", "sweep", "samples", "cases", "tol", "values"}


class ConfigError(RoughDiffError):
    """Invalid configuration; carries a line reference when one is known."""


# -- config ------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Parsed config plus the raw text used for line references."""

    values: dict
    text: str = ""
    path: str | None = None
    base_dir: str = "."

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def command(self) -> str | None:
        return self.values.get("command")

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    def sha256(self) -> str:
        canon = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def where(self, key: str) -> str:
        """``file:line`` of the first occurrence of ``"key"`` in the raw text."""
        name = self.path or "<config>"
        needle = f'"{key}"'
        for lineno, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return f"{name}:{lineno}"
        return name

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig(dict(DEFAULTS))
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    return ExperimentConfig({**DEFAULTS, **data}, text, path,
                            os.path.dirname(os.path.abspath(path)))


def apply_overrides(cfg: ExperimentConfig, **flags) -> ExperimentConfig:
    values = dict(cfg.values)
    values.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig(values, cfg.text, cfg.path, cfg.base_dir)


def _coefficient_spec(cfg: ExperimentConfig, key: str = "coefficient"):
    if key == "coefficient" and "coefficient_file" in cfg.values:
        with open(cfg.resolve(cfg["coefficient_file"]), encoding="utf-8") as fh:
            return json.load(fh)
    return cfg.get(key)


def validate(cfg: ExperimentConfig) -> list[str]:
    """Schema and invariant diagnostics; empty when the config is usable."""
    diags = []
    cmd = cfg.command
    if cmd is None:
        diags.append(f"{cfg.path or '<config>'}: no command given")
    elif cmd not in COMMANDS:
        diags.append(f"{cfg.where('command')}: unknown command {cmd!r}")
    for key in sorted(set(cfg.values) - _TOP_KEYS):
        diags.append(f"{cfg.where(key)}: unknown key {key!r}")
    seed = cfg.get("seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        diags.append(f"{cfg.where('seed')}: seed must be a nonnegative integer")
    jobs = cfg.get("jobs")
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        diags.append(f"{cfg.where('jobs')}: jobs must be a positive integer")
    if cfg.get("format") not in ("csv", "json"):
        diags.append(f"{cfg.where('format')}: format must be 'csv' or 'json'")
    sweep = cfg.get("sweep", {})
    if not isinstance(sweep, dict):
        diags.append(f"{cfg.where('sweep')}: sweep must be an object")
        sweep = {}
    for key, val in sweep.items():
        if key not in SWEEP_KEYS:
            diags.append(f"{cfg.where(key)}: unknown sweep key {key!r}")
        elif not isinstance(val, list):
            diags.append(f"{cfg.where(key)}: sweep.{key} must be a list")
        elif not val:
            diags.append(f"{cfg.where(key)}: empty sweep sweep.{key}")
    if "coefficient_file" in cfg.values:
        path = cfg.resolve(str(cfg["coefficient_file"]))
        if not os.path.isfile(path):
            diags.append(f"{cfg.where('coefficient_file')}: missing coefficient file {path}")
    for key in ("coefficient", "other"):
        try:
            spec = _coefficient_spec(cfg, key)
            if spec is not None:
                coefficient_from_dict(spec)
        except FileNotFoundError:
            pass
        except (RoughDiffError, KeyError, TypeError, ValueError) as exc:
            diags.append(f"{cfg.where(key)}: invalid {key}: {_describe(exc)}")
    data = cfg.get("data", {})
    if not isinstance(data, dict):
        diags.append(f"{cfg.where('data')}: data must be an object")
    else:
        for key, val in data.items():
            if key not in ("f", "g"):
                diags.append(f"{cfg.where(key)}: unknown data key {key!r}")
            elif not isinstance(val, (int, float, dict)) or isinstance(val, bool):
                diags.append(f"{cfg.where(key)}: data.{key} must be a number or a function")
    grid = cfg.get("grid", {})
    if not isinstance(grid, dict):
        diags.append(f"{cfg.where('grid')}: grid must be an object")
    else:
        n = grid.get("n", 2)
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            diags.append(f"{cfg.where('grid')}: grid.n must be an integer >= 2")
    return diags


def _describe(exc: BaseException) -> str:
    if isinstance(exc, KeyError):
        return f"missing key {exc.args[0]!r}"
    return str(exc)


# -- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


@dataclass
class Artifact:
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)


def write_artifact(art: Artifact, cfg: ExperimentConfig, command: str) -> str:
    out = cfg.resolve(str(cfg["out"])) if cfg.path else str(cfg["out"])
    os.makedirs(out, exist_ok=True)
    fmt = cfg["format"]
    path = os.path.join(out, f"{command}.{fmt}")
    meta = {"command": command, "config_sha256": cfg.sha256(), "seed": cfg.seed,
            "version": __version__}
    if fmt == "json":
        payload = {"meta": meta, "summary": art.summary, "columns": art.columns,
                   "rows": [dict(zip(art.columns, r)) for r in art.rows]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2)
            fh.write("\n")
        return path
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, val in list(meta.items()) + sorted(art.summary.items()):
            fh.write(f"# {key}: {_fmt(val)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(art.columns)
        for r in art.rows:
            w.writerow([_fmt(v) for v in r])
    return path


# -- inputs ------------------------------------------------------------------

def _coefficient(cfg, key="coefficient", default=None):
    spec = _coefficient_spec(cfg, key)
    if spec is None:
        return default
    return coefficient_from_dict(spec)


def _field(cfg, key="coefficient", default=None) -> CoefficientField:
    obj = _coefficient(cfg, key, default)
    if isinstance(obj, ContrastFamily):
        return obj.member()
    if not isinstance(obj, CoefficientField):
        raise ConfigError(f"{cfg.where(key)}: {key} must be a single coefficient here")
    return obj


def _function(spec, interval: Interval, default: float) -> PiecewiseFunction:
    if spec is None:
        spec = default
    if isinstance(spec, (int, float)):
        return PiecewiseFunction.constant(float(spec), interval)
    pf = PiecewiseFunction.from_dict(spec)
    if not pf.interval.same_as(interval):
        raise ConfigError("data function interval differs from the coefficient interval")
    return pf


def _sweep(cfg, key, default) -> list:
    return list(cfg.get("sweep", {}).get(key, default))


def _grid_n(cfg, default: int) -> int:
    return int(cfg.get("grid", {}).get("n", default))


def _pmap(cfg, fn: Callable, items: Sequence) -> list:
    jobs = int(cfg["jobs"])
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


_UNIT = CoefficientField.constant(1.0, Interval(0.0, 1.0))
_EXAMPLE1 = ContrastFamily(Interval(-1.0, 1.0), -0.5, 0.5)


# -- commands ----------------------------------------------------------------

def cmd_solve(cfg) -> Artifact:
    pbar = _field(cfg, default=_UNIT)
    I = pbar.interval
    data = cfg.get("data", {})
    f = _function(data.get("f"), I, 1.0)
    g = _function(data.get("g"), I, 0.0)
    sol = solve_hat(pbar, f, g)
    x = np.linspace(I.a, I.b, int(cfg.get("samples", 201)))
    rows = list(zip(x, sol.u(x), sol.q(x)))
    return Artifact(["x", "u", "q"], rows, {"norm": sol.norm()})


def cmd_example1(cfg) -> Artifact:
    Ms = [float(m) for m in _sweep(cfg, "M", [0.25, 1.0, 4.0, 100.0])]
    one = PiecewiseFunction.constant(1.0, _EXAMPLE1.interval)
    sols = _pmap(cfg, lambda m: solve_primal(_EXAMPLE1.diffusivity(m), one), Ms)
    x = np.linspace(-1.0, 1.0, int(cfg.get("samples", 201)))
    x[np.abs(x) < 1e-15] = 0.0
    cols = [s.u(x) for s in sols]
    rows = [(xi, *[c[i] for c in cols]) for i, xi in enumerate(x)]
    return Artifact(["x"] + [f"u_M={m!r}" for m in Ms], rows)


def _audit_cases(cfg) -> list[tuple[CoefficientField, CoefficientField]]:
    rng = np.random.default_rng(cfg.seed)
    n = _grid_n(cfg, 256)
    cases = [(_UNIT, CoefficientField.constant(2.0, _UNIT.interval))]
    for _ in range(int(cfg.get("cases", 5))):
        a = float(rng.uniform(-1.0, 0.0))
        I = Interval(a, a + float(rng.uniform(0.5, 3.0)))
        k1, k2 = (int(k) for k in rng.integers(1, 6, size=2))
        cases.append((random_field(rng, I, k1, grid_n=n), random_field(rng, I, k2, grid_n=n)))
    return cases


def cmd_bounds_audit(cfg) -> Artifact:
    from .discrete import Grid, assemble, inverse_operator_norm, min_eigenvalue

    n = _grid_n(cfg, 256)
    seed = cfg.seed

    def audit(args):
        idx, (p1, p2) = args
        I = p1.interval
        grid = Grid.line(I.a, I.b, n)
        s1, s2 = assemble(grid, p1), assemble(grid, p2)
        reports = [
            check("inverse_norm", BoundInputs(I, p1), lambda: inverse_operator_norm(s1)),
            check("lipschitz", BoundInputs(I, p1, p2), lambda: inverse_operator_norm(s1, s2)),
            check("spectral_gap", BoundInputs(I, p1), lambda: min_eigenvalue(s1, seed=seed),
                  rtol=5e-3),
        ]
        return [(idx, r.bound_name, r.kind, r.bound_value, r.empirical_value, r.satisfied,
                 r.slack) for r in reports]

    rows = [row for chunk in _pmap(cfg, audit, list(enumerate(_audit_cases(cfg))))
            for row in chunk]
    ok = all(r[5] for r in rows)
    return Artifact(["case", "bound", "kind", "bound_value", "empirical_value", "satisfied",
                     "slack"], rows, {"all_satisfied": ok})


def cmd_lipschitz(cfg) -> Artifact:
    from .discrete import Grid, assemble, inverse_operator_norm

    p1 = _field(cfg, default=_UNIT)
    p2 = _field(cfg, "other", CoefficientField.constant(2.0, p1.interval))
    I = p1.interval
    rhs = lipschitz_rhs(p1, p2)
    rows = []
    for n in _sweep(cfg, "sizes", [_grid_n(cfg, 256)]):
        grid = Grid.line(I.a, I.b, int(n))
        d = inverse_operator_norm(assemble(grid, p1), assemble(grid, p2))
        rows.append((int(n), d, rhs, d <= rhs))
    probe = probe_operator_distance(p1, p2, default_probes(I))
    return Artifact(["n", "discrete_distance", "lipschitz_rhs", "satisfied"], rows,
                    {"probe_distance": probe, "all_satisfied": all(r[3] for r in rows)})


def cmd_spectrum(cfg) -> Artifact:
    from .bounds import spectral_gap_bound
    from .discrete import Grid, assemble, min_eigenvalue

    pbar = _field(cfg, default=_UNIT)
    I = pbar.interval
    gap = spectral_gap_bound(BoundInputs(I, pbar))
    sizes = [int(n) for n in _sweep(cfg, "sizes", [128, 256, 512, 1024])]
    vals = _pmap(cfg, lambda n: min_eigenvalue(assemble(Grid.line(I.a, I.b, n), pbar),
                                               seed=cfg.seed), sizes)
    rows = [(n, v, gap, v / gap, v >= gap * (1 - 5e-3)) for n, v in zip(sizes, vals)]
    return Artifact(["n", "min_eigenvalue", "gap_bound", "ratio", "satisfied"], rows,
                    {"poincare_c": poincare_constant(I), "all_satisfied": all(r[4] for r in rows)})


def cmd_limit_converge(cfg) -> Artifact:
    fam = _coefficient(cfg, default=_EXAMPLE1)
    if isinstance(fam, ContrastFamily):
        idx = [float(m) for m in _sweep(cfg, "M", [10.0, 100.0, 1000.0, 1e4])]
        members, limit = [fam.member(m) for m in idx], fam.limit()
    elif isinstance(fam, MollifiedSequence):
        idx = [int(k) for k in _sweep(cfg, "nus", list(range(1, len(fam) + 1)))]
        members, limit = [fam.member(k) for k in idx], fam.target
    else:
        raise ConfigError(f"{cfg.where('coefficient')}: limit-converge needs a contrast or "
                          "mollified family")
    f = _function(cfg.get("data", {}).get("f"), limit.interval, 1.0)
    table = convergence_study(members, limit, f, idx, jobs=int(cfg["jobs"]))
    probes = default_probes(limit.interval)
    dist = _pmap(cfg, lambda m: probe_operator_distance(m, limit, probes), members)
    rows = [(r.index, r.coef_distance, r.u_error, r.q_error, r.bound_ratio, d)
            for r, d in zip(table.rows, dist)]
    return Artifact(list(table.HEADER) + ["probe_distance"], rows)


def cmd_resolvent_check(cfg) -> Artifact:
    from .discrete import Grid, verify_resolvent_formula

    pbar = _field(cfg, default=_UNIT)
    I = pbar.interval
    grid = Grid.line(I.a, I.b, _grid_n(cfg, 128))
    tol = float(cfg.get("tol", 1e-9))
    lams = [float(v) for v in _sweep(cfg, "lambdas", [-0.5, 0.0, 0.05, 1.0])]
    vals = _pmap(cfg, lambda lam: verify_resolvent_formula(grid, pbar, lam), lams)
    rows = [(lam, v, v <= tol) for lam, v in zip(lams, vals)]
    return Artifact(["lambda", "discrepancy", "satisfied"], rows,
                    {"tol": tol, "all_satisfied": all(r[2] for r in rows)})


def cmd_kernel2d(cfg) -> Artifact:
    from .discrete import (Grid, KernelField2D, assemble, gradient, kernel_experiment_2d,
                           min_singular_value, vanishing_on_support)

    fld = KernelField2D()
    sizes = [int(n) for n in _sweep(cfg, "sizes", [32, 64, 128])]
    grids = [Grid.rectangle((0.0, 1.0), (0.0, 1.0), n) for n in sizes]
    res = _pmap(cfg, lambda g: float(np.max(np.abs(gradient(g).T @ fld.sample(g)))), grids)
    rows = []
    for k, (n, r) in enumerate(zip(sizes, res)):
        order = math.log(res[k - 1] / r) / math.log(n / sizes[k - 1]) if k else math.nan
        rows.append((n, r, order))
    g = Grid.rectangle((0.0, 1.0), (0.0, 1.0), _grid_n(cfg, 64))
    vanish = kernel_experiment_2d(g, vanishing_on_support(g, fld), fld)
    unit = min_singular_value(assemble(g, 1.0).block)
    return Artifact(["n", "div_residual", "observed_order"], rows,
                    {"sigma_min_vanishing": vanish.min_singular_value,
                     "sigma_min_unit": unit, "sigma_ratio": vanish.min_singular_value / unit})


def cmd_strong2d(cfg) -> Artifact:
    from .discrete import Grid, checkerboard, mollified_checkerboard, strong_convergence_2d

    grid = Grid.rectangle((0.0, 1.0), (0.0, 1.0), _grid_n(cfg, 64))
    nus = [int(k) for k in _sweep(cfg, "nus", [1, 2, 3, 4, 5, 6])]
    vals = tuple(cfg.get("values", (1.0, 0.25)))
    members = [mollified_checkerboard(grid, 0.2 * 2.0 ** -k, vals) for k in nus]
    table = strong_convergence_2d(grid, members, checkerboard(grid, vals), 1.0, nus)
    rows = [(r.index, r.coef_distance, r.u_error, r.q_error) for r in table.rows]
    return Artifact(["index", "coef_l1_distance", "u_error_l2", "q_error_l2"], rows)


HANDLERS: dict[str, Callable[[ExperimentConfig], Artifact]] = {
    "solve": cmd_solve, "example1": cmd_example1, "bounds-audit": cmd_bounds_audit,
    "lipschitz": cmd_lipschitz, "spectrum": cmd_spectrum,
    "limit-converge": cmd_limit_converge, "resolvent-check": cmd_resolvent_check,
    "kernel2d": cmd_kernel2d, "strong2d": cmd_strong2d,
}


def run(cfg: ExperimentConfig) -> tuple[int, str | None]:
    """Run the configured command; returns ``(exit status, artifact path)``."""
    diags = validate(cfg)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG, None
    command = cfg.command
    try:
        art = HANDLERS[command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT, None
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, None
    except (RoughDiffError, KeyError, TypeError, ValueError) as exc:
        print(f"config error: {cfg.path or '<config>'}: {_describe(exc)}", file=sys.stderr)
        return EXIT_CONFIG, None
    path = write_artifact(art, cfg, command)
    if art.summary.get("all_satisfied") is False:
        col = art.columns.index("satisfied")
        failed = [r for r in art.rows if not r[col]]
        print(f"invariant violated: {command}: {len(failed)} row(s) unsatisfied, see {path}",
              file=sys.stderr)
        return EXIT_INVARIANT, path
    return EXIT_OK, path


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="concurrent sweep points")
    common.add_argument("--format", choices=("csv", "json"))
    parser = argparse.ArgumentParser(prog="roughdiff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run {name}")
    sub.add_parser("validate", parents=[common], help="check a config without running it")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    flags = {"out": args.out, "seed": args.seed, "jobs": args.jobs, "format": args.format}
    if args.command != "validate":
        flags["command"] = args.command
    cfg = apply_overrides(cfg, **flags)
    if args.command == "validate":
        diags = validate(cfg)
        print(json.dumps({"diagnostics": diags}, indent=2))
        return EXIT_OK
    status, path = run(cfg)
    if path:
        print(path)
    return status


if __name__ == "__main__":
    sys.exit(main())
