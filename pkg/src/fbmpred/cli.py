"""Command-line front end.

Thin shell over the library: every command is a pure function of its merged
configuration (command-line flags override config-file keys override built-in
defaults), writes CSV with 17 significant digits and LF line endings, and maps
failures to stable exit codes:

    0  success
    1  verification failure
    2  input / domain error
    3  numerical degeneracy

Commands: kernel, cov, cond-cov, predict, simulate, asymptotics, verify.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asy
from . import oracle
from .exceptions import DegeneracyError, DomainError, FitError, QuadratureError
from .fbm import as_hurst, fbm_cov, isometry_gap, kernel_constants, kernel_k
from .numerics import QuadratureSpec, integrate_weighted
from .prediction import ObservedPath, build_conditional_law, cond_cov

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

_DEFAULTS = {
    "hurst": None,
    "u": None,
    "t": None,
    "s": None,
    "grid": None,
    "in": None,
    "out": None,
    "seed": 0,
    "paths": 1,
    "quad_tol": 1e-8,
    "sweep": "cov",
    "d_scale": 1.0,
}


@dataclass
class RunConfig:
    command: str
    hurst: float | None = None
    u: float | None = None
    t: float | None = None
    s: float | None = None
    grid: tuple[float, float, int] | None = None
    input_path: str | None = None
    output_path: str | None = None
    seed: int = 0
    n_paths: int = 1
    quad_tol: float = 1e-8
    sweep: str = "cov"
    d_scale: float = 1.0
    extra: dict = field(default_factory=dict)


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid must be start:end:count, got {text!r}")
    start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise DomainError("grid count must be >= 1")
    return start, end, count


def _grid_points(spec: tuple[float, float, int], geometric: bool = False) -> np.ndarray:
    start, end, count = spec
    if count == 1:
        return np.array([start])
    if geometric:
        return np.geomspace(start, end, count)
    return np.linspace(start, end, count)


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    for key in merged:
        flag_value = getattr(args, key if key != "in" else "input", None)
        if flag_value is not None:
            merged[key] = flag_value
    grid = merged.get("grid")
    if isinstance(grid, str):
        grid = _parse_grid(grid)
    return RunConfig(
        command=args.command,
        hurst=None if merged["hurst"] is None else float(merged["hurst"]),
        u=None if merged["u"] is None else float(merged["u"]),
        t=None if merged["t"] is None else float(merged["t"]),
        s=None if merged["s"] is None else float(merged["s"]),
        grid=grid,
        input_path=merged["in"],
        output_path=merged["out"],
        seed=int(merged["seed"]),
        n_paths=int(merged["paths"]),
        quad_tol=float(merged["quad_tol"]),
        sweep=str(merged["sweep"]),
        d_scale=float(merged["d_scale"]),
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: str | None, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else _fmt(float(x)) for x in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _require(config: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(config, name) is None:
            raise DomainError(f"command {config.command!r} requires --{name_to_flag(name)}")


def name_to_flag(name: str) -> str:
    return {"hurst": "hurst", "u": "u", "t": "t", "s": "s", "grid": "grid",
            "input_path": "in", "output_path": "out"}.get(name, name)


def _read_path_csv(path: str) -> ObservedPath:
    times, values = [], []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip().lower() != "time,value":
        raise DomainError(f"{path}:1: expected header 'time,value'")
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DomainError(f"{path}:{lineno}: expected two comma-separated fields")
        try:
            times.append(float(parts[0]))
            values.append(float(parts[1]))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: {exc}") from exc
    try:
        return ObservedPath(times=np.asarray(times), values=np.asarray(values))
    except DomainError as exc:
        raise DomainError(f"{path}: {exc}") from exc


def cmd_kernel(config: RunConfig) -> int:
    _require(config, "hurst", "t", "grid")
    s = _grid_points(config.grid)
    k = kernel_k(config.t, s, config.hurst)
    _write_csv(config.output_path, ["s", "k"], zip(s, np.atleast_1d(k)))
    return EXIT_OK


def cmd_cov(config: RunConfig) -> int:
    _require(config, "hurst", "grid")
    t = _grid_points(config.grid)
    if config.s is None:
        values = [fbm_cov(x, x, config.hurst) for x in t]
        _write_csv(config.output_path, ["t", "var"], zip(t, values))
    else:
        values = [fbm_cov(x, config.s, config.hurst) for x in t]
        _write_csv(config.output_path, ["t", "cov"], zip(t, values))
    return EXIT_OK


def cmd_cond_cov(config: RunConfig) -> int:
    _require(config, "hurst", "t", "s", "grid")
    u = _grid_points(config.grid)
    values = [cond_cov(config.t, config.s, float(x), config.hurst, rel_tol=config.quad_tol, check=False)
              for x in u]
    _write_csv(config.output_path, ["u", "value"], zip(u, values))
    return EXIT_OK


def cmd_predict(config: RunConfig) -> int:
    _require(config, "hurst", "input_path", "grid")
    path = _read_path_csv(config.input_path)
    grid = _grid_points(config.grid)
    law = build_conditional_law(path, grid, config.hurst, rel_tol=config.quad_tol)
    _write_csv(config.output_path, ["t", "mean", "std"], zip(law.grid, law.mean, law.std))
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    _require(config, "hurst", "grid")
    grid = _grid_points(config.grid)
    gg = oracle.build_grid_gaussian(grid, config.hurst)
    paths = oracle.sample_fbm(gg, oracle.MCConfig(n_paths=max(2, config.n_paths), seed=config.seed))
    paths = paths[: config.n_paths]
    header = ["t"] + [f"p{i}" for i in range(paths.shape[0])]
    rows = ([grid[j]] + list(paths[:, j]) for j in range(grid.size))
    _write_csv(config.output_path, header, rows)
    return EXIT_OK


def cmd_asymptotics(config: RunConfig) -> int:
    _require(config, "hurst")
    hurst = as_hurst(config.hurst)
    sweep = config.sweep
    if sweep in ("g", "f") and hurst.near_half:
        raise DomainError("asymptotic sweeps require h != 0.5")
    if sweep == "g":
        report = asy.no_info_sweep(hurst)
        rows = list(zip(report.u_grid, report.diagnostic))
        header = ["u", "g"]
    elif sweep == "f":
        report = asy.full_info_sweep(hurst, 1.0, 1.0)
        rows = list(zip(report.u_grid, report.diagnostic))
        header = ["u", "f"]
    elif sweep == "cov":
        grid = config.grid or (0.005, 0.995, 100)
        u = _grid_points(grid)
        values = [cond_cov(1.0, 1.0, float(x), hurst, rel_tol=config.quad_tol, check=False)
                  for x in u]
        _write_csv(config.output_path, ["u", "value"], zip(u, values))
        return EXIT_OK
    else:
        raise DomainError(f"unknown sweep {sweep!r}; expected g, f or cov")
    summary = [
        ("fitted_exponent", _fmt(report.fitted_exponent)),
        ("fitted_constant", _fmt(report.fitted_constant)),
        ("target_exponent", _fmt(report.target_exponent)),
        ("target_constant", _fmt(report.target_constant)),
    ]
    _write_csv(config.output_path, header, rows + summary)
    return EXIT_OK


def _verify_checks(config: RunConfig):
    """Yield (name, passed, observed, tolerance) for the verification suites."""
    quad_tol = config.quad_tol
    h_values = (0.25, 0.4, 0.6, 0.75)
    # isometry suite (supports the corrupted-constant test hook)
    for h in h_values:
        t = 1.0
        spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24,
                              alpha=-abs(2 * h - 1), beta=2 * h - 1, rel_tol=quad_tol)
        value, _ = integrate_weighted(
            lambda v: (config.d_scale * kernel_k(t, v, h)) ** 2
            * v ** abs(2 * h - 1) * (t - v) ** (1 - 2 * h),
            0.0, t, spec,
        )
        rel = abs(value - t ** (2 * h)) / t ** (2 * h)
        yield (f"isometry_h{h}", rel < 1e-4, rel, 1e-4)
    # covariance reproduction
    for h in (0.25, 0.75):
        t, s = 1.5, 0.6
        spec = QuadratureSpec(rule="adaptive-subdivision", nodes=24,
                              alpha=-abs(2 * h - 1), beta=h - 0.5, rel_tol=quad_tol)
        value, _ = integrate_weighted(
            lambda v: kernel_k(t, v, h) * kernel_k(s, v, h)
            * v ** abs(2 * h - 1) * (s - v) ** (0.5 - h),
            0.0, s, spec,
        )
        target = fbm_cov(t, s, h)
        rel = abs(value - target) / target
        yield (f"cov_reproduction_h{h}", rel < 1e-4, rel, 1e-4)
    # two-form agreement of the conditional covariance
    for h in (0.25, 0.75):
        lhs = cond_cov(1.5, 1.2, 0.7, h, rel_tol=quad_tol, check=False)
        from .prediction import _historical_kernel_product
        rhs = fbm_cov(1.5, 1.2, h) - _historical_kernel_product(1.5, 1.2, 0.7, as_hurst(h), quad_tol)
        gap = abs(lhs - rhs) / max(1.0, fbm_cov(1.5, 1.2, h))
        yield (f"two_form_h{h}", gap < 1e-4, gap, 1e-4)
    # brownian exactness
    yield ("brownian_cond_cov", cond_cov(1.7, 1.2, 1.0, 0.5) == 0.2, cond_cov(1.7, 1.2, 1.0, 0.5) - 0.2, 0.0)
    yield ("brownian_isometry", isometry_gap(1.0, 0.4, 0.5) == 0.0, isometry_gap(1.0, 0.4, 0.5), 0.0)
    # oracle convergence (small meshes to stay fast)
    for h in (0.25, 0.75):
        study = oracle.refinement_study(h, 1.0, np.linspace(1.0, 2.0, 5), (32, 64, 128), seed=7)
        ok = bool(np.all(study.cov_gap[1:] <= study.cov_gap[:-1] * 1.1)
                  and np.all(study.mean_gap[1:] <= study.mean_gap[:-1] * 1.1))
        yield (f"oracle_convergence_h{h}", ok, float(study.cov_gap[-1]), 1.1)
    # asymptotic fits
    for h in (0.25, 0.75):
        report = asy.no_info_sweep(h, n_points=6)
        ok = (abs(report.fitted_exponent - report.target_exponent) < 0.05
              and abs(report.fitted_constant / report.target_constant - 1.0) < 0.05)
        yield (f"no_info_fit_h{h}", ok, report.fitted_exponent, 0.05)
        report = asy.full_info_sweep(h, 1.0, 1.0, n_points=6)
        ok = (abs(report.fitted_exponent - report.target_exponent) < 0.05
              and abs(report.fitted_constant / report.target_constant - 1.0) < 0.05)
        yield (f"full_info_fit_h{h}", ok, report.fitted_exponent, 0.05)


def cmd_verify(config: RunConfig) -> int:
    rows = []
    all_ok = True
    failing = None
    for name, ok, observed, tolerance in _verify_checks(config):
        rows.append((name, "pass" if ok else "fail", _fmt(observed), _fmt(tolerance)))
        if not ok and failing is None:
            failing = name
        all_ok = all_ok and ok
    _write_csv(config.output_path, ["name", "status", "observed", "tolerance"], rows)
    if not all_ok:
        print(f"verification failed: {failing}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    return EXIT_OK


_COMMANDS = {
    "kernel": cmd_kernel,
    "cov": cmd_cov,
    "cond-cov": cmd_cond_cov,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "asymptotics": cmd_asymptotics,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmpred",
        description="Conditional (prediction) law of fractional Brownian motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--hurst", type=float)
        p.add_argument("--u", type=float)
        p.add_argument("--t", type=float)
        p.add_argument("--s", type=float)
        p.add_argument("--grid", help="start:end:count")
        p.add_argument("--in", dest="input", help="input path CSV (header time,value)")
        p.add_argument("--out", help="output CSV path (stdout if omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--quad-tol", dest="quad_tol", type=float)
        p.add_argument("--sweep", choices=("g", "f", "cov"))
        p.add_argument("--d-scale", dest="d_scale", type=float, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _merge_config(args)
        return _COMMANDS[args.command](config)
    except (DomainError, FitError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegeneracyError, QuadratureError) as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
