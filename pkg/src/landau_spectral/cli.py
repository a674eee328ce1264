"""Command-line interface: simulation runs, verification, tensor cache.

Subcommands:

* ``run --config cfg.json`` -- build or load the coupling tensor, construct
  the initial datum, integrate, and write diagnostics/final-state CSVs.
* ``verify --level fast|full [--seed S] [--out report.json]`` -- run the
  property suites and emit a JSON report with per-check margins.
* ``build-tensor --truncation N --out DIR`` -- precompute a tensor cache.

The tensor cache directory resolves as: ``LANDAU_TENSOR_DIR`` environment
variable, else the config's ``tensor_dir``, else ``./tensor-cache``.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import (
    Mode,
    NormSpec,
    SpectralState,
    load_state_csv,
    mode_table,
    nullspace_norm,
    save_state_csv,
)
from .coupling import CouplingTensor, build_tensor, load_tensor, save_tensor
from .errors import ConfigError, SpectralError, TensorCacheError
from .solver import (
    IntegratorConfig,
    check_smallness,
    diagnostics,
    integrate_numeric,
    solve_cascade,
)
from .verification import run_checks

log = logging.getLogger("landau_spectral")

DEFAULT_CACHE_DIR = "tensor-cache"


@dataclass(frozen=True)
class RunConfig:
    truncation: int
    alpha: float
    c1: float
    dt: float
    t_final: float
    method: str
    init: dict
    diagnostics_path: str
    final_state_path: str
    trajectory_path: str | None
    tensor_dir: str | None

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        required = ("truncation", "alpha", "dt", "t_final", "init", "output")
        missing = [key for key in required if key not in raw]
        if missing:
            raise ConfigError(f"config is missing required fields: {', '.join(missing)}")
        output = raw["output"]
        if "diagnostics" not in output or "final_state" not in output:
            raise ConfigError("config output must name 'diagnostics' and 'final_state' paths")
        cfg = cls(
            truncation=int(raw["truncation"]),
            alpha=float(raw["alpha"]),
            c1=float(raw.get("c1", 0.05)),
            dt=float(raw["dt"]),
            t_final=float(raw["t_final"]),
            method=str(raw.get("method", "etd-rk4")),
            init=dict(raw["init"]),
            diagnostics_path=str(output["diagnostics"]),
            final_state_path=str(output["final_state"]),
            trajectory_path=output.get("trajectory"),
            tensor_dir=raw.get("tensor_dir"),
        )
        if cfg.truncation < 2:
            raise ConfigError(f"truncation must be >= 2, got {cfg.truncation}")
        if cfg.alpha > 0:
            raise ConfigError(f"alpha must be <= 0, got {cfg.alpha}")
        # delegate dt/t_final/c1/method validation
        try:
            cfg.integrator_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(
            method=self.method, dt=self.dt, t_final=self.t_final, c1=self.c1, alpha=self.alpha
        )


def example_dirac_coefficient(k: int) -> float:
    """Radial coefficient sqrt(2 Gamma(k+3/2) / (sqrt(pi) k!)) of the
    Dirac-minus-Maxwellian datum on mode (k, 0, 0); grows like k^(1/4)."""
    log_c = 0.5 * (
        math.log(2.0) + math.lgamma(k + 1.5) - 0.5 * math.log(math.pi) - math.lgamma(k + 1)
    )
    return math.exp(log_c)


def init_example_dirac(N: int) -> SpectralState:
    """Radial datum of the Dirac-minus-Maxwellian example.

    Carries the radial coefficients on modes (k, 0, 0) for 2 <= k <= N/2;
    purely radial, orthogonal to the collision invariants, and with a
    vanishing shell-2 angular block.
    """
    if N < 2:
        raise ValueError(f"truncation must be >= 2, got {N}")
    amps = {(k, 0, 0): example_dirac_coefficient(k) for k in range(2, N // 2 + 1)}
    return SpectralState.from_dict(N, amps)


def init_single_mode(N: int, mode, amplitude: complex) -> SpectralState:
    return SpectralState.from_dict(N, {tuple(mode): amplitude})


def init_from_file(path, N: int) -> SpectralState:
    state = load_state_csv(path, truncation=N)
    resid = nullspace_norm(state)
    log.info(
        "loaded %s: null-space residual %.3e (%s)",
        path,
        resid,
        "in the invariant complement" if resid <= 1e-12 else "NOT invariant-orthogonal",
    )
    return state


def build_initial_state(cfg: RunConfig) -> SpectralState:
    kind = cfg.init.get("kind")
    if kind == "example-dirac":
        return init_example_dirac(cfg.truncation)
    if kind == "single-mode":
        mode = cfg.init.get("mode")
        amp = cfg.init.get("amplitude", 1.0)
        if mode is None or len(mode) != 3:
            raise ConfigError("single-mode init needs 'mode': [n, l, m]")
        if isinstance(amp, (list, tuple)):
            amp = complex(amp[0], amp[1])
        return init_single_mode(cfg.truncation, mode, amp)
    if kind == "file":
        path = cfg.init.get("path")
        if not path:
            raise ConfigError("file init needs 'path'")
        return init_from_file(path, cfg.truncation)
    raise ConfigError(f"unknown init kind {kind!r}")


def resolve_cache_dir(cfg_dir: str | None) -> Path:
    env = os.environ.get("LANDAU_TENSOR_DIR")
    return Path(env or cfg_dir or DEFAULT_CACHE_DIR)


def tensor_cache_path(cache_dir: Path, N: int) -> Path:
    return cache_dir / f"coupling_N{N}.csv"


def load_or_build_tensor(N: int, cache_dir: Path) -> CouplingTensor:
    path = tensor_cache_path(cache_dir, N)
    if path.exists():
        start = time.perf_counter()
        try:
            tensor = load_tensor(path, expected_N=N)
        except TensorCacheError as exc:
            log.warning("tensor cache invalid (%s); rebuilding", exc)
        else:
            log.info(
                "coupling tensor N=%d loaded from cache in %.3fs (%s)",
                N,
                time.perf_counter() - start,
                path,
            )
            return tensor
    start = time.perf_counter()
    tensor = build_tensor(N)
    built = time.perf_counter() - start
    cache_dir.mkdir(parents=True, exist_ok=True)
    save_tensor(tensor, path)
    log.info("coupling tensor N=%d built in %.3fs (cached to %s)", N, built, path)
    return tensor


_DIAG_COLUMNS = (
    "t",
    "q_alpha_norm",
    "gs_norm",
    "s2_norm",
    "nullspace_residual",
    "energy_integral",
)


def write_diagnostics_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(_DIAG_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    format(v, ".17g")
                    for v in (
                        r.t,
                        r.q_alpha_norm,
                        r.gs_norm,
                        r.s2_norm,
                        r.nullspace_residual,
                        r.energy_integral,
                    )
                )
                + "\n"
            )


def write_trajectory_csv(series, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,n,l,m,re,im\n")
        for t, state in series:
            for mo, amp in state.nonzero_items():
                fh.write(
                    f"{format(t, '.17g')},{mo.n},{mo.l},{mo.m},"
                    f"{format(amp.real, '.17g')},{format(amp.imag, '.17g')}\n"
                )


def run(cfg: RunConfig) -> int:
    tensor = load_or_build_tensor(cfg.truncation, resolve_cache_dir(cfg.tensor_dir))
    init = build_initial_state(cfg)

    smallness = check_smallness(init, cfg.c1)
    if smallness.passed:
        log.info(
            "shell-2 norm %.4f within decay threshold %.4f (margin %.4f)",
            smallness.s2,
            smallness.threshold,
            smallness.margin,
        )
    else:
        log.warning(
            "shell-2 norm %.4f exceeds decay threshold %.4f; the monotone "
            "energy estimate is not guaranteed, proceeding anyway",
            smallness.s2,
            smallness.threshold,
        )

    icfg = cfg.integrator_config()
    if cfg.method == "cascade":
        traj = solve_cascade(init, tensor)
        n_steps = int(math.floor(cfg.t_final / cfg.dt + 1e-9))
        times = [k * cfg.dt for k in range(n_steps + 1)]
        series = traj.sample(times)
    else:
        series = integrate_numeric(init, tensor, icfg)

    rows = diagnostics(series, NormSpec(alpha=cfg.alpha, c1=cfg.c1))
    write_diagnostics_csv(rows, cfg.diagnostics_path)
    save_state_csv(series[-1][1], cfg.final_state_path)
    if cfg.trajectory_path:
        write_trajectory_csv(series, cfg.trajectory_path)
    log.info(
        "run complete: %d samples to t=%.6g, diagnostics -> %s, final state -> %s",
        len(series),
        series[-1][0],
        cfg.diagnostics_path,
        cfg.final_state_path,
    )
    return 0


def _emit_error(exc: Exception) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="landau-spectral",
        description="Spectral cascade solver for the homogeneous Landau equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured problem")
    p_run.add_argument("--config", required=True, help="path to a JSON run configuration")

    p_verify = sub.add_parser("verify", help="run the property-check suites")
    p_verify.add_argument("--level", choices=("fast", "full"), default="fast")
    p_verify.add_argument("--seed", type=int, default=12345)
    p_verify.add_argument("--out", help="also write the JSON report to this path")

    p_build = sub.add_parser("build-tensor", help="precompute a coupling tensor cache")
    p_build.add_argument("--truncation", type=int, required=True)
    p_build.add_argument("--out", help="cache directory (default: resolved cache dir)")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)

    try:
        if args.command == "run":
            return run(RunConfig.from_file(args.config))
        if args.command == "verify":
            report = run_checks(level=args.level, seed=args.seed)
            text = json.dumps(report, indent=2)
            print(text)
            if args.out:
                Path(args.out).write_text(text + "\n")
            return 0 if report["passed"] else 1
        if args.command == "build-tensor":
            cache_dir = Path(args.out) if args.out else resolve_cache_dir(None)
            start = time.perf_counter()
            tensor = build_tensor(args.truncation)
            cache_dir.mkdir(parents=True, exist_ok=True)
            path = tensor_cache_path(cache_dir, args.truncation)
            save_tensor(tensor, path)
            log.info(
                "tensor N=%d (%d entries) built in %.3fs -> %s",
                args.truncation,
                len(tensor),
                time.perf_counter() - start,
                path,
            )
            return 0
    except (SpectralError, ValueError, OSError) as exc:
        _emit_error(exc)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
