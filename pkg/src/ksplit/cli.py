"""Command line front end: run experiments, verify properties, benchmark,
and estimate convergence orders.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 integration or domain error.
"""

import argparse
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import diagnostics, verify
from .baselines import METHOD_NAMES, integrate_method
from .errors import ConfigurationError, DomainError, IntegrationError, KsplitError
from .extension import DEFAULT_OMEGA, make_extension
from .flows import CompositionScheme, strang_composition
from .models import make_model

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3

BENCH_METHODS = (("2ndKsym", "ksym2"), ("3rdRK", "rk3"),
                 ("4thKsym", "ksym4"), ("5thRK", "rk5"))


@dataclass
class RunConfig:
    """Settings of one simulation run; validated on construction."""

    model: str = "model1"
    method: str = "ksym2"
    tau: float = 0.01
    t_final: float = 1000.0
    omega: float = DEFAULT_OMEGA
    record_every: int = 1
    initial: Optional[Tuple[float, ...]] = None
    out: Optional[str] = None
    seed: int = verify.DEFAULT_SEED
    al_sites: int = 4
    composition_gammas: Optional[Tuple[float, ...]] = field(default=None)

    def __post_init__(self):
        if self.method not in METHOD_NAMES:
            raise ConfigurationError(
                f"unknown method {self.method!r}; choose from {sorted(METHOD_NAMES)}")
        if self.tau <= 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.t_final < 0:
            raise ConfigurationError(f"t-final must be nonnegative, got {self.t_final}")
        if self.omega <= 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega}")
        if self.record_every < 1:
            raise ConfigurationError(f"record-every must be >= 1, got {self.record_every}")

    def build_model(self):
        if self.model in ("ablowitz_ladik", "al"):
            return make_model(self.model, N=self.al_sites)
        return make_model(self.model)

    def build_scheme(self):
        if self.composition_gammas is None:
            return None
        if self.method != "ksym4":
            raise ConfigurationError("composition_gammas only applies to ksym4")
        return strang_composition(tuple(self.composition_gammas), order=4)

    def resolve_initial(self, model):
        if self.initial is None:
            return model.default_initial
        z0 = np.asarray(self.initial, dtype=float)
        if z0.shape != (model.dim,):
            raise ConfigurationError(
                f"initial condition has {z0.size} entries, model {model.name} needs {model.dim}")
        return z0


def format_float(x):
    """Shortest round-trip decimal form of an IEEE double."""
    return repr(float(x))


def write_csv(path, traj):
    """Trajectory diagnostics as deterministic CSV (LF endings, no timestamps)."""
    d = traj.states.shape[2]
    rel_aug = diagnostics.relative_energy_error_series(traj, "augmented")
    rel_orig = diagnostics.relative_energy_error_series(traj, "original_first_copy")
    div = diagnostics.copy_divergence_series(traj)
    header = "t,energy_rel_aug,energy_rel_orig,copy_div_max," + ",".join(
        f"c{k + 1}" for k in range(d))
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for r in range(len(traj)):
            row = [traj.times[r], rel_aug[r], rel_orig[r], div[r]]
            row.extend(traj.states[r, 0, :])
            fh.write(",".join(format_float(x) for x in row) + "\n")


def run_trajectory(config):
    model = config.build_model()
    spec = make_extension(model, omega=config.omega)
    z0 = config.resolve_initial(model)
    return integrate_method(model, spec, config.method, z0, config.tau,
                            config.t_final, record_every=config.record_every,
                            scheme=config.build_scheme())


def cmd_run(config):
    traj = run_trajectory(config)
    out = config.out or f"{config.model}_{config.method}.csv"
    write_csv(out, traj)
    print(f"wrote {len(traj)} records to {out}")
    return EXIT_OK


def cmd_verify(suite, seed=verify.DEFAULT_SEED):
    results = verify.run_suite(suite, seed=seed)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  value={r.value:.3e}  "
              f"threshold {r.comparison} {r.threshold:.3e}  {status}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED


def cmd_bench(config):
    """Wall-clock comparison of the four headline methods at one setting.

    Timings are reported, never asserted: they are hardware bound.
    """
    model = config.build_model()
    spec = make_extension(model, omega=config.omega)
    z0 = config.resolve_initial(model)
    labels = []
    timings = []
    for label, method in BENCH_METHODS:
        start = time.perf_counter()
        integrate_method(model, spec, method, z0, config.tau, config.t_final,
                         record_every=max(int(round(config.t_final / config.tau)), 1))
        timings.append(time.perf_counter() - start)
        labels.append(label)
    print(f"CPU times (s) on {model.name}: tau={config.tau}, T={config.t_final}")
    print(" | ".join(f"{lab:>8s}" for lab in labels))
    print(" | ".join(f"{t:8.4f}" for t in timings))
    return EXIT_OK


def cmd_order(config, taus):
    model = config.build_model()
    spec = make_extension(model, omega=config.omega)
    taus_arr, errors = diagnostics.convergence_study(
        model, spec, config.method, taus, config.t_final,
        z0=config.resolve_initial(model))
    slope = float(np.polyfit(np.log(taus_arr), np.log(errors), 1)[0])
    print(f"order study: {config.method} on {model.name}, T={config.t_final}")
    for tau, err in zip(taus_arr, errors):
        print(f"  tau={format_float(tau):>22s}  error={err:.6e}")
    print(f"fitted slope: {slope:.3f}")
    return EXIT_OK


def _parse_floats(text):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse float list {text!r}") from exc


_CONFIG_KEYS = {
    "model": str,
    "method": str,
    "tau": float,
    "t_final": float,
    "omega": float,
    "record_every": int,
    "initial": _parse_floats,
    "out": str,
    "seed": int,
    "al_sites": int,
    "composition_gammas": _parse_floats,
}


def load_config_file(path):
    """Flat key=value file; unknown keys are rejected."""
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _CONFIG_KEYS[key](val.strip())
    return values


def build_run_config(args, defaults=None):
    """Merge defaults, config file, and command line flags (flags win)."""
    values = dict(defaults or {})
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in _CONFIG_KEYS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            values[key] = cli_val
    if isinstance(values.get("initial"), str):
        values["initial"] = _parse_floats(values["initial"])
    return RunConfig(**values)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ksplit",
        description="Explicit structure-preserving splitting integrators for "
                    "nonseparable non-canonical Hamiltonian systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--model", choices=["model1", "ablowitz_ladik", "al", "gyrocenter", "gyro"])
        p.add_argument("--method", choices=list(METHOD_NAMES))
        p.add_argument("--tau", type=float)
        p.add_argument("--t-final", dest="t_final", type=float)
        p.add_argument("--omega", type=float)
        p.add_argument("--record-every", dest="record_every", type=int)
        p.add_argument("--initial", type=str, help="comma separated coordinates")
        p.add_argument("--out", type=str)
        p.add_argument("--config", type=str, help="flat key=value config file")
        p.add_argument("--seed", type=int)

    p_run = sub.add_parser("run", help="integrate and write trajectory diagnostics as CSV")
    add_common(p_run)

    p_verify = sub.add_parser("verify", help="run property suites")
    p_verify.add_argument("suite", nargs="?", default="all",
                          choices=sorted(verify.SUITES) + ["all"])
    p_verify.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)

    p_bench = sub.add_parser("bench", help="wall-clock comparison of the four methods")
    add_common(p_bench)

    p_order = sub.add_parser("order", help="measure a method's convergence order")
    add_common(p_order)
    p_order.add_argument("--taus", type=str, default="0.02,0.01,0.005,0.0025",
                         help="comma separated step sizes (need at least 3)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, seed=args.seed)
        if args.command == "run":
            return cmd_run(build_run_config(args))
        if args.command == "bench":
            return cmd_bench(build_run_config(args))
        if args.command == "order":
            return cmd_order(build_run_config(args, defaults={"t_final": 1.0}),
                             _parse_floats(args.taus))
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, IntegrationError) as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except KsplitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
