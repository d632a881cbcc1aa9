"""Command-line front end: config files in, fidelity tables out.

The config is YAML with five sections (system, scenarios, sweep,
integration, output) plus top-level `workers` and `seed`; every field has a
default matching the reference parameter set, so an empty file runs the
bundled cavity-decay study unchanged.  Frequencies are entered as ω/2π
values (GHz for mode frequencies, MHz for couplings); qutrit decay and
dephasing enter as inverse times in μs (`*_inv_us`) or directly as rates in
μs⁻¹ (`*_per_us`).

Outputs per run: `results.csv` (fixed column order, one header line, rows
flushed as they finish), `summary.txt` (derived rates, constraint residuals,
quality factors, fidelity table), `metadata.json` (the fully resolved
parameter set), and one `fidelity_vs_kappa_<scenario>.dat` plot file per
scenario.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, replace

import yaml

from . import __version__, model
from .analysis import MODELS, ScenarioSpec, SweepRow, sweep_kappa
from .fock import build_layout
from .lindblad import IntegrationConfig
from .model import GHZ_TO_RAD, SystemParams

ENV_WORKERS = "CATGHZ_WORKERS"

CSV_COLUMNS = ("kappa_inverse_us", "scenario", "fidelity", "gate_time_us",
               "trace_drift", "leakage", "steps", "wall_time_s")

_RATE_FIELDS = ("gamma_eg", "gamma_fe", "gamma_fg", "gamma_phi_e", "gamma_phi_f")

_DEFAULT_SCENARIOS = (("full_with_errors", True), ("effective_with_crosstalk", True))
_DEFAULT_SWEEP = tuple(float(k) for k in range(100, 1000, 100))


class ConfigError(ValueError):
    """Config file rejected; message names the offending field or relation."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; `params` keeps g2/g3 = None when designed."""

    params: SystemParams = SystemParams()
    scenarios: tuple = _DEFAULT_SCENARIOS
    kappa_inverses: tuple = _DEFAULT_SWEEP
    method: str = "auto"
    dt: float | None = None
    tolerance: float = 1e-8
    samples: int | None = None
    out_dir: str = "results"
    workers: int | None = None
    seed: int | None = None

    @property
    def design(self) -> bool:
        return self.params.g2 is None or self.params.g3 is None


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _get_rate(sec: dict, field: str, default: float) -> float:
    inv_key, per_key = f"{field}_inv_us", f"{field}_per_us"
    if inv_key in sec and per_key in sec:
        raise ConfigError(f"system: give only one of {inv_key} and {per_key}")
    if inv_key in sec:
        val = float(sec[inv_key])
        if val <= 0:
            raise ConfigError(f"system.{inv_key} must be positive, got {val}")
        return 1.0 / val
    if per_key in sec:
        val = float(sec[per_key])
        if val < 0:
            raise ConfigError(f"system.{per_key} must be nonnegative, got {val}")
        return val
    return default


def _parse_system(sec: dict) -> SystemParams:
    allowed = {"nu_c_ghz", "nu_eg_ghz", "nu_fe_ghz", "g1_mhz", "g2_mhz",
               "g3_mhz", "gt1_mhz", "gt2_mhz", "gt3_mhz", "crosstalk_ratio",
               "crosstalk_pairs", "alpha", "truncation"}
    allowed |= {f"{f}_{s}" for f in _RATE_FIELDS for s in ("inv_us", "per_us")}
    _reject_unknown(sec, allowed, "system")
    base = SystemParams()
    kw = {}
    if "nu_c_ghz" in sec:
        nu_c = sec["nu_c_ghz"]
        if not (isinstance(nu_c, (list, tuple)) and len(nu_c) == 3):
            raise ConfigError("system.nu_c_ghz must be a list of 3 frequencies")
        kw["nu_c"] = tuple(float(v) for v in nu_c)
    for key, field in (("nu_eg_ghz", "nu_eg"), ("nu_fe_ghz", "nu_fe"),
                       ("g1_mhz", "g1"), ("gt1_mhz", "gt1"), ("gt2_mhz", "gt2"),
                       ("gt3_mhz", "gt3"), ("crosstalk_ratio", "crosstalk_ratio"),
                       ("alpha", "alpha")):
        if key in sec:
            kw[field] = float(sec[key])
    for key, field in (("g2_mhz", "g2"), ("g3_mhz", "g3")):
        if key in sec:
            kw[field] = None if sec[key] is None else float(sec[key])
    if "crosstalk_pairs" in sec:
        kw["crosstalk_pairs"] = str(sec["crosstalk_pairs"])
    if "truncation" in sec:
        tr = sec["truncation"]
        if isinstance(tr, (list, tuple)):
            if len(tr) != 3:
                raise ConfigError("system.truncation list must have 3 entries")
            kw["truncations"] = tuple(int(v) for v in tr)
        else:
            kw["truncations"] = (int(tr),) * 3
    for field in _RATE_FIELDS:
        kw[field] = _get_rate(sec, field, getattr(base, field))
    return replace(base, **kw)


def _parse_scenarios(entries) -> tuple:
    if entries is None:
        return _DEFAULT_SCENARIOS
    if not isinstance(entries, list) or not entries:
        raise ConfigError("scenarios must be a nonempty list")
    out = []
    for entry in entries:
        if isinstance(entry, str):
            name, deco = entry, True
        elif isinstance(entry, dict):
            _reject_unknown(entry, {"model", "decoherence"}, "scenarios entry")
            name = entry.get("model")
            deco = bool(entry.get("decoherence", True))
        else:
            raise ConfigError(f"bad scenarios entry {entry!r}")
        if name not in MODELS:
            raise ConfigError(f"unknown scenario model {name!r}; choose from {MODELS}")
        out.append((name, deco))
    return tuple(out)


def load_config(path: str) -> RunConfig:
    """Parse and validate a YAML config; empty file means full defaults."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    _reject_unknown(raw, {"system", "scenarios", "sweep", "integration",
                          "output", "workers", "seed"}, "config")

    params = _parse_system(raw.get("system") or {})
    scenarios = _parse_scenarios(raw.get("scenarios"))

    sweep_sec = raw.get("sweep") or {}
    _reject_unknown(sweep_sec, {"kappa_inverse_us"}, "sweep")
    kappas = sweep_sec.get("kappa_inverse_us")
    if kappas is None:
        kappa_inverses = _DEFAULT_SWEEP
    else:
        if not isinstance(kappas, list) or not kappas:
            raise ConfigError("sweep.kappa_inverse_us must be a nonempty list")
        kappa_inverses = tuple(float(k) for k in kappas)
        if any(k <= 0 for k in kappa_inverses):
            raise ConfigError("sweep.kappa_inverse_us entries must be positive")

    integ = raw.get("integration") or {}
    _reject_unknown(integ, {"method", "dt_us", "tolerance", "samples"}, "integration")
    method = str(integ.get("method", "auto"))
    dt = integ.get("dt_us")
    dt = None if dt is None else float(dt)
    tolerance = float(integ.get("tolerance", 1e-8))
    samples = integ.get("samples")
    samples = None if samples is None else int(samples)

    out_sec = raw.get("output") or {}
    _reject_unknown(out_sec, {"directory"}, "output")
    out_dir = str(out_sec.get("directory", "results"))

    workers = raw.get("workers")
    workers = None if workers is None else int(workers)
    seed = raw.get("seed")
    seed = None if seed is None else int(seed)

    config = RunConfig(params=params, scenarios=scenarios,
                       kappa_inverses=kappa_inverses, method=method, dt=dt,
                       tolerance=tolerance, samples=samples, out_dir=out_dir,
                       workers=workers, seed=seed)
    _validate_physics(config)
    return config


def _validate_physics(config: RunConfig) -> None:
    try:
        resolved = model.resolve_couplings(config.params)
        model.validate_params(resolved)
        IntegrationConfig(t_span=(0.0, 1.0), method=config.method,
                          dt=config.dt, tolerance=config.tolerance)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def serialize_config(config: RunConfig) -> dict:
    """Schema-shaped mapping; load_config of its YAML dump gives back an equal config."""
    p = config.params
    system = {
        "nu_c_ghz": list(p.nu_c),
        "nu_eg_ghz": p.nu_eg,
        "nu_fe_ghz": p.nu_fe,
        "g1_mhz": p.g1,
        "g2_mhz": p.g2,
        "g3_mhz": p.g3,
        "gt1_mhz": p.gt1,
        "gt2_mhz": p.gt2,
        "gt3_mhz": p.gt3,
        "crosstalk_ratio": p.crosstalk_ratio,
        "crosstalk_pairs": p.crosstalk_pairs,
        "alpha": p.alpha,
        "truncation": list(p.truncations),
    }
    for field in _RATE_FIELDS:
        system[f"{field}_per_us"] = getattr(p, field)
    return {
        "system": system,
        "scenarios": [{"model": name, "decoherence": deco}
                      for name, deco in config.scenarios],
        "sweep": {"kappa_inverse_us": list(config.kappa_inverses)},
        "integration": {"method": config.method, "dt_us": config.dt,
                        "tolerance": config.tolerance, "samples": config.samples},
        "output": {"directory": config.out_dir},
        "workers": config.workers,
        "seed": config.seed,
    }


def _derived_report(config: RunConfig) -> tuple[str, dict]:
    params = model.resolve_couplings(config.params)
    det = model.derive_detunings(params)
    rates = model.effective_rates(params)
    t_gate = model.gate_time(rates)
    dim = build_layout(params.truncations).total_dim
    lines = []
    add = lines.append
    add(f"three-cat-qubit GHZ study (catghz {__version__})")
    add("")
    solved = " (solved from the parity-phase constraint)" if config.design else ""
    add(f"couplings: g1/2pi = {params.g1:.4f} MHz, g2/2pi = {params.g2:.4f} MHz,"
        f" g3/2pi = {params.g3:.4f} MHz{solved}")
    add(f"detunings: |delta1| = {det.delta1:.4f} GHz, |delta2| = {det.delta2:.4f} GHz,"
        f" |delta3| = {det.delta3:.4f} GHz")
    add(f"effective rates: lambda1 = {rates.lambda1:.4f} MHz,"
        f" chi12 = {rates.chi12:.4f} MHz, chi13 = {rates.chi13:.4f} MHz")
    add(f"constraint residuals: chi12/lambda1 - 1/2 = {rates.chi12 / rates.lambda1 - 0.5:+.3e},"
        f" chi13/lambda1 - 1/2 = {rates.chi13 / rates.lambda1 - 0.5:+.3e}")
    add(f"gate time: t = 2*pi/lambda1 = {t_gate:.5f} us")
    add(f"hilbert space dimension: {dim} (truncation {params.truncations})")
    add("")
    add("cavity quality factors Q_l = omega_cl * kappa_inverse (dimensionless):")
    for k in config.kappa_inverses:
        qs = [nu * GHZ_TO_RAD * k for nu in params.nu_c]
        add(f"  kappa_inverse = {k:7.1f} us:  Q1 = {qs[0]:.3e}  Q2 = {qs[1]:.3e}"
            f"  Q3 = {qs[2]:.3e}")
    meta = {
        "version": __version__,
        "params": asdict(params),
        "detunings_ghz": asdict(det),
        "effective_rates_mhz": asdict(rates),
        "gate_time_us": t_gate,
        "dimension": dim,
        "scenarios": [{"model": m, "decoherence": d} for m, d in config.scenarios],
        "kappa_inverse_us": list(config.kappa_inverses),
        "integration": {"method": config.method, "dt_us": config.dt,
                        "tolerance": config.tolerance, "samples": config.samples},
        "csv_columns": list(CSV_COLUMNS),
    }
    return "\n".join(lines), meta


def _format_row(row: SweepRow) -> str:
    return (f"{row.kappa_inverse:.6g},{row.scenario},{row.fidelity:.12f},"
            f"{row.gate_time:.9f},{row.trace_drift:.6e},{row.leakage:.6e},"
            f"{row.steps},{row.wall_time:.3f}")


def resolve_workers(cli_value: int | None, config: RunConfig) -> int:
    if cli_value is not None:
        return max(1, cli_value)
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{ENV_WORKERS} must be an integer, got {env!r}") from exc
    if config.workers is not None:
        return max(1, config.workers)
    return 1


def run(config: RunConfig, *, workers: int = 1, cache_dir: str | None = None,
        stream=None) -> int:
    """Execute every scenario of the sweep, writing artifacts as rows finish."""
    stream = stream if stream is not None else sys.stdout
    os.makedirs(config.out_dir, exist_ok=True)
    report, meta = _derived_report(config)
    with open(os.path.join(config.out_dir, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=1, default=float)

    csv_path = os.path.join(config.out_dir, "results.csv")
    failures = []
    collected: dict[str, list[SweepRow]] = {}
    with open(csv_path, "w") as csv_file:
        csv_file.write(",".join(CSV_COLUMNS) + "\n")
        csv_file.flush()

        def flush_row(row: SweepRow) -> None:
            csv_file.write(_format_row(row) + "\n")
            csv_file.flush()
            print(f"  kappa_inverse = {row.kappa_inverse:g} us -> F = {row.fidelity:.6f}"
                  f"  ({row.steps} steps, {row.wall_time:.1f} s)", file=stream)

        for name, deco in config.scenarios:
            print(f"scenario {name} (decoherence {'on' if deco else 'off'}):",
                  file=stream)
            base = ScenarioSpec(model=name, decoherence=deco,
                                params=config.params)
            try:
                result = sweep_kappa(
                    base, config.kappa_inverses, workers=workers,
                    method=config.method, dt=config.dt,
                    tolerance=config.tolerance, sample_times=config.samples,
                    cache_dir=cache_dir, progress=flush_row)
            except Exception as exc:  # noqa: BLE001 - reported, run continues
                failures.append((name, exc))
                print(f"  FAILED: {exc}", file=stream)
                continue
            collected[name] = list(result.rows)

    for name, rows in collected.items():
        dat_path = os.path.join(config.out_dir, f"fidelity_vs_kappa_{name}.dat")
        with open(dat_path, "w") as fh:
            fh.write("# kappa_inverse_us  fidelity (dimensionless)\n")
            for row in sorted(rows, key=lambda r: r.kappa_inverse):
                fh.write(f"{row.kappa_inverse:12.6g}  {row.fidelity:.12f}\n")

    summary = [report, "", "fidelity by scenario:"]
    for name, rows in collected.items():
        summary.append(f"  {name}:")
        for row in rows:
            summary.append(f"    kappa_inverse = {row.kappa_inverse:7.1f} us:"
                           f"  F = {row.fidelity:.6f}  leakage = {row.leakage:.3e}")
    for name, exc in failures:
        summary.append(f"  {name}: FAILED ({exc})")
    with open(os.path.join(config.out_dir, "summary.txt"), "w") as fh:
        fh.write("\n".join(summary) + "\n")

    if failures:
        print(f"{len(failures)} scenario(s) failed", file=stream)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="catghz",
        description="GHZ preparation study for three cat-encoded cavities")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run the configured sweep")
    runp.add_argument("config", help="YAML config file (empty file = defaults)")
    runp.add_argument("--check-only", action="store_true",
                      help="validate the config and print derived rates, no integration")
    runp.add_argument("--scenario", action="append", default=None,
                      metavar="NAME", help="restrict to this scenario (repeatable)")
    runp.add_argument("--out", default=None, metavar="DIR",
                      help="override the output directory")
    runp.add_argument("--workers", type=int, default=None, metavar="N",
                      help=f"sweep worker processes (default ${ENV_WORKERS} or 1)")
    runp.add_argument("--truncation", type=int, default=None, metavar="N",
                      help="override the Fock truncation of all three cavities")
    runp.add_argument("--cache-dir", default=None, metavar="DIR",
                      help="reuse/store finished runs in this directory")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.truncation is not None:
        if args.truncation < 1:
            print("error: --truncation must be at least 1", file=sys.stderr)
            return 2
        config = replace(config, params=replace(
            config.params, truncations=(args.truncation,) * 3))
    if args.out is not None:
        config = replace(config, out_dir=args.out)
    if args.scenario:
        names = set(args.scenario)
        unknown = names - set(MODELS)
        if unknown:
            print(f"error: unknown scenario(s): {', '.join(sorted(unknown))}",
                  file=sys.stderr)
            return 2
        kept = tuple(s for s in config.scenarios if s[0] in names)
        if not kept:
            print("error: --scenario filter removed every configured scenario",
                  file=sys.stderr)
            return 2
        config = replace(config, scenarios=kept)

    try:
        workers = resolve_workers(args.workers, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.check_only:
        report, _ = _derived_report(config)
        print(report)
        return 0
    return run(config, workers=workers, cache_dir=args.cache_dir)


if __name__ == "__main__":
    sys.exit(main())
