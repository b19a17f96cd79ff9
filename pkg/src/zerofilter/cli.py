"""Command-line entry point: ``zerofilter <command> [options]``.

Exit codes: 0 all gates pass, 1 a gate failed, 2 configuration error,
3 numerical blow-up.
"""
import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .config import Config, load_config, parse_config, with_overrides
from .constructions import random_band_limited
from .dynamics import EvolutionSpec, integrate, write_field_binary, write_field_csv
from .errors import BlowUpError, ConfigurationError
from .reporting import ExperimentReport, persist_report
from .spectral import SpectralField

COMMANDS = ("simulate", "theorem1", "theorem2", "decomposition", "expansion", "lemmas",
            "uniform-bound", "selftest")
EXIT_OK, EXIT_GATE, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zerofilter", description="Zero-filter limit experiments for CH vs Burgers.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="YAML config file")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--jobs", type=int, help="worker threads (default: CPU count)")
    p.add_argument("--seed", type=int, help="seed for random initial data")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--alpha-list", type=_floats, help="e.g. 0.1,0.05,0.025")
    p.add_argument("--n-list", type=_ints, help="e.g. 4,5,6 or 4..8")
    p.add_argument("--s", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--T", type=float)
    return p


def initial_field(cfg: Config) -> SpectralField:
    grid = cfg.sim_config().grid
    if cfg.initial.kind == "zero":
        return SpectralField.zeros(grid)
    return ex.default_initial_field(grid, cfg.initial.seed, cfg.initial.max_freq, cfg.initial.norm, cfg.params)


def _simulate(cfg: Config, out: Path) -> ExperimentReport:
    sim = cfg.sim_config()
    alpha = cfg.experiment.alpha
    if cfg.initial.kind == "zero":
        u0 = SpectralField.zeros(sim.grid)
    else:
        u0 = random_band_limited(sim.grid, cfg.initial.max_freq, cfg.initial.seed)
    spec = sim.burgers() if alpha == 0 else sim.ch(alpha)
    T = sim.final_time(u0)
    report = ExperimentReport("simulate", {"config": cfg.echo(), "T": T, "spec": spec.kind})
    report.stamp("start")
    tr = integrate(u0, spec, sim.policy(u0, T))
    led = tr.ledger
    for t, h0, ha in zip(led.times, led.H0, led.Halpha):
        report.rows.append({"t": t, "H0": h0, "Halpha": ha})
    drift = led.relative_drift()
    report.gate("relative drift of conserved quantity", drift <= 1e-6, drift, 1e-6)
    write_field_binary(out / "simulate_final.bin", tr.final, alpha, tr.times[-1])
    write_field_csv(out / "simulate_final.csv", tr.final)
    report.stamp("end")
    return report


def run_command(command: str, cfg: Config) -> ExperimentReport:
    cfg.validate_for(command)
    sim = cfg.sim_config()
    e = cfg.experiment
    out = Path(cfg.output.dir)
    if command == "simulate":
        return _simulate(cfg, out)
    if command == "selftest":
        return ex.run_selftest(cfg.initial.seed, sim)
    if command == "lemmas":
        return ex.run_lemma_diagnostics(sim, cfg.besov.s, e.samples, cfg.initial.seed)
    if command == "theorem2":
        return ex.run_theorem2_counterexample(e.n_list, cfg.besov.s, cfg.besov.r, sim, e.T0, e.t_fractions)
    u0 = initial_field(cfg)
    if command == "theorem1":
        return ex.run_theorem1_sweep(u0, cfg.params, e.alpha_list, sim, e.tolerance)
    if command == "decomposition":
        return ex.run_step_decomposition(u0, e.cutoff, e.alpha_list, cfg.params, sim)
    if command == "uniform-bound":
        return ex.run_uniform_bound_probe(u0, cfg.params, e.alpha_list, sim, e.gamma)
    if command == "expansion":
        t_grid = e.t_grid
        if t_grid is None:
            top = min(0.1, 0.1 * ex.shock_time_estimate(u0))
            t_grid = [top * 10.0 ** (-2 * k / 7) for k in range(7, -1, -1)]
        return ex.run_expansion_check(u0, e.alpha, cfg.params, t_grid, sim)
    raise ConfigurationError(f"unknown command {command!r}")


def dispatch(command: str, cfg: Config, stderr=None) -> int:
    """Run ``command``, write its report and return the exit code."""
    stderr = stderr or sys.stderr
    try:
        out = Path(cfg.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        report = run_command(command, cfg)
        report.config.setdefault("resolved", cfg.echo())
        name = command.replace("-", "_")
        persist_report(report, out / f"{name}.{cfg.output.format}", cfg.output.format)
        if cfg.output.format == "csv":
            persist_report(report, out / f"{name}.json", "json")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=stderr)
        return EXIT_BLOWUP
    print(report.summary(), file=stderr)
    return EXIT_OK if report.passed else EXIT_GATE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        cfg = with_overrides(cfg, alpha_list=args.alpha_list, n_list=args.n_list, s=args.s, r=args.r,
                             T=args.T, seed=args.seed, jobs=args.jobs, format=args.format, out=args.out)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
