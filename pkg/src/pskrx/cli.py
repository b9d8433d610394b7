"""Command line front end.

    pskrx compare      --alpha-grid 0:1.2:0.05
    pskrx sweep        --m 4 --photon-grid 0.1:3:0.1 --modes 2,3,4,5
    pskrx optimize     --alpha 0.3 --modes 2,3
    pskrx montecarlo   --alpha-grid 0.2:0.6:0.2 --efficiency 0.66 --dark 2.5e-3
    pskrx decode-table --alpha 0.5 --receiver optimal

Every command writes CSV (``--out PATH`` or stdout) except ``decode-table``,
which prints a table. Options can also come from ``--config FILE`` holding
``key = value`` lines (keys are option names without the leading dashes);
command-line flags take precedence.

Exit status: 0 on success, 2 for usage or validation errors, 1 for runtime
and numerical failures.
"""
import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

from . import baselines
from .core import NoiseModel, PskAlphabet, build_decode_table, index_pattern, success_probability
from .errors import PskrxError
from .montecarlo import TrialPlan, simulate
from .optimizer import OptimizerSettings, optimize, sweep_modes
from .results import SweepResult, fmt, to_csv

COMMANDS = ("sweep", "optimize", "compare", "montecarlo", "decode-table")
PRESETS = ("optimal", "nulling", "optamp", "optimized")

DEFAULTS = dict(
    m=4, alpha=None, alpha_grid=None, photon_grid=None, modes="2",
    efficiency=1.0, dark=0.0, visibility=1.0,
    starts=64, seed=0, shots=40000, runs=5,
    receiver=None, out=None, workers=1,
)


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    m: int
    alphas: List[float]
    modes: List[int]
    noise: NoiseModel
    settings: OptimizerSettings
    plan: TrialPlan
    receivers: List[str] = field(default_factory=list)
    output_path: Optional[str] = None
    workers: int = 1


def parse_grid(text: str) -> List[float]:
    """Parse ``start:stop:step`` (stop included) or a comma list of values."""
    text = str(text).strip()
    if ":" not in text:
        try:
            values = [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad value list {text!r}") from None
        if not values:
            raise UsageError("empty value list")
        return values
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if not step > 0:
        raise UsageError("grid step must be positive")
    if stop < start:
        raise UsageError("grid stop is below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_modes(text: str) -> List[int]:
    try:
        modes = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad mode list {text!r}") from None
    if not modes:
        raise UsageError("mode list must not be empty")
    if min(modes) < 1:
        raise UsageError("mode counts must be >= 1")
    return modes


def read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(ns: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if ns.config:
        merged.update(read_config_file(ns.config))
    merged.update({k: v for k, v in vars(ns).items() if k in DEFAULTS and v is not None})

    try:
        m = int(merged["m"])
        noise = NoiseModel(float(merged["efficiency"]), float(merged["dark"]), float(merged["visibility"]))
        settings = OptimizerSettings(starts=int(merged["starts"]), seed=int(merged["seed"]))
        plan = TrialPlan(int(merged["shots"]), int(merged["runs"]), int(merged["seed"]))
        workers = int(merged["workers"])
        PskAlphabet(m, 0.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    given = [k for k in ("alpha", "alpha_grid", "photon_grid") if merged[k] is not None]
    if len(given) > 1:
        raise UsageError("give only one of --alpha, --alpha-grid, --photon-grid")
    if not given:
        raise UsageError("one of --alpha, --alpha-grid or --photon-grid is required")
    alphas = parse_grid(merged[given[0]])
    if given[0] == "photon_grid":
        if min(alphas) < 0:
            raise UsageError("mean photon numbers must be >= 0")
        alphas = [math.sqrt(v) for v in alphas]
    if min(alphas) < 0:
        raise UsageError("alpha must be >= 0")

    modes = parse_modes(merged["modes"])
    receivers = merged["receiver"]
    if receivers is None:
        receivers = "nulling,optamp,optimal" if ns.command == "montecarlo" else "optimal"
    receivers = [r.strip() for r in str(receivers).split(",") if r.strip()]
    bad = [r for r in receivers if r not in PRESETS]
    if bad:
        raise UsageError(f"unknown receiver {bad[0]!r}; choose from {', '.join(PRESETS)}")
    if m != 4 and any(r != "optimized" for r in receivers) and ns.command in ("montecarlo", "decode-table"):
        raise UsageError("fixed receiver presets are QPSK receivers; use --receiver optimized for m != 4")
    return RunConfig(ns.command, m, alphas, modes, noise, settings, plan, receivers,
                     merged["out"], workers)


# --------------------------------------------------------------------------
# receivers
# --------------------------------------------------------------------------

def preset_receiver(name: str, alphabet: PskAlphabet, n: int, noise: NoiseModel, settings: OptimizerSettings):
    if name == "optimal":
        return baselines.analytic_receiver_qpsk()
    if name == "nulling":
        return baselines.kennedy_nulling_qpsk(alphabet.alpha)
    if name == "optamp":
        return baselines.kennedy_optamp_qpsk()
    return optimize(alphabet, n, noise, settings).params


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _compare_rows(m, alpha, noise, settings):
    alphabet = PskAlphabet(m, alpha)
    rows = [
        SweepResult(m, alpha, None, "helstrom", baselines.helstrom_mpsk(m, alpha)),
        SweepResult(m, alpha, None, "heterodyne", baselines.heterodyne_mpsk(baselines.QuadratureSpec(m, alpha))),
        SweepResult(m, alpha, None, "heterodyne-eff",
                    baselines.heterodyne_with_efficiency(m, alpha, noise.efficiency)),
        SweepResult(m, alpha, 2, "optimized", optimize(alphabet, 2, noise, settings).success),
    ]
    if m == 4:
        fixed = [("analytic", baselines.analytic_receiver_qpsk()),
                 ("kennedy-nulling", baselines.kennedy_nulling_qpsk(alpha)),
                 ("kennedy-optamp", baselines.kennedy_optamp_qpsk())]
        rows += [SweepResult(m, alpha, 2, label, success_probability(p, alphabet, noise)) for label, p in fixed]
    return rows


def cmd_compare(cfg: RunConfig) -> List[SweepResult]:
    """Every reference curve at each alpha: 7 rows per alpha for QPSK, 4 otherwise."""
    args = [(cfg.m, a, cfg.noise, cfg.settings) for a in cfg.alphas]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(_compare_rows, *zip(*args)))
    else:
        chunks = [_compare_rows(*a) for a in args]
    return [row for chunk in chunks for row in chunk]


def cmd_sweep(cfg: RunConfig) -> List[SweepResult]:
    """Optimised success over the (alpha, n) grid, preceded at each alpha by heterodyne."""
    optimized = sweep_modes(cfg.m, cfg.alphas, cfg.modes, cfg.noise, cfg.settings)
    per_alpha = len(cfg.modes)
    rows = []
    for i, alpha in enumerate(cfg.alphas):
        het = baselines.heterodyne_with_efficiency(cfg.m, alpha, cfg.noise.efficiency)
        rows.append(SweepResult(cfg.m, alpha, None, "heterodyne", het))
        rows += optimized[i * per_alpha:(i + 1) * per_alpha]
    return rows


def cmd_optimize(cfg: RunConfig, report=None) -> List[SweepResult]:
    rows = []
    for alpha in cfg.alphas:
        alphabet = PskAlphabet(cfg.m, alpha)
        for n in cfg.modes:
            res = optimize(alphabet, n, cfg.noise, cfg.settings)
            rows.append(SweepResult(cfg.m, alpha, n, "optimized", res.success))
            if report is not None:
                report(f"alpha={fmt(alpha)} n={n} success={fmt(res.success)} start={res.start_index} "
                       f"converged={res.converged}")
                report("  u   = " + " ".join(f"{v:+.6f}" for v in res.params.u))
                report("  eps = " + " ".join(f"{v.real:+.6f}{v.imag:+.6f}j" for v in res.params.eps))
    return rows


def cmd_montecarlo(cfg: RunConfig, report=None) -> List[SweepResult]:
    """Exact and simulated rows for each receiver preset at each alpha."""
    rows = []
    n = cfg.modes[0]
    for alpha in cfg.alphas:
        alphabet = PskAlphabet(cfg.m, alpha)
        for name in cfg.receivers:
            params = preset_receiver(name, alphabet, n, cfg.noise, cfg.settings)
            exact = success_probability(params, alphabet, cfg.noise)
            rep = simulate(alphabet, params, cfg.noise, cfg.plan)
            rows.append(SweepResult(cfg.m, alpha, params.n, name, exact))
            rows.append(SweepResult(cfg.m, alpha, params.n, f"{name}-mc", rep.success_estimate, rep.std_dev))
            if report is not None:
                report(f"alpha={alpha:.4g} {name:>9}: simulated {rep.success_estimate:.5f} "
                       f"+/- {rep.std_dev:.5f}  exact {exact:.5f}")
    return rows


def cmd_decode_table(cfg: RunConfig) -> str:
    lines = []
    n = cfg.modes[0]
    for alpha in cfg.alphas:
        alphabet = PskAlphabet(cfg.m, alpha)
        for name in cfg.receivers:
            params = preset_receiver(name, alphabet, n, cfg.noise, cfg.settings)
            table = build_decode_table(params, alphabet, cfg.noise)
            lines.append(f"# receiver={name} m={cfg.m} alpha={fmt(alpha)} n={params.n}")
            lines.append(f"{'pattern':>{max(7, params.n)}}  decoded  posterior     p(y)")
            for b in range(len(table)):
                bits = "".join(str(v) for v in index_pattern(b, params.n))
                lines.append(f"{bits:>{max(7, params.n)}}  {int(table.decoded[b]):>7d}  "
                             f"{table.posterior[b]:9.6f}  {table.pattern_prob[b]:.6f}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value option file")
    common.add_argument("--m", type=int, help="alphabet size (default 4)")
    common.add_argument("--alpha", help="amplitude, or comma list of amplitudes")
    common.add_argument("--alpha-grid", help="amplitude grid start:stop:step")
    common.add_argument("--photon-grid", help="mean photon number grid start:stop:step")
    common.add_argument("--modes", help="mode count(s), e.g. 2 or 2,3,4 (default 2)")
    common.add_argument("--efficiency", type=float, help="detection efficiency (default 1)")
    common.add_argument("--dark", type=float, help="dark count probability per mode per shot (default 0)")
    common.add_argument("--visibility", type=float, help="interference visibility (default 1)")
    common.add_argument("--starts", type=int, help="random optimiser starts (default 64)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--shots", type=int, help="Monte Carlo shots per run (default 40000)")
    common.add_argument("--runs", type=int, help="Monte Carlo runs (default 5)")
    common.add_argument("--receiver", help=f"receiver preset(s): {', '.join(PRESETS)}")
    common.add_argument("--workers", type=int, help="worker processes for compare (default 1)")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="pskrx", description="PSK coherent-state receiver toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = build_config(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pskrx {ns.command}: error: {exc}", file=sys.stderr)
        return 2

    summary_stream = sys.stderr if cfg.output_path is None else sys.stdout

    def report(line):
        print(line, file=summary_stream)

    try:
        if cfg.command == "decode-table":
            _emit(cmd_decode_table(cfg), cfg.output_path)
            return 0
        if cfg.command == "compare":
            rows = cmd_compare(cfg)
        elif cfg.command == "sweep":
            rows = cmd_sweep(cfg)
        elif cfg.command == "optimize":
            rows = cmd_optimize(cfg, report)
        else:
            rows = cmd_montecarlo(cfg, report)
        _emit(to_csv(rows), cfg.output_path)
    except (PskrxError, ArithmeticError, OSError) as exc:
        print(f"pskrx {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
