"""
tailvar - Main Entry Point

This is the command-line entry point for tailvar. It parses arguments, sets up
logging and dispatches each subcommand to the services.

Exit status: 0 on success, 1 on a usage error, 2 on any other failure.
"""

import sys
import logging
import argparse
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import pandas as pd

from tailvar import __version__
from tailvar.config.settings import (
    DEFAULT_HORIZONS, DEFAULT_PROBABILITIES, DEFAULT_TAIL, DEFAULT_TAIL_METHOD,
    LJUNG_BOX_LAGS, LOG_LEVEL, MC_DEFAULTS, MC_PROBABILITIES, T_DF, THREADS
)
from tailvar.models.domain import TAIL_METHODS, TAILS, GarchFit, McConfig, ReturnSeries
from tailvar.models.schemas import GARCH_MODEL_SCHEMA, check_document
from tailvar.services.garch_service import GarchService
from tailvar.services.mc_service import McService
from tailvar.services.series_service import SeriesService
from tailvar.services.tail_service import TailService, order_tail, tail_count
from tailvar.services.var_service import VarService
from tailvar.utils.errors import DataError, TailVarError, UsageError
from tailvar.utils.file_helpers import dump_json, load_json_file, save_json_file, write_table

logger = logging.getLogger(__name__)

COMMANDS = ("stats", "tail", "fit", "var", "simulate", "hillplot", "qqplot")
FORMATS = ("table", "csv", "json")
MODES = ("unconditional", "conditional", "gaussian")


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one CLI invocation."""

    command: str
    input: Optional[str] = None
    column: str = "price"
    tail: str = DEFAULT_TAIL
    method: str = DEFAULT_TAIL_METHOD
    m: Optional[int] = None
    eta: Optional[int] = None
    probabilities: Tuple[float, ...] = DEFAULT_PROBABILITIES
    horizons: Tuple[int, ...] = DEFAULT_HORIZONS
    seed: int = MC_DEFAULTS["seed"]
    fmt: str = "table"
    out: Optional[str] = None
    filtered: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"Unknown command {self.command!r}")
        if self.fmt not in FORMATS:
            raise UsageError(f"Unknown format {self.fmt!r}")
        if not self.probabilities or not all(0 < p < 0.5 for p in self.probabilities):
            raise UsageError("Probabilities must lie in (0, 0.5)")
        if not self.horizons or min(self.horizons) < 1:
            raise UsageError("Horizons must be at least 1")
        if self.m is not None and self.method != "fixed":
            raise UsageError("--m only applies to --method fixed")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            command=args.command,
            input=getattr(args, "input", None),
            column=args.column,
            tail=args.tail,
            method=args.method,
            m=args.m,
            eta=args.eta,
            probabilities=tuple(getattr(args, "p", None) or DEFAULT_PROBABILITIES),
            horizons=tuple(getattr(args, "horizons", None) or DEFAULT_HORIZONS),
            seed=getattr(args, "seed", MC_DEFAULTS["seed"]),
            fmt=args.format,
            out=args.out,
            filtered=getattr(args, "filtered", False),
        )


class CliParser(argparse.ArgumentParser):
    """Argument parser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = CliParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table", help="Output format")
    common.add_argument("--out", help="Write output to this file instead of stdout")
    common.add_argument("--log-level", default=LOG_LEVEL, help="Logging level")
    common.add_argument("--column", choices=("price", "return"), default="price",
                        help="Read prices (converted to percent log returns) or returns")
    common.add_argument("--tail", choices=TAILS, default=DEFAULT_TAIL, help="Tail to estimate")
    common.add_argument("--method", choices=TAIL_METHODS, default=DEFAULT_TAIL_METHOD,
                        help="Tail estimation method")
    common.add_argument("--m", type=int, help="Threshold count for --method fixed")
    common.add_argument("--eta", type=int, help="Largest threshold count for hill plots and huisman")

    parser = CliParser(prog="tailvar", description="Extreme-value and GARCH Value-at-Risk")
    parser.add_argument("--version", action="version", version=f"tailvar {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    stats_parser = subparsers.add_parser("stats", parents=[common], help="Series diagnostics")
    stats_parser.add_argument("--input", required=True)
    stats_parser.add_argument("--lags", type=int, default=LJUNG_BOX_LAGS)
    stats_parser.add_argument("--filtered", action="store_true", help="Diagnose GARCH-filtered residuals")

    tail_parser = subparsers.add_parser("tail", parents=[common], help="Tail index estimation")
    tail_parser.add_argument("--input", required=True)
    tail_parser.add_argument("--filtered", action="store_true", help="Estimate on GARCH-filtered residuals")

    fit_parser = subparsers.add_parser("fit", parents=[common], help="Fit the AR(1)-GARCH(1,1) filter")
    fit_parser.add_argument("--input", required=True)
    fit_parser.add_argument("--innovation", choices=("t", "normal"), default="t")
    fit_parser.add_argument("--paths", help="Also write t,sigma,z to this CSV file")

    var_parser = subparsers.add_parser("var", parents=[common], help="Single- and multi-period VaR")
    var_parser.add_argument("--mode", choices=MODES, default="unconditional")
    var_parser.add_argument("--input")
    var_parser.add_argument("--model", help="GARCH model JSON written by `fit`")
    var_parser.add_argument("--p", type=float, nargs="+", help="Tail probabilities")
    var_parser.add_argument("--horizons", type=int, nargs="+", help="Horizons in days")

    sim_parser = subparsers.add_parser("simulate", parents=[common], help="GARCH-t scaling simulation")
    sim_parser.add_argument("--a0", type=float, default=MC_DEFAULTS["a0"])
    sim_parser.add_argument("--a1", type=float, default=MC_DEFAULTS["a1"])
    sim_parser.add_argument("--b1", type=float, default=MC_DEFAULTS["b1"])
    sim_parser.add_argument("--n", type=int, default=MC_DEFAULTS["n"])
    sim_parser.add_argument("--reps", type=int, default=MC_DEFAULTS["reps"])
    sim_parser.add_argument("--seed", type=int, default=MC_DEFAULTS["seed"])
    sim_parser.add_argument("--burn-in", type=int, default=MC_DEFAULTS["burn_in"])
    sim_parser.add_argument("--df", type=float, default=float(T_DF))
    sim_parser.add_argument("--horizons", type=int, nargs="+", default=list(MC_DEFAULTS["horizons"]))
    sim_parser.add_argument("--p", type=float, nargs="+", default=list(MC_PROBABILITIES))
    sim_parser.add_argument("--workers", type=int, default=THREADS)

    hill_parser = subparsers.add_parser("hillplot", parents=[common], help="Hill estimates over m")
    hill_parser.add_argument("--input", required=True)

    qq_parser = subparsers.add_parser("qqplot", parents=[common], help="Normal Q-Q plot data")
    qq_parser.add_argument("--input", required=True)

    return parser


def setup_logging(level: str) -> None:
    """Configure logging to stderr so stdout carries only the emitted data."""
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        raise UsageError(f"Unknown log level {level!r}")
    logging.basicConfig(level=numeric, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                        stream=sys.stderr, force=True)


def emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as file:
            file.write(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def emit_document(document: Dict[str, Any], out: Optional[str]) -> None:
    if out:
        if not save_json_file(out, document):
            raise DataError(f"Could not write {out}")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(dump_json(document) + "\n")


def emit_frame(frame: pd.DataFrame, config: RunConfig) -> None:
    if config.fmt == "json":
        emit_document({"rows": frame.to_dict(orient="records")}, config.out)
    else:
        emit(write_table(frame, None, config.fmt), config.out)


def flatten(document: Dict[str, Any]) -> pd.DataFrame:
    """Long key/value table of a diagnostics document."""
    rows = [(key, value) for key, value in document.items() if key != "ljung_box"]
    for result in document.get("ljung_box", []):
        prefix = "lb2" if result["squared"] else "lb"
        rows.append((f"{prefix}_q{result['lags']}", result["statistic"]))
        rows.append((f"{prefix}_p{result['lags']}", result["p_value"]))
    return pd.DataFrame(rows, columns=["statistic", "value"])


class Cli:
    """
    Wires the services to the subcommands.
    """

    def __init__(self):
        self.series_service = SeriesService()
        self.tail_service = TailService()
        self.var_service = VarService(self.tail_service)

    def load(self, config: RunConfig) -> ReturnSeries:
        return self.series_service.load_series(config.input, config.column)

    def fit(self, series: ReturnSeries, innovation: str = "t") -> GarchFit:
        return GarchService(innovation=innovation).garch_fit(series)

    def load_model(self, path: str) -> GarchFit:
        document = load_json_file(path)
        if document is None:
            raise DataError(f"Could not read model file {path}")
        return GarchFit.from_dict(check_document(document, GARCH_MODEL_SCHEMA, f"Model file {path}"))

    def target(self, config: RunConfig) -> ReturnSeries:
        series = self.load(config)
        if config.filtered:
            return self.fit(series).residuals
        return series

    def run_stats(self, config: RunConfig, args: argparse.Namespace) -> None:
        document = self.series_service.diagnostics(self.target(config), args.lags)
        if config.fmt == "json":
            emit_document(document, config.out)
        else:
            emit_frame(flatten(document), config)

    def run_tail(self, config: RunConfig, args: argparse.Namespace) -> None:
        est = self.tail_service.estimate(self.target(config), config.method, config.tail, config.m, config.eta)
        report = self.tail_service.tail_report(est)
        if config.fmt == "json":
            emit_document(report, config.out)
        else:
            emit_frame(pd.DataFrame([{k: v for k, v in report.items() if k != "scale"}]), config)

    def run_fit(self, config: RunConfig, args: argparse.Namespace) -> None:
        fit = self.fit(self.load(config), args.innovation)
        if args.paths:
            write_table(fit.path_frame(), args.paths, "csv")
        emit_document(fit.to_dict(), config.out)

    def _conditional_fit(self, config: RunConfig, args: argparse.Namespace, innovation: str) -> GarchFit:
        if args.model:
            fit = self.load_model(args.model)
            if fit.params.innovation != innovation:
                raise UsageError(f"--mode {args.mode} needs a model fitted with {innovation} innovations")
            return fit
        return self.fit(self.load(config), innovation)

    def run_var(self, config: RunConfig, args: argparse.Namespace) -> None:
        p_max = max(config.probabilities)
        # an explicit --m stays where the user put it
        movable = config.m is None
        if args.mode == "unconditional":
            if not config.input:
                raise UsageError("--mode unconditional needs --input")
            if args.model:
                raise UsageError("--model only applies to the conditional modes")
            series = self.load(config)
            est = self.tail_service.estimate(series, config.method, "lower", config.m, config.eta)
            est = self.var_service.ensure_extrapolation(est, series, p_max, allow_reanchor=movable)
            grid = self.var_service.var_grid("evt_unconditional", config.probabilities, config.horizons,
                                             est=est, n=series.n)
        elif args.mode == "conditional":
            if not (args.model or config.input):
                raise UsageError("--mode conditional needs --model or --input")
            fit = self._conditional_fit(config, args, "t")
            residuals = fit.residuals
            est = self.tail_service.estimate(residuals, config.method, "lower", config.m, config.eta)
            est = self.var_service.ensure_extrapolation(est, residuals, p_max, allow_reanchor=movable)
            grid = self.var_service.var_grid("evt_conditional", config.probabilities, config.horizons,
                                             est=est, fit=fit)
        else:
            if not (args.model or config.input):
                raise UsageError("--mode gaussian needs --model or --input")
            fit = self._conditional_fit(config, args, "normal")
            grid = self.var_service.var_grid("gaussian_conditional", config.probabilities, config.horizons,
                                             fit=fit)

        if config.fmt == "json":
            emit_document(self.var_service.to_layout(grid), config.out)
        else:
            emit_frame(self.var_service.to_frame(grid), config)

    def run_simulate(self, config: RunConfig, args: argparse.Namespace) -> None:
        try:
            mc_config = McConfig(
                a0=args.a0, a1=args.a1, b1=args.b1, n=args.n, reps=args.reps,
                horizons=tuple(args.horizons), seed=args.seed, burn_in=args.burn_in,
                df=args.df, probabilities=tuple(args.p),
            )
        except DataError as e:
            raise UsageError(str(e)) from e
        report = McService(workers=args.workers, tail_service=self.tail_service,
                           var_service=self.var_service).run_mc(mc_config)
        if config.fmt == "json":
            emit_document(report.to_dict(), config.out)
        else:
            emit_frame(report.to_frame(), config)

    def run_hillplot(self, config: RunConfig, args: argparse.Namespace) -> None:
        series = self.load(config)
        eta = config.eta
        if eta is None:
            eta = min(series.n // 2, tail_count(order_tail(series, config.tail), config.tail))
        emit_frame(self.tail_service.hill_trace(series, eta, config.tail).to_frame(), config)

    def run_qqplot(self, config: RunConfig, args: argparse.Namespace) -> None:
        emit_frame(self.tail_service.qq_normal_data(self.load(config)), config)

    def dispatch(self, config: RunConfig, args: argparse.Namespace) -> None:
        getattr(self, f"run_{config.command}")(config, args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Argument vector without the program name (defaults to sys.argv[1:])

    Returns:
        The exit status
    """
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        setup_logging(args.log_level)
        config = RunConfig.from_args(args)
        Cli().dispatch(config, args)
    except UsageError as e:
        sys.stderr.write(f"tailvar: usage error: {str(e)}\n")
        return 1
    except TailVarError as e:
        logger.error(str(e))
        sys.stderr.write(f"tailvar: {str(e)}\n")
        return 2
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
