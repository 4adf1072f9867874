"""
Command-Line Front End
-----------------------
Commands:
  stream    [INPUT]      → newline-delimited numbers → remedian query (JSON)
  analyze                → closed-form report for (k, b, --dist) and optional N/Ks
  simulate  EXPERIMENT   → exact-rank | rank | quad | psirem | multi |
                           components | breakdown | normality | chain

Distributions (--dist):
  uniform | normal:MU,SIGMA | pareto:ALPHA,BETA | beta:ALPHA | t:NU,SCALE,SHIFT

Exit status: 0 success, 1 a --check tolerance failed, 2 invalid input or
parameters (message on stderr as {"error": "..."}).
"""

import functools
import json
import logging
import sys

import click

import config
from agents.report_agent import FORMATS, dump_json, dump_key_value_csv
from engines.distributions import parse_distribution
from errors import InvalidParameterError, RemedianError, ToleranceViolation
from models.report_model import ExperimentConfig
from orchestrator import EXPERIMENTS, Orchestrator

_log = logging.getLogger("remedian.cli")

orchestrator = Orchestrator()


# ── Option parsing ─────────────────────────────────────────────────────────

def _parse_ks(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma list of integers, got {value!r}") from None


def _parse_stages(ctx, param, value):
    if value is None:
        return None
    stages = []
    for part in value.split(","):
        k, sep, b = part.strip().lower().partition("x")
        if not sep:
            raise click.BadParameter(f"stages are written KxB, got {part!r}")
        try:
            stages.append((int(k), int(b)))
        except ValueError:
            raise click.BadParameter(f"stages are written KxB, got {part!r}") from None
    return stages


def _emit(text: str, output: str) -> None:
    with click.open_file(output, "wb") as handle:
        handle.write(text.encode("utf-8"))


def _render_answer(payload: dict, fmt: str) -> str:
    return dump_json(payload) if fmt == "json" else dump_key_value_csv(payload)


def handle_errors(func):
    """RemedianError → {"error": ...} on stderr and exit status 2."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ToleranceViolation as exc:
            click.echo(json.dumps({"error": str(exc)}, ensure_ascii=False), err=True)
            sys.exit(1)
        except RemedianError as exc:
            _log.debug("command failed", exc_info=True)
            click.echo(json.dumps({"error": str(exc)}, ensure_ascii=False), err=True)
            sys.exit(2)
    return wrapper


_k_option = click.option("--k", "k", type=int, default=2, show_default=True, help="Rows of the remedian matrix.")
_b_option = click.option("--b", "b", type=int, default=3, show_default=True, help="Odd row width.")
_format_option = click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)
_output_option = click.option("--output", "output", default="-", show_default=True, help="File path, or - for stdout.")


# ── Commands ───────────────────────────────────────────────────────────────

@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level on stderr.")
def cli(verbose):
    """Streaming remedian sketches, their analytics and verification experiments."""
    config.configure_logging(verbose)


@cli.command()
@click.argument("input_file", metavar="[INPUT]", type=click.File("r"), default="-")
@_k_option
@_b_option
@_format_option
@_output_option
@handle_errors
def stream(input_file, k, b, fmt, output):
    """Feed newline-delimited numbers through a k×b remedian and print the estimate."""
    answer = orchestrator.stream(input_file, k, b)
    _emit(_render_answer(answer, fmt), output)


@cli.command()
@_k_option
@_b_option
@click.option("--dist", default="normal:0,1", show_default=True, help="Population law literal.")
@click.option("--N", "N", type=int, default=None, help="ℓ-remedian buffer size.")
@click.option("--Ks", "Ks", callback=_parse_ks, default=None, help="Comma list of order-statistic indices.")
@_format_option
@_output_option
@handle_errors
def analyze(k, b, dist, N, Ks, fmt, output):
    """Breakdown, variance factors, covariances and efficiencies for (k, b, dist)."""
    answer = orchestrator.analyze(k, b, parse_distribution(dist), N=N, Ks=Ks)
    _emit(_render_answer(answer, fmt), output)


@cli.command()
@click.argument("experiment", type=click.Choice(EXPERIMENTS))
@_k_option
@_b_option
@click.option("--N", "N", type=int, default=None, help="ℓ-remedian buffer size (multi).")
@click.option("--Ks", "Ks", callback=_parse_ks, default=None, help="Comma list of indices (multi).")
@click.option("--dist", default="normal:0,1", show_default=True, help="Population law literal.")
@click.option("--rho", type=float, default=None, help="Component correlation (components).")
@click.option("--stages", callback=_parse_stages, default=None, help="Chain stages, e.g. 1x3,1x3 (chain).")
@click.option("--replicates", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=None, help="Defaults to REMEDIAN_SEED, then 0.")
@click.option("--threads", type=int, default=None, help="Worker cap; defaults to REMEDIAN_THREADS.")
@click.option("--check", is_flag=True, help="Exit 1 when any tolerance in the report fails.")
@_format_option
@_output_option
@handle_errors
def simulate(experiment, k, b, N, Ks, dist, rho, stages, replicates, seed, threads, check, fmt, output):
    """Run a named experiment and write its report."""
    config.check()
    if seed is None:
        seed = config.REMEDIAN_SEED if config.REMEDIAN_SEED is not None else 0
        _log.info("no --seed given, using %d", seed)
    if threads is not None and threads < 1:
        raise InvalidParameterError(f"--threads must be positive, got {threads}")
    run_config = ExperimentConfig(
        distribution=parse_distribution(dist),
        k=k, b=b, replicates=replicates, seed=seed,
        N=N, Ks=Ks, rho=rho, stages=stages,
        threads=threads or config.REMEDIAN_THREADS,
        batch=config.REMEDIAN_BATCH,
    )
    report = orchestrator.run(experiment, run_config)
    _emit(orchestrator.render([report], fmt), output)
    if check:
        orchestrator.gate(report)


if __name__ == "__main__":
    cli()
