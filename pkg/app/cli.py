# ======================================================================================
# LÍNEA DE COMANDOS
# ======================================================================================
# plan | simulate | compare | validate | emit-lp
# Códigos de salida: 0 ok, 1 escenario infactible, 2 entrada inválida.
import functools
import logging
import sys
from typing import Callable, Optional

import click

from app.config import setup_logging
from app.exceptions import InfeasibleError, MigSchedError
from app.schemas.run_schema import MODES, SOLVERS, RunConfig
from app.services.pipeline_service import run_compare, run_emit_lp, run_plan, run_simulate, run_validate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_BAD_INPUT = 2


def run_options(command: Callable) -> Callable:
    """Flags comunes a todos los comandos (cada una pisa su variable MIGSCHED_*)"""
    options = [
        click.option("--scenario", type=click.Path(dir_okay=False), default=None,
                     help="Documento YAML del escenario"),
        click.option("--solver", type=click.Choice(SOLVERS), default=None),
        click.option("--predictor", default=None, help="oracle | persistence | ewma:<α>"),
        click.option("--preinit", type=click.Choice(["on", "off"]), default=None),
        click.option("--granularity", type=float, default=None, help="Segundos por paso"),
        click.option("--seed", type=int, default=None),
        click.option("--out", type=click.Path(file_okay=False), default=None),
        click.option("--eq11-as-printed", "--literal-reconfiguration", "literal_reconfiguration", is_flag=True,
                     help="Emite la restricción de reconfiguración en su forma literal"),
        click.option("--workers", type=click.IntRange(min=1), default=None),
        click.option("--mode", type=click.Choice(MODES), default=None),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_config(
        scenario: Optional[str] = None,
        solver: Optional[str] = None,
        predictor: Optional[str] = None,
        preinit: Optional[str] = None,
        granularity: Optional[float] = None,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        literal_reconfiguration: bool = False,
        workers: Optional[int] = None,
        mode: Optional[str] = None
) -> RunConfig:
    return RunConfig.from_settings(
        scenario=scenario,
        solver=solver,
        predictor=predictor,
        preinit=None if preinit is None else preinit == "on",
        granularity=granularity,
        seed=seed,
        out=out,
        literal_reconfiguration=literal_reconfiguration or None,
        workers=workers,
        mode=mode
    )


def handle_errors(command: Callable) -> Callable:
    """Traduce las excepciones a códigos de salida con el diagnóstico en stderr"""

    @functools.wraps(command)
    def wrapper(**options):
        try:
            command(build_config(**options))
        except InfeasibleError as e:
            click.echo(f"❌ Escenario infactible: {e}", err=True)
            sys.exit(EXIT_INFEASIBLE)
        except (MigSchedError, ValueError, OSError) as e:
            click.echo(f"❌ Entrada inválida: {e}", err=True)
            sys.exit(EXIT_BAD_INPUT)
        sys.exit(EXIT_OK)

    return wrapper


@click.group()
@click.option("--log-level", default=None, help="DEBUG | INFO | WARNING (por defecto MIGSCHED_LOG_LEVEL)")
def cli(log_level: Optional[str]):
    """Planificador y simulador de particiones MIG."""
    setup_logging(log_level)


@cli.command()
@run_options
@handle_errors
def plan(config: RunConfig):
    """Planifica cada ventana y escribe plan_w{n}.json"""
    for path in run_plan(config):
        click.echo(str(path))


@cli.command()
@run_options
@handle_errors
def simulate(config: RunConfig):
    """Planifica, simula y escribe metrics.json / metrics.csv"""
    for mode, metrics in run_simulate(config).items():
        click.echo(f"{mode}: goodput={metrics.system_goodput:.6f} reconfigs={metrics.reconfigurations}")


@cli.command()
@run_options
@handle_errors
def compare(config: RunConfig):
    """DP (+pre-init) contra reparto estático y bordes de ventana"""
    report = run_compare(config)
    for column in report.columns:
        line = f"{column.planner}: fluid={column.fluid.system_goodput:.6f}"
        if column.requests is not None:
            line += f" requests={column.requests.system_goodput:.6f}"
        click.echo(line)


@cli.command()
@run_options
@handle_errors
def validate(config: RunConfig):
    """Carga el escenario y pre-chequea la factibilidad de cada ventana"""
    windows = run_validate(config)
    click.echo(f"ok: {len(windows)} ventanas")


@cli.command("emit-lp")
@run_options
@handle_errors
def emit_lp(config: RunConfig):
    """Escribe el modelo entero-mixto de cada ventana en formato LP"""
    for path in run_emit_lp(config):
        click.echo(str(path))
