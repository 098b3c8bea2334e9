"""The vmmmapy command line: generate, simulate, analyze, design-kernel and lamperti"""
# Built-in
import json
from pathlib import Path
from typing import Any, Optional

# Third-Party
import typer

# This project
from vmmmapy._templates import CONFIG
from vmmmapy.app import Experiment
from vmmmapy.config import DEFAULT_CONFIG
from vmmmapy.errors import AlreadyExistsException, ConfigError, NumericError
from vmmmapy.reporter import Reporter

__all__: tuple[str, ...] = ("app", "execute", "write_config", "start_typer")

app = typer.Typer(help="Simulate and analyse volatility modulated mixed moving average fields")

CONFIG_OPTION = typer.Option(Path(DEFAULT_CONFIG), "--config", help="Experiment config file")
SEED_OPTION = typer.Option(None, "--seed", help="Master seed, overrides run.master_seed")
OUT_OPTION = typer.Option(None, "--out", help="Output directory, overrides output.directory")
REPS_OPTION = typer.Option(None, "--reps", help="Replications, overrides run.n_reps")
QUIET_OPTION = typer.Option(False, "--quiet", help="Only print warnings and errors")


def execute(command: str, config: Path, seed: Optional[int], out: Optional[Path], reps: Optional[int],
            quiet: bool) -> dict[str, Any]:
    """
    Run one experiment command, mapping failures to exit codes.

    ### Arguments
    - command (str): simulate, analyze, design-kernel or lamperti
    - config (Path): The config file
    - seed (int | None): --seed override
    - out (Path | None): --out override
    - reps (int | None): --reps override
    - quiet (bool): Silence INFO lines and the summary

    ### Returns
    - dict[str, Any]: The summary rows, exiting with code 1 on config errors and 2 on numeric failures
    """
    reporter = Reporter(quiet)
    try:
        with reporter.forward_warnings():
            experiment = Experiment.from_path(config, seed, reps, out, reporter)
            rows = experiment.command(command)()
    except (ConfigError, json.JSONDecodeError) as error:
        reporter.error(f"config: {error}")
        raise typer.Exit(code=1) from error
    except NumericError as error:
        reporter.error(f"{type(error).__name__}: {error}")
        raise typer.Exit(code=2) from error
    except ValueError as error:
        reporter.error(f"invalid input: {error}")
        raise typer.Exit(code=1) from error
    for path in experiment.writer.written:
        reporter.log(f"Wrote {path}")
    reporter.summary(command, rows)
    return rows


def write_config(path: Path, text: str, overwrite: bool = False) -> Path:
    """Write text as the config file of directory path, refusing to replace one unless overwrite"""
    target = path / DEFAULT_CONFIG
    if target.exists() and not overwrite:
        raise AlreadyExistsException(f"{target} already exists, pass --overwrite to replace it")
    path.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as file:
        file.write(text)
    return target


@app.command()
def generate(path: Path = typer.Argument(Path("."), help="Directory of the new experiment"),
             overwrite: bool = False, seed: int = 0, reps: int = 200) -> None:
    """
    Write a reference vmmma.config.json.

    ### Arguments
    - path (Path): Directory of the experiment
    - overwrite (bool): Replace an existing config
    - seed (int): Master seed written to the config
    - reps (int): Replications written to the config

    ### Returns
    - None
    """
    reporter = Reporter()
    if path.is_file():
        reporter.error(f"{path} is a file, not a directory")
        raise typer.Exit(code=1)
    try:
        target = write_config(path, CONFIG.substitute(master_seed=seed, n_reps=reps), overwrite)
    except AlreadyExistsException as error:
        reporter.error(error)
        raise typer.Exit(code=1) from error
    reporter.log(f"Created {target}")


@app.command()
def simulate(config: Path = CONFIG_OPTION, seed: Optional[int] = SEED_OPTION, out: Optional[Path] = OUT_OPTION,
             reps: Optional[int] = REPS_OPTION, quiet: bool = QUIET_OPTION) -> None:
    """Replicate the field and write sampled fields with a Monte Carlo summary"""
    execute("simulate", config, seed, out, reps, quiet)


@app.command()
def analyze(config: Path = CONFIG_OPTION, seed: Optional[int] = SEED_OPTION, out: Optional[Path] = OUT_OPTION,
            reps: Optional[int] = REPS_OPTION, quiet: bool = QUIET_OPTION) -> None:
    """Evaluate the analytic law and write a verification report against Monte Carlo"""
    execute("analyze", config, seed, out, reps, quiet)


@app.command("design-kernel")
def design_kernel(config: Path = CONFIG_OPTION, seed: Optional[int] = SEED_OPTION, out: Optional[Path] = OUT_OPTION,
                  reps: Optional[int] = REPS_OPTION, quiet: bool = QUIET_OPTION) -> None:
    """Design a kernel from the target covariance of the design block"""
    execute("design-kernel", config, seed, out, reps, quiet)


@app.command()
def lamperti(config: Path = CONFIG_OPTION, seed: Optional[int] = SEED_OPTION, out: Optional[Path] = OUT_OPTION,
             reps: Optional[int] = REPS_OPTION, quiet: bool = QUIET_OPTION) -> None:
    """Transform replications to a multi-self-similar field and check its covariance and scaling"""
    execute("lamperti", config, seed, out, reps, quiet)


def start_typer():
    """Start the typer app"""
    app()


if __name__ == "__main__":
    start_typer()
