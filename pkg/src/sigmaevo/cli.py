"""Command-line front end: ``sigmaevo <subcommand> [--config FILE] [--set section.key=value ...]``."""
from __future__ import annotations

import sys

import click

from .config import ConfigError, parse_config, load_config
from .experiments import EXIT_CONFIG, EXIT_IO, RunError, run
from .params import ParameterError


def _overrides(pairs, command, output_dir, seed, strict):
    out = {"run.command": command}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError([f"override {item!r} is not of the form section.key=value"])
        out[key.strip()] = value.strip()
    if output_dir is not None:
        out["run.output_dir"] = output_dir
    if seed is not None:
        out["run.seed"] = str(seed)
    if strict:
        out["run.strict"] = "true"
    return out


def _execute(command, config, sets, output_dir, seed, quiet, strict):
    try:
        overrides = _overrides(sets, command, output_dir, seed, strict)
        cfg = load_config(config, overrides) if config else parse_config("", overrides)
        outcome = run(cfg)
    except (ConfigError, ParameterError) as exc:
        for err in exc.errors:
            click.echo(f"error: {err}", err=True)
        sys.exit(EXIT_CONFIG)
    except RunError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    if not quiet:
        for line in outcome.summary:
            click.echo(line)
        for path in outcome.artifacts:
            click.echo(f"wrote {path}")
    sys.exit(outcome.status)


def _common(func):
    opts = [
        click.option("--config", "-c", type=click.Path(dir_okay=False), help="Config file ([section] key = value)."),
        click.option("--set", "-s", "sets", multiple=True, metavar="SECTION.KEY=VALUE", help="Override one config key."),
        click.option("--output-dir", "-o", default=None, help="Directory for artifacts."),
        click.option("--seed", type=int, default=None, help="Seed for random data and test families."),
        click.option("--quiet", "-q", is_flag=True, help="Print nothing on success."),
        click.option("--strict", is_flag=True, help="Exit 4 on resolution warnings."),
    ]
    for opt in reversed(opts):
        func = opt(func)
    return func


@click.group()
def main():
    """Experiments for the damped sigma-evolution equation with Hartree-type nonlinearities.

    Exit codes: 0 ok, 1 I/O error, 2 config error, 3 growth verdict,
    4 resolution warning under --strict, 5 numeric failure.
    """


def _register(name, help_text):
    @main.command(name=name, help=help_text)
    @_common
    def command(config, sets, output_dir, seed, quiet, strict):
        _execute(name, config, sets, output_dir, seed, quiet, strict)

    return command


_register("region", "Admissible interval for p+q and the thresholds behind it.")
_register("linear-decay", "Grid-free decay curves of the linear solution and their fitted slopes.")
_register("simulate", "Nonlinear simulation with the weighted-norm boundedness verdict.")
_register("compare", "Modified against classical Hartree nonlinearity on identical data.")
_register("check-inequalities", "HLS, Gagliardo-Nirenberg and Duhamel-integral checks.")
_register("fit", "Refit the decay slopes of an existing decay.csv (decay.fit_input).")


if __name__ == "__main__":  # pragma: no cover
    main()
