"""Command-line entry points.

Exit codes: 0 success, 1 validation failure, 2 config error,
3 solver failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import ConfigError, parse_config
from .dosimetry import CutlineSpec, SweepSpec, extract_cutline, run_coupled, run_sweep
from .linsolve import SolverError
from .mc.engine import TransportError
from .outputs import (
    OutputError,
    read_field_dump,
    write_cutline_csv,
    write_field_dump,
    write_probe_csv,
)
from .units import explain_units

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _print_units(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(explain_units())
    ctx.exit(EXIT_OK)


@click.group()
@click.option("--explain-units", is_flag=True, callback=_print_units,
              expose_value=False, is_eager=True,
              help="Print the config-to-internal unit conversion table and exit.")
def main():
    """Coupled light-transport and tissue-heating simulations."""


def _load_config(path, lenient):
    try:
        cfg = parse_config(path, strict=not lenient)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    for w in cfg.warnings:
        click.echo(f"warning: {w}", err=True)
    return cfg


def _solver_guard(fn):
    try:
        return fn()
    except (SolverError, TransportError) as e:
        click.echo(f"solver failure: {e}", err=True)
        sys.exit(EXIT_SOLVER)


def _write_run_artifacts(cfg, result, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    phi = result.fluence.get("diffusion", result.fluence.get("mc"))
    fields = {
        "fluence": phi,
        "fluence_mc": result.fluence.get("mc"),
        "temperature": result.temperature.get("steady"),
        "temperature_final": result.temperature.get("final"),
    }
    for line in cfg.output.cutlines:
        field = fields["temperature"] if line.quantity == "temperature" else phi
        if field is None:
            continue
        prof = extract_cutline(field, CutlineSpec(line.start_mm, line.end_mm, line.samples))
        write_cutline_csv(prof, out_dir / f"{line.name}.csv")
    for name in cfg.output.dump_fields:
        if fields.get(name) is not None:
            write_field_dump(fields[name], out_dir / f"{name}.f32")
    if result.transient is not None and result.transient.probes:
        write_probe_csv(result.transient.times, result.transient.probes,
                        out_dir / "probes.csv")
    (out_dir / "report.txt").write_text(result.report.to_text())
    (out_dir / "report.kv").write_text(result.report.to_keyvalue())


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--lenient", is_flag=True, help="Warn on unknown config keys instead of failing.")
@click.option("--out", "out_override", type=click.Path(file_okay=False), default=None,
              help="Override the output directory from the config.")
def run(config_path, lenient, out_override):
    """Execute one coupled run and write its artifacts."""
    cfg = _load_config(config_path, lenient)
    result = _solver_guard(lambda: run_coupled(cfg))
    out_dir = Path(out_override or cfg.output.directory)
    _write_run_artifacts(cfg, result, out_dir)
    click.echo(result.report.to_text())
    click.echo(f"artifacts written to {out_dir}")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--param", required=True,
              type=click.Choice(["source-irradiance", "wavelength-property-set"]))
@click.option("--values", required=True,
              help="Comma-separated sweep values (numbers or property-set paths).")
@click.option("--lenient", is_flag=True, help="Warn on unknown config keys instead of failing.")
@click.option("--out", "out_override", type=click.Path(file_okay=False), default=None)
def sweep(config_path, param, values, lenient, out_override):
    """Run the config once per sweep value and tabulate the reports."""
    cfg = _load_config(config_path, lenient)
    raw = [v.strip() for v in values.split(",") if v.strip()]
    if not raw:
        click.echo("config error: no sweep values given", err=True)
        sys.exit(EXIT_CONFIG)
    if param == "source-irradiance":
        try:
            vals = tuple(float(v) for v in raw)
        except ValueError as e:
            click.echo(f"config error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
    else:
        vals = tuple(raw)
    result = run_sweep(cfg, SweepSpec(param, vals))
    out_dir = Path(out_override or cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for row in result.rows:
        if row.error is not None:
            lines.append(f"value = {row.value!r}  FAILED: {row.error}")
        else:
            lines.append(f"value = {row.value!r}")
            lines.extend(f"  {k} = {v!r}" for k, v in row.report.items())
    if result.partial:
        lines.append("sweep aborted: partial results above")
    text = "\n".join(lines) + "\n"
    (out_dir / "sweep_report.txt").write_text(text)
    click.echo(text)
    if result.partial:
        sys.exit(EXIT_SOLVER)


@main.command()
@click.option("--fault", type=click.Choice(["mu_a_sign"]), default=None, hidden=True)
def validate(fault):
    """Run the built-in analytic validation suite."""
    from .selfcheck import validation_report

    text, ok = validation_report(fault=fault)
    click.echo(text)
    if not ok:
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.argument("dump_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--from", "start", required=True, help="Start point x,y,z in mm.")
@click.option("--to", "end", required=True, help="End point x,y,z in mm.")
@click.option("-n", "samples", type=int, default=200, show_default=True)
@click.option("-o", "out_csv", type=click.Path(dir_okay=False), default=None,
              help="Write the profile as CSV instead of printing it.")
def cutline(dump_path, start, end, samples, out_csv):
    """Sample a line profile through a stored field dump."""
    def parse_pt(text, flag):
        parts = text.split(",")
        if len(parts) != 3:
            click.echo(f"config error: {flag} needs x,y,z", err=True)
            sys.exit(EXIT_CONFIG)
        try:
            return tuple(float(p) for p in parts)
        except ValueError:
            click.echo(f"config error: {flag} needs numbers, got {text!r}", err=True)
            sys.exit(EXIT_CONFIG)

    a = parse_pt(start, "--from")
    b = parse_pt(end, "--to")
    try:
        field = read_field_dump(dump_path)
        prof = extract_cutline(field, CutlineSpec(a, b, samples))
    except (OutputError, ValueError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    if out_csv:
        write_cutline_csv(prof, out_csv)
        click.echo(f"wrote {out_csv}")
    else:
        col = f"{prof.quantity}_{prof.units}"
        click.echo(f"position_cm,{col}")
        for p, v in zip(prof.positions_cm, prof.values):
            click.echo(f"{p!r},{v!r}")


@main.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
def report(run_dir):
    """Print the stored report of a finished run."""
    path = Path(run_dir) / "report.txt"
    if not path.exists():
        click.echo(f"config error: no report.txt in {run_dir}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(path.read_text())


if __name__ == "__main__":
    main()
