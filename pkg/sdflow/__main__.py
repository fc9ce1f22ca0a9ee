# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Console script for sdflow."""

import functools
import logging
from pathlib import Path
import sys

import click

from . import acceptance as mod_acceptance
from . import calibrate as mod_calibrate
from . import engine
from . import equilibrium as mod_equilibrium
from . import export
from . import formatter
from . import healthcare
from . import loader
from . import parser
from . import patterns
from . import scenarios


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ENVIRONMENT = 2


def _print_errors(errors):
    for error in errors:
        click.echo("=" * 78, err=True)
        click.echo(str(error), err=True)


def _model_files(files, calibration):
    if not files:
        return healthcare.bundled_files(calibration)
    paths = [Path(x) for x in files]
    if calibration is not None:
        paths.append(Path(calibration))
    return paths


def _load(files, calibration=None, initialize=True):
    """
    Load and, if it declares an equilibrium, initialize a model.  Exits on
    failure.
    """
    paths = _model_files(files, calibration)
    try:
        model = loader.require_model(paths)
    except OSError as e:
        _print_errors([e])
        sys.exit(EXIT_ENVIRONMENT)
    except loader.ModelError as e:
        _print_errors(e.diagnostics)
        sys.exit(EXIT_FAILURE)
    if initialize:
        try:
            model = mod_equilibrium.initialize(model)
        except (mod_equilibrium.NoConvergence, ValueError) as e:
            _print_errors([e])
            sys.exit(EXIT_FAILURE)
    return model, paths


def _parse_assignments(values):
    parsed = {}
    for value in values:
        if "=" not in value:
            raise click.BadParameter(f"'{value}' must be of the form name=value")
        key, number = value.split("=", 1)
        try:
            parsed[key.strip()] = float(number)
        except ValueError:
            raise click.BadParameter(f"'{number}' is not a number")
    return parsed


calibration_option = click.option(
    "--calibration",
    type=click.Path(dir_okay=False, exists=True),
    help="Calibration file replacing the shipped one.",
)

threads_option = click.option(
    "--threads",
    type=click.IntRange(min=1),
    envvar="SDFLOW_THREADS",
    help="Maximum number of runs executed in parallel.",
)


@click.command()
@click.argument(
    "input",
    type=click.Path(exists=False, dir_okay=False, file_okay=True, readable=True),
    nargs=-1,
    required=True,
)
def validate(input):
    """
    Parse, resolve and compile .sdm files, reporting every diagnostic.
    """
    result = loader.load_model([Path(x) for x in input])
    found_error = False
    try:
        for diagnostic in result:
            found_error = found_error or diagnostic.is_error
            click.echo(str(diagnostic), err=True)
    except OSError as e:
        _print_errors([e])
        sys.exit(EXIT_ENVIRONMENT)
    sys.exit(EXIT_FAILURE if found_error else EXIT_OK)


@click.command()
@click.argument(
    "input",
    type=click.Path(exists=False, dir_okay=False, file_okay=True, readable=True),
    nargs=-1,
)
@calibration_option
@click.option("--start", type=click.FLOAT, default=0.0, show_default=True)
@click.option("--stop", type=click.FLOAT, default=20.0, show_default=True)
@click.option("--dt", type=click.FLOAT, default=0.0625, show_default=True)
@click.option(
    "--method",
    type=click.Choice([method.value for method in engine.Method]),
    default=engine.Method.euler.value,
    show_default=True,
)
@click.option("--save-interval", type=click.FLOAT, default=0.25, show_default=True)
@click.option(
    "--scenario",
    multiple=True,
    help="Scenario to run besides the baseline, or 'all'. May be repeated.",
)
@click.option(
    "--set",
    "assignments",
    multiple=True,
    help="Parameter override for every run. Must be of the form name=value",
)
@click.option(
    "--out",
    "-o",
    type=click.Path(dir_okay=True, file_okay=False, writable=True),
    required=True,
)
@threads_option
def run(
    input,
    calibration,
    start,
    stop,
    dt,
    method,
    save_interval,
    scenario,
    assignments,
    out,
    threads,
):
    """
    Simulate a model (the bundled one by default) and write one CSV per run
    plus manifest.json.
    """
    try:
        spec = engine.RunSpec(
            start=start,
            stop=stop,
            dt=dt,
            method=method,
            save_interval=save_interval,
            overrides=_parse_assignments(assignments),
        )
    except engine.RunSpecError as e:
        raise click.UsageError(str(e))

    model, paths = _load(input, calibration)
    defined = model.definition.scenarios
    if "all" in scenario:
        names = list(defined)
    else:
        names = list(dict.fromkeys(scenario))
    unknown = [name for name in names if name not in defined]
    if unknown:
        raise click.UsageError(
            f"Unknown scenario(s): {', '.join(unknown)}. Available scenarios: "
            f"{', '.join(defined) or 'none'}"
        )

    try:
        runs = scenarios.run_scenarios(
            model, spec, [defined[name] for name in names], threads=threads
        )
    except (scenarios.ScenarioRunError, engine.RunSpecError) as e:
        _print_errors([e])
        sys.exit(EXIT_FAILURE)

    export.write_transactionally(
        Path(out), functools.partial(export.output_runs, runs, paths)
    )
    for name, result in runs.items():
        click.echo(f"{name}: {len(result.times)} rows")
    sys.exit(EXIT_OK)


@click.command()
@click.argument("baseline", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--metric",
    "-m",
    multiple=True,
    help="Metric family or instance key. Defaults to every variable.",
)
@click.option(
    "--at",
    "at_times",
    type=click.FLOAT,
    multiple=True,
    help="Saved time to compare at. Defaults to the last saved time.",
)
@click.option("--svg", type=click.Path(dir_okay=False, writable=True))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, writable=True))
def compare(baseline, scenario, metric, at_times, svg, csv_path):
    """
    Compare two run CSVs: print the delta table, optionally write it as CSV
    and render the series as SVG line charts.
    """
    try:
        first = export.read_csv(baseline)
        second = export.read_csv(scenario)
    except ValueError as e:
        _print_errors([e])
        sys.exit(EXIT_FAILURE)

    metrics = list(metric) or first.families()
    times = list(at_times) or [float(first.times[-1])]
    try:
        reports = scenarios.compare(first, second, metrics, times)
    except (scenarios.MisalignedGrids, scenarios.UnknownTarget) as e:
        _print_errors([e])
        sys.exit(EXIT_FAILURE)

    click.echo(export.deltas_table(reports, first.scenario, second.scenario), nl=False)
    if csv_path:
        Path(csv_path).write_text(export.deltas_to_csv(reports), encoding="utf-8")
    if svg:
        Path(svg).write_text(
            export.comparison_svg(first, second, reports), encoding="utf-8"
        )
    sys.exit(EXIT_OK)


@click.command()
@click.option(
    "--profile",
    type=click.Choice(mod_acceptance.PROFILES),
    default="all",
    show_default=True,
)
@calibration_option
@click.option(
    "--report-csv",
    type=click.Path(dir_okay=False, writable=True),
    help="Also write the per-check results as CSV.",
)
@threads_option
def acceptance(profile, calibration, report_csv, threads):
    """
    Run the acceptance suites and print each check with its measured value
    and expected band.
    """
    try:
        report = mod_acceptance.run_acceptance(profile, calibration, threads)
    except OSError as e:
        _print_errors([e])
        sys.exit(EXIT_ENVIRONMENT)
    except loader.ModelError as e:
        _print_errors(e.diagnostics)
        sys.exit(EXIT_FAILURE)
    except (
        mod_equilibrium.NoConvergence,
        patterns.MissingRun,
        patterns.PatternFileError,
        scenarios.ScenarioRunError,
        scenarios.UnknownTarget,
    ) as e:
        _print_errors([e])
        sys.exit(EXIT_FAILURE)

    click.echo(report.table(), nl=False)
    if report_csv:
        Path(report_csv).write_text(export.patterns_to_csv(report), encoding="utf-8")
    sys.exit(EXIT_OK if report.passed else EXIT_FAILURE)


@click.command()
@click.argument(
    "input",
    type=click.Path(exists=False, dir_okay=False, file_okay=True, readable=True),
    nargs=-1,
    required=True,
)
@click.option("--check", is_flag=True, help="Exit 1 if a file is not formatted.")
@click.option("--write", is_flag=True, help="Rewrite the files in place.")
def fmt(input, check, write):
    """
    Print .sdm files in canonical format.
    """
    unformatted = []
    for filepath in [Path(x) for x in input]:
        try:
            text = filepath.read_text(encoding="utf-8")
        except OSError as e:
            _print_errors([e])
            sys.exit(EXIT_ENVIRONMENT)
        result = parser.parse_text(text, str(filepath))
        errors = [diagnostic for diagnostic in result if diagnostic.is_error]
        if errors:
            _print_errors(errors)
            sys.exit(EXIT_FAILURE)
        formatted = formatter.format_model(result.value)
        if formatted == text:
            continue
        unformatted.append(filepath)
        if write:
            filepath.write_text(formatted, encoding="utf-8")
        elif not check:
            click.echo(formatted, nl=False)

    if check and unformatted:
        for filepath in unformatted:
            click.echo(f"would reformat {filepath}", err=True)
        sys.exit(EXIT_FAILURE)
    sys.exit(EXIT_OK)


@click.command()
@click.argument(
    "input",
    type=click.Path(exists=False, dir_okay=False, file_okay=True, readable=True),
    nargs=-1,
)
@calibration_option
@click.option(
    "--horizon",
    type=click.FLOAT,
    default=20.0,
    show_default=True,
    help="Years simulated to check the solution stays put.",
)
def equilibrium(input, calibration, horizon):
    """
    Solve the model's equilibrium block and print the solved stocks.
    """
    model, _ = _load(input, calibration, initialize=False)
    spec = model.definition.equilibrium
    if spec is None:
        _print_errors(["The model has no equilibrium block."])
        sys.exit(EXIT_FAILURE)
    try:
        solution = mod_equilibrium.solve_equilibrium(model, spec)
    except (mod_equilibrium.NoConvergence, ValueError) as e:
        _print_errors([e])
        sys.exit(EXIT_FAILURE)

    click.echo(solution.table(), nl=False)
    report = mod_equilibrium.verify_equilibrium(
        model, solution.values, horizon=horizon
    )
    click.echo(f"Largest relative drift over {horizon:g} years: {report.worst:.3g}")
    sys.exit(EXIT_OK if report.passed else EXIT_FAILURE)


@click.command()
@calibration_option
@click.option(
    "--out",
    "-o",
    type=click.Path(dir_okay=False, writable=True),
    required=True,
    help="Where to write the new calibration file.",
)
@click.option(
    "--max-evaluations",
    type=click.IntRange(min=1),
    default=mod_calibrate.MAX_EVALUATIONS,
    show_default=True,
)
def calibrate(calibration, out, max_evaluations):
    """
    Fit the bundled model's rate parameters to the caption targets and write
    a new calibration file.
    """
    try:
        result = mod_calibrate.run_calibration(out, calibration, max_evaluations)
    except OSError as e:
        _print_errors([e])
        sys.exit(EXIT_ENVIRONMENT)
    except loader.ModelError as e:
        _print_errors(e.diagnostics)
        sys.exit(EXIT_FAILURE)

    for name, value in sorted(result.measured.items()):
        click.echo(f"{name}: {value:.6g}")
    click.echo(
        f"Objective {result.objective:.6g} after {result.evaluations} evaluation(s)"
    )
    sys.exit(EXIT_OK)


@click.group()
@click.option("--verbose", "-v", count=True, help="Log progress; repeat for more.")
def main(verbose):
    """Command line utility for sdflow system dynamics models."""
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


main.add_command(validate)
main.add_command(run)
main.add_command(compare)
main.add_command(acceptance)
main.add_command(fmt)
main.add_command(equilibrium)
main.add_command(calibrate)


if __name__ == "__main__":
    sys.exit(main())  # pragma: no cover
