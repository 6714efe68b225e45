"""Command-line interface.

Commands::

    tridiag-hira lambda      one eigenvalue by Sturm bisection
    tridiag-hira eigvec      one eigenvector, three methods, CSV output
    tridiag-hira bessel      Bessel values by either route, CSV output
    tridiag-hira experiment  the canned benchmark experiments 1/2/3

Exit codes: 0 on success, 2 on numerical failure (NumericalError and
subclasses, I/O failures while writing results), 3 on usage errors
(bad flags/arguments, out-of-range tolerances).

Quoted eigenvalues: ``eigvec --lambda`` accepts a rounded value and
first locates the nearest true eigenvalue by bisection; it must lie
within 5e-4 of the given value.  Output CSV is RFC-4180, LF-terminated,
floats at 17 significant digits, matching the file emitter.
"""

from __future__ import annotations

import csv
import math
import sys
from typing import Sequence

import click

from .bench import (
    EXPERIMENT2_LOCATE_TOL,
    EXPERIMENT3_GRID,
    EXPERIMENT3_GRID_SLOW,
    SUMMARY_HEADER,
    _fmt,
    locate_eigenvalue,
    record_row,
    run_experiment1,
    run_experiment2,
    run_experiment3,
)
from .bessel import bessel_backward, bessel_via_hira, choose_N
from .eigensolve import inverse_power, sturm_bisect
from .errors import NumericalError
from .hira import classify_regions, hira_eigenvector, region_tag, simplified_eigenvector
from .matrix import TridiagMatrix, power_law_profile
from .oracle import agreement_digits

__all__ = ["main", "cli"]


@click.group(name="tridiag-hira")
def cli() -> None:
    """Eigenvalues, high-relative-accuracy eigenvectors, and Bessel values
    for symmetric tridiagonal matrices with unit off-diagonals and
    increasing diagonals."""


def _emit_rows(header: Sequence[str], rows, out: str | None) -> None:
    """CSV rows to stdout, or to a file when out is given."""
    if out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        return
    try:
        with open(out, "w", encoding="ascii", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {out}: {exc}") from exc


@cli.command("lambda")
@click.option("--a", type=float, required=True, help="Power-law exponent (>= 1).")
@click.option("--c", type=float, required=True, help="Power-law scale (>= 1).")
@click.option("--n", type=int, required=True, help="Matrix dimension.")
@click.option("--k", type=int, required=True,
              help="1-based eigenvalue index, ascending.")
@click.option("--tol", type=float, default=None,
              help="Relative bisection tolerance (default: 4 ulp).")
def lambda_cmd(a: float, c: float, n: int, k: int, tol: float | None) -> None:
    """Print the k-th smallest eigenvalue of the power-law matrix."""
    M = TridiagMatrix(power_law_profile(a, c, n))
    lam = sturm_bisect(M, k) if tol is None else sturm_bisect(M, k, tol)
    click.echo(format(lam, ".16E"))


@cli.command("eigvec")
@click.option("--a", type=float, required=True, help="Power-law exponent (>= 1).")
@click.option("--c", type=float, required=True, help="Power-law scale (>= 1).")
@click.option("--n", type=int, required=True, help="Matrix dimension.")
@click.option("--lambda", "lam", type=float, required=True,
              help="Eigenvalue (rounded values accepted; the nearest true "
                   "eigenvalue within 5e-4 is located first).")
@click.option("--method", type=click.Choice(["hira", "simplified", "invpow"]),
              required=True, help="Eigenvector algorithm.")
@click.option("--iters", type=int, default=30, show_default=True,
              help="Iterations for --method invpow.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV output path (default: stdout).")
def eigvec_cmd(a: float, c: float, n: int, lam: float, method: str,
               iters: int, out: str | None) -> None:
    """Unit eigenvector as CSV: index, mantissa, exponent_shift, value,
    region_tag (G / OL / O / OR / D)."""
    M = TridiagMatrix(power_law_profile(a, c, n))
    lam = locate_eigenvalue(M, lam, EXPERIMENT2_LOCATE_TOL)
    if method == "hira":
        res = hira_eigenvector(M, lam)
        vec, part = res.X, res.partition
    elif method == "simplified":
        res = simplified_eigenvector(M, lam)
        vec, part = res.X, res.partition
    else:
        _, trace = inverse_power(M, lam, max_iters=iters)
        vec, part = trace.Y, classify_regions(M, lam)
    rows = []
    for j in range(1, n + 1):
        mantissa, shift = math.frexp(vec[j - 1])
        rows.append((j, mantissa, shift, float(vec[j - 1]),
                     region_tag(part, j)))
    _emit_rows(("index", "mantissa", "exponent_shift", "value", "region_tag"),
               rows, out)


@cli.command("bessel")
@click.option("--x", type=float, required=True, help="Argument (> 0).")
@click.option("--n", type=int, required=True, help="Highest order to report.")
@click.option("--N", "start", type=int, default=None,
              help="Start order of the recurrence (default: self-calibrated).")
@click.option("--method", type=click.Choice(["backward", "hira", "both"]),
              default="both", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV output path (default: stdout).")
def bessel_cmd(x: float, n: int, start: int | None, method: str,
               out: str | None) -> None:
    """First-kind Bessel values J_0(x)..J_n(x) as CSV.

    With --method both, emits both routes plus their digit agreement.
    """
    N = choose_N(x, n) if start is None else start
    if method == "backward":
        run = bessel_backward(x, n, N)
        _emit_rows(("order", "value"),
                   [(k, float(run.values[k])) for k in range(n + 1)], out)
    elif method == "hira":
        run = bessel_via_hira(x, n, N)
        _emit_rows(("order", "value"),
                   [(k, float(run.values[k])) for k in range(n + 1)], out)
    else:
        bw = bessel_backward(x, n, N)
        hv = bessel_via_hira(x, n, N)
        rows = [(k, float(bw.values[k]), float(hv.values[k]),
                 agreement_digits(float(bw.values[k]), float(hv.values[k])))
                for k in range(n + 1)]
        _emit_rows(("order", "value_backward", "value_hira",
                    "agreement_digits"), rows, out)


@cli.command("experiment")
@click.argument("which", type=click.Choice(["1", "2", "3"]))
@click.option("--c", "scales", type=float, multiple=True,
              help="Experiment 1: scales to run (default 100 1000 10000). "
                   "Experiment 3: keep only grid rows with this argument.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Start-vector seed for inverse power.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=None, help="Directory for CSV files (summary always "
                                 "goes to stdout too).")
def experiment_cmd(which: str, scales: tuple[float, ...], seed: int,
                   out_dir: str | None) -> None:
    """Run a canned experiment and print its summary rows as CSV."""
    if which == "1":
        records = []
        for c in scales or (100.0, 1000.0, 10000.0):
            records.extend(run_experiment1(c, out_dir=out_dir, seed=seed))
    elif which == "2":
        if scales:
            raise click.UsageError(
                "experiment 2 runs a fixed matrix; --c is not accepted")
        records = run_experiment2(out_dir=out_dir, seed=seed)
    else:
        full = EXPERIMENT3_GRID + EXPERIMENT3_GRID_SLOW
        if scales:
            wanted = {float(s) for s in scales}
            grid = tuple(row for row in full if row[0] in wanted)
            if not grid:
                options = sorted({row[0] for row in full})
                raise click.UsageError(
                    f"--c matches no grid rows; available: {options}")
        else:
            grid = EXPERIMENT3_GRID
        records = run_experiment3(grid=grid, out_dir=out_dir)
    _emit_rows(SUMMARY_HEADER, [record_row(r) for r in records], None)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=list(argv) if argv is not None else None,
                 prog_name="tridiag-hira", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 3
    except click.ClickException as exc:
        exc.show()
        return 3
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 3
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    except (ValueError, IndexError) as exc:
        click.echo(f"usage error: {exc}", err=True)
        return 3
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
