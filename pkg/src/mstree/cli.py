"""Typer CLI interface for mstree."""

import dataclasses
import logging
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, NoReturn

import typer
from pydantic import ValidationError

from mstree.config.run import RunConfig
from mstree.config.settings import Settings
from mstree.core.tree import DuplicateKeyError, InvalidParameterError
from mstree.report.output import emit
from mstree.utils.formatting import fmt_saving, round_half_even

if TYPE_CHECKING:
    from mstree.codec.image import CompactImage

app = typer.Typer(
    name="mst",
    help="Random m-ary search trees: profiles, urn limits and compact images.",
    no_args_is_help=True,
)
compress_app = typer.Typer(
    help="Build, inspect and query compact CMST tree files.",
    no_args_is_help=True,
)
app.add_typer(compress_app, name="compress")

logger = logging.getLogger(__name__)

EXIT_NOT_FOUND = 1
EXIT_USAGE = 2
EXIT_DATA = 3

TABLE_M = range(2, 28)

PROTECTED_NOTE = (
    "protected_fraction is S - L (non-leaves); the commonly quoted "
    "constant protected_fraction_stated is half of it"
)


class TableName(str, Enum):
    LAMBDA2 = "lambda2"
    RELSIZE = "relsize"


def _get_settings() -> Settings:
    """Load settings, warning on config errors."""
    try:
        return Settings()
    except Exception as e:
        logger.warning("Failed to load config: %s", e)
        logger.warning("Using default settings")
        return Settings.model_construct()


def _fail(message: str, code: int) -> NoReturn:
    typer.echo(f"Error: {message}", err=True)
    raise typer.Exit(code)


def _config(command: str, **flags: Any) -> RunConfig:
    """Merge flags over settings; invalid values are usage errors."""
    try:
        return RunConfig.from_settings(_get_settings(), command, **flags)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'flags'}: {err['msg']}"
            for err in e.errors()
        )
        _fail(problems, EXIT_USAGE)


def _require_m(config: RunConfig) -> int:
    if config.m is None:
        _fail("--m is required", EXIT_USAGE)
    return config.m


FORMAT_OPTION = typer.Option(
    None, "--format", "-f", help="Output format: json, csv or text.",
)
SEED_OPTION = typer.Option(None, "--seed", help="64-bit master seed.")


@app.callback()
def main(
    verbose: bool = typer.Option(
        False, "--verbose", "-v", help="Show debug output.",
    ),
) -> None:
    """Random m-ary search trees: profiles, urn limits and compact images."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
    )


@app.command()
def spectra(
    m_min: int = typer.Option(2, "--m-min", help="Smallest m (>= 2)."),
    m_max: int = typer.Option(27, "--m-max", help="Largest m (<= 64)."),
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Tabulate Re lambda2 of A^T and the limit-law regime."""
    from mstree.core.spectra import EigenSolverError, eigen_spectrum

    config = _config("spectra", m_min=m_min, m_max=m_max, output_format=fmt)
    assert config.m_min is not None and config.m_max is not None
    rows = []
    try:
        for m in range(config.m_min, config.m_max + 1):
            report = eigen_spectrum(m)
            rows.append(
                {
                    "m": m,
                    "lambda2_re": round_half_even(
                        report.lambda2_re, config.table_decimals,
                    ),
                    "regime": report.regime,
                }
            )
    except EigenSolverError as e:
        _fail(str(e), EXIT_DATA)
    emit(
        rows,
        config.output_format,
        title="Re lambda2 by m",
        digits=config.significant_digits,
        decimals=config.table_decimals,
    )


@app.command()
def limits(
    m: int = typer.Option(..., "--m", help="Branching factor (>= 2)."),
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Print the almost-sure limits of gap and degree fractions."""
    from mstree.core.asymptotics import limit_profile

    config = _config("limits", m=m, output_format=fmt)
    profile = limit_profile(_require_m(config))
    logger.warning(PROTECTED_NOTE)
    record = dataclasses.asdict(profile) | {"note": PROTECTED_NOTE}
    emit(
        record,
        config.output_format,
        title=f"Limits for m={profile.m}",
        digits=config.significant_digits,
    )


@app.command()
def simulate(
    m: int = typer.Option(..., "--m", help="Branching factor (>= 2)."),
    n: int | None = typer.Option(None, "--n", help="Keys per tree."),
    trials: int | None = typer.Option(None, "--trials", help="Trees to average."),
    seed: int | None = SEED_OPTION,
    workers: int | None = typer.Option(
        None, "--workers", help="Worker processes (output is identical).",
    ),
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Monte Carlo comparison of X/n and D/n with their limits."""
    from mstree.core.asymptotics import limit_profile, monte_carlo

    config = _config(
        "simulate", m=m, n=n, trials=trials, seed=seed, workers=workers,
        output_format=fmt,
    )
    m_value = _require_m(config)
    report = monte_carlo(
        m_value, config.n, config.trials, config.seed, workers=config.workers,
    )
    limits = limit_profile(m_value)
    record = dataclasses.asdict(report) | {
        "v": limits.v,
        "v_star": limits.v_star,
    }
    emit(
        record,
        config.output_format,
        title=f"Monte Carlo m={m_value} n={config.n}",
        digits=config.significant_digits,
    )


@app.command()
def clt(
    m: int = typer.Option(..., "--m", help="Branching factor (3..26)."),
    n: int | None = typer.Option(None, "--n", help="Keys per tree."),
    trials: int | None = typer.Option(None, "--trials", help="Trees to sample."),
    seed: int | None = SEED_OPTION,
    outdegree: int = typer.Option(0, "--outdegree", help="Outdegree k to probe."),
    workers: int | None = typer.Option(None, "--workers"),
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Sample moments of a standardized outdegree count."""
    from mstree.core.asymptotics import clt_probe

    config = _config(
        "clt", m=m, n=n, trials=trials, seed=seed, workers=workers,
        output_format=fmt,
    )
    try:
        probe = clt_probe(
            _require_m(config), config.n, config.trials, config.seed,
            outdegree=outdegree, workers=config.workers,
        )
    except InvalidParameterError as e:
        _fail(str(e), EXIT_USAGE)
    emit(
        dataclasses.asdict(probe) | {"moments_available": probe.moments_available},
        config.output_format,
        title=f"Normality probe m={probe.m} k={probe.outdegree}",
        digits=config.significant_digits,
    )


@app.command()
def urn(
    m: int = typer.Option(..., "--m", help="Branching factor (>= 2)."),
    steps: int = typer.Option(100_000, "--steps", min=0, help="Draws."),
    seed: int | None = SEED_OPTION,
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Run the gap urn alone and compare its fractions with v."""
    from mstree.core.spectra import principal_eigenvector
    from mstree.core.urn import simulate as simulate_urn

    config = _config("urn", m=m, seed=seed, output_format=fmt)
    m_value = _require_m(config)
    state = simulate_urn(m_value, steps, config.seed)
    v = principal_eigenvector(m_value).v
    fractions = state.fractions
    emit(
        {
            "m": m_value,
            "steps": steps,
            "seed": config.seed,
            "counts": state.counts,
            "total": state.total,
            "fractions": fractions,
            "v": v,
            "deviation": max(abs(a - b) for a, b in zip(fractions, v, strict=True)),
        },
        config.output_format,
        title=f"Urn m={m_value} after {steps} draws",
        digits=config.significant_digits,
    )


@app.command()
def couple(
    m: int = typer.Option(..., "--m", help="Branching factor (>= 2)."),
    steps: int = typer.Option(2_500, "--steps", min=0, help="Insertions."),
    seed: int | None = SEED_OPTION,
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Grow a tree and an urn together and count disagreements."""
    from mstree.core.urn import coupled_growth

    config = _config("couple", m=m, seed=seed, output_format=fmt)
    report = coupled_growth(_require_m(config), steps, config.seed)
    emit(
        {
            "m": report.m,
            "steps": report.steps,
            "seed": report.seed,
            "delta_mismatches": report.delta_mismatches,
            "profile_mismatches": report.profile_mismatches,
            "coupled": report.coupled,
            "gap_profile": report.final_profile.counts,
            "urn_counts": report.final_state.counts,
            "draws_by_color": report.draws_by_color,
        },
        config.output_format,
        title=f"Tree/urn coupling m={report.m}",
        digits=config.significant_digits,
    )
    if not report.coupled:
        raise typer.Exit(EXIT_DATA)


@app.command()
def tables(
    which: TableName = typer.Option(..., "--which", help="lambda2 or relsize."),
    k: int | None = typer.Option(None, "--k", help="Bytes per key."),
    p: int | None = typer.Option(None, "--p", help="Bytes per link."),
    b: int | None = typer.Option(None, "--b", help="Bits per byte (8)."),
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Emit the m = 2..27 table of Re lambda2 or relative size."""
    from mstree.codec.size_model import relative_limit_exact
    from mstree.core.spectra import eigen_spectrum

    config = _config("tables", k=k, p=p, b=b, output_format=fmt)
    decimals = config.table_decimals
    rows: list[dict[str, object]] = []
    for m in TABLE_M:
        if which is TableName.LAMBDA2:
            value = eigen_spectrum(m).lambda2_re
            rows.append({"m": m, "lambda2_re": round_half_even(value, decimals)})
        else:
            value = relative_limit_exact(m, config.k, config.p, config.b)
            rows.append({"m": m, "relative_size": round_half_even(value, decimals)})
    emit(
        rows,
        config.output_format,
        title=f"{which.value} table",
        digits=config.significant_digits,
        decimals=decimals,
    )


def _read_permutation(path: Path) -> list[int]:
    """One decimal rank per line; blank lines are ignored."""
    ranks = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        _fail(f"Cannot read {path}: {e}", EXIT_DATA)
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rank = int(line)
        except ValueError:
            _fail(f"{path}:{number}: not a decimal rank: {line!r}", EXIT_DATA)
        if rank < 1:
            _fail(f"{path}:{number}: ranks must be positive, got {rank}", EXIT_DATA)
        ranks.append(rank)
    return ranks


def _load_image(path: Path) -> "CompactImage":
    from mstree.codec.image import CompactFormatError, read_image

    try:
        return read_image(path.read_bytes())
    except OSError as e:
        _fail(f"Cannot read {path}: {e}", EXIT_DATA)
    except CompactFormatError as e:
        _fail(f"{path}: {e}", EXIT_DATA)


@compress_app.command("build")
def compress_build(
    output: Path = typer.Option(
        ..., "--output", "-o", dir_okay=False, help="CMST file to write.",
    ),
    permutation: Path | None = typer.Argument(
        None,
        exists=True,
        dir_okay=False,
        help="File with one rank per line (omit with --random-n).",
    ),
    m: int = typer.Option(..., "--m", help="Branching factor (>= 2)."),
    k: int | None = typer.Option(None, "--k", help="Bytes per key."),
    p: int | None = typer.Option(None, "--p", help="Bytes per link."),
    random_n: int | None = typer.Option(
        None, "--random-n", min=1, help="Use a seeded random permutation of 1..N.",
    ),
    seed: int | None = SEED_OPTION,
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Build a tree and write it as a compact CMST file."""
    from mstree.codec.image import KeyOverflowError, OffsetOverflowError, encode
    from mstree.codec.size_model import plain_size, size_breakdown, size_params
    from mstree.core.tree import build_from_permutation, degree_profile
    from mstree.utils.rng import random_permutation

    config = _config(
        "compress-build", m=m, k=k, p=p, seed=seed, output_format=fmt,
        input_path=permutation, output_path=output,
    )
    m_value = _require_m(config)
    if (permutation is None) == (random_n is None):
        _fail("Give either a permutation file or --random-n", EXIT_USAGE)
    if permutation is not None:
        ranks = _read_permutation(permutation)
    else:
        assert random_n is not None
        ranks = random_permutation(random_n, config.seed)
    if not ranks:
        _fail("The permutation is empty", EXIT_DATA)

    try:
        tree = build_from_permutation(m_value, ranks)
    except DuplicateKeyError as e:
        _fail(str(e), EXIT_DATA)
    params = size_params(m_value, config.k, config.p, config.b)
    try:
        image = encode(tree, params)
    except (KeyOverflowError, OffsetOverflowError) as e:
        _fail(str(e), EXIT_USAGE)

    output.write_bytes(image.data)
    logger.info("Wrote %s (%d bytes)", output, len(image.data))
    formula = size_breakdown(tree, params).total
    nodes = degree_profile(tree).nodes
    plain = plain_size(nodes, params)
    emit(
        {
            "path": str(output),
            "m": m_value,
            "n": tree.n,
            "nodes": nodes,
            "header_bytes": image.header_size,
            "payload_bytes": image.payload_size,
            "formula_bytes": formula,
            "plain_bytes": plain,
            "ratio": image.payload_size / plain,
            "saving": fmt_saving(image.payload_size / plain),
        },
        config.output_format,
        title="Compact image",
        digits=config.significant_digits,
    )


@compress_app.command("inspect")
def compress_inspect(
    path: Path = typer.Argument(..., exists=True, dir_okay=False),
    fmt: str | None = FORMAT_OPTION,
) -> None:
    """Show node-type counts and the size breakdown of a CMST file."""
    from mstree.codec.image import CompactFormatError, decode
    from mstree.codec.size_model import plain_size, size_breakdown
    from mstree.core.tree import degree_profile, node_type_counts

    config = _config("compress-inspect", input_path=path, output_format=fmt)
    image = _load_image(path)
    try:
        tree = decode(image)
    except CompactFormatError as e:
        _fail(f"{path}: {e}", EXIT_DATA)
    breakdown = size_breakdown(tree, image.params)
    nodes = degree_profile(tree).nodes
    emit(
        {
            "path": str(path),
            "m": image.m,
            "k": image.k,
            "p": image.p,
            "n": image.n,
            "nodes": nodes,
            "type_counts": node_type_counts(tree),
            "full_nodes_bytes": breakdown.full_nodes_bytes,
            "internal_bytes": breakdown.internal_bytes,
            "full_leaf_bytes": breakdown.full_leaf_bytes,
            "partial_leaf_bytes": breakdown.partial_leaf_bytes,
            "total": breakdown.total,
            "payload_bytes": image.payload_size,
            "plain_bytes": plain_size(nodes, image.params),
        },
        config.output_format,
        title=f"{path.name}",
        digits=config.significant_digits,
    )


@compress_app.command("get")
def compress_get(
    path: Path = typer.Argument(..., exists=True, dir_okay=False),
    key: int = typer.Option(..., "--key", help="Rank to look up."),
) -> None:
    """Look a rank up directly in a CMST file; exit 1 when absent."""
    from mstree.codec.image import CompactFormatError, lookup

    image = _load_image(path)
    try:
        found = lookup(image, key)
    except CompactFormatError as e:
        _fail(f"{path}: {e}", EXIT_DATA)
    typer.echo(f"{key}: {'found' if found else 'not found'}")
    if not found:
        raise typer.Exit(EXIT_NOT_FOUND)
