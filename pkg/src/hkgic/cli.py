import logging
import sys
from pathlib import Path
from typing import Annotated

import typer
from pydantic_core import ValidationError
from rich import print
from rich.console import Console

from .lib.config import OutputFormat
from .lib.config import RunConfig
from .lib.config import get_settings
from .lib.config import load_run_config
from .lib.hkregion import build_instance
from .lib.hkregion import region_sweep
from .lib.hkregion import trace_boundary
from .lib.macgeom import build_mac_projections
from .lib.macgeom import summarize
from .lib.macgeom import verify_grid
from .lib.models import DomainError
from .lib.models import PowerSplit
from .lib.output import boundary_frame
from .lib.output import claims_frame
from .lib.output import mac_frame
from .lib.output import region_frame
from .lib.output import render
from .lib.output import write_output

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_IO = 3

err_console = Console(stderr=True, soft_wrap=True)


def init():
    try:
        logging.basicConfig(level=get_settings().log_level)
    except ValidationError:
        err_console.print("invalid settings. environment variables might not be set.  Run `hk-cli validate-settings`")
        logging.basicConfig(level=logging.INFO)


app = typer.Typer(callback=init, no_args_is_help=True)

ConfigOpt = Annotated[Path | None, typer.Option("--config", help="flat key = value run configuration")]
P1Opt = Annotated[float | None, typer.Option("--p1", help="power of user 1")]
P2Opt = Annotated[float | None, typer.Option("--p2", help="power of user 2")]
AOpt = Annotated[float | None, typer.Option("--a", help="cross gain from user 2 into receiver 1")]
BOpt = Annotated[float | None, typer.Option("--b", help="cross gain from user 1 into receiver 2")]
N1Opt = Annotated[float | None, typer.Option("--n1", help="noise variance at receiver 1")]
N2Opt = Annotated[float | None, typer.Option("--n2", help="noise variance at receiver 2")]
GridOpt = Annotated[int | None, typer.Option("--grid", help="split grid size per user")]
MuOpt = Annotated[str | None, typer.Option("--mu", help="comma separated weights, inf allowed")]
FormatOpt = Annotated[OutputFormat | None, typer.Option("--format", help="csv or json")]
OutOpt = Annotated[Path | None, typer.Option("--out", help="output file, stdout when omitted")]
TolGeomOpt = Annotated[float | None, typer.Option("--tol-geom", help="geometric tolerance")]
TolClaimOpt = Annotated[float | None, typer.Option("--tol-claim", help="claim verdict tolerance")]


def _config_error(message: str) -> typer.Exit:
    err_console.print(f"invalid config: {message}", markup=False)
    return typer.Exit(code=EXIT_CONFIG)


def _io_error(exc: OSError) -> typer.Exit:
    err_console.print(f"io error: {exc}", markup=False)
    return typer.Exit(code=EXIT_IO)


def load_config(config: Path | None, **flags) -> RunConfig:
    """
    Build the run configuration, mapping failures to exit codes 2 (invalid
    values) and 3 (unreadable config file).
    """
    try:
        return load_run_config(config, flags)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(map(str, x['loc'])) or 'config'}: {x['msg']}" for x in e.errors())
        raise _config_error(problems) from e
    except DomainError as e:
        raise _config_error(str(e)) from e
    except OSError as e:
        raise _io_error(e) from e


def _emit(cfg: RunConfig, frame, key: str, summary: dict | None = None) -> None:
    text = render(frame, cfg, key, summary)
    try:
        write_output(text, cfg.out)
    except OSError as e:
        raise _io_error(e) from e
    if cfg.out is not None:
        logger.info(f"wrote {len(frame)} {key} to {cfg.out}")


@app.command("region")
def region(
    config: ConfigOpt = None,
    p1: P1Opt = None,
    p2: P2Opt = None,
    a: AOpt = None,
    b: BOpt = None,
    n1: N1Opt = None,
    n2: N2Opt = None,
    grid: GridOpt = None,
    fmt: FormatOpt = None,
    out: OutOpt = None,
    tol_geom: TolGeomOpt = None,
    tol_claim: TolClaimOpt = None,
):
    """
    vertices of every per-split region (raw union) and of their convex hull
    """
    cfg = load_config(
        config,
        p1=p1,
        p2=p2,
        a=a,
        b=b,
        n1=n1,
        n2=n2,
        grid_k=grid,
        format=fmt,
        out=out,
        tol_geom=tol_geom,
        tol_claim=tol_claim,
    )
    try:
        sweep = region_sweep(cfg.channel, cfg.grid_k, cfg.tol_geom)
    except DomainError as e:
        raise _config_error(str(e)) from e
    _emit(cfg, region_frame(sweep), "vertices")


@app.command("boundary")
def boundary(
    config: ConfigOpt = None,
    p1: P1Opt = None,
    p2: P2Opt = None,
    a: AOpt = None,
    b: BOpt = None,
    n1: N1Opt = None,
    n2: N2Opt = None,
    grid: GridOpt = None,
    mu: MuOpt = None,
    fmt: FormatOpt = None,
    out: OutOpt = None,
    tol_geom: TolGeomOpt = None,
    tol_claim: TolClaimOpt = None,
):
    """
    maximize r1 + mu r2 over the split grid for each weight, sorted by mu
    """
    cfg = load_config(
        config,
        p1=p1,
        p2=p2,
        a=a,
        b=b,
        n1=n1,
        n2=n2,
        grid_k=grid,
        mu=mu,
        format=fmt,
        out=out,
        tol_geom=tol_geom,
        tol_claim=tol_claim,
    )
    try:
        trace = trace_boundary(cfg.channel, cfg.mu, cfg.grid_k, cfg.tol_geom)
    except DomainError as e:
        raise _config_error(str(e)) from e
    _emit(cfg, boundary_frame(trace), "rows")


@app.command("verify")
def verify(
    config: ConfigOpt = None,
    p1: P1Opt = None,
    p2: P2Opt = None,
    a: AOpt = None,
    b: BOpt = None,
    n1: N1Opt = None,
    n2: N2Opt = None,
    grid: GridOpt = None,
    fmt: FormatOpt = None,
    out: OutOpt = None,
    tol_geom: TolGeomOpt = None,
    tol_claim: TolClaimOpt = None,
):
    """
    check the MAC geometry claims at every split; failing claims are findings
    and still exit 0
    """
    cfg = load_config(
        config,
        p1=p1,
        p2=p2,
        a=a,
        b=b,
        n1=n1,
        n2=n2,
        grid_k=grid,
        format=fmt,
        out=out,
        tol_geom=tol_geom,
        tol_claim=tol_claim,
    )
    try:
        results = verify_grid(cfg.channel, cfg.grid_k, cfg.tol_geom, cfg.tol_claim)
    except DomainError as e:
        raise _config_error(str(e)) from e
    summary = summarize(results)
    _emit(cfg, claims_frame(results), "rows", summary)
    err_console.print("summary: " + " ".join(f"{k}={v}" for k, v in summary.items()), markup=False)


@app.command("mac-geometry")
def mac_geometry(
    config: ConfigOpt = None,
    p1: P1Opt = None,
    p2: P2Opt = None,
    a: AOpt = None,
    b: BOpt = None,
    n1: N1Opt = None,
    n2: N2Opt = None,
    lambda1: Annotated[float | None, typer.Option("--lambda1", help="private fraction of user 1")] = None,
    lambda2: Annotated[float | None, typer.Option("--lambda2", help="private fraction of user 2")] = None,
    fmt: FormatOpt = None,
    out: OutOpt = None,
    tol_geom: TolGeomOpt = None,
    tol_claim: TolClaimOpt = None,
):
    """
    dump MAC1/MAC2 half-spaces and mac1/mac2 polygons for one split
    """
    cfg = load_config(
        config,
        p1=p1,
        p2=p2,
        a=a,
        b=b,
        n1=n1,
        n2=n2,
        lambda1=lambda1,
        lambda2=lambda2,
        format=fmt,
        out=out,
        tol_geom=tol_geom,
        tol_claim=tol_claim,
    )
    try:
        split = PowerSplit.from_fractions(cfg.channel, cfg.lambda1, cfg.lambda2)
        macs = build_mac_projections(build_instance(cfg.channel, split), cfg.tol_geom)
    except DomainError as e:
        raise _config_error(str(e)) from e
    _emit(cfg, mac_frame(macs), "rows")


@app.command("validate-settings")
def validate_settings(dump: bool = True):
    """
    dump application settings
    """
    try:
        settings = get_settings()
    except ValidationError as e:
        print("invalid settings. check HKGIC_ environment variables")
        for x in e.errors():
            print(x)
        sys.exit(1)
    if dump:
        print(settings)


EXAMPLE_CONFIG = """\
# hk-cli run configuration: key = value, flags on the command line win
p1 = 6
p2 = 6
a = 0.25
b = 0.25
n1 = 1
n2 = 1
grid = 21
mu = 0,0.5,1,2,inf
format = csv
tol_geom = 1e-9
tol_claim = 1e-6
"""


@app.command("init-config")
def init_config(path: Path = Path("hk.cfg")):
    """
    write an example run configuration
    """
    if path.exists():
        print(f"{path} already exists. remove or choose a different path.")
        raise typer.Exit(code=1)
    try:
        path.write_text(EXAMPLE_CONFIG, encoding="utf-8")
    except OSError as e:
        raise _io_error(e) from e
    print(f"wrote {path}")


if __name__ == "__main__":
    app()
