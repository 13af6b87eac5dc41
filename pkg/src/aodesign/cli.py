"""Command-line front end: a thin client of the design service.

Commands build JSON requests from the run config, post them to the service
(in-process by default, or a remote instance via ``--server``), and write
CSV/PNG artifacts locally.  Exit codes: 0 success, 1 computation infeasible,
2 usage or config error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import (ConfigError, RunConfig, default_run_config,
                     load_run_config)

EXIT_INFEASIBLE = 1
EXIT_USAGE = 2

_CSV_FLOAT = "{:.9g}"


class ServiceClient:
    """HTTP client for the service app; in-process unless a server is given."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx
            self._client = httpx.Client(base_url=server, timeout=3600.0)
        else:
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient
            from .service.app import app
            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code == 400:
            raise click.UsageError(resp.json().get("detail", "bad request"))
        if resp.status_code == 422:
            detail = resp.json().get("detail", "infeasible")
            raise InfeasibleError(str(detail))
        resp.raise_for_status()
        return resp.json()


class InfeasibleError(click.ClickException):
    exit_code = EXIT_INFEASIBLE


def _fmt(value) -> str:
    if isinstance(value, float):
        return _CSV_FLOAT.format(value)
    return str(value)


def write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in fieldnames) + "\n")


def _load_config(config_path: str | None) -> RunConfig:
    try:
        if config_path is None:
            return default_run_config()
        return load_run_config(config_path)
    except (ConfigError, OSError) as err:
        raise click.UsageError(str(err))


def _material_payload(cfg: RunConfig) -> dict:
    from .config import dump_material, parse_kv_text
    pairs = parse_kv_text(dump_material(cfg.material))
    name = pairs.pop("material.name")
    pairs.pop("schema_version", None)
    return {"name": name if name == "TeO2" else "custom",
            "overrides": {k: float(v) for k, v in pairs.items()}}


def _geometry_payload(cfg: RunConfig) -> dict:
    g = cfg.geometry
    return {"optical_rotation_deg": g.optical_rotation,
            "acoustic_rotation_deg": g.acoustic_rotation,
            "doppler_sign": g.doppler_sign,
            "aperture_mm": g.aperture_length}


def _transducer_payload(cfg: RunConfig) -> dict:
    t = cfg.transducer
    return {"shape": t.shape, "length_mm": t.length, "height_mm": t.height,
            "truncation": t.truncation}


def _optics_payload(cfg: RunConfig) -> dict:
    return {"beam_diameter_mm": cfg.beam_diameter_mm,
            "fourier_focal_mm": cfg.fourier_focal_mm,
            "collimator_focal_mm": cfg.collimator_focal_mm,
            "objective_focal_mm": cfg.objective_focal_mm,
            "trap_pitch_um": cfg.trap_pitch_um}


def _parse_grid_option(grid: str | None, cfg: RunConfig):
    """--grid AxB resamples the configured ranges to A x B points; 1x1 pins
    the scan to the configured geometry point."""
    if grid is None:
        return list(cfg.fom_phi_o), list(cfg.fom_phi_a), False
    try:
        nx_s, ny_s = grid.lower().split("x")
        nx, ny = int(nx_s), int(ny_s)
        if nx < 1 or ny < 1:
            raise ValueError
    except ValueError:
        raise click.UsageError(f"--grid expects 'NxM', got {grid!r}")
    if nx == 1 and ny == 1:
        return ([cfg.geometry.optical_rotation],
                [cfg.geometry.acoustic_rotation], True)

    def resample(values, n):
        lo, hi = min(values), max(values)
        if n == 1:
            return [0.5 * (lo + hi)]
        return [lo + i * (hi - lo) / (n - 1) for i in range(n)]

    return resample(cfg.fom_phi_o, nx), resample(cfg.fom_phi_a, ny), False


common_options = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="run config file (key = value text)"),
    click.option("--out", "out_dir", type=click.Path(file_okay=False),
                 default=".", help="output directory"),
    click.option("--format", "formats", type=click.Choice(["csv", "png"]),
                 multiple=True, default=("csv",),
                 help="artifact formats (repeatable)"),
    click.option("--server", default=None,
                 help="remote service URL (default: run in-process)"),
]


def add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@click.group()
def main():
    """Anisotropic acousto-optic deflector design toolkit."""


@main.command()
@add_options(common_options)
def material(config_path, out_dir, formats, server):
    """Slowness-surface and walk-off sweeps plus activity curves."""
    cfg = _load_config(config_path)
    if not cfg.sweep_theta or not cfg.sweep_phi:
        raise click.UsageError("empty sweep grid")
    client = ServiceClient(server)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweep = client.post("/material/sweep", {
        "material": _material_payload(cfg),
        "theta_deg": list(cfg.sweep_theta),
        "phi_deg": list(cfg.sweep_phi)})
    rows = sweep["rows"]
    if "csv" in formats:
        write_csv(out / "slowness_sweep.csv",
                  ["theta_deg", "phi_deg", "branch", "velocity_mm_per_us",
                   "walkoff_deg"], rows)
    curves = client.post("/optics/curves", {
        "material": _material_payload(cfg),
        "wavelength_nm": cfg.wavelength_red_nm,
        "theta_deg": [0.1 * i for i in range(0, 151)]})
    if "csv" in formats:
        write_csv(out / "activity_curves.csv",
                  ["theta_deg", "xi", "dn_l", "dn_c", "n_o_act_minus_n_o",
                   "n_e_act_minus_n_e"], curves["rows"])
    if "png" in formats:
        from . import plots
        plots.save_sweep_png(out / "slowness_sweep.png", rows)
    click.echo(f"material artifacts written to {out}")


@main.command()
@add_options(common_options)
@click.option("--grid", default=None,
              help="scan grid 'NxM' over the configured ranges; 1x1 evaluates "
                   "only the configured geometry")
@click.option("--jobs", default=1, show_default=True,
              help="parallel workers for the scan")
@click.option("--band-criterion", type=click.Choice(["ripple", "3db"]),
              default="ripple", show_default=True)
def design(config_path, out_dir, formats, server, grid, jobs, band_criterion):
    """Full pipeline: FOM scan, optimum geometry, bandshapes, prism, cascade."""
    cfg = _load_config(config_path)
    phi_o, phi_a, skip_scan = _parse_grid_option(grid, cfg)
    client = ServiceClient(server)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "material": _material_payload(cfg),
        "geometry": _geometry_payload(cfg),
        "transducer": _transducer_payload(cfg),
        "optics": _optics_payload(cfg),
        "wavelength_red_nm": cfg.wavelength_red_nm,
        "wavelength_blue_nm": cfg.wavelength_blue_nm,
        "ripple_red_db": cfg.ripple_red_db,
        "ripple_blue_db": cfg.ripple_blue_db,
        "hf_limit_mhz": cfg.hf_limit_mhz,
        "band_criterion": band_criterion,
        "phi_o_deg": phi_o, "phi_a_deg": phi_a,
        "skip_scan": skip_scan, "jobs": jobs,
    }
    result = client.post("/design/run", payload)
    (out / "report.txt").write_text(result["report_text"], encoding="utf-8")
    if "csv" in formats:
        write_csv(out / "fom_matrix.csv",
                  ["phi_o_deg", "phi_a_deg", "bw_red", "bw_blue",
                   "bw_over_octave", "volume_mm3", "fom", "reason"],
                  [{**c, "volume_mm3": c["volume_mm3"]}
                   for c in result["fom_cells"]])
        for color in ("red", "blue"):
            shape = result[f"bandshape_{color}"]
            write_csv(out / f"bandshape_{color}.csv", ["f_MHz", "eff_dB"],
                      [{"f_MHz": f, "eff_dB": e}
                       for f, e in zip(shape["f_mhz"], shape["eff_db"])])
    if "png" in formats:
        from . import plots
        plots.save_bandshapes_png(
            out / "bandshapes.png",
            [{"label": f"{result[f'bandshape_{c}']['wavelength_nm']:.0f} nm",
              "f_mhz": result[f"bandshape_{c}"]["f_mhz"],
              "eff_db": result[f"bandshape_{c}"]["eff_db"],
              "band": (result[f"bandshape_{c}"]["band_lo_mhz"],
                       result[f"bandshape_{c}"]["band_hi_mhz"])}
             for c in ("red", "blue")])
        plots.save_fom_heatmap_png(out / "fom_map.png", result["fom_cells"])
    click.echo(result["report_text"])
    click.echo(f"design artifacts written to {out}")


@main.command()
@add_options(common_options)
@click.option("--sites", default="10x10", show_default=True,
              help="trap array dimensions 'NxM'")
@click.option("--bandwidth", "bandwidth_mhz", type=float, default=None,
              help="cascaded usable bandwidth override (MHz)")
def address(config_path, out_dir, formats, server, sites, bandwidth_mhz):
    """Addressing-tone table for a trap array."""
    cfg = _load_config(config_path)
    try:
        nx_s, ny_s = sites.lower().split("x")
        nx, ny = int(nx_s), int(ny_s)
    except ValueError:
        raise click.UsageError(f"--sites expects 'NxM', got {sites!r}")
    client = ServiceClient(server)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "material": _material_payload(cfg),
        "optics": _optics_payload(cfg),
        "sites_x": nx, "sites_y": ny,
        "wavelength_red_nm": cfg.wavelength_red_nm,
        "wavelength_blue_nm": cfg.wavelength_blue_nm,
        "beam_diameter_mm": cfg.switch_beam_mm,
        "bandwidth_mhz": (bandwidth_mhz if bandwidth_mhz is not None
                          else cfg.cascade_bandwidth_mhz),
    }
    result = client.post("/cascade/address", payload)
    rows = [{"site_i": r["site_i"], "site_j": r["site_j"],
             "f_red_x_MHz": r["f_red_x_mhz"], "f_red_y_MHz": r["f_red_y_mhz"],
             "f_blue_x_MHz": r["f_blue_x_mhz"],
             "f_blue_y_MHz": r["f_blue_y_mhz"],
             "precomp_red_MHz": r["precomp_red_mhz"],
             "precomp_blue_MHz": r["precomp_blue_mhz"],
             "net_doppler_MHz": r["net_doppler_mhz"]}
            for r in result["rows"]]
    if "csv" in formats:
        write_csv(out / "addressing_table.csv",
                  ["site_i", "site_j", "f_red_x_MHz", "f_red_y_MHz",
                   "f_blue_x_MHz", "f_blue_y_MHz", "precomp_red_MHz",
                   "precomp_blue_MHz", "net_doppler_MHz"], rows)
    click.echo(f"addressing table for {nx}x{ny} sites written to {out}")


@main.command()
@add_options(common_options)
@click.option("--frequency", "f_mhz", type=float, default=150.0,
              show_default=True, help="acoustic drive frequency (MHz)")
@click.option("--distance", "distance_mm", type=float, default=None,
              help="propagation distance (default: twice the optical "
                   "aperture height)")
def transducer(config_path, out_dir, formats, server, f_mhz, distance_mm):
    """Acoustic near-field propagation dump for the configured transducer."""
    del server  # propagation runs locally; grids are too large for JSON
    cfg = _load_config(config_path)
    from . import materials as mats
    from . import transducer as xd
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mode = mats.slow_shear_mode(cfg.material, mats.AXIS_110)
    _, b_in, b_out = mats.walkoff_and_curvature(cfg.material, mats.AXIS_110)
    if distance_mm is None:
        distance_mm = 2.0 * cfg.transducer.height
    field = xd.propagate(cfg.transducer, mode.velocity, f_mhz, distance_mm,
                         steps=64, plane="height", b_curvature=b_out)
    xd.write_field_dump(field, out / "acoustic_field.bin")
    if "png" in formats:
        from . import plots
        import numpy as np
        plots.save_field_png(out / "acoustic_field.png", np.abs(field.grid),
                             field.transverse_mm, field.distances_mm)
    click.echo(f"acoustic field dump written to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the design service with uvicorn."""
    import uvicorn
    uvicorn.run("aodesign.service.app:app", host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
