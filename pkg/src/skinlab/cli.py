"""Command-line front door.

    skinlab {spectrum,wn,afunc,dds,scatter,report} CONFIG.json [--out DIR]

Every command writes its artifacts once, atomically, into the output
directory; rerunning with the same config reproduces them byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import greens, lattice, spectra
from .config import ConfigError, RunConfig, load_config
from .io import dumps_document, fmt, graymap, write_atomic

COMMANDS = ("spectrum", "wn", "afunc", "dds", "scatter", "report")


def _params_doc(cfg: RunConfig) -> dict:
    p = cfg.model
    return {"t": p.t, "m": p.m, "gamma": p.gamma, "eta": p.eta}


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _label(E: float) -> str:
    return f"E{fmt(E)}"


def _diagonalize(cfg: RunConfig, shape: str | None = None, want_vectors=True):
    geo = lattice.build_geometry(shape or cfg.geometry.shape, cfg.geometry.L)
    H = lattice.assemble_obc(cfg.model, geo)
    return geo, spectra.obc_spectrum(H, want_vectors=want_vectors, max_dim=cfg.spectrum.max_dim)


def cmd_spectrum(cfg: RunConfig, out: Path) -> list[Path]:
    geo, spec = _diagonalize(cfg, want_vectors=False)
    rows = [[n, fmt(e.real), fmt(e.imag), fmt(r)] for n, (e, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]
    written = [write_atomic(out / "obc_spectrum.csv", _csv(["index", "re", "im", "residual"], rows))]
    summary = {
        "command": "spectrum",
        "parameters": _params_doc(cfg),
        "geometry": {"shape": geo.shape, "L": geo.L, "sites": geo.n_sites},
        "obc": {"states": len(spec), "max_residual": float(spec.residuals.max())},
    }
    if cfg.spectrum.include_pbc:
        cloud = spectra.pbc_cloud(cfg.model, cfg.grids.pbc_grid_n)
        pbc_rows = []
        for iy, ky in enumerate(cloud.ky):
            for ix, kx in enumerate(cloud.kx):
                for band, e in enumerate(cloud.energies[iy, ix]):
                    pbc_rows.append([fmt(kx), fmt(ky), band, fmt(e.real), fmt(e.imag)])
        written.append(write_atomic(out / "pbc_cloud.csv", _csv(["kx", "ky", "band", "re", "im"], pbc_rows)))
        summary["pbc"] = {
            "grid_n": cfg.grids.pbc_grid_n,
            "raster_cell": cfg.grids.raster_cell,
            "spectral_area": spectra.spectral_area(cloud, cfg.grids.raster_cell),
        }
    written.append(write_atomic(out / "spectrum_summary.json", dumps_document(summary)))
    return written


def cmd_wn(cfg: RunConfig, out: Path) -> list[Path]:
    geo, spec = _diagonalize(cfg)
    W = spectra.w_distribution(spec, geo)
    report = spectra.gdse_report(W, threshold=cfg.thresholds.skin_ratio)
    return [
        write_atomic(out / "w_distribution.csv", lattice.geometry_csv(geo, {"W": W.values})),
        write_atomic(out / "gdse_report.json", dumps_document(report.as_document(cfg.model))),
    ]


def cmd_afunc(cfg: RunConfig, out: Path) -> list[Path]:
    written = []
    for E in cfg.afunc.energies:
        grid = greens.afunc_grid(cfg.model, E, cfg.grids.afunc_grid_n)
        rows = [
            [fmt(kx), fmt(ky), fmt(grid.values[iy, ix])]
            for iy, ky in enumerate(grid.ky) for ix, kx in enumerate(grid.kx)
        ]
        written.append(write_atomic(out / f"afunc_{_label(E)}.csv", _csv(["kx", "ky", "A"], rows)))
        written.append(write_atomic(out / f"afunc_{_label(E)}.pgm", graymap(grid.values)))
    return written


def _contours_doc(E, contours) -> dict:
    return {
        "E": E,
        "contours": [
            {
                "band": c.band,
                "vertices": [
                    [kx, ky, im, a] for kx, ky, im, a in zip(c.kx, c.ky, c.lifetimes, c.dos)
                ],
                "near_exceptional": int(np.count_nonzero(c.near_exceptional)),
            }
            for c in contours
        ],
    }


def _dds(cfg: RunConfig, E: float):
    return greens.dds_metric(cfg.model, E, cfg.grids.efc_grid_n, fraction=cfg.thresholds.dds_fraction)


def cmd_dds(cfg: RunConfig, out: Path) -> list[Path]:
    reports = [_dds(cfg, E) for E in cfg.dds.energies]
    written = [
        write_atomic(out / f"contours_{_label(r.E)}.json", dumps_document(_contours_doc(r.E, r.contours)))
        for r in reports
    ]
    doc = {
        "command": "dds",
        "parameters": _params_doc(cfg),
        "grid_n": cfg.grids.efc_grid_n,
        "reports": [r.as_document() for r in reports],
    }
    written.append(write_atomic(out / "dds_report.json", dumps_document(doc)))
    return written


def cmd_scatter(cfg: RunConfig, out: Path) -> list[Path]:
    sc = cfg.scatter
    contours = greens.extract_efc(cfg.model, sc.E, cfg.grids.efc_grid_n)
    reports = [
        greens.scattering_channels(cfg.model, sc.E, sc.k_i, edge, cfg.grids.efc_grid_n,
                                   open_fraction=cfg.thresholds.open_fraction, contours=contours)
        for edge in sc.edges
    ]
    doc = {
        "command": "scatter",
        "parameters": _params_doc(cfg),
        "grid_n": cfg.grids.efc_grid_n,
        "channels": [r.as_document() for r in reports],
    }
    return [write_atomic(out / "channel_report.json", dumps_document(doc))]


def cmd_report(cfg: RunConfig, out: Path) -> list[Path]:
    rc = cfg.report
    threshold = cfg.thresholds.skin_ratio
    tri_geo, tri_spec = _diagonalize(cfg, "triangle")
    sq_geo, sq_spec = _diagonalize(cfg, "square")
    table, details = [], []
    for E in rc.energies:
        dds = _dds(cfg, E)
        window = (E - rc.window_half_width, E + rc.window_half_width)
        try:
            W = spectra.w_distribution(tri_spec, tri_geo, energy_window=window)
            gdse = spectra.gdse_report(W, threshold=threshold)
            ratio = gdse.ratios["edge_oblique"]
            verdict = gdse.verdicts["edge_oblique"]
            states = W.n_states
        except ValueError:
            ratio, verdict, states = 0.0, "no-states", 0
        table.append({"E": E, "dds_verdict": dds.verdict, "triangle_oblique_verdict": verdict})
        details.append({"E": E, "dds": dds.as_document(), "window": list(window),
                        "window_states": states, "triangle_oblique_ratio": ratio})
    full = {
        geo.shape: spectra.gdse_report(spectra.w_distribution(spec, geo), threshold=threshold).as_document()
        for geo, spec in ((sq_geo, sq_spec), (tri_geo, tri_spec))
    }
    doc = {
        "command": "report",
        "parameters": _params_doc(cfg),
        "L": cfg.geometry.L,
        "efc_grid_n": cfg.grids.efc_grid_n,
        "window_half_width": rc.window_half_width,
        "skin_threshold": threshold,
        "table": table,
        "details": details,
        "full_spectrum_gdse": full,
    }
    rows = [[fmt(r["E"]), str(r["dds_verdict"]).lower(), r["triangle_oblique_verdict"]] for r in table]
    return [
        write_atomic(out / "report_table.csv", _csv(["E", "dds_verdict", "triangle_oblique_verdict"], rows)),
        write_atomic(out / "report.json", dumps_document(doc)),
    ]


HANDLERS = {
    "spectrum": cmd_spectrum,
    "wn": cmd_wn,
    "afunc": cmd_afunc,
    "dds": cmd_dds,
    "scatter": cmd_scatter,
    "report": cmd_report,
}


def run(command: str, cfg: RunConfig, out: Path | str | None = None) -> list[Path]:
    if command not in HANDLERS:
        raise ValueError(f"unknown command {command!r}; expected one of {COMMANDS}")
    target = Path(out if out is not None else cfg.output_dir)
    return HANDLERS[command](cfg, target)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="skinlab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, default=None, help="override output_dir from the config")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        written = run(args.command, cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except spectra.CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (lattice.GeometryError, greens.OffContourError, spectra.SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
