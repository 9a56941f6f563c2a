"""Command-line front end: fit, predict, simulate, validate and plot-data.

Exit codes: 0 ok, 2 input error, 3 degenerate fit, 4 model-version mismatch,
5 stationarity refusal.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    Series,
    read_series,
    write_compositions,
    write_density_series,
    write_json,
)
from .errors import (
    DegenerateAutocovarianceError,
    FormatError,
    ModelVersionError,
    SphereARError,
    StationarityError,
)
from .hilbert import SpherePoint, geodesic_distance
from .sar import (
    Projection,
    SarModel,
    Variant,
    default_projection,
    fit,
    forecast,
)
from .simulate import (
    InnovationSpec,
    SimulationRun,
    monte_carlo_lambda_clt,
    polynomial_frame,
    simulate_sar,
)
from .transforms import (
    Composition,
    DensityGrid,
    Grid,
    fpsr,
    fpsr_inverse,
    psr,
    psr_inverse,
    spherical_coordinates,
    ternary_coordinates,
)

log = logging.getLogger("spherear")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_VERSION = 4
EXIT_STATIONARITY = 5


def _alphas(text: str) -> np.ndarray:
    try:
        return np.array([float(a) for a in text.split(",") if a.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alphas {text!r}; expected comma-separated numbers") from None


def _grid(text: str) -> Grid:
    try:
        return Grid.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _projection(args, variant: Variant) -> Projection:
    return default_projection(variant) if args.projection is None else Projection(args.projection)


def _load_series(args) -> Series:
    return read_series(args.input, args.format, grid=args.grid, bandwidth_scale=args.bandwidth_scale)


def _back_transform(series_kind: str, point: SpherePoint, grid: Grid | None, kappa: float = 1.0) -> dict:
    if np.any(point.values < -1e-9):
        return {"note": "prediction leaves the nonnegative orthant; rerun with a projection to back-transform"}
    if series_kind == "composition":
        return {"composition": psr_inverse(point, kappa).parts.tolist()}
    return {"density": fpsr_inverse(point, grid).to_dict()}


# --------------------------------------------------------------------------
# Subcommands


def cmd_fit(args) -> int:
    series = _load_series(args)
    variant = Variant(args.variant)
    projection = _projection(args, variant)
    holdout = args.holdout
    if holdout >= len(series):
        raise FormatError(f"holdout {holdout} leaves no data to fit", args.input)
    train = series.head(len(series) - holdout)
    model = fit(train.points, args.order, variant, fitted=True, projection=projection)
    model.metadata = {
        "kind": series.kind,
        "labels": series.labels,
        "grid": series.grid.to_dict() if series.grid is not None else None,
        "times": [str(t) for t in train.times],
        "projection": projection.value,
        "version": __version__,
    }
    diag = {
        "variant": variant.value,
        "p": model.p,
        "alphas": model.alphas.tolist(),
        "lags": model.acov.lags.tolist(),
        "stationarity": model.stationarity.to_dict(),
        "residual_norms": model.residual_norms.tolist(),
        "fit_distances": [
            {"time": str(series.times[i]), "distance": float(d)} for i, d in model.fit_distances
        ],
        "distance": "fisher-rao" if series.kind == "density" else "geodesic",
    }
    if args.candidate_orders:
        diag["order_candidates"] = _order_candidates(train.points, args.candidate_orders, variant)
    if holdout:
        fc = forecast(model, projection)
        target = series.points[len(train)]
        diag["holdout"] = {
            "time": str(series.times[len(train)]),
            "prediction_distance": geodesic_distance(fc.point, target),
            "carry_forward_distance": geodesic_distance(train.points[-1], target),
            "projection_fired": fc.fired,
            "c1": fc.c1,
        }
    out = _out_dir(args)
    write_json(out / "model.json", model.to_dict())
    write_json(out / "diagnostics.json", diag)
    msg = f"fitted {variant.value.upper()}({model.p}): alphas={np.round(model.alphas, 6).tolist()}"
    if not model.stationarity.stationary:
        msg += " (not stationary)"
    print(msg)
    if holdout:
        h = diag["holdout"]
        print(f"holdout {h['time']}: prediction {h['prediction_distance']:.6f}, carry-forward {h['carry_forward_distance']:.6f}")
    return EXIT_OK


def _order_candidates(points, orders, variant: Variant) -> list:
    """In-sample residual hs-norms for each candidate order; orders that cannot be fitted are reported."""
    rows = []
    for p in orders:
        try:
            m = fit(points, p, variant)
        except (SphereARError, ValueError) as exc:
            rows.append({"p": p, "error": str(exc)})
            continue
        r = m.residual_norms
        rows.append({
            "p": p,
            "alphas": m.alphas.tolist(),
            "mean_residual_norm": float(r.mean()),
            "rms_residual_norm": float(np.sqrt(np.mean(r**2))),
            "stationary": bool(m.stationarity.stationary),
        })
    return rows


def _orders(text: str) -> list:
    try:
        orders = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad orders {text!r}; expected comma-separated integers") from None
    if not orders or min(orders) < 1:
        raise argparse.ArgumentTypeError("orders must be positive integers")
    return orders


def _read_model(path) -> SarModel:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read model: {exc.strerror}", path) from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc
    if not isinstance(data, dict):
        raise FormatError("model file must hold a JSON object", path)
    return SarModel.from_dict(data)


def cmd_predict(args) -> int:
    model = _read_model(args.model)
    projection = _projection(args, model.variant)
    fc = forecast(model, projection)
    meta = model.metadata or {}
    kind = meta.get("kind")
    grid = Grid.from_dict(meta["grid"]) if meta.get("grid") else None
    result = {
        "variant": model.variant.value,
        "projection": projection.value,
        "projection_fired": fc.fired,
        "c1": fc.c1,
        "point": fc.point.values.tolist(),
        "weights": fc.point.weights.tolist(),
    }
    if kind in ("composition", "density"):
        result.update(_back_transform(kind, fc.point, grid))
    out = _out_dir(args)
    write_json(out / "prediction.json", result)
    extra = f", c1={fc.c1:.6g}" if fc.c1 is not None else ""
    print(f"prediction written; projection {projection.value} fired={fc.fired}{extra}")
    return EXIT_OK


def _gaussian_base(grid: Grid) -> SpherePoint:
    C = grid.centers
    logf = np.zeros(C.shape[0])
    for j, a in enumerate(grid.axes):
        mid, sd = 0.5 * (a.min + a.max), (a.max - a.min) / 8.0
        logf += -0.5 * ((C[:, j] - mid) / sd) ** 2
    return fpsr(DensityGrid.normalized(grid, np.exp(logf)))


def cmd_simulate(args) -> int:
    variant = Variant(args.variant)
    if args.format == "composition":
        d = args.parts
        base = psr(Composition(np.full(d, 1.0 / d)))
        spec = InnovationSpec(dim=d, k=d, sigma=args.sigma, seed=args.seed)
        grid = None
    elif args.format == "density":
        grid = args.grid or Grid.parse("x:-4:4:40")
        base = _gaussian_base(grid)
        frame = polynomial_frame(base, grid.centers, degree=2)
        spec = InnovationSpec(
            dim=grid.size, k=frame.shape[0], sigma=args.sigma, seed=args.seed,
            weights=grid.cell_weights, basis=frame,
        )
    else:
        raise FormatError(f"simulate writes composition or density series, not {args.format!r}")
    run = SimulationRun(
        variant=variant, alphas=args.alphas, base=base, n=args.length,
        innovation=spec, burn_in=args.burn_in, seed=args.seed, force=args.force,
    )
    points = simulate_sar(run)
    out = _out_dir(args)
    times = list(range(len(points)))
    # Squaring |x| keeps every emitted observation a valid composition or density.
    if grid is None:
        comps = [Composition.closure(np.square(p.values)) for p in points]
        write_compositions(out / "series.csv", times, comps)
    else:
        dens = [DensityGrid.normalized(grid, np.square(p.values)) for p in points]
        write_density_series(out / "series.json", grid, times, dens)
    write_json(out / "manifest.json", {**run.manifest(), "format": args.format})
    print(f"simulated {len(points)} {variant.value.upper()} observations")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.replicates < 200:
        raise FormatError(f"validation needs at least 200 replicates, got {args.replicates}")
    report = monte_carlo_lambda_clt(
        args.alphas, n=args.length, replicates=args.replicates, k=args.k, sigma=args.sigma,
        p=args.order, seed=args.seed, workers=args.threads,
    )
    out = _out_dir(args)
    write_json(out / "report.json", report.to_dict())
    V = report.theoretical_V
    mask = np.abs(V) > 1e-3
    worst = float(report.rel_diff[mask].max()) if mask.any() else 0.0
    print(f"max relative deviation from V over entries with |V| > 1e-3: {worst:.4f}")
    return EXIT_OK


def cmd_plot_data(args) -> int:
    series = _load_series(args)
    out = _out_dir(args)
    written = []
    if series.kind == "composition":
        X = np.vstack([p.values for p in series.points])
        comps = X**2
        if X.shape[1] == 3:
            tern = ternary_coordinates(comps)
            lonlat = spherical_coordinates(X)
            with open(out / "ternary.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["time", "x", "y"])
                w.writerows([t, repr(float(a)), repr(float(b))] for t, (a, b) in zip(series.times, tern))
            with open(out / "lonlat.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["time", "lon", "lat"])
                w.writerows([t, repr(float(a)), repr(float(b))] for t, (a, b) in zip(series.times, lonlat))
            written += ["ternary.csv", "lonlat.csv"]
        else:
            log.warning("ternary and longitude/latitude views need exactly 3 parts; skipping")
        with open(out / "compositions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", *(series.labels or [f"part{i + 1}" for i in range(X.shape[1])])])
            w.writerows([t, *(repr(float(v)) for v in row)] for t, row in zip(series.times, comps))
        written.append("compositions.csv")
    else:
        grid = series.grid
        C = grid.centers
        names = ["x", "y"][: C.shape[1]]
        with open(out / "grid_values.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", *names, "density"])
            for t, p in zip(series.times, series.points):
                f = np.square(p.values)
                for c, v in zip(C, f):
                    w.writerow([t, *(repr(float(x)) for x in c), repr(float(v))])
        written.append("grid_values.csv")
    print("wrote " + ", ".join(written))
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spherear", description="Autoregressive models for spherical time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p):
        p.add_argument("--input", required=True)
        p.add_argument("--format", choices=["composition", "samples", "density"], default="composition")
        p.add_argument("--grid", type=_grid, default=None, help='"AX:min:max:cells[,AX2:min:max:cells]"')
        p.add_argument("--bandwidth-scale", type=float, default=0.2)

    def model_flags(p, order=True):
        p.add_argument("--variant", choices=[v.value for v in Variant], default="sar")
        if order:
            p.add_argument("--order", type=_positive_int, default=1)
        p.add_argument("--projection", choices=[v.value for v in Projection], default=None)

    p = sub.add_parser("fit", help="fit a SAR/DSAR model")
    data_flags(p)
    model_flags(p)
    p.add_argument("--holdout", type=int, default=0, help="hold out the last H observations and score the forecast")
    p.add_argument("--candidate-orders", type=_orders, default=None,
                   help="comma-separated orders whose in-sample residual norms are reported in diagnostics.json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="one-step-ahead prediction from a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--projection", choices=[v.value for v in Projection], default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="simulate a synthetic series")
    model_flags(p, order=False)
    p.add_argument("--alphas", type=_alphas, required=True)
    p.add_argument("--length", type=_positive_int, default=100)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--format", choices=["composition", "density"], default="composition")
    p.add_argument("--parts", type=int, default=3)
    p.add_argument("--grid", type=_grid, default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--force", action="store_true", help="simulate even when the alphas are not stationary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="Monte Carlo check of the autocovariance limit law")
    p.add_argument("--alphas", type=_alphas, default=np.array([0.5]))
    p.add_argument("--order", type=_positive_int, default=None)
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--length", type=_positive_int, default=2000)
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="defaults to SPHEREAR_THREADS or 1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot-data", help="emit plot-ready CSV files")
    data_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ModelVersionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except StationarityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATIONARITY
    except DegenerateAutocovarianceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SphereARError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
