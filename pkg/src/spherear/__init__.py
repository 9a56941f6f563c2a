"""Spherical autoregressive models for time series on spheres and Hilbert spheres."""
__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateAutocovarianceError,
    DimensionMismatchError,
    FormatError,
    GeometryError,
    ModelVersionError,
    ProjectionError,
    SphereARError,
    StationarityError,
)
from .hilbert import (
    AmbientVector,
    SpherePoint,
    frechet_mean,
    geodesic_distance,
    geodesic_point,
    inner,
)
from .skew import (
    SkewAtom,
    SkewOperator,
    apply,
    compress,
    expm_apply,
    hs_inner,
    hs_norm,
    lincomb,
    rotate,
    spherical_log,
)
from .sar import (
    Projection,
    SarModel,
    Variant,
    fit,
    forecast,
    predict_operator,
    predict_point,
    project1,
    project2,
    yule_walker,
)
from .transforms import (
    Composition,
    DensityGrid,
    Grid,
    GridAxis,
    estimate_density,
    fisher_rao_distance,
    fpsr,
    fpsr_inverse,
    psr,
    psr_inverse,
)
from .simulate import (
    InnovationSpec,
    SimulationRun,
    monte_carlo_lambda_clt,
    simulate_sar,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "DegenerateAutocovarianceError",
    "DimensionMismatchError",
    "FormatError",
    "GeometryError",
    "ModelVersionError",
    "ProjectionError",
    "SphereARError",
    "StationarityError",
    "AmbientVector",
    "SpherePoint",
    "frechet_mean",
    "geodesic_distance",
    "geodesic_point",
    "inner",
    "SkewAtom",
    "SkewOperator",
    "apply",
    "compress",
    "expm_apply",
    "hs_inner",
    "hs_norm",
    "lincomb",
    "rotate",
    "spherical_log",
    "Projection",
    "SarModel",
    "Variant",
    "fit",
    "forecast",
    "predict_operator",
    "predict_point",
    "project1",
    "project2",
    "yule_walker",
    "Composition",
    "DensityGrid",
    "Grid",
    "GridAxis",
    "estimate_density",
    "fisher_rao_distance",
    "fpsr",
    "fpsr_inverse",
    "psr",
    "psr_inverse",
    "InnovationSpec",
    "SimulationRun",
    "monte_carlo_lambda_clt",
    "simulate_sar",
]
