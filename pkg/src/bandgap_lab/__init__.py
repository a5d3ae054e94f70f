"""Numerical companion for eigenvalue bounds of non-selfadjoint perturbations
of finite-band Jacobi operators."""

from .bands import (
    BandSet,
    ExponentParams,
    SumReport,
    WeightedPointSet,
    dist_to_bands,
    dist_to_edges,
    exponents,
    single_band_equiv_ratio,
    single_band_ratio_scan,
    sum_corollary,
    sum_general,
    sum_lt_high,
    sum_lt_low,
)
from .determinant import PerturbationDeterminant, det_regularized, detg, reg_order, zeros_near
from .disk import DiskFunctionSpec, GrowthCertificate, JoukowskiMap, joukowski_ratios, verify_disk_theorem
from .errors import (
    BandgapLabError,
    ContourError,
    DegenerateGapError,
    DomainError,
    InputError,
    NearSingularError,
    NumericalFailure,
    SizeError,
)
from .jacobi import FiniteBandOperator, PeriodicJacobiSpec, band_edges, discriminant, truncate
from .linalg import eig, svd_values
from .perturbations import PerturbationSpec, build, schatten_norm
from .spectrum import DiscreteSpectrum, discrete_spectrum, lt_family, lt_report

__version__ = "0.1.0"

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and getattr(obj, "__module__", "").startswith("bandgap_lab")
)
