"""Finite-order normal form on a Galerkin truncation."""

from .bands import (
    BandDecomposition,
    ModeTruncation,
    band_counts,
    build_bands,
    classify_monomial,
    decompose,
    e_norm,
    e_norm_poly,
    is_coupling,
)
from .homological import random_band_sparse, small_divisor_bound_check, solve_homological
from .lie import (
    NormalFormConfig,
    NormalFormResult,
    compare_k_k0,
    energy_series,
    lie_series,
    lie_transform_step,
    majorant_norm,
    nonlinear_poly,
    normal_form,
    normal_form_from_spectral,
    substitute_linear,
    truncation_from_spectral,
)
from .poly import CompiledPoly, Poly, gauge_monomials, multi_indices, number_operator, poisson_bracket

__all__ = [
    "BandDecomposition",
    "CompiledPoly",
    "ModeTruncation",
    "NormalFormConfig",
    "NormalFormResult",
    "Poly",
    "band_counts",
    "build_bands",
    "classify_monomial",
    "compare_k_k0",
    "decompose",
    "e_norm",
    "e_norm_poly",
    "energy_series",
    "gauge_monomials",
    "is_coupling",
    "lie_series",
    "lie_transform_step",
    "majorant_norm",
    "multi_indices",
    "nonlinear_poly",
    "normal_form",
    "normal_form_from_spectral",
    "number_operator",
    "poisson_bracket",
    "random_band_sparse",
    "small_divisor_bound_check",
    "solve_homological",
    "substitute_linear",
    "truncation_from_spectral",
]
