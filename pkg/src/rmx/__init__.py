"""Exact small-scale checks of Reed-Muller bit-error bounds over symmetric channels."""

__version__ = "0.1.0"

from .rm_code import Code, LinearCode, build_code, nesting_sets, puncture, rate  # noqa: E402
from .channels import (SymmetricChannel, InterpolatedFamily, ConstantFamily, make_bec, make_bsc,  # noqa: E402
                       make_biawgn, interpolate, bec_family)
from .inference import bit_statistics, moment_norm, extrinsic_mmse, ber_of_bit  # noqa: E402
from .gexit import gexit_series, gexit_curve, mmse_curve, area_integral  # noqa: E402

__all__ = ["Code", "LinearCode", "build_code", "nesting_sets", "puncture", "rate", "SymmetricChannel",
           "InterpolatedFamily", "ConstantFamily", "make_bec", "make_bsc", "make_biawgn", "interpolate",
           "bec_family", "bit_statistics", "moment_norm", "extrinsic_mmse", "ber_of_bit", "gexit_series",
           "gexit_curve", "mmse_curve", "area_integral", "__version__"]
