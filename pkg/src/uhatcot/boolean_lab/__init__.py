"""Sensitivity, Fourier correlation and restriction experiments on Boolean functions."""

from .fourier import (
    FourierQuery, fourier_correlation, fourier_exact, fourier_scan, max_abs_by_t, random_query,
)
from .functions import (
    BooleanFunction, all_inputs, and_, by_name, constant, default_median_bits, from_callable,
    majority, median_last_bit_fn, mult_digit_fn, or_, parity,
)
from .restrictions import (
    STAR, Restriction, SearchResult, is_constant_on, restrict_apply, restriction_search,
)
from .sensitivity import (
    CapExceeded, Estimate, avg_sensitivity_exact, avg_sensitivity_sampled, linear_fit,
    median_lastdigit_sensitivity, mult_digit_sensitivity, sensitivity, total_sensitivity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
