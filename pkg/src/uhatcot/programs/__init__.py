"""Concrete UHAT programs. Importing this package registers their MLPs."""

from .basic import (
    DOT, DOT_BY_DOT_CAP, DOT_OUT, EOS, HASH, SEP, and_head, dot_bitstring, dot_by_dot_cot,
    median_program_input, median_sorter, ordering_matrix, parity_dot_by_dot,
)
from .layout import Layout, one_hot_index
from .turing import (
    FIXTURES, LEFT, RIGHT, HeadUnderflow, SimResult, StepBoundExceeded, TmConfiguration,
    TuringMachine, halting_tm, parity_tm, parse_step_label, parse_tm_spec, step_bound,
    step_label, tm_compile, tm_input, tm_simulate, unary_increment_tm, write,
)

__all__ = [name for name in dir() if not name.startswith("_")]
