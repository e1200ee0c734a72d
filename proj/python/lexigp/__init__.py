"""Genetic programming for symbolic regression with lexicase-family selection.

Thin wrapper over the compiled core. The heavy lifting (evolution loops,
selection, statistics) happens in C++; this package exposes the operations
needed to drive experiments and analyze results from Python.
"""

from ._core import (
    WORST_ERROR,
    Dataset,
    Expression,
    derive_seed,
    generations_for_budget,
    holm_adjust,
    load_csv,
    make_dataset,
    result_table_text,
    run_gp,
    select_parents,
    subset_size,
    wilcoxon_rank_sum,
)

__all__ = [
    "WORST_ERROR",
    "Dataset",
    "Expression",
    "derive_seed",
    "generations_for_budget",
    "holm_adjust",
    "load_csv",
    "make_dataset",
    "result_table_text",
    "run_gp",
    "select_parents",
    "subset_size",
    "wilcoxon_rank_sum",
]

__version__ = "0.1.0"
