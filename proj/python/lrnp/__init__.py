"""Label ranking with greedy trees, honest forests and pairwise learners."""

from ._core import (
    Dataset,
    Forest,
    Model,
    Ranking,
    SparseTarget,
    Tree,
    ValidationError,
    alpha_inconsistency,
    apply_mallows,
    argsort,
    argsort_descending,
    bayes_ranking,
    beta_kt_gap,
    canonical_repr,
    cross_validate,
    expected_kendall_tau,
    fit,
    fit_forest,
    fit_tree,
    kemeny_median,
    kendall_tau,
    kt_coefficient,
    partial_rank,
    sample_complete,
    sample_incomplete,
    sample_paired,
    sample_partial,
    spearman,
)

__all__ = [name for name in dir() if not name.startswith("_")]
