"""Continuous myoelectric classifier evaluation: filtering, features, classifiers,
steady-state/transition segmentation, metrics and statistics."""

from ._core import (
    CLASSES,
    EvaluationError,
    FormatError,
    Model,
    NotImplementedError,
    NumericalError,
    ParameterError,
    bandstop_filter,
    dunn_sidak,
    extract_features,
    frame_count,
    generate_subject,
    kruskal_wallis,
    leave_one_set_out,
    majority_vote,
    mav,
    pearson,
    render_report,
    run_experiment,
    segment,
    sidak_adjust,
    ssc,
    steady_metrics,
    train,
    transition_metrics,
    wl,
    zc,
)

__all__ = [name for name in dir() if not name.startswith("_")]
