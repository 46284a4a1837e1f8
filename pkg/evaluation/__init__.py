"""Evaluation package: metric computation and report rendering."""

from .metrics import build_confusion, compare_runs, compute_metrics
from .reports import render_ablation_text, render_eval_text, render_verify_text

__all__ = [
    "build_confusion",
    "compare_runs",
    "compute_metrics",
    "render_ablation_text",
    "render_eval_text",
    "render_verify_text",
]
