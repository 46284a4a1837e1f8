"""
Report rendering: pandas tables for CSV output and aligned text, mirrored by
the rich tables the CLI prints.
"""

from typing import List, Sequence

import pandas as pd

from models.reports import AblationReport, EvalReport, TrainingLogRow, VerifyReport


def per_class_frame(report: EvalReport) -> pd.DataFrame:
    rows = [
        {
            "class": m.name,
            "support": m.support,
            "precision": m.precision,
            "recall": m.recall,
            "specificity": m.specificity,
            "f1": m.f1,
            "auc": m.auc,
            "undefined": ",".join(m.undefined),
        }
        for m in report.per_class
    ]
    return pd.DataFrame(rows)


def macro_frame(report: EvalReport) -> pd.DataFrame:
    """Single "macro" row: unweighted means over classes, AUC over the defined classes only."""
    return pd.DataFrame([{
        "class": "macro",
        "support": report.n_samples,
        "precision": report.macro("precision"),
        "recall": report.macro("recall"),
        "specificity": report.macro("specificity"),
        "f1": report.macro("f1"),
        "auc": report.macro_auc,
        "undefined": "auc" if report.auc_undefined else "",
    }])


def confusion_frame(report: EvalReport) -> pd.DataFrame:
    names = [m.name for m in report.per_class]
    return pd.DataFrame(report.confusion.counts, index=pd.Index(names, name="true"), columns=names)


def render_eval_text(report: EvalReport) -> str:
    lines = [
        pd.concat([per_class_frame(report), macro_frame(report)], ignore_index=True)
        .to_string(index=False, float_format=lambda v: f"{v:.4f}"),
        "",
        f"accuracy   {report.accuracy:.4f}",
        f"macro AUC  {report.macro_auc:.4f}" + ("  (undefined)" if report.auc_undefined else ""),
        f"samples    {report.n_samples}",
    ]
    if report.loss is not None:
        lines.append(f"loss       {report.loss:.6f}")
    if report.n_parameters is not None:
        quantum = "" if report.n_quantum_parameters is None else f" ({report.n_quantum_parameters} quantum)"
        lines.append(f"parameters {report.n_parameters}{quantum}")
    lines += ["", "confusion matrix (rows = true, columns = predicted)", confusion_frame(report).to_string()]
    return "\n".join(lines) + "\n"


def training_log_frame(rows: Sequence[TrainingLogRow]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in rows], columns=["epoch", "split", "loss", "accuracy"])


def ablation_frame(report: AblationReport) -> pd.DataFrame:
    frame = pd.DataFrame([r.model_dump() for r in report.rows])
    frame["cut"] = frame["cut"].map({True: "yes", False: "no"})
    return frame


def render_ablation_text(report: AblationReport) -> str:
    table = ablation_frame(report).to_string(index=False, float_format=lambda v: f"{v:.6f}")
    deltas = "  ".join(f"{k}={v:.2e}" for k, v in report.deltas.items())
    return f"{table}\n\n|cut - uncut|: {deltas}\nmax delta: {report.max_delta:.2e}\n"


def render_verify_text(report: VerifyReport) -> str:
    req = report.qubit_requirements
    lines: List[str] = [
        f"circuit          {report.circuit} ({report.n_qubits} qubits)",
        f"trials           {report.trials} (seed {report.seed})",
        f"max |cut-uncut|  {report.max_deviation:.3e}",
        f"tolerance        {report.tolerance:.1e}",
        f"fragments        {req['upstream']} + {req['downstream']} qubits (largest {req['max_fragment']}, uncut {req['uncut']})",
        f"result           {'PASS' if report.passed else 'FAIL'}",
    ]
    return "\n".join(lines) + "\n"
