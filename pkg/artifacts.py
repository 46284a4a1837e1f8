"""
Artifacts
=========

Run outputs written atomically (temp file in the same directory, then
rename), so a crashed run never leaves a half-written checkpoint.

    <out>/config.resolved.json
    <out>/checkpoint.json
    <out>/training_log.csv
    <out>/eval_report.{json,txt}  per_class_metrics.csv  confusion_matrix.csv
    <out>/ablation_report.{json,txt,csv}
    <out>/verify_cut.{json,txt}
"""

import os
import tempfile
import threading
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, ValidationError

from models.errors import ConfigError
from models.reports import AblationReport, Checkpoint, EvalReport, TrainingLogRow, VerifyReport
from evaluation.reports import (
    ablation_frame,
    confusion_frame,
    per_class_frame,
    render_ablation_text,
    render_eval_text,
    render_verify_text,
    training_log_frame,
)

# one writer at a time per process
WRITE_LOCK = threading.Lock()


def atomic_write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with WRITE_LOCK:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return path


def write_model(path: Path, model: BaseModel) -> Path:
    return atomic_write_text(path, model.model_dump_json(indent=2))


def write_config_snapshot(out: Path, config: BaseModel) -> Path:
    return write_model(Path(out) / "config.resolved.json", config)


def write_checkpoint(out: Path, checkpoint: Checkpoint) -> Path:
    return write_model(Path(out) / "checkpoint.json", checkpoint)


def read_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)
    if path.is_dir():
        path = path / "checkpoint.json"
    if not path.is_file():
        raise ConfigError(f"checkpoint {path} does not exist")
    try:
        return Checkpoint.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise ConfigError(f"{path} is not a valid checkpoint: {exc.errors()[0]['msg']}") from exc


def write_training_log(out: Path, rows: Sequence[TrainingLogRow]) -> Path:
    return atomic_write_text(Path(out) / "training_log.csv", training_log_frame(rows).to_csv(index=False))


def write_eval_report(out: Path, report: EvalReport) -> Path:
    out = Path(out)
    write_model(out / "eval_report.json", report)
    atomic_write_text(out / "per_class_metrics.csv", per_class_frame(report).to_csv(index=False))
    atomic_write_text(out / "confusion_matrix.csv", confusion_frame(report).to_csv())
    return atomic_write_text(out / "eval_report.txt", render_eval_text(report))


def write_ablation_report(out: Path, report: AblationReport) -> Path:
    out = Path(out)
    write_model(out / "ablation_report.json", report)
    atomic_write_text(out / "ablation_report.csv", ablation_frame(report).to_csv(index=False))
    return atomic_write_text(out / "ablation_report.txt", render_ablation_text(report))


def write_verify_report(out: Path, report: VerifyReport) -> Path:
    out = Path(out)
    write_model(out / "verify_cut.json", report)
    return atomic_write_text(out / "verify_cut.txt", render_verify_text(report))
