"""
Settings
========

Environment (.env via python-dotenv) plus JSON config loading.

    QCNN_MAX_WORKERS   fragment / file thread pool size (default 1 = sequential)
    QCNN_OUTPUT_DIR    default output root when a config does not set one
    QCNN_LOG_LEVEL     logging level for the CLI (default INFO)
"""

import json
import os
from pathlib import Path
from typing import Optional, Type, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from models.config import DatasetManifest, DatasetSource, RunConfig, VerifyConfig
from models.errors import ConfigError

load_dotenv()

M = TypeVar("M", bound=BaseModel)


def max_workers() -> int:
    raw = os.getenv("QCNN_MAX_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"QCNN_MAX_WORKERS must be an integer, got '{raw}'") from None


def log_level() -> str:
    return os.getenv("QCNN_LOG_LEVEL", "INFO").upper()


def default_output_dir() -> Optional[Path]:
    value = os.getenv("QCNN_OUTPUT_DIR")
    return Path(value) if value else None


def _read_json(path: Path) -> dict:
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def load_model(path: Path, model: Type[M]) -> M:
    path = Path(path)
    try:
        return model.model_validate(_read_json(path))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ConfigError(f"{path}: {where}: {first['msg']}") from exc


def _resolve(base: Path, path: Optional[Path]) -> Optional[Path]:
    if path is None or path.is_absolute():
        return path
    return (base / path).resolve()


def load_run_config(path: Path) -> RunConfig:
    """Validate a run config; relative paths are resolved against its directory and must exist."""
    path = Path(path)
    config = load_model(path, RunConfig)
    base = path.parent
    dataset = config.dataset.model_copy(update={
        "path": _resolve(base, config.dataset.path),
        "manifest": _resolve(base, config.dataset.manifest),
    })
    if dataset.source != DatasetSource.SYNTHETIC:
        for label, ref in (("dataset path", dataset.path), ("manifest", dataset.manifest)):
            if not ref.exists():
                raise ConfigError(f"{path}: {label} {ref} does not exist")
    output_dir = config.output_dir
    if "output_dir" not in config.model_fields_set and default_output_dir() is not None:
        output_dir = default_output_dir()
    return config.model_copy(update={"dataset": dataset, "output_dir": _resolve(base, output_dir)})


def load_verify_config(path: Optional[Path]) -> VerifyConfig:
    if path is None:
        config = VerifyConfig()
        return config.model_copy(update={"output_dir": default_output_dir() or config.output_dir})
    path = Path(path)
    config = load_model(path, VerifyConfig)
    return config.model_copy(update={"output_dir": _resolve(path.parent, config.output_dir)})


def load_manifest(path: Path) -> DatasetManifest:
    return load_model(Path(path), DatasetManifest)


def apply_overrides(config: RunConfig, seed: Optional[int] = None, epochs: Optional[int] = None,
                    cut: Optional[bool] = None, out: Optional[Path] = None) -> RunConfig:
    """CLI overrides on top of the file; None leaves a field as configured."""
    training = config.training
    if seed is not None:
        training = training.model_copy(update={"seed": seed})
    if epochs is not None:
        if epochs < 0:
            raise ConfigError("--epochs must be >= 0")
        training = training.model_copy(update={"epochs": epochs})
    model = config.model if cut is None else config.model.model_copy(update={"cut_enabled": cut})
    return config.model_copy(update={
        "training": training,
        "model": model,
        "output_dir": Path(out) if out is not None else config.output_dir,
    })
