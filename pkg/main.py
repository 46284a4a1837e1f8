"""
Distributed QCNN: Command Line Runner
=====================================

Entry point for the experiment commands:

    python main.py verify-cut [--config verify.json]
    python main.py train  --config run.json [--seed N] [--epochs N] [--cut/--no-cut] [--out DIR]
    python main.py eval   --config run.json --checkpoint DIR [--split test]
    python main.py ablate --config run.json
    python main.py encode --config run.json

Exit codes: 0 success, 1 invalid input or failed cut verification,
2 runtime failure.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

import settings
from artifacts import (
    write_ablation_report,
    write_checkpoint,
    write_config_snapshot,
    write_eval_report,
    write_model,
    write_training_log,
    write_verify_report,
)
from core_logic import ExperimentRunner, load_samples, verify_cut
from data_pipeline import REDUCER_NAME, class_counts, write_feature_csv
from models.config import DatasetManifest, RunConfig
from models.errors import ConfigError, DataError
from models.reports import AblationReport, EvalReport, TrainingLogRow, VerifyReport

console = Console()

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

LOG_STYLES = {"SYSTEM": "dim", "STAGE": "cyan", "METRIC": "green", "ERROR": "bold red"}


# ============================================================================
# DISPLAY
# ============================================================================

def display_header(command: str, detail: str):
    console.print(Panel(f"[bold cyan]{command.upper()}[/bold cyan]  {detail}", box=box.ROUNDED, expand=False))


def display_logs(logs: Sequence[dict]):
    for entry in logs:
        style = LOG_STYLES.get(entry["type"], "white")
        console.print(f"  [dim]{entry['timestamp']}[/dim] [{style}]{entry['agent']:<10}[/{style}] {entry['message']}")
    console.print()


def display_epoch(rows: Sequence[TrainingLogRow]):
    cells = "  ".join(f"{r.split} loss={r.loss:.4f} acc={r.accuracy:.3f}" for r in rows)
    console.print(f"  [bold]epoch {rows[0].epoch:>3}[/bold]  {cells}")


def display_eval(report: EvalReport, title: str = "EVALUATION"):
    table = Table(title=title, box=box.ROUNDED, border_style="cyan")
    for column in ("Class", "Support", "Precision", "Recall", "Specificity", "F1", "AUC"):
        table.add_column(column, justify="left" if column == "Class" else "right")
    for m in report.per_class:
        table.add_row(m.name, str(m.support), *(f"{v:.4f}" for v in (m.precision, m.recall, m.specificity, m.f1, m.auc)))
    table.add_section()
    macros = (report.macro(k) for k in ("precision", "recall", "specificity", "f1"))
    table.add_row("[bold]macro[/bold]", str(report.n_samples), *(f"{v:.4f}" for v in macros), f"{report.macro_auc:.4f}")
    console.print(table)

    auc = f"{report.macro_auc:.4f}" + (" [yellow](undefined)[/yellow]" if report.auc_undefined else "")
    params = "" if report.n_parameters is None else f"   params={report.n_parameters}"
    console.print(f"  accuracy [bold]{report.accuracy:.4f}[/bold]   macro AUC [bold]{auc}[/bold]   n={report.n_samples}{params}")

    names = [m.name for m in report.per_class]
    confusion = Table(title="Confusion (rows = true)", box=box.SIMPLE)
    confusion.add_column("")
    for name in names:
        confusion.add_column(name, justify="right")
    for name, row in zip(names, report.confusion.counts):
        confusion.add_row(name, *(str(v) for v in row))
    console.print(confusion)


def display_ablation(report: AblationReport):
    table = Table(title="CUT vs UNCUT", box=box.ROUNDED, border_style="magenta")
    table.add_column("Metric")
    table.add_column("Cut", justify="right")
    table.add_column("Uncut", justify="right")
    table.add_column("|Δ|", justify="right")
    by_cut = {row.cut: row for row in report.rows}
    for metric, delta in report.deltas.items():
        table.add_row(metric, f"{getattr(by_cut[True], metric):.6f}", f"{getattr(by_cut[False], metric):.6f}", f"{delta:.2e}")
    if by_cut[True].n_parameters is not None:
        table.add_row("parameters", str(by_cut[True].n_parameters), str(by_cut[False].n_parameters), "")
    console.print(table)


def display_verify(report: VerifyReport):
    req = report.qubit_requirements
    style = "bold green" if report.passed else "bold red"
    verdict = "PASS" if report.passed else "FAIL"
    content = (
        f"circuit        {report.circuit} ({report.n_qubits} qubits)\n"
        f"trials         {report.trials} (seed {report.seed})\n"
        f"max deviation  {report.max_deviation:.3e} (tolerance {report.tolerance:.1e})\n"
        f"fragments      {req['upstream']} + {req['downstream']} qubits, largest {req['max_fragment']} of {req['uncut']}"
    )
    console.print(Panel(content, title=f"[{style}]CUT VERIFICATION: {verdict}[/{style}]", border_style=style))


# ============================================================================
# COMMANDS
# ============================================================================

def _run_config(args) -> RunConfig:
    if args.config is None:
        raise ConfigError(f"{args.command} needs --config")
    config = settings.load_run_config(args.config)
    return settings.apply_overrides(config, seed=args.seed, epochs=getattr(args, "epochs", None),
                                    cut=getattr(args, "cut", None), out=args.out)


def cmd_verify_cut(args) -> int:
    config = settings.load_verify_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output_dir"] = args.out
    config = config.model_copy(update=updates)
    display_header("verify-cut", f"{config.circuit}, {config.trials} trial(s)")

    report = verify_cut(config)
    write_verify_report(config.output_dir, report)
    display_verify(report)
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_train(args) -> int:
    config = _run_config(args)
    display_header("train", f"{config.name}: {config.training.epochs} epoch(s), "
                            f"cut {'on' if config.model.cut_enabled else 'off'}")

    state = ExperimentRunner.train(config, progress=display_epoch)
    out = config.output_dir
    write_config_snapshot(out, config)
    write_checkpoint(out, state["checkpoint"])
    write_training_log(out, state["train_log"])
    display_logs(state["logs"])
    console.print(f"[green]Checkpoint written to {out / 'checkpoint.json'}[/green]")
    return EXIT_OK


def cmd_eval(args) -> int:
    config = _run_config(args)
    if args.checkpoint is None:
        raise ConfigError("eval needs --checkpoint")
    display_header("eval", f"{config.name}: checkpoint {args.checkpoint}")

    state = ExperimentRunner.evaluate(config, args.checkpoint, args.split, args.cut)
    write_eval_report(config.output_dir, state["eval_report"])
    display_logs(state["logs"])
    display_eval(state["eval_report"])
    return EXIT_OK


def cmd_ablate(args) -> int:
    config = _run_config(args)
    display_header("ablate", f"{config.name}: cut and uncut, {config.training.epochs} epoch(s) each")

    state = ExperimentRunner.ablate(config, progress=display_epoch)
    out = config.output_dir
    write_config_snapshot(out, config)
    write_ablation_report(out, state["ablation"])
    for variant, rows in state["ablation_logs"].items():
        write_training_log(out / variant, rows)
    display_logs(state["logs"])
    display_ablation(state["ablation"])
    return EXIT_OK


def cmd_encode(args) -> int:
    """Reduce the configured dataset to a feature CSV plus a manifest that reads it back."""
    config = _run_config(args)
    display_header("encode", f"{config.dataset.name} -> {config.model.n_qubits} features")

    samples, class_names, ratios, seed = load_samples(config)
    out = config.output_dir
    write_feature_csv(samples, out / "features.csv")
    counts = {class_names[k]: v for k, v in class_counts(samples).items()}
    manifest = DatasetManifest(class_names=class_names, counts=counts, split_ratios=ratios, seed=seed,
                               reducer=REDUCER_NAME)
    write_model(out / "features.manifest.json", manifest)

    table = Table(title="DATASET", box=box.ROUNDED, border_style="yellow")
    table.add_column("Class")
    table.add_column("Samples", justify="right")
    for name, count in counts.items():
        table.add_row(name, str(count))
    console.print(table)
    console.print(f"[green]Features written to {out / 'features.csv'}[/green]")
    return EXIT_OK


COMMANDS = {
    "verify-cut": cmd_verify_cut,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "encode": cmd_encode,
}


# ============================================================================
# ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Distributed hybrid QCNN with exact wire cutting")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=Path, default=None, help="JSON config file")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--out", type=Path, default=None, help="Output directory")
        if name in ("train", "ablate"):
            cmd.add_argument("--epochs", type=int, default=None)
        if name in ("train", "eval"):
            cmd.add_argument("--cut", action=argparse.BooleanOptionalAction, default=None,
                             help="Run the quantum layer cut (--cut) or uncut (--no-cut)")
        if name == "eval":
            cmd.add_argument("--checkpoint", default=None, help="Checkpoint file or run directory")
            cmd.add_argument("--split", default=None, help="Split to evaluate (default test, or 'all')")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=settings.log_level(),
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DataError, ValidationError) as exc:
        console.print(f"[bold red]Invalid input:[/bold red] {exc}")
        return EXIT_INVALID
    except Exception as exc:
        console.print(f"[bold red]{type(exc).__name__}:[/bold red] {exc}")
        logging.getLogger(__name__).debug("run failed", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
