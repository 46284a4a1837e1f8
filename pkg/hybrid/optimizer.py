"""
Adadelta
========

    square_avg <- rho * square_avg + (1 - rho) * g^2
    delta      <- sqrt(acc_delta + eps) / sqrt(square_avg + eps) * g
    acc_delta  <- rho * acc_delta + (1 - rho) * delta^2
    params     <- params - lr * delta

The learning rate scales only the applied step; `acc_delta` tracks the
unscaled delta.
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from models.errors import DimensionError
from models.reports import OptimizerSnapshot


@dataclass(frozen=True)
class OptimizerState:
    square_avg: np.ndarray
    acc_delta: np.ndarray
    rho: float = 0.9
    eps: float = 1e-6
    lr: float = 0.05
    steps: int = 0

    @classmethod
    def zeros(cls, size: int, rho: float = 0.9, eps: float = 1e-6, lr: float = 0.05) -> "OptimizerState":
        return cls(np.zeros(size), np.zeros(size), rho=rho, eps=eps, lr=lr)

    def snapshot(self) -> OptimizerSnapshot:
        return OptimizerSnapshot(
            rho=self.rho, eps=self.eps, lr=self.lr, steps=self.steps,
            square_avg=self.square_avg.tolist(), acc_delta=self.acc_delta.tolist(),
        )

    @classmethod
    def from_snapshot(cls, snap: OptimizerSnapshot) -> "OptimizerState":
        return cls(np.asarray(snap.square_avg), np.asarray(snap.acc_delta),
                   rho=snap.rho, eps=snap.eps, lr=snap.lr, steps=snap.steps)


def adadelta_step(state: OptimizerState, params: np.ndarray, grads: np.ndarray) -> Tuple[np.ndarray, OptimizerState]:
    """One update; returns new params and state without touching the inputs."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.square_avg.shape:
        raise DimensionError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.square_avg.shape}"
        )
    rho, eps = state.rho, state.eps
    square_avg = rho * state.square_avg + (1.0 - rho) * grads ** 2
    delta = np.sqrt(state.acc_delta + eps) / np.sqrt(square_avg + eps) * grads
    acc_delta = rho * state.acc_delta + (1.0 - rho) * delta ** 2
    new_state = replace(state, square_avg=square_avg, acc_delta=acc_delta, steps=state.steps + 1)
    return params - state.lr * delta, new_state
