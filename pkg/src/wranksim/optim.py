"""Adam-family optimizers with decoupled weight decay.

Both variants keep exponential moving averages of the gradient and its
square. Plain Adam always divides by the bias-corrected second moment.
The rectified variant tracks the approximated variance of that adaptive
term: while too few steps have accumulated for the rectification factor
to be defined (rho_t <= 4) it takes plain bias-corrected momentum steps,
and afterwards scales the adaptive step by the rectification factor.
Weight decay is decoupled: params shrink by (1 - lr * weight_decay)
before the moment-based update.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .exceptions import DomainError, ValidationError


class OptimizerKind(Enum):
    ADAM = "adam"
    RADAM = "radam"

    @classmethod
    def from_name(cls, name: str) -> "OptimizerKind":
        try:
            return cls(str(name).lower())
        except ValueError:
            allowed = ", ".join(k.value for k in cls)
            raise ValidationError(
                f"unknown optimizer {name!r}; allowed: {allowed}"
            ) from None


@dataclass(frozen=True)
class OptimConfig:
    kind: OptimizerKind = OptimizerKind.RADAM
    lr: float = 2e-4
    weight_decay: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not isinstance(self.kind, OptimizerKind):
            raise ValidationError(f"kind must be an OptimizerKind, got {self.kind!r}")
        if not np.isfinite(self.lr) or self.lr <= 0.0:
            raise ValidationError(f"lr must be a positive finite real, got {self.lr}")
        if not np.isfinite(self.weight_decay) or self.weight_decay < 0.0:
            raise ValidationError(
                f"weight_decay must be a non-negative finite real, got {self.weight_decay}"
            )
        if self.lr * self.weight_decay >= 1.0:
            raise ValidationError("lr * weight_decay must be < 1")
        for name, b in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0.0 <= b < 1.0:
                raise ValidationError(f"{name} must be in [0, 1), got {b}")
        if not np.isfinite(self.eps) or self.eps <= 0.0:
            raise ValidationError(f"eps must be a positive finite real, got {self.eps}")


@dataclass
class OptimizerState:
    """Step count plus first/second moment accumulators per parameter."""

    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def for_params(cls, params) -> "OptimizerState":
        return cls(
            step=0,
            m=[np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params],
            v=[np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params],
        )


def _rectification(t: int, beta2: float) -> tuple[bool, float]:
    """Whether the variance-rectified step applies at step t, and its factor."""
    rho_inf = 2.0 / (1.0 - beta2) - 1.0
    beta2_t = beta2 ** t
    rho_t = rho_inf - 2.0 * t * beta2_t / (1.0 - beta2_t)
    if rho_t <= 4.0:
        return False, 1.0
    r_num = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf
    r_den = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t
    return True, float(np.sqrt(r_num / r_den))


def optimizer_step(params, grads, state: OptimizerState,
                   cfg: OptimConfig) -> tuple[list[np.ndarray], OptimizerState]:
    """One update over a list of parameter arrays.

    Pure: returns fresh parameter arrays and a fresh state; inputs are not
    mutated.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DomainError(
            f"parameter/gradient/state length mismatch: {len(params)} params, "
            f"{len(grads)} grads, {len(state.m)} moments"
        )
    t = state.step + 1
    bc1 = 1.0 - cfg.beta1 ** t
    bc2 = 1.0 - cfg.beta2 ** t
    if cfg.kind is OptimizerKind.ADAM:
        adaptive, lr_eff = True, cfg.lr
    else:
        adaptive, factor = _rectification(t, cfg.beta2)
        lr_eff = cfg.lr * factor
    wd_factor = 1.0 - cfg.lr * cfg.weight_decay

    new_params: list[np.ndarray] = []
    new_m: list[np.ndarray] = []
    new_v: list[np.ndarray] = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        p = np.ascontiguousarray(p, dtype=np.float64)
        g = np.ascontiguousarray(g, dtype=np.float64)
        if p.shape != g.shape:
            raise DomainError(
                f"gradient shape {g.shape} does not match parameter shape {p.shape}"
            )
        p, m, v = p.copy(), m.copy(), v.copy()
        kernels.adam_update_kernel(
            p.reshape(-1), g.reshape(-1), m.reshape(-1), v.reshape(-1),
            lr_eff, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2, wd_factor,
            adaptive,
        )
        new_params.append(p)
        new_m.append(m)
        new_v.append(v)
    return new_params, OptimizerState(step=t, m=new_m, v=new_v)
