"""Central finite-difference verification of recorded gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .exceptions import ContractError


@dataclass
class GradCheckReport:
    """Per-tensor worst relative error between analytic and numeric grads."""

    tol: float
    eps: float
    errors: dict[str, float] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status}, worst rel err {self.worst:.3e} (tol {self.tol:.1e})"
        if self.failures:
            line += ", exceeded by: " + ", ".join(self.failures)
        return line


def grad_check(f, inputs: dict[str, Tensor], eps: float = 1e-5, tol: float = 1e-4) -> GradCheckReport:
    """Compare analytic gradients of ``f(inputs)`` against central differences.

    ``f`` must be deterministic and return a scalar-valued Tensor built
    from the given tensors.  Relative error per element is
    |analytic - numeric| / max(1, |numeric|); a tensor fails when its
    worst element exceeds ``tol``.
    """
    if eps <= 0:
        raise ContractError(f"grad_check: eps must be positive, got {eps}")
    for name, t in inputs.items():
        if not isinstance(t, Tensor) or not t.requires_grad:
            raise ContractError(f"grad_check: input {name!r} must be a Tensor with requires_grad")

    for t in inputs.values():
        t.zero_grad()
    f(inputs).backward()
    analytic = {name: t.grad.copy() for name, t in inputs.items()}

    report = GradCheckReport(tol=tol, eps=eps)
    for name, t in inputs.items():
        flat = t.data.reshape(-1)
        worst = 0.0
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = f(inputs).item()
            flat[i] = keep - eps
            down = f(inputs).item()
            flat[i] = keep
            numeric = (up - down) / (2.0 * eps)
            err = abs(analytic[name].reshape(-1)[i] - numeric) / max(1.0, abs(numeric))
            worst = max(worst, err)
        report.errors[name] = worst
        if worst > tol:
            report.failures.append(name)
    return report


def finite_difference(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Plain central-difference gradient of a scalar function of an array.

    Kept separate from grad_check so tests can use it as an oracle that
    never touches the autodiff machinery.
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        up = float(f(x))
        flat[i] = keep - eps
        down = float(f(x))
        flat[i] = keep
        gflat[i] = (up - down) / (2.0 * eps)
    return grad
