"""Least squares on a named basis with unit-norm column scaling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError

MAX_CONDITION = 1e8


@dataclass(frozen=True)
class LinearFit:
    labels: tuple
    coefficients: np.ndarray
    standard_errors: np.ndarray
    residual_norm: float
    condition_number: float
    n_samples: int

    def __getitem__(self, label):
        return float(self.coefficients[self.labels.index(label)])

    def stderr(self, label):
        return float(self.standard_errors[self.labels.index(label)])


def scaled_lstsq(columns, labels, y, max_condition=MAX_CONDITION, hint="") -> LinearFit:
    X = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    y = np.asarray(y, dtype=float)
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0] = 1.0
    Xs = X / norms
    cond = float(np.linalg.cond(Xs))
    if not np.isfinite(cond) or cond > max_condition:
        raise ConditioningError(
            f"fit basis {list(labels)} is ill-conditioned on this grid "
            f"(condition number {cond:.3g} > {max_condition:.0e}){hint}")
    coef_s, *_ = np.linalg.lstsq(Xs, y, rcond=None)
    resid = y - Xs @ coef_s
    rss = float(resid @ resid)
    dof = len(y) - X.shape[1]
    if dof > 0:
        cov = np.linalg.inv(Xs.T @ Xs) * (rss / dof)
        se = np.sqrt(np.clip(np.diag(cov), 0, None)) / norms
    else:
        se = np.full(X.shape[1], np.nan)
    return LinearFit(tuple(labels), coef_s / norms, se, float(np.sqrt(rss)), cond, len(y))
