"""Fairness analytics.

Group metrics: statistical parity difference and true-positive-rate
difference between an unprivileged and a privileged level of a protected
attribute, with explicit undefined flags instead of fabricated zeros.

Individual fairness: a sensitive subspace is learned by regularized logistic
regressions predicting each protected attribute from the model's other
covariate terms; the fair distance ignores displacement inside that subspace.
The audit then searches, per patient, for a nearby individual (fair-distance
penalty lambda) whose predicted risk falls on the other side of the
threshold. All of it operates in the model's transformed-term space.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, riskmodels
from .errors import ConvergenceError, DegenerateInputError, SchemaError

DEGENERATE_NORM = 1e-6


@dataclass(frozen=True)
class ProtectedSplit:
    attribute: str
    privileged_level: str
    unprivileged_level: str

    def __post_init__(self):
        if self.privileged_level == self.unprivileged_level:
            raise SchemaError(f"{self.attribute}: split levels must differ")

    def masks(self, snapshot):
        var = snapshot.variable(self.attribute)
        if "protected" not in var.roles:
            raise SchemaError(f"variable {self.attribute!r} lacks the protected role")
        values, missing = snapshot.column(self.attribute)
        priv = var.level_index(self.privileged_level)
        unpriv = var.level_index(self.unprivileged_level)
        return (~missing & (values == priv), ~missing & (values == unpriv))


@dataclass(frozen=True)
class GroupFairnessResult:
    spd: float | None
    tprd: float | None
    n_priv: int
    n_unpriv: int
    n_tpr_priv: int
    n_tpr_unpriv: int
    flags: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "spd": self.spd,
            "tprd": self.tprd,
            "n_priv": self.n_priv,
            "n_unpriv": self.n_unpriv,
            "n_tpr_priv": self.n_tpr_priv,
            "n_tpr_unpriv": self.n_tpr_unpriv,
            "flags": list(self.flags),
        }


def statistical_parity_difference(labels, priv_mask, unpriv_mask) -> float | None:
    """P(label=1 | unprivileged) - P(label=1 | privileged); None if a side
    is empty."""
    labels = np.asarray(labels)
    if priv_mask.sum() == 0 or unpriv_mask.sum() == 0:
        return None
    return float(labels[unpriv_mask].mean() - labels[priv_mask].mean())


def horizon_truth(times, events, horizon_days):
    """Within-horizon outcome labels and their ascertainability mask.

    Patients censored before the horizon have an unknown label; everyone
    else is 1 (event inside the horizon) or 0.
    """
    times = np.asarray(times, np.float64)
    events = np.asarray(events)
    y_true = (events == 1) & (times <= horizon_days)
    ascertainable = y_true | (times >= horizon_days)
    return y_true, ascertainable


def tpr_difference(labels, y_true, ascertainable, priv_mask, unpriv_mask) -> float | None:
    """TPR_unpriv - TPR_priv over ascertainable true events; None if a side
    has none."""
    labels = np.asarray(labels)
    pos_priv = priv_mask & ascertainable & y_true
    pos_unpriv = unpriv_mask & ascertainable & y_true
    if pos_priv.sum() == 0 or pos_unpriv.sum() == 0:
        return None
    return float(labels[pos_unpriv].mean() - labels[pos_priv].mean())


def group_fairness(labels, times, events, horizon_days, priv_mask, unpriv_mask) -> GroupFairnessResult:
    y_true, ascertainable = horizon_truth(times, events, horizon_days)
    spd = statistical_parity_difference(labels, priv_mask, unpriv_mask)
    tprd = tpr_difference(labels, y_true, ascertainable, priv_mask, unpriv_mask)
    flags = []
    if spd is None:
        flags.append("spd_undefined_empty_side")
    if tprd is None:
        flags.append("tprd_undefined_no_ascertainable_events")
    return GroupFairnessResult(
        spd=spd,
        tprd=tprd,
        n_priv=int(priv_mask.sum()),
        n_unpriv=int(unpriv_mask.sum()),
        n_tpr_priv=int((priv_mask & ascertainable & y_true).sum()),
        n_tpr_unpriv=int((unpriv_mask & ascertainable & y_true).sum()),
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# sensitive subspace

@dataclass(frozen=True)
class SensitiveSubspace:
    basis: np.ndarray            # (n_terms, n_directions), orthonormal columns
    mean: np.ndarray
    std: np.ndarray              # constant coordinates carry std 1
    feature_names: tuple[str, ...]
    attributes: tuple[str, ...]
    dropped: tuple[tuple[str, str], ...]   # (attribute, reason)


def _penalized_loglik(X, y, beta, pen):
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)) - 0.5 * np.sum(pen * beta * beta))


def _logistic_direction(Z, y, l2, tol, max_iters):
    """L2-regularized logistic coefficients (intercept unpenalized)."""
    n, k = Z.shape
    X = np.column_stack([np.ones(n), Z])
    pen = np.full(k + 1, l2)
    pen[0] = 0.0
    beta = np.zeros(k + 1)
    ll = _penalized_loglik(X, y, beta, pen)
    for _ in range(max_iters):
        with np.errstate(over="ignore"):
            p = 1.0 / (1.0 + np.exp(-(X @ beta)))
        grad = X.T @ (y - p) - pen * beta
        w = p * (1.0 - p)
        hess = (X.T * w) @ X + np.diag(pen) + 1e-12 * np.eye(k + 1)
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise ConvergenceError("logistic fit: singular Hessian") from None
        step = 1.0
        for _h in range(40):
            trial = beta + step * delta
            ll_new = _penalized_loglik(X, y, trial, pen)
            if ll_new >= ll - 1e-12:
                break
            step *= 0.5
        moved = float(np.max(np.abs(step * delta)))
        beta = beta + step * delta
        ll = ll_new
        if moved <= tol:
            return beta[1:]
    raise ConvergenceError(f"logistic fit did not converge in {max_iters} iterations")


def model_complete_rows(snapshot, model) -> np.ndarray:
    """Row indices with every model covariate present."""
    ok = np.ones(snapshot.n, bool)
    for name in model.variables():
        ok &= ~snapshot.column(name)[1]
    return np.flatnonzero(ok)


def fit_sensitive_subspace(snapshot, model, splits, l2=1e-4, tol=1e-8,
                           max_iters=100) -> SensitiveSubspace:
    """One direction per protected split, from a logistic regression of the
    attribute on the model's other covariate terms, then Gram-Schmidt."""
    rows = model_complete_rows(snapshot, model)
    if rows.size == 0:
        raise DegenerateInputError("no rows with complete model covariates", "empty")
    columns = riskmodels.snapshot_columns(snapshot)
    X = riskmodels.term_matrix(model, columns, rows)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)

    directions = []
    direction_attrs = []
    dropped = []
    for split in splits:
        var = snapshot.variable(split.attribute)
        if "protected" not in var.roles:
            raise SchemaError(f"variable {split.attribute!r} lacks the protected role")
        values = snapshot.values(split.attribute)[rows]
        priv = var.level_index(split.privileged_level)
        unpriv = var.level_index(split.unprivileged_level)
        use = (values == priv) | (values == unpriv)
        if use.sum() == 0 or len(np.unique(values[use])) < 2:
            dropped.append((split.attribute, "one_sided"))
            continue
        pred_cols = [k for k, term in enumerate(model.terms)
                     if term.variable != split.attribute]
        if not pred_cols:
            dropped.append((split.attribute, "no_predictors"))
            continue
        Z = (X[np.ix_(use.nonzero()[0], pred_cols)] - mean[pred_cols]) / std[pred_cols]
        y = (values[use] == unpriv).astype(np.float64)
        coef = _logistic_direction(Z, y, l2, tol, max_iters)
        full = np.zeros(X.shape[1])
        full[pred_cols] = coef
        if np.linalg.norm(full) < DEGENERATE_NORM:
            dropped.append((split.attribute, "degenerate"))
            continue
        directions.append(full)
        direction_attrs.append(split.attribute)

    basis_cols = []
    kept_attrs = []
    for attr, vec in zip(direction_attrs, directions):
        v = vec.copy()
        for b in basis_cols:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm < DEGENERATE_NORM:
            dropped.append((attr, "collinear"))
            continue
        basis_cols.append(v / norm)
        kept_attrs.append(attr)
    if not basis_cols:
        raise DegenerateInputError("no usable sensitive direction", "all_degenerate")
    return SensitiveSubspace(
        basis=np.column_stack(basis_cols),
        mean=mean,
        std=std,
        feature_names=model.term_labels(),
        attributes=tuple(kept_attrs),
        dropped=tuple(dropped),
    )


def fair_distance(subspace: SensitiveSubspace, x, x_prime) -> float:
    """Pseudometric in standardized term space ignoring sensitive directions:
    d(x, x')^2 = (z - z')' (I - P) (z - z')."""
    x = np.asarray(x, np.float64)
    x_prime = np.asarray(x_prime, np.float64)
    if x.shape != x_prime.shape or x.shape[0] != subspace.mean.shape[0]:
        raise DegenerateInputError("dimension mismatch", "shape_mismatch")
    delta = (x - x_prime) / subspace.std
    proj = subspace.basis.T @ delta
    d2 = float(delta @ delta - proj @ proj)
    return math.sqrt(d2) if d2 > 0 else 0.0


# ---------------------------------------------------------------------------
# audit

@dataclass(frozen=True)
class AuditConfig:
    lam: float
    threshold: riskmodels.Threshold
    box_lo: np.ndarray    # raw term-space bounds
    box_hi: np.ndarray
    step_size: float = 0.1
    max_iters: int = 500
    move_tol: float = 1e-8

    def __post_init__(self):
        if not self.lam > 0:
            raise SchemaError("audit lambda must be positive")
        lo = np.asarray(self.box_lo, np.float64)
        hi = np.asarray(self.box_hi, np.float64)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise SchemaError("audit box must satisfy lo <= hi per coordinate")
        object.__setattr__(self, "box_lo", lo)
        object.__setattr__(self, "box_hi", hi)


def observed_box(X) -> tuple[np.ndarray, np.ndarray]:
    """Per-term observed min/max; the audit's search region."""
    X = np.asarray(X, np.float64)
    return X.min(axis=0), X.max(axis=0)


def _audit_params(model, subspace, config):
    coef = model.coefficients()
    w = coef * subspace.std
    lo = (config.box_lo - subspace.mean) / subspace.std
    hi = (config.box_hi - subspace.mean) / subspace.std
    score_const = float(coef @ subspace.mean)
    return w, lo, hi, score_const, math.log(model.c)


def _risk_of(score, ln_c, bias):
    return -math.expm1(math.exp(score - bias) * ln_c)


def audit_individual(x, model, subspace, config):
    """Search for a fair-distance-similar individual with the opposite label.

    Returns (x_prime in raw term space, flipped, objective history); the
    history is strictly decreasing by construction of the line search.
    """
    x = np.asarray(x, np.float64)
    if np.any(x < config.box_lo - 1e-9) or np.any(x > config.box_hi + 1e-9):
        raise DegenerateInputError("point outside the audit box", "box_violation")
    w, lo, hi, score_const, ln_c = _audit_params(model, subspace, config)
    z0 = (x - subspace.mean) / subspace.std
    z0 = np.clip(z0, lo, hi)
    risk0 = _risk_of(score_const + float(w @ z0), ln_c, model.bias)
    y0 = 1 if risk0 >= config.threshold.risk_value else 0
    u, hist, used = _kernels.audit_one(
        z0, y0, w, lo, hi, subspace.basis, config.lam, score_const, ln_c,
        model.bias, config.step_size, config.max_iters, config.move_tol)
    risk1 = _risk_of(score_const + float(w @ u), ln_c, model.bias)
    y1 = 1 if risk1 >= config.threshold.risk_value else 0
    return subspace.mean + subspace.std * u, y1 != y0, hist[:used]


def audit_rows(X, model, subspace, config) -> np.ndarray:
    """Vectorized audit over rows of raw term values; True where flipped."""
    X = np.asarray(X, np.float64)
    w, lo, hi, score_const, ln_c = _audit_params(model, subspace, config)
    Z = np.clip((X - subspace.mean) / subspace.std, lo, hi)
    risks = -np.expm1(np.exp(score_const + Z @ w - model.bias) * ln_c)
    labels = (risks >= config.threshold.risk_value).astype(np.int64)
    U = _kernels.audit_batch(Z, labels, w, lo, hi, subspace.basis, config.lam,
                             score_const, ln_c, model.bias, config.step_size,
                             config.max_iters, config.move_tol)
    risks1 = -np.expm1(np.exp(score_const + U @ w - model.bias) * ln_c)
    labels1 = (risks1 >= config.threshold.risk_value).astype(np.int64)
    return labels1 != labels


def violation_rate(X, model, subspace, config) -> float:
    """Fraction of audited rows whose counterfactual crosses the threshold."""
    X = np.asarray(X, np.float64)
    if X.shape[0] == 0:
        raise DegenerateInputError("no rows to audit", "empty")
    return float(audit_rows(X, model, subspace, config).mean())
