"""scikit-learn estimators over the expansion fitting layer.

``X`` is a column of sample times t and ``y`` the trace values, so these
estimators slot into sklearn tooling (cloning, parameter grids, scoring).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .heat_trace import COND_LIMIT, LOG_THRESHOLD, _basis, detect_logs, fit_arrays, skeleton_terms, TraceSample


def _times(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    X = check_array(X)
    if X.shape[1] != 1:
        raise ValueError(f"X must hold a single column of sample times, got {X.shape[1]} columns")
    t = X[:, 0]
    if np.any(t <= 0):
        raise ValueError("sample times must be positive")
    return t


class HeatTraceExpansion(RegressorMixin, BaseEstimator):
    """Least-squares fit of a short-time expansion sum c_j t^{a_j} (log t)^{p_j}.

    Args:
        skeleton: iterable of ``(exponent, log_power)`` pairs, an ``IndexSet``
            or a ``HeatSkeleton``.
        max_exponent: drop skeleton terms above this exponent.
        cond_limit: refuse fits with a larger condition estimate.
        refuse: raise on ill-conditioning instead of flagging it.

    Attributes:
        model_: the fitted :class:`~edgeeta.heat_trace.ExpansionModel`.
        terms_: the ``(exponent, log_power)`` template actually used.
        coef_: fitted coefficients in template order.
    """

    def __init__(self, skeleton=((-1, 0), (-0.5, 0), (0, 0)), max_exponent=None, cond_limit=COND_LIMIT,
                 refuse=True):
        self.skeleton = skeleton
        self.max_exponent = max_exponent
        self.cond_limit = cond_limit
        self.refuse = refuse

    def fit(self, X, y, sample_error=None):
        t = _times(X)
        t, y = check_X_y(t.reshape(-1, 1), y, y_numeric=True)
        t = t[:, 0]
        self.terms_ = skeleton_terms(self.skeleton, self.max_exponent)
        self.model_ = fit_arrays(t, y, self.terms_, sample_error, self.cond_limit, self.refuse)
        self.coef_ = np.array([c for _, _, c in self.model_.terms])
        self.condition_estimate_ = self.model_.condition_estimate
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        t = _times(X)
        return _basis(t, self.terms_) @ self.coef_


class LogTermDetector(BaseEstimator):
    """Decide whether t^a log t partners improve an expansion fit.

    Args:
        base_skeleton: log-free template.
        slots: exponents that receive a log partner (default: all).
        threshold: residual improvement factor that counts as detection.
    """

    def __init__(self, base_skeleton=((-0.5, 0), (0, 0), (0.5, 0)), slots=None, threshold=LOG_THRESHOLD):
        self.base_skeleton = base_skeleton
        self.slots = slots
        self.threshold = threshold

    def fit(self, X, y, sample_error=None):
        t = _times(X)
        t, y = check_X_y(t.reshape(-1, 1), y, y_numeric=True)
        err = np.zeros(len(y)) if sample_error is None else np.asarray(sample_error, dtype=float)
        samples = [TraceSample(ti, yi, 0.0, ei) for ti, yi, ei in zip(t[:, 0], y, err)]
        self.result_ = detect_logs(samples, self.base_skeleton, self.slots, self.threshold)
        self.detected_ = self.result_.detected
        self.improvement_ = self.result_.improvement
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Values of the preferred fit (augmented if logs were detected)."""
        check_is_fitted(self, "result_")
        model = self.result_.augmented if self.detected_ else self.result_.base
        return model.evaluate(_times(X))
