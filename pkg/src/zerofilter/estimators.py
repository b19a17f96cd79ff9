"""scikit-learn transformers over batches of sampled periodic fields.

Rows of ``X`` are grid samples of one field on ``[-L, L)``; the number of
columns sets ``N``.
"""
import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dynamics import EvolutionSpec, StepPolicy, integrate
from .littlewood_paley import BesovParams, besov_norm, block_l2_norms, build_partition
from .spectral import DEFAULT_DEALIAS, Grid, SpectralField


class BesovBlockTransformer(TransformerMixin, BaseEstimator):
    """Map each field to its weighted block norms ``2^{js} ||Delta_j u||_{L^2}``, j = -1..j_max.

    ``norm_`` style summaries are available through :meth:`besov_norms`.
    """

    def __init__(self, L: float = 32 * math.pi, s: float = 2.0, r: float = 2.0):
        self.L = L
        self.s = s
        self.r = r

    def fit(self, X, y=None):
        X = check_array(X)
        self.grid_ = Grid(self.L, X.shape[1])
        self.params_ = BesovParams(self.s, self.r)
        self.partition_ = build_partition(self.grid_)
        self.n_features_in_ = X.shape[1]
        self.j_ = np.arange(-1, self.partition_.j_max + 1)
        return self

    def _fields(self, X):
        check_is_fitted(self, "grid_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} samples per row, got {X.shape[1]}")
        return [SpectralField.from_values(self.grid_, row) for row in X]

    def transform(self, X):
        fields = self._fields(X)
        w = 2.0 ** (self.j_ * self.s)
        return np.array([w * block_l2_norms(u, self.partition_) for u in fields])

    def besov_norms(self, X):
        return np.array([besov_norm(u, self.params_, self.partition_) for u in self._fields(X)])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "j_")
        return np.array([f"block_{j}" for j in self.j_], dtype=object)


class FlowTransformer(TransformerMixin, BaseEstimator):
    """Map each initial field to its solution at time ``T``.

    ``alpha = 0`` integrates Burgers, ``alpha > 0`` the Camassa-Holm flow.
    """

    def __init__(self, L: float = 32 * math.pi, alpha: float = 0.0, T: float = 0.1, dt=None,
                 cfl: float = 0.25, dealias: float = DEFAULT_DEALIAS, form: str = "nonlocal"):
        self.L = L
        self.alpha = alpha
        self.T = T
        self.dt = dt
        self.cfl = cfl
        self.dealias = dealias
        self.form = form

    def fit(self, X, y=None):
        X = check_array(X)
        self.grid_ = Grid(self.L, X.shape[1])
        if self.alpha == 0:
            self.spec_ = EvolutionSpec("burgers", 0.0, self.dealias)
        else:
            self.spec_ = EvolutionSpec(f"ch_{self.form}", self.alpha, self.dealias)
        self.policy_ = StepPolicy(T=self.T, dt=self.dt, cfl=self.cfl)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} samples per row, got {X.shape[1]}")
        out = np.empty_like(X, dtype=float)
        for i, row in enumerate(X):
            u0 = SpectralField.from_values(self.grid_, row)
            out[i] = integrate(u0, self.spec_, self.policy_).final.values
        return out
