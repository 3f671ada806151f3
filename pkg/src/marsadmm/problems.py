"""Composite objectives F(x) + g(Ax) over a manifold, with per-sample oracles.

F is the empirical mean of a smooth per-sample loss, g is a weighted l1
penalty (or absent), and A is the identity or a dense matrix. Two concrete
instances are provided: sparse PCA on the Stiefel manifold and sparse binary
classification on the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .manifolds import Sphere, Stiefel

__all__ = [
    "L1Penalty",
    "ZeroPenalty",
    "IdentityMap",
    "DenseMap",
    "operator_norm",
    "SpcaOracle",
    "SigmoidMarginOracle",
    "CompositeProblem",
    "make_spca",
    "make_sphere_classifier",
]


# ---------------------------------------------------------------------------
# nonsmooth part g


class L1Penalty:
    """g(y) = weight * sum |y_i|, entrywise over vectors or matrices."""

    def __init__(self, weight: float):
        if weight < 0:
            raise ValueError("l1 weight must be nonnegative")
        self.weight = float(weight)

    def value(self, y) -> float:
        return self.weight * float(np.abs(y).sum())

    def prox(self, v, rho: float) -> np.ndarray:
        """Soft threshold at weight / rho."""
        tau = self.weight / rho
        return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)

    def subgradient(self, y) -> np.ndarray:
        # minimal-norm element: sign(0) = 0
        return self.weight * np.sign(y)

    def dist_to_subdiff(self, y, w) -> float:
        y = np.asarray(y).ravel()
        w = np.asarray(w).ravel()
        on = y != 0.0
        d_on = w[on] - self.weight * np.sign(y[on])
        d_off = np.maximum(np.abs(w[~on]) - self.weight, 0.0)
        return float(math.sqrt(float(d_on @ d_on) + float(d_off @ d_off)))

    def lipschitz_bound(self, dim: int) -> float:
        """l2 Lipschitz constant of g on R^dim."""
        return self.weight * math.sqrt(dim)


class ZeroPenalty:
    """g identically zero; prox is the identity."""

    weight = 0.0

    def value(self, y) -> float:
        return 0.0

    def prox(self, v, rho: float) -> np.ndarray:
        return np.array(v, dtype=float, copy=True)

    def subgradient(self, y) -> np.ndarray:
        return np.zeros_like(np.asarray(y, dtype=float))

    def dist_to_subdiff(self, y, w) -> float:
        return float(np.linalg.norm(np.asarray(w).ravel()))

    def lipschitz_bound(self, dim: int) -> float:
        return 0.0


# ---------------------------------------------------------------------------
# linear constraint map A


class IdentityMap:
    """A = I; y and lambda live in the ambient space of x."""

    def __init__(self, shape: tuple[int, ...]):
        self.in_shape = tuple(shape)
        self.out_shape = tuple(shape)

    def apply(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def adjoint(self, w) -> np.ndarray:
        return np.asarray(w, dtype=float)


class DenseMap:
    """A is a dense matrix acting on the column-major flattening of x."""

    def __init__(self, matrix, in_shape: tuple[int, ...]):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("A must be a 2-D matrix")
        self.in_shape = tuple(in_shape)
        if matrix.shape[1] != int(np.prod(self.in_shape)):
            raise ValueError(
                f"A has {matrix.shape[1]} columns, expected {int(np.prod(self.in_shape))}"
            )
        self.matrix = matrix
        self.out_shape = (matrix.shape[0],)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != self.in_shape:
            raise ValueError(f"x has shape {x.shape}, expected {self.in_shape}")
        return self.matrix @ x.reshape(-1, order="F")

    def adjoint(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != self.out_shape:
            raise ValueError(f"w has shape {w.shape}, expected {self.out_shape}")
        return (self.matrix.T @ w).reshape(self.in_shape, order="F")


def operator_norm(linmap, iters: int = 50, tol: float = 1e-10) -> float:
    """Largest singular value of the map, by power iteration on A^T A.

    The identity map short-circuits to exactly 1.0.
    """
    if isinstance(linmap, IdentityMap):
        return 1.0
    rng = np.random.default_rng(0)  # fixed start keeps the result deterministic
    x = rng.standard_normal(linmap.in_shape)
    nx = np.linalg.norm(x.ravel())
    if nx == 0.0:
        return 0.0
    x = x / nx
    sigma = 0.0
    for _ in range(iters):
        w = linmap.apply(x)
        new_sigma = float(np.linalg.norm(np.asarray(w).ravel()))
        if new_sigma == 0.0:
            return 0.0
        x = linmap.adjoint(w)
        nx = float(np.linalg.norm(np.asarray(x).ravel()))
        if nx == 0.0:
            return new_sigma
        x = x / nx
        if abs(new_sigma - sigma) <= tol * max(1.0, new_sigma):
            return new_sigma
        sigma = new_sigma
    return sigma


# ---------------------------------------------------------------------------
# smooth part F: per-sample oracles


class SpcaOracle:
    """Projection-residual loss for sparse PCA.

    Samples are the columns z_i of an n x m data matrix. The per-sample value
    is ||z||^2 - ||X^T z||^2, which equals the reconstruction error
    ||z - X X^T z||^2 whenever X has orthonormal columns, and its ambient
    gradient is -2 z z^T X. Batches average; so does the full pass.
    """

    def __init__(self, data):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] < 1:
            raise ValueError("SPCA data must be an n x m matrix with m >= 1")
        if not np.isfinite(data).all():
            raise ValueError("SPCA data contains NaN or Inf")
        self.data = data
        self._col_sq = (data * data).sum(axis=0)

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def batch_value(self, x, idx) -> float:
        cols = self.data[:, idx]
        proj = x.T @ cols
        return float(np.mean(self._col_sq[idx] - (proj * proj).sum(axis=0)))

    def batch_grad(self, x, idx) -> np.ndarray:
        cols = self.data[:, idx]
        return cols @ (cols.T @ x) * (-2.0 / len(idx))

    def full_value(self, x) -> float:
        proj = x.T @ self.data
        return float(np.mean(self._col_sq - (proj * proj).sum(axis=0)))

    def full_grad(self, x) -> np.ndarray:
        return self.data @ (self.data.T @ x) * (-2.0 / self.n_samples)


def _sigmoid(t: np.ndarray) -> np.ndarray:
    # branch form: never exponentiates a large positive argument
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


class SigmoidMarginOracle:
    """Squared sigmoid margin loss (1 - sigmoid(b * a^T x))^2 with labels b = +-1."""

    def __init__(self, features, labels):
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels, dtype=float)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValueError("features must be an N x m matrix with N >= 1")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be a vector matching the number of rows")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("labels must be +-1")
        if not np.isfinite(features).all():
            raise ValueError("features contain NaN or Inf")
        self.features = features
        self.labels = labels

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    def _loss(self, x, rows, labs):
        s = _sigmoid(labs * (rows @ x))
        return s, (1.0 - s)

    def batch_value(self, x, idx) -> float:
        _, miss = self._loss(x, self.features[idx], self.labels[idx])
        return float(np.mean(miss * miss))

    def batch_grad(self, x, idx) -> np.ndarray:
        rows = self.features[idx]
        labs = self.labels[idx]
        s, miss = self._loss(x, rows, labs)
        coef = -2.0 * s * miss * miss * labs / len(idx)
        return rows.T @ coef

    def full_value(self, x) -> float:
        _, miss = self._loss(x, self.features, self.labels)
        return float(np.mean(miss * miss))

    def full_grad(self, x) -> np.ndarray:
        s, miss = self._loss(x, self.features, self.labels)
        coef = -2.0 * s * miss * miss * self.labels / self.n_samples
        return self.features.T @ coef


# ---------------------------------------------------------------------------
# the assembled problem


@dataclass
class CompositeProblem:
    """min F(x) + g(A x) with x on ``manifold``.

    ``a_norm`` (the spectral norm of A, needed by diagnostics) is computed
    once at construction.
    """

    manifold: Sphere | Stiefel
    oracle: SpcaOracle | SigmoidMarginOracle
    penalty: L1Penalty | ZeroPenalty
    linmap: IdentityMap | DenseMap
    a_norm: float = field(default=0.0)

    def __post_init__(self):
        if tuple(self.linmap.in_shape) != tuple(self.manifold.ambient_shape):
            raise ValueError("linear map input shape must match the manifold ambient shape")
        self.a_norm = operator_norm(self.linmap)

    @property
    def n_samples(self) -> int:
        return self.oracle.n_samples

    def smooth_value(self, x) -> float:
        """F(x), the mean per-sample loss over the whole dataset."""
        return self.oracle.full_value(np.asarray(x, dtype=float))

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self.smooth_value(x) + self.penalty.value(self.apply_A(x))

    def sample_euclidean_grad(self, x, batch) -> np.ndarray:
        """Mean ambient gradient over a batch of sample indices (with replacement)."""
        batch = np.asarray(batch)
        if batch.size == 0:
            raise ValueError("empty batch")
        if batch.min() < 0 or batch.max() >= self.n_samples:
            raise ValueError("batch indices out of range")
        return self.oracle.batch_grad(np.asarray(x, dtype=float), batch)

    def full_euclidean_grad(self, x) -> np.ndarray:
        return self.oracle.full_grad(np.asarray(x, dtype=float))

    def prox_g(self, v, rho: float) -> np.ndarray:
        if rho <= 0:
            raise ValueError("prox scale rho must be positive")
        return self.penalty.prox(np.asarray(v, dtype=float), rho)

    def dist_to_subdiff_g(self, y, w) -> float:
        y = np.asarray(y, dtype=float)
        w = np.asarray(w, dtype=float)
        if y.shape != w.shape:
            raise ValueError(f"shape mismatch: y {y.shape} vs w {w.shape}")
        return self.penalty.dist_to_subdiff(y, w)

    def apply_A(self, x) -> np.ndarray:
        return self.linmap.apply(x)

    def apply_At(self, w) -> np.ndarray:
        return self.linmap.adjoint(w)


def _penalty_for(sparsity: float) -> L1Penalty | ZeroPenalty:
    if sparsity < 0:
        raise ValueError("sparsity weight must be nonnegative")
    return L1Penalty(sparsity) if sparsity > 0 else ZeroPenalty()


def make_spca(data, sparsity: float, p: int) -> CompositeProblem:
    """Sparse PCA of an n x m data matrix (columns are samples) on St(n, p)."""
    oracle = SpcaOracle(data)
    manifold = Stiefel(oracle.data.shape[0], p)
    return CompositeProblem(
        manifold, oracle, _penalty_for(sparsity), IdentityMap(manifold.ambient_shape)
    )


def make_sphere_classifier(features, labels, sparsity: float) -> CompositeProblem:
    """Sparse binary classification with a unit-norm weight vector."""
    oracle = SigmoidMarginOracle(features, labels)
    manifold = Sphere(oracle.features.shape[1])
    return CompositeProblem(
        manifold, oracle, _penalty_for(sparsity), IdentityMap(manifold.ambient_shape)
    )
