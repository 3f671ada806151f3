"""Sphere and Stiefel manifold primitives.

Points and tangent vectors are plain numpy arrays; nothing is wrapped. Each
manifold object bundles the operations the solvers need: tangent projection,
retraction, an isometric vector transport, and random points.

Shapes: ``Sphere(m)`` works on vectors of shape ``(m,)``; ``Stiefel(n, p)``
works on matrices of shape ``(n, p)``. Operations validate shapes and raise
``ValueError`` on mismatch. Validity tolerances are 1e-10 unless a caller
passes its own.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["Sphere", "Stiefel"]


def _as_shaped(name: str, arr, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


def _qr_pos(a: np.ndarray) -> np.ndarray:
    """Thin QR factor with diag(R) >= 0, which makes Q unique."""
    q, r = np.linalg.qr(a)
    s = np.sign(np.diag(r))
    s = np.where(s == 0.0, 1.0, s)
    return q * s


@dataclass(frozen=True)
class Sphere:
    """Unit sphere S^{m-1} embedded in R^m.

    The retraction is metric projection (normalize x + u) and the transport
    is exact parallel transport along the geodesic through the two points,
    a rotation in their plane, hence an exact isometry.
    """

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("sphere requires ambient dimension >= 2")

    @property
    def kind(self) -> str:
        return "sphere"

    @property
    def ambient_shape(self) -> tuple[int, ...]:
        return (self.dim,)

    def project_tangent(self, x, u) -> np.ndarray:
        """Remove the radial component: u - (x.u) x."""
        x = _as_shaped("x", x, self.ambient_shape)
        u = _as_shaped("u", u, self.ambient_shape)
        return u - (x @ u) * x

    def retract(self, x, u) -> np.ndarray:
        x = _as_shaped("x", x, self.ambient_shape)
        u = _as_shaped("u", u, self.ambient_shape)
        if not u.any():
            return x.copy()  # exact identity at u = 0, bit for bit
        w = x + u
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise ValueError("retraction undefined: x + u = 0")
        return w / nw

    def transport(self, x, y, v) -> np.ndarray:
        """Parallel-transport tangent v from x to y along the connecting geodesic."""
        x = _as_shaped("x", x, self.ambient_shape)
        y = _as_shaped("y", y, self.ambient_shape)
        v = _as_shaped("v", v, self.ambient_shape)
        if np.array_equal(x, y):
            return v.copy()
        c = float(x @ y)
        if 1.0 + c <= 1e-12:
            raise ValueError("transport undefined between (near-)antipodal points")
        return v - ((y @ v) / (1.0 + c)) * (x + y)

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def random_tangent(self, rng: np.random.Generator, x) -> np.ndarray:
        return self.project_tangent(x, rng.standard_normal(self.dim))

    def project_point(self, x) -> np.ndarray:
        x = _as_shaped("x", x, self.ambient_shape)
        return x / np.linalg.norm(x)

    def point_defect(self, x) -> float:
        return abs(float(np.linalg.norm(x)) - 1.0)

    def tangent_defect(self, x, u) -> float:
        return abs(float(np.asarray(x) @ np.asarray(u)))

    def check_point(self, x, tol: float = 1e-10) -> np.ndarray:
        x = _as_shaped("x", x, self.ambient_shape)
        if self.point_defect(x) > tol:
            raise ValueError(f"not a unit vector: | ||x|| - 1 | = {self.point_defect(x):.3e}")
        return x


@dataclass(frozen=True)
class Stiefel:
    """Stiefel manifold St(n, p): n x p matrices with orthonormal columns."""

    rows: int
    cols: int

    def __post_init__(self):
        if not self.rows >= self.cols >= 1:
            raise ValueError("Stiefel requires rows >= cols >= 1")

    @property
    def kind(self) -> str:
        return "stiefel"

    @property
    def ambient_shape(self) -> tuple[int, ...]:
        return (self.rows, self.cols)

    def project_tangent(self, x, u) -> np.ndarray:
        """Project U onto {V : X^T V + V^T X = 0}: U - X sym(X^T U)."""
        x = _as_shaped("x", x, self.ambient_shape)
        u = _as_shaped("u", u, self.ambient_shape)
        xtu = x.T @ u
        return u - x @ ((xtu + xtu.T) / 2.0)

    def retract(self, x, u) -> np.ndarray:
        """QR retraction: the sign-fixed Q-factor of X + U."""
        x = _as_shaped("x", x, self.ambient_shape)
        u = _as_shaped("u", u, self.ambient_shape)
        if not u.any():
            return x.copy()
        return _qr_pos(x + u)

    def transport(self, x, y, v) -> np.ndarray:
        """Carry v to T_y by projection, then restore the original norm.

        The rescaling makes the map norm-preserving, which the solver's dual
        analysis relies on; it costs exactness relative to the differentiated
        retraction. Degenerate case (projection numerically zero) returns the
        raw projection and warns.
        """
        x = _as_shaped("x", x, self.ambient_shape)
        y = _as_shaped("y", y, self.ambient_shape)
        v = _as_shaped("v", v, self.ambient_shape)
        if np.array_equal(x, y):
            return v.copy()
        w = self.project_tangent(y, v)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return w
        nw = float(np.linalg.norm(w))
        if nw < 1e-14 * nv:
            warnings.warn(
                "transport degenerate: projection onto the target tangent space is "
                "numerically zero; returning it unrescaled",
                RuntimeWarning,
            )
            return w
        return w * (nv / nw)

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        return _qr_pos(rng.standard_normal(self.ambient_shape))

    def random_tangent(self, rng: np.random.Generator, x) -> np.ndarray:
        return self.project_tangent(x, rng.standard_normal(self.ambient_shape))

    def project_point(self, x) -> np.ndarray:
        """Nearest-orthonormal cleanup used to cap drift over long runs."""
        x = _as_shaped("x", x, self.ambient_shape)
        return _qr_pos(x)

    def point_defect(self, x) -> float:
        x = np.asarray(x)
        gram = x.T @ x
        return float(np.linalg.norm(gram - np.eye(self.cols)))

    def tangent_defect(self, x, u) -> float:
        x = np.asarray(x)
        u = np.asarray(u)
        xtu = x.T @ u
        return float(np.linalg.norm(xtu + xtu.T))

    def check_point(self, x, tol: float = 1e-10) -> np.ndarray:
        x = _as_shaped("x", x, self.ambient_shape)
        if self.point_defect(x) > tol:
            raise ValueError(f"columns not orthonormal: ||X^T X - I|| = {self.point_defect(x):.3e}")
        return x
