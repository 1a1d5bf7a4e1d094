"""Geometry maps from the parametric unit square to the physical domain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from ..exceptions import AssemblyError

SINGULAR_TOL = 1e-12
DEFAULT_BEND = 0.15


@runtime_checkable
class GeometryMap(Protocol):
    """A smooth map ``F: [0, 1]^2 -> R^2`` with its Jacobian.

    ``jacobian`` returns an array of shape ``(N, 2, 2)`` with
    ``J[q, i, j] = dF_i / du_j`` at the ``N`` points.
    """

    @property
    def kind(self) -> str: ...

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray: ...

    def jacobian(self, u: np.ndarray, v: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, slots=True)
class IdentityMap:
    """The unit square itself."""

    @property
    def kind(self) -> str:
        return "identity-square"

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.stack([np.asarray(u, dtype=float), np.asarray(v, dtype=float)], axis=-1)

    def jacobian(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        size = np.asarray(u).size
        return np.broadcast_to(np.eye(2), (size, 2, 2)).copy()


@dataclass(frozen=True, slots=True)
class BentPatch:
    """One patch of the curved L-shaped domain.

    The parametric point is first reflected, ``(s_x u, s_y v)``, then bent by
    ``G(x, y) = (x + c x y^2, y + c y x^2)``. Coordinate axes are fixed by
    ``G``, so interfaces on them stay straight while the outer sides curve.
    """

    index: int
    flip: tuple[int, int] = (1, 1)
    bend: float = DEFAULT_BEND

    def __post_init__(self) -> None:
        if any(s not in (-1, 1) for s in self.flip):
            raise ValueError(f"flip entries must be +1 or -1, got {self.flip}")
        if not 0.0 <= self.bend < 0.5:
            raise ValueError(f"bend must lie in [0, 0.5), got {self.bend}")

    @property
    def kind(self) -> str:
        return f"curved-L-patch({self.index})"

    def _reflect(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.flip[0] * np.asarray(u, dtype=float), self.flip[1] * np.asarray(v, dtype=float)

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        x, y = self._reflect(u, v)
        c = self.bend
        return np.stack([x + c * x * y**2, y + c * y * x**2], axis=-1)

    def jacobian(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        x, y = self._reflect(u, v)
        x, y = x.ravel(), y.ravel()
        c = self.bend
        out = np.empty((x.size, 2, 2))
        out[:, 0, 0] = (1.0 + c * y**2) * self.flip[0]
        out[:, 0, 1] = 2.0 * c * x * y * self.flip[1]
        out[:, 1, 0] = 2.0 * c * x * y * self.flip[0]
        out[:, 1, 1] = (1.0 + c * x**2) * self.flip[1]
        return out


def curved_l_patches(bend: float = DEFAULT_BEND) -> tuple[BentPatch, BentPatch, BentPatch]:
    """The three patch maps; each sends the parametric origin to the reentrant corner."""
    return (
        BentPatch(1, (1, 1), bend),
        BentPatch(2, (-1, 1), bend),
        BentPatch(3, (-1, -1), bend),
    )


def jacobian_determinant(jac: np.ndarray) -> np.ndarray:
    return jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]


def checked_jacobian(
    geometry: GeometryMap, u: np.ndarray, v: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians and ``|det J|`` at the points; raise on a singular point."""
    jac = geometry.jacobian(u, v)
    det = jacobian_determinant(jac)
    bad = np.abs(det) < SINGULAR_TOL
    if np.any(bad):
        q = int(np.argmax(bad))
        raise AssemblyError(
            f"singular Jacobian of {geometry.kind} at "
            f"({np.ravel(u)[q]:.6g}, {np.ravel(v)[q]:.6g})"
        )
    return jac, np.abs(det)


def physical_gradients(jac: np.ndarray, grad_u: np.ndarray, grad_v: np.ndarray) -> np.ndarray:
    """Push parametric gradients forward: ``J^{-T} (d/du, d/dv)``.

    ``grad_u`` and ``grad_v`` have shape ``(nf, N)``; the result ``(nf, N, 2)``.
    """
    det = jacobian_determinant(jac)
    inv_t = np.empty_like(jac)
    inv_t[:, 0, 0] = jac[:, 1, 1] / det
    inv_t[:, 0, 1] = -jac[:, 1, 0] / det
    inv_t[:, 1, 0] = -jac[:, 0, 1] / det
    inv_t[:, 1, 1] = jac[:, 0, 0] / det
    param = np.stack([grad_u, grad_v], axis=-1)
    return np.einsum("qij,fqj->fqi", inv_t, param)
