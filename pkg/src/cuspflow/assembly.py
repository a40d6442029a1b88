"""Manifold-level curvature, Laplacian, volume, and energy.

Global edge lengths induce a metric on every tetrahedron through its
slot-to-edge map.  The curvature along an edge is 2*pi minus the total
dihedral angle around it (extended angles, so it is defined for every
length vector).  The curvature Jacobian is assembled per tetrahedron as
-G J G^T with G the incidence matrix and J the block diagonal of the
single-tetrahedron angle Jacobians; it is symmetric negative
semi-definite with kernel Im(C^T), the change-of-decoration directions.

The energy whose gradient is minus the curvature is the total co-volume
minus 2*pi times the total edge length; it is C^1 and convex on all of
R^N, which is what lets the flow run straight through flat tetrahedra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tetra import (
    DegenerateTetrahedronError,
    classify,
    extended_angles,
    tet_covolume,
    tet_jacobian,
    tet_volume,
)
from .triangulation import CuspedTriangulation

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CurvatureState:
    """Curvature and energy data of one length vector.

    ``laplacian`` is filled only on request and only when every
    tetrahedron is nondegenerate (the curvature Jacobian is undefined
    otherwise).
    """

    K: np.ndarray
    total_volume: float
    energy: float
    degenerate_tets: int
    laplacian: np.ndarray | None = None


def _tet_lengths(tet, l):
    return l[np.asarray(tet.edges)]


def degenerate_tet_indices(T: CuspedTriangulation, l) -> list[int]:
    l = np.asarray(l, dtype=float)
    return [i for i, tet in enumerate(T.tets)
            if not classify(_tet_lengths(tet, l)).nondegenerate]


def ricci_curvature(T: CuspedTriangulation, l) -> np.ndarray:
    """Curvature vector only: 2*pi minus the angle sum around each edge."""
    l = np.asarray(l, dtype=float)
    K = np.full(T.num_edges, TWO_PI)
    for tet in T.tets:
        angles = extended_angles(_tet_lengths(tet, l))
        np.subtract.at(K, np.asarray(tet.edges), angles)
    return K


def curvature(T: CuspedTriangulation, l, *, with_laplacian: bool = False,
              lobachevsky_tol: float = 1e-12) -> CurvatureState:
    """Full curvature state: curvature, volume, energy, degeneracy count.

    With ``with_laplacian=True`` the curvature Jacobian is attached when
    (and only when) every tetrahedron is nondegenerate.
    """
    l = np.asarray(l, dtype=float)
    K = np.full(T.num_edges, TWO_PI)
    volume = 0.0
    covol = 0.0
    degenerate = 0
    for tet in T.tets:
        tl = _tet_lengths(tet, l)
        angles = extended_angles(tl)
        np.subtract.at(K, np.asarray(tet.edges), angles)
        if not classify(tl).nondegenerate:
            degenerate += 1
        volume += tet_volume(tl, lobachevsky_tol)
        covol += tet_covolume(tl, lobachevsky_tol)
    en = covol - TWO_PI * float(np.sum(l))
    lap = None
    if with_laplacian and degenerate == 0:
        lap = laplacian(T, l)
    return CurvatureState(K=K, total_volume=volume, energy=en,
                          degenerate_tets=degenerate, laplacian=lap)


def laplacian(T: CuspedTriangulation, l) -> np.ndarray:
    """Curvature Jacobian dK/dl, assembled tetrahedron by tetrahedron.

    Equals -G J G^T but is built by scattering each 6x6 block straight
    into the N x N result, so the incidence matrix is never
    materialized.  Raises DegenerateTetrahedronError (carrying the tet
    index) when any tetrahedron is flat at ``l``.
    """
    l = np.asarray(l, dtype=float)
    L = np.zeros((T.num_edges, T.num_edges))
    for i, tet in enumerate(T.tets):
        tl = _tet_lengths(tet, l)
        try:
            J6 = tet_jacobian(tl)
        except DegenerateTetrahedronError as exc:
            raise DegenerateTetrahedronError(
                f"tet {i} is degenerate ({classify(tl)}); curvature Jacobian "
                f"undefined", tet_index=i) from exc
        e = np.asarray(tet.edges)
        np.subtract.at(L, (e[:, None], e[None, :]), J6)
    return L


def energy(T: CuspedTriangulation, l, lobachevsky_tol: float = 1e-12) -> float:
    """Total co-volume minus 2*pi times the total edge length."""
    l = np.asarray(l, dtype=float)
    covol = sum(tet_covolume(_tet_lengths(tet, l), lobachevsky_tol) for tet in T.tets)
    return covol - TWO_PI * float(np.sum(l))


@dataclass(frozen=True)
class GradientCheckReport:
    max_rel_error: float
    max_abs_error: float
    fd_gradient: np.ndarray
    analytic_gradient: np.ndarray


def energy_gradient_check(T: CuspedTriangulation, l, step: float = 1e-6) -> GradientCheckReport:
    """Compare central differences of the energy against minus the curvature."""
    l = np.asarray(l, dtype=float)
    fd = np.zeros(T.num_edges)
    for i in range(T.num_edges):
        lp = l.copy()
        lm = l.copy()
        lp[i] += step
        lm[i] -= step
        fd[i] = (energy(T, lp) - energy(T, lm)) / (2.0 * step)
    analytic = -ricci_curvature(T, l)
    abs_err = float(np.max(np.abs(fd - analytic)))
    scale = max(1.0, float(np.max(np.abs(analytic))))
    return GradientCheckReport(max_rel_error=abs_err / scale, max_abs_error=abs_err,
                               fd_gradient=fd, analytic_gradient=analytic)
