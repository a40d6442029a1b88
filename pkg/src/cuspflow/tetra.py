"""Geometry of a single decorated ideal hyperbolic tetrahedron.

A decorated ideal tetrahedron is encoded by six signed real edge lengths
(distances between the horospheres at its ideal vertices), in the slot
order 12, 13, 14, 34, 24, 23.  All of its geometry is governed by the
three opposite-pair exponential sums

    a = exp((l12 + l34) / 2)
    b = exp((l13 + l24) / 2)
    c = exp((l14 + l23) / 2)

The tetrahedron is nondegenerate exactly when (a, b, c) satisfy all
three strict triangle inequalities, and the dihedral angle along an
edge then equals the Euclidean angle opposite the corresponding side in
the triangle with side lengths (a, b, c); opposite edges carry equal
angles and the six angles sum to 2*pi.  When one pair-sum reaches or
exceeds the sum of the other two the tetrahedron flattens, and the
angles extend continuously over all of R^6 by assigning pi to the long
pair and 0 to the other four.

Angle computations work with pair sums normalized by their maximum
(angles only depend on the ratios), so they are total functions of the
lengths and never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: slots forming the three opposite edge pairs 12|34, 13|24, 14|23
OPPOSITE_SLOT_PAIRS = ((0, 3), (1, 4), (2, 5))

PAIR_LABELS = ("12.34", "13.24", "14.23")

#: slots incident to each vertex; adding a constant to one group is a
#: change of decoration at that vertex and leaves all angles unchanged
VERTEX_SLOTS = ((0, 1, 2), (0, 4, 5), (1, 3, 5), (2, 3, 4))

NONDEGENERATE = "nondegenerate"
BOUNDARY = "boundary"
DEGENERATE = "degenerate"

#: largest allowed |(l_ij + l_kh) / 2| when the pair sums themselves are
#: requested; exp of anything larger is useless in double precision
MAX_PAIR_EXPONENT = 300.0


class DegenerateTetrahedronError(ValueError):
    """An operation that needs a nondegenerate tetrahedron got a flat one."""

    def __init__(self, msg, tet_index=None):
        super().__init__(msg)
        self.tet_index = tet_index


class OppositePairSums(NamedTuple):
    a: float
    b: float
    c: float


@dataclass(frozen=True)
class RegionClass:
    """Where a length vector sits: nondegenerate, or flat on one pair.

    ``pair`` indexes OPPOSITE_SLOT_PAIRS / PAIR_LABELS and is None for
    nondegenerate metrics.  At most one pair can be flat.
    """

    kind: str
    pair: int | None = None

    @property
    def nondegenerate(self) -> bool:
        return self.kind == NONDEGENERATE

    def __str__(self):
        if self.nondegenerate:
            return NONDEGENERATE
        return f"{self.kind}({PAIR_LABELS[self.pair]})"


def _as_lengths(l) -> np.ndarray:
    arr = np.asarray(l, dtype=float)
    if arr.shape != (6,):
        raise ValueError(f"expected 6 edge lengths, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("edge lengths must be finite")
    return arr


def _pair_exponents(l: np.ndarray) -> np.ndarray:
    return np.array([(l[0] + l[3]) / 2.0, (l[1] + l[4]) / 2.0, (l[2] + l[5]) / 2.0])


def pair_sums(l) -> OppositePairSums:
    """The three opposite-pair exponential sums (a, b, c).

    Raises ValueError when any exponent |l_ij + l_kh| / 2 exceeds
    MAX_PAIR_EXPONENT, the documented input bound.
    """
    e = _pair_exponents(_as_lengths(l))
    if np.max(np.abs(e)) > MAX_PAIR_EXPONENT:
        raise ValueError(
            f"pair-sum exponent {np.max(np.abs(e)):.3g} exceeds the supported "
            f"bound {MAX_PAIR_EXPONENT:g}")
    a, b, c = np.exp(e)
    return OppositePairSums(a, b, c)


def _normalized_pair_sums(l: np.ndarray) -> np.ndarray:
    e = _pair_exponents(l)
    return np.exp(e - e.max())


def _classify_sums(y: np.ndarray) -> RegionClass:
    for p in range(3):
        others = y[(p + 1) % 3] + y[(p + 2) % 3]
        if y[p] > others:
            return RegionClass(DEGENERATE, p)
        if y[p] == others:
            return RegionClass(BOUNDARY, p)
    return RegionClass(NONDEGENERATE)


def classify(l) -> RegionClass:
    """Classify a length vector by the triangle inequalities on (a, b, c).

    Comparisons are exact on the computed (max-normalized) pair sums; no
    epsilon band is applied.  Boundary points are reported separately
    but are treated like degenerate ones by the angle extension.
    """
    return _classify_sums(_normalized_pair_sums(_as_lengths(l)))


def _angles_from_sums(y: np.ndarray, region: RegionClass) -> np.ndarray:
    angles = np.zeros(6)
    if not region.nondegenerate:
        s0, s1 = OPPOSITE_SLOT_PAIRS[region.pair]
        angles[s0] = angles[s1] = math.pi
        return angles
    a, b, c = y
    cos_a = np.clip((b * b + c * c - a * a) / (2.0 * b * c), -1.0, 1.0)
    cos_b = np.clip((a * a + c * c - b * b) / (2.0 * a * c), -1.0, 1.0)
    cos_c = np.clip((a * a + b * b - c * c) / (2.0 * a * b), -1.0, 1.0)
    angles[0] = angles[3] = math.acos(cos_a)
    angles[1] = angles[4] = math.acos(cos_b)
    angles[2] = angles[5] = math.acos(cos_c)
    return angles


def extended_angles(l) -> np.ndarray:
    """Six dihedral angles, extended continuously to every length vector.

    Nondegenerate metrics get the Euclidean cosine-law angles of the
    pair-sum triangle (cosines clamped to [-1, 1] against rounding; the
    classification, not the clamp, decides the branch).  Flat metrics
    get pi on the long pair and 0 elsewhere.
    """
    arr = _as_lengths(l)
    y = _normalized_pair_sums(arr)
    return _angles_from_sums(y, _classify_sums(y))


def tet_jacobian(l) -> np.ndarray:
    """6x6 matrix of dihedral-angle derivatives with respect to lengths.

    With rows/columns in slot order, the matrix is (1/2) [[M, M], [M, M]]
    where M is the cotangent matrix of the three distinct angles::

        M = [[cot a13 + cot a14, -cot a14,           -cot a13          ],
             [-cot a14,           cot a12 + cot a14, -cot a12          ],
             [-cot a13,          -cot a12,            cot a12 + cot a13]]

    It is symmetric positive semi-definite with a 4-dimensional kernel
    spanned by the change-of-decoration directions.  Undefined on flat
    tetrahedra: those raise DegenerateTetrahedronError.
    """
    arr = _as_lengths(l)
    y = _normalized_pair_sums(arr)
    region = _classify_sums(y)
    if not region.nondegenerate:
        raise DegenerateTetrahedronError(
            f"angle Jacobian undefined on a {region} tetrahedron")
    a12, a13, a14 = _angles_from_sums(y, region)[:3]
    c12 = math.cos(a12) / math.sin(a12)
    c13 = math.cos(a13) / math.sin(a13)
    c14 = math.cos(a14) / math.sin(a14)
    M = np.array([
        [c13 + c14, -c14, -c13],
        [-c14, c12 + c14, -c12],
        [-c13, -c12, c12 + c13],
    ])
    return 0.5 * np.block([[M, M], [M, M]])


# zeta(2), zeta(4), ... computed on demand through the convolution
# recurrence (n + 1/2) zeta(2n) = sum_{k=1}^{n-1} zeta(2k) zeta(2n-2k)
_ZETA_EVEN = [math.pi ** 2 / 6.0]


def _zeta_even(m: int) -> float:
    while len(_ZETA_EVEN) < m:
        n = len(_ZETA_EVEN) + 1
        acc = sum(_ZETA_EVEN[k - 1] * _ZETA_EVEN[n - k - 1] for k in range(1, n))
        _ZETA_EVEN.append(acc / (n + 0.5))
    return _ZETA_EVEN[m - 1]


def lobachevsky(x: float, tol: float = 1e-12) -> float:
    """The Lobachevsky function -integral_0^x log|2 sin t| dt.

    The argument is reduced to [0, pi/2] using pi-periodicity and
    oddness, then evaluated by the power series

        L(t) = t (1 - log(2 t)) + t * sum_{m>=1} zeta(2m) / (m (2m+1)) (t/pi)^{2m}

    whose terms shrink at least geometrically with ratio (t/pi)^2 <= 1/4
    on the reduced range, giving a rigorous truncation bound.  ``tol``
    is the absolute target accuracy; values below the double-precision
    floor of 2e-16 are clamped to it.  For very large |x| the range
    reduction itself limits accuracy in the usual way.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    tol = max(tol, 2e-16)
    theta = math.fmod(float(x), math.pi)
    if theta < 0.0:
        theta += math.pi
    sign = 1.0
    if theta > math.pi / 2.0:
        theta = math.pi - theta
        sign = -1.0
    if theta == 0.0:
        return 0.0
    q = (theta / math.pi) ** 2
    series = 0.0
    m = 1
    while True:
        series += _zeta_even(m) / (m * (2 * m + 1)) * q ** m
        # zeta(2m+2) < zeta(2) bounds every remaining coefficient
        tail = _ZETA_EVEN[0] / ((m + 1) * (2 * m + 3)) * q ** (m + 1) / (1.0 - q)
        if theta * tail < tol or m >= 64:
            break
        m += 1
    return sign * theta * (1.0 - math.log(2.0 * theta) + series)


def _volume_from_angles(angles: np.ndarray, tol: float = 1e-12) -> float:
    return 0.5 * sum(lobachevsky(a, tol) for a in angles)


def tet_volume(l, tol: float = 1e-12) -> float:
    """Hyperbolic volume: half the Lobachevsky sum over the six angles.

    Flat tetrahedra have volume 0 since L(0) = L(pi) = 0; the regular
    ideal tetrahedron (all angles pi/3) is the maximizer.
    """
    return _volume_from_angles(extended_angles(l), tol)


def tet_covolume(l, tol: float = 1e-12) -> float:
    """Co-volume 2*vol + sum alpha_ij l_ij, with extended angles.

    This is the C^1 convex extension over all of R^6: on a flat region
    the volume vanishes and the value reduces to pi times the long
    pair's length sum, matching the boundary limit.  Its gradient in the
    lengths is the extended angle vector.
    """
    arr = _as_lengths(l)
    angles = extended_angles(arr)
    return 2.0 * _volume_from_angles(angles, tol) + float(angles @ arr)
