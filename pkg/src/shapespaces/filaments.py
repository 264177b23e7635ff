"""Filament polylines: resampling, landmark placement, and gap equalization.

A buckle's five landmarks:

  1, 5  endpoints of the vertex pair maximizing (chord length over arc
        length) times the fourth root of the largest perpendicular
        deviation from the chord,
  3     the vertex realizing that largest deviation,
  2     the vertex between 1 and 3 furthest from the line through 1 and 3,
  4     the vertex between 3 and 5 furthest from the line through 5 and 3,

followed by a pass that nudges landmarks 2, 3, 4 along the curve to even
out the four arc-length gaps under a per-landmark shift budget.

The rules for landmarks 2 and 4 are mirror images of each other, so
reversing a polyline reverses the landmark sequence index-for-index (on
tie-free curves).  That covariance is what makes reverse-labeling shape
quotients the right model downstream for curves with no canonical
orientation, and it is the reason landmark 2 measures deviation from the
secant through landmarks 1 and 3 rather than from a line tied to the
overall chord, which would break the symmetry.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateChordError,
    DimensionMismatchError,
    InvalidArgumentError,
    TooFewPointsError,
)
from .io import read_polylines


@dataclass(frozen=True)
class Polyline:
    """Planar curve trace: ordered vertices plus cumulative arc length.

    points is an (N, 2) array with N >= 5; consecutive vertices must be
    distinct so the cumulative arc length is strictly increasing.
    """

    points: np.ndarray
    arclength: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2:
            raise DimensionMismatchError(
                f"polyline vertices must form an (N, 2) array, got {points.shape}"
            )
        if len(points) < 5:
            raise TooFewPointsError(
                f"a polyline needs at least 5 vertices, got {len(points)}"
            )
        steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
        if np.any(steps == 0.0):
            first = int(np.argmax(steps == 0.0))
            raise InvalidArgumentError(
                f"consecutive vertices {first} and {first + 1} coincide"
            )
        object.__setattr__(self, "points", points)
        object.__setattr__(
            self, "arclength", np.concatenate([[0.0], np.cumsum(steps)])
        )

    @property
    def length(self):
        return float(self.arclength[-1])

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class LandmarkSet:
    """Five landmark indices into a polyline and their coordinates.

    indices are strictly increasing along the curve; configuration holds
    the landmark coordinates as a 2-by-5 matrix (coordinate rows).
    """

    indices: tuple
    configuration: np.ndarray

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if len(indices) != 5 or any(b <= a for a, b in zip(indices, indices[1:])):
            raise InvalidArgumentError(
                f"landmark indices must be 5 strictly increasing values, got {indices}"
            )
        configuration = np.asarray(self.configuration, dtype=float)
        if configuration.shape != (2, 5):
            raise DimensionMismatchError(
                f"landmark configuration must be 2-by-5, got {configuration.shape}"
            )
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "configuration", configuration)


def resample(polyline, step):
    """Arc-length-uniform copy of a polyline, endpoints preserved.

    The new vertices sit at equal arc-length increments of the source
    curve (the increment is the largest value <= step that divides the
    total length evenly), obtained by linear interpolation.
    """
    if step <= 0:
        raise InvalidArgumentError(f"resampling step must be positive, got {step}")
    total = polyline.length
    segments = max(1, int(math.ceil(total / step - 1e-12)))
    targets = np.linspace(0.0, total, segments + 1)
    coords = np.column_stack(
        [
            np.interp(targets, polyline.arclength, polyline.points[:, 0]),
            np.interp(targets, polyline.arclength, polyline.points[:, 1]),
        ]
    )
    if segments + 1 < 5:
        raise TooFewPointsError(
            f"step {step} leaves only {segments + 1} vertices; choose a finer step"
        )
    return Polyline(coords)


def _perpendicular_distances(points, anchor, other):
    """Distances from points to the line through anchor and other."""
    axis = other - anchor
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise DegenerateChordError("landmark line endpoints coincide")
    offsets = points - anchor
    return np.abs(axis[0] * offsets[:, 1] - axis[1] * offsets[:, 0]) / norm


def _best_pair(points, arclength):
    """Exhaustive chord search: (i, j, score) maximizing the buckle score.

    score(i, j) = (chord / arc length) * maxnd^(1/4) with maxnd the largest
    perpendicular distance of an interior vertex to the chord line.  Ties
    resolve to the lexicographically smallest (i, j).
    """
    n = len(points)
    best_score, best_i, best_j = -np.inf, -1, -1
    usable_chord = False
    for i in range(n - 2):
        rel = points - points[i]
        # cross[j, t] = rel_j x rel_t: twice the triangle area, so the
        # perpendicular distance of vertex t to chord (i, j) is |cross|/chord
        cross = np.outer(rel[:, 0], rel[:, 1]) - np.outer(rel[:, 1], rel[:, 0])
        deviation = np.abs(cross)
        deviation[:, : i + 1] = 0.0  # vertices at or before i are not interior
        peak = np.tril(deviation, k=-1).max(axis=1)  # max over t < j
        chord = np.linalg.norm(rel, axis=1)
        arc = arclength - arclength[i]
        scores = np.full(n, -np.inf)
        j_slice = slice(i + 2, n)
        valid = chord[j_slice] >= 1e-9
        if np.any(valid):
            usable_chord = True
        with np.errstate(invalid="ignore", divide="ignore"):
            candidate = (
                chord[j_slice] / arc[j_slice]
            ) * (peak[j_slice] / np.maximum(chord[j_slice], 1e-300)) ** 0.25
        scores[j_slice] = np.where(valid, candidate, -np.inf)
        j = int(np.argmax(scores))
        if scores[j] > best_score:
            best_score, best_i, best_j = float(scores[j]), i, j
    if not usable_chord:
        raise DegenerateChordError("every candidate chord is shorter than 1e-9")
    if best_score <= 0.0:
        raise DegenerateChordError(
            "no vertex deviates from any chord: the curve is straight"
        )
    return best_i, best_j, best_score


def place_landmarks(polyline):
    """The five buckle landmarks of a resampled polyline.

    Landmarks 1 and 5 are the endpoints of the best-scoring chord, landmark
    3 the interior vertex furthest from that chord, landmark 2 the vertex
    between 1 and 3 furthest from the line through 1 and 3, landmark 4 the
    vertex between 3 and 5 furthest from the line through 5 and 3.

    Raises TooFewPointsError below 20 vertices and DegenerateChordError
    when no usable chord exists (straight or collapsed curves) or when a
    landmark interval contains no interior vertex to choose from.
    """
    points = polyline.points
    if len(points) < 20:
        raise TooFewPointsError(
            f"landmark placement needs at least 20 vertices, got {len(points)}"
        )
    i1, i5, _ = _best_pair(points, polyline.arclength)
    inner = np.arange(i1 + 1, i5)
    deviations = _perpendicular_distances(points[inner], points[i1], points[i5])
    i3 = int(inner[np.argmax(deviations)])
    if i3 == i1 + 1 or i3 == i5 - 1:
        raise DegenerateChordError(
            "the deepest vertex touches a chord endpoint; no room for landmarks 2 and 4"
        )
    left = np.arange(i1 + 1, i3)
    i2 = int(left[np.argmax(_perpendicular_distances(points[left], points[i1], points[i3]))])
    right = np.arange(i3 + 1, i5)
    i4 = int(right[np.argmax(_perpendicular_distances(points[right], points[i5], points[i3]))])
    indices = (i1, i2, i3, i4, i5)
    return LandmarkSet(indices=indices, configuration=points[list(indices)].T)


def _gap_objective(positions, target):
    gaps = np.diff(positions)
    return float(np.sum((gaps - target) ** 2))


def equalize(landmarks, polyline, max_shift=0.15):
    """Even out landmark gaps by sliding landmarks 2, 3, 4 along the curve.

    Minimizes the sum of squared deviations of the four arc-length gaps
    from a quarter of the landmark span, by coordinate descent over vertex
    indices.  Landmarks 1 and 5 stay fixed; each movable landmark may shift
    at most max_shift times the span from its starting position, and the
    ordering is preserved.  The objective never increases.
    """
    if max_shift < 0:
        raise InvalidArgumentError(f"max_shift must be >= 0, got {max_shift}")
    s = polyline.arclength
    indices = list(landmarks.indices)
    if indices[4] >= len(polyline):
        raise InvalidArgumentError("landmark indices fall outside the polyline")
    span = s[indices[4]] - s[indices[0]]
    target = span / 4.0
    budget = max_shift * span
    origin = [s[i] for i in indices]

    def objective(idx):
        return _gap_objective(s[idx], target)

    current = objective(indices)
    for _ in range(100):  # coordinate descent sweeps; each accepted move improves
        moved = False
        for pos in (1, 2, 3):
            lo, hi = indices[pos - 1], indices[pos + 1]
            candidates = [
                v
                for v in range(lo + 1, hi)
                if abs(s[v] - origin[pos]) <= budget
            ]
            best_v, best_val = indices[pos], current
            for v in candidates:
                trial = indices.copy()
                trial[pos] = v
                val = objective(trial)
                if val < best_val:
                    best_v, best_val = v, val
            if best_v != indices[pos]:
                indices[pos] = best_v
                current = best_val
                moved = True
        if not moved:
            break
    return LandmarkSet(
        indices=tuple(indices), configuration=polyline.points[indices].T
    )


def ingest_polylines(path):
    """Read polylines from a curve_id,x,y CSV or a JSON array of curves.

    Curves with fewer than 5 points are skipped with a warning; malformed
    rows raise with their line number; an empty file yields an empty list.
    """
    out = []
    for index, vertices in enumerate(read_polylines(path)):
        if len(vertices) < 5:
            warnings.warn(
                f"curve {index}: fewer than 5 points, skipped", stacklevel=2
            )
            continue
        try:
            out.append(Polyline(vertices))
        except (InvalidArgumentError, DimensionMismatchError) as exc:
            raise type(exc)(f"curve {index}: {exc}") from exc
    return out


def extract_landmarks(polyline, step=None, max_shift=0.15):
    """Resample, place, and equalize; returns (LandmarkSet, audit dict).

    step defaults to 1/200 of the curve length.  The audit records the
    placement indices before and after equalization, the winning pair
    score, and the arc-length shifts applied to landmarks 2, 3, 4.
    """
    if step is None:
        step = polyline.length / 200.0
    resampled = resample(polyline, step)
    placed = place_landmarks(resampled)
    final = equalize(placed, resampled, max_shift)
    s = resampled.arclength
    i1, i5 = placed.indices[0], placed.indices[4]
    chord = float(np.linalg.norm(resampled.points[i5] - resampled.points[i1]))
    deepest = _perpendicular_distances(
        resampled.points[i1 + 1 : i5], resampled.points[i1], resampled.points[i5]
    ).max()
    score = (chord / (s[i5] - s[i1])) * deepest**0.25
    audit = {
        "step": float(step),
        "initial_indices": list(placed.indices),
        "indices": list(final.indices),
        "scores": {"pair_score": score},
        "shifts": [
            float(s[after] - s[before])
            for before, after in zip(placed.indices[1:4], final.indices[1:4])
        ],
        "span": float(s[i5] - s[i1]),
    }
    return final, audit
