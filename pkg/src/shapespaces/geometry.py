"""Configuration preprocessing and the geometry of the centered pre-shape sphere.

A configuration is an m-by-k real matrix whose columns are landmarks
(2 <= m < k).  Centering removes translation, scaling to unit Frobenius norm
removes size, and the result lives on the centered pre-shape sphere: the set
of m-by-k matrices with zero row sums and Frobenius norm one.  This module
provides the sphere's intrinsic primitives (distance, exp, log, parallel
transport); the quotient group actions live in :mod:`shapespaces.spaces`.
"""

import numpy as np

from .errors import (
    AntipodalPointError,
    DegenerateConfigurationError,
    DimensionMismatchError,
    InvalidArgumentError,
)

# Tolerances for the pre-shape invariants (centered / unit norm) and tangency.
CENTER_TOL = 1e-12
UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10

# Antipodal guard for the spherical logarithm and transport.
ANTIPODAL_TOL = 1e-8


def as_configuration(c):
    """Coerce input to a float m-by-k matrix with 2 <= m < k.

    Parameters
    ----------
    c : array_like
        Landmark configuration, columns are landmarks.

    Returns
    -------
    ndarray
        A float copy of shape (m, k).
    """
    a = np.array(c, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatchError(
            f"configuration must be a 2-d matrix, got ndim={a.ndim}"
        )
    m, k = a.shape
    if m < 2 or k <= m:
        raise DimensionMismatchError(
            f"configuration needs 2 <= m < k, got shape {m}x{k}"
        )
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("configuration contains non-finite entries")
    return a


def center(c):
    """Subtract the mean landmark: c maps to c (I - (1/k) 1 1^T)."""
    a = as_configuration(c)
    return a - a.mean(axis=1, keepdims=True)


def helmert_submatrix(k):
    """Sub-Helmert matrix H_k of shape (k, k-1).

    Column j (1-based) carries j entries 1/sqrt(j(j+1)) followed by a single
    -j/sqrt(j(j+1)); columns are orthonormal and orthogonal to 1_k, so right
    multiplication removes the translation component of a configuration.

    >>> helmert_submatrix(2).ravel().round(8).tolist()
    [0.70710678, -0.70710678]
    """
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise InvalidArgumentError(f"helmert_submatrix needs integer k >= 2, got {k!r}")
    h = np.zeros((k, k - 1))
    for j in range(1, k):
        s = 1.0 / np.sqrt(j * (j + 1))
        h[:j, j - 1] = s
        h[j, j - 1] = -j * s
    return h


def helmertize(c):
    """Right-multiply by the sub-Helmert matrix: A maps to A H_k.

    The result is m-by-(k-1); on centered configurations this is a linear
    isometry, and c H_k H_k^T recovers center(c).
    """
    a = as_configuration(c)
    return a @ helmert_submatrix(a.shape[1])


def to_preshape(c):
    """Center and scale a configuration to unit Frobenius norm.

    Raises
    ------
    DegenerateConfigurationError
        If all landmarks coincide, i.e. the centered matrix has (relative)
        norm below 1e-12 and no pre-shape exists.
    """
    a = center(c)
    nrm = np.linalg.norm(a)
    scale = np.linalg.norm(np.asarray(c, dtype=float))
    if nrm < 1e-12 * max(scale, 1e-300):
        raise DegenerateConfigurationError(
            "all landmarks coincide; configuration lies in the diagonal orbit"
        )
    return a / nrm


def is_preshape(p, tol=UNIT_TOL):
    """True if p satisfies the pre-shape invariants (centered, unit norm)."""
    a = np.asarray(p, dtype=float)
    if a.ndim != 2:
        return False
    centered = np.max(np.abs(a.sum(axis=1))) <= CENTER_TOL * max(1.0, np.abs(a).max())
    unit = abs(np.linalg.norm(a) - 1.0) <= tol
    return bool(centered and unit)


def check_preshape(p):
    """Validate the pre-shape invariants, returning the array."""
    a = as_configuration(p)
    if not is_preshape(a):
        raise InvalidArgumentError(
            "matrix is not a pre-shape (must be centered with unit Frobenius norm)"
        )
    return a


def check_tangent(p, v):
    """Validate that v is tangent to the pre-shape sphere at p."""
    a = np.asarray(v, dtype=float)
    if a.shape != np.shape(p):
        raise DimensionMismatchError(
            f"tangent vector shape {a.shape} does not match base point {np.shape(p)}"
        )
    if abs(float(np.tensordot(p, a))) > TANGENT_TOL * max(1.0, np.linalg.norm(a)):
        raise InvalidArgumentError("vector is not tangent at the base point")
    return a


def sphere_distance(a, b):
    """Spherical distance arccos tr(A^T B), clamped into [0, pi]."""
    inner = float(np.tensordot(a, b))
    return float(np.arccos(np.clip(inner, -1.0, 1.0)))


def sphere_exp(p, v):
    """Exponential map of the unit sphere: cos(|v|) p + sin(|v|) v/|v|."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    if theta == 0.0:
        return p.copy()
    out = np.cos(theta) * p + np.sin(theta) * (v / theta)
    # renormalize to absorb the rounding drift of the trig evaluation
    return out / np.linalg.norm(out)


def sphere_log(p, q):
    """Inverse of sphere_exp at p.

    Returns the tangent vector of norm sphere_distance(p, q) pointing along
    the minimizing great circle from p to q.

    Raises
    ------
    AntipodalPointError
        If q is (numerically) the antipode of p, where the log is undefined.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    theta = sphere_distance(p, q)
    if theta > np.pi - ANTIPODAL_TOL:
        raise AntipodalPointError(
            f"spherical log undefined near the antipode (distance {theta:.6f})"
        )
    if theta == 0.0:
        return np.zeros_like(p)
    residual = q - np.cos(theta) * p
    return theta * residual / np.linalg.norm(residual)


def parallel_transport(p, q, v):
    """Transport tangent vector v at p along the minimizing geodesic to q.

    The component of v along the geodesic direction is rotated with the
    geodesic; the orthogonal component is unchanged.  Norms and pairwise
    inner products are preserved.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    theta = sphere_distance(p, q)
    if theta > np.pi - ANTIPODAL_TOL:
        raise AntipodalPointError(
            f"parallel transport undefined near the antipode (distance {theta:.6f})"
        )
    if theta < 1e-15:
        return v.copy()
    direction = sphere_log(p, q) / theta
    along = float(np.tensordot(v, direction))
    rotated = np.cos(theta) * direction - np.sin(theta) * p
    return v - along * direction + along * rotated
