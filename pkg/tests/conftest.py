"""Shared helpers: random pre-shapes, group elements, and brute-force oracles."""

import numpy as np
import pytest

from shapespaces.spaces import ShapeSpaceKind

ALL_KINDS = [
    ShapeSpaceKind.ROTATION,
    ShapeSpaceKind.REFLECTION,
    ShapeSpaceKind.REVERSE_LABELING_REFLECTION,
]


def random_preshape(rng, m=2, k=5):
    p = rng.standard_normal((m, k))
    p = p - p.mean(axis=1, keepdims=True)
    return p / np.linalg.norm(p)


def random_tangent(rng, p, norm=1.0):
    """Random tangent vector at p: centered and orthogonal to p."""
    v = rng.standard_normal(p.shape)
    v = v - v.mean(axis=1, keepdims=True)
    v = v - np.tensordot(v, p) * p
    return norm * v / np.linalg.norm(v)


def random_rotation(rng, m):
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q


def random_orthogonal(rng, m):
    q = random_rotation(rng, m)
    if rng.integers(2):
        q = q.copy()
        q[0] = -q[0]
    return q


def random_group_element(rng, kind, m):
    """Uniform-ish draw from the group of the given kind."""
    kind = ShapeSpaceKind.parse(kind)
    if kind is ShapeSpaceKind.ROTATION:
        return random_rotation(rng, m), False
    if kind is ShapeSpaceKind.REFLECTION:
        return random_orthogonal(rng, m), False
    return random_orthogonal(rng, m), bool(rng.integers(2))


def apply_element(rotation, relabel, c):
    out = c[:, ::-1] if relabel else c
    return rotation @ out


def brute_force_planar_distance(a, b, kind, n_grid=2000):
    """Grid minimization over explicit rotation matrices (independent oracle).

    Walks rotation angles on a uniform grid, optionally composing with the
    reflection diag(1, -1) and with landmark reversal, and evaluates the
    spherical distance for every candidate.  No singular value decomposition
    is involved anywhere.
    """
    kind = ShapeSpaceKind.parse(kind)
    thetas = np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False)
    cos, sin = np.cos(thetas), np.sin(thetas)
    rotations = np.empty((n_grid, 2, 2))
    rotations[:, 0, 0] = cos
    rotations[:, 0, 1] = -sin
    rotations[:, 1, 0] = sin
    rotations[:, 1, 1] = cos
    flip = np.diag([1.0, -1.0])
    branches = [b]
    if kind in (ShapeSpaceKind.REFLECTION, ShapeSpaceKind.REVERSE_LABELING_REFLECTION):
        branches.append(flip @ b)
    if kind is ShapeSpaceKind.REVERSE_LABELING_REFLECTION:
        branches.append(b[:, ::-1])
        branches.append(flip @ b[:, ::-1])
    best = -np.inf
    for candidate in branches:
        traces = np.einsum("gij,jk,ik->g", rotations, candidate, a)
        best = max(best, traces.max())
    return float(np.arccos(np.clip(best, -1.0, 1.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(1417)
