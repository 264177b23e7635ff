"""Group actions and quotient distances for the three shape space kinds.

The pre-shape sphere is acted on by SO(m) (rotation shapes), O(m) (reflection
shapes), or O(m) together with the landmark-order reversal L_k on the right
(reverse-labeling reflection shapes).  Optimal positioning over the orthogonal
group is the classical Procrustes singular value decomposition; the reversal
branch simply takes the better of the plain and relabeled alignments.

A stack-based core (`align_stack`) performs the SVD alignment for a whole
array of pre-shapes against one reference in a few vectorized numpy calls;
all scalar operations delegate to it so there is exactly one implementation.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import check_preshape, helmert_submatrix, sphere_log

UNIQUENESS_TOL = 1e-9


class ShapeSpaceKind(enum.Enum):
    """Which group is quotiented out of the pre-shape sphere."""

    ROTATION = "rotation"
    REFLECTION = "reflection"
    REVERSE_LABELING_REFLECTION = "reverse_labeling_reflection"

    @classmethod
    def parse(cls, name):
        """Accept enum members, full value strings, or the short alias 'rr'."""
        if isinstance(name, cls):
            return name
        text = str(name).strip().lower()
        if text in ("rr", "reverse", "reverse_labeling", "reverse-labeling-reflection"):
            return cls.REVERSE_LABELING_REFLECTION
        for member in cls:
            if text == member.value:
                return member
        raise InvalidArgumentError(f"unknown shape space kind {name!r}")


@dataclass(frozen=True)
class GroupElement:
    """One group element: an orthogonal matrix and an optional label reversal."""

    rotation: np.ndarray
    relabel: bool = False

    def apply(self, c):
        """Act on a configuration: R @ c, with columns reversed first if relabel."""
        c = np.asarray(c, dtype=float)
        if self.relabel:
            c = c[:, ::-1]
        return self.rotation @ c


@dataclass(frozen=True)
class AlignmentResult:
    """Optimal positioning of B relative to A.

    aligned is element.apply(B); distance = sphere_distance(A, aligned);
    unique is False when the maximizer is ambiguous (rank deficiency, an
    active determinant correction tie, or a plain/relabeled tie).
    """

    element: GroupElement
    aligned: np.ndarray
    distance: float
    unique: bool


def reverse_label(c):
    """Reverse the landmark order (right multiplication by L_k)."""
    return np.asarray(c, dtype=float)[:, ::-1].copy()


def helmert_relabel_conjugate(k):
    """The orthogonal matrix H_k^T L_k H_k carrying label reversal to R^(k-1).

    Reversal does not commute with Helmertizing; instead
    A L_k H_k = (A H_k)(H_k^T L_k H_k) for every configuration A.
    """
    h = helmert_submatrix(k)
    return h.T @ h[::-1]


def _normalize_svd_signs(u, vt):
    """Make the first nonzero entry of each left singular vector positive.

    Flips are applied in pairs (column of U, row of V^T) so U @ diag(s) @ V^T
    is unchanged; this pins a deterministic branch when singular vectors are
    only defined up to sign.
    """
    m = u.shape[-1]
    for j in range(m):
        col = u[..., :, j]
        nonzero = np.abs(col) > 1e-12
        first = np.argmax(nonzero, axis=-1)
        lead = np.take_along_axis(col, first[..., None], axis=-1)[..., 0]
        sign = np.where(lead < 0.0, -1.0, 1.0)
        u[..., :, j] *= sign[..., None]
        vt[..., j, :] *= sign[..., None]
    return u, vt


def _orthogonal_stack(a, bs, rotation_only):
    """Procrustes alignment of each slice of bs onto a over O(m) or SO(m).

    Returns (rotations, traces, unique) where rotations[i] @ bs[i] is the
    aligned representative and traces[i] the attained inner product.
    """
    m = bs[0].shape[-2] if isinstance(bs, (list, tuple)) else bs.shape[-2]
    cross = bs @ a.T
    u, s, vt = np.linalg.svd(cross)
    u, vt = _normalize_svd_signs(u, vt)
    unique = s[..., -1] >= UNIQUENESS_TOL
    if rotation_only:
        det = np.linalg.det(np.matmul(u, vt))
        # flip the smallest singular direction when the unconstrained
        # optimum is orientation reversing
        vt_corr = vt.copy()
        vt_corr[..., -1, :] *= det[..., None]
        rotations = np.swapaxes(np.matmul(u, vt_corr), -1, -2)
        traces = s[..., :-1].sum(axis=-1) + det * s[..., -1]
        tie = (det < 0) & (s[..., -2] - s[..., -1] < UNIQUENESS_TOL)
        unique = unique & ~tie
    else:
        rotations = np.swapaxes(np.matmul(u, vt), -1, -2)
        traces = s.sum(axis=-1)
    return rotations, traces, unique


def align_stack(a, bs, kind):
    """Align every pre-shape in the stack bs (n, m, k) to the reference a.

    Returns a dict of arrays: 'aligned' (n, m, k), 'distance' (n,),
    'relabel' (n,) bool, 'rotation' (n, m, m), 'unique' (n,) bool.
    For the reversal kind, exact plain/relabel ties keep the plain branch.
    """
    kind = ShapeSpaceKind.parse(kind)
    a = np.asarray(a, dtype=float)
    bs = np.asarray(bs, dtype=float)
    single = bs.ndim == 2
    if single:
        bs = bs[None]
    if kind is ShapeSpaceKind.REVERSE_LABELING_REFLECTION:
        rot0, tr0, uniq0 = _orthogonal_stack(a, bs, rotation_only=False)
        rot1, tr1, uniq1 = _orthogonal_stack(a, bs[:, :, ::-1], rotation_only=False)
        relabel = tr1 > tr0 + 0.0
        tie = np.abs(tr1 - tr0) < UNIQUENESS_TOL
        relabel = relabel & ~tie
        rotation = np.where(relabel[:, None, None], rot1, rot0)
        traces = np.where(relabel, tr1, tr0)
        unique = np.where(relabel, uniq1, uniq0) & ~tie
    else:
        rotation_only = kind is ShapeSpaceKind.ROTATION
        rotation, traces, unique = _orthogonal_stack(a, bs, rotation_only)
        relabel = np.zeros(len(bs), dtype=bool)
    oriented = np.where(relabel[:, None, None], bs[:, :, ::-1], bs)
    aligned = np.matmul(rotation, oriented)
    distance = np.arccos(np.clip(traces, -1.0, 1.0))
    out = {
        "aligned": aligned,
        "distance": distance,
        "relabel": relabel,
        "rotation": rotation,
        "unique": unique,
    }
    if single:
        out = {key: val[0] for key, val in out.items()}
    return out


def optimal_align(a, b, kind):
    """Optimally position pre-shape b relative to pre-shape a.

    Parameters
    ----------
    a, b : ndarray
        Pre-shapes of identical dimensions.
    kind : ShapeSpaceKind or str
        Group to minimize over.

    Returns
    -------
    AlignmentResult
    """
    a = check_preshape(a)
    b = check_preshape(b)
    res = align_stack(a, b, kind)
    element = GroupElement(rotation=res["rotation"], relabel=bool(res["relabel"]))
    return AlignmentResult(
        element=element,
        aligned=res["aligned"],
        distance=float(res["distance"]),
        unique=bool(res["unique"]),
    )


def shape_distance(a, b, kind):
    """Quotient distance between the orbits of two pre-shapes."""
    return optimal_align(a, b, kind).distance


def optimal_lift(p, b, kind):
    """Representative of the orbit [b] in optimal position to p.

    Identical computation to optimal_align(p, b, kind); when the optimal
    position is not unique the deterministic SVD branch (descending singular
    values, sign-pinned singular vectors, plain branch on reversal ties)
    serves as the measurable selection.
    """
    return optimal_align(p, b, kind)


def planar_shape_distance(a, b, kind):
    """Complex-arithmetic quotient distance for planar pre-shapes (m = 2).

    Independent of the SVD route: rotation alignment is the modulus of the
    Hermitian inner product of the complex rows, reflection adds the
    conjugated branch, reversal adds the label-reversed branches.  Used as a
    cross-check of shape_distance, never as the primary path.
    """
    kind = ShapeSpaceKind.parse(kind)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] != 2 or b.shape[0] != 2:
        raise InvalidArgumentError("complex distance path needs planar input (m = 2)")
    z = a[0] + 1j * a[1]
    w = b[0] + 1j * b[1]
    candidates = [abs(np.sum(z * w.conj()))]
    if kind in (ShapeSpaceKind.REFLECTION, ShapeSpaceKind.REVERSE_LABELING_REFLECTION):
        candidates.append(abs(np.sum(z * w)))
    if kind is ShapeSpaceKind.REVERSE_LABELING_REFLECTION:
        zr = z[::-1]
        candidates.append(abs(np.sum(zr * w.conj())))
        candidates.append(abs(np.sum(zr * w)))
    return float(np.arccos(np.clip(max(candidates), -1.0, 1.0)))


def isotropy_check(p, kind):
    """True when the orbit of p carries no symmetry (p lies in the manifold part).

    Full rank is required for every kind; reverse-labeling reflection shapes
    additionally must not be fixed by any (R, L_k) pair, which is detected by
    reflection-aligning p to its label reversal and checking for an exact
    orbit coincidence.
    """
    kind = ShapeSpaceKind.parse(kind)
    p = np.asarray(p, dtype=float)
    spectrum = np.linalg.svd(p, compute_uv=False)
    if spectrum[-1] <= 1e-9:
        return False
    if kind is ShapeSpaceKind.REVERSE_LABELING_REFLECTION:
        res = align_stack(p, reverse_label(p), ShapeSpaceKind.REFLECTION)
        coincides = float(res["distance"]) < 1e-9
        if coincides and np.max(np.abs(res["aligned"] - p)) < 1e-8:
            return False
    return True


def hopf(w):
    """Hopf fibration point of a unit complex 2-vector.

    Maps (z1, z2) to (2 Re(z1 conj(z2)), 2 Im(z1 conj(z2)), |z1|^2 - |z2|^2)
    on the unit 2-sphere; invariant under a common phase factor.

    >>> hopf([1.0, 0.0]).tolist()
    [0.0, 0.0, 1.0]
    """
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (2,):
        raise InvalidArgumentError(f"hopf expects a complex 2-vector, got shape {w.shape}")
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise InvalidArgumentError("hopf input must have unit norm")
    cross = w[0] * np.conj(w[1])
    return np.array([2.0 * cross.real, 2.0 * cross.imag, abs(w[0]) ** 2 - abs(w[1]) ** 2])


def hopf_from_preshape(p):
    """Hopf coordinates of a planar 3-landmark pre-shape.

    Helmertizes the complex row of p to a unit 2-vector and applies `hopf`.
    """
    p = check_preshape(p)
    if p.shape != (2, 3):
        raise InvalidArgumentError(
            f"Hopf chart needs a 2x3 pre-shape, got shape {p.shape}"
        )
    z = p[0] + 1j * p[1]
    w = z @ helmert_submatrix(3)
    return hopf(w)
