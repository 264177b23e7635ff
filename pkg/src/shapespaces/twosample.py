"""Two-sample location tests for shape data: quantile and bootstrap calibrated.

Samples of pre-shapes are compared through tangent-space coordinates.  A base
point (a Fréchet mean) is chosen, every sample is optimally lifted to it,
logged, and expanded in an orthonormal basis of the horizontal space; the
resulting Euclidean rows feed a two-sample Hotelling T-squared statistic.

Four coordinate schemes are supported, differing in the base points and in
how the two groups are brought into a common frame:

  * pooled_tangent: both groups lifted at the pooled mean; group locations
    are the tangent row averages.
  * pooled_intrinsic: same frame, but group locations are the lifted group
    Fréchet means, and covariances are centered at those.
  * individual: each group lifted at its own mean; both group means are
    positioned against the pooled mean, and per-sample deviations are
    parallel transported into the pooled frame.
  * individual_asymmetric: the frame sits at the first group's mean; the
    second group's mean is positioned against it directly (no pooled mean).

Calibration is either the Hotelling T-squared quantile (through the F
distribution) or the two-round bootstrap (one calibration resample for the
covariance sum C, then B resamples for the quantile of the recentered
difference statistic).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.special import betainc

from .errors import (
    DimensionMismatchError,
    EmptySampleError,
    InvalidArgumentError,
    SingularCovarianceError,
)
from .frechet import frechet_mean, pooled_mean, resample_means
from .geometry import sphere_distance, sphere_log
from .spaces import ShapeSpaceKind, align_stack, isotropy_check

CONDITION_LIMIT = 1e12

# Mean residual requested by the coordinate preparation.  The statistic is
# sensitive to the base-point location at roughly stat/separation, so the
# default 1e-9 mean tolerance would cap statistic reproducibility near 1e-7;
# converging deeper keeps the group-action invariance of the statistic below
# 1e-8.  Concentrated data contracts fast, so the extra iterations are cheap.
MEAN_TOL = 1e-12

# Mean residual requested for the bootstrap resample means.  Their
# displacements enter the reference distribution at the resampling noise
# scale (1/sqrt of the group size at least), so iterating past 1e-9 buys
# nothing; every bootstrap path shares this constant, keeping a study
# replicate and a direct bootstrap_test call on identical numbers.
RESAMPLE_MEAN_TOL = 1e-9

VARIANTS = ("pooled_tangent", "pooled_intrinsic", "individual", "individual_asymmetric")


@dataclass(frozen=True)
class TangentCoordinates:
    """Horizontal-space coordinates of lifted samples at a base pre-shape.

    coords has one row per sample; nonunique counts samples whose optimal
    lift at the base was ambiguous.
    """

    base: np.ndarray
    basis: np.ndarray
    coords: np.ndarray
    nonunique: int = 0


@dataclass(frozen=True)
class TestOutcome:
    """Decision record of one two-sample test."""

    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    dof: tuple
    variant: str
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "dof": list(self.dof),
            "variant": self.variant,
            "warnings": list(self.warnings),
        }


def expected_dim(m, k):
    """Dimension of the manifold part: m(k-1) - 1 - m(m-1)/2 (2k-4 planar)."""
    return m * (k - 1) - 1 - m * (m - 1) // 2


def horizontal_basis(p, kind):
    """Orthonormal basis of the horizontal space at p.

    The vertical space is spanned by E_i p over the skew-symmetric generators
    E_i of the rotation group (the finite reversal factor contributes no
    directions); the horizontal space is the orthogonal complement inside the
    centered tangent space of the sphere.  Computed as the null space of the
    stacked constraint functionals, which yields a deterministic orthonormal
    basis.

    Returns an array of shape (d, m, k).
    """
    kind = ShapeSpaceKind.parse(kind)
    p = np.asarray(p, dtype=float)
    m, k = p.shape
    if not isotropy_check(p, kind):
        warnings.warn("horizontal basis requested at a point with symmetry", stacklevel=2)
    rows = []
    for a in range(m):
        block = np.zeros((m, k))
        block[a] = 1.0  # centering: each coordinate row must sum to zero
        rows.append(block.ravel())
    rows.append(p.ravel())  # sphere tangency
    for i in range(m):
        for j in range(i + 1, m):
            gen = np.zeros((m, m))
            gen[i, j], gen[j, i] = 1.0, -1.0
            rows.append((gen @ p).ravel())  # vertical directions
    basis = null_space(np.vstack(rows)).T.reshape(-1, m, k)
    d = expected_dim(m, k)
    if len(basis) != d:
        raise DimensionMismatchError(
            f"horizontal space has dimension {len(basis)}, expected {d}; "
            "the base point is likely rank deficient"
        )
    return basis


def _coords_of(logs, basis):
    flat = logs.reshape(len(logs), -1) if logs.ndim == 3 else logs.reshape(1, -1)
    return flat @ basis.reshape(len(basis), -1).T


def lift_to_coords(base, samples, kind):
    """Lift samples to the base point and expand their logs in the basis."""
    stack = np.asarray(samples, dtype=float)
    if stack.ndim != 3 or len(stack) == 0:
        raise EmptySampleError("need a nonempty stack of sample pre-shapes")
    base = np.asarray(base, dtype=float)
    basis = horizontal_basis(base, kind)
    res = align_stack(base, stack, kind)
    logs = _logs_at(base, res["aligned"], res["distance"])
    return TangentCoordinates(
        base=base,
        basis=basis,
        coords=_coords_of(logs, basis),
        nonunique=int(np.sum(~res["unique"])),
    )


def _logs_at(mu, aligned, distances):
    cos = np.cos(distances)
    residual = aligned - cos[:, None, None] * mu
    norms = np.linalg.norm(residual, axis=(1, 2))
    scale = np.where(norms > 1e-300, distances / np.maximum(norms, 1e-300), 0.0)
    return residual * scale[:, None, None]


def _transport_stack(p, q, vectors):
    """Parallel transport a stack of tangent vectors at p to q, vectorized."""
    theta = sphere_distance(p, q)
    if theta < 1e-15:
        return vectors.copy()
    direction = sphere_log(p, q) / theta
    along = np.tensordot(vectors, direction, axes=([1, 2], [0, 1]))
    rotated = np.cos(theta) * direction - np.sin(theta) * p
    return (
        vectors
        - along[:, None, None] * direction
        + along[:, None, None] * rotated
    )


def _pooled_covariance(x, y, mean_x, mean_y):
    n, m = len(x), len(y)
    dx = x - mean_x
    dy = y - mean_y
    cov_x = dx.T @ dx / n
    cov_y = dy.T @ dy / m
    return (n * cov_x + m * cov_y) / (n + m - 2)


def hotelling_t2(x, y, mean_x=None, mean_y=None):
    """Two-sample Hotelling T-squared statistic with pooled covariance.

    Means default to the tangent row averages; supplying intrinsic mean
    vectors switches the statistic (and the covariance centering) to the
    intrinsic form.

    Raises
    ------
    SingularCovarianceError
        When the pooled covariance has 2-norm condition number above 1e12.
        The statistic is not computed and no decision is substituted.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatchError(
            f"coordinate dimension mismatch: {x.shape[1]} vs {y.shape[1]}"
        )
    n, m = len(x), len(y)
    d = x.shape[1]
    if n + m - 2 < d:
        raise InvalidArgumentError(
            f"need n + m - 2 >= d for a rank-{d} pooled covariance, got n={n}, m={m}"
        )
    mean_x = x.mean(axis=0) if mean_x is None else np.asarray(mean_x, dtype=float)
    mean_y = y.mean(axis=0) if mean_y is None else np.asarray(mean_y, dtype=float)
    cov = _pooled_covariance(x, y, mean_x, mean_y)
    cond = np.linalg.cond(cov)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularCovarianceError(
            "pooled covariance is numerically singular (condition number > 1e12)"
        )
    delta = mean_x - mean_y
    return float(m * n / (m + n) * delta @ np.linalg.solve(cov, delta))


def _f_cdf(x, d1, d2):
    if x <= 0.0:
        return 0.0
    return float(betainc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2)))


def t2_quantile(d, k, alpha):
    """alpha-quantile of the Hotelling T-squared distribution T2(d, k).

    Uses T2(d, k) = (d k / (k - d + 1)) F(d, k - d + 1); the F quantile is
    found by growing a bracket and bisecting the regularized incomplete beta
    representation of the F distribution function to 1e-10.
    """
    if d < 1 or k < d:
        raise InvalidArgumentError(f"t2_quantile needs k >= d >= 1, got d={d}, k={k}")
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    d2 = k - d + 1
    lo, hi = 0.0, 1.0
    for _ in range(300):
        if _f_cdf(hi, d, d2) >= alpha:
            break
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if _f_cdf(mid, d, d2) < alpha:
            lo = mid
        else:
            hi = mid
    return d * k / (k - d + 1) * 0.5 * (lo + hi)


@dataclass(frozen=True)
class PreparedCoordinates:
    """Common-frame coordinates for one variant: rows plus group locations.

    base, basis, and kind record the frame itself so the bootstrap can
    position resample means in it.  mu_x and mu_y hold the group Fréchet
    mean pre-shapes under the intrinsic variants; pooled_tangent leaves
    them None because its bootstrap works on tangent row averages alone.
    """

    x: np.ndarray
    y: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    dim: int
    warnings: list
    base: np.ndarray = None
    basis: np.ndarray = None
    kind: ShapeSpaceKind = None
    mu_x: np.ndarray = None
    mu_y: np.ndarray = None


class _PrepCache:
    """Memoizes the mean computations shared between variant preparations.

    Each entry stores the computed object together with the warning notes
    its computation produced, so every variant that consumes the entry also
    inherits its warnings.
    """

    def __init__(self, w, z, kind):
        self.w, self.z, self.kind = w, z, kind
        self._entries = {}

    def _get(self, key, build):
        if key not in self._entries:
            notes = []
            self._entries[key] = (build(notes), notes)
        return self._entries[key]

    def take(self, key, build, notes):
        value, cached_notes = self._get(key, build)
        notes.extend(cached_notes)
        return value

    def pooled(self, notes):
        def build(fragment):
            res = pooled_mean(self.w, self.z, self.kind, tol=MEAN_TOL)
            if not res.converged:
                fragment.append(
                    f"pooled mean did not converge (residual {res.residual:.2e})"
                )
            if not isotropy_check(res.mean, self.kind):
                fragment.append("pooled mean lies near the singular stratum")
            return res.mean, horizontal_basis(res.mean, self.kind)

        return self.take("pooled", build, notes)

    def group_mean(self, which, notes):
        samples = self.w if which == "first" else self.z

        def build(fragment):
            return _mean_with_warnings(samples, self.kind, f"{which} group", fragment)

        return self.take(("mean", which), build, notes)


def _mean_with_warnings(samples, kind, label, notes):
    res = frechet_mean(samples, kind, tol=MEAN_TOL)
    if not res.converged:
        notes.append(f"{label} mean did not converge (residual {res.residual:.2e})")
    if res.unique_alignments < 1.0:
        notes.append(f"{label} mean saw non-unique alignments")
    return res.mean


def prepare_coordinates(w, z, kind, variant, cache=None):
    """Build the per-variant common-frame coordinates for both groups.

    A _PrepCache may be supplied to share the pooled and group means across
    several variant preparations of the same data (see prepare_all).
    """
    kind = ShapeSpaceKind.parse(kind)
    if variant not in VARIANTS:
        raise InvalidArgumentError(
            f"unknown variant {variant!r}; choose one of {VARIANTS}"
        )
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if w.ndim != 3 or z.ndim != 3 or len(w) == 0 or len(z) == 0:
        raise EmptySampleError("both groups need at least one pre-shape")
    if cache is None:
        cache = _PrepCache(w, z, kind)
    notes = []

    if variant in ("pooled_tangent", "pooled_intrinsic"):
        base, basis = cache.pooled(notes)
        x = _lift_rows(base, basis, w, kind, notes, "first")
        y = _lift_rows(base, basis, z, kind, notes, "second")
        if variant == "pooled_tangent":
            mean_x, mean_y = x.mean(axis=0), y.mean(axis=0)
            mu_w = mu_z = None
        else:
            mu_w = cache.group_mean("first", notes)
            mu_z = cache.group_mean("second", notes)
            mean_x = _positioned_mean_coords(base, basis, mu_w, kind, notes, "first")
            mean_y = _positioned_mean_coords(base, basis, mu_z, kind, notes, "second")
        return PreparedCoordinates(x, y, mean_x, mean_y, len(basis), notes,
                                   base=base, basis=basis, kind=kind,
                                   mu_x=mu_w, mu_y=mu_z)

    if variant == "individual":
        base, basis = cache.pooled(notes)
        mu_w = cache.group_mean("first", notes)
        mu_z = cache.group_mean("second", notes)
        x, mean_x = _group_in_frame(base, basis, mu_w, w, kind, notes, "first")
        y, mean_y = _group_in_frame(base, basis, mu_z, z, kind, notes, "second")
        return PreparedCoordinates(x, y, mean_x, mean_y, len(basis), notes,
                                   base=base, basis=basis, kind=kind,
                                   mu_x=mu_w, mu_y=mu_z)

    # individual_asymmetric: the frame sits at the first group's own mean
    mu_w = cache.group_mean("first", notes)
    basis = horizontal_basis(mu_w, kind)
    x = _lift_rows(mu_w, basis, w, kind, notes, "first")
    mean_x = np.zeros(x.shape[1])  # equilibrium at the group's own mean
    mu_z = cache.group_mean("second", notes)
    y, mean_y = _group_in_frame(mu_w, basis, mu_z, z, kind, notes, "second")
    return PreparedCoordinates(x, y, mean_x, mean_y, x.shape[1], notes,
                               base=mu_w, basis=basis, kind=kind,
                               mu_x=mu_w, mu_y=mu_z)


def prepare_all(w, z, kind, variants=VARIANTS):
    """Prepared coordinates for several variants with shared mean work.

    The pooled mean and the two group means are each computed once and
    reused, which matters inside simulation studies that evaluate all four
    variants on every replicate.
    """
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    cache = _PrepCache(w, z, ShapeSpaceKind.parse(kind))
    return {
        variant: prepare_coordinates(w, z, kind, variant, cache=cache)
        for variant in variants
    }


def _position_stack(base, basis, stack, kind):
    """Align a stack to the base and expand the logs in the given basis.

    Returns (coords, nonunique count); callers decide how to report the
    count.
    """
    res = align_stack(base, stack, kind)
    logs = _logs_at(base, res["aligned"], res["distance"])
    return _coords_of(logs, basis), int(np.sum(~res["unique"]))


def _lift_rows(base, basis, samples, kind, notes, label):
    """Align samples to the base and expand their logs in the given basis."""
    coords, count = _position_stack(base, basis, samples, kind)
    if count:
        notes.append(f"{count} non-unique lifts in the {label} group")
    return coords


def _positioned_mean_coords(base, basis, mu, kind, notes, label):
    res = align_stack(base, mu, kind)
    if not res["unique"]:
        notes.append(f"non-unique positioning of the {label} group mean")
    log = sphere_log(base, res["aligned"])
    return _coords_of(log, basis)[0]


def _group_in_frame(base, basis, mu, samples, kind, notes, label):
    """Lift samples at their own mean, then carry them into the base frame.

    The group mean is positioned optimally against the base; each sample's
    log at the positioned group mean is parallel transported along the
    connecting geodesic and offset by the log of the positioned mean itself,
    so the group's intrinsic location is exactly the offset's coordinates.
    """
    position = align_stack(base, mu, kind)
    if not position["unique"]:
        notes.append(f"non-unique positioning of the {label} group mean")
    mu_at_base = position["aligned"]
    res = align_stack(mu_at_base, samples, kind)
    count = int(np.sum(~res["unique"]))
    if count:
        notes.append(f"{count} non-unique lifts in the {label} group")
    logs = _logs_at(mu_at_base, res["aligned"], res["distance"])
    offset = sphere_log(base, mu_at_base)
    moved = _transport_stack(mu_at_base, base, logs) + offset
    coords = _coords_of(moved, basis)
    mean_coords = _coords_of(offset, basis)[0]
    return coords, mean_coords


def _outcome_from_quantile(prep, alpha, n, m, variant):
    stat = hotelling_t2(prep.x, prep.y, prep.mean_x, prep.mean_y)
    dof = (prep.dim, n + m - 2)
    critical = t2_quantile(prep.dim, n + m - 2, 1.0 - alpha)
    scale = (dof[1] - prep.dim + 1) / (prep.dim * dof[1])
    p_value = 1.0 - _f_cdf(stat * scale, prep.dim, dof[1] - prep.dim + 1)
    return TestOutcome(
        statistic=stat,
        critical_value=critical,
        p_value=p_value,
        reject=bool(stat > critical),
        dof=dof,
        variant=variant,
        warnings=prep.warnings,
    )


def test_pooled_lifting(w, z, kind, alpha=0.05):
    """Both groups lifted at the pooled mean; tangent-average statistic."""
    prep = prepare_coordinates(w, z, kind, "pooled_tangent")
    return _outcome_from_quantile(prep, alpha, len(w), len(z), "pooled_tangent")


def test_pooled_intrinsic(w, z, kind, alpha=0.05):
    """Pooled frame with lifted group Fréchet means as the location vectors."""
    prep = prepare_coordinates(w, z, kind, "pooled_intrinsic")
    return _outcome_from_quantile(prep, alpha, len(w), len(z), "pooled_intrinsic")


def test_individual_lifting(w, z, kind, alpha=0.05):
    """Own-mean lifting carried into the pooled frame by parallel transport."""
    prep = prepare_coordinates(w, z, kind, "individual")
    return _outcome_from_quantile(prep, alpha, len(w), len(z), "individual")


def test_individual_asymmetric(w, z, kind, alpha=0.05):
    """Frame at the first group's mean; second group positioned against it."""
    prep = prepare_coordinates(w, z, kind, "individual_asymmetric")
    return _outcome_from_quantile(prep, alpha, len(w), len(z), "individual_asymmetric")


def _bootstrap_draws(seed, n, m, n_boot):
    """The four index draws of one bootstrap run, derived from one seed.

    Stream order (first-group calibration, second-group calibration,
    first-group quantile block, second-group quantile block) is part of the
    reproducibility contract: a study replicate rebuilt from the same seed
    consumes the streams identically.
    """
    seed_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = [np.random.Generator(np.random.Philox(s)) for s in seed_seq.spawn(4)]
    return (
        streams[0].integers(0, n, size=n),
        streams[1].integers(0, m, size=m),
        streams[2].integers(0, n, size=(n_boot, n)),
        streams[3].integers(0, m, size=(n_boot, m)),
    )


def _star_mean_stacks(w, z, prep, res_x, res_y, notes=None):
    """Intrinsic means of every quantile-round resample, one stack per group.

    Warm starts at the observed group means: a resample of a concentrated
    group lands within O(1/sqrt(n)) of its own mean, inside the fixed-point
    contraction region.  The stacks depend only on the data, the kind, the
    observed means, and the index draws, so the three intrinsic variants of
    one replicate (which share all of those) can share the stacks.
    """
    means_x, conv_x = resample_means(w, res_x, prep.kind, init=prep.mu_x, tol=RESAMPLE_MEAN_TOL)
    means_y, conv_y = resample_means(z, res_y, prep.kind, init=prep.mu_y, tol=RESAMPLE_MEAN_TOL)
    if notes is not None:
        stray = int(np.sum(~conv_x)) + int(np.sum(~conv_y))
        if stray:
            notes.append(f"{stray} resample means did not converge")
    return means_x, means_y


def _bootstrap_core(prep, w, z, alpha, n_boot, seed, star_means=None, notes=None):
    """Two-round bootstrap behind bootstrap_test and the study runner.

    Round 1 fixes the covariance sum C from one calibration resample per
    group, deviations taken around the observed group locations.  Round 2
    recenters B resample locations at the observed ones: tangent row
    averages under pooled_tangent, intrinsic means of each resample under
    the intrinsic variants, positioned in the variant's frame.  star_means
    lets a caller that evaluates several intrinsic variants on identical
    draws (the study runner) reuse one _star_mean_stacks result; it is
    ignored under pooled_tangent.
    """
    n, m = len(w), len(z)
    idx_x, idx_y, res_x, res_y = _bootstrap_draws(seed, n, m, n_boot)
    x, y = prep.x, prep.y
    mean_x, mean_y = prep.mean_x, prep.mean_y

    # round 1: one calibration resample per group fixes the covariance sum C
    dx = x[idx_x] - mean_x
    dy = y[idx_y] - mean_y
    c = dx.T @ dx / n + dy.T @ dy / m
    cond = np.linalg.cond(c)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularCovarianceError(
            "bootstrap covariance sum is numerically singular (condition number > 1e12)"
        )

    # round 2: B recentered location differences give the reference distribution
    if prep.mu_x is None:
        star_x = x[res_x].mean(axis=1)
        star_y = y[res_y].mean(axis=1)
    else:
        if star_means is None:
            star_means = _star_mean_stacks(w, z, prep, res_x, res_y, notes)
        star_x, stray_x = _position_stack(prep.base, prep.basis, star_means[0], prep.kind)
        star_y, stray_y = _position_stack(prep.base, prep.basis, star_means[1], prep.kind)
        if notes is not None and stray_x + stray_y:
            notes.append(
                f"{stray_x + stray_y} non-unique positionings of resample means"
            )
    diffs = (star_x - mean_x) - (star_y - mean_y)
    solved = np.linalg.solve(c, diffs.T).T
    stats = np.einsum("bd,bd->b", diffs, solved)

    delta = mean_x - mean_y
    observed = float(delta @ np.linalg.solve(c, delta))
    order = np.sort(stats)
    critical = float(order[math.ceil((1.0 - alpha) * n_boot) - 1])
    p_value = float(np.mean(stats >= observed))
    return observed, critical, p_value


def bootstrap_test(w, z, kind, alpha=0.05, B=1000, variant="pooled_intrinsic", seed=0):
    """Bootstrap-calibrated two-sample test in the chosen coordinate scheme.

    The reference distribution recenters B resample locations at the
    observed ones.  Under pooled_tangent a resample's location is its
    tangent row average; under the intrinsic variants it is the Fréchet
    mean of the resample, positioned in the variant's frame, so the
    calibration mirrors how the observed statistic itself is built.

    Parameters
    ----------
    B : int
        Number of second-round resamples; at least 200 is required and at
        least 1000 recommended.
    variant : str
        One of pooled_tangent, pooled_intrinsic, individual,
        individual_asymmetric.
    seed : int or numpy.random.SeedSequence
        Master seed; resampling streams are split off deterministically, so
        results are reproducible bit for bit.
    """
    if B < 200:
        raise InvalidArgumentError(f"bootstrap needs B >= 200 resamples, got {B}")
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    prep = prepare_coordinates(w, z, kind, variant)
    notes = list(prep.warnings)
    if B < 1000:
        warnings.warn("bootstrap with B < 1000 resamples is noisy", stacklevel=2)
        notes.append(f"B={B} below the recommended 1000")
    observed, critical, p_value = _bootstrap_core(prep, w, z, alpha, B, seed, notes=notes)
    return TestOutcome(
        statistic=observed,
        critical_value=critical,
        p_value=p_value,
        reject=bool(observed > critical),
        dof=(prep.dim, len(w) + len(z) - 2),
        variant=variant,
        warnings=notes,
    )
