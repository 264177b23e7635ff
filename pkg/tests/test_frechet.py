"""Tests for Fréchet function evaluation and mean estimation.

Oracle note: the batched resample-mean estimator is checked against one
frechet_mean call per index row (the slow reference both share an
equilibrium equation with), compared on aligned representatives because
arccos cannot resolve orbit distances below ~2e-8.
"""

import numpy as np
import pytest

from shapespaces.errors import EmptySampleError, InvalidArgumentError
from shapespaces.frechet import frechet_function, frechet_mean, pooled_mean, resample_means
from shapespaces.geometry import sphere_distance, sphere_exp, to_preshape
from shapespaces.spaces import ShapeSpaceKind, isotropy_check, optimal_align, shape_distance

from conftest import ALL_KINDS, apply_element, random_group_element, random_preshape, random_tangent

RR = ShapeSpaceKind.REVERSE_LABELING_REFLECTION


def noisy_samples(rng, template, sd, n):
    configs = template[None] + sd * rng.standard_normal((n,) + template.shape)
    return np.stack([to_preshape(c) for c in configs])


def test_frechet_function_zero_at_common_point(rng):
    p = random_preshape(rng, 2, 5)
    assert frechet_function(p, [p, p, p], RR) < 1e-14


def test_frechet_function_single_sample(rng):
    q = random_preshape(rng, 2, 5)
    x = random_preshape(rng, 2, 5)
    assert frechet_function(q, [x], RR) == pytest.approx(shape_distance(q, x, RR) ** 2, abs=1e-12)


def test_frechet_function_group_invariant(rng):
    q = random_preshape(rng, 2, 5)
    samples = [random_preshape(rng, 2, 5) for _ in range(10)]
    for kind in ALL_KINDS:
        base = frechet_function(q, samples, kind)
        rot, rel = random_group_element(rng, kind, 2)
        moved = apply_element(rot, rel, q)
        assert frechet_function(moved, samples, kind) == pytest.approx(base, abs=1e-10)


def test_frechet_function_empty_raises():
    with pytest.raises(EmptySampleError):
        frechet_function(np.eye(2, 5), [], RR)


def test_mean_of_identical_samples(rng):
    p = random_preshape(rng, 2, 5)
    res = frechet_mean([p] * 7, RR)
    assert res.converged
    assert res.iterations == 1
    assert res.residual < 1e-14
    assert shape_distance(res.mean, p, RR) < 1e-7
    assert res.unique_alignments == 1.0


def test_mean_two_point_midpoint(rng):
    """With two optimally positioned samples the mean is the geodesic midpoint."""
    a = random_preshape(rng, 2, 5)
    b = optimal_align(a, random_preshape(rng, 2, 5), RR).aligned
    res = frechet_mean([a, b], RR)
    assert res.converged
    da = shape_distance(res.mean, a, RR)
    db = shape_distance(res.mean, b, RR)
    assert da == pytest.approx(db, abs=1e-8)
    assert da + db == pytest.approx(shape_distance(a, b, RR), abs=1e-7)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_mean_equilibrium_and_value(kind, rng):
    template = rng.standard_normal((2, 5)) * 0.8
    samples = noisy_samples(rng, template, 0.1, 60)
    res = frechet_mean(samples, kind)
    assert res.converged
    assert res.residual <= 1e-9
    assert res.iterations <= 200
    assert res.value == pytest.approx(frechet_function(res.mean, samples, kind), abs=0.0)
    assert 0.0 <= res.unique_alignments <= 1.0
    # minimizer beats every sample point as a candidate
    assert res.value <= min(frechet_function(s, samples, kind) for s in samples) + 1e-12


def test_mean_descent_from_explicit_init(rng):
    template = rng.standard_normal((2, 5))
    samples = noisy_samples(rng, template, 0.25, 40)
    init = samples[0]
    res = frechet_mean(samples, RR, init=init)
    assert res.value <= frechet_function(init, samples, RR) + 1e-15


def test_mean_equivariance(rng):
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.15, 30)
    for kind in ALL_KINDS:
        base = frechet_mean(samples, kind).mean
        rot, rel = random_group_element(rng, kind, 2)
        moved = np.stack([apply_element(rot, rel, s) for s in samples])
        transformed = frechet_mean(moved, kind).mean
        target = apply_element(rot, rel, base)
        # the arccos noise floor is ~2e-8 even for identical orbits, so the
        # orbit equality is asserted on the aligned representatives
        res = optimal_align(target, transformed, kind)
        assert res.distance < 1e-7
        assert np.allclose(res.aligned, target, atol=1e-8)


def test_mean_consistency_large_sample(rng):
    """Strong-law surrogate: the estimate approaches the template's shape."""
    template = np.array(
        [[-1.1, -0.4, 0.2, 0.7, 1.0], [0.3, -0.5, 0.6, -0.3, 0.4]]
    )
    samples = noisy_samples(rng, template, 0.1, 2000)
    res = frechet_mean(samples, RR)
    assert res.converged
    assert shape_distance(res.mean, to_preshape(template), RR) < 0.02
    assert isotropy_check(res.mean, RR)


def test_mean_nonconvergence_flag(rng):
    """A one-pass budget cannot converge from a deliberately bad init."""
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.3, 25)
    far = sphere_exp(samples[0], random_tangent(rng, samples[0], norm=1.2))
    far = far - far.mean(axis=1, keepdims=True)
    far = far / np.linalg.norm(far)
    res = frechet_mean(samples, RR, init=far, max_iter=1)
    assert not res.converged
    assert res.iterations == 1
    assert res.residual > 1e-9


def test_mean_empty_raises():
    with pytest.raises(EmptySampleError):
        frechet_mean([], RR)


def test_pooled_identical_groups(rng):
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.1, 20)
    alone = frechet_mean(samples, RR)
    both = pooled_mean(samples, samples, RR)
    assert shape_distance(alone.mean, both.mean, RR) < 1e-7


def test_pooled_minimizer_property(rng):
    w = noisy_samples(rng, rng.standard_normal((2, 5)), 0.12, 25)
    z = noisy_samples(rng, rng.standard_normal((2, 5)), 0.12, 15)
    pooled = pooled_mean(w, z, RR)
    stack = np.concatenate([w, z])
    for other in (frechet_mean(w, RR).mean, frechet_mean(z, RR).mean):
        assert pooled.value <= frechet_function(other, stack, RR) + 1e-12


def test_pooled_order_invariance(rng):
    w = noisy_samples(rng, rng.standard_normal((2, 5)), 0.1, 12)
    z = noisy_samples(rng, rng.standard_normal((2, 5)), 0.1, 18)
    ab = pooled_mean(w, z, RR).mean
    ba = pooled_mean(z, w, RR).mean
    assert shape_distance(ab, ba, RR) < 1e-10


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_resample_means_match_per_row_estimates(kind, rng):
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.2, 30)
    warm = frechet_mean(samples, kind).mean
    idx = rng.integers(0, 30, size=(25, 30))
    means, converged = resample_means(samples, idx, kind, init=warm)
    assert means.shape == (25, 2, 5)
    assert converged.all()
    for row, mean in zip(idx, means):
        ref = frechet_mean(samples[row], kind, init=warm)
        assert ref.converged
        res = optimal_align(ref.mean, mean, kind)
        assert np.max(np.abs(res.aligned - ref.mean)) < 1e-8


def test_resample_means_constant_rows_return_the_sample(rng):
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.15, 8)
    idx = np.repeat(np.arange(8)[:, None], 5, axis=1)  # row b repeats sample b
    means, converged = resample_means(samples, idx, RR, init=samples[0])
    assert converged.all()
    for b in range(8):
        assert shape_distance(means[b], samples[b], RR) < 1e-7


def test_resample_means_default_init_and_determinism(rng):
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.2, 20)
    idx = rng.integers(0, 20, size=(10, 20))
    first = resample_means(samples, idx, RR)
    second = resample_means(samples, idx, RR)
    assert np.array_equal(first[0], second[0])
    assert np.array_equal(first[1], second[1])


def test_resample_means_nonplanar_fallback(rng):
    samples = np.stack(
        [to_preshape(rng.standard_normal((3, 6))) for _ in range(12)]
    )
    warm = frechet_mean(samples, "reflection").mean
    idx = rng.integers(0, 12, size=(4, 12))
    means, converged = resample_means(samples, idx, "reflection", init=warm)
    assert means.shape == (4, 3, 6)
    for row, mean, flag in zip(idx, means, converged):
        ref = frechet_mean(samples[row], "reflection", init=warm)
        assert np.array_equal(mean, ref.mean)  # fallback is that exact call
        assert flag == ref.converged


def test_resample_means_rejects_bad_indices(rng):
    samples = noisy_samples(rng, rng.standard_normal((2, 5)), 0.1, 6)
    with pytest.raises(InvalidArgumentError):
        resample_means(samples, np.zeros((3, 6)), RR)  # float dtype
    with pytest.raises(InvalidArgumentError):
        resample_means(samples, np.array([0, 1, 2]), RR)  # not 2-d
    with pytest.raises(InvalidArgumentError):
        resample_means(samples, np.array([[0, 6]]), RR)  # out of range
    with pytest.raises(InvalidArgumentError):
        resample_means(samples, np.array([[-1, 0]]), RR)
