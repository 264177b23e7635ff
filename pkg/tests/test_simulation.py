"""Tests for noisy sampling, template separation, and level/power studies.

Oracle notes
------------
* CLT bound: the average of 10^5 noisy copies of a template lands within
  3*sd/sqrt(10^5) of the template in every coordinate.
* Separation oracle: shape_distance recomputed on the returned pair must
  equal the requested target to 1e-6 (the documented tolerance).
* Seed-derivation oracle: a study replicate is reproduced through the
  public bootstrap_test API from the documented counter keys
  (size index, separation index, replicate, purpose tag), so the tallies
  of a whole study match a by-hand rerun exactly.
"""

import json
import warnings

import numpy as np
import pytest

from shapespaces.errors import (
    InvalidArgumentError,
    UnreachableDistanceError,
)
from shapespaces.geometry import center, to_preshape
from shapespaces.simulation import (
    DEFAULT_TEMPLATE_ARC,
    DEFAULT_TEMPLATE_BUCKLE,
    StudyConfig,
    StudyResult,
    emit_power_curve,
    emit_table,
    generate_sample,
    make_separated_templates,
    run_level_power_study,
)
from shapespaces.spaces import ShapeSpaceKind, shape_distance
from shapespaces.twosample import VARIANTS, bootstrap_test

from conftest import ALL_KINDS

TINY = dict(
    noise_sd=0.15,
    sizes=((12, 14),),
    replicates=6,
    bootstrap_B=250,
    seed=42,
)


class TestGenerateSample:
    def test_zero_noise_returns_template_copies(self):
        out = generate_sample(DEFAULT_TEMPLATE_ARC, 0.0, 4, 0)
        assert out.shape == (4, 2, 5)
        assert np.array_equal(out, np.broadcast_to(DEFAULT_TEMPLATE_ARC, out.shape))

    def test_negative_sd_rejected(self):
        with pytest.raises(InvalidArgumentError):
            generate_sample(DEFAULT_TEMPLATE_ARC, -0.1, 3, 0)

    def test_sample_mean_approaches_template(self):
        # averaging 10^5 draws cancels the noise to 3*sd/sqrt(10^5)
        sd = 0.2
        out = generate_sample(DEFAULT_TEMPLATE_ARC, sd, 100_000, 2024)
        bound = 3.0 * sd / np.sqrt(100_000.0)
        assert np.max(np.abs(out.mean(axis=0) - DEFAULT_TEMPLATE_ARC)) < bound

    def test_fixed_seed_reproducible(self):
        a = generate_sample(DEFAULT_TEMPLATE_ARC, 0.3, 7, 123)
        b = generate_sample(DEFAULT_TEMPLATE_ARC, 0.3, 7, 123)
        assert np.array_equal(a, b)

    def test_seed_sequence_and_generator_inputs(self):
        seq = np.random.SeedSequence(9, spawn_key=(1, 2))
        a = generate_sample(DEFAULT_TEMPLATE_ARC, 0.3, 5, seq)
        b = generate_sample(DEFAULT_TEMPLATE_ARC, 0.3, 5, np.random.SeedSequence(9, spawn_key=(1, 2)))
        assert np.array_equal(a, b)
        gen = np.random.default_rng(5)
        first = generate_sample(DEFAULT_TEMPLATE_ARC, 0.3, 5, gen)
        second = generate_sample(DEFAULT_TEMPLATE_ARC, 0.3, 5, gen)
        assert not np.array_equal(first, second)  # the generator advances

    def test_template_left_untouched(self):
        template = np.array([[0.0, 1.0, 2.0], [0.0, 1.0, 0.0]])
        snapshot = template.copy()
        generate_sample(template, 0.5, 10, 0)
        assert np.array_equal(template, snapshot)


class TestMakeSeparatedTemplates:
    def test_zero_target_returns_identical_shapes(self):
        first, second = make_separated_templates(DEFAULT_TEMPLATE_ARC, 0.0, "rr")
        assert np.array_equal(first, center(DEFAULT_TEMPLATE_ARC))
        assert np.array_equal(first, second)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_requested_distance_attained(self, kind):
        first, second = make_separated_templates(DEFAULT_TEMPLATE_ARC, 0.06, kind)
        got = shape_distance(to_preshape(first), to_preshape(second), kind)
        assert abs(got - 0.06) < 1e-6

    def test_centroid_size_preserved(self):
        first, second = make_separated_templates(DEFAULT_TEMPLATE_BUCKLE, 0.1, "reflection")
        assert abs(np.linalg.norm(second - second.mean(axis=1, keepdims=True))
                   - np.linalg.norm(first)) < 1e-9

    def test_unreachable_distance_raises(self):
        # planar quotients identify antipodal pre-shapes, so 2.0 exceeds the
        # diameter in every kind
        with pytest.raises(UnreachableDistanceError):
            make_separated_templates(DEFAULT_TEMPLATE_ARC, 2.0, "rr")

    def test_triangle_reverse_labeling_reaches_past_pi_over_six(self):
        # the three-landmark reverse-labeling quotient attains distances far
        # beyond pi/6 ~ 0.5236 along generic horizontal directions
        base = np.array([[0.0, 1.1, 0.4], [0.0, 0.1, 0.9]])
        first, second = make_separated_templates(base, 0.6, "rr")
        got = shape_distance(to_preshape(first), to_preshape(second), "rr")
        assert abs(got - 0.6) < 1e-6

    def test_supplied_direction_is_projected(self, rng):
        raw = rng.normal(size=(2, 5))
        first, second = make_separated_templates(DEFAULT_TEMPLATE_ARC, 0.05, "rr", direction=raw)
        got = shape_distance(to_preshape(first), to_preshape(second), "rr")
        assert abs(got - 0.05) < 1e-6

    def test_radial_direction_rejected(self):
        p = to_preshape(DEFAULT_TEMPLATE_ARC)
        with pytest.raises(InvalidArgumentError):
            make_separated_templates(DEFAULT_TEMPLATE_ARC, 0.05, "rr", direction=p)

    def test_negative_target_rejected(self):
        with pytest.raises(InvalidArgumentError):
            make_separated_templates(DEFAULT_TEMPLATE_ARC, -0.01, "rr")


class TestStudyConfig:
    def test_defaults_are_valid(self):
        cfg = StudyConfig()
        assert cfg.kind is ShapeSpaceKind.REVERSE_LABELING_REFLECTION
        assert cfg.sizes == ((100, 100),)
        assert cfg.replicates == 1000

    def test_kind_string_is_parsed(self):
        cfg = StudyConfig(kind="reflection")
        assert cfg.kind.value == "reflection"

    @pytest.mark.parametrize(
        "bad",
        [
            dict(noise_sd=0.0),
            dict(replicates=0),
            dict(alpha=1.0),
            dict(alpha=0.0),
            dict(bootstrap_B=100),
            dict(sizes=()),
            dict(sizes=((1, 5),)),
            dict(separation_grid=()),
            dict(separation_grid=(-0.1,)),
        ],
    )
    def test_invalid_fields_rejected(self, bad):
        with pytest.raises(InvalidArgumentError):
            StudyConfig(**bad)

    def test_from_file_round_trip(self, tmp_path):
        cfg = StudyConfig(noise_sd=0.1, replicates=3, seed=7, separation_grid=(0.0, 0.05))
        path = tmp_path / "study.json"
        path.write_text(json.dumps(cfg.to_json()))
        loaded = StudyConfig.from_file(path)
        assert np.allclose(loaded.template_a, cfg.template_a)
        assert np.allclose(loaded.template_b, cfg.template_b)
        assert loaded.kind == cfg.kind
        assert loaded.noise_sd == cfg.noise_sd
        assert loaded.sizes == cfg.sizes
        assert loaded.separation_grid == cfg.separation_grid
        assert loaded.seed == cfg.seed

    def test_from_file_templates_use_landmark_rows(self, tmp_path):
        data = StudyConfig().to_json()
        data["template_a"] = [[0.0, 0.0], [1.0, 0.1], [2.0, 0.5], [3.0, 0.2], [4.0, -0.1]]
        path = tmp_path / "study.json"
        path.write_text(json.dumps(data))
        loaded = StudyConfig.from_file(path)
        assert loaded.template_a.shape == (2, 5)
        assert np.allclose(loaded.template_a[0], [0.0, 1.0, 2.0, 3.0, 4.0])

    def test_from_file_overrides_win(self, tmp_path):
        path = tmp_path / "study.json"
        path.write_text(json.dumps(StudyConfig().to_json()))
        loaded = StudyConfig.from_file(path, replicates=5, seed=99, noise_sd=None)
        assert loaded.replicates == 5
        assert loaded.seed == 99
        assert loaded.noise_sd == StudyConfig().noise_sd  # None override ignored

    def test_from_file_unknown_key_rejected(self, tmp_path):
        data = StudyConfig().to_json()
        data["replcates"] = 10
        path = tmp_path / "study.json"
        path.write_text(json.dumps(data))
        with pytest.raises(InvalidArgumentError):
            StudyConfig.from_file(path)


class TestRunStudy:
    def test_same_seed_same_result(self):
        cfg = StudyConfig(**TINY)
        first = run_level_power_study(cfg)
        second = run_level_power_study(cfg)
        assert first == second

    def test_parallel_matches_sequential(self):
        cfg = StudyConfig(**TINY)
        sequential = run_level_power_study(cfg, threads=1)
        parallel = run_level_power_study(cfg, threads=2)
        assert sequential == parallel

    def test_replicates_match_documented_seed_derivation(self):
        cfg = StudyConfig(**TINY)
        result = run_level_power_study(cfg)
        n, m = cfg.sizes[0]
        tallies = dict.fromkeys(VARIANTS, 0)
        template = center(cfg.template_a)
        for rep in range(cfg.replicates):
            gen_w = np.random.Generator(
                np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(0, 0, rep, 0)))
            )
            gen_z = np.random.Generator(
                np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(0, 0, rep, 1)))
            )
            w = np.stack([to_preshape(c) for c in generate_sample(template, cfg.noise_sd, n, gen_w)])
            z = np.stack([to_preshape(c) for c in generate_sample(template, cfg.noise_sd, m, gen_z)])
            for variant in VARIANTS:
                boot = np.random.SeedSequence(cfg.seed, spawn_key=(0, 0, rep, 2))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    outcome = bootstrap_test(
                        w, z, cfg.kind, alpha=cfg.alpha, B=cfg.bootstrap_B,
                        variant=variant, seed=boot,
                    )
                tallies[variant] += int(outcome.reject)
        for variant in VARIANTS:
            assert result.cell(variant, n, m, 0.0).rejections == tallies[variant]

    def test_quantile_variants_included_on_request(self):
        cfg = StudyConfig(**TINY)
        result = run_level_power_study(cfg, include_quantile=True)
        labels = {cell.variant for cell in result.cells}
        assert labels == set(VARIANTS) | {v + "_quantile" for v in VARIANTS}

    def test_singular_replicates_counted_as_failures(self):
        # three samples per group cannot produce an invertible pooled
        # covariance in six dimensions, so every replicate fails
        cfg = StudyConfig(noise_sd=0.1, sizes=((3, 3),), replicates=4,
                          bootstrap_B=250, seed=1)
        result = run_level_power_study(cfg)
        for cell in result.cells:
            assert cell.failures == cfg.replicates
            assert cell.rejections == 0
            assert cell.replicates == cfg.replicates

    def test_level_and_power_sanity(self):
        cfg = StudyConfig(noise_sd=0.2, sizes=((25, 25),), replicates=40,
                          bootstrap_B=300, separation_grid=(0.0, 0.3), seed=3)
        result = run_level_power_study(cfg)
        for variant in VARIANTS:
            level = result.rate(variant, 25, 25, 0.0)
            power = result.rate(variant, 25, 25, 0.3)
            assert level <= 0.2  # far from the over-rejection regime
            assert power >= 0.9
            assert power >= level

    def test_missing_cell_lookup_raises(self):
        cfg = StudyConfig(**TINY)
        result = run_level_power_study(cfg)
        with pytest.raises(KeyError):
            result.cell("pooled_tangent", 1, 1, 0.0)


@pytest.fixture(scope="module")
def study():
    cfg = StudyConfig(noise_sd=0.15, sizes=((10, 10),), replicates=4,
                      bootstrap_B=250, separation_grid=(0.0, 0.2), seed=8)
    return run_level_power_study(cfg)


class TestEmit:

    def test_table_layout(self, study, tmp_path):
        path = tmp_path / "table.csv"
        emit_table(study, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "variant,n,m,separation,rejections,replicates,rate"
        assert len(lines) == 1 + len(study.cells)
        for line, cell in zip(lines[1:], study.cells):
            fields = line.split(",")
            assert fields[0] == cell.variant
            assert int(fields[4]) == cell.rejections
            assert int(fields[5]) == cell.replicates
            assert float(fields[6]) * cell.replicates == pytest.approx(cell.rejections)

    def test_table_bytes_deterministic(self, study, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_table(study, a)
        emit_table(study, b)
        assert a.read_bytes() == b.read_bytes()

    def test_power_curve_layout(self, study, tmp_path):
        path = tmp_path / "curve.csv"
        emit_power_curve(study, path)
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        assert header[0] == "separation"
        assert set(header[1:]) == {f"{v}_n10_m10" for v in VARIANTS}
        seps = [float(line.split(",")[0]) for line in lines[1:]]
        assert seps == sorted(seps) == [0.0, 0.2]
        for line in lines[1:]:
            fields = line.split(",")
            for name, value in zip(header[1:], fields[1:]):
                variant = name.rsplit("_n", 1)[0]
                assert float(value) == pytest.approx(
                    study.rate(variant, 10, 10, float(fields[0]))
                )

    def test_write_failure_names_path(self, study, tmp_path):
        missing = tmp_path / "no" / "such" / "dir" / "out.csv"
        with pytest.raises(OSError, match="out.csv"):
            emit_table(study, missing)
