"""Noisy landmark sampling and level/power studies for the two-sample tests.

A study draws two groups of configurations, template plus isotropic normal
noise on every landmark, projects them to pre-shapes, runs the bootstrap
version of each test variant, and tallies rejections per (variant, group
sizes, separation) cell.  Separated templates are constructed by walking a
horizontal geodesic from the first template's pre-shape until the shape
distance matches the requested value.

Reproducibility: every replicate derives its noise and resampling streams
from the study seed through counter-based keys (size index, separation
index, replicate index, purpose tag), so parallel and sequential runs tally
identically and all test variants see paired resampling indices.
"""

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    InvalidArgumentError,
    SingularCovarianceError,
    UnreachableDistanceError,
)
from .geometry import as_configuration, center, sphere_exp, sphere_log, to_preshape
from .io import format_float
from .spaces import ShapeSpaceKind, optimal_align, shape_distance
from .twosample import (
    VARIANTS,
    _bootstrap_core,
    _bootstrap_draws,
    _outcome_from_quantile,
    _star_mean_stacks,
    horizontal_basis,
    prepare_all,
)

# Default five-landmark planar templates: a shallow arc and a deeper buckle,
# both with the hump pushed off center so the shape stays far (>= 0.34 rad)
# from its mirrored, reversed, and mirrored-reversed copies.  That margin
# matters: a near-palindromic template puts the noise cloud on the boundary
# where the optimal reversal branch flips, and sample means computed by
# branch-dependent averaging stop being reproducible long before the noise
# level itself is a problem.  Coordinate rows, landmark columns.
DEFAULT_TEMPLATE_ARC = np.array(
    [
        [-1.4, -0.85, -0.2, 0.55, 1.4],
        [-0.05, 0.75, 0.65, 0.15, -0.3],
    ]
)
DEFAULT_TEMPLATE_BUCKLE = np.array(
    [
        [-1.4, -0.7, 0.3, 0.9, 1.4],
        [-0.15, 1.3, 0.7, 0.05, -0.4],
    ]
)
DEFAULT_TEMPLATE_ARC.setflags(write=False)
DEFAULT_TEMPLATE_BUCKLE.setflags(write=False)


def generate_sample(template, sd, n, rng_state):
    """n noisy copies of a configuration template, as an (n, m, k) array.

    Each landmark receives independent isotropic normal noise with standard
    deviation sd in landmark units; the noise is added to the raw
    configuration (no projection happens here).  rng_state may be an integer
    seed, a SeedSequence, or a Generator; output is deterministic given it.
    """
    template = as_configuration(template)
    if sd < 0:
        raise InvalidArgumentError(f"noise standard deviation must be >= 0, got {sd}")
    if sd == 0.0:
        return np.broadcast_to(template, (n,) + template.shape).copy()
    rng = np.random.default_rng(rng_state)
    return template[None] + rng.normal(0.0, sd, size=(n,) + template.shape)


def make_separated_templates(base, target_distance, kind, direction=None):
    """A pair of configurations whose shapes sit at a prescribed distance.

    The first configuration returned is the centered base.  The second is
    found by walking along a horizontal tangent direction at the base
    pre-shape and bisecting the step length until the shape distance equals
    target_distance to 1e-6, then restoring the base's centroid size so
    noise in landmark units means the same thing for both.

    direction defaults to the first vector of the deterministic horizontal
    basis at the base pre-shape; a supplied direction is projected onto the
    horizontal space and normalized.

    Raises
    ------
    UnreachableDistanceError
        When no point along the chosen direction attains the target (the
        quotient distance along a geodesic grows, peaks, and falls back).
    """
    kind = ShapeSpaceKind.parse(kind)
    centered = center(as_configuration(base))
    if target_distance < 0.0:
        raise InvalidArgumentError(
            f"target distance must be >= 0, got {target_distance}"
        )
    if target_distance == 0.0:
        return centered, centered.copy()
    size = float(np.linalg.norm(centered))
    p = to_preshape(base)
    basis = horizontal_basis(p, kind)
    if direction is None:
        u = basis[0]
    else:
        flat = basis.reshape(len(basis), -1)
        u = (flat.T @ (flat @ np.asarray(direction, dtype=float).ravel())).reshape(p.shape)
        norm = np.linalg.norm(u)
        if norm < 1e-12:
            raise InvalidArgumentError("direction has no horizontal component")
        u = u / norm

    def gap(t):
        return shape_distance(p, sphere_exp(p, t * u), kind)

    # distance along the geodesic is 1-Lipschitz in t and unimodal up to the
    # cut point; bracket the first crossing on a fixed grid, then bisect
    lo, hi = 0.0, None
    for t in np.linspace(0.0, np.pi, 721)[1:]:
        if gap(t) >= target_distance:
            hi = t
            break
        lo = t
    if hi is None:
        raise UnreachableDistanceError(
            f"no shape at distance {target_distance} along the chosen direction "
            f"(kind {kind.value})"
        )
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if gap(mid) < target_distance:
            lo = mid
        else:
            hi = mid
    second = size * sphere_exp(p, 0.5 * (lo + hi) * u)
    return centered, second


@dataclass(frozen=True, eq=False)
class StudyConfig:
    """Design of a level/power study.

    sizes is a sequence of (n, m) group-size pairs; separation_grid lists
    the shape distances between the two group templates (0 = level run).
    Templates are stored coordinate-rows by landmark-columns.
    """

    template_a: np.ndarray = DEFAULT_TEMPLATE_ARC
    template_b: np.ndarray = DEFAULT_TEMPLATE_BUCKLE
    kind: ShapeSpaceKind = ShapeSpaceKind.REVERSE_LABELING_REFLECTION
    noise_sd: float = 0.2
    sizes: tuple = ((100, 100),)
    replicates: int = 1000
    alpha: float = 0.05
    bootstrap_B: int = 1000
    separation_grid: tuple = (0.0,)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "template_a", as_configuration(self.template_a))
        object.__setattr__(self, "template_b", as_configuration(self.template_b))
        object.__setattr__(self, "kind", ShapeSpaceKind.parse(self.kind))
        object.__setattr__(
            self, "sizes", tuple((int(n), int(m)) for n, m in self.sizes)
        )
        object.__setattr__(
            self, "separation_grid", tuple(float(s) for s in self.separation_grid)
        )
        if self.noise_sd <= 0:
            raise InvalidArgumentError("noise_sd must be positive")
        if self.replicates < 1:
            raise InvalidArgumentError("replicates must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError("alpha must lie in (0, 1)")
        if self.bootstrap_B < 200:
            raise InvalidArgumentError("bootstrap_B must be at least 200")
        if not self.sizes:
            raise InvalidArgumentError("sizes must contain at least one (n, m) pair")
        if any(n < 2 or m < 2 for n, m in self.sizes):
            raise InvalidArgumentError("each group size must be at least 2")
        if not self.separation_grid:
            raise InvalidArgumentError("separation_grid must not be empty")
        if any(s < 0 for s in self.separation_grid):
            raise InvalidArgumentError("separations must be >= 0")

    @classmethod
    def from_file(cls, path, **overrides):
        """Read a JSON study config; keyword overrides replace file values.

        Templates appear in the file as landmark rows ([[x, y], ...]), the
        same convention the configuration JSON reader uses.
        """
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(
                f"unknown study config keys: {sorted(unknown)}"
            )
        for key in ("template_a", "template_b"):
            if key in data:
                data[key] = np.asarray(data[key], dtype=float).T
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_json(self):
        return {
            "template_a": self.template_a.T.tolist(),
            "template_b": self.template_b.T.tolist(),
            "kind": self.kind.value,
            "noise_sd": self.noise_sd,
            "sizes": [list(pair) for pair in self.sizes],
            "replicates": self.replicates,
            "alpha": self.alpha,
            "bootstrap_B": self.bootstrap_B,
            "separation_grid": list(self.separation_grid),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class StudyCell:
    """Tally for one (variant, group sizes, separation) study cell.

    failures counts replicates whose test raised a singular-covariance
    failure; they stay in the replicate count and are never silently
    dropped.  mean_runtime is the average wall-clock seconds per replicate
    (all variants together) and is excluded from equality comparisons.
    """

    variant: str
    n: int
    m: int
    separation: float
    rejections: int
    replicates: int
    failures: int
    mean_runtime: float = field(default=0.0, compare=False)

    @property
    def rate(self):
        return self.rejections / self.replicates


@dataclass(frozen=True)
class StudyResult:
    cells: tuple
    config: StudyConfig = field(default=None, compare=False)

    def cell(self, variant, n, m, separation):
        for item in self.cells:
            if (
                item.variant == variant
                and item.n == n
                and item.m == m
                and math.isclose(item.separation, separation, abs_tol=1e-12)
            ):
                return item
        raise KeyError(f"no study cell ({variant}, n={n}, m={m}, sep={separation})")

    def rate(self, variant, n, m, separation):
        return self.cell(variant, n, m, separation).rate


def _preshape_stack(configs):
    centered = configs - configs.mean(axis=2, keepdims=True)
    norms = np.linalg.norm(centered, axis=(1, 2), keepdims=True)
    if np.any(norms < 1e-12):
        raise DegenerateConfigurationError("a sampled configuration collapsed to a point")
    return centered / norms


def _separation_direction(cfg):
    """Horizontal direction of the study's separation axis.

    When template_b genuinely differs from template_a, separations are laid
    out along the geodesic toward template_b (the log of its optimally
    positioned pre-shape, horizontal by construction); otherwise the
    default direction of make_separated_templates is used.
    """
    p = to_preshape(cfg.template_a)
    q = to_preshape(cfg.template_b)
    if shape_distance(p, q, cfg.kind) < 1e-9:
        return None
    return sphere_log(p, optimal_align(p, q, cfg.kind).aligned)


def _variant_labels(include_quantile):
    labels = list(VARIANTS)
    if include_quantile:
        labels += [variant + "_quantile" for variant in VARIANTS]
    return labels


def _replicate_block(cfg, template_second, si, pi, rep_lo, rep_hi, include_quantile):
    """Run replicates [rep_lo, rep_hi) of one study cell; return tallies."""
    n, m = cfg.sizes[si]
    labels = _variant_labels(include_quantile)
    rejections = dict.fromkeys(labels, 0)
    failures = dict.fromkeys(labels, 0)
    template_first = center(cfg.template_a)
    elapsed = 0.0
    for rep in range(rep_lo, rep_hi):
        started = time.perf_counter()
        gen_w = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(si, pi, rep, 0)))
        )
        gen_z = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(si, pi, rep, 1)))
        )
        w = _preshape_stack(generate_sample(template_first, cfg.noise_sd, n, gen_w))
        z = _preshape_stack(generate_sample(template_second, cfg.noise_sd, m, gen_z))
        preps = prepare_all(w, z, cfg.kind)
        # the three intrinsic variants share their resample Fréchet means:
        # paired draws plus cache-shared warm starts make the stacks
        # identical, so they are computed once per replicate
        star_seed = np.random.SeedSequence(cfg.seed, spawn_key=(si, pi, rep, 2))
        _, _, res_x, res_y = _bootstrap_draws(star_seed, n, m, cfg.bootstrap_B)
        star_means = _star_mean_stacks(w, z, preps["pooled_intrinsic"], res_x, res_y)
        for variant in VARIANTS:
            prep = preps[variant]
            # a fresh, identically keyed sequence per variant pairs the
            # bootstrap resampling indices across the four variants
            boot_seed = np.random.SeedSequence(cfg.seed, spawn_key=(si, pi, rep, 2))
            try:
                observed, critical, _ = _bootstrap_core(
                    prep, w, z, cfg.alpha, cfg.bootstrap_B, boot_seed,
                    star_means=star_means,
                )
                rejections[variant] += int(observed > critical)
            except SingularCovarianceError:
                failures[variant] += 1
            if include_quantile:
                label = variant + "_quantile"
                try:
                    outcome = _outcome_from_quantile(prep, cfg.alpha, n, m, variant)
                    rejections[label] += int(outcome.reject)
                except SingularCovarianceError:
                    failures[label] += 1
        elapsed += time.perf_counter() - started
    return si, pi, rep_lo, rejections, failures, elapsed


def run_level_power_study(cfg, threads=1, include_quantile=False):
    """Rejection tallies for every (variant, size, separation) cell.

    Replicates are independent; with threads > 1 they run in a process
    pool, and the counter-based seed derivation makes the tallies identical
    to a sequential run.
    """
    second_templates = []
    direction = None
    if any(s > 0 for s in cfg.separation_grid):
        direction = _separation_direction(cfg)
    for sep in cfg.separation_grid:
        if sep == 0.0:
            second_templates.append(center(cfg.template_a))
        else:
            second_templates.append(
                make_separated_templates(cfg.template_a, sep, cfg.kind, direction)[1]
            )

    chunk = cfg.replicates
    if threads > 1:
        chunk = max(1, -(-cfg.replicates // (4 * threads)))
    tasks = []
    for si in range(len(cfg.sizes)):
        for pi in range(len(cfg.separation_grid)):
            for rep_lo in range(0, cfg.replicates, chunk):
                rep_hi = min(rep_lo + chunk, cfg.replicates)
                tasks.append((cfg, second_templates[pi], si, pi, rep_lo, rep_hi, include_quantile))

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(_replicate_block_star, tasks))
    else:
        blocks = [_replicate_block(*task) for task in tasks]
    blocks.sort(key=lambda block: block[:3])

    labels = _variant_labels(include_quantile)
    rejections = {}
    failures = {}
    runtime = {}
    for si, pi, _, block_rej, block_fail, elapsed in blocks:
        for label in labels:
            key = (label, si, pi)
            rejections[key] = rejections.get(key, 0) + block_rej[label]
            failures[key] = failures.get(key, 0) + block_fail[label]
        runtime[(si, pi)] = runtime.get((si, pi), 0.0) + elapsed

    cells = []
    for label in labels:
        for si, (n, m) in enumerate(cfg.sizes):
            for pi, sep in enumerate(cfg.separation_grid):
                cells.append(
                    StudyCell(
                        variant=label,
                        n=n,
                        m=m,
                        separation=sep,
                        rejections=rejections[(label, si, pi)],
                        replicates=cfg.replicates,
                        failures=failures[(label, si, pi)],
                        mean_runtime=runtime[(si, pi)] / cfg.replicates,
                    )
                )
    return StudyResult(cells=tuple(cells), config=cfg)


def _replicate_block_star(task):
    return _replicate_block(*task)


def _write_lines(path, lines):
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_table(result, path):
    """One CSV row per study cell: variant,n,m,separation,rejections,replicates,rate."""
    lines = ["variant,n,m,separation,rejections,replicates,rate"]
    for cell in result.cells:
        lines.append(
            ",".join(
                (
                    cell.variant,
                    str(cell.n),
                    str(cell.m),
                    format_float(cell.separation),
                    str(cell.rejections),
                    str(cell.replicates),
                    format_float(cell.rate),
                )
            )
        )
    _write_lines(path, lines)


def emit_power_curve(result, path):
    """Rejection-rate series per variant and size over the separation grid.

    Wide XY layout for plotting tools: first column the separation, one
    column per (variant, n, m) combination, rows sorted by separation.
    """
    combos = []
    for cell in result.cells:
        key = (cell.variant, cell.n, cell.m)
        if key not in combos:
            combos.append(key)
    separations = sorted({cell.separation for cell in result.cells})
    header = "separation," + ",".join(
        f"{variant}_n{n}_m{m}" for variant, n, m in combos
    )
    lines = [header]
    for sep in separations:
        row = [format_float(sep)]
        for variant, n, m in combos:
            row.append(format_float(result.rate(variant, n, m, sep)))
        lines.append(",".join(row))
    _write_lines(path, lines)
