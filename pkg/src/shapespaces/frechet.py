"""Fréchet function evaluation and Fréchet mean estimation on shape quotients.

The sample Fréchet function of pre-shapes X_1..X_n at a candidate q is the
average squared quotient distance (1/n) sum d(q, X_j)^2.  Its minimizer is
estimated by the standard Riemannian fixed-point scheme: align all samples
to the current candidate, average the spherical logs, step along the
exponential map, repeat.  While the tangent residual is large, a step is
only accepted when the Fréchet value does not increase (halving up to 30
times otherwise).  Once the residual drops below the point where value
changes (of order residual squared) are representable in floating point,
the guard is released and plain fixed-point steps run to the requested
tolerance.

All accumulation is plain sequential numpy, so results are deterministic;
there is no parallel path inside the estimator itself.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleError, InvalidArgumentError
from .geometry import check_preshape, sphere_exp
from .spaces import ShapeSpaceKind, align_stack

# Below this residual, Fréchet value differences (~ residual^2) fall under
# float resolution and the descent guard would reject perfectly good steps.
VALUE_GUARD_FLOOR = 1e-7


@dataclass(frozen=True)
class MeanResult:
    """Outcome of a Fréchet mean estimation.

    mean: representative pre-shape of the estimated mean orbit.
    iterations: number of align-and-average passes performed.
    residual: norm of the tangent average at the final candidate.
    value: Fréchet function value at the mean (recomputed via
        frechet_function, same code path as any caller would use).
    unique_alignments: fraction of samples whose optimal lift at the mean
        is unique.
    converged: False when max_iter passes were exhausted or descent stalled
        with the residual still above tolerance; the result is returned
        either way.
    """

    mean: np.ndarray
    iterations: int
    residual: float
    value: float
    unique_alignments: float
    converged: bool


def _sample_stack(samples):
    stack = np.asarray(samples, dtype=float)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.ndim != 3 or stack.shape[0] == 0:
        raise EmptySampleError("need at least one sample pre-shape")
    return stack


def _tangent_logs(mu, aligned, distances):
    """Spherical logs of a stack of aligned pre-shapes at mu, vectorized."""
    cos = np.cos(distances)
    residual = aligned - cos[:, None, None] * mu
    norms = np.linalg.norm(residual, axis=(1, 2))
    scale = np.where(norms > 1e-300, distances / np.maximum(norms, 1e-300), 0.0)
    return residual * scale[:, None, None]


def frechet_function(q, samples, kind):
    """Average squared quotient distance from q to the samples.

    >>> import numpy as np
    >>> p = np.array([[-1.0, 0.0, 1.0], [0.0, 0.0, 0.0]]) / np.sqrt(2.0)
    >>> frechet_function(p, [p, p], "reflection")
    0.0
    """
    stack = _sample_stack(samples)
    distances = align_stack(np.asarray(q, dtype=float), stack, kind)["distance"]
    return float(np.mean(distances**2))


def frechet_mean(samples, kind, tol=1e-9, max_iter=200, init=None):
    """Estimate the sample Fréchet mean by aligned tangent averaging.

    Parameters
    ----------
    samples : sequence of pre-shapes
    kind : ShapeSpaceKind or str
    tol : float
        Convergence threshold on the norm of the tangent average.
    max_iter : int
        Maximum number of align-and-average passes.
    init : pre-shape, optional
        Starting candidate.  Defaults to the best (lowest Fréchet value) of
        up to ten evenly spread sample points, which keeps the estimator
        deterministic without an RNG.

    Returns
    -------
    MeanResult
        Flagged converged=False when the tolerance was not reached; the
        best candidate found is still returned.
    """
    kind = ShapeSpaceKind.parse(kind)
    stack = _sample_stack(samples)
    n = len(stack)

    if init is None:
        picks = np.unique(np.round(np.linspace(0, n - 1, min(10, n))).astype(int))
        best_value, mu = np.inf, None
        for index in picks:
            candidate = stack[index]
            value = float(np.mean(align_stack(candidate, stack, kind)["distance"] ** 2))
            if value < best_value:
                best_value, mu = value, candidate.copy()
    else:
        mu = check_preshape(init).copy()

    current = align_stack(mu, stack, kind)
    value = float(np.mean(current["distance"] ** 2))
    residual = np.inf
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        logs = _tangent_logs(mu, current["aligned"], current["distance"])
        vbar = logs.mean(axis=0)
        residual = float(np.linalg.norm(vbar))
        if residual <= tol:
            converged = True
            break
        if residual <= VALUE_GUARD_FLOOR:
            # plain fixed-point step: the descent guard cannot resolve value
            # changes this small, and the iteration contracts near equilibrium
            candidate = sphere_exp(mu, vbar)
            candidate = candidate - candidate.mean(axis=1, keepdims=True)
            candidate = candidate / np.linalg.norm(candidate)
            current = align_stack(candidate, stack, kind)
            mu = candidate
            value = float(np.mean(current["distance"] ** 2))
            continue
        step = vbar
        accepted = False
        for _ in range(31):  # full step, then up to 30 halvings
            candidate = sphere_exp(mu, step)
            candidate = candidate - candidate.mean(axis=1, keepdims=True)
            candidate = candidate / np.linalg.norm(candidate)
            trial = align_stack(candidate, stack, kind)
            trial_value = float(np.mean(trial["distance"] ** 2))
            if trial_value <= value:
                mu, current, value = candidate, trial, trial_value
                accepted = True
                break
            step = 0.5 * step
        if not accepted:
            # descent stalled with the residual still above the guard floor;
            # reported through the converged flag
            break

    return MeanResult(
        mean=mu,
        iterations=iterations,
        residual=residual,
        value=frechet_function(mu, stack, kind),
        unique_alignments=float(np.mean(current["unique"])),
        converged=converged,
    )


def pooled_mean(samples_w, samples_z, kind, **kwargs):
    """Fréchet mean of the two samples pooled together."""
    stack = np.concatenate([_sample_stack(samples_w), _sample_stack(samples_z)])
    return frechet_mean(stack, kind, **kwargs)


def resample_means(samples, indices, kind, init=None, tol=1e-9, max_iter=200):
    """Fréchet means of row resamples of one sample stack, one per index row.

    Parameters
    ----------
    samples : array of pre-shapes, shape (n, m, k)
    indices : integer array, shape (B, r)
        Row b names the multiset samples[indices[b]] whose mean is wanted.
    init : pre-shape, optional
        Common starting candidate for every resample.  Defaults to the
        Fréchet mean of the full stack, which for concentrated data sits
        within O(1/sqrt(r)) of every resample's own mean.
    tol, max_iter : as in frechet_mean.

    Returns
    -------
    (means, converged)
        Means as an array (B, m, k), convergence flags as a boolean (B,).

    Planar stacks (m == 2) run every estimation simultaneously: rotation
    alignment is a complex phase, the reflection and label-reversal branches
    are picked by the largest Hermitian inner product modulus, and each pass
    updates all unconverged resamples at once.  The pass is the plain
    fixed-point step (no descent guard); warm starts keep it inside the
    contraction region, and rows that still wander are reported through
    their converged flag.  Other dimensions fall back to one frechet_mean
    call per row.  Both routes solve the same equilibrium equation, so they
    agree to the requested tolerance.
    """
    kind = ShapeSpaceKind.parse(kind)
    stack = _sample_stack(samples)
    idx = np.asarray(indices)
    if idx.ndim != 2 or idx.shape[1] == 0 or not np.issubdtype(idx.dtype, np.integer):
        raise InvalidArgumentError(
            "resample indices must form a nonempty integer array of shape (B, r)"
        )
    if len(idx) == 0:
        raise EmptySampleError("need at least one resample index row")
    if idx.min() < 0 or idx.max() >= len(stack):
        raise InvalidArgumentError(
            f"resample indices must lie in [0, {len(stack)})"
        )
    if init is None:
        init = frechet_mean(stack, kind, tol=tol, max_iter=max_iter).mean
    init = check_preshape(init)
    if stack.shape[1] != 2:
        results = [
            frechet_mean(stack[row], kind, tol=tol, max_iter=max_iter, init=init)
            for row in idx
        ]
        means = np.stack([res.mean for res in results])
        converged = np.array([res.converged for res in results])
        return means, converged
    return _planar_resample_means(stack, idx, kind, init, tol, max_iter)


def _planar_resample_means(stack, idx, kind, init, tol, max_iter):
    """Simultaneous weighted fixed-point iteration for planar resample means.

    Index rows become multiplicity weights over the n distinct samples, so
    one pass costs one (active, k) x (k, branches * n) complex product plus
    elementwise work, independent of the resample size r.
    """
    n, _, k = stack.shape
    n_res, r = idx.shape
    rows = stack[:, 0, :] + 1j * stack[:, 1, :]
    branches = [rows]
    if kind is not ShapeSpaceKind.ROTATION:
        branches.append(rows.conj())
    if kind is ShapeSpaceKind.REVERSE_LABELING_REFLECTION:
        branches.append(rows[:, ::-1])
        branches.append(rows[:, ::-1].conj())
    nb = len(branches)
    flat = np.concatenate(branches, axis=0)  # (nb * n, k)
    flat_ch = flat.conj().T.copy()  # (k, nb * n), ready for one gemm per pass
    by_branch = flat.reshape(nb, n, k)

    weights = np.zeros((n_res, n))
    np.add.at(weights, (np.arange(n_res)[:, None], idx), 1.0)
    weights /= r

    mu = np.repeat((init[0] + 1j * init[1])[None, :], n_res, axis=0)
    converged = np.zeros(n_res, dtype=bool)
    active = np.arange(n_res)
    col = np.arange(n)
    for _ in range(max_iter):
        am = mu[active]
        inner = (am @ flat_ch).reshape(len(active), nb, n)
        gain = np.abs(inner)
        pick = gain.argmax(axis=1)  # ties keep the earlier (plain) branch
        h = np.take_along_axis(inner, pick[:, None, :], axis=1)[:, 0, :]
        best = np.take_along_axis(gain, pick[:, None, :], axis=1)[:, 0, :]
        cos = np.clip(best, 0.0, 1.0)
        dist = np.arccos(cos)
        phase = h / np.maximum(best, 1e-300)
        aligned = phase[:, :, None] * by_branch[pick, col]
        resid = aligned - cos[:, :, None] * am[:, None, :]
        norms = np.sqrt(np.einsum("aik,aik->ai", resid, resid.conj()).real)
        scale = np.where(norms > 1e-300, dist / np.maximum(norms, 1e-300), 0.0)
        vbar = np.einsum("ai,aik->ak", weights[active] * scale, resid)
        rnorm = np.sqrt(np.einsum("ak,ak->a", vbar, vbar.conj()).real)
        done = rnorm <= tol
        if done.any():
            converged[active[done]] = True
            keep = ~done
            active = active[keep]
            if len(active) == 0:
                break
            vbar, rnorm = vbar[keep], rnorm[keep]
        width = rnorm[:, None]
        cand = np.cos(width) * mu[active] + (np.sin(width) / width) * vbar
        cand = cand - cand.mean(axis=1, keepdims=True)
        cand = cand / np.sqrt(np.einsum("ak,ak->a", cand, cand.conj()).real)[:, None]
        mu[active] = cand
    return np.stack([mu.real, mu.imag], axis=1), converged
