"""
Minimization of the fixed-measurement functionals over product projective bases.

All minimizers draw local bases from one `CandidateGrid`. For up to three
qubits the product grid is enumerated exhaustively in a single vectorized
scan: the measured state Phi_{A_1..A_i}(rho) is block diagonal, so the
entropies S(Phi_{A_1..A_i}(rho)) for every candidate prefix come out of one
pass and give both the global discord and every chained step. Because
S(Phi(rho)) - S(rho) telescopes into the chained steps, the grid minimum of
the global discord is never below the sum of the per-step grid minima.
When only the global discord is wanted, prefixes whose measured entropy
already reaches the incumbent are skipped.

Refinement runs Nelder-Mead from the few best grid tuples and any extra
candidates and keeps the lowest value.

Larger systems fall back to coordinate descent over subsystems and are
flagged `heuristic`.
"""

import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.optimize

from .correlations import gqd_fixed, original_qd_fixed, thermal_qd_fixed
from .errors import LabelError, ValidationError
from .measurement import ProductBasisSpec, QubitBasis, apply_channel
from .qcore import (
    DensityMatrix,
    entropy_bits,
    hermitian_eigenvalues,
    permute,
    von_neumann_entropy,
)


logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_QUBITS = 3
COORDINATE_SWEEPS = 3
_AXIS_DIGITS = 9
# matrix entries held per batch of candidates in the one-sided scan
_CHUNK_ENTRIES = 2**22


def _axis_key(basis: QubitBasis) -> tuple[float, ...]:
    """Bloch axis up to sign; antipodal directions give the same projector pair."""
    v = np.round(basis.bloch_vector(), _AXIS_DIGITS) + 0.0
    for component in (v[2], v[1], v[0]):
        if component != 0:
            if component < 0:
                v = -v + 0.0
            break
    return tuple(float(c) for c in v)


@dataclass(frozen=True)
class CandidateGrid:
    """Deterministic set of local bases shared by every minimization.

    Directions cover the hemisphere theta in [0, pi/2] with phi in [0, 2 pi);
    theta = 0, pi/2 and phi = 0, pi/2, pi are always present. A non-zero seed
    permutes the enumeration order, which only affects tie-breaking.
    Refinement starts from the `refine_starts` best grid tuples.
    """

    theta_steps: int = 25
    phi_steps: int = 25
    refine: bool = True
    max_refine_evaluations: int = 500
    refine_tolerance: float = 1e-8
    refine_starts: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.theta_steps < 2:
            raise ValidationError("range", f"theta_steps must be >= 2, got {self.theta_steps}")
        if self.phi_steps < 1:
            raise ValidationError("range", f"phi_steps must be >= 1, got {self.phi_steps}")
        if self.max_refine_evaluations < 1:
            raise ValidationError("range", "max_refine_evaluations must be positive")
        if self.refine_starts < 1:
            raise ValidationError("range", f"refine_starts must be >= 1, got {self.refine_starts}")

    @cached_property
    def candidates(self) -> tuple[QubitBasis, ...]:
        thetas = np.linspace(0.0, math.pi / 2, self.theta_steps)
        phis = list(np.linspace(0.0, 2 * math.pi, self.phi_steps, endpoint=False))
        for extra in (math.pi / 2, math.pi):
            if not any(math.isclose(phi, extra) for phi in phis):
                phis = sorted(phis + [extra])

        seen = set()
        bases = []
        for theta in thetas:
            # phi is irrelevant at the pole
            for phi in phis if theta > 0 else [0.0]:
                basis = QubitBasis(float(theta), float(phi))
                key = _axis_key(basis)
                if key not in seen:
                    seen.add(key)
                    bases.append(basis)

        if self.seed:
            permutation = np.random.default_rng(self.seed).permutation(len(bases))
            bases = [bases[i] for i in permutation]
        return tuple(bases)

    @cached_property
    def vectors(self) -> np.ndarray:
        """Stacked basis vectors, shape (K, 2, 2): candidate, outcome, component."""
        return np.stack([basis.vectors() for basis in self.candidates])

    @property
    def size(self) -> int:
        return len(self.candidates)

    @property
    def refine_step(self) -> float:
        """Initial simplex edge: half a theta spacing."""
        return (math.pi / 2) / (self.theta_steps - 1) / 2

    def to_dict(self) -> dict:
        return {
            "theta_steps": self.theta_steps,
            "phi_steps": self.phi_steps,
            "refine": self.refine,
            "max_refine_evaluations": self.max_refine_evaluations,
            "refine_tolerance": self.refine_tolerance,
            "refine_starts": self.refine_starts,
            "seed": self.seed,
            "candidates_per_qubit": self.size,
        }


@dataclass(frozen=True)
class MinimizationResult:
    """Minimum of a functional and the measurement attaining it.

    `value` is the functional re-evaluated at `argmin_spec`.
    """

    value: float
    argmin_spec: ProductBasisSpec
    evaluations: int
    refined: bool = False
    heuristic: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin": self.argmin_spec.to_dict(),
            "evaluations": self.evaluations,
            "refined": self.refined,
            "heuristic": self.heuristic,
        }


# Exhaustive scan ------------------------------------------------------------


def _measure_leading(blocks: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Measure the leading qubit of every block with every candidate basis.

    (..., d, d) -> (K, ..., 2, d/2, d/2): the candidate axis comes first and the
    new outcome axis last among the batch axes.
    """
    d = blocks.shape[-1] // 2
    split = blocks.reshape(blocks.shape[:-2] + (2, d, 2, d))
    return np.einsum("cjx,...xayb,cjy->c...jab", vectors.conj(), split, vectors, optimize=True)


def _pair_eigenvalues(blocks: np.ndarray) -> np.ndarray:
    """Eigenvalues of Hermitian 2x2 blocks, shape (..., 2)."""
    upper, lower = blocks[..., 0, 0].real, blocks[..., 1, 1].real
    radius = np.hypot((upper - lower) / 2, np.abs(blocks[..., 0, 1]))
    mean = (upper + lower) / 2
    return np.stack([mean - radius, mean + radius], axis=-1)


def _block_entropy(blocks: np.ndarray, batch: int) -> np.ndarray:
    """Entropy of the block-diagonal state formed by all blocks after the first `batch` axes."""
    values = _pair_eigenvalues(blocks) if blocks.shape[-1] == 2 else hermitian_eigenvalues(blocks)
    return entropy_bits(values.reshape(blocks.shape[:batch] + (-1,)))


def _qubit_features(vectors: np.ndarray) -> np.ndarray:
    """Real coefficients turning a 2x2 block into outcome weights, shape (4, K, 2).

    <v|B|v> = B00 |v0|^2 + B11 |v1|^2 + 2 Re(conj(v0) v1 B01).
    """
    v0, v1 = vectors[..., 0], vectors[..., 1]
    cross = v0.conj() * v1
    return np.stack([np.abs(v0) ** 2, np.abs(v1) ** 2, 2 * cross.real, -2 * cross.imag])


def _final_entropy(blocks: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Shannon entropy of the full product-basis distribution, shape (B, K).

    `blocks` has one leading row axis, then outcome axes, then 2x2 blocks for
    the last qubit; the second result axis runs over its candidates.
    """
    diagonal, corner = blocks[..., [0, 1], [0, 1]].real, blocks[..., 0, 1]
    weights = np.concatenate([diagonal, corner.real[..., None], corner.imag[..., None]], axis=-1)
    p = np.moveaxis(np.tensordot(weights, features, axes=1), -2, 1)
    return entropy_bits(p.reshape(p.shape[:2] + (-1,)))


Ranked = list[tuple[float, tuple[int, ...]]]


def _first_min(table, prefix: tuple[int, ...] = ()) -> tuple[float, tuple[int, ...]]:
    table = np.asarray(table)
    k = int(np.argmin(table))
    index = tuple(int(i) for i in np.unravel_index(k, table.shape)) if table.ndim else ()
    return float(table.flat[k]), prefix + index


def _smallest(
    table: np.ndarray, count: int, prefix: tuple[int, ...] = (), rows: Optional[np.ndarray] = None
) -> Ranked:
    """The `count` lowest entries as (value, index) pairs, ties in enumeration order.

    `rows` maps the first table axis back to candidate indices.
    """
    flat = table.ravel()
    m = min(count, flat.size)
    cut = np.partition(flat, m - 1)[m - 1]
    picks = np.flatnonzero(flat <= cut)
    picks = picks[np.lexsort((picks, flat[picks]))][:m]
    ranked = []
    for k in picks:
        index = [int(i) for i in np.unravel_index(k, table.shape)]
        if rows is not None:
            index[0] = int(rows[index[0]])
        ranked.append((float(flat[k]), prefix + tuple(index)))
    return ranked


def _merge(lists: Iterable[Ranked], count: int) -> Ranked:
    return heapq.nsmallest(count, (pair for ranked in lists for pair in ranked))


def _earliest(pairs: Iterable[tuple[float, tuple[int, ...]]]) -> tuple[float, tuple[int, ...]]:
    # strict comparison keeps the first candidate in enumeration order
    return reduce(lambda best, pair: pair if pair[0] < best[0] else best, pairs)


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


@dataclass(frozen=True)
class _Scan:
    best: Ranked
    steps: list[tuple[float, tuple[int, ...]]]
    evaluations: int


def _exhaustive_scan(
    entries: np.ndarray, n: int, vectors: np.ndarray, with_steps: bool, workers: int, keep: int = 1
) -> _Scan:
    """Grid minima of S(Phi(rho)) for up to three qubits.

    `best` holds the `keep` lowest product tuples. With `with_steps` every
    tuple is evaluated and the chained step minima come along. Otherwise a
    three-qubit scan skips prefixes whose measured entropy already reaches the
    current `keep`-th best; measuring more subsystems never lowers it.
    """
    k = len(vectors)
    features = _qubit_features(vectors)
    logger.debug("exhaustive scan: %d candidates per qubit, %d qubits", k, n)

    if n == 1:
        table = _final_entropy(entries[None], features)
        steps = [_first_min(table[0] - _block_entropy(entries, 0))] if with_steps else []
        return _Scan(_smallest(table[0], keep), steps, k)

    level = _measure_leading(entries, vectors)
    first = _block_entropy(level, 1)
    if n == 2:
        table = _final_entropy(level, features)
        steps = []
        if with_steps:
            steps.append(_first_min(first - _block_entropy(entries, 0)))
            steps.append(_first_min(table - first[:, None]))
        return _Scan(_smallest(table, keep), steps, k**2)

    if with_steps:

        def evaluate(a: int):
            blocks = _measure_leading(level[a], vectors)
            second = _block_entropy(blocks, 1)
            table = _final_entropy(blocks, features)
            return _smallest(table, keep, (a,)), _first_min(table - second[:, None], (a,)), second

        chunks = _map(evaluate, list(range(k)), workers)
        second = np.stack([chunk[2] for chunk in chunks])
        steps = [
            _first_min(first - _block_entropy(entries, 0)),
            _first_min(second - first[:, None]),
            _earliest(chunk[1] for chunk in chunks),
        ]
        return _Scan(_merge((chunk[0] for chunk in chunks), keep), steps, k**3)

    def prune(span: np.ndarray) -> tuple[Ranked, int]:
        best: Ranked = []
        evaluated = 0
        for a in span:
            bound = best[-1][0] if len(best) == keep else math.inf
            if first[a] >= bound:
                continue
            blocks = _measure_leading(level[a], vectors)
            rows = np.flatnonzero(_block_entropy(blocks, 1) < bound)
            if rows.size:
                table = _final_entropy(blocks[rows], features)
                evaluated += table.size
                best = _merge([best, _smallest(table, keep, (int(a),), rows)], keep)
        return best, evaluated

    chunks = _map(prune, np.array_split(np.arange(k), max(1, min(workers, k))), workers)
    evaluated = sum(chunk[1] for chunk in chunks)
    logger.debug("pruned scan evaluated %d of %d tuples", evaluated, k**3)
    return _Scan(_merge((chunk[0] for chunk in chunks), keep), [], evaluated)


# Fixed-spec objectives -------------------------------------------------------


def _spec_from_indices(labels: Sequence[str], indices: Sequence[int], grid: CandidateGrid) -> ProductBasisSpec:
    return ProductBasisSpec({label: grid.candidates[c] for label, c in zip(labels, indices)})


def _product_entropy(rho: DensityMatrix, spec: ProductBasisSpec) -> float:
    """S(Phi(rho)) for a complete product spec: the Shannon entropy of the diagonal."""
    unitary = reduce(np.kron, [spec[label].vectors() for label in rho.labels])
    p = np.einsum("ka,ab,kb->k", unitary.conj(), rho.entries, unitary).real
    return float(entropy_bits(p))


def _measured_entropy(rho: DensityMatrix, spec: ProductBasisSpec) -> float:
    if not spec.labels:
        return von_neumann_entropy(rho)
    return von_neumann_entropy(apply_channel(rho, spec))


def _chained_term(rho: DensityMatrix, order: Sequence[str], spec: ProductBasisSpec, i: int) -> float:
    """Thermal QD of step i (0-based) on the state measured along order[:i]."""
    if rho.n == 1:
        return gqd_fixed(rho, spec).value
    state = apply_channel(rho, spec.restrict(order[:i])) if i else rho
    return thermal_qd_fixed(state, order[i], spec[order[i]]).value


def _polish(
    labels: Sequence[str],
    objective: Callable[[ProductBasisSpec], float],
    canonical: Callable[[ProductBasisSpec], float],
    starts: Sequence[tuple[ProductBasisSpec, float]],
    grid: CandidateGrid,
) -> tuple[ProductBasisSpec, float, int, bool]:
    """Nelder-Mead descent from each (spec, canonical value) start.

    Returns the lowest canonical value seen; a descent result is adopted only
    if it is strictly below every start.
    """
    spec, value = min(starts, key=lambda start: start[1])
    if not grid.refine:
        return spec, value, 0, False

    evaluations, refined = 0, False
    for start, start_value in starts:
        x0 = start.angles(labels)
        simplex = np.vstack([x0] + [x0 + grid.refine_step * e for e in np.eye(len(x0))])
        result = scipy.optimize.minimize(
            lambda x: objective(ProductBasisSpec.from_angles(labels, x)),
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": grid.max_refine_evaluations,
                "fatol": grid.refine_tolerance,
                "xatol": 1e-9,
                "initial_simplex": simplex,
            },
        )
        evaluations += int(result.nfev)
        candidate = ProductBasisSpec.from_angles(labels, result.x)
        candidate_value = canonical(candidate)
        logger.debug(
            "refinement: %.12g -> %.12g after %d evaluations", start_value, candidate_value, result.nfev
        )
        if candidate_value < value:
            spec, value, refined = candidate, candidate_value, True
    return spec, value, evaluations, refined


def _descend(
    slots: int, objective: Callable[[tuple[int, ...]], float], grid: CandidateGrid
) -> tuple[tuple[int, ...], int]:
    """Coordinate descent over candidate indices, one slot at a time."""
    current = (0,) * slots
    best = objective(current)
    evaluations = 1
    for _ in range(COORDINATE_SWEEPS):
        for slot in range(slots):
            values = []
            for c in range(grid.size):
                trial = current[:slot] + (c,) + current[slot + 1 :]
                values.append(best if trial == current else objective(trial))
            evaluations += grid.size - 1
            value, (c,) = _first_min(values)
            if value < best:
                best = value
                current = current[:slot] + (c,) + current[slot + 1 :]
    return current, evaluations


def _check_order(rho: DensityMatrix, order: Optional[Sequence[str]]) -> tuple[str, ...]:
    order = rho.labels if order is None else tuple(order)
    if len(order) != rho.n or set(order) != set(rho.labels):
        raise LabelError(f"measurement order {order} is not a permutation of {rho.labels}")
    return order


# Public minimizers ------------------------------------------------------------


def _gqd_result(
    rho: DensityMatrix,
    specs: Sequence[ProductBasisSpec],
    evaluations: int,
    heuristic: bool,
    grid: CandidateGrid,
    extra_candidates: Sequence[ProductBasisSpec],
) -> MinimizationResult:
    starts = [(spec, gqd_fixed(rho, spec).value) for spec in [*specs, *extra_candidates]]
    base = von_neumann_entropy(rho)
    spec, value, polished, refined = _polish(
        rho.labels,
        lambda s: _product_entropy(rho, s) - base,
        lambda s: gqd_fixed(rho, s).value,
        starts,
        grid,
    )
    evaluations += len(extra_candidates) + polished
    return MinimizationResult(value, spec, evaluations, refined, heuristic)


def _gqd_search(rho: DensityMatrix, grid: CandidateGrid) -> tuple[ProductBasisSpec, int]:
    base = von_neumann_entropy(rho)
    indices, evaluations = _descend(
        rho.n,
        lambda idx: _product_entropy(rho, _spec_from_indices(rho.labels, idx, grid)) - base,
        grid,
    )
    logger.debug("gqd: %d qubits exceed the exhaustive limit, used coordinate descent", rho.n)
    return _spec_from_indices(rho.labels, indices, grid), evaluations


def _starts(grid: CandidateGrid) -> int:
    return grid.refine_starts if grid.refine else 1


def minimize_gqd(
    rho: DensityMatrix,
    grid: Optional[CandidateGrid] = None,
    extra_candidates: Sequence[ProductBasisSpec] = (),
    workers: int = 1,
) -> MinimizationResult:
    """Thermal GQD: min over product bases of S(Phi(rho)) - S(rho).

    `extra_candidates` are complete specs evaluated alongside the grid (the MID
    basis, for instance). Refinement starts from the best grid tuples and from
    every extra candidate.
    """
    grid = grid or CandidateGrid()
    if rho.n <= EXHAUSTIVE_MAX_QUBITS:
        scan = _exhaustive_scan(rho.entries, rho.n, grid.vectors, False, workers, _starts(grid))
        specs = [_spec_from_indices(rho.labels, idx, grid) for _, idx in scan.best]
        return _gqd_result(rho, specs, scan.evaluations, False, grid, extra_candidates)
    spec, evaluations = _gqd_search(rho, grid)
    return _gqd_result(rho, [spec], evaluations, True, grid, extra_candidates)


def _chained_results(
    rho: DensityMatrix,
    order: tuple[str, ...],
    specs: list[ProductBasisSpec],
    evaluations: list[int],
    heuristic: bool,
    grid: CandidateGrid,
    anchor: Optional[ProductBasisSpec],
) -> list[MinimizationResult]:
    results = []
    for i, spec in enumerate(specs):
        prefix = order[: i + 1]
        starts = [(spec, _chained_term(rho, order, spec, i))]
        if anchor is not None:
            restricted = anchor.restrict(prefix)
            starts.append((restricted, _chained_term(rho, order, restricted, i)))

        spec, value, polished, refined = _polish(
            prefix,
            lambda s, i=i, prefix=prefix: _measured_entropy(rho, s) - _measured_entropy(rho, s.restrict(prefix[:i])),
            lambda s, i=i: _chained_term(rho, order, s, i),
            starts,
            grid,
        )
        count = evaluations[i] + len(starts) - 1 + polished
        results.append(MinimizationResult(value, spec, count, refined, heuristic))
    return results


def _chained_search(rho: DensityMatrix, order: tuple[str, ...], grid: CandidateGrid):
    specs, evaluations = [], []
    for i in range(rho.n):
        prefix = order[: i + 1]

        def objective(idx: tuple[int, ...]) -> float:
            spec = _spec_from_indices(prefix, idx, grid)
            return _measured_entropy(rho, spec) - _measured_entropy(rho, spec.restrict(prefix[:i]))

        indices, count = _descend(i + 1, objective, grid)
        specs.append(_spec_from_indices(prefix, indices, grid))
        evaluations.append(count)
    return specs, evaluations


def minimize_chained(
    rho: DensityMatrix,
    order: Optional[Sequence[str]] = None,
    grid: Optional[CandidateGrid] = None,
    anchor: Optional[ProductBasisSpec] = None,
    workers: int = 1,
) -> list[MinimizationResult]:
    """Per-step minima of the chained thermal QDs along `order`.

    Step i minimizes over the non-selective bases on the earlier subsystems and
    the apparatus basis on A_i jointly. When `anchor` (a complete spec, normally
    the GQD argmin) is given, its restriction is also evaluated at every step,
    so the steps never sum above the anchor's global discord.
    """
    grid = grid or CandidateGrid()
    order = _check_order(rho, order)
    if rho.n <= EXHAUSTIVE_MAX_QUBITS:
        scan = _exhaustive_scan(permute(rho, order).entries, rho.n, grid.vectors, True, workers)
        specs = [_spec_from_indices(order, idx, grid) for _, idx in scan.steps]
        evaluations = [grid.size ** (i + 1) for i in range(rho.n)]
        return _chained_results(rho, order, specs, evaluations, False, grid, anchor)
    specs, evaluations = _chained_search(rho, order, grid)
    return _chained_results(rho, order, specs, evaluations, True, grid, anchor)


def minimize_gqd_and_chained(
    rho: DensityMatrix,
    order: Optional[Sequence[str]] = None,
    grid: Optional[CandidateGrid] = None,
    extra_candidates: Sequence[ProductBasisSpec] = (),
    workers: int = 1,
) -> tuple[MinimizationResult, list[MinimizationResult]]:
    """Global discord and chained steps, sharing the scan when `order` is the layout order.

    The global discord is always scanned in layout order, so it does not depend
    on `order`. The chained steps are anchored at the global argmin.
    """
    grid = grid or CandidateGrid()
    order = _check_order(rho, order)
    if rho.n > EXHAUSTIVE_MAX_QUBITS or order != rho.labels:
        gqd = minimize_gqd(rho, grid, extra_candidates, workers)
        return gqd, minimize_chained(rho, order, grid, gqd.argmin_spec, workers)

    scan = _exhaustive_scan(rho.entries, rho.n, grid.vectors, True, workers, _starts(grid))
    gqd_specs = [_spec_from_indices(order, idx, grid) for _, idx in scan.best]
    gqd = _gqd_result(rho, gqd_specs, scan.evaluations, False, grid, extra_candidates)
    specs = [_spec_from_indices(order, idx, grid) for _, idx in scan.steps]
    evaluations = [grid.size ** (i + 1) for i in range(rho.n)]
    steps = _chained_results(rho, order, specs, evaluations, False, grid, gqd.argmin_spec)
    return gqd, steps


def _apparatus_first(rho: DensityMatrix, apparatus: str) -> DensityMatrix:
    rho.layout.index(apparatus)
    if rho.n < 2:
        raise LabelError(f"apparatus {apparatus!r} leaves no system subsystems")
    return permute(rho, (apparatus,) + rho.layout.complement(apparatus))


def minimize_thermal_qd(
    rho: DensityMatrix, apparatus: str, grid: Optional[CandidateGrid] = None
) -> MinimizationResult:
    """Thermal QD D_th(S|A): min over apparatus bases of S_A(rho) - S(rho)."""
    grid = grid or CandidateGrid()
    ordered = _apparatus_first(rho, apparatus)
    chunk = max(1, _CHUNK_ENTRIES // ordered.entries.size)
    measured = [
        _block_entropy(_measure_leading(ordered.entries, grid.vectors[start : start + chunk]), 1)
        for start in range(0, grid.size, chunk)
    ]
    table = np.concatenate(measured) - _block_entropy(ordered.entries, 0)
    _, (c,) = _first_min(table)

    def canonical(spec: ProductBasisSpec) -> float:
        return thermal_qd_fixed(rho, apparatus, spec[apparatus]).value

    base = von_neumann_entropy(rho)
    spec = ProductBasisSpec({apparatus: grid.candidates[c]})
    spec, value, polished, refined = _polish(
        (apparatus,),
        lambda s: _measured_entropy(rho, s) - base,
        canonical,
        [(spec, canonical(spec))],
        grid,
    )
    return MinimizationResult(value, spec, grid.size + polished, refined)


def minimize_original_qd(
    rho: DensityMatrix, apparatus: str, grid: Optional[CandidateGrid] = None
) -> MinimizationResult:
    """Original discord: min over apparatus bases of S(rho_S|{Pi_A}) - S(rho_S|rho_A)."""
    grid = grid or CandidateGrid()
    _apparatus_first(rho, apparatus)
    values = [original_qd_fixed(rho, apparatus, basis) for basis in grid.candidates]
    value, (c,) = _first_min(values)

    def canonical(spec: ProductBasisSpec) -> float:
        return original_qd_fixed(rho, apparatus, spec[apparatus])

    spec = ProductBasisSpec({apparatus: grid.candidates[c]})
    spec, value, polished, refined = _polish((apparatus,), canonical, canonical, [(spec, value)], grid)
    return MinimizationResult(value, spec, grid.size + polished, refined)
