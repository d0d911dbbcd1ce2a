"""Brute-force hidden-state oracle for the classical bound.

Sources emit classical states lambda_j in {0..d-1} under independent
distributions; each party answers 0/1 from its setting and received states.
The oracle maximizes F over deterministic response tables and product
measures, exhaustively when the count fits the budget and by seeded random
sampling otherwise.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bell import BellEvaluation, bell_value
from .independence import IndependenceCertificate
from .network import NetworkTopology

DEFAULT_BUDGET = 10**7
_CHUNK = 8192


@dataclass(frozen=True)
class HiddenStateModel:
    """Alphabet size per source and optional explicit source distributions."""

    alphabet_size: int
    distributions: tuple[tuple[float, ...], ...] | None = None

    def validate(self, m: int):
        if self.alphabet_size < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.distributions is None:
            return
        if len(self.distributions) != m:
            raise ValueError(f"expected {m} source distributions")
        for mu in self.distributions:
            if len(mu) != self.alphabet_size:
                raise ValueError("distribution length must equal the alphabet size")
            if abs(sum(mu) - 1.0) > 1e-12:
                raise ValueError(f"distribution sums to {sum(mu)!r}, expected 1")


@dataclass(frozen=True)
class LocalStrategy:
    """Deterministic response tables plus the fixed settings of the rest.

    tables[party][x][idx] is the 0/1 answer for setting x and the mixed-radix
    index idx of the party's received states (its sources in declaration
    order).  Non-independent parties use the fixed setting settings_I[party]
    inside I and settings_J[party] inside J.
    """

    tables: dict[str, tuple[tuple[int, ...], tuple[int, ...]]]
    settings_I: dict[str, int]
    settings_J: dict[str, int]


def _party_source_indices(net: NetworkTopology) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {p: [] for p in net.parties}
    for j, source in enumerate(net.sources):
        for p in set(source.recipients):
            out[p].append(j)
    return {p: sorted(v) for p, v in out.items()}


def _local_index_map(source_indices: list[int], assignments: np.ndarray) -> np.ndarray:
    """Mixed-radix local index of each global hidden-state assignment."""
    d = int(assignments.max(initial=0)) + 1 if assignments.size else 1
    idx = np.zeros(assignments.shape[0], dtype=np.int64)
    for j in source_indices:
        idx = idx * d + assignments[:, j]
    return idx


def _assignment_grid(m: int, d: int) -> np.ndarray:
    """All d^m hidden-state assignments, one row each, lexicographic."""
    grid = np.array(list(itertools.product(range(d), repeat=m)), dtype=np.int64)
    return grid.reshape(-1, m)


def classical_IJ(
    net: NetworkTopology,
    cert: IndependenceCertificate,
    model: HiddenStateModel,
    strategy: LocalStrategy,
) -> tuple[float, float]:
    """Exact I and J for one strategy under the model's product measure."""
    model.validate(net.m)
    d = model.alphabet_size
    grid = _assignment_grid(net.m, d)
    if model.distributions is None:
        weights = np.full(grid.shape[0], 1.0 / grid.shape[0])
    else:
        weights = np.ones(grid.shape[0])
        for j, mu in enumerate(model.distributions):
            weights *= np.asarray(mu)[grid[:, j]]
    sources_of = _party_source_indices(net)
    independent = set(cert.independent_parties)
    factor_i = np.ones(grid.shape[0])
    factor_j = np.ones(grid.shape[0])
    for party in net.parties:
        idx = _local_index_map(sources_of[party], grid)
        t0 = np.asarray(strategy.tables[party][0], dtype=np.int64)
        t1 = np.asarray(strategy.tables[party][1], dtype=np.int64)
        expected = d ** len(sources_of[party])
        if t0.size != expected or t1.size != expected:
            raise ValueError(
                f"party {party}: table length {t0.size}, expected {expected}"
            )
        s0 = (-1.0) ** t0[idx]
        s1 = (-1.0) ** t1[idx]
        if party in independent:
            factor_i *= 0.5 * (s0 + s1)
            factor_j *= 0.5 * (s0 - s1)
        else:
            signs = (s0, s1)
            factor_i *= signs[strategy.settings_I[party]]
            factor_j *= signs[strategy.settings_J[party]]
    return float(np.dot(weights, factor_i)), float(np.dot(weights, factor_j))


@dataclass(frozen=True)
class ClassicalMaxReport:
    evaluation: BellEvaluation
    exhaustive: bool
    samples: int

    def to_json_dict(self) -> dict:
        out = self.evaluation.to_json_dict()
        out["exhaustive"] = self.exhaustive
        out["samples"] = self.samples
        return out


def _simplex_grid(d: int, step: float) -> np.ndarray:
    """Probability vectors over d outcomes with entries on a step grid."""
    ticks = round(1.0 / step)
    points = []
    for combo in itertools.combinations_with_replacement(range(d), ticks):
        counts = [0] * d
        for c in combo:
            counts[c] += 1
        points.append([c / ticks for c in counts])
    return np.array(points)


def _measure_weights(mu_per_source: list[np.ndarray], grid: np.ndarray) -> np.ndarray:
    weights = np.ones(grid.shape[0])
    for j, mu in enumerate(mu_per_source):
        weights *= mu[grid[:, j]]
    return weights


def _party_sign_tensors_exhaustive(n_local: int) -> tuple[np.ndarray, np.ndarray]:
    """All (s0, s1) sign-table pairs over n_local inputs as +-1 arrays."""
    singles = np.array(list(itertools.product((1.0, -1.0), repeat=n_local)))
    s0 = np.repeat(singles, singles.shape[0], axis=0)
    s1 = np.tile(singles, (singles.shape[0], 1))
    return s0, s1


def _thread_count() -> int:
    value = os.environ.get("NETBELL_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def max_classical_F(
    net: NetworkTopology,
    cert: IndependenceCertificate,
    d: int = 2,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> ClassicalMaxReport:
    """Maximum F over hidden-state strategies and product measures.

    Exhaustive when (number of strategies) x (measure grid size) fits the
    budget; otherwise seeded random sampling with the budget as the number
    of strategy-measure pairs.  Measures are probed on a 0.1-step simplex
    grid with a 0.01-step refinement pass around the incumbent.
    """
    if cert.k < 1:
        raise ValueError("a certificate with k >= 1 is required")
    sources_of = _party_source_indices(net)
    grid = _assignment_grid(net.m, d)
    local_idx = {p: _local_index_map(sources_of[p], grid) for p in net.parties}
    n_local = {p: d ** len(sources_of[p]) for p in net.parties}
    independent = set(cert.independent_parties)
    k = cert.k

    strategy_count = 1.0
    for p in net.parties:
        strategy_count *= 4.0 ** n_local[p]

    coarse = _simplex_grid(d, 0.1)
    measure_sets = list(itertools.product(range(coarse.shape[0]), repeat=net.m))
    n_measures = len(measure_sets)
    weight_rows = np.stack(
        [
            _measure_weights([coarse[i] for i in combo], grid)
            for combo in measure_sets
        ]
    )

    exhaustive = strategy_count * n_measures <= budget

    def combine(tensors_i: list[np.ndarray], tensors_j: list[np.ndarray]):
        """Outer product over the strategy axis, pointwise over assignments."""
        h_i = tensors_i[0]
        h_j = tensors_j[0]
        for t_i, t_j in zip(tensors_i[1:], tensors_j[1:]):
            rows = h_i.shape[0]
            h_i = (h_i[:, None, :] * t_i[None, :, :]).reshape(rows * t_i.shape[0], -1)
            h_j = (h_j[:, None, :] * t_j[None, :, :]).reshape(rows * t_j.shape[0], -1)
        return h_i, h_j

    def block_best(h_i: np.ndarray, h_j: np.ndarray, weights: np.ndarray):
        vals_i = h_i @ weights.T
        vals_j = h_j @ weights.T
        f = np.abs(vals_i) ** (1.0 / k) + np.abs(vals_j) ** (1.0 / k)
        flat = int(np.argmax(f))
        row, col = divmod(flat, f.shape[1])
        return float(f[row, col]), float(vals_i[row, col]), float(vals_j[row, col]), row, col

    best = (-1.0, 0.0, 0.0)
    best_measure: list[np.ndarray] | None = None
    samples = 0

    if exhaustive:
        tensors_i = []
        tensors_j = []
        for p in net.parties:
            s0, s1 = _party_sign_tensors_exhaustive(n_local[p])
            g0 = s0[:, local_idx[p]]
            g1 = s1[:, local_idx[p]]
            if p in independent:
                tensors_i.append(0.5 * (g0 + g1))
                tensors_j.append(0.5 * (g0 - g1))
            else:
                # Fixed settings: the two sign tables play the I and J roles.
                tensors_i.append(g0)
                tensors_j.append(g1)
        h_i, h_j = combine(tensors_i, tensors_j)
        samples = h_i.shape[0] * n_measures

        def scan(chunk_range):
            lo, hi = chunk_range
            f, vi, vj, row, col = block_best(h_i[lo:hi], h_j[lo:hi], weight_rows)
            return f, vi, vj, lo + row, col

        chunks = [(lo, min(lo + _CHUNK, h_i.shape[0])) for lo in range(0, h_i.shape[0], _CHUNK)]
        workers = _thread_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(scan, chunks))
        else:
            results = [scan(c) for c in chunks]
        f, vi, vj, row, col = max(results)
        best = (f, vi, vj)
        best_measure = [coarse[i] for i in measure_sets[col]]

        # One refinement pass: 0.01-step measures around the incumbent,
        # rescanning all strategies.
        refined = _refined_measures(best_measure, d)
        refined_rows = np.stack([_measure_weights(mu, grid) for mu in refined])
        results = [
            block_best(h_i[lo:hi], h_j[lo:hi], refined_rows) + (lo,)
            for lo, hi in chunks
        ]
        f2, vi2, vj2, _, col2, _ = max(results)
        samples += h_i.shape[0] * refined_rows.shape[0]
        if f2 > best[0]:
            best = (f2, vi2, vj2)
    else:
        rng = np.random.default_rng(seed)
        batch = 2048
        while samples < budget:
            tensors_i = []
            tensors_j = []
            for p in net.parties:
                s0 = rng.choice((-1.0, 1.0), size=(batch, n_local[p]))
                s1 = rng.choice((-1.0, 1.0), size=(batch, n_local[p]))
                g0 = s0[:, local_idx[p]]
                g1 = s1[:, local_idx[p]]
                if p in independent:
                    tensors_i.append(0.5 * (g0 + g1))
                    tensors_j.append(0.5 * (g0 - g1))
                else:
                    tensors_i.append(g0)
                    tensors_j.append(g1)
            # Pair party rows instead of outer products: one strategy per row.
            h_i = np.ones((batch, grid.shape[0]))
            h_j = np.ones((batch, grid.shape[0]))
            for t_i, t_j in zip(tensors_i, tensors_j):
                h_i *= t_i
                h_j *= t_j
            pick = rng.integers(0, weight_rows.shape[0], size=min(64, weight_rows.shape[0]))
            weights = weight_rows[pick]
            f, vi, vj, _, col = block_best(h_i, h_j, weights)
            if f > best[0]:
                best = (f, vi, vj)
            samples += batch * weights.shape[0]

    evaluation = bell_value(best[1], best[2], k, provenance="lhv")
    return ClassicalMaxReport(evaluation=evaluation, exhaustive=exhaustive, samples=samples)


def _refined_measures(incumbent: list[np.ndarray], d: int) -> list[list[np.ndarray]]:
    """0.01-step simplex points within 0.1 of the incumbent, per source."""
    per_source: list[list[np.ndarray]] = []
    for mu in incumbent:
        options = []
        if d == 2:
            lo = max(0.0, mu[0] - 0.1)
            hi = min(1.0, mu[0] + 0.1)
            steps = int(round((hi - lo) / 0.01))
            for t in range(steps + 1):
                p = lo + 0.01 * t
                options.append(np.array([p, 1.0 - p]))
        else:
            options.append(np.asarray(mu))
        per_source.append(options)
    combos = []
    for combo in itertools.product(*per_source):
        combos.append(list(combo))
    return combos
