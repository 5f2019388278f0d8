"""Trial engines, Monte-Carlo aggregation, and exact small-instance oracles.

Four trial engines share one shape: draw every random quantity up front from
the counter-based stream (so worker count can never change a trial), walk the
edges in arrival order, and update matched/patience state.  Each engine comes
in two forms: a vectorized chunk kernel used by ``monte_carlo`` and a
single-trial wrapper returning a full :class:`TrialOutcome`.

The exact oracles (``exact_trivial_oracle``, ``optimal_policy_dp``,
``greedy_baseline``) are memoized bitmask recursions over tiny instances and
serve as ground truth for the statistical engines.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ._rng import ACTIVE, ARRIVAL, COIN, PRICE, TrialRNG, hash_uniform
from .attenuation import AttenuationSpec, attenuation_profile
from .graphcore import (
    EdgeStats,
    FractionalPoint,
    PricingInstance,
    fractional_point_violations,
)
from .lp import objective_coefficients

# 99% two-sided normal quantile, used for every interval in the reports.
Z99 = 2.5758293035489004

_UNBOUNDED = np.int32(2**31 - 1)


# --------------------------------------------------------------------------
# result containers
# --------------------------------------------------------------------------

class EdgeFlags(NamedTuple):
    active: bool
    realized: bool
    probed: bool
    matched: bool


@dataclass(frozen=True)
class TrialOutcome:
    """Everything observable about a single trial."""

    matched: tuple[str, ...]
    flags: dict[str, EdgeFlags]
    q_counts: dict[str, int]
    revenue: float
    probes_used: dict[str, int]


@dataclass(frozen=True)
class EdgeReport:
    edge_id: str
    x_ref: float
    matched: int
    r0: int
    r1: int
    freq: float
    ci_lo: float
    ci_hi: float
    freq_r0: float
    freq_r1: float
    ratio: float


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    master_seed: int
    edges: tuple[EdgeReport, ...]
    min_ratio: float
    revenue_mean: float
    revenue_ci: float


def wilson_interval(successes: int, trials: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval; well behaved at frequencies near 0 and 1."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (phat + z2n / 2.0) / denom
    hw = z * math.sqrt(phat * (1.0 - phat) / trials + z2n / (4.0 * trials)) / denom
    # clamp to [0, 1] and to phat: the interval is analytically inside both,
    # but sqrt rounding can leave an endpoint a few ulps on the wrong side
    return (max(0.0, min(center - hw, phat)), min(1.0, max(center + hw, phat)))


# --------------------------------------------------------------------------
# shared instance precomputation
# --------------------------------------------------------------------------

class _Topology:
    """Index arrays shared by all chunk kernels."""

    def __init__(self, inst: PricingInstance):
        self.inst = inst
        self.n_edges = len(inst.edges)
        self.n_vertices = len(inst.vertices)
        vpos = inst.vertex_pos
        self.u_idx = np.array([vpos[e.u] for e in inst.edges], dtype=np.intp)
        self.v_idx = np.array([vpos[e.v] for e in inst.edges], dtype=np.intp)
        self.edge_ids = tuple(e.id for e in inst.edges)
        self.vertex_ids = tuple(v.id for v in inst.vertices)
        # neighbor positions per edge (shared endpoint, self excluded;
        # parallel edges count)
        nbrs = []
        for i, e in enumerate(inst.edges):
            row = [
                j
                for j, f in enumerate(inst.edges)
                if j != i and len({f.u, f.v} & {e.u, e.v}) > 0
            ]
            nbrs.append(np.array(row, dtype=np.intp))
        self.neighbors = nbrs
        pat = np.full(self.n_vertices, _UNBOUNDED, dtype=np.int32)
        for k, v in enumerate(inst.vertices):
            if v.patience is not None:
                pat[k] = v.patience
        self.patience = pat

    def x_vector(self, x: dict[str, float]) -> np.ndarray:
        return np.array([x.get(eid, 0.0) for eid in self.edge_ids], dtype=float)


def _q_counts(realized: np.ndarray, key: np.ndarray, topo: _Topology) -> np.ndarray:
    """|Q(e)| per trial: realized neighbors arriving strictly before e."""
    t, e = realized.shape
    q = np.zeros((t, e), dtype=np.int16)
    for i in range(e):
        nb = topo.neighbors[i]
        if nb.size == 0:
            continue
        before = key[:, nb] < key[:, i : i + 1]
        q[:, i] = (realized[:, nb] & before).sum(axis=1).astype(np.int16)
    return q


class _ChunkCounts(NamedTuple):
    matched: np.ndarray  # int64 per edge
    r0: np.ndarray
    r1: np.ndarray
    revenue_sum: float
    revenue_sqsum: float


class _ChunkDetail(NamedTuple):
    active: np.ndarray
    realized: np.ndarray
    probed: np.ndarray
    matched: np.ndarray
    q: np.ndarray
    revenue: np.ndarray
    probes_used: np.ndarray  # per vertex


def _reduce_chunk(matched, q, revenue) -> _ChunkCounts:
    r0 = matched & (q == 0)
    r1 = matched & (q == 1)
    return _ChunkCounts(
        matched.sum(axis=0, dtype=np.int64),
        r0.sum(axis=0, dtype=np.int64),
        r1.sum(axis=0, dtype=np.int64),
        float(revenue.sum()),
        float((revenue * revenue).sum()),
    )


# --------------------------------------------------------------------------
# engines
# --------------------------------------------------------------------------

class RoOcrsEngine:
    """Random-order contention resolution on edge arrivals.

    Every edge draws an arrival time; an edge is active with probability
    x_e and survives its attenuation coin with probability a(t_e).  An
    active+surviving ("realized") edge is matched iff both endpoints are
    free when it arrives.
    """

    def __init__(
        self,
        inst: PricingInstance,
        x: dict[str, float],
        stats: dict[str, EdgeStats],
        spec: AttenuationSpec,
    ):
        self.topo = _Topology(inst)
        self.x = self.topo.x_vector(x)
        self.s = np.array([stats[eid].s for eid in self.topo.edge_ids], dtype=float)
        self.spec = spec
        self.x_ref = self.x.copy()

    def run_chunk(self, seed: int, start: int, count: int, detail: bool = False):
        topo = self.topo
        e = topo.n_edges
        trials = np.arange(start, start + count, dtype=np.uint64)[:, None]
        units = np.arange(e, dtype=np.uint64)[None, :]
        t = hash_uniform(seed, trials, units, ARRIVAL)
        active = hash_uniform(seed, trials, units, ACTIVE) < self.x[None, :]
        prof = attenuation_profile(self.spec, t, self.x[None, :], self.s[None, :])
        realized = active & (hash_uniform(seed, trials, units, COIN) < prof)

        order = np.argsort(t, axis=1, kind="stable")
        rows = np.arange(count)
        matched_v = np.zeros((count, topo.n_vertices), dtype=bool)
        matched_e = np.zeros((count, e), dtype=bool)
        for j in range(e):
            ep = order[:, j]
            uu, vv = topo.u_idx[ep], topo.v_idx[ep]
            win = realized[rows, ep] & ~matched_v[rows, uu] & ~matched_v[rows, vv]
            matched_e[rows, ep] |= win
            matched_v[rows[win], uu[win]] = True
            matched_v[rows[win], vv[win]] = True

        q = _q_counts(realized, t, topo)
        revenue = np.zeros(count)
        if detail:
            probed = np.zeros((count, e), dtype=bool)
            probes = np.zeros((count, topo.n_vertices), dtype=np.int32)
            return _ChunkDetail(active, realized, probed, matched_e, q, revenue, probes)
        return _reduce_chunk(matched_e, q, revenue)


class StochasticOcrsEngine:
    """Probe-commit contention resolution.

    Each arriving edge whose endpoints are free and still have patience is
    probed with probability y_e * a(e); a probe spends one patience unit at
    both endpoints, and a probed edge turns out active with probability p_e,
    in which case it must be matched.  Attenuation is evaluated at the
    effective marginal x = y * p.
    """

    def __init__(
        self,
        inst: PricingInstance,
        y: dict[str, float],
        p: dict[str, float],
        stats: dict[str, EdgeStats],
        spec: AttenuationSpec,
    ):
        self.topo = _Topology(inst)
        self.y = self.topo.x_vector(y)
        self.p = self.topo.x_vector(p)
        if np.any(self.y < 0) or np.any(self.y > 1) or np.any(self.p < 0) or np.any(self.p > 1):
            raise ValueError("y and p must lie in [0, 1]")
        loads_x = np.zeros(self.topo.n_vertices)
        np.add.at(loads_x, self.topo.u_idx, self.y * self.p)
        np.add.at(loads_x, self.topo.v_idx, self.y * self.p)
        if np.any(loads_x > 1.0 + 1e-9):
            raise ValueError("marginal load exceeds 1 at a vertex")
        # The per-vertex probe budget sum(y) <= patience is the analysis-side
        # feasibility condition, not a runtime requirement: the engine caps
        # probes dynamically, and overloaded inputs are legitimate ways to
        # exercise exactly that cap.  Only the marginal load is hard-checked.
        self.x = self.y * self.p
        self.s = np.array([stats[eid].s for eid in self.topo.edge_ids], dtype=float)
        self.spec = spec
        self.x_ref = self.x.copy()

    def run_chunk(self, seed: int, start: int, count: int, detail: bool = False):
        topo = self.topo
        e = topo.n_edges
        trials = np.arange(start, start + count, dtype=np.uint64)[:, None]
        units = np.arange(e, dtype=np.uint64)[None, :]
        t = hash_uniform(seed, trials, units, ARRIVAL)
        active = hash_uniform(seed, trials, units, ACTIVE) < self.p[None, :]
        prof = attenuation_profile(self.spec, t, self.x[None, :], self.s[None, :])
        probe_ok = hash_uniform(seed, trials, units, COIN) < self.y[None, :] * prof
        realized = active & probe_ok

        order = np.argsort(t, axis=1, kind="stable")
        rows = np.arange(count)
        matched_v = np.zeros((count, topo.n_vertices), dtype=bool)
        matched_e = np.zeros((count, e), dtype=bool)
        probed_e = np.zeros((count, e), dtype=bool)
        pat = np.broadcast_to(topo.patience, (count, topo.n_vertices)).copy()
        for j in range(e):
            ep = order[:, j]
            uu, vv = topo.u_idx[ep], topo.v_idx[ep]
            free = ~matched_v[rows, uu] & ~matched_v[rows, vv]
            has_pat = (pat[rows, uu] > 0) & (pat[rows, vv] > 0)
            probe = free & has_pat & probe_ok[rows, ep]
            probed_e[rows, ep] |= probe
            pr = rows[probe]
            pat[pr, uu[probe]] -= 1
            pat[pr, vv[probe]] -= 1
            win = probe & active[rows, ep]
            matched_e[rows, ep] |= win
            matched_v[rows[win], uu[win]] = True
            matched_v[rows[win], vv[win]] = True

        q = _q_counts(realized, t, topo)
        revenue = np.zeros(count)
        if detail:
            probes = (topo.patience[None, :] - pat).astype(np.int32)
            return _ChunkDetail(active, realized, probed_e, matched_e, q, revenue, probes)
        return _reduce_chunk(matched_e, q, revenue)


class VertexArrivalEngine:
    """Edge arrivals grouped by online-vertex arrival.

    Processes edges in lexicographic order of (online endpoint's arrival
    time, edge arrival time); the acceptance coin uses exp(-x_e * t_e),
    independent of the vertex time.
    """

    def __init__(self, inst: PricingInstance, x: dict[str, float]):
        self.topo = _Topology(inst)
        sides = {v.id: v.side for v in inst.vertices}
        if any(s not in ("offline", "online") for s in sides.values()):
            raise ValueError("vertex-arrival engine needs side tags on every vertex")
        for edg in inst.edges:
            if {sides[edg.u], sides[edg.v]} != {"offline", "online"}:
                raise ValueError(f"edge {edg.id} does not cross the bipartition")
        self.online_of_edge = np.array(
            [
                self.topo.inst.vertex_pos[edg.u if sides[edg.u] == "online" else edg.v]
                for edg in inst.edges
            ],
            dtype=np.intp,
        )
        self.x = self.topo.x_vector(x)
        self.x_ref = self.x.copy()

    def run_chunk(self, seed: int, start: int, count: int, detail: bool = False):
        topo = self.topo
        e, nv = topo.n_edges, topo.n_vertices
        trials = np.arange(start, start + count, dtype=np.uint64)[:, None]
        units = np.arange(e, dtype=np.uint64)[None, :]
        vunits = (np.arange(nv, dtype=np.uint64) + np.uint64(e))[None, :]
        t_e = hash_uniform(seed, trials, units, ARRIVAL)
        t_v = hash_uniform(seed, trials, vunits, ARRIVAL)
        active = hash_uniform(seed, trials, units, ACTIVE) < self.x[None, :]
        coin = hash_uniform(seed, trials, units, COIN) < np.exp(-self.x[None, :] * t_e)
        realized = active & coin

        # integer ranks make the (t_u, t_e) lexicographic key exact
        rank_v = np.argsort(np.argsort(t_v, axis=1, kind="stable"), axis=1, kind="stable")
        rank_e = np.argsort(np.argsort(t_e, axis=1, kind="stable"), axis=1, kind="stable")
        key = rank_v[:, self.online_of_edge] * (e + 1) + rank_e
        order = np.argsort(key, axis=1, kind="stable")

        rows = np.arange(count)
        matched_v = np.zeros((count, nv), dtype=bool)
        matched_e = np.zeros((count, e), dtype=bool)
        for j in range(e):
            ep = order[:, j]
            uu, vv = topo.u_idx[ep], topo.v_idx[ep]
            win = realized[rows, ep] & ~matched_v[rows, uu] & ~matched_v[rows, vv]
            matched_e[rows, ep] |= win
            matched_v[rows[win], uu[win]] = True
            matched_v[rows[win], vv[win]] = True

        q = _q_counts(realized, key, topo)
        revenue = np.zeros(count)
        if detail:
            probed = np.zeros((count, e), dtype=bool)
            probes = np.zeros((count, nv), dtype=np.int32)
            return _ChunkDetail(active, realized, probed, matched_e, q, revenue, probes)
        return _reduce_chunk(matched_e, q, revenue)


class SequentialPricingEngine:
    """Price-posting walk over a fractional menu solution.

    Each edge samples one price from its menu distribution up front (or no
    offer, with the leftover mass).  An arriving edge with a price proposes
    when both endpoints are free and patient and its attenuation coin
    succeeds; the proposal spends patience on both sides and is accepted
    with the menu probability of the sampled price.
    """

    def __init__(
        self,
        inst: PricingInstance,
        point: FractionalPoint,
        spec: AttenuationSpec,
        objective: str = "revenue",
    ):
        bad = fractional_point_violations(point, inst)
        if bad:
            raise ValueError(f"infeasible menu solution: {bad[0]}")
        self.topo = _Topology(inst)
        e = self.topo.n_edges
        coeffs = objective_coefficients(inst, objective)
        width = max((len(edg.menu) for edg in inst.edges), default=1)
        self.menu_y = np.zeros((e, width))
        self.menu_p = np.zeros((e, width))
        self.menu_r = np.zeros((e, width))  # reward paid on acceptance
        for i, edg in enumerate(inst.edges):
            for k, entry in enumerate(edg.menu):
                self.menu_y[i, k] = point.y.get((edg.id, entry.w), 0.0)
                self.menu_p[i, k] = entry.p
                c = coeffs[edg.id][k]
                self.menu_r[i, k] = c / entry.p if entry.p > 0 else 0.0
        self.x = (self.menu_y * self.menu_p).sum(axis=1)
        self.x_ref = self.x.copy()
        self.spec = spec
        # s_e from the induced marginals, for the a2 profile
        d = np.zeros(e)
        for i in range(e):
            nb = self.topo.neighbors[i]
            d[i] = self.x[nb].sum() if nb.size else 0.0
        self.s = 2.0 - d - self.x

    def run_chunk(self, seed: int, start: int, count: int, detail: bool = False):
        topo = self.topo
        e = topo.n_edges
        trials = np.arange(start, start + count, dtype=np.uint64)[:, None]
        units = np.arange(e, dtype=np.uint64)[None, :]
        t = hash_uniform(seed, trials, units, ARRIVAL)
        u_price = hash_uniform(seed, trials, units, PRICE)
        u_accept = hash_uniform(seed, trials, units, ACTIVE)
        prof = attenuation_profile(self.spec, t, self.x[None, :], self.s[None, :])
        propose_ok = hash_uniform(seed, trials, units, COIN) < prof

        # inverse-CDF menu draw: index -1 means no offer this trial
        cum = np.cumsum(self.menu_y, axis=1)
        idx = np.empty((count, e), dtype=np.int8)
        acc_p = np.zeros((count, e))
        reward = np.zeros((count, e))
        for i in range(e):
            pos = np.searchsorted(cum[i], u_price[:, i], side="right")
            # a draw at or beyond the total menu mass means no offer
            have = u_price[:, i] < cum[i, -1]
            pos = np.minimum(pos, self.menu_y.shape[1] - 1)
            idx[:, i] = np.where(have, pos, -1)
            acc_p[:, i] = np.where(have, self.menu_p[i, pos], 0.0)
            reward[:, i] = np.where(have, self.menu_r[i, pos], 0.0)

        would_accept = u_accept < acc_p
        realized = (idx >= 0) & propose_ok & would_accept

        order = np.argsort(t, axis=1, kind="stable")
        rows = np.arange(count)
        matched_v = np.zeros((count, topo.n_vertices), dtype=bool)
        matched_e = np.zeros((count, e), dtype=bool)
        probed_e = np.zeros((count, e), dtype=bool)
        pat = np.broadcast_to(topo.patience, (count, topo.n_vertices)).copy()
        revenue = np.zeros(count)
        for j in range(e):
            ep = order[:, j]
            uu, vv = topo.u_idx[ep], topo.v_idx[ep]
            free = ~matched_v[rows, uu] & ~matched_v[rows, vv]
            has_pat = (pat[rows, uu] > 0) & (pat[rows, vv] > 0)
            propose = free & has_pat & (idx[rows, ep] >= 0) & propose_ok[rows, ep]
            probed_e[rows, ep] |= propose
            pr = rows[propose]
            pat[pr, uu[propose]] -= 1
            pat[pr, vv[propose]] -= 1
            win = propose & would_accept[rows, ep]
            matched_e[rows, ep] |= win
            matched_v[rows[win], uu[win]] = True
            matched_v[rows[win], vv[win]] = True
            revenue[win] += reward[rows[win], ep[win]]

        q = _q_counts(realized, t, topo)
        if detail:
            probes = (topo.patience[None, :] - pat).astype(np.int32)
            return _ChunkDetail(realized, realized, probed_e, matched_e, q, revenue, probes)
        return _reduce_chunk(matched_e, q, revenue)


# --------------------------------------------------------------------------
# single-trial wrappers
# --------------------------------------------------------------------------

def _single(engine, rng: TrialRNG) -> TrialOutcome:
    det: _ChunkDetail = engine.run_chunk(rng.seed, rng.trial, 1, detail=True)
    topo = engine.topo
    flags = {
        eid: EdgeFlags(
            bool(det.active[0, i]),
            bool(det.realized[0, i]),
            bool(det.probed[0, i]),
            bool(det.matched[0, i]),
        )
        for i, eid in enumerate(topo.edge_ids)
    }
    matched = tuple(eid for i, eid in enumerate(topo.edge_ids) if det.matched[0, i])
    q = {eid: int(det.q[0, i]) for i, eid in enumerate(topo.edge_ids)}
    probes = {vid: int(det.probes_used[0, k]) for k, vid in enumerate(topo.vertex_ids)}
    return TrialOutcome(matched, flags, q, float(det.revenue[0]), probes)


def run_ro_ocrs_trial(inst, x, stats, spec, rng: TrialRNG) -> TrialOutcome:
    return _single(RoOcrsEngine(inst, x, stats, spec), rng)


def run_stochastic_ocrs_trial(inst, y, p, stats, spec, rng: TrialRNG) -> TrialOutcome:
    return _single(StochasticOcrsEngine(inst, y, p, stats, spec), rng)


def run_vertex_arrival_trial(inst, x, rng: TrialRNG) -> TrialOutcome:
    return _single(VertexArrivalEngine(inst, x), rng)


def run_sequential_pricing_trial(inst, point, spec, rng: TrialRNG, objective="revenue") -> TrialOutcome:
    return _single(SequentialPricingEngine(inst, point, spec, objective), rng)


# --------------------------------------------------------------------------
# Monte-Carlo aggregation
# --------------------------------------------------------------------------

def monte_carlo(
    engine,
    trials: int,
    master_seed: int,
    chunk_size: int = 16384,
    workers: int | None = None,
) -> SimulationReport:
    """Aggregate `trials` independent trials into a report.

    Per-trial streams are keyed by the absolute trial index, and reduction
    walks chunks in index order with integer counters, so the result is
    bit-identical for any worker count or chunk size.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if workers is None:
        workers = int(os.environ.get("OCRS_WORKERS", "1"))
    starts = list(range(0, trials, chunk_size))
    jobs = [(s, min(chunk_size, trials - s)) for s in starts]

    def work(job):
        s, n = job
        return engine.run_chunk(master_seed, s, n)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    n_edges = len(engine.topo.edge_ids)
    matched = np.zeros(n_edges, dtype=np.int64)
    r0 = np.zeros(n_edges, dtype=np.int64)
    r1 = np.zeros(n_edges, dtype=np.int64)
    for res in results:
        matched += res.matched
        r0 += res.r0
        r1 += res.r1
    rev_sum = math.fsum(res.revenue_sum for res in results)
    rev_sqsum = math.fsum(res.revenue_sqsum for res in results)

    edges = []
    min_ratio = math.inf
    for i, eid in enumerate(engine.topo.edge_ids):
        freq = matched[i] / trials
        lo, hi = wilson_interval(int(matched[i]), trials)
        xr = float(engine.x_ref[i])
        ratio = freq / xr if xr > 0 else math.nan
        if xr > 0:
            min_ratio = min(min_ratio, ratio)
        edges.append(
            EdgeReport(
                edge_id=eid,
                x_ref=xr,
                matched=int(matched[i]),
                r0=int(r0[i]),
                r1=int(r1[i]),
                freq=freq,
                ci_lo=lo,
                ci_hi=hi,
                freq_r0=r0[i] / trials,
                freq_r1=r1[i] / trials,
                ratio=ratio,
            )
        )
    mean = rev_sum / trials
    if trials > 1:
        var = max(0.0, (rev_sqsum - trials * mean * mean) / (trials - 1))
        rev_ci = Z99 * math.sqrt(var / trials)
    else:
        rev_ci = 0.0
    return SimulationReport(
        trials=trials,
        master_seed=master_seed,
        edges=tuple(edges),
        min_ratio=min_ratio if min_ratio < math.inf else math.nan,
        revenue_mean=mean,
        revenue_ci=rev_ci,
    )


# --------------------------------------------------------------------------
# exact oracles
# --------------------------------------------------------------------------

def exact_trivial_oracle(x: dict[str, float], inst: PricingInstance) -> dict[str, float]:
    """Exact match probabilities for the no-attenuation scheme.

    Equivalent to summing over every arrival order and active subset: the
    recursion draws the first arrival uniformly among remaining edges and
    branches on its activity.
    """
    edges = inst.edges
    m = len(edges)
    if m > 10:
        raise ValueError(f"exact oracle supports at most 10 edges, got {m}")
    vpos = inst.vertex_pos
    uv = [(vpos[e.u], vpos[e.v]) for e in edges]
    xs = [float(x.get(e.id, 0.0)) for e in edges]
    full = (1 << m) - 1

    @lru_cache(maxsize=None)
    def rec(rem: int, matched_v: int) -> tuple[float, ...]:
        if rem == 0:
            return (0.0,) * m
        k = bin(rem).count("1")
        acc = [0.0] * m
        w = 1.0 / k
        r = rem
        while r:
            low = r & -r
            i = low.bit_length() - 1
            r ^= low
            ui, vi = uv[i]
            free = not (matched_v >> ui & 1) and not (matched_v >> vi & 1)
            # inactive branch
            sub = rec(rem ^ low, matched_v)
            pi = xs[i]
            if pi < 1.0:
                wq = w * (1.0 - pi)
                for j in range(m):
                    acc[j] += wq * sub[j]
            if pi > 0.0:
                if free:
                    sub_a = rec(rem ^ low, matched_v | 1 << ui | 1 << vi)
                    wa = w * pi
                    acc[i] += wa
                    for j in range(m):
                        acc[j] += wa * sub_a[j]
                else:
                    wa = w * pi
                    for j in range(m):
                        acc[j] += wa * sub[j]
        return tuple(acc)

    probs = rec(full, 0)
    rec.cache_clear()
    return {e.id: probs[i] for i, e in enumerate(edges)}


def _auto_objective(inst: PricingInstance) -> str:
    every_c = all(entry.c is not None for e in inst.edges for entry in e.menu)
    return "custom" if every_c else "revenue"


def optimal_policy_dp(inst: PricingInstance, objective: str | None = None) -> float:
    """Exact optimum over adaptive probe policies (order, prices, stopping).

    State is (set of probed edges, set of matched vertices); patience used
    at a vertex equals its probed incident edges, since a policy only ever
    probes edges whose endpoints are currently free.
    """
    if objective is None:
        objective = _auto_objective(inst)
    options = [(i, k) for i, e in enumerate(inst.edges) for k in range(len(e.menu))]
    if len(options) > 12:
        est = 2 ** len(inst.edges) * 2 ** len(inst.vertices)
        raise ValueError(
            f"instance too large for exact policy optimum: {len(options)} probe "
            f"options, state space on the order of {est}"
        )
    coeffs = objective_coefficients(inst, objective)
    vpos = inst.vertex_pos
    edges = inst.edges
    uv = [(vpos[e.u], vpos[e.v]) for e in edges]
    inc_mask = [0] * len(inst.vertices)
    for i, e in enumerate(edges):
        inc_mask[vpos[e.u]] |= 1 << i
        inc_mask[vpos[e.v]] |= 1 << i
    pat = [v.patience for v in inst.vertices]

    @lru_cache(maxsize=None)
    def value(offered: int, matched_v: int) -> float:
        best = 0.0
        for i, e in enumerate(edges):
            if offered >> i & 1:
                continue
            ui, vi = uv[i]
            if matched_v >> ui & 1 or matched_v >> vi & 1:
                continue
            used_u = bin(offered & inc_mask[ui]).count("1")
            used_v = bin(offered & inc_mask[vi]).count("1")
            if pat[ui] is not None and used_u >= pat[ui]:
                continue
            if pat[vi] is not None and used_v >= pat[vi]:
                continue
            for k, entry in enumerate(e.menu):
                c = coeffs[e.id][k]
                r = c / entry.p if entry.p > 0 else 0.0
                nxt_offered = offered | 1 << i
                val = entry.p * (r + value(nxt_offered, matched_v | 1 << ui | 1 << vi))
                val += (1.0 - entry.p) * value(nxt_offered, matched_v)
                if val > best:
                    best = val
        return best

    out = value(0, 0)
    value.cache_clear()
    return out


def greedy_baseline(
    inst: PricingInstance, rule: str, objective: str | None = None
) -> float:
    """Expected value of probing (edge, price) options in a fixed sorted order.

    ``by_weight`` sorts by price descending, ``by_expected_weight`` by
    price*probability descending; ties break on edge id then menu position.
    A probe spends its edge — later options on the same edge are skipped.
    """
    if rule not in ("by_weight", "by_expected_weight"):
        raise ValueError(f"unknown greedy rule: {rule!r}")
    if objective is None:
        objective = _auto_objective(inst)
    coeffs = objective_coefficients(inst, objective)
    vpos = inst.vertex_pos
    edges = inst.edges
    options = []
    for i, e in enumerate(edges):
        for k, entry in enumerate(e.menu):
            sort_key = entry.w if rule == "by_weight" else entry.w * entry.p
            options.append((-sort_key, e.id, k, i))
    options.sort()
    inc_mask = [0] * len(inst.vertices)
    for i, e in enumerate(edges):
        inc_mask[vpos[e.u]] |= 1 << i
        inc_mask[vpos[e.v]] |= 1 << i
    pat = [v.patience for v in inst.vertices]
    uv = [(vpos[e.u], vpos[e.v]) for e in edges]

    @lru_cache(maxsize=None)
    def walk(pos: int, spent: int, matched_v: int) -> float:
        if pos == len(options):
            return 0.0
        _, _, k, i = options[pos]
        e = edges[i]
        ui, vi = uv[i]
        feasible = not (spent >> i & 1)
        feasible &= not (matched_v >> ui & 1) and not (matched_v >> vi & 1)
        if feasible and pat[ui] is not None:
            feasible &= bin(spent & inc_mask[ui]).count("1") < pat[ui]
        if feasible and pat[vi] is not None:
            feasible &= bin(spent & inc_mask[vi]).count("1") < pat[vi]
        if not feasible:
            return walk(pos + 1, spent, matched_v)
        entry = e.menu[k]
        c = coeffs[e.id][k]
        r = c / entry.p if entry.p > 0 else 0.0
        nxt = spent | 1 << i
        val = entry.p * (r + walk(pos + 1, nxt, matched_v | 1 << ui | 1 << vi))
        val += (1.0 - entry.p) * walk(pos + 1, nxt, matched_v)
        return val

    out = walk(0, 0, 0)
    walk.cache_clear()
    return out
