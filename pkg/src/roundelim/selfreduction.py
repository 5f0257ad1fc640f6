"""Round elimination by self-reduction.

From a T-round grabbing algorithm, build the (T-1)-round one that grabs the
b ports most likely to be grabbed given the node's radius-(T-1) view, and
measure what that costs in badness.

Conditioning convention: the host graph, its ports and every node's port
permutation are fixed experiment constants. A radius-(T-1) view fixes the
ids and bits inside it plus the shared bits; the extensions range over the
ids (when the rule reads them) and bits of the nodes at distance exactly T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from statistics import NormalDist
from typing import Iterator, Optional, Sequence

import numpy as np

from .graphs import PortedGraph, extract_ball
from .local import (
    GRABBING,
    AlgorithmDescriptor,
    BudgetTooLarge,
    Inputs,
    NodeInputs,
    View,
    _stream,
    enumerate_inputs,
    enumeration_cost,
    extract_view,
    node_output,
    redraw,
    run_algorithm,
    stable_digest,
)
from .problems import score_grabbing, verify_b_grabbing

DEFAULT_CAP = 24
DEFAULT_SAMPLES = 10_000
Z99 = NormalDist().inv_cdf(0.995)


class DomainError(ValueError):
    pass


@dataclass
class DirectionStats:
    x: np.ndarray
    b: int
    preferred: tuple[int, ...]
    mode: str = "exact"
    samples: int = 0
    stderr: Optional[np.ndarray] = None

    @property
    def S(self) -> float:
        return float(self.x.sum())

    @property
    def S_b(self) -> float:
        return float(self.x[list(self.preferred)].sum())

    @property
    def S_rest(self) -> float:
        mask = np.ones(self.x.shape[0], dtype=bool)
        mask[list(self.preferred)] = False
        return float(self.x[mask].sum())


def preferred_directions(x: Sequence[float], b: int, labels: Optional[Sequence[int]] = None) -> tuple[int, ...]:
    """Indices of the b largest entries; ties go to the smaller label.

    ``labels`` gives each index's local port label (default: the index).
    """
    x = list(x)
    if b > len(x):
        raise ValueError(f"b={b} exceeds {len(x)} directions")
    labels = list(range(len(x))) if labels is None else list(labels)
    order = sorted(range(len(x)), key=lambda i: (-x[i], labels[i]))
    return tuple(sorted(order[:b]))


def _assignments(base: Inputs, hosts: Sequence[int], reads_ids: bool) -> Iterator[tuple[NodeInputs, ...]]:
    choices = []
    for h in hosts:
        old = base.nodes[h]
        ids = range(1, base.id_max + 1) if reads_ids else (old.id,)
        choices.append([NodeInputs(i, old.port_perm, bits) for i in ids for bits in range(1 << base.R)])
    return product(*choices)


def _sample_assignments(
    base: Inputs, hosts: Sequence[int], reads_ids: bool, samples: int, rng: np.random.Generator
) -> Iterator[tuple[NodeInputs, ...]]:
    k = len(hosts)
    ids = (
        rng.integers(1, base.id_max + 1, size=(samples, k))
        if reads_ids
        else np.array([[base.nodes[h].id for h in hosts]] * samples).reshape(samples, k)
    )
    if base.R <= 64:
        bits = rng.integers(0, 2**base.R, size=(samples, k), dtype=np.uint64) if base.R else np.zeros((samples, k), np.uint64)
        bits = [[int(b) for b in row] for row in bits]
    else:
        words = -(-base.R // 64)
        raw = rng.integers(0, 2**64, size=(samples, k, words), dtype=np.uint64)
        mask = (1 << base.R) - 1
        bits = [[sum(int(w) << (64 * t) for t, w in enumerate(cell)) & mask for cell in row] for row in raw]
    for s in range(samples):
        yield tuple(NodeInputs(int(ids[s, t]), base.nodes[h].port_perm, bits[s][t]) for t, h in enumerate(hosts))


def estimate_direction_profile(
    g: PortedGraph,
    base: Inputs,
    v: int,
    alg: AlgorithmDescriptor,
    mode: str = "exact",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    cap: int = DEFAULT_CAP,
) -> DirectionStats:
    """x_i(v): probability that ``alg`` grabs port i of v, given v's (T-1)-view.

    The (T-1)-view is read off ``base``. Exact mode enumerates every input
    assignment of the nodes at distance T; ``monte_carlo`` draws ``samples``
    of them from a substream keyed by ``seed`` and the conditioning.
    """
    T = alg.radius
    if T < 1:
        raise ValueError("need an algorithm with radius >= 1")
    if alg.kind != GRABBING:
        raise TypeError("direction profiles are defined for grabbing algorithms")
    ball = extract_ball(g, v, T)
    depth = ball.distances_from(0)
    frontier = [k for k in range(ball.n) if depth[k] == T]
    hosts = [ball.origin[k] for k in frontier]
    nodes = [base.nodes[h] for h in ball.origin]
    deg = len(ball.ports[0])
    counts = np.zeros(deg, dtype=np.int64)

    if mode == "exact":
        cost = enumeration_cost(base, len(hosts), alg.reads_ids)
        if cost > cap:
            raise BudgetTooLarge(f"node {v}: {len(hosts)} frontier nodes need {cost} enumerated bits, cap is {cap}")
        draws = _assignments(base, hosts, alg.reads_ids)
    elif mode in ("mc", "monte_carlo"):
        key = (seed, v, tuple(nodes[k] for k in range(ball.n) if depth[k] < T), base.shared)
        rng = _stream(seed, 4, stable_digest(key) & 0x7FFFFFFFFFFFFFFF)
        draws = _sample_assignments(base, hosts, alg.reads_ids, samples, rng)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    total = 0
    for assignment in draws:
        for k, inp in zip(frontier, assignment):
            nodes[k] = inp
        view = View(ball, tuple(nodes), base.shared, T, base.R)
        for i in node_output(alg, view):
            counts[i] += 1
        total += 1

    x = counts / total
    labels = base.nodes[v].port_perm
    pref = preferred_directions(x, alg.param, labels)
    if mode == "exact":
        return DirectionStats(x, alg.param, pref, "exact", total)
    stderr = np.sqrt(x * (1 - x) / total)
    return DirectionStats(x, alg.param, pref, "monte_carlo", total, stderr)


class DerivedRule:
    """The (T-1)-round rule: grab the preferred directions of the T-round one.

    Profiles are memoized on (host node, inputs inside the view, shared bits),
    which together with the fixed host graph determine the extension set.
    """

    def __init__(self, alg: AlgorithmDescriptor, g: PortedGraph, base: Inputs, mode: str, samples: int, seed: int, cap: int):
        self.alg = alg
        self.g = g
        self.base = base
        self.mode = mode
        self.samples = samples
        self.seed = seed
        self.cap = cap
        self._cache: dict = {}

    def stats(self, view: View) -> DirectionStats:
        h = view.host
        if h is None:
            raise ValueError("derived rules need views extracted from their host graph")
        overlay = tuple(sorted(zip(view.ball.origin, view.nodes)))
        key = (h, overlay, view.shared)
        hit = self._cache.get(key)
        if hit is None:
            cond = self.base.with_nodes(dict(overlay))
            cond = Inputs(cond.nodes, view.shared, cond.R, cond.R_shared, cond.id_max)
            hit = estimate_direction_profile(
                self.g, cond, h, self.alg, self.mode, self.samples, self.seed, self.cap
            )
            self._cache[key] = hit
        return hit

    def profiles(self) -> list[DirectionStats]:
        """Every profile computed so far."""
        return list(self._cache.values())

    def __call__(self, view: View):
        return list(self.stats(view).preferred)


def derive_one_round_faster(
    alg: AlgorithmDescriptor,
    g: PortedGraph,
    base: Inputs,
    mode: str = "exact",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    cap: int = DEFAULT_CAP,
) -> AlgorithmDescriptor:
    if alg.radius < 1:
        raise ValueError("cannot speed up a 0-round algorithm")
    if alg.kind != GRABBING:
        raise TypeError("the self-reduction applies to grabbing algorithms")
    rule = DerivedRule(alg, g, base, mode, samples, seed, cap)
    return AlgorithmDescriptor(
        alg.radius - 1, GRABBING, alg.param, rule, name=f"derived({alg.name})", reads_ids=alg.reads_ids
    )


# ---------------------------------------------------------------------------
# badness


@dataclass
class BadnessEstimate:
    mean: float
    std: float
    ci_low: float
    ci_high: float
    trials: int
    exact: bool = False


def _all_configs(g: PortedGraph, base: Inputs, reads_ids: bool, cap: int) -> Iterator[Inputs]:
    return enumerate_inputs(base, range(g.n), reads_ids, with_shared=True, cap=cap)


def exact_badness(g: PortedGraph, base: Inputs, alg: AlgorithmDescriptor, cap: int = DEFAULT_CAP) -> BadnessEstimate:
    """Expected badness over the whole input space, by enumeration."""
    values = [score_grabbing(run_algorithm(g, w, alg), g, alg.param).p for w in _all_configs(g, base, alg.reads_ids, cap)]
    mean = float(np.mean(values))
    return BadnessEstimate(mean, float(np.std(values)), mean, mean, len(values), exact=True)


def trial_seed(seed: int, t: int) -> int:
    return int(np.random.SeedSequence([seed, t]).generate_state(1, np.uint64)[0])


def measure_badness(
    g: PortedGraph, base: Inputs, alg: AlgorithmDescriptor, trials: int, seed: int = 0
) -> BadnessEstimate:
    """Monte-Carlo mean badness with a 99% normal-approximation interval.

    Each trial redraws ids and bits; ports stay as in ``base``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    values = np.empty(trials)
    for t in range(trials):
        lab = run_algorithm(g, redraw(base, trial_seed(seed, t)), alg)
        values[t] = score_grabbing(lab, g, alg.param).p
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if trials > 1 else 0.0
    half = Z99 * std / math.sqrt(trials)
    return BadnessEstimate(mean, std, mean - half, mean + half, trials)


# ---------------------------------------------------------------------------
# exact audits


@dataclass
class AuditRecord:
    n: int
    b: int
    configs: int
    E_MM_0: float
    E_MM_1: float
    E_MU_0: float
    H_wrong: float
    sum_S_rest: float
    max_S_error: float
    all_valid: bool

    @property
    def p0(self) -> float:
        return 1 - 2 * self.E_MM_0 / (self.b * self.n)

    @property
    def p1(self) -> float:
        return 1 - 2 * self.E_MM_1 / (self.b * self.n)

    def S_check(self, tol: float = 1e-12) -> bool:
        return self.max_S_error <= tol

    def H_wrong_eq(self, tol: float = 1e-9) -> bool:
        return abs(self.H_wrong - self.sum_S_rest) <= tol

    def MM_chain(self, tol: float = 1e-9) -> bool:
        return self.E_MM_1 >= self.E_MM_0 - self.H_wrong - tol

    def MU_bound(self, tol: float = 1e-9) -> bool:
        return self.E_MU_0 <= self.b * self.n * self.p0 + tol

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "b": self.b,
            "configs": self.configs,
            "E_MM_0": self.E_MM_0,
            "E_MM_1": self.E_MM_1,
            "E_MU_0": self.E_MU_0,
            "H_wrong": self.H_wrong,
            "sum_S_rest": self.sum_S_rest,
            "p0": self.p0,
            "p1": self.p1,
            "max_S_error": self.max_S_error,
            "S_check": bool(self.S_check()),
            "H_wrong_eq": bool(self.H_wrong_eq()),
            "MM_chain": bool(self.MM_chain()),
            "MU_bound": bool(self.MU_bound()),
            "no_error": self.all_valid,
        }


def wrong_half_edge_audit(
    g: PortedGraph,
    base: Inputs,
    alg0: AlgorithmDescriptor,
    alg1: Optional[AlgorithmDescriptor] = None,
    cap: int = DEFAULT_CAP,
) -> AuditRecord:
    """Exact expectations behind the one-step badness bound.

    ``alg1`` must come from ``derive_one_round_faster`` (exact mode); it is
    derived here when omitted.
    """
    if alg1 is None:
        alg1 = derive_one_round_faster(alg0, g, base, "exact", cap=cap)
    if not isinstance(alg1.rule, DerivedRule):
        raise TypeError("alg1 must be a derived algorithm")
    b, T = alg0.param, alg0.radius
    sums = np.zeros(5)
    max_err = 0.0
    valid = True
    count = 0
    for w in _all_configs(g, base, alg0.reads_ids, cap):
        lab0 = run_algorithm(g, w, alg0)
        lab1 = run_algorithm(g, w, alg1)
        valid &= bool(verify_b_grabbing(lab0, b)) and bool(verify_b_grabbing(lab1, b))
        c0 = lab0.edge_classes(g)
        c1 = lab1.edge_classes(g)
        wrong = int(((lab0.labels == 1) & (lab1.labels == 0)).sum())
        s_rest = 0.0
        for v in range(g.n):
            st = alg1.rule.stats(extract_view(g, w, v, T - 1))
            s_rest += st.S_rest
            max_err = max(max_err, abs(st.S - b))
        sums += (c0["MM"], c1["MM"], c0["MU"], wrong, s_rest)
        count += 1
    mm0, mm1, mu0, hw, sr = (float(t) for t in sums / count)
    return AuditRecord(g.n, b, count, mm0, mm1, mu0, hw, sr, float(max_err), bool(valid))


@dataclass
class ConditionalMU:
    node: int
    condition: tuple
    expected_mu: float
    S_rest: float
    threshold: float

    @property
    def holds(self) -> bool:
        return self.expected_mu >= self.threshold


def conditional_mu_bound(
    g: PortedGraph, base: Inputs, alg: AlgorithmDescriptor, v: int, cap: int = DEFAULT_CAP
) -> list[ConditionalMU]:
    """E[#MU edges at v | (T-1)-view of v] against S_rest(v)/(1000 sqrt b).

    One record per possible (T-1)-view (inputs inside it and shared bits).
    The MU count at v involves outputs of v and its neighbors, so the
    averaging runs over inputs at distance T and T+1 from v.
    """
    T, b = alg.radius, alg.param
    dist = g.distances_from(v, T + 1)
    inner = sorted(h for h, d in dist.items() if d <= T - 1)
    region = sorted(h for h, d in dist.items() if T <= d <= T + 1)
    if enumeration_cost(base, len(region), alg.reads_ids) > cap:
        raise BudgetTooLarge(f"node {v}: region of {len(region)} nodes exceeds cap {cap}")
    nbrs = [(i, p[0], p[1]) for i, p in enumerate(g.ports[v]) if p is not None]
    out = []
    for cond in enumerate_inputs(base, inner, alg.reads_ids, with_shared=True, cap=cap):
        stats = estimate_direction_profile(g, cond, v, alg, "exact", cap=cap)
        total = 0
        count = 0
        for w in enumerate_inputs(cond, region, alg.reads_ids):
            mine = set(node_output(alg, extract_view(g, w, v, T)))
            for i, u, j in nbrs:
                theirs = j in node_output(alg, extract_view(g, w, u, T))
                total += (i in mine) != theirs
            count += 1
        key = (tuple((h, cond.nodes[h]) for h in inner), cond.shared)
        out.append(ConditionalMU(v, key, total / count, stats.S_rest, stats.S_rest / (1000 * math.sqrt(b))))
    return out


# ---------------------------------------------------------------------------
# iteration and the round bound


@dataclass
class Stage:
    stage: int
    radius: int
    badness: BadnessEstimate
    envelope: float
    no_error: bool = True
    alg: Optional[AlgorithmDescriptor] = field(default=None, repr=False)


def iterate_self_reduction(
    alg: AlgorithmDescriptor,
    g: PortedGraph,
    base: Inputs,
    mode: str = "exact",
    trials: int = 100,
    seed: int = 0,
    c_const: float = 2.0,
    samples: int = DEFAULT_SAMPLES,
    cap: int = DEFAULT_CAP,
) -> list[Stage]:
    """Derive down to radius 0, recording badness at every stage.

    Badness is computed exactly when ``mode`` is exact and the whole input
    space fits under ``cap``; otherwise by ``trials`` Monte-Carlo runs.
    """
    stages: list[Stage] = []
    current = alg
    p0 = None
    k = 0
    while True:
        exact = mode == "exact" and enumeration_cost(base, g.n, current.reads_ids, True) <= cap
        est = exact_badness(g, base, current, cap) if exact else measure_badness(g, base, current, trials, seed + k)
        ok = bool(verify_b_grabbing(run_algorithm(g, base, current), current.param))
        if p0 is None:
            p0 = est.mean
        stages.append(Stage(k, current.radius, est, p0 * (c_const * math.sqrt(current.param)) ** k, ok, current))
        if current.radius == 0:
            return stages
        current = derive_one_round_faster(current, g, base, mode, samples, seed, cap)
        k += 1


def trajectory_csv(stages: Sequence[Stage]) -> str:
    lines = ["stage,radius,badness_mean,badness_ci_low,badness_ci_high,envelope"]
    for s in stages:
        e = s.badness
        lines.append(f"{s.stage},{s.radius},{e.mean!r},{e.ci_low!r},{e.ci_high!r},{s.envelope!r}")
    return "\n".join(lines) + "\n"


def round_bound(p: float, b: int, delta: int, n: float, epsilon: float = 0.25, c_const: float = 2.0) -> float:
    """min(eps/4 * log_delta n, log(1/(2p)) / log(c sqrt b))."""
    if not 0 < p < 0.5:
        raise DomainError(f"need 0 < p < 1/2, got p={p}")
    base = c_const * math.sqrt(b)
    if base <= 1:
        raise DomainError(f"need c*sqrt(b) > 1, got {base}")
    locality = epsilon / 4 * math.log(n) / math.log(delta)
    return min(locality, math.log(1 / (2 * p)) / math.log(base))
