"""Exact checks of the probabilistic inequalities behind the self-reduction.

Each check evaluates both sides of an inequality exactly (Poisson-binomial DP,
sign enumeration, finite pmfs) and returns a ``Verdict``. The search helpers
draw random instances from a seeded generator, so every reported violation
can be replayed from its seed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from itertools import combinations, product
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from .graphs import generate_regular_graph

TOL = 1e-10
MAX_SIGNS = 20


class SizeTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ProbVector:
    entries: np.ndarray
    b: Optional[int] = None  # set when the entries are known to sum to b

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", arr)
        if arr.ndim != 1 or np.any(arr < 0) or np.any(arr > 1):
            raise ValueError("entries must be a vector in [0, 1]")
        if self.b is not None and abs(arr.sum() - self.b) > 1e-12:
            raise ValueError(f"entries sum to {arr.sum()!r}, tagged b={self.b}")

    def __len__(self) -> int:
        return self.entries.shape[0]


def _arr(y) -> np.ndarray:
    return y.entries if isinstance(y, ProbVector) else np.asarray(y, dtype=np.float64)


def poisson_binomial_pmf(y) -> np.ndarray:
    """pmf of the number of independent events with probabilities ``y``."""
    return _kernels.pb_pmf(_arr(y))


def poisson_binomial_pmf_bruteforce(y) -> np.ndarray:
    """Same pmf by summing over all 2^len(y) outcomes."""
    y = _arr(y)
    m = y.shape[0]
    pmf = np.zeros(m + 1)
    for outcome in product((0, 1), repeat=m):
        w = 1.0
        for p, o in zip(y, outcome):
            w *= p if o else 1.0 - p
        pmf[sum(outcome)] += w
    return pmf


def expected_abs_dev(y, b: int) -> float:
    """E|b - Y| for Y the Poisson-binomial count of ``y``."""
    pmf = poisson_binomial_pmf(y)
    return float(np.abs(b - np.arange(pmf.shape[0])) @ pmf)


def s_quantities(x, b: int) -> dict:
    x = _arr(x)
    srt = np.sort(x)[::-1]
    S = float(x.sum())
    S_b = float(srt[:b].sum())
    return {"S": S, "S_b": S_b, "S_rest": S - S_b}


def s_rest_bruteforce(x, b: int) -> float:
    x = _arr(x)
    best = max(sum(x[list(c)]) for c in combinations(range(x.shape[0]), b))
    return float(x.sum() - best)


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    check: str
    params_digest: str
    hypothesis: bool
    conclusion: bool
    lhs: float
    rhs: float
    margin: float
    seed: Optional[int] = None

    @property
    def violation(self) -> bool:
        return self.hypothesis and not self.conclusion

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def params_digest(**params) -> str:
    norm = {k: (np.asarray(v).round(15).tolist() if isinstance(v, (np.ndarray, list, tuple)) else v) for k, v in params.items()}
    blob = json.dumps(norm, sort_keys=True, default=float)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def check_deviation_lemma(x, y, b: int, seed: Optional[int] = None) -> Verdict:
    """Hypothesis sum|x-y| < S_rest/(1000 sqrt b); conclusion E|b-Y| >= the same."""
    x, y = _arr(x), _arr(y)
    thr = s_quantities(x, b)["S_rest"] / (1000 * math.sqrt(b))
    hyp = float(np.abs(x - y).sum()) < thr
    lhs = expected_abs_dev(y, b)
    return Verdict(
        "deviation", params_digest(x=x, y=y, b=b), hyp, lhs >= thr - TOL, lhs, thr, lhs - thr, seed
    )


def check_min_sum_bound(x, b: int, seed: Optional[int] = None) -> Verdict:
    x = _arr(x)
    lhs = float(np.minimum(x, 1 - x).sum())
    rhs = s_quantities(x, b)["S_rest"]
    return Verdict("min_sum", params_digest(x=x, b=b), True, lhs >= rhs - TOL, lhs, rhs, lhs - rhs, seed)


def check_khintchine(x, seed: Optional[int] = None) -> Verdict:
    """(1/sqrt 2)||x|| <= E|sum x_i eps_i| <= ||x||, by enumerating signs."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] > MAX_SIGNS:
        raise SizeTooLarge(f"{x.shape[0]} entries; sign enumeration is limited to {MAX_SIGNS}")
    e = _kernels.mean_abs_signed_sum(x)
    norm = float(np.sqrt((x * x).sum()))
    margin = min(e - norm / math.sqrt(2), norm - e)
    return Verdict("khintchine", params_digest(x=x), True, margin >= -TOL * max(1.0, norm), e, norm, margin, seed)


def check_paley_zygmund(values, probs, lam: float, seed: Optional[int] = None) -> Verdict:
    """P(Z >= lam E Z) >= (1-lam)^2 (E Z)^2 / E Z^2 for a finite pmf."""
    z = np.asarray(values, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    if np.any(z < 0):
        raise ValueError("Z must be nonnegative")
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    ez = float(p @ z)
    ez2 = float(p @ (z * z))
    lhs = float(p[z >= lam * ez - TOL * max(1.0, ez)].sum())
    rhs = (1 - lam) ** 2 * ez * ez / ez2 if ez2 > 0 else 0.0
    return Verdict(
        "paley_zygmund", params_digest(z=z, p=p, lam=lam), True, lhs >= rhs - TOL, lhs, rhs, lhs - rhs, seed
    )


def check_b1_lemma(x, y, seed: Optional[int] = None) -> Verdict:
    """b = 1: with M = 1 - max x, sum|x-y| < M/1000 implies
    E|Y-1| >= M/1000, and already P(Y >= 2) >= M/1000."""
    x, y = _arr(x), _arr(y)
    thr = (1 - float(x.max())) / 1000
    hyp = float(np.abs(x - y).sum()) < thr
    pmf = poisson_binomial_pmf(y)
    dev = float(np.abs(1 - np.arange(pmf.shape[0])) @ pmf)
    tail = float(pmf[2:].sum())
    margin = min(dev, tail) - thr
    return Verdict("b1", params_digest(x=x, y=y), hyp, margin >= -TOL, min(dev, tail), thr, margin, seed)


# ---------------------------------------------------------------------------
# random instances


def cap_to_unit(x: np.ndarray) -> np.ndarray:
    """Move mass above 1 onto uncapped entries in proportion; keeps the row sums."""
    x = np.array(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None]
    for _ in range(x.shape[1]):
        over = np.clip(x - 1, 0, None).sum(axis=1)
        if not np.any(over > 0):
            break
        x = np.minimum(x, 1.0)
        free = np.where(x < 1, x, 0.0)
        w = free.sum(axis=1, keepdims=True)
        x = x + np.divide(free, w, out=np.zeros_like(free), where=w > 0) * over[:, None]
    return x[0] if single else x


def sample_tagged(rng: np.random.Generator, delta: int, b: int, size: int = 1) -> np.ndarray:
    """Rows in [0,1]^delta summing to b: a mix of spread-out and near-0/1 vectors."""
    alpha = rng.choice([0.1, 0.5, 1.0, 3.0])
    x = b * rng.dirichlet(np.full(delta, alpha), size=size)
    sharp = rng.random(size) < 0.5
    if sharp.any():
        # close to a deterministic choice of b ports
        base = np.zeros((int(sharp.sum()), delta))
        for r in range(base.shape[0]):
            base[r, rng.choice(delta, b, replace=False)] = 1.0
        mix = rng.random((base.shape[0], 1)) ** 3
        x[sharp] = (1 - mix) * base + mix * x[sharp]
    x = cap_to_unit(x)
    # re-normalize away float drift
    x *= b / x.sum(axis=1, keepdims=True)
    return np.clip(x, 0.0, 1.0)


def perturb(rng: np.random.Generator, x: np.ndarray, budget: float) -> np.ndarray:
    """y in [0,1]^delta with sum|x-y| strictly below ``budget``."""
    if budget <= 0:
        return x.copy()
    d = rng.normal(size=x.shape)
    d *= rng.random() * budget / max(np.abs(d).sum(), 1e-300)
    y = np.clip(x + d, 0.0, 1.0)
    return y


@dataclass
class SearchSummary:
    check: str
    seed: int
    tried: int
    hypothesis_true: int
    violations: int
    min_margin: float

    def as_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(d["min_margin"]):
            d["min_margin"] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _summarize(name: str, seed: int, verdicts: Sequence[Verdict]) -> SearchSummary:
    hyp = [v for v in verdicts if v.hypothesis]
    return SearchSummary(
        name,
        seed,
        len(verdicts),
        len(hyp),
        sum(v.violation for v in verdicts),
        min((v.margin for v in hyp), default=math.inf),
    )


def deviation_search(
    count: int, delta_max: int = 16, bs: Sequence[int] = (1, 2, 4), seed: int = 0, delta: Optional[int] = None
) -> Iterator[Verdict]:
    """``count`` hypothesis-satisfying pairs; instance k is replayable from seed+k."""
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        b = int(rng.choice([c for c in bs if 2 * c <= (delta or delta_max)]))
        d = delta or int(rng.integers(max(2, 2 * b), delta_max + 1))
        x = sample_tagged(rng, d, b)[0]
        thr = s_quantities(x, b)["S_rest"] / (1000 * math.sqrt(b))
        y = x.copy() if rng.random() < 0.1 else perturb(rng, x, thr)
        yield check_deviation_lemma(x, y, b, seed=k + seed)


def b1_search(count: int, delta_max: int = 16, seed: int = 0) -> Iterator[Verdict]:
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        d = int(rng.integers(2, delta_max + 1))
        x = sample_tagged(rng, d, 1)[0]
        y = x.copy() if rng.random() < 0.1 else perturb(rng, x, (1 - x.max()) / 1000)
        yield check_b1_lemma(x, y, seed=k + seed)


def khintchine_search(count: int, n_max: int = 16, seed: int = 0) -> Iterator[Verdict]:
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        n = int(rng.integers(1, n_max + 1))
        x = rng.normal(size=n) * rng.choice([1e-3, 1.0, 1e3])
        if rng.random() < 0.2:
            x = np.round(x)  # integer vectors hit the equality cases
        yield check_khintchine(x, seed=k + seed)


def paley_zygmund_search(count: int, support_max: int = 8, lambdas: Sequence[float] = (0, 0.25, 0.5, 0.75, 1), seed: int = 0) -> Iterator[Verdict]:
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        m = int(rng.integers(1, support_max + 1))
        z = rng.exponential(size=m) * (rng.random(m) < 0.7)
        p = rng.dirichlet(np.ones(m))
        for lam in lambdas:
            yield check_paley_zygmund(z, p, float(lam), seed=k + seed)


def min_sum_search(count: int, delta_max: int = 32, seed: int = 0, batch: int = 1000) -> SearchSummary:
    """Vectorized: ``count`` tagged vectors, b <= delta/2, via the margin kernel."""
    rng = np.random.default_rng(seed)
    done = 0
    violations = 0
    worst = math.inf
    while done < count:
        size = min(batch, count - done)
        d = int(rng.integers(2, delta_max + 1))
        b = int(rng.integers(1, d // 2 + 1))
        X = sample_tagged(rng, d, b, size)
        margins = _kernels.min_sum_margins(X, b)
        violations += int((margins < -TOL).sum())
        worst = min(worst, float(margins.min()))
        done += size
    return SearchSummary("min_sum", seed, count, count, violations, worst)


def witness_joint_law(x, tol: float = 1e-12) -> dict[tuple[int, ...], float]:
    """A joint law of events with marginals ``x`` where exactly sum(x) occur.

    Systematic sampling: with U uniform on [0,1), event i occurs when some
    point U + k lies in [c_{i-1}, c_i), c the cumulative sums. Requires every
    x_i <= 1 and an integer total.
    """
    x = _arr(x)
    total = x.sum()
    b = int(round(total))
    if abs(total - b) > 1e-9 or np.any(x < 0) or np.any(x > 1):
        raise ValueError("need entries in [0,1] with an integer sum")
    cum = np.concatenate(([0.0], np.cumsum(x)))
    cum[-1] = b
    cuts = sorted({float(c % 1.0) for c in cum} | {0.0, 1.0})
    law: dict[tuple[int, ...], float] = {}
    for lo, hi in zip(cuts, cuts[1:]):
        if hi - lo <= tol:
            continue
        u = (lo + hi) / 2
        chosen = tuple(int(np.searchsorted(cum, u + k, side="right") - 1) for k in range(b))
        law[chosen] = law.get(chosen, 0.0) + (hi - lo)
    return law


# ---------------------------------------------------------------------------
# zero-round game


@dataclass(frozen=True)
class Strategy:
    """A distribution over b-subsets of local port labels."""

    name: str
    subsets: tuple[tuple[int, ...], ...]
    probs: tuple[float, ...]


def uniform_strategy(delta: int, b: int) -> Strategy:
    subs = tuple(combinations(range(delta), b))
    return Strategy("uniform", subs, tuple([1 / len(subs)] * len(subs)))


def constant_strategy(delta: int, b: int) -> Strategy:
    return Strategy("constant", (tuple(range(b)),), (1.0,))


def biased_strategy(delta: int, b: int) -> Strategy:
    """First b labels when a private bit (P=3/4) is set, else the last b."""
    first = tuple(range(b))
    last = tuple(range(delta - b, delta))
    if first == last:
        return Strategy("bit-biased", (first,), (1.0,))
    return Strategy("bit-biased", (first, last), (0.75, 0.25))


def strategy_zoo(delta: int, b: int) -> list[Strategy]:
    return [uniform_strategy(delta, b), constant_strategy(delta, b), biased_strategy(delta, b)]


@dataclass
class ZeroRoundResult:
    strategy: str
    delta: int
    b: int
    trials: int
    mean: float
    std: float

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.trials)


def zero_round_badness(
    strategy: Strategy, delta: int, b: int, trials: int, seed: int = 0, n: Optional[int] = None, chunk: int = 2000
) -> ZeroRoundResult:
    """Empirical badness of a 0-round strategy on a random delta-regular graph.

    Each trial draws fresh uniform port labelings for every node and one
    subset per node from ``strategy``.
    """
    if 2 * b > delta:
        raise ValueError("need b <= delta/2")
    if n is None:
        n = 50 if (50 * delta) % 2 == 0 else 51
    g = generate_regular_graph(n, delta, seed)
    rng = np.random.default_rng([seed, 1])
    subsets = np.array(strategy.subsets, dtype=np.int64).reshape(len(strategy.subsets), b)
    cum = np.cumsum(strategy.probs)
    cum[-1] = 1.0
    values = np.empty(trials)
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        perms = rng.random((m, n, delta)).argsort(axis=2)
        idx = np.searchsorted(cum, rng.random((m, n)), side="right")
        sel = subsets[np.minimum(idx, len(cum) - 1)]
        q = _kernels.zero_round_matches(sel, perms, g.nbr_array, g.rev_array)
        values[start : start + m] = 1 - 2 * q / (b * n)
    std = float(values.std(ddof=1)) if trials > 1 else 0.0
    return ZeroRoundResult(strategy.name, delta, b, trials, float(values.mean()), std)
