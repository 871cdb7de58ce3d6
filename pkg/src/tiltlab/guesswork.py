"""Exhaustive guesswork machinery.

Builds the optimal (most-likely-first) and reverse orderings over all
length-n strings, with probability ties broken lexicographically, and on top
of that the exact guesswork PMF, tilted weakly typical sets, and a ledger of
the finite-n probability / size / rank bounds those sets satisfy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import AlphabetMismatch, UnknownString, UnknownSymbol
from .measures import (
    cross_entropy,
    cross_varentropy,
    entropy,
    relative_entropy,
)
from .numeric import log_sum_exp
from .sources import (
    DEFAULT_BUDGET,
    CategoricalSource,
    SequenceSource,
    enumerate_word_log_probs,
    tilt,
    validate,
)

#: strings whose log-probs differ by less than this (times n) count as tied
TIE_TOL_PER_SYMBOL = 1e-12


def _rank_order(logp: np.ndarray, tie_tol: float) -> np.ndarray:
    """Lexicographic indices sorted by (-log-prob, lex index).

    A stable argsort already leaves bit-equal probabilities in lexicographic
    order; groups of near-equal values (within tie_tol) are re-sorted so the
    numeric tie guard gives the same treatment.
    """
    sorted_idx = np.argsort(-logp, kind="stable")
    slp = logp[sorted_idx]
    starts = np.empty(slp.size, dtype=bool)
    starts[0] = True
    with np.errstate(invalid="ignore"):
        np.greater(slp[:-1] - slp[1:], tie_tol, out=starts[1:])
    group = np.cumsum(starts)
    return sorted_idx[np.lexsort((sorted_idx, group))]


@dataclass(frozen=True, eq=False)
class RankTable:
    """All |alphabet|^n strings with their log-prob, guesswork G and reverse rank R.

    G is a bijection onto 1..|alphabet|^n ordered by decreasing probability
    (lexicographic tie-break); R = |alphabet|^n + 1 - G, so the least likely
    string has R = 1 and log R stays finite.
    """

    source: SequenceSource
    n: int
    log_probs: np.ndarray  # indexed by lexicographic string index
    order: np.ndarray  # rank - 1  -> lexicographic string index
    rank_of: np.ndarray  # lexicographic string index -> G

    @property
    def size(self) -> int:
        return self.log_probs.size

    def index_of(self, x) -> int:
        try:
            idx = self.source.alphabet.encode(x)
        except (UnknownSymbol, ValueError) as exc:
            raise UnknownString(str(exc)) from exc
        if idx.size != self.n:
            raise UnknownString(f"expected a string of length {self.n}")
        k = len(self.source.alphabet)
        out = 0
        for d in idx:
            out = out * k + int(d)
        return out

    def string_at(self, lex_index: int) -> str:
        k = len(self.source.alphabet)
        digits = []
        for _ in range(self.n):
            lex_index, d = divmod(lex_index, k)
            digits.append(d)
        return self.source.alphabet.decode(reversed(digits))

    def guesswork(self, x) -> int:
        return int(self.rank_of[self.index_of(x)])

    def reverse_guesswork(self, x) -> int:
        return self.size + 1 - self.guesswork(x)

    def log_guesswork(self, x) -> float:
        return math.log(self.guesswork(x))

    def log_reverse_guesswork(self, x) -> float:
        return math.log(self.reverse_guesswork(x))

    def pmf(self) -> np.ndarray:
        """Probability at each rank; pmf()[r - 1] is the rank-r probability."""
        return np.exp(self.log_probs[self.order])

    def records(self) -> Iterator[tuple[str, float, int, int]]:
        """(string, log-prob, G, R) rows in rank order."""
        size = self.size
        for r, idx in enumerate(self.order, start=1):
            yield self.string_at(int(idx)), float(self.log_probs[idx]), r, size + 1 - r

    def tie_groups(self) -> np.ndarray:
        """Group id per rank position; equal ids mean tied probabilities."""
        slp = self.log_probs[self.order]
        starts = np.empty(slp.size, dtype=bool)
        starts[0] = True
        with np.errstate(invalid="ignore"):
            np.greater(slp[:-1] - slp[1:], TIE_TOL_PER_SYMBOL * self.n, out=starts[1:])
        return np.cumsum(starts)


def build_rank_table(
    source: SequenceSource, n: int, budget: int = DEFAULT_BUDGET
) -> RankTable:
    """Enumerate all length-n strings and assign optimal/reverse ranks."""
    logp = enumerate_word_log_probs(source, n, budget)
    order = _rank_order(logp, TIE_TOL_PER_SYMBOL * n)
    rank_of = np.empty(logp.size, dtype=np.int64)
    rank_of[order] = np.arange(1, logp.size + 1)
    for arr in (logp, order, rank_of):
        arr.setflags(write=False)
    return RankTable(source=source, n=n, log_probs=logp, order=order, rank_of=rank_of)


def guesswork(table: RankTable, x) -> int:
    return table.guesswork(x)


def reverse_guesswork(table: RankTable, x) -> int:
    return table.reverse_guesswork(x)


def guesswork_pmf(table: RankTable) -> np.ndarray:
    """Exact PMF of guesswork: entry r-1 is the probability of the rank-r string."""
    return table.pmf()


# ---------------------------------------------------------------------------
# Tilted weakly typical sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypicalSetSpec:
    """Query for a tilted weakly typical set: order alpha, width epsilon, length n."""

    alpha: float
    epsilon: float
    n: int

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be non-zero")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass(frozen=True)
class BoundCheck:
    """One evaluated inequality: lhs compared against rhs, with a pass flag.

    `vacuous` marks bounds that hold for structural reasons (empty quantifier
    set, or a lower bound whose concentration prefactor is non-positive).
    """

    bound_id: str
    lhs: float
    rhs: float
    passed: bool
    vacuous: bool = False

    @property
    def flag(self) -> str:
        if self.vacuous and self.passed:
            return "vacuous-pass"
        return "pass" if self.passed else "fail"


@dataclass(frozen=True, eq=False)
class SetReport:
    """Membership and bound ledger for one tilted weakly typical set query.

    The core set A collects strings whose log-prob lies strictly within
    n*epsilon of the cross-entropy level of the tilt; B is the half of A
    least likely under the tilt; D and E relax the window one-sidedly in
    tilted log-prob space.
    """

    spec: TypicalSetSpec
    a_members: np.ndarray  # lexicographic indices, ascending
    b_members: np.ndarray
    d_members: np.ndarray
    e_members: np.ndarray
    probability: float  # mu-probability of A
    size: int  # |A|
    bounds: tuple[BoundCheck, ...]
    table: RankTable

    def members(self, set_name: str) -> np.ndarray:
        return {
            "A": self.a_members,
            "B": self.b_members,
            "D": self.d_members,
            "E": self.e_members,
        }[set_name]

    def member_strings(self, set_name: str) -> list[str]:
        return [self.table.string_at(int(i)) for i in self.members(set_name)]

    @property
    def all_passed(self) -> bool:
        return all(b.passed for b in self.bounds)


def _min_over(values: np.ndarray, mask: np.ndarray) -> float:
    sel = values[mask]
    return float(sel.min()) if sel.size else math.inf


def _max_over(values: np.ndarray, mask: np.ndarray) -> float:
    sel = values[mask]
    return float(sel.max()) if sel.size else -math.inf


def typical_set(
    source: CategoricalSource,
    spec: TypicalSetSpec,
    budget: int = DEFAULT_BUDGET,
    table: Optional[RankTable] = None,
) -> SetReport:
    """Build the typical set of the requested order and evaluate its bounds."""
    validate(source)
    n, alpha, eps = spec.n, spec.alpha, spec.epsilon
    if table is None:
        table = build_rank_table(source, n, budget)

    tilted = tilt(source, alpha)
    level = n * cross_entropy(tilted, source)  # cross-entropy level of the window
    h_tilt = n * entropy(tilted)
    vx = n * cross_varentropy(tilted, source)
    dn = n * relative_entropy(tilted, source)

    logp = table.log_probs
    # tilted word log-probs share the type-class bit pattern of logp
    tilted_logp = alpha * logp - n * log_sum_exp(alpha * source.log_theta)

    half_width = n * eps
    a_mask = (logp > -level - half_width) & (logp < -level + half_width)
    tilted_width = n * abs(alpha) * eps
    d_mask = tilted_logp > -h_tilt - tilted_width
    e_mask = tilted_logp < -h_tilt + tilted_width

    a_idx = np.flatnonzero(a_mask)
    # B: the floor(|A|/2) members of A least likely under the tilt,
    # boundary ties resolved lexicographically.
    a_by_tilted = a_idx[np.lexsort((a_idx, tilted_logp[a_idx]))]
    b_idx = np.sort(a_by_tilted[: a_idx.size // 2])
    b_mask = np.zeros(logp.size, dtype=bool)
    b_mask[b_idx] = True

    probs = np.exp(logp)
    prob_a = float(probs[a_mask].sum())

    bounds = _bound_ledger(
        table=table,
        alpha=alpha,
        eps=eps,
        n=n,
        level=level,
        h_tilt=h_tilt,
        vx=vx,
        dn=dn,
        logp=logp,
        probs=probs,
        a_mask=a_mask,
        b_mask=b_mask,
        d_mask=d_mask,
        e_mask=e_mask,
        prob_a=prob_a,
    )

    return SetReport(
        spec=spec,
        a_members=a_idx,
        b_members=b_idx,
        d_members=np.flatnonzero(d_mask),
        e_members=np.flatnonzero(e_mask),
        probability=prob_a,
        size=int(a_idx.size),
        bounds=tuple(bounds),
        table=table,
    )


def _bound_ledger(
    *,
    table: RankTable,
    alpha: float,
    eps: float,
    n: int,
    level: float,
    h_tilt: float,
    vx: float,
    dn: float,
    logp: np.ndarray,
    probs: np.ndarray,
    a_mask: np.ndarray,
    b_mask: np.ndarray,
    d_mask: np.ndarray,
    e_mask: np.ndarray,
    prob_a: float,
) -> list[BoundCheck]:
    checks: list[BoundCheck] = []
    cheby = 1.0 - vx / (n * n * eps * eps)
    abs_alpha = abs(alpha)
    size_a = int(np.count_nonzero(a_mask))
    a_empty = size_a == 0

    # membership window (log domain, strict on both sides)
    checks.append(
        BoundCheck(
            "member_logprob_lower",
            lhs=_min_over(logp, a_mask),
            rhs=-level - n * eps,
            passed=a_empty or _min_over(logp, a_mask) > -level - n * eps,
            vacuous=a_empty,
        )
    )
    checks.append(
        BoundCheck(
            "member_logprob_upper",
            lhs=_max_over(logp, a_mask),
            rhs=-level + n * eps,
            passed=a_empty or _max_over(logp, a_mask) < -level + n * eps,
            vacuous=a_empty,
        )
    )

    # set size window
    size_lo = cheby * math.exp(h_tilt - abs_alpha * n * eps)
    size_hi = math.exp(h_tilt + abs_alpha * n * eps)
    checks.append(
        BoundCheck("set_size_lower", size_a, size_lo, size_a > size_lo, vacuous=cheby <= 0)
    )
    checks.append(BoundCheck("set_size_upper", size_a, size_hi, size_a < size_hi))

    # probability bounds; the relaxed set that inherits them depends on alpha
    prob_d = float(probs[d_mask].sum())
    prob_e = float(probs[e_mask].sum())
    decay = abs(1.0 - alpha) * n * eps
    prob_lo = cheby * math.exp(-dn - decay)
    prob_hi = math.exp(-dn + decay)
    checks.append(
        BoundCheck("set_prob_lower", prob_a, prob_lo, prob_a > prob_lo, vacuous=cheby <= 0)
    )
    if alpha < 0 or alpha >= 1:
        checks.append(BoundCheck("inner_prob_geq_set", prob_d, prob_a, prob_d >= prob_a))
        checks.append(BoundCheck("inner_prob_upper", prob_d, prob_hi, prob_d <= prob_hi))
        checks.append(
            BoundCheck("outer_prob_cover", prob_e, 1.0 - prob_hi, prob_e >= 1.0 - prob_hi)
        )
    if 0 < alpha <= 1:
        checks.append(BoundCheck("outer_prob_geq_set", prob_e, prob_a, prob_e >= prob_a))
        checks.append(BoundCheck("outer_prob_upper", prob_e, prob_hi, prob_e <= prob_hi))
        checks.append(
            BoundCheck("inner_prob_cover", prob_d, 1.0 - prob_hi, prob_d >= 1.0 - prob_hi)
        )

    # rank implications: forward rank for positive orders, reverse for negative
    if alpha > 0:
        rank = table.rank_of.astype(np.float64)
        tag = "guesswork"
    else:
        rank = (table.size + 1 - table.rank_of).astype(np.float64)
        tag = "reverse_guesswork"
    rank_lo = cheby * math.exp(h_tilt - abs_alpha * n * eps)
    rank_hi = math.exp(h_tilt + abs_alpha * n * eps)

    b_empty = not b_mask.any()
    min_rank_b = _min_over(rank, b_mask)
    checks.append(
        BoundCheck(
            f"median_{tag}_lower",
            min_rank_b,
            0.5 * rank_lo,
            b_empty or min_rank_b > 0.5 * rank_lo,
            vacuous=b_empty or cheby <= 0,
        )
    )
    max_rank_d = _max_over(rank, d_mask)
    checks.append(
        BoundCheck(
            f"inner_{tag}_upper",
            max_rank_d,
            rank_hi,
            (not d_mask.any()) or max_rank_d <= rank_hi,
            vacuous=not d_mask.any(),
        )
    )
    # contrapositive of "rank below threshold puts the string in the inner set"
    outside_d = ~d_mask
    min_rank_outside = _min_over(rank, outside_d)
    checks.append(
        BoundCheck(
            f"small_{tag}_in_inner",
            min_rank_outside,
            rank_lo,
            (not outside_d.any()) or min_rank_outside > rank_lo,
            vacuous=(not outside_d.any()) or cheby <= 0,
        )
    )
    # contrapositive of "rank above threshold puts the string in the outer set"
    outside_e = ~e_mask
    max_rank_outside = _max_over(rank, outside_e)
    checks.append(
        BoundCheck(
            f"large_{tag}_in_outer",
            max_rank_outside,
            rank_hi,
            (not outside_e.any()) or max_rank_outside <= rank_hi,
            vacuous=not outside_e.any(),
        )
    )
    return checks


def bound_ledger(
    source: CategoricalSource,
    spec: TypicalSetSpec,
    budget: int = DEFAULT_BUDGET,
    table: Optional[RankTable] = None,
) -> tuple[BoundCheck, ...]:
    """The evaluated bound ledger alone, for callers that skip the members."""
    return typical_set(source, spec, budget=budget, table=table).bounds


# ---------------------------------------------------------------------------
# Order equivalence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderEquivalence:
    """Outcome of an order-equivalence test between two sources.

    `alpha` and `residual` come from the analytic log-log fit; `witness`
    (when present) is (n, x, y) with x before y in one source's optimal
    ordering and after it in the other's.
    """

    equivalent: bool
    alpha: float
    residual: float
    witness: Optional[tuple[int, str, str]]


def order_equivalent(
    mu: CategoricalSource,
    rho: CategoricalSource,
    n_max: int = 8,
    budget: int = DEFAULT_BUDGET,
) -> OrderEquivalence:
    """Decide whether two sources share the optimal ordering on all lengths.

    Analytically, rho is order equivalent to mu iff log rho is an affine
    function of log theta with positive slope; the least-squares fit of that
    slope and its max residual decide.  Rank tables for n <= n_max are then
    compared as a cross-check, and the first disagreement (if any) is
    returned as a witness pair.
    """
    if mu.alphabet != rho.alphabet:
        raise AlphabetMismatch("sources are defined on different alphabets")
    x = mu.log_theta
    y = rho.log_theta
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    alpha = float(np.dot(xc, y - y.mean()) / denom) if denom > 0 else math.nan
    resid = (
        float(np.max(np.abs(y - y.mean() - alpha * xc)))
        if math.isfinite(alpha)
        else math.inf
    )
    analytic = math.isfinite(alpha) and alpha > 0 and resid < 1e-9

    witness = None
    for n in range(1, n_max + 1):
        t_mu = build_rank_table(mu, n, budget)
        t_rho = build_rank_table(rho, n, budget)
        if np.array_equal(t_mu.rank_of, t_rho.rank_of):
            continue
        diff = np.flatnonzero(t_mu.rank_of != t_rho.rank_of)
        first = diff[np.argmin(t_mu.rank_of[diff])]
        r = int(t_mu.rank_of[first])
        partner = int(t_rho.order[r - 1])
        witness = (n, t_mu.string_at(int(first)), t_mu.string_at(partner))
        break

    return OrderEquivalence(
        equivalent=analytic and witness is None,
        alpha=alpha,
        residual=resid,
        witness=witness,
    )
