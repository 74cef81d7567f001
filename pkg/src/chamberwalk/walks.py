"""The chamber walk: simulation, transition matrix, stationary law.

One step from chamber ``C`` draws a face ``F`` from the measure and moves to
``F * C``. The stationary law is computed three independent ways (linear solve,
sampling faces without replacement, sampling with replacement until the
running product is a chamber) so each can check the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arrangement import Arrangement
from .errors import ContractError, NonSeparatingError, NonUniqueStationaryError, TooLargeError, ValidationError
from .measure import FaceMeasure
from . import rational

RNG_ALGORITHM = "numpy-PCG64"
EXACT_SOLVE_MAX = 80


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Seeded PCG64 stream. Reproducible given (seed, :data:`RNG_ALGORITHM`)."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed) & (2 ** 64 - 1))
    return np.random.Generator(np.random.PCG64(seed))


class _Sampler:
    def __init__(self, measure: FaceMeasure):
        measure.validate()
        self.faces = np.array(measure.support, dtype=np.int64)
        cum = np.cumsum(measure.probabilities())
        cum[-1] = 1.0
        self.cum = cum

    def draw(self, rng: np.random.Generator, size=None):
        idx = np.searchsorted(self.cum, rng.random(size), side="right")
        return self.faces[idx] if size is not None else int(self.faces[idx])

    def draw_index(self, rng: np.random.Generator, size):
        return np.searchsorted(self.cum, rng.random(size), side="right")


def sample_face(measure: FaceMeasure, rng: np.random.Generator) -> int:
    """Draw one face id with probability equal to its weight."""
    if not measure.support:
        raise ValidationError("cannot sample from an empty support")
    return _Sampler(measure).draw(rng)


@dataclass
class Trajectory:
    seed: int
    start_chamber: int
    picked_faces: list[int] = field(default_factory=list)
    chamber_path: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.picked_faces)


def run_walk(arr: Arrangement, measure: FaceMeasure, start: int, t: int, seed: int) -> Trajectory:
    if not arr.is_chamber(start):
        raise ContractError(f"start {arr.sign_string(start)} is not a chamber")
    if t < 0:
        raise ContractError("number of steps must be nonnegative")
    sampler = _Sampler(measure)
    rng = make_rng(seed)
    picks = [int(f) for f in sampler.draw(rng, t)] if t else []
    path = [start]
    c = start
    for f in picks:
        c = arr.product(f, c)
        path.append(c)
    return Trajectory(seed, start, picks, path)


def occupation(arr: Arrangement, traj: Trajectory, burn_in: int = 0) -> np.ndarray:
    """Fraction of time spent in each chamber (in ``arr.chambers`` order)."""
    counts = np.zeros(arr.chamber_count)
    for c in traj.chamber_path[1 + burn_in:]:
        counts[arr.chamber_index[c]] += 1
    return counts / max(1, counts.sum())


@dataclass
class TransitionMatrix:
    """Row-stochastic matrix on the chambers; rows are source chambers."""

    states: tuple[int, ...]
    entries: np.ndarray
    exact: bool = False

    @property
    def size(self) -> int:
        return len(self.states)

    def as_float(self) -> np.ndarray:
        return self.entries.astype(float) if self.exact else self.entries

    def to_csv(self, arr: Arrangement) -> str:
        from .report import format_number

        names = [arr.sign_string(c) for c in self.states]
        lines = ["source," + ",".join(names)]
        for name, row in zip(names, self.entries):
            lines.append(name + "," + ",".join(format_number(v) for v in row))
        return "\n".join(lines) + "\n"


def transition_matrix(arr: Arrangement, measure: FaceMeasure, exact: bool | None = None) -> TransitionMatrix:
    """``K(C, D) = sum of w(F) over faces F with F * C = D``."""
    measure.validate()
    exact = measure.exact if exact is None else exact and measure.exact
    a = arr.chamber_count
    chambers = np.array(arr.chambers, dtype=np.int64)
    index = np.full(len(arr), -1, dtype=np.int64)
    index[chambers] = np.arange(a)
    if exact:
        k = np.empty((a, a), dtype=object)
        k[:] = Fraction(0)
    else:
        k = np.zeros((a, a))
    rows = np.arange(a)
    for f, w in measure.weights.items():
        cols = index[arr.product_many(f, chambers)]
        if exact:
            for r, c in zip(rows, cols):
                k[r, c] += w
        else:
            np.add.at(k, (rows, cols), float(w))
    return TransitionMatrix(tuple(arr.chambers), k, exact)


@dataclass
class Distribution:
    """Probabilities on chambers, keyed by chamber id."""

    probs: dict[int, object]
    exact: bool = False

    def vector(self, states: Sequence[int]) -> list:
        zero = Fraction(0) if self.exact else 0.0
        return [self.probs.get(s, zero) for s in states]

    def max_abs_diff(self, other: "Distribution") -> float:
        keys = set(self.probs) | set(other.probs)
        return max((abs(float(self.probs.get(k, 0)) - float(other.probs.get(k, 0))) for k in keys), default=0.0)

    def total_variation(self, other: "Distribution") -> float:
        keys = set(self.probs) | set(other.probs)
        return 0.5 * math.fsum(abs(float(self.probs.get(k, 0)) - float(other.probs.get(k, 0))) for k in keys)

    def __getitem__(self, chamber: int):
        return self.probs.get(chamber, Fraction(0) if self.exact else 0.0)


def stationary_solve(k: TransitionMatrix, exact: bool | None = None) -> Distribution:
    """Solve ``pi K = pi``, ``sum(pi) = 1``; refuses a non-unique solution."""
    a = k.size
    exact = k.exact and a <= EXACT_SOLVE_MAX if exact is None else exact and k.exact
    if exact:
        rows = [[k.entries[j, i] - (1 if i == j else 0) for j in range(a)] + [Fraction(0)] for i in range(a)]
        rows.append([Fraction(1)] * a + [Fraction(1)])
        red, piv = rational.rref(rows)
        if a in piv:
            raise NonUniqueStationaryError("inconsistent stationary system")
        if len(piv) < a:
            raise NonUniqueStationaryError(f"stationary distribution not unique (rank {len(piv)} < {a})")
        return Distribution({s: red[i][a] for i, s in enumerate(k.states)}, True)
    kf = k.as_float()
    m = kf.T - np.eye(a)
    if a > 1 and np.linalg.matrix_rank(m, tol=1e-9) < a - 1:
        raise NonUniqueStationaryError("stationary distribution not unique")
    lhs = np.vstack([m, np.ones((1, a))])
    rhs = np.zeros(a + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    return Distribution({s: float(p) for s, p in zip(k.states, pi)}, False)


def _check_separating(measure: FaceMeasure) -> None:
    from .arrangement import is_separating

    ok, witness = is_separating(measure.arrangement, measure)
    if not ok:
        raise NonSeparatingError(f"no positive-weight face is off hyperplane {witness}")


def stationary_without_replacement(
    arr: Arrangement,
    measure: FaceMeasure,
    *,
    method: str = "urn",
    max_support: int = 24,
    max_states: int = 2_000_000,
    prune: bool = True,
    start: int | None = None,
) -> Distribution:
    """Law of ``F1 F2 ... Fk C0`` for faces drawn without replacement.

    The first face drawn is applied last. With ``prune`` a branch stops as
    soon as the running product ``F1 ... Fj`` is a chamber (at the latest once
    every positive-weight block has a representative); faces drawn later
    cannot move it. With ``prune=False`` all of the support is drawn and
    applied to ``start``.

    ``method="literal"`` recurses over (faces drawn, running product).
    ``method="urn"`` uses that a face whose nonzero coordinates are already
    fixed by the running product can never change it again, so only the next
    face that does change it matters; that face is a weighted draw from the
    faces not yet dominated. The recursion then depends on the product alone.
    """
    measure.validate()
    _check_separating(measure)
    if method not in ("urn", "literal"):
        raise ValueError(f"unknown method {method!r}")
    if method == "urn" and prune and start is None:
        return _without_replacement_urn(arr, measure, max_states)
    support = list(measure.support)
    if len(support) > max_support:
        raise TooLargeError(
            f"support has {len(support)} faces (limit {max_support}); use stationary_monte_carlo"
        )
    if start is None:
        start = arr.chambers[0]
    if not arr.is_chamber(start):
        raise ContractError("start is not a chamber")
    weights = [measure.weights[f] for f in support]
    exact = measure.exact
    one = Fraction(1) if exact else 1.0
    memo: dict[tuple, dict] = {}

    def go(mask: int, prod: int | None) -> dict:
        if prune and prod is not None and arr.is_chamber(prod):
            return {prod: one}
        if mask == (1 << len(support)) - 1:
            return {arr.product(prod, start): one}
        key = (mask, prod)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) >= max_states:
            raise TooLargeError("without-replacement state budget exhausted; use stationary_monte_carlo")
        rest = [k for k in range(len(support)) if not mask >> k & 1]
        total = sum((weights[k] for k in rest), 0 * one)
        out: dict[int, object] = {}
        for k in rest:
            p = weights[k] / total
            nxt = support[k] if prod is None else arr.product(prod, support[k])
            for c, q in go(mask | 1 << k, nxt).items():
                out[c] = out.get(c, 0 * one) + p * q
        memo[key] = out
        return out

    return Distribution(go(0, None), exact)


def _without_replacement_urn(arr: Arrangement, measure: FaceMeasure, max_states: int) -> Distribution:
    support = list(measure.support)
    masks = {f: arr.nonzero_mask(f) for f in support}
    exact = measure.exact
    one = Fraction(1) if exact else 1.0
    memo: dict[int | None, dict] = {}

    def go(prod: int | None) -> dict:
        if prod is not None and arr.is_chamber(prod):
            return {prod: one}
        hit = memo.get(prod)
        if hit is not None:
            return hit
        if len(memo) >= max_states:
            raise TooLargeError("without-replacement state budget exhausted; use stationary_monte_carlo")
        fixed = -1 if prod is None else arr.nonzero_mask(prod)
        live = support if prod is None else [f for f in support if masks[f] & ~fixed]
        total = sum((measure.weights[f] for f in live), 0 * one)
        out: dict[int, object] = {}
        for f in live:
            p = measure.weights[f] / total
            nxt = f if prod is None else arr.product(prod, f)
            for c, q in go(nxt).items():
                out[c] = out.get(c, 0 * one) + p * q
        memo[prod] = out
        return out

    return Distribution(go(None), exact)


def _absorbing_states(arr: Arrangement, measure: FaceMeasure, left: bool) -> list[int]:
    """Faces reachable as running products of support faces (BFS closure)."""
    support = list(measure.support)
    seen = dict.fromkeys(support)
    frontier = list(support)
    while frontier:
        nxt = []
        for g in frontier:
            if arr.is_chamber(g):
                continue
            for f in support:
                h = arr.product(f, g) if left else arr.product(g, f)
                if h not in seen:
                    seen[h] = None
                    nxt.append(h)
        frontier = nxt
    return list(seen)


def stationary_until_chamber(arr: Arrangement, measure: FaceMeasure, *, max_states: int = 5000) -> Distribution:
    """Law of ``F1 F2 ... Fl`` at the first ``l`` where it is a chamber.

    Faces are drawn with replacement; each new face multiplies the running
    product on the right. Computed exactly as absorption probabilities of the
    chain on running products.
    """
    measure.validate()
    exact = measure.exact
    states = _absorbing_states(arr, measure, left=False)
    if len(states) > max_states:
        raise TooLargeError(f"{len(states)} running-product states exceed {max_states}")
    transient = [s for s in states if not arr.is_chamber(s)]
    absorbing = sorted(s for s in states if arr.is_chamber(s))
    t_index = {s: i for i, s in enumerate(transient)}
    a_index = {s: i for i, s in enumerate(absorbing)}
    support = list(measure.support)
    _require_absorption(arr, measure)
    nt, na = len(transient), len(absorbing)
    one = Fraction(1) if exact else 1.0
    zero = 0 * one
    if nt:
        if exact:
            iq = [[zero] * nt for _ in range(nt)]
            r = [[zero] * na for _ in range(nt)]
        else:
            iq = np.zeros((nt, nt))
            r = np.zeros((nt, na))
        for i, g in enumerate(transient):
            iq[i][i] += one
            for f in support:
                h = arr.product(g, f)
                w = measure.weights[f]
                if h in t_index:
                    iq[i][t_index[h]] -= w
                else:
                    r[i][a_index[h]] += w
        if exact:
            b = rational.solve_many(iq, r)
        else:
            b = np.linalg.solve(iq, r)
    out = {c: zero for c in absorbing}
    for f in support:
        w = measure.weights[f]
        if f in a_index:
            out[f] += w
        else:
            row = b[t_index[f]]
            for j, c in enumerate(absorbing):
                out[c] += w * row[j]
    if not exact:
        out = {c: float(v) for c, v in out.items()}
    return Distribution(out, exact)


def _require_absorption(arr: Arrangement, measure: FaceMeasure) -> None:
    """Raise if some running product can never become a chamber."""
    covered = 0
    for f in measure.support:
        covered |= arr.nonzero_mask(f)
    full = (1 << arr.m) - 1
    if covered != full:
        missing = next(i for i in range(arr.m) if not covered >> i & 1)
        raise NonSeparatingError(f"running products never leave hyperplane {missing}")


def stationary_monte_carlo(arr: Arrangement, measure: FaceMeasure, samples: int, seed: int) -> Distribution:
    """Estimate the stationary law by running the until-chamber sampler."""
    measure.validate()
    _check_separating(measure)
    sampler = _Sampler(measure)
    rng = make_rng(seed)
    counts: dict[int, int] = {}
    for _ in range(samples):
        prod = sampler.draw(rng)
        while not arr.is_chamber(prod):
            prod = arr.product(prod, sampler.draw(rng))
        counts[prod] = counts.get(prod, 0) + 1
    return Distribution({c: n / samples for c, n in sorted(counts.items())}, False)
