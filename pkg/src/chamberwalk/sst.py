"""Strong stationary times, their tails, the separation bounds, and exact
separation distance.

Three stopping rules are tracked on a run of the walk:

* ``T1`` first time every positive-weight face has been drawn;
* ``T2`` first time every positive-weight block (faces with a common zero set)
  has a representative;
* ``T3`` first time the running product ``F^t ... F^1`` is a chamber.

``T1`` and ``T2`` are strong stationary times for any separating measure, ``T3``
only under a chamber-transitive, weight-preserving symmetry (see
:func:`verify_certificate`).
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arrangement import Arrangement, BlockPartition, block_partition
from .errors import ContractError, NonSeparatingError, SymmetryRefused, TooLargeError
from .measure import FaceMeasure
from .walks import Distribution, TransitionMatrix, Trajectory, _Sampler, make_rng

COVERAGE_TERMS_MAX = 2 ** 21
T3_STATES_MAX = 20000


class CurveKind(enum.Enum):
    THM1 = "bound_thm1"
    THM2 = "bound_thm2"
    THM3 = "bound_thm3"
    TAIL_T1 = "tail_T1"
    TAIL_T2 = "tail_T2"
    TAIL_T3 = "tail_T3"
    SEPARATION_EXACT = "s_exact"


@dataclass
class BoundCurve:
    """Values of one curve at ``t = 0, 1, ..., len(values) - 1``."""

    kind: CurveKind
    values: list

    def __getitem__(self, t: int):
        return self.values[t]

    def __len__(self) -> int:
        return len(self.values)

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


@dataclass
class StoppingReport:
    T1: int | None = None
    T2: int | None = None
    T3: int | None = None


def detect_stopping_times(
    arr: Arrangement, traj: Trajectory, measure: FaceMeasure, blocks: BlockPartition | None = None
) -> StoppingReport:
    blocks = blocks or block_partition(arr, measure)
    block_of = blocks.block_of()
    need_faces = set(measure.support)
    need_blocks = set(blocks.positive)
    full = (1 << arr.m) - 1
    seen_faces: set[int] = set()
    seen_blocks: set[int] = set()
    nonzero = 0
    report = StoppingReport()
    for t, f in enumerate(traj.picked_faces, start=1):
        seen_faces.add(f)
        seen_blocks.add(block_of[f])
        nonzero |= arr.nonzero_mask(f)
        if report.T1 is None and seen_faces >= need_faces:
            report.T1 = t
        if report.T2 is None and seen_blocks >= need_blocks:
            report.T2 = t
        if report.T3 is None and nonzero == full:
            report.T3 = t
        if report.T1 is not None and report.T2 is not None and report.T3 is not None:
            break
    return report


# -- exact tails of the coverage times T1 and T2 ---------------------------

def _coverage_coefficients(weights: Sequence) -> dict:
    """Signed counts ``sum over S of (-1)^|S|`` grouped by ``w(S)``.

    Then ``P(all items drawn by time t) = sum_c coef[c] * (1 - c)^t``.
    """
    coef: dict = {0 * weights[0] if weights else 0: 1}
    for w in weights:
        nxt = dict(coef)
        for s, c in coef.items():
            key = s + w
            nxt[key] = nxt.get(key, 0) - c
        coef = {k: v for k, v in nxt.items() if v != 0}
        if len(coef) > COVERAGE_TERMS_MAX:
            raise TooLargeError("inclusion-exclusion has too many distinct terms; use Monte Carlo tails")
    return coef


def _coverage_curve(weights: Sequence, t_max: int) -> list:
    weights = list(weights)
    if not weights:
        return [0] * (t_max + 1)
    exact = all(isinstance(w, Fraction) for w in weights)
    coef = _coverage_coefficients(weights)
    out = []
    for t in range(t_max + 1):
        if exact:
            covered = sum((c * (1 - s) ** t for s, c in coef.items()), Fraction(0))
        else:
            covered = math.fsum(c * (1 - s) ** t for s, c in coef.items())
            covered = min(1.0, max(0.0, covered))
        out.append(1 - covered)
    return out


def tail_T1_curve(measure: FaceMeasure, t_max: int) -> BoundCurve:
    return BoundCurve(CurveKind.TAIL_T1, _coverage_curve([measure.weights[f] for f in measure.support], t_max))


def tail_T2_curve(blocks: BlockPartition, t_max: int) -> BoundCurve:
    return BoundCurve(CurveKind.TAIL_T2, _coverage_curve(blocks.positive_weights, t_max))


def tail_T1_exact(measure: FaceMeasure, t: int):
    """``P(T1 > t)`` by inclusion-exclusion over the undrawn faces."""
    return tail_T1_curve(measure, t)[t]


def tail_T2_exact(blocks: BlockPartition, t: int):
    """``P(T2 > t)`` by inclusion-exclusion over the unrepresented blocks."""
    return tail_T2_curve(blocks, t)[t]


# -- exact tail of T3 via the running-product chain -------------------------

def _left_product_chain(arr: Arrangement, measure: FaceMeasure) -> dict[int, dict[int, object]]:
    support = list(measure.support)
    trans: dict[int, dict[int, object]] = {}
    queue = deque(support)
    seen = set(support)
    while queue:
        g = queue.popleft()
        if arr.is_chamber(g):
            continue
        row: dict[int, object] = {}
        for f in support:
            h = arr.product(f, g)
            row[h] = row.get(h, 0) + measure.weights[f]
            if h not in seen:
                seen.add(h)
                queue.append(h)
                if len(seen) > T3_STATES_MAX:
                    raise TooLargeError("running-product state space too large; use Monte Carlo tails")
        trans[g] = row
    return trans


def tail_T3_curve(arr: Arrangement, measure: FaceMeasure, t_max: int) -> BoundCurve:
    """``P(T3 > t)``: survival of the chain ``P_t = F^t P_{t-1}`` among non-chambers."""
    measure.validate()
    trans = _left_product_chain(arr, measure)
    zero = measure.zero
    one = zero + 1
    values = [one]
    dist = {}
    for f in measure.support:
        if not arr.is_chamber(f):
            dist[f] = dist.get(f, zero) + measure.weights[f]
    for t in range(1, t_max + 1):
        if t > 1:
            nxt: dict[int, object] = {}
            for g, p in dist.items():
                for h, w in trans[g].items():
                    if not arr.is_chamber(h):
                        nxt[h] = nxt.get(h, zero) + p * w
            dist = nxt
        values.append(sum(dist.values(), zero) if measure.exact else math.fsum(dist.values()))
    return BoundCurve(CurveKind.TAIL_T3, values)


def tail_T3_exact(arr: Arrangement, measure: FaceMeasure, t: int):
    return tail_T3_curve(arr, measure, t)[t]


# -- the separation bounds ---------------------------------------------------

def bound_thm1(blocks: BlockPartition, t: int):
    """Sum over positive-weight blocks of ``(1 - w(B))^t``."""
    return sum(((1 - w) ** t for w in blocks.positive_weights), 0 * blocks.positive_weights[0])


def bound_thm2(card_weights: Sequence, t: int):
    """Tsetlin bound ``sum_i (1 - w_i)^t``."""
    return sum((1 - w) ** t for w in card_weights)


def hyperplane_masses(arr: Arrangement, measure: FaceMeasure) -> list:
    """For each hyperplane, the total weight of faces not lying on it."""
    masses = [measure.zero] * arr.m
    for f, w in measure.weights.items():
        for i, s in enumerate(arr.faces[f].sign):
            if s != 0:
                masses[i] += w
    return masses


def bound_thm3(arr: Arrangement, measure: FaceMeasure, cert: "SymmetryCertificate", t: int):
    """``sum_i (1 - w(faces off H_i))^t``; refused without a valid certificate."""
    if cert is None or not cert.valid:
        reason = "no certificate" if cert is None else f"certificate failed: {cert.failure}"
        raise SymmetryRefused(f"symmetry bound needs a verified symmetry ({reason})")
    return sum((1 - p) ** t for p in hyperplane_masses(arr, measure))


def bound_curve(kind: CurveKind, fn, t_max: int) -> BoundCurve:
    return BoundCurve(kind, [fn(t) for t in range(t_max + 1)])


# -- exact separation distance ---------------------------------------------

EXACT_SEPARATION_MAX = 40


def separation_exact(k: TransitionMatrix, pi: Distribution, t_max: int, exact: bool | None = None) -> BoundCurve:
    """``s(t) = max_x0 (1 - min_x K^t(x0, x) / pi(x))`` for ``t = 0..t_max``.

    Chambers with ``pi(x) = 0`` (unreachable in stationarity) are left out of
    the inner minimum. The exact route scales ``K`` to an integer matrix so the
    powers stay in Python integers.
    """
    a = k.size
    vec = pi.vector(k.states)
    if any(float(p) < 0 for p in vec) or abs(sum(float(p) for p in vec) - 1) > 1e-9:
        raise ContractError("pi is not a probability vector")
    support = [i for i, p in enumerate(vec) if p > 0]
    if not support:
        raise NonSeparatingError("pi has no positive entry")
    if exact is None:
        exact = k.exact and pi.exact and a <= EXACT_SEPARATION_MAX
    values = []
    if exact:
        denom = math.lcm(*(Fraction(v).denominator for v in k.entries.ravel()))
        kint = np.array([[int(v * denom) for v in row] for row in k.entries], dtype=object)
        power = np.zeros((a, a), dtype=object)
        for i in range(a):
            power[i, i] = 1
        scale = 1
        pis = [Fraction(vec[i]) for i in support]
        for t in range(t_max + 1):
            worst = max(
                1 - min(Fraction(power[r, i] * p.denominator, p.numerator * scale) for i, p in zip(support, pis))
                for r in range(a)
            )
            values.append(worst)
            if t < t_max:
                power = power.dot(kint)
                scale *= denom
        return BoundCurve(CurveKind.SEPARATION_EXACT, values)
    mat = k.as_float()
    power = np.eye(a)
    inv = 1.0 / np.array([float(vec[i]) for i in support])
    for t in range(t_max + 1):
        ratios = power[:, support] * inv
        values.append(min(1.0, max(0.0, float(np.max(1.0 - ratios.min(axis=1))))))
        if t < t_max:
            power = power @ mat
    return BoundCurve(CurveKind.SEPARATION_EXACT, values)


# -- symmetry certificates ---------------------------------------------------

@dataclass
class SymmetryCertificate:
    generators: list[tuple[int, ...]]
    product_preserving: bool = False
    weight_invariant: bool = False
    chamber_transitive: bool = False
    sampled: bool = False
    failure: str | None = None

    @property
    def valid(self) -> bool:
        return self.product_preserving and self.weight_invariant and self.chamber_transitive

    @property
    def checks(self) -> dict:
        return {
            "product-preserving": self.product_preserving,
            "weight-invariant": self.weight_invariant,
            "chamber-transitive": self.chamber_transitive,
        }

    def summary(self) -> dict:
        return {"valid": self.valid, "sampled": self.sampled, "failure": self.failure, **self.checks}


def verify_certificate(
    arr: Arrangement,
    measure: FaceMeasure,
    generators: Sequence[Sequence[int]],
    *,
    pair_limit: int = 10 ** 6,
    sample_pairs: int = 10 ** 5,
    seed: int = 0,
) -> SymmetryCertificate:
    """Check that the face permutations in ``generators`` form a usable symmetry.

    Product preservation is checked on every pair of faces unless that would
    exceed ``pair_limit`` checks, in which case ``sample_pairs`` random pairs
    per generator are checked and the certificate is flagged ``sampled``.
    """
    nf = len(arr)
    gens = [np.asarray(g, dtype=np.int64) for g in generators]
    cert = SymmetryCertificate([tuple(int(x) for x in g) for g in gens])
    failures = []
    for g in gens:
        if g.shape != (nf,) or not np.array_equal(np.sort(g), np.arange(nf)):
            cert.failure = "generator is not a permutation of the faces"
            return cert

    pp = True
    cert.sampled = len(gens) * nf * nf > pair_limit
    rng = make_rng(seed)
    for g in gens:
        if cert.sampled:
            fs = rng.integers(0, nf, sample_pairs)
            gs = rng.integers(0, nf, sample_pairs)
        else:
            fs, gs = np.meshgrid(np.arange(nf), np.arange(nf), indexing="ij")
        lhs = g[arr.product_many(fs, gs)]
        rhs = arr.product_many(g[fs], g[gs])
        if not np.array_equal(lhs, rhs):
            pp = False
            break
    cert.product_preserving = pp
    if not pp:
        failures.append("product-preserving")

    wi = True
    for g in gens:
        for f in range(nf):
            a, b = measure.weight(f), measure.weight(int(g[f]))
            if (a != b) if measure.exact else abs(float(a) - float(b)) > 1e-12:
                wi = False
                break
        if not wi:
            break
    cert.weight_invariant = wi
    if not wi:
        failures.append("weight-invariant")

    start = arr.chambers[0]
    orbit = {start}
    queue = [start]
    stray = False
    while queue:
        c = queue.pop()
        for g in gens:
            d = int(g[c])
            if not arr.is_chamber(d):
                stray = True
            elif d not in orbit:
                orbit.add(d)
                queue.append(d)
    cert.chamber_transitive = not stray and len(orbit) == arr.chamber_count
    if not cert.chamber_transitive:
        failures.append("chamber-transitive")
    cert.failure = ", ".join(failures) or None
    return cert


# -- conditional law at a stopping time ------------------------------------

STOPPING_RULES = ("T1", "T2", "T3")


@dataclass
class ConditionalLaw:
    """Law of ``C^t`` given ``T = t`` for ``t = 1..L`` from one start."""

    rule: str
    start: int
    hit_probability: dict[int, object] = field(default_factory=dict)
    laws: dict[int, Distribution] = field(default_factory=dict)

    @property
    def mass_by_horizon(self):
        return sum(self.hit_probability.values(), 0 * next(iter(self.hit_probability.values()), 0))


def conditional_law(arr: Arrangement, measure: FaceMeasure, rule: str, start: int, horizon: int) -> ConditionalLaw:
    """Enumerate every face sequence up to ``horizon`` and condition on ``T = t``.

    Sequences are aggregated by their observable state (chamber, faces seen,
    blocks seen, hyperplanes covered), which leaves probabilities unchanged.
    """
    if rule not in STOPPING_RULES:
        raise ContractError(f"unknown stopping rule {rule!r}")
    if not arr.is_chamber(start):
        raise ContractError("start is not a chamber")
    measure.validate()
    blocks = block_partition(arr, measure)
    block_of = blocks.block_of()
    support = list(measure.support)
    pos = {b: k for k, b in enumerate(blocks.positive)}
    face_bit = {f: 1 << k for k, f in enumerate(support)}
    full = {
        "T1": (1 << len(support)) - 1,
        "T2": (1 << len(pos)) - 1,
        "T3": (1 << arr.m) - 1,
    }[rule]
    zero = measure.zero
    states: dict[tuple[int, int], object] = {(start, 0): zero + 1}
    out = ConditionalLaw(rule, start)
    for t in range(1, horizon + 1):
        nxt: dict[tuple[int, int], object] = {}
        hits: dict[int, object] = {}
        for (c, mask), p in states.items():
            for f in support:
                q = p * measure.weights[f]
                d = arr.product(f, c)
                if rule == "T1":
                    m2 = mask | face_bit[f]
                elif rule == "T2":
                    m2 = mask | 1 << pos[block_of[f]]
                else:
                    m2 = mask | arr.nonzero_mask(f)
                if m2 == full:
                    hits[d] = hits.get(d, zero) + q
                else:
                    key = (d, m2)
                    nxt[key] = nxt.get(key, zero) + q
        states = nxt
        total = sum(hits.values(), zero)
        if total > 0:
            out.hit_probability[t] = total
            out.laws[t] = Distribution({d: v / total for d, v in sorted(hits.items())}, measure.exact)
    return out


def conditional_deviation(law: ConditionalLaw, target: Distribution) -> dict[int, float]:
    """Total variation between each conditional law and ``target``."""
    return {t: d.total_variation(target) for t, d in law.laws.items()}


# -- Monte Carlo stopping times ---------------------------------------------

@dataclass
class StoppingSample:
    """Simulated stopping times; ``-1`` means not reached within ``t_cap``."""

    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    t_cap: int

    def tail(self, rule: str, t: int) -> tuple[float, float]:
        """Estimate of ``P(T > t)`` and its binomial standard error."""
        times = getattr(self, rule)
        p = float(np.mean((times < 0) | (times > t)))
        return p, math.sqrt(max(p * (1 - p), 0.0) / len(times))

    def mean(self, rule: str) -> float:
        times = getattr(self, rule)
        if np.any(times < 0):
            raise ContractError(f"{rule} not reached in some runs; raise t_cap")
        return float(times.mean())


def simulate_stopping_times(
    arr: Arrangement, measure: FaceMeasure, runs: int, seed: int, t_cap: int = 1000
) -> StoppingSample:
    """Draw ``runs`` independent face sequences and record T1, T2, T3."""
    sampler = _Sampler(measure)
    blocks = block_partition(arr, measure)
    block_of = blocks.block_of()
    pos = {b: k for k, b in enumerate(blocks.positive)}
    support = list(measure.support)
    if len(support) > 63 or len(pos) > 63 or arr.m > 63:
        raise TooLargeError("Monte Carlo stopping times support at most 63 faces, blocks and hyperplanes")
    face_bits = np.array([1 << k for k in range(len(support))], dtype=np.uint64)
    block_bits = np.array([1 << pos[block_of[f]] for f in support], dtype=np.uint64)
    hyp_bits = np.array([arr.nonzero_mask(f) for f in support], dtype=np.uint64)
    fulls = [np.uint64((1 << len(support)) - 1), np.uint64((1 << len(pos)) - 1), np.uint64((1 << arr.m) - 1)]
    masks = [np.zeros(runs, dtype=np.uint64) for _ in range(3)]
    times = [np.full(runs, -1, dtype=np.int64) for _ in range(3)]
    rng = make_rng(seed)
    for t in range(1, t_cap + 1):
        idx = sampler.draw_index(rng, runs)
        for k, bits in enumerate((face_bits, block_bits, hyp_bits)):
            masks[k] |= bits[idx]
            newly = (times[k] < 0) & (masks[k] == fulls[k])
            times[k][newly] = t
        if all((tm >= 0).all() for tm in times):
            break
    return StoppingSample(times[0], times[1], times[2], t_cap)
