import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from chamberwalk import gallery
from chamberwalk.arrangement import block_partition
from chamberwalk.errors import SymmetryRefused
from chamberwalk.measure import FaceMeasure
from chamberwalk.sst import (
    bound_thm1,
    bound_thm2,
    bound_thm3,
    conditional_deviation,
    conditional_law,
    detect_stopping_times,
    separation_exact,
    simulate_stopping_times,
    tail_T1_curve,
    tail_T1_exact,
    tail_T2_curve,
    tail_T2_exact,
    tail_T3_curve,
    tail_T3_exact,
    verify_certificate,
)
from chamberwalk.walks import Distribution, run_walk, stationary_solve, transition_matrix

F = Fraction


def _parts(name, **params):
    inst = gallery.build(name, params)
    return inst, inst.arrangement, inst.measure


def brute_tails(arr, measure, t):
    """P(T1 > t), P(T2 > t), P(T3 > t) by summing over every face sequence."""
    blocks = block_partition(arr, measure)
    block_of = blocks.block_of()
    need_blocks = set(blocks.positive)
    support = list(measure.support)
    out = [F(0)] * 3
    for seq in itertools.product(support, repeat=t):
        p = math.prod((measure.weights[f] for f in seq), start=F(1))
        if set(seq) != set(support):
            out[0] += p
        if {block_of[f] for f in seq} != need_blocks:
            out[1] += p
        if not seq or not arr.is_chamber(arr.word_product(list(reversed(seq)))):
            out[2] += p
    return out


def brute_separation(k, pi, t):
    a = k.size
    power = np.identity(a, dtype=object) * F(1)
    for _ in range(t):
        power = power.dot(k.entries)
    vec = pi.vector(k.states)
    return max(1 - min(power[r, i] / vec[i] for i in range(a) if vec[i] > 0) for r in range(a))


# -- tails ----------------------------------------------------------------------

def test_tsetlin_n2_coupon_collector():
    _, arr, m = _parts("tsetlin", n=2)
    # both faces are needed, so P(T1 > t) = 2 (1/2)^t for t >= 1
    assert tail_T1_exact(m, 1) == 1
    assert tail_T1_exact(m, 2) == F(1, 2)
    assert tail_T1_exact(m, 3) == F(1, 4)
    assert tail_T1_curve(m, 0)[0] == 1


def test_hypercube_n2_T3():
    _, arr, m = _parts("boolean-nn", n=2)
    assert tail_T3_exact(arr, m, 1) == 1
    assert tail_T3_exact(arr, m, 2) == F(1, 2)


def test_single_block_and_chamber_support(boolean2):
    m = FaceMeasure(boolean2, {boolean2.face_id("++"): F(1, 2), boolean2.face_id("--"): F(1, 2)})
    bp = block_partition(boolean2, m)
    assert [tail_T2_exact(bp, t) for t in range(4)] == [1, 0, 0, 0]
    assert [tail_T3_exact(boolean2, m, t) for t in range(4)] == [1, 0, 0, 0]


@pytest.mark.parametrize("name,params", [
    ("tsetlin", {"weights": ["1/2", "3/10", "1/5"]}),
    ("boolean-nn", {"n": 2}),
    ("riffle", {"n": 3}),
    ("figure1", {"weights": "edges"}),
    ("top-bottom", {"n": 3}),
])
def test_tails_match_enumeration(name, params):
    _, arr, m = _parts(name, **params)
    bp = block_partition(arr, m)
    t_max = 4 if len(m.support) <= 6 else 3
    t1, t2, t3 = tail_T1_curve(m, t_max), tail_T2_curve(bp, t_max), tail_T3_curve(arr, m, t_max)
    for t in range(t_max + 1):
        assert [t1[t], t2[t], t3[t]] == brute_tails(arr, m, t)


def test_tail_ordering_and_union_bound():
    for name in ("tsetlin", "riffle", "boolean-nn", "top-bottom", "subsets", "kflip"):
        _, arr, m = _parts(name)
        bp = block_partition(arr, m)
        t1, t2 = tail_T1_curve(m, 40), tail_T2_curve(bp, 40)
        for t in range(41):
            assert t2[t] <= t1[t]
            assert t2[t] <= bound_thm1(bp, t)
            if t:
                assert t1[t] <= t1[t - 1] and t2[t] <= t2[t - 1]


# -- bounds ---------------------------------------------------------------------

def test_thm1_uniform_tsetlin_and_top_bottom():
    for name in ("tsetlin", "top-bottom"):
        _, arr, m = _parts(name, n=4)
        bp = block_partition(arr, m)
        assert all(bound_thm1(bp, t) == 4 * F(3, 4) ** t for t in range(20))
    assert bound_thm2([F(1, 2), F(3, 10), F(1, 5)], 2) == F(1, 4) + F(49, 100) + F(16, 25)


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2), (4, 3)])
def test_thm3_kflip(n, k):
    inst, arr, m = _parts("kflip", n=n, k=k)
    assert inst.certificate.valid
    for t in range(15):
        assert bound_thm3(arr, m, inst.certificate, t) == n * (1 - F(k, n)) ** t


def test_kflip_full_reaches_stationarity_in_one_step():
    inst, arr, m = _parts("kflip", n=3, k=3)
    assert bound_thm3(arr, m, inst.certificate, 1) == 0
    s = separation_exact(transition_matrix(arr, m), stationary_solve(transition_matrix(arr, m)), 3)
    assert list(s.values) == [1, 0, 0, 0]


@pytest.mark.parametrize("n", [3, 4])
def test_thm3_riffle(n):
    inst, arr, m = _parts("riffle", n=n)
    for t in range(20):
        assert bound_thm3(arr, m, inst.certificate, t) == F(n * (n - 1), 2) / 2 ** t
    for c in range(1, 6):
        t = math.ceil(2 * math.log2(n)) + c
        assert bound_thm3(arr, m, inst.certificate, t) <= F(1, 2 ** (c + 1))


def test_thm3_refused():
    inst, arr, m = _parts("tsetlin", weights=["1/2", "3/10", "1/5"])
    assert not inst.certificate.weight_invariant
    with pytest.raises(SymmetryRefused):
        bound_thm3(arr, m, inst.certificate, 3)
    with pytest.raises(SymmetryRefused):
        bound_thm3(arr, m, None, 3)


# -- separation distance -------------------------------------------------------

@pytest.mark.parametrize("name,params", [
    ("tsetlin", {"weights": ["1/2", "3/10", "1/5"]}),
    ("boolean-nn", {"n": 2}),
    ("figure1", {}),
    ("graph-coloring", {"n": 4}),
])
def test_separation_matches_brute_force(name, params):
    _, arr, m = _parts(name, **params)
    k = transition_matrix(arr, m)
    pi = stationary_solve(k)
    s = separation_exact(k, pi, 6)
    assert s[0] == 1
    for t in range(7):
        assert s[t] == brute_separation(k, pi, t)
    fl = separation_exact(k, pi, 6, exact=False)
    assert max(abs(float(a) - b) for a, b in zip(s.values, fl.values)) < 1e-12


def test_separation_uniform_tsetlin_n3():
    _, arr, m = _parts("tsetlin", n=3)
    k = transition_matrix(arr, m)
    s = separation_exact(k, stationary_solve(k), 50)
    for t in range(51):
        assert s[t] <= 3 * F(2, 3) ** t
        if t:
            assert s[t] <= s[t - 1]


# -- stopping times --------------------------------------------------------------

def test_detect_single_chamber(boolean2):
    m = FaceMeasure.point_mass(boolean2, boolean2.face_id("+-"))
    traj = run_walk(boolean2, m, boolean2.face_id("++"), 5, 0)
    r = detect_stopping_times(boolean2, traj, m)
    assert (r.T1, r.T2, r.T3) == (1, 1, 1)


def test_detect_tsetlin_touch_all_cards():
    _, arr, m = _parts("tsetlin", weights=["1/2", "3/10", "1/5"])
    for seed in range(30):
        traj = run_walk(arr, m, arr.chambers[0], 60, seed)
        r = detect_stopping_times(arr, traj, m)
        touched = [len(set(traj.picked_faces[:t])) for t in range(61)]
        assert r.T1 == r.T2 == touched.index(3)
        assert r.T3 <= r.T2


def test_simulated_stopping_times_agree_with_detection():
    _, arr, m = _parts("riffle", n=3)
    sample = simulate_stopping_times(arr, m, 200, 4, t_cap=200)
    assert np.all(sample.T2 <= sample.T1)
    assert np.all(sample.T3 <= sample.T2)


def test_riffle_T3_mean_vs_exact():
    _, arr, m = _parts("riffle", n=3)
    tail = tail_T3_curve(arr, m, 200)
    exact_mean = float(sum(tail.values))
    sample = simulate_stopping_times(arr, m, 10 ** 5, 21)
    se = float(np.std(sample.T3)) / math.sqrt(10 ** 5)
    assert abs(sample.mean("T3") - exact_mean) <= 4 * se


# -- certificates ----------------------------------------------------------------

def test_certificate_hyperoctahedral():
    for n in (2, 3, 4):
        inst, arr, m = _parts("boolean-nn", n=n)
        cert = inst.certificate
        assert cert.valid and not cert.sampled
        assert cert.checks == {"product-preserving": True, "weight-invariant": True, "chamber-transitive": True}


def test_certificate_riffle():
    assert gallery.riffle(4).certificate.valid


def test_certificate_sampling_flag():
    inst, arr, m = _parts("boolean-nn", n=3)
    cert = verify_certificate(arr, m, inst.generators, pair_limit=10, sample_pairs=500)
    assert cert.sampled and cert.valid


def test_certificate_rejects_non_automorphism():
    inst, arr, m = _parts("boolean-nn", n=2)
    bad = list(range(len(arr)))
    a, b = arr.face_id("+0"), arr.face_id("++")
    bad[a], bad[b] = b, a
    cert = verify_certificate(arr, m, [bad])
    assert not cert.product_preserving and not cert.valid and cert.failure
    cert = verify_certificate(arr, m, [[0, 0] + list(range(2, len(arr)))])
    assert not cert.valid


def test_certificate_trivial_group_not_transitive():
    inst, arr, m = _parts("boolean-nn", n=2)
    cert = verify_certificate(arr, m, [list(range(len(arr)))])
    assert cert.product_preserving and cert.weight_invariant and not cert.chamber_transitive


# -- conditional laws ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["tsetlin", "riffle", "boolean-nn", "top-bottom"])
def test_conditional_T1_T2_are_pi_uniform_weights(name):
    _, arr, m = _parts(name, n=3)
    pi = stationary_solve(transition_matrix(arr, m))
    rules = ("T1", "T2") if len(m.support) <= 6 else ("T2",)
    for rule in rules:
        law = conditional_law(arr, m, rule, arr.chambers[0], 6)
        assert law.laws and all(v == 0 for v in conditional_deviation(law, pi).values())


def test_conditional_T2_weighted_tsetlin_is_not_pi():
    # two cards, weights (w, 1 - w): given T1 = 2 the top card is a fair coin,
    # not w; still s(t) <= P(T2 > t) holds for this chain
    _, arr, m = _parts("tsetlin", weights=["7/10", "3/10"])
    pi = stationary_solve(transition_matrix(arr, m))
    law = conditional_law(arr, m, "T1", arr.chambers[0], 2)
    assert set(law.laws[2].probs.values()) == {F(1, 2)}
    assert conditional_deviation(law, pi)[2] == pytest.approx(0.2)
    _, arr, m = _parts("tsetlin", weights=["1/2", "3/10", "1/5"])
    k = transition_matrix(arr, m)
    s = separation_exact(k, stationary_solve(k), 30)
    t2 = tail_T2_curve(block_partition(arr, m), 30)
    assert all(s[t] <= t2[t] for t in range(31))


def test_conditional_T3_uniform_and_negative_control():
    _, arr, m = _parts("boolean-nn", n=2)
    uniform = Distribution({c: F(1, 4) for c in arr.chambers}, True)
    law = conditional_law(arr, m, "T3", arr.chambers[0], 6)
    assert all(v == 0 for v in conditional_deviation(law, uniform).values())

    _, arr, m = _parts("tsetlin", weights=["1/2", "3/10", "1/5"])
    pi = stationary_solve(transition_matrix(arr, m))
    law = conditional_law(arr, m, "T3", arr.chambers[0], 4)
    assert 1 not in law.laws
    assert conditional_deviation(law, pi)[2] >= 0.05
