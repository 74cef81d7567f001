import itertools
from fractions import Fraction
from math import comb

import pytest

from chamberwalk import gallery
from chamberwalk.arrangement import block_partition, is_separating
from chamberwalk.errors import NonSeparatingError, StructuralError, ValidationError
from chamberwalk.partitions import check_partition, ordered_set_partitions

F = Fraction


def test_ordered_set_partitions_are_ordered_bell():
    # ordered Bell numbers: 1, 3, 13, 75, 541
    assert [sum(1 for _ in ordered_set_partitions(range(n))) for n in range(1, 6)] == [1, 3, 13, 75, 541]
    with pytest.raises(StructuralError):
        check_partition([{1}, {1, 2}], 2)
    with pytest.raises(StructuralError):
        check_partition([{1}, set(), {2}], 2)


def test_tsetlin_support_and_refusals():
    inst = gallery.tsetlin([F(1, 3)] * 3)
    arr = inst.arrangement
    labels = sorted(str(arr.labels[f]) for f in inst.measure.support)
    assert len(labels) == 3
    for f in inst.measure.support:
        blocks = arr.labels[f]
        assert len(blocks) == 2 and len(blocks[0]) == 1
    with pytest.raises(NonSeparatingError):
        gallery.tsetlin([1])
    with pytest.raises(NonSeparatingError):
        gallery.tsetlin([F(1, 2), F(1, 2), 0])
    with pytest.raises(ValidationError):
        gallery.tsetlin([F(1, 2), F(1, 3)])


def test_riffle_weights_n3():
    inst = gallery.riffle(3, 2)
    arr, m = inst.arrangement, inst.measure
    one = gallery.braid_face(arr, [{1, 2, 3}])
    assert m.weight(one) == F(1, 4)
    two_block = [f for f in m.support if f != one]
    assert len(two_block) == 6 and all(m.weight(f) == F(1, 8) for f in two_block)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_riffle_a2_total(n):
    m = gallery.riffle(n, 2).measure
    assert m.total() == 1
    one = gallery.braid_face(m.arrangement, [set(range(1, n + 1))])
    assert m.weight(one) == F(1, 2 ** (n - 1))
    assert all(m.weight(f) == F(1, 2 ** n) for f in m.support if f != one)


def test_riffle_a3_counts_digit_assignments():
    # brute force: every digit string induces one ordered partition
    n, a = 3, 3
    inst = gallery.riffle(n, a)
    arr = inst.arrangement
    counts = {}
    for digits in itertools.product(range(a), repeat=n):
        blocks = [frozenset(c for c, d in zip(range(1, n + 1), digits) if d == k) for k in range(a)]
        f = gallery.braid_face(arr, [b for b in blocks if b])
        counts[f] = counts.get(f, 0) + 1
    assert inst.measure.weights == {f: F(c, a ** n) for f, c in sorted(counts.items())}


def test_riffle_separating():
    for n in (2, 3, 4):
        inst = gallery.riffle(n)
        assert is_separating(inst.arrangement, inst.measure)[0]


def test_subsets_examples():
    singles = gallery.weighted_subsets(3, [([1], F(1, 2)), ([2], F(3, 10)), ([3], F(1, 5))])
    ts = gallery.tsetlin([F(1, 2), F(3, 10), F(1, 5)])
    assert singles.measure.weights == ts.measure.weights
    with pytest.raises(NonSeparatingError, match="1 and 2"):
        gallery.weighted_subsets(2, [([1, 2], 1)])
    inst = gallery.weighted_subsets(3, [([1], F(1, 4)), ([2], F(1, 4)), ([3], F(1, 4)), ([1, 2], F(1, 4))])
    bp = block_partition(inst.arrangement, inst.measure)
    # ({1,2},{3}) and ({3},{1,2}) both lie only on x1 = x2: one block
    assert sorted(bp.positive_weights) == [F(1, 4), F(1, 4), F(1, 2)]


def test_top_bottom_blocks():
    inst = gallery.random_top_bottom([F(1, 6)] * 3, [F(1, 6)] * 3)
    bp = block_partition(inst.arrangement, inst.measure)
    assert len(bp.positive) == 3 and bp.positive_weights == [F(1, 3)] * 3
    # no bottom moves: the Tsetlin library with the same card weights
    tb = gallery.random_top_bottom([F(1, 3)] * 3, [0] * 3)
    assert tb.measure.weights == gallery.tsetlin([F(1, 3)] * 3).measure.weights


def test_kflip_weights():
    for n, k in [(3, 1), (3, 2), (4, 2), (4, 4)]:
        m = gallery.hypercube_kflip(n, k).measure
        assert len(m.support) == comb(n, k) * 2 ** k
        assert m.total() == 1
        assert all(len(m.arrangement.faces[f].zero_set) == n - k for f in m.support)
    full = gallery.hypercube_kflip(3, 3)
    assert len(block_partition(full.arrangement, full.measure).positive) == 1


def test_hypercube_nn_support():
    inst = gallery.hypercube_nn([F(1, 6)] * 3, [F(1, 6)] * 3)
    assert sorted(inst.arrangement.sign_string(f) for f in inst.measure.support) == [
        "+00", "-00", "0+0", "0-0", "00+", "00-",
    ]
    with pytest.raises(NonSeparatingError):
        gallery.hypercube_nn([F(1, 2), 0], [F(1, 2), 0])


def test_graph_coloring_cycle():
    inst = gallery.graph_coloring(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    arr, m = inst.arrangement, inst.measure
    assert arr.sign_string(m.support[0]) in {"++0+", "+++0", "0+++", "+0++"}
    assert all(m.weight(f) == F(1, 8) for f in m.support)
    assert inst.extras["vertex_transitive"]
    assert inst.extras["min_vertex_cover"] == 2
    assert inst.extras["min_dominating_set"] == 2
    # the generated group moves colorings only within their orbit types
    assert not inst.certificate.chamber_transitive


def test_graph_coloring_path_not_transitive():
    inst = gallery.graph_coloring(3, [(0, 1), (1, 2)])
    assert not inst.extras["vertex_transitive"]
    assert not inst.certificate.valid


def test_figure1_instances():
    for w in ("uniform", "edges"):
        inst = gallery.figure1_instance(w)
        assert inst.measure.total() == 1 and inst.measure.separating
    assert len(gallery.figure1_instance("edges").measure.support) == 9
    with pytest.raises(ValidationError):
        gallery.figure1_instance("corners")


def test_custom_from_json(tmp_path):
    arr_path = tmp_path / "arr.json"
    arr_path.write_text('{"dimension": 2, "hyperplanes": [{"normal": ["1", "0"], "offset": "0"},'
                        ' {"normal": ["0", "1"], "offset": "0"}]}')
    meas_path = tmp_path / "m.json"
    meas_path.write_text('[{"signs": "+0", "weight": "1/2"}, {"signs": "0-", "weight": "1/2"}]')
    inst = gallery.build("custom", {"arrangement": str(arr_path), "measure": str(meas_path)})
    assert len(inst.arrangement) == 9
    assert inst.measure.weights == {inst.arrangement.face_id("+0"): F(1, 2), inst.arrangement.face_id("0-"): F(1, 2)}


@pytest.mark.parametrize("name", sorted(gallery.CATALOG))
def test_catalog_defaults_are_separating(name):
    inst = gallery.build(name)
    inst.measure.validate()
    assert inst.measure.separating


def test_unknown_instance():
    with pytest.raises(ValidationError):
        gallery.build("nope")
