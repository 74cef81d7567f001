"""Named arrangements, measures and symmetries for the classical examples.

Card-shuffling chains live on the braid arrangement (chambers are decks read
top to bottom, faces are ordered set partitions); hypercube and coloring walks
live on the Boolean arrangement.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from .arrangement import Arrangement, Hyperplane, COMBINATORIAL, enumerate_faces, sign_order_key
from .errors import NonSeparatingError, StructuralError, ValidationError
from .measure import FaceMeasure
from .partitions import (
    braid_pairs,
    ordered_set_partitions,
    partition_signs,
    permutation_blocks,
    signs_to_partition,
)
from .rational import as_fraction
from .sst import SymmetryCertificate, verify_certificate


# -- arrangements ------------------------------------------------------------

def braid(n: int) -> Arrangement:
    """Braid arrangement ``x_i = x_j`` built combinatorially from ordered partitions."""
    if not 2 <= n <= 7:
        raise StructuralError("braid arrangement supported for 2 <= n <= 7")
    parts = list(ordered_set_partitions(range(1, n + 1)))
    signed = sorted(((partition_signs(p, n), p) for p in parts), key=lambda sp: sign_order_key(sp[0]))
    return Arrangement(
        [s for s, _ in signed],
        dimension=n,
        origin=COMBINATORIAL,
        name=f"braid({n})",
        labels=[p for _, p in signed],
        hyperplane_labels=braid_pairs(n),
    )


def braid_geometric(n: int) -> Arrangement:
    """The same arrangement found by enumerating sign vectors of ``x_i - x_j``."""
    hyps = []
    for i, j in braid_pairs(n):
        normal = [0] * n
        normal[i - 1], normal[j - 1] = 1, -1
        hyps.append(Hyperplane(tuple(normal), 0))
    return enumerate_faces(hyps, dimension=n, name=f"braid-geometric({n})")


def boolean(n: int) -> Arrangement:
    """Coordinate hyperplanes ``x_i = 0``; every sign vector is a face."""
    if not 1 <= n <= 12:
        raise StructuralError("Boolean arrangement supported for 1 <= n <= 12")
    signs = list(itertools.product((1, 0, -1), repeat=n))
    return Arrangement(signs, dimension=n, origin=COMBINATORIAL, name=f"boolean({n})")


def boolean_geometric(n: int) -> Arrangement:
    hyps = [Hyperplane(tuple(int(i == k) for i in range(n)), 0) for k in range(n)]
    return enumerate_faces(hyps, dimension=n, name=f"boolean-geometric({n})")


# x = 0, y = 0, x + y = 1; C0 is the bounded triangle, F the edge of the
# third line below the x-axis, and C2 = F.C0 the chamber just across y = 0
FIGURE1_LINES = (((1, 0), 0), ((0, 1), 0), ((1, 1), 1))
FIGURE1_POINTS = {"C0": (Fraction(1, 4), Fraction(1, 4)), "C2": (Fraction(1, 2), Fraction(-1, 4)), "F": (2, -1)}


def figure1() -> Arrangement:
    return enumerate_faces([Hyperplane(n, b) for n, b in FIGURE1_LINES], dimension=2, name="figure1")


def figure1_landmarks(arr: Arrangement) -> dict[str, int]:
    """Face ids of the marked chambers ``C0``, ``C2`` and the edge ``F``."""
    return {k: arr.locate(p) for k, p in FIGURE1_POINTS.items()}


# -- helpers on braid faces --------------------------------------------------

def braid_face(arr: Arrangement, blocks: Sequence) -> int:
    n = arr.dimension
    return arr.face_id(partition_signs(tuple(frozenset(b) for b in blocks), n))


def deck_chamber(arr: Arrangement, order: Sequence[int]) -> int:
    return braid_face(arr, permutation_blocks(order))


def chamber_deck(arr: Arrangement, chamber: int) -> tuple[int, ...]:
    blocks = arr.labels[chamber] if arr.labels else signs_to_partition(arr.faces[chamber].sign, arr.dimension)
    return tuple(next(iter(b)) for b in blocks)


def relabel_generators(arr: Arrangement) -> list[list[int]]:
    """Face permutations induced by the adjacent card swaps ``(i, i+1)``."""
    n = arr.dimension
    gens = []
    for i in range(1, n):
        swap = {x: x for x in range(1, n + 1)}
        swap[i], swap[i + 1] = i + 1, i
        gens.append([braid_face(arr, [{swap[x] for x in b} for b in arr.labels[f]]) for f in range(len(arr))])
    return gens


def _signs_to_ids(arr: Arrangement, signs: np.ndarray) -> list[int]:
    return [int(x) for x in arr._lookup(arr._encode(signs))]


def hyperoctahedral_generators(arr: Arrangement) -> list[list[int]]:
    """Adjacent coordinate swaps and the sign flip of the first coordinate."""
    s = arr.signs
    gens = []
    for i in range(arr.m - 1):
        t = s.copy()
        t[:, [i, i + 1]] = t[:, [i + 1, i]]
        gens.append(_signs_to_ids(arr, t))
    t = s.copy()
    t[:, 0] = -t[:, 0]
    gens.append(_signs_to_ids(arr, t))
    return gens


# -- instances ---------------------------------------------------------------

@dataclass
class GalleryInstance:
    name: str
    arrangement: Arrangement
    measure: FaceMeasure
    generators: list | None = None
    oracle: str | None = None
    params: dict = field(default_factory=dict)
    negative_control: bool = False
    extras: dict = field(default_factory=dict)
    _certificate: SymmetryCertificate | None = None

    @property
    def certificate(self) -> SymmetryCertificate | None:
        """Verified symmetry certificate, or ``None`` when no generators are known."""
        if self.generators is None:
            return None
        if self._certificate is None:
            self._certificate = verify_certificate(self.arrangement, self.measure, self.generators)
        return self._certificate


def _fractions(ws) -> list[Fraction]:
    return [as_fraction(w) for w in ws]


def _check_total(ws: Sequence[Fraction], what: str) -> None:
    if sum(ws) != 1:
        raise ValidationError(f"{what} sum to {sum(ws)}, not 1")


def tsetlin(weights: Sequence) -> GalleryInstance:
    """Move card ``i`` to the top with probability ``w_i``."""
    ws = _fractions(weights)
    n = len(ws)
    if n < 2:
        raise NonSeparatingError("Tsetlin library needs at least two cards")
    if any(w <= 0 for w in ws):
        raise NonSeparatingError("every card needs positive weight")
    _check_total(ws, "card weights")
    arr = braid(n)
    full = set(range(1, n + 1))
    faces = {braid_face(arr, [{i}, full - {i}]): w for i, w in enumerate(ws, start=1)}
    return GalleryInstance(
        "tsetlin", arr, FaceMeasure(arr, faces), relabel_generators(arr), "move-to-front",
        {"weights": [str(w) for w in ws]}, extras={"card_weights": ws},
    )


def riffle(n: int, a: int = 2) -> GalleryInstance:
    """Inverse ``a``-shuffle: mark cards with iid uniform digits, sort stably by digit."""
    if not 2 <= n <= 7 or a < 2:
        raise StructuralError("riffle needs 2 <= n <= 7 and a >= 2")
    arr = braid(n)
    total = Fraction(1, a ** n)
    weights = {}
    for f, blocks in enumerate(arr.labels):
        k = len(blocks)
        if k <= a:
            # digits used by the k blocks, listed in increasing order
            weights[f] = comb(a, k) * total
    return GalleryInstance("riffle", arr, FaceMeasure(arr, weights), relabel_generators(arr), None, {"n": n, "a": a})


def weighted_subsets(n: int, subsets: Sequence[tuple[Sequence[int], object]]) -> GalleryInstance:
    """Pop shuffle: move the cards of a chosen subset to the top, keeping order."""
    arr = braid(n)
    full = frozenset(range(1, n + 1))
    items = [(frozenset(s), as_fraction(w)) for s, w in subsets]
    if any(not s <= full for s, _ in items):
        raise StructuralError(f"subsets must lie in 1..{n}")
    _check_total([w for _, w in items], "subset weights")
    for i, j in itertools.combinations(range(1, n + 1), 2):
        if not any(w > 0 and ((i in s) != (j in s)) for s, w in items):
            raise NonSeparatingError(f"no positive-weight subset separates cards {i} and {j}")
    weights: dict[int, Fraction] = {}
    for s, w in items:
        blocks = [b for b in (s, full - s) if b]
        f = braid_face(arr, blocks)
        weights[f] = weights.get(f, Fraction(0)) + w
    params = {"n": n, "subsets": [[sorted(s), str(w)] for s, w in items]}
    return GalleryInstance("subsets", arr, FaceMeasure(arr, weights), relabel_generators(arr), None, params)


def random_top_bottom(w_plus: Sequence, w_minus: Sequence) -> GalleryInstance:
    """Card ``c`` goes to the top w.p. ``w_plus[c]`` or to the bottom w.p. ``w_minus[c]``."""
    wp, wm = _fractions(w_plus), _fractions(w_minus)
    n = len(wp)
    if len(wm) != n or n < 2:
        raise StructuralError("need equal-length top and bottom weights for n >= 2 cards")
    _check_total(wp + wm, "top/bottom weights")
    arr = braid(n)
    full = set(range(1, n + 1))
    weights: dict[int, Fraction] = {}
    for c in range(1, n + 1):
        for blocks, w in (([{c}, full - {c}], wp[c - 1]), ([full - {c}, {c}], wm[c - 1])):
            if w:
                f = braid_face(arr, blocks)
                weights[f] = weights.get(f, Fraction(0)) + w
    inst = GalleryInstance(
        "top-bottom", arr, FaceMeasure(arr, weights), relabel_generators(arr), None,
        {"w_plus": [str(w) for w in wp], "w_minus": [str(w) for w in wm]},
    )
    inst.extras["card_weights"] = [p + m for p, m in zip(wp, wm)]
    if not inst.measure.separating:
        raise NonSeparatingError("top/bottom weights do not separate every pair of cards")
    return inst


def hypercube_nn(w_plus: Sequence, w_minus: Sequence) -> GalleryInstance:
    """Pick coordinate ``i`` and set it to ``+`` (``w_plus[i]``) or ``-`` (``w_minus[i]``)."""
    wp, wm = _fractions(w_plus), _fractions(w_minus)
    n = len(wp)
    if len(wm) != n:
        raise StructuralError("need equal-length weight lists")
    _check_total(wp + wm, "coordinate weights")
    arr = boolean(n)
    weights = {}
    for i in range(n):
        for s, w in ((1, wp[i]), (-1, wm[i])):
            e = [0] * n
            e[i] = s
            if w:
                weights[arr.face_id(e)] = w
    inst = GalleryInstance(
        "boolean-nn", arr, FaceMeasure(arr, weights), hyperoctahedral_generators(arr), "hypercube-matrix",
        {"w_plus": [str(w) for w in wp], "w_minus": [str(w) for w in wm]},
    )
    if not inst.measure.separating:
        raise NonSeparatingError("some coordinate is never picked")
    return inst


def hypercube_kflip(n: int, k: int) -> GalleryInstance:
    """Pick ``k`` coordinates uniformly, then a fair sign for each of them."""
    if not 1 <= k <= n:
        raise StructuralError("need 1 <= k <= n")
    arr = boolean(n)
    w = Fraction(1, comb(n, k) * 2 ** k)
    weights = {}
    for coords in itertools.combinations(range(n), k):
        for signs in itertools.product((1, -1), repeat=k):
            e = [0] * n
            for i, s in zip(coords, signs):
                e[i] = s
            weights[arr.face_id(e)] = w
    return GalleryInstance("kflip", arr, FaceMeasure(arr, weights), hyperoctahedral_generators(arr), None, {"n": n, "k": k})


def graph_coloring(n: int, edges: Sequence[tuple[int, int]]) -> GalleryInstance:
    """Pick a vertex and paint its closed neighborhood one fair color.

    Vertices are ``0..n-1``. Generators are the graph automorphisms together
    with the global color swap; whether they act transitively on colorings is
    left to :func:`verify_certificate`.
    """
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((int(u), int(v)) for u, v in edges)
    if g.number_of_nodes() != n:
        raise StructuralError("edge endpoints must be vertices 0..n-1")
    arr = boolean(n)
    w = Fraction(1, 2 * n)
    weights: dict[int, Fraction] = {}
    for v in range(n):
        hood = set(g[v]) | {v}
        for s in (1, -1):
            f = arr.face_id([s if u in hood else 0 for u in range(n)])
            weights[f] = weights.get(f, Fraction(0)) + w
    gens = []
    for auto in _automorphism_generators(g):
        perm = np.array([auto[i] for i in range(n)])
        t = np.empty_like(arr.signs)
        t[:, perm] = arr.signs
        gens.append(_signs_to_ids(arr, t))
    gens.append(_signs_to_ids(arr, -arr.signs))
    inst = GalleryInstance(
        "graph-coloring", arr, FaceMeasure(arr, weights), gens, None,
        {"n": n, "edges": [list(e) for e in g.edges()]},
    )
    inst.extras.update(
        vertex_transitive=_vertex_transitive(g),
        min_vertex_cover=len(min_vertex_cover(g)),
        min_dominating_set=len(min_dominating_set(g)),
    )
    return inst


def _automorphism_generators(g: nx.Graph, limit: int = 5000) -> list[dict]:
    matcher = nx.algorithms.isomorphism.GraphMatcher(g, g)
    out = []
    for k, m in enumerate(matcher.isomorphisms_iter()):
        if k >= limit:
            break
        if any(m[v] != v for v in m):
            out.append(m)
    return out


def _vertex_transitive(g: nx.Graph) -> bool:
    orbit = {0}
    for m in _automorphism_generators(g):
        orbit.add(m[0])
    return len(orbit) == g.number_of_nodes()


def _smallest_subset(g: nx.Graph, ok: Callable[[set], bool]) -> set:
    nodes = list(g.nodes())
    for size in range(len(nodes) + 1):
        for c in itertools.combinations(nodes, size):
            if ok(set(c)):
                return set(c)
    return set(nodes)


def min_vertex_cover(g: nx.Graph) -> set:
    return _smallest_subset(g, lambda s: all(u in s or v in s for u, v in g.edges()))


def min_dominating_set(g: nx.Graph) -> set:
    return _smallest_subset(g, lambda s: all(v in s or any(u in s for u in g[v]) for v in g.nodes()))


def figure1_instance(weights: str = "uniform") -> GalleryInstance:
    """The three-line example; ``weights`` is ``uniform`` over all faces or
    ``edges`` (uniform over the nine edges)."""
    arr = figure1()
    if weights == "uniform":
        faces = range(len(arr))
    elif weights == "edges":
        faces = [f.id for f in arr.faces if len(f.zero_set) == 1]
    else:
        raise ValidationError(f"unknown figure1 weighting {weights!r}")
    return GalleryInstance("figure1", arr, FaceMeasure.uniform(arr, faces), None, None, {"weights": weights})


def custom(arrangement: str | dict | None = None, measure: str | list = "uniform") -> GalleryInstance:
    """Instance from arrangement / face-weight JSON (paths or parsed data).

    Without an arrangement the three lines of ``figure1`` are used; the
    measure ``"uniform"`` puts equal weight on every face.
    """
    arr = Arrangement.from_json(_load_json(arrangement) if arrangement is not None else figure1().to_json())
    if measure == "uniform":
        meas = FaceMeasure.uniform(arr, range(len(arr)))
    else:
        meas = FaceMeasure.from_json(arr, _load_json(measure))
    meas.validate()
    return GalleryInstance("custom", arr, meas, None, None, {})


def _load_json(src):
    if isinstance(src, (dict, list)):
        return src
    src = str(src)
    if src.lstrip().startswith(("{", "[")):
        return json.loads(src)
    with open(src) as fh:
        return json.load(fh)


# -- oracles -----------------------------------------------------------------

def move_to_front_matrix(arr: Arrangement, card_weights: Sequence) -> np.ndarray:
    """Tsetlin chain built directly on decks, indexed like ``arr.chambers``."""
    a = arr.chamber_count
    k = np.empty((a, a), dtype=object)
    k[:] = Fraction(0)
    for c in arr.chambers:
        deck = chamber_deck(arr, c)
        for card, w in enumerate(card_weights, start=1):
            new = (card,) + tuple(x for x in deck if x != card)
            k[arr.chamber_index[c], arr.chamber_index[deck_chamber(arr, new)]] += w
    return k


def luce(card_weights: Sequence, deck: Sequence[int]) -> Fraction:
    """Probability of ``deck`` (top first) under sampling without replacement."""
    remaining = sum(card_weights)
    p = Fraction(1)
    for card in deck:
        w = card_weights[card - 1]
        p *= w / remaining
        remaining -= w
    return p


def hypercube_matrix(arr: Arrangement, w_plus: Sequence, w_minus: Sequence) -> np.ndarray:
    """Nearest-neighbor hypercube matrix written out entry by entry."""
    a = arr.chamber_count
    k = np.empty((a, a), dtype=object)
    k[:] = Fraction(0)
    for x in arr.chambers:
        sx = arr.faces[x].sign
        for y in arr.chambers:
            sy = arr.faces[y].sign
            diff = [i for i in range(arr.m) if sx[i] != sy[i]]
            if not diff:
                val = sum(wp if s > 0 else wm for s, wp, wm in zip(sx, w_plus, w_minus))
            elif len(diff) == 1:
                i = diff[0]
                val = w_minus[i] if sx[i] > 0 else w_plus[i]
            else:
                val = Fraction(0)
            k[arr.chamber_index[x], arr.chamber_index[y]] = val
    return k


# -- catalog for the command line --------------------------------------------

def _uniform(n: int) -> list[Fraction]:
    return [Fraction(1, n)] * n


def _build_tsetlin(p):
    if "weights" in p:
        return tsetlin(p["weights"])
    return tsetlin(_uniform(int(p.get("n", 3))))


def _build_top_bottom(p):
    if "w_plus" in p:
        return random_top_bottom(p["w_plus"], p["w_minus"])
    n = int(p.get("n", 3))
    return random_top_bottom(_uniform(2 * n)[:n], _uniform(2 * n)[:n])


def _build_nn(p):
    if "w_plus" in p:
        return hypercube_nn(p["w_plus"], p["w_minus"])
    n = int(p.get("n", 3))
    return hypercube_nn(_uniform(2 * n)[:n], _uniform(2 * n)[:n])


def _build_subsets(p):
    n = int(p.get("n", 3))
    subsets = p.get("subsets") or [[i] for i in range(1, n + 1)] + [[1, 2]]
    weights = p.get("weights") or _uniform(len(subsets))
    return weighted_subsets(n, list(zip(subsets, weights)))


def _build_graph(p):
    n = int(p.get("n", 5))
    edges = p.get("edges") or [(i, (i + 1) % n) for i in range(n)]
    return graph_coloring(n, edges)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    build: Callable[[dict], GalleryInstance]
    defaults: dict
    schema: dict
    description: str


CATALOG = {
    e.name: e
    for e in [
        CatalogEntry("tsetlin", _build_tsetlin, {"n": 3},
                     {"n": "int, 2..7 (uniform weights)", "weights": "list of rationals"},
                     "random-to-top / Tsetlin library"),
        CatalogEntry("riffle", lambda p: riffle(int(p.get("n", 3)), int(p.get("a", 2))), {"n": 3, "a": 2},
                     {"n": "int, 2..7", "a": "int >= 2"}, "inverse a-shuffle"),
        CatalogEntry("boolean-nn", _build_nn, {"n": 3},
                     {"n": "int (uniform)", "w_plus": "list", "w_minus": "list"},
                     "nearest-neighbor hypercube walk"),
        CatalogEntry("kflip", lambda p: hypercube_kflip(int(p.get("n", 4)), int(p.get("k", 2))), {"n": 4, "k": 2},
                     {"n": "int", "k": "int, 1..n"}, "re-randomize k random coordinates"),
        CatalogEntry("top-bottom", _build_top_bottom, {"n": 3},
                     {"n": "int (uniform)", "w_plus": "list", "w_minus": "list"},
                     "random card to top or bottom"),
        CatalogEntry("subsets", _build_subsets, {"n": 3},
                     {"n": "int", "subsets": "list of card lists (default singletons and {1,2})",
                      "weights": "list (default uniform)"},
                     "weighted-subsets pop shuffle"),
        CatalogEntry("graph-coloring", _build_graph, {"n": 5},
                     {"n": "int", "edges": "list of [u, v] (default cycle)"},
                     "paint a closed neighborhood one color"),
        CatalogEntry("figure1", lambda p: figure1_instance(p.get("weights", "uniform")), {},
                     {"weights": "uniform | edges"}, "three lines in the plane"),
        CatalogEntry("custom", lambda p: custom(p.get("arrangement"), p.get("measure", "uniform")), {},
                     {"arrangement": "arrangement JSON (path or inline)", "measure": "face-weight JSON (path or inline) | uniform"},
                     "user-supplied arrangement and measure"),
    ]
}


def build(name: str, params: dict | None = None) -> GalleryInstance:
    if name not in CATALOG:
        raise ValidationError(f"unknown instance {name!r}; known: {', '.join(CATALOG)}")
    return CATALOG[name].build(dict(params or {}))
