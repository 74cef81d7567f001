"""Hyperplane arrangements, their faces, and the face semigroup.

Faces are stored as sign vectors over ``{+1, 0, -1}`` (printed ``+``, ``0``,
``-``). The product of two faces keeps the left factor's sign wherever it is
nonzero and falls back to the right factor elsewhere; with it the faces form a
left-regular band and act on the chambers.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import ContractError, StructuralError
from .feasibility import strictly_feasible
from .rational import as_fraction

if TYPE_CHECKING:
    from .measure import FaceMeasure

PLUS, ZERO, MINUS = 1, 0, -1
SIGN_CHARS = {PLUS: "+", ZERO: "0", MINUS: "-"}
CHAR_SIGNS = {v: k for k, v in SIGN_CHARS.items()}
# lexicographic enumeration order of the three symbols
SIGN_ORDER = (PLUS, ZERO, MINUS)
_RANK = {PLUS: 0, ZERO: 1, MINUS: 2}

GEOMETRIC = "geometric"
COMBINATORIAL = "combinatorial"

DEFAULT_TABLE_CAP = 2 ** 22
# closure is checked eagerly when |F|^2 stays below this
CLOSURE_CHECK_MAX = 2 ** 22

SignVector = tuple[int, ...]


def parse_signs(s: str | Sequence[int]) -> SignVector:
    if isinstance(s, str):
        try:
            return tuple(CHAR_SIGNS[c] for c in s)
        except KeyError as exc:
            raise StructuralError(f"bad sign character {exc.args[0]!r} in {s!r}") from None
    return tuple(int(v) for v in s)


def format_signs(signs: Iterable[int]) -> str:
    return "".join(SIGN_CHARS[int(v)] for v in signs)


def sign_order_key(signs: Sequence[int]) -> tuple[int, ...]:
    """Sort key putting sign vectors in ``+ < 0 < -`` lexicographic order."""
    return tuple(_RANK[int(v)] for v in signs)


def sign_product(f: str | Sequence[int], g: str | Sequence[int]) -> SignVector:
    """Componentwise face product: ``f`` wins unless it is zero."""
    f, g = parse_signs(f), parse_signs(g)
    if len(f) != len(g):
        raise StructuralError(f"sign vectors of different lengths {len(f)} and {len(g)}")
    return tuple(a if a != 0 else b for a, b in zip(f, g))


@dataclass(frozen=True)
class Hyperplane:
    """Affine hyperplane ``<normal, x> = offset`` with rational data."""

    normal: tuple[Fraction, ...]
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(as_fraction(v) for v in self.normal))
        object.__setattr__(self, "offset", as_fraction(self.offset))
        if all(v == 0 for v in self.normal):
            raise StructuralError("hyperplane normal is the zero vector")

    def side(self, point: Sequence) -> int:
        value = sum(a * as_fraction(x) for a, x in zip(self.normal, point)) - self.offset
        return (value > 0) - (value < 0)

    def to_json(self) -> dict:
        return {"normal": [str(v) for v in self.normal], "offset": str(self.offset)}

    @classmethod
    def from_json(cls, data: dict) -> "Hyperplane":
        return cls(tuple(data["normal"]), data.get("offset", 0))


@dataclass(frozen=True)
class Face:
    id: int
    sign: SignVector
    zero_set: frozenset[int]

    @property
    def is_chamber(self) -> bool:
        return not self.zero_set

    def __str__(self) -> str:
        return format_signs(self.sign)


class Arrangement:
    """Faces and chambers of a hyperplane arrangement.

    Immutable after construction. ``product`` memoizes into a table guarded by
    a lock, capped at ``table_cap`` entries; past the cap products are computed
    on the fly.
    """

    def __init__(
        self,
        signs: Iterable[Sequence[int]],
        *,
        dimension: int | None = None,
        hyperplanes: Sequence[Hyperplane] = (),
        origin: str = COMBINATORIAL,
        name: str = "",
        labels: Sequence | None = None,
        hyperplane_labels: Sequence | None = None,
        table_cap: int = DEFAULT_TABLE_CAP,
    ):
        sign_list = [parse_signs(s) for s in signs]
        if not sign_list:
            raise StructuralError("an arrangement needs at least one face")
        m = len(sign_list[0])
        if any(len(s) != m for s in sign_list):
            raise StructuralError("sign vectors have inconsistent lengths")
        if m > 39:
            raise StructuralError("at most 39 hyperplanes are supported")
        self.m = m
        self.dimension = dimension
        self.hyperplanes = tuple(hyperplanes)
        self.origin = origin
        self.name = name
        self.labels = tuple(labels) if labels is not None else None
        self.hyperplane_labels = tuple(hyperplane_labels) if hyperplane_labels is not None else None
        self.faces = tuple(
            Face(i, s, frozenset(k for k, v in enumerate(s) if v == 0)) for i, s in enumerate(sign_list)
        )
        self._id = {f.sign: f.id for f in self.faces}
        if len(self._id) != len(self.faces):
            raise StructuralError("duplicate sign vectors")
        self.chambers = tuple(f.id for f in self.faces if f.is_chamber)
        self.chamber_index = {c: k for k, c in enumerate(self.chambers)}
        self._signs = np.array(sign_list, dtype=np.int8).reshape(len(sign_list), m)
        self._powers = 3 ** np.arange(m, dtype=np.int64)
        keys = self._encode(self._signs)
        order = np.argsort(keys)
        self._sorted_keys = keys[order]
        self._sorted_ids = order
        self._table: dict[tuple[int, int], int] = {}
        self._table_cap = table_cap
        self._lock = threading.Lock()
        if len(self.faces) ** 2 <= CLOSURE_CHECK_MAX:
            self.check_closure()

    def check_closure(self, chunk: int = 2 ** 18) -> None:
        """Raise ``StructuralError`` unless every product of two faces is a face."""
        n = len(self.faces)
        flat = np.arange(n * n, dtype=np.int64)
        for lo in range(0, n * n, chunk):
            part = flat[lo:lo + chunk]
            self.product_many(part // n, part % n)

    # -- basic lookups -------------------------------------------------
    def __len__(self) -> int:
        return len(self.faces)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Arrangement{label} m={self.m} faces={len(self.faces)} chambers={self.chamber_count}>"

    @property
    def chamber_count(self) -> int:
        return len(self.chambers)

    @property
    def signs(self) -> np.ndarray:
        return self._signs

    def face_id(self, signs: str | Sequence[int]) -> int:
        s = parse_signs(signs)
        if len(s) != self.m:
            raise StructuralError(f"expected {self.m} signs, got {len(s)}")
        try:
            return self._id[s]
        except KeyError:
            raise StructuralError(f"{format_signs(s)} is not a face of this arrangement") from None

    def sign_string(self, face: int) -> str:
        return format_signs(self.faces[face].sign)

    def is_chamber(self, face: int) -> bool:
        return not self.faces[face].zero_set

    def locate(self, point: Sequence) -> int:
        """Id of the face containing ``point`` (geometric arrangements only)."""
        if not self.hyperplanes:
            raise ContractError("locate needs a geometric arrangement")
        return self.face_id(tuple(h.side(point) for h in self.hyperplanes))

    # -- the product ---------------------------------------------------
    def _encode(self, signs: np.ndarray) -> np.ndarray:
        return (signs.astype(np.int64) + 1) @ self._powers

    def _lookup(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        if not np.array_equal(self._sorted_keys[pos], keys):
            raise StructuralError("face list is not closed under the product")
        return self._sorted_ids[pos]

    def product(self, f: int, g: int) -> int:
        """Id of the face ``f * g``."""
        key = (f, g)
        hit = self._table.get(key)
        if hit is not None:
            return hit
        s = sign_product(self.faces[f].sign, self.faces[g].sign)
        try:
            out = self._id[s]
        except KeyError:
            raise StructuralError("face list is not closed under the product") from None
        if len(self._table) < self._table_cap:
            with self._lock:
                self._table[key] = out
        return out

    def product_many(self, fs, gs) -> np.ndarray:
        """Vectorized product over broadcast arrays of face ids."""
        fs, gs = np.broadcast_arrays(np.asarray(fs), np.asarray(gs))
        a = self._signs[fs.ravel()]
        b = self._signs[gs.ravel()]
        out = self._lookup(self._encode(np.where(a != 0, a, b)))
        return out.reshape(fs.shape)

    def project(self, f: int, c: int) -> int:
        """Projection of the chamber ``c`` on the face ``f``."""
        if not self.is_chamber(c):
            raise ContractError(f"face {self.sign_string(c)} is not a chamber")
        return self.product(f, c)

    def word_product(self, word: Sequence[int]) -> int:
        """Product of a word of faces, evaluated right to left."""
        if not word:
            raise ContractError("empty word")
        acc = word[-1]
        for f in reversed(word[:-1]):
            acc = self.product(f, acc)
        return acc

    def nonzero_mask(self, face: int) -> int:
        """Bitmask of the hyperplanes on which ``face`` has a nonzero sign."""
        mask = 0
        for i, v in enumerate(self.faces[face].sign):
            if v:
                mask |= 1 << i
        return mask

    # -- serialization -------------------------------------------------
    def to_json(self) -> dict:
        if not self.hyperplanes:
            raise ContractError("only geometric arrangements have a hyperplane description")
        return {"dimension": self.dimension, "hyperplanes": [h.to_json() for h in self.hyperplanes]}

    @classmethod
    def from_json(cls, data: dict | str) -> "Arrangement":
        if isinstance(data, str):
            data = json.loads(data)
        hyps = [Hyperplane.from_json(h) for h in data["hyperplanes"]]
        dim = int(data.get("dimension", len(hyps[0].normal) if hyps else 0))
        return enumerate_faces(hyps, dimension=dim)


def enumerate_faces(
    hyperplanes: Sequence[Hyperplane], *, dimension: int | None = None, name: str = ""
) -> Arrangement:
    """Enumerate every realizable sign vector of a rational arrangement.

    Depth-first over ``{+, 0, -}^m`` in lexicographic order; a prefix whose
    polyhedron is empty cuts off its whole subtree.
    """
    hyps = list(hyperplanes)
    if not hyps:
        raise StructuralError("need at least one hyperplane")
    dim = dimension if dimension is not None else len(hyps[0].normal)
    if any(len(h.normal) != dim for h in hyps):
        raise StructuralError("hyperplane normals have inconsistent dimensions")
    m = len(hyps)
    found: list[SignVector] = []

    def feasible(prefix):
        eqs, strict = [], []
        for h, s in zip(hyps, prefix):
            if s == ZERO:
                eqs.append((h.normal, h.offset))
            elif s == PLUS:
                strict.append((h.normal, h.offset))
            else:
                strict.append((tuple(-v for v in h.normal), -h.offset))
        return strictly_feasible(dim, eqs, strict)

    def walk(prefix):
        if len(prefix) == m:
            found.append(tuple(prefix))
            return
        for s in SIGN_ORDER:
            prefix.append(s)
            if feasible(prefix):
                walk(prefix)
            prefix.pop()

    walk([])
    return Arrangement(found, dimension=dim, hyperplanes=hyps, origin=GEOMETRIC, name=name)


@dataclass
class BlockPartition:
    """Faces grouped by equal zero sets, with the weight each block carries."""

    blocks: list[tuple[frozenset[int], list[int]]]
    weights: list = field(default_factory=list)

    @property
    def positive(self) -> list[int]:
        """Indices of blocks with positive weight."""
        return [k for k, w in enumerate(self.weights) if w > 0]

    @property
    def positive_weights(self) -> list:
        return [self.weights[k] for k in self.positive]

    def block_of(self) -> dict[int, int]:
        return {f: k for k, (_, members) in enumerate(self.blocks) for f in members}


def block_partition(arr: Arrangement, measure: "FaceMeasure") -> BlockPartition:
    groups: dict[frozenset[int], list[int]] = {}
    for f in arr.faces:
        groups.setdefault(f.zero_set, []).append(f.id)
    blocks = sorted(groups.items(), key=lambda kv: min(kv[1]))
    zero = measure.zero
    weights = [sum((measure.weight(f) for f in members), zero) for _, members in blocks]
    return BlockPartition(blocks, weights)


def is_separating(arr: Arrangement, measure: "FaceMeasure") -> tuple[bool, int | None]:
    """Whether every hyperplane has a positive-weight face off it.

    Returns ``(True, None)`` or ``(False, i)`` for the first hyperplane ``i``
    that every positive-weight face lies on.
    """
    measure.validate()
    covered = 0
    for f in measure.support:
        covered |= arr.nonzero_mask(f)
    for i in range(arr.m):
        if not covered >> i & 1:
            return False, i
    return True, None
