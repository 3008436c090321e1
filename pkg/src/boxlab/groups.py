"""Marked finite quotients of a finitely generated group and approximating chains.

Group elements are integers ``0..order-1``.  Ambient elements are encoded per
family: reduced words as tuples of signed letters for free groups (letter
``+k``/``-k`` is generator ``k-1`` or its inverse), integer coordinate tuples
for free abelian groups, and elements of the deepest level for chains given
without an ambient presentation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ChainExhaustedError,
    ChainValidationError,
    InvalidGroupError,
    NonStabilizedLengthError,
)

__all__ = [
    "FREE",
    "FREE_ABELIAN",
    "EXPLICIT_CHAIN_LIMIT",
    "EXHAUSTIVE_THRESHOLD",
    "AmbientGroup",
    "MarkedQuotient",
    "CyclicQuotient",
    "TableQuotient",
    "GroupChain",
    "build_quotient",
    "build_chain",
    "cayley_distance",
    "quotient_diameter",
    "reduce_word",
    "ambient_word_length",
    "ambient_mult",
    "ambient_inv",
    "ambient_identity",
    "ambient_from_letters",
    "ambient_sphere",
    "project_to_level",
    "r_isometric_radius",
    "select_level_for_r",
]

FREE = "free"
FREE_ABELIAN = "free_abelian"
EXPLICIT_CHAIN_LIMIT = "explicit_chain_limit"
_FAMILIES = (FREE, FREE_ABELIAN, EXPLICIT_CHAIN_LIMIT)

# Exhaustive invariant checks switch to random sampling above this order.
EXHAUSTIVE_THRESHOLD = 512
_SAMPLE_TRIPLES = 20000


@dataclass(frozen=True)
class AmbientGroup:
    """Marked group surjecting onto every level of a chain."""

    family: str
    rank: int

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown ambient family {self.family!r}")
        if self.rank < 1:
            raise ValueError(f"ambient rank must be positive, got {self.rank}")

    @property
    def generator_count(self) -> int:
        return self.rank


def reduce_word(word) -> tuple[int, ...]:
    """Freely reduce a word given as signed letters."""
    out: list[int] = []
    for letter in word:
        if letter == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(int(letter))
    return tuple(out)


class MarkedQuotient:
    """Finite group marked by an ordered tuple of generator images.

    Subclasses provide ``mult``/``inv``; distances, geodesic words and
    validation are shared.  The word metric is the right-multiplication
    Cayley metric for the symmetrized marking.
    """

    order: int
    identity: int
    gen_images: tuple[int, ...]

    def __init__(self, order: int, identity: int, gen_images):
        if order < 1:
            raise InvalidGroupError(f"order must be positive, got {order}")
        self.order = int(order)
        self.identity = int(identity)
        self.gen_images = tuple(int(g) for g in gen_images)
        if not 0 <= self.identity < self.order:
            raise InvalidGroupError(f"identity {identity} out of range")
        for g in self.gen_images:
            if not 0 <= g < self.order:
                raise InvalidGroupError(f"generator image {g} out of range")
        self._dist: np.ndarray | None = None
        self._parent: np.ndarray | None = None
        self._parent_letter: np.ndarray | None = None
        self._inv_table: np.ndarray | None = None
        self._validated = False

    # -- group law ---------------------------------------------------------

    def mult(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        if self._inv_table is None:
            table = np.empty(self.order, dtype=np.int64)
            for x in range(self.order):
                row = self._mult_row(x)
                hits = np.flatnonzero(row == self.identity)
                if hits.size != 1:
                    raise InvalidGroupError(f"element {x} has {hits.size} inverses")
                table[x] = hits[0]
            self._inv_table = table
        return int(self._inv_table[a])

    def _mult_row(self, a: int) -> np.ndarray:
        return np.fromiter(
            (self.mult(a, b) for b in range(self.order)), dtype=np.int64, count=self.order
        )

    @property
    def rank(self) -> int:
        return len(self.gen_images)

    def elements(self) -> range:
        return range(self.order)

    def letters(self) -> tuple[int, ...]:
        """Symmetrized marking letters, ordered ``+1, -1, +2, -2, ...``."""
        out = []
        for k in range(1, self.rank + 1):
            out.extend((k, -k))
        return tuple(out)

    def letter_image(self, letter: int) -> int:
        g = self.gen_images[abs(letter) - 1]
        return g if letter > 0 else self.inv(g)

    def letter_perms(self) -> list[np.ndarray]:
        """Right-multiplication permutation for each symmetrized letter."""
        perms = []
        for letter in self.letters():
            img = self.letter_image(letter)
            perms.append(
                np.fromiter(
                    (self.mult(x, img) for x in range(self.order)),
                    dtype=np.int64,
                    count=self.order,
                )
            )
        return perms

    # -- word metric -------------------------------------------------------

    def _run_bfs(self):
        perms = self.letter_perms()
        dist = np.full(self.order, -1, dtype=np.int64)
        parent = np.full(self.order, -1, dtype=np.int64)
        parent_letter = np.zeros(self.order, dtype=np.int64)
        dist[self.identity] = 0
        frontier = [self.identity]
        letters = self.letters()
        d = 0
        while frontier:
            nxt = []
            for x in frontier:
                for li, perm in enumerate(perms):
                    y = int(perm[x])
                    if dist[y] < 0:
                        dist[y] = d + 1
                        parent[y] = x
                        parent_letter[y] = letters[li]
                        nxt.append(y)
            frontier = nxt
            d += 1
        self._dist = dist
        self._parent = parent
        self._parent_letter = parent_letter

    def distance_from_identity(self) -> np.ndarray:
        if self._dist is None:
            self._run_bfs()
        return self._dist

    def canonical_word(self, x: int) -> tuple[int, ...]:
        """Letters of the breadth-first geodesic from the identity to ``x``."""
        if self._dist is None:
            self._run_bfs()
        if self._dist[x] < 0:
            raise InvalidGroupError(f"element {x} not generated by the marking")
        out = []
        while x != self.identity:
            out.append(int(self._parent_letter[x]))
            x = int(self._parent[x])
        out.reverse()
        return tuple(out)

    def evaluate_word(self, word) -> int:
        x = self.identity
        for letter in word:
            x = self.mult(x, self.letter_image(letter))
        return x

    def cayley_distance(self, x: int, y: int) -> int:
        dist = self.distance_from_identity()
        d = int(dist[self.mult(self.inv(x), y)])
        if d < 0:
            raise InvalidGroupError("marking does not generate the group")
        return d

    def diameter(self) -> int:
        dist = self.distance_from_identity()
        if (dist < 0).any():
            raise InvalidGroupError("marking does not generate the group")
        return int(dist.max())

    # -- validation --------------------------------------------------------

    def validate(self, threshold: int = EXHAUSTIVE_THRESHOLD, seed: int = 0) -> None:
        """Check the group law and that the marking generates.

        Exhaustive below ``threshold``, randomized sampling above.
        """
        if self._validated:
            return
        n = self.order
        if n <= threshold:
            table = np.vstack([self._mult_row(a) for a in range(n)])
            if table.min() < 0 or table.max() >= n:
                raise InvalidGroupError("multiplication table entry out of range")
            idx = np.arange(n)
            if not (table[self.identity] == idx).all():
                raise InvalidGroupError("identity fails on the left")
            if not (table[:, self.identity] == idx).all():
                raise InvalidGroupError("identity fails on the right")
            if not (table == self.identity).any(axis=1).all():
                raise InvalidGroupError("some element has no inverse")
            for a in range(n):
                lhs = table[table[a]]
                rhs = np.take(table[a], table)
                if not (lhs == rhs).all():
                    b, c = map(int, np.argwhere(lhs != rhs)[0])
                    raise InvalidGroupError(
                        f"associativity fails at ({a}, {b}, {c}):"
                        f" ({a}{b}){c} = {lhs[b, c]}, {a}({b}{c}) = {rhs[b, c]}"
                    )
        else:
            rng = np.random.default_rng(seed)
            triples = rng.integers(0, n, size=(_SAMPLE_TRIPLES, 3))
            for a, b, c in triples:
                a, b, c = int(a), int(b), int(c)
                if self.mult(self.mult(a, b), c) != self.mult(a, self.mult(b, c)):
                    raise InvalidGroupError(f"associativity fails at ({a}, {b}, {c})")
            for x in map(int, rng.integers(0, n, size=200)):
                if self.mult(self.identity, x) != x or self.mult(x, self.identity) != x:
                    raise InvalidGroupError(f"identity fails at {x}")
                row = self._mult_row(x)
                if not (row == self.identity).any():
                    raise InvalidGroupError(f"element {x} has no inverse")
        dist = self.distance_from_identity()
        if (dist < 0).any():
            missing = int(np.flatnonzero(dist < 0)[0])
            raise InvalidGroupError(
                f"generators do not generate: element {missing} unreachable"
            )
        self._validated = True


class CyclicQuotient(MarkedQuotient):
    """Product of cyclic groups ``Z/m_1 x ... x Z/m_k`` marked by unit vectors."""

    def __init__(self, moduli):
        self.moduli = tuple(int(m) for m in moduli)
        if not self.moduli:
            raise InvalidGroupError("empty modulus list")
        if any(m < 1 for m in self.moduli):
            raise InvalidGroupError(f"moduli must be positive, got {self.moduli}")
        order = 1
        for m in self.moduli:
            order *= m
        self._weights = []
        w = order
        for m in self.moduli:
            w //= m
            self._weights.append(w)
        gen_images = [self._encode_unit(k) for k in range(len(self.moduli))]
        super().__init__(order, 0, gen_images)
        self._decode_table: np.ndarray | None = None

    def _encode_unit(self, k: int) -> int:
        return self._weights[k] if self.moduli[k] > 1 else 0

    def encode(self, vec) -> int:
        x = 0
        for c, m, w in zip(vec, self.moduli, self._weights):
            x += (int(c) % m) * w
        return x

    def decode(self, x: int) -> tuple[int, ...]:
        out = []
        for m, w in zip(self.moduli, self._weights):
            out.append((x // w) % m)
        return tuple(out)

    def _decode_all(self) -> np.ndarray:
        if self._decode_table is None:
            xs = np.arange(self.order)
            cols = [(xs // w) % m for m, w in zip(self.moduli, self._weights)]
            self._decode_table = np.stack(cols, axis=1)
        return self._decode_table

    def _encode_array(self, vecs: np.ndarray) -> np.ndarray:
        mods = np.array(self.moduli)
        weights = np.array(self._weights)
        return ((vecs % mods) * weights).sum(axis=1)

    def mult(self, a: int, b: int) -> int:
        va = self.decode(a)
        vb = self.decode(b)
        return self.encode(u + v for u, v in zip(va, vb))

    def inv(self, a: int) -> int:
        return self.encode(-c for c in self.decode(a))

    def _mult_row(self, a: int) -> np.ndarray:
        va = np.array(self.decode(a))
        return self._encode_array(self._decode_all() + va)

    def letter_perms(self) -> list[np.ndarray]:
        perms = []
        all_vecs = self._decode_all()
        for letter in self.letters():
            k = abs(letter) - 1
            unit = np.zeros(len(self.moduli), dtype=np.int64)
            unit[k] = 1 if letter > 0 else -1
            perms.append(self._encode_array(all_vecs + unit))
        return perms


class TableQuotient(MarkedQuotient):
    """Marked group given by an explicit multiplication table."""

    def __init__(self, table, identity: int, gen_images):
        arr = np.asarray(table, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidGroupError(f"table must be square, got shape {arr.shape}")
        super().__init__(arr.shape[0], identity, gen_images)
        if arr.min() < 0 or arr.max() >= self.order:
            raise InvalidGroupError("multiplication table entry out of range")
        self.table = arr

    def mult(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def _mult_row(self, a: int) -> np.ndarray:
        return self.table[a]


def _quotient_from_permutations(degree: int, gens, base: int) -> TableQuotient:
    """Regular representation of a permutation action, simply transitive on an orbit."""
    perms = []
    for i, p in enumerate(gens):
        arr = np.asarray(p, dtype=np.int64)
        if arr.shape != (degree,) or sorted(arr.tolist()) != list(range(degree)):
            raise InvalidGroupError(f"generator {i} is not a permutation of degree {degree}")
        perms.append(arr)
    if not 0 <= base < degree:
        raise InvalidGroupError(f"base point {base} out of range")
    inv_perms = [np.argsort(p) for p in perms]
    letters = []
    for p, q in zip(perms, inv_perms):
        letters.extend((p, q))

    orbit_index: dict[int, int] = {base: 0}
    orbit_points = [base]
    # full permutation realizing each discovered orbit point from the base
    words = [np.arange(degree)]
    frontier = [0]
    while frontier:
        nxt = []
        for xi in frontier:
            gx = words[xi]
            for p in letters:
                gy = p[gx]
                y = int(gy[base])
                if y in orbit_index:
                    known = words[orbit_index[y]]
                    if not (gy[orbit_points] == known[orbit_points]).all():
                        raise InvalidGroupError(
                            f"orbit of {base} is not simply transitive:"
                            f" two words differ on the orbit at point {y}"
                        )
                else:
                    orbit_index[y] = len(orbit_points)
                    orbit_points.append(y)
                    words.append(gy)
                    nxt.append(orbit_index[y])
        frontier = nxt
    n = len(orbit_points)
    table = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        ga = words[a]
        for b in range(n):
            table[a, b] = orbit_index[int(ga[orbit_points[b]])]
    gen_idx = [orbit_index[int(p[base])] for p in perms]
    return TableQuotient(table, 0, gen_idx)


def build_quotient(spec, threshold: int = EXHAUSTIVE_THRESHOLD, seed: int = 0) -> MarkedQuotient:
    """Build and validate a marked quotient from a description mapping.

    Recognized kinds: ``cyclic`` (field ``moduli``), ``table`` (fields
    ``mult``, ``identity``, ``gen_images``) and ``permutation`` (fields
    ``degree``, ``gens``, ``base``).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidGroupError(f"quotient spec must be a mapping with a 'kind', got {spec!r}")
    kind = spec["kind"]
    known = {
        "cyclic": ("moduli",),
        "table": ("mult", "identity", "gen_images"),
        "permutation": ("degree", "gens", "base"),
    }
    if kind not in known:
        raise InvalidGroupError(f"unknown quotient kind {kind!r}")
    missing = [f for f in known[kind] if f not in spec]
    if missing:
        raise InvalidGroupError(f"quotient spec of kind {kind!r} missing fields {missing}")
    if kind == "cyclic":
        q: MarkedQuotient = CyclicQuotient(spec["moduli"])
    elif kind == "table":
        q = TableQuotient(spec["mult"], spec["identity"], spec["gen_images"])
    else:
        q = _quotient_from_permutations(spec["degree"], spec["gens"], spec["base"])
    q.validate(threshold=threshold, seed=seed)
    return q


def cayley_distance(quotient: MarkedQuotient, x: int, y: int) -> int:
    """Word-metric distance between two elements of a marked quotient."""
    return quotient.cayley_distance(x, y)


def quotient_diameter(quotient: MarkedQuotient) -> int:
    return quotient.diameter()


# -- ambient elements -------------------------------------------------------


def ambient_identity(chain: "GroupChain"):
    family = chain.ambient.family
    if family == FREE:
        return ()
    if family == FREE_ABELIAN:
        return (0,) * chain.ambient.rank
    return chain.levels[-1].identity


def ambient_mult(chain: "GroupChain", g, h):
    family = chain.ambient.family
    if family == FREE:
        return reduce_word(tuple(g) + tuple(h))
    if family == FREE_ABELIAN:
        return tuple(a + b for a, b in zip(g, h))
    return chain.levels[-1].mult(g, h)


def ambient_inv(chain: "GroupChain", g):
    family = chain.ambient.family
    if family == FREE:
        return tuple(-letter for letter in reversed(g))
    if family == FREE_ABELIAN:
        return tuple(-a for a in g)
    return chain.levels[-1].inv(g)


def ambient_from_letters(chain: "GroupChain", word):
    """Ambient element spelled by signed letters."""
    family = chain.ambient.family
    if family == FREE:
        return reduce_word(word)
    if family == FREE_ABELIAN:
        vec = [0] * chain.ambient.rank
        for letter in word:
            vec[abs(letter) - 1] += 1 if letter > 0 else -1
        return tuple(vec)
    return chain.levels[-1].evaluate_word(word)


def ambient_word_length(chain: "GroupChain", g) -> int:
    """Word length of an ambient element.

    Closed form for free and free abelian families.  For a chain limit the
    element lives in the deepest level and the value must agree on the last
    two levels, otherwise the length has not stabilized.
    """
    family = chain.ambient.family
    if family == FREE:
        return len(reduce_word(g))
    if family == FREE_ABELIAN:
        if len(g) != chain.ambient.rank:
            raise ValueError(f"expected {chain.ambient.rank} coordinates, got {len(g)}")
        return sum(abs(int(c)) for c in g)
    values = [
        int(chain.levels[i].distance_from_identity()[project_to_level(chain, g, i)])
        for i in range(len(chain.levels))
    ]
    if len(values) < 2:
        raise NonStabilizedLengthError(
            f"single-level chain cannot certify a word length (deepest value {values[-1]})",
            last_values=tuple(values),
        )
    if values[-1] != values[-2]:
        raise NonStabilizedLengthError(
            f"word length did not stabilize: last two levels give {values[-2]} and {values[-1]}",
            last_values=(values[-2], values[-1]),
        )
    return values[-1]


def _abelian_sphere(rank: int, radius: int):
    """Integer vectors with L1 norm exactly ``radius``."""
    if radius == 0:
        yield (0,) * rank
        return
    for cut in itertools.combinations(range(radius + rank - 1), rank - 1):
        parts = []
        prev = -1
        for c in cut:
            parts.append(c - prev - 1)
            prev = c
        parts.append(radius + rank - 2 - prev)
        nonzero = [i for i, p in enumerate(parts) if p]
        for signs in itertools.product((1, -1), repeat=len(nonzero)):
            vec = list(parts)
            for i, s in zip(nonzero, signs):
                vec[i] *= s
            yield tuple(vec)


def ambient_sphere(chain: "GroupChain", radius: int) -> list:
    """All ambient elements of word length exactly ``radius`` (free families only)."""
    family = chain.ambient.family
    if family == FREE:
        rank = chain.ambient.rank
        letters = [l for k in range(1, rank + 1) for l in (k, -k)]
        sphere: list[tuple[int, ...]] = [()]
        for _ in range(radius):
            sphere = [w + (l,) for w in sphere for l in letters if not w or w[-1] != -l]
        return sphere
    if family == FREE_ABELIAN:
        return list(_abelian_sphere(chain.ambient.rank, radius))
    raise ValueError("sphere enumeration needs a free or free abelian ambient")


def project_to_level(chain: "GroupChain", g, level: int) -> int:
    """Image of an ambient element in the given level."""
    quotient = chain.levels[level]
    family = chain.ambient.family
    if family == FREE:
        return quotient.evaluate_word(g)
    if family == FREE_ABELIAN:
        x = quotient.identity
        for k, c in enumerate(g):
            img = quotient.gen_images[k] if c > 0 else quotient.inv(quotient.gen_images[k])
            for _ in range(abs(int(c))):
                x = quotient.mult(x, img)
        return x
    return int(chain.composed_map_to(level)[g])


# -- chains -----------------------------------------------------------------


@dataclass
class GroupChain:
    """Nested sequence of marked quotients of one ambient group.

    ``connecting_maps[i]`` sends level ``i+1`` onto level ``i`` and is stored
    as an index array.
    """

    ambient: AmbientGroup
    levels: list[MarkedQuotient]
    connecting_maps: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self._radius_cache: dict[int, int] = {}
        self._composed: dict[int, np.ndarray] = {}
        self.validation_note = (
            "radius growth checked on the available levels only; the chain is"
            " finite-scale evidence for an asymptotic property"
        )

    def level_count(self) -> int:
        return len(self.levels)

    def composed_map_to(self, level: int) -> np.ndarray:
        """Index array sending the deepest level onto ``level``."""
        if level not in self._composed:
            comp = np.arange(self.levels[-1].order)
            for i in range(len(self.levels) - 2, level - 1, -1):
                comp = self.connecting_maps[i][comp]
            self._composed[level] = comp
        return self._composed[level]

    def radius(self, level: int) -> int:
        if level not in self._radius_cache:
            self._radius_cache[level] = _compute_radius(self, level)
        return self._radius_cache[level]


def infer_connecting_map(upper: MarkedQuotient, lower: MarkedQuotient) -> np.ndarray:
    """Transport of breadth-first geodesic words from ``upper`` to ``lower``."""
    out = np.empty(upper.order, dtype=np.int64)
    for x in range(upper.order):
        out[x] = lower.evaluate_word(upper.canonical_word(x))
    return out


def _validate_connecting_map(
    phi: np.ndarray,
    upper: MarkedQuotient,
    lower: MarkedQuotient,
    index: int,
    threshold: int,
    seed: int,
) -> None:
    if phi.shape != (upper.order,):
        raise ChainValidationError(
            f"connecting map {index} has {phi.shape[0]} entries, expected {upper.order}"
        )
    if phi.min() < 0 or phi.max() >= lower.order:
        raise ChainValidationError(f"connecting map {index} has out-of-range values")
    if len(set(phi.tolist())) != lower.order:
        raise ChainValidationError(f"connecting map {index} is not surjective")
    for k, (gu, gl) in enumerate(zip(upper.gen_images, lower.gen_images)):
        if int(phi[gu]) != gl:
            raise ChainValidationError(
                f"connecting map {index} sends generator image {k} to"
                f" {int(phi[gu])}, expected {gl}"
            )
    if upper.order <= threshold:
        table = np.vstack([upper._mult_row(a) for a in range(upper.order)])
        lhs = phi[table]
        low_table = np.vstack([lower._mult_row(a) for a in range(lower.order)])
        rhs = low_table[phi[:, None], phi[None, :]]
        if not (lhs == rhs).all():
            a, b = map(int, np.argwhere(lhs != rhs)[0])
            raise ChainValidationError(
                f"connecting map {index} is not a homomorphism at ({a}, {b})"
            )
    else:
        rng = np.random.default_rng(seed)
        for a, b in rng.integers(0, upper.order, size=(_SAMPLE_TRIPLES // 2, 2)):
            a, b = int(a), int(b)
            if int(phi[upper.mult(a, b)]) != lower.mult(int(phi[a]), int(phi[b])):
                raise ChainValidationError(
                    f"connecting map {index} is not a homomorphism at ({a}, {b})"
                )


def build_chain(
    ambient: AmbientGroup,
    levels,
    connecting_maps=None,
    *,
    threshold: int = EXHAUSTIVE_THRESHOLD,
    seed: int = 0,
    check_radii: bool = True,
) -> GroupChain:
    """Assemble and validate a chain; connecting maps are inferred when omitted."""
    levels = list(levels)
    if not levels:
        raise ChainValidationError("a chain needs at least one level")
    for i, q in enumerate(levels):
        q.validate(threshold=threshold, seed=seed)
        if q.rank != ambient.rank:
            raise ChainValidationError(
                f"level {i} has {q.rank} generator images, ambient rank is {ambient.rank}"
            )
        if ambient.family == FREE_ABELIAN:
            for a, b in itertools.combinations(q.gen_images, 2):
                if q.mult(a, b) != q.mult(b, a):
                    raise ChainValidationError(
                        f"level {i}: generator images do not commute under an abelian ambient"
                    )
    for i in range(len(levels) - 1):
        if levels[i].order > levels[i + 1].order:
            raise ChainValidationError(
                f"orders decrease from level {i} ({levels[i].order})"
                f" to level {i + 1} ({levels[i + 1].order})"
            )
    if connecting_maps is None:
        maps = [
            infer_connecting_map(levels[i + 1], levels[i]) for i in range(len(levels) - 1)
        ]
    else:
        maps = [np.asarray(m, dtype=np.int64) for m in connecting_maps]
        if len(maps) != len(levels) - 1:
            raise ChainValidationError(
                f"expected {len(levels) - 1} connecting maps, got {len(maps)}"
            )
    for i, phi in enumerate(maps):
        _validate_connecting_map(phi, levels[i + 1], levels[i], i, threshold, seed)
    chain = GroupChain(ambient, levels, maps)
    if check_radii:
        radii = [chain.radius(i) for i in range(len(levels))]
        for i in range(len(radii) - 1):
            if radii[i] > radii[i + 1]:
                raise ChainValidationError(
                    f"isometry radii decrease from level {i} ({radii[i]})"
                    f" to level {i + 1} ({radii[i + 1]})"
                )
    return chain


# -- locality radius --------------------------------------------------------


def _compute_radius(chain: GroupChain, level: int) -> int:
    """Largest r such that the quotient map preserves all pairs closer than r.

    Equals 1 + the largest D at which every ambient pair at distance <= D
    keeps its distance in the quotient; by left-invariance only pairs at the
    identity are checked.  For a chain-limit ambient the value is certified
    only as far as word lengths have stabilized.
    """
    quotient = chain.levels[level]
    dist = quotient.distance_from_identity()
    family = chain.ambient.family
    if family in (FREE, FREE_ABELIAN):
        D = 0
        while True:
            D += 1
            for g in ambient_sphere(chain, D):
                if int(dist[project_to_level(chain, g, level)]) != D:
                    return D
    deepest = chain.levels[-1]
    lengths = deepest.distance_from_identity()
    if len(chain.levels) >= 2:
        prev = chain.levels[-2]
        prev_map = chain.connecting_maps[-1]
        stable = prev.distance_from_identity()[prev_map] == lengths
    else:
        stable = np.zeros(deepest.order, dtype=bool)
    stable = stable.copy()
    stable[deepest.identity] = True
    proj = chain.composed_map_to(level)
    max_len = int(lengths.max())
    D = 0
    while True:
        D += 1
        if ((~stable) & (lengths <= D)).any():
            return D
        for g in np.flatnonzero(stable & (lengths == D)):
            if int(dist[proj[g]]) != D:
                return D
        if D >= max_len:
            return D + 1


def r_isometric_radius(chain: GroupChain, level: int) -> int:
    """Largest r such that subsets of ambient diameter below r embed isometrically."""
    if not 0 <= level < len(chain.levels):
        raise ValueError(f"level {level} out of range")
    return chain.radius(level)


def select_level_for_r(chain: GroupChain, r: int, exclude_below: int = 0) -> int:
    """Smallest level index at least ``exclude_below`` whose radius reaches ``r``."""
    if r < 1:
        raise ValueError(f"locality radius must be positive, got {r}")
    best: int | None = None
    for i in range(exclude_below, len(chain.levels)):
        rad = chain.radius(i)
        best = rad if best is None else max(best, rad)
        if rad >= r:
            return i
    raise ChainExhaustedError(
        f"chain exhausted for r={r}: deepest achieved radius is {best}",
        deepest_radius=best,
    )
