"""Averaged and scale-local cocycles built over finite quotients.

Block values are stored raw, one block per element of the carrier quotient;
the averaging normalization (order to the power -1/p) enters only when norms
are taken.  The defining identity b(xy) = sigma(x) b(y) + b(x) is linear, so
raw blocks verify it exactly whenever the input data is integer-valued.

Scale-local objects store values and representation images only for elements
shorter than the scale; everything outside is zero with identity action, by
convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boxspace import BoxPoint
from .errors import ActionCheckError
from .fibration import FibredEmbedding
from .groups import (
    GroupChain,
    MarkedQuotient,
    ambient_word_length,
    project_to_level,
    select_level_for_r,
)
from .lpspace import SignedPermutation, _linear_close, lp_norm

__all__ = [
    "QuotientCarrier",
    "BlockMap",
    "LocalRepresentation",
    "LocalCocycle",
    "LiftedCocycle",
    "CocycleFamily",
    "CocycleReport",
    "UltraReport",
    "averaged_cocycle",
    "local_cocycle_from_fce",
    "lift_to_group",
    "verify_local_action",
    "family_from_fce",
    "ultraproduct_hypothesis_check",
]


@dataclass
class QuotientCarrier:
    """Block index set: the elements of one finite quotient."""

    quotient: MarkedQuotient

    @property
    def size(self) -> int:
        return self.quotient.order

    def right_translation(self, x: int) -> np.ndarray:
        """tau with tau[z] = z * x."""
        q = self.quotient
        return np.array([q.mult(z, x) for z in q.elements()], dtype=np.int64)


class BlockMap:
    """Linear isometry permuting blocks: (A xi)_z = maps[z](xi[tau[z]]).

    ``maps`` is None when every per-block map is the identity, which keeps the
    common permutation-only case cheap.
    """

    __slots__ = ("tau", "maps")

    def __init__(self, tau, maps=None):
        self.tau = np.asarray(tau, dtype=np.int64)
        if self.tau.ndim != 1:
            raise ValueError("tau must be one-dimensional")
        if maps is not None and len(maps) != len(self.tau):
            raise ValueError(f"{len(maps)} maps for {len(self.tau)} blocks")
        self.maps = list(maps) if maps is not None else None

    @property
    def size(self) -> int:
        return len(self.tau)

    def apply(self, blocks: np.ndarray) -> np.ndarray:
        blocks = np.asarray(blocks, dtype=np.float64)
        if blocks.shape[0] != self.size:
            raise ValueError(f"expected {self.size} blocks, got {blocks.shape[0]}")
        moved = blocks[self.tau]
        if self.maps is None:
            return moved
        return np.stack(
            [row if m is None else m.apply(row) for m, row in zip(self.maps, moved)]
        )

    def compose(self, other: "BlockMap") -> "BlockMap":
        """self after other."""
        if self.size != other.size:
            raise ValueError("block counts differ")
        tau = other.tau[self.tau]
        if self.maps is None and other.maps is None:
            return BlockMap(tau)
        maps = []
        for z in range(self.size):
            a = self.maps[z] if self.maps is not None else None
            b = other.maps[int(self.tau[z])] if other.maps is not None else None
            if a is None:
                maps.append(b)
            elif b is None:
                maps.append(a)
            else:
                maps.append(a.compose(b))
        return BlockMap(tau, maps)

    def equals(self, other: "BlockMap", tol: float = 1e-9) -> bool:
        if self.size != other.size or not np.array_equal(self.tau, other.tau):
            return False
        if self.maps is None and other.maps is None:
            return True
        for z in range(self.size):
            a = self.maps[z] if self.maps is not None else None
            b = other.maps[z] if other.maps is not None else None
            if a is None:
                a = SignedPermutation.identity(b.dim)
            if b is None:
                b = SignedPermutation.identity(a.dim)
            if not _linear_close(a, b, tol):
                return False
        return True

    def __repr__(self) -> str:
        kind = "permutation" if self.maps is None else "twisted"
        return f"BlockMap({kind}, size={self.size})"


def _identity_block_map(size: int) -> BlockMap:
    return BlockMap(np.arange(size))


@dataclass
class LocalRepresentation:
    """Scale-local linear action by block maps on the combined block space.

    ``images`` holds one BlockMap per element shorter than the scale; every
    other element acts as the identity.  ``r`` of None means globally defined.
    """

    carrier: QuotientCarrier
    p: float
    dim: int
    r: int | None
    images: dict[int, BlockMap]

    def image(self, x: int) -> BlockMap:
        stored = self.images.get(x)
        if stored is not None:
            return stored
        return _identity_block_map(self.carrier.size)

    def live(self, x: int) -> bool:
        if self.r is None:
            return True
        return int(self.carrier.quotient.distance_from_identity()[x]) < self.r


@dataclass
class LocalCocycle:
    """Cocycle on a finite quotient with block values over the same quotient.

    ``values`` holds raw blocks for the live elements only (length below the
    scale); outside them the value is zero and the companion acts trivially.
    """

    carrier: QuotientCarrier
    p: float
    dim: int
    r: int | None
    values: dict[int, np.ndarray]
    companion: LocalRepresentation
    label: str = ""

    def __post_init__(self):
        self.p = float(self.p)
        size = self.carrier.size
        for x, v in self.values.items():
            if v.shape != (size, self.dim):
                raise ValueError(f"value at {x} has shape {v.shape}")

    @property
    def normalization(self) -> float:
        if math.isinf(self.p):
            return 1.0
        return self.carrier.size ** (-1.0 / self.p)

    def value(self, x: int) -> np.ndarray:
        """Raw, unscaled blocks; zero outside the live scale."""
        stored = self.values.get(x)
        if stored is not None:
            return stored
        return np.zeros((self.carrier.size, self.dim))

    def normalized_value(self, x: int) -> np.ndarray:
        return self.normalization * self.value(x)

    def norm(self, x: int) -> float:
        return self.normalization * float(lp_norm(self.value(x).ravel(), self.p))

    def live(self, x: int) -> bool:
        if self.r is None:
            return True
        return int(self.carrier.quotient.distance_from_identity()[x]) < self.r


def averaged_cocycle(f, quotient: MarkedQuotient, p):
    """Average a map on the quotient into a cocycle for right translation.

    Block z of the value at x is f(zx) - f(z); the companion representation
    shifts blocks by right multiplication.  Works for any map into l^p: the
    identity holds by telescoping, and coarse controls on f become norm
    controls on the cocycle because d(z, zx) is the length of x for every z.

    Returns the (representation, cocycle) pair.
    """
    if isinstance(f, dict):
        F = np.stack(
            [np.atleast_1d(np.asarray(f[x], dtype=np.float64)) for x in quotient.elements()]
        )
    else:
        F = np.asarray(f, dtype=np.float64)
        if F.ndim == 1:
            F = F[:, None]
    if F.shape[0] != quotient.order:
        raise ValueError(f"map table has {F.shape[0]} rows for order {quotient.order}")
    carrier = QuotientCarrier(quotient)
    values = {}
    images = {}
    for x in quotient.elements():
        tau = carrier.right_translation(x)
        values[x] = F[tau] - F
        images[x] = BlockMap(tau)
    rep = LocalRepresentation(carrier=carrier, p=float(p), dim=F.shape[1], r=None, images=images)
    coc = LocalCocycle(
        carrier=carrier,
        p=float(p),
        dim=F.shape[1],
        r=None,
        values=values,
        companion=rep,
        label="averaged",
    )
    return rep, coc


def local_cocycle_from_fce(
    fib: FibredEmbedding,
    r: int,
    level: int | None = None,
    check_transitions: bool = True,
) -> LocalCocycle:
    """Localize a fibred embedding to a cocycle at scale ``r``.

    The carrier is the first level whose isometry radius is at least 2r, so
    that every ball of radius r-1 is served by the trivialization oracle.
    Block z of the value at a live x compares the trivialized section at z
    and zx inside the ball around z; the companion shifts blocks and twists
    each by the linear part of the transition between the two overlapping
    balls.  Transitions are re-derived from the oracle and, unless disabled,
    checked for constancy on the full ball overlaps.
    """
    if r < 1:
        raise ValueError(f"scale must be >= 1, got {r}")
    chain = fib.space.chain
    if level is None:
        level = select_level_for_r(chain, 2 * r)
    elif chain.radius(level) < 2 * r:
        raise ValueError(
            f"level {level} has isometry radius {chain.radius(level)},"
            f" below the required {2 * r}"
        )
    q = chain.levels[level]
    carrier = QuotientCarrier(q)
    length = q.distance_from_identity()

    balls = []
    trivs = []
    for z in q.elements():
        ball = tuple(
            BoxPoint(level, w) for w in q.elements() if q.cayley_distance(z, w) <= r - 1
        )
        balls.append(frozenset(ball))
        trivs.append(fib.trivialize(ball, r))

    section = {pt: fib.section_vector(pt) for triv in trivs for pt in triv}
    values = {}
    images = {}
    size = q.order
    for x in q.elements():
        if length[x] >= r:
            continue
        tau = carrier.right_translation(x)
        blocks = np.empty((size, fib.dim))
        maps = []
        for z in q.elements():
            zx = int(tau[z])
            zpt, zxpt = BoxPoint(level, z), BoxPoint(level, zx)
            blocks[z] = trivs[z][zpt].apply(section[zpt]) - trivs[z][zxpt].apply(
                section[zxpt]
            )
            transition = trivs[z][zxpt].compose(trivs[zx][zxpt].inverse())
            if check_transitions:
                for w in balls[z] & balls[zx]:
                    cand = trivs[z][w].compose(trivs[zx][w].inverse())
                    if not cand.close_to(transition, 1e-9):
                        raise ActionCheckError(
                            "transition between overlapping balls is not constant;"
                            f" the input is not fibred at scale {r} (blocks {z}, {zx})"
                        )
            maps.append(transition.linear)
        values[x] = blocks
        images[x] = BlockMap(tau, maps)
    rep = LocalRepresentation(carrier=carrier, p=fib.p, dim=fib.dim, r=r, images=images)
    return LocalCocycle(
        carrier=carrier,
        p=fib.p,
        dim=fib.dim,
        r=r,
        values=values,
        companion=rep,
        label=f"local scale {r} on level {level}",
    )


@dataclass
class LiftedCocycle:
    """Pullback of a quotient cocycle to the ambient group.

    Defined by composition with the projection on elements shorter than the
    scale, zero with identity action outside.
    """

    chain: GroupChain
    level: int
    base: LocalCocycle
    r: int

    @property
    def p(self) -> float:
        return self.base.p

    def value(self, g) -> np.ndarray:
        if ambient_word_length(self.chain, g) >= self.r:
            return np.zeros((self.base.carrier.size, self.base.dim))
        return self.base.value(project_to_level(self.chain, g, self.level))

    def sigma(self, g) -> BlockMap:
        if ambient_word_length(self.chain, g) >= self.r:
            return _identity_block_map(self.base.carrier.size)
        return self.base.companion.image(project_to_level(self.chain, g, self.level))

    def norm(self, g) -> float:
        return self.base.normalization * float(lp_norm(self.value(g).ravel(), self.base.p))


def lift_to_group(coc: LocalCocycle, chain: GroupChain, r: int | None = None) -> LiftedCocycle:
    """Lift along the projection onto the cocycle's carrier level.

    Needs the scale to stay within the level's isometry radius, so that
    length comparisons against the scale agree upstairs and downstairs.
    """
    if coc.r is None:
        raise ValueError("only scale-local cocycles lift; the scale bounds the support")
    if r is None:
        r = coc.r
    if r > coc.r:
        raise ValueError(f"lift scale {r} exceeds the cocycle scale {coc.r}")
    level = next(
        (i for i, q in enumerate(chain.levels) if q is coc.carrier.quotient), None
    )
    if level is None:
        raise ValueError("cocycle carrier is not a level of the given chain")
    if r > chain.radius(level):
        raise ValueError(
            f"scale {r} exceeds the isometry radius {chain.radius(level)} of level {level}"
        )
    return LiftedCocycle(chain=chain, level=level, base=coc, r=int(r))


@dataclass
class CocycleReport:
    """Identity and representation checks on one cocycle."""

    passed: bool
    mode: str
    tolerance: float
    identity_checked: int
    representation_checked: int
    identity_witnesses: list = field(default_factory=list)
    representation_witnesses: list = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"cocycle check: {'PASS' if self.passed else 'FAIL'} (mode={self.mode})",
            f"identity b(xy) = sigma(x)b(y) + b(x): {self.identity_checked} pairs,"
            f" {len(self.identity_witnesses)} violations",
            f"representation sigma(x)sigma(y) = sigma(xy): {self.representation_checked}"
            f" pairs, {len(self.representation_witnesses)} violations",
        ]
        for x, y, dev in self.identity_witnesses:
            lines.append(f"  identity fails at ({x}, {y}), max deviation {dev:.12g}")
        for x, y in self.representation_witnesses:
            lines.append(f"  representation fails at ({x}, {y})")
        lines.extend(self.notes)
        return "\n".join(lines)


def verify_local_action(
    rep: LocalRepresentation,
    coc: LocalCocycle,
    pairs=None,
    mode: str = "atol",
    tolerance: float = 1e-9,
    max_pairs: int = 20000,
    seed: int = 0,
) -> CocycleReport:
    """Check the cocycle identity and multiplicativity of the action on live pairs.

    A pair (x, y) is live when x, y and xy are all inside the scale; for a
    global cocycle every pair is live.  Raw blocks are compared, either
    exactly (integer data) or within an absolute tolerance.
    """
    if mode not in ("exact", "atol"):
        raise ValueError(f"unknown mode {mode!r}")
    if rep.carrier is not coc.carrier or rep.r != coc.r or rep.p != coc.p:
        raise ValueError("representation and cocycle do not share carrier, scale and p")
    q = coc.carrier.quotient
    notes = []
    if pairs is None:
        pairs = [
            (x, y)
            for x in q.elements()
            for y in q.elements()
            if coc.live(x) and coc.live(y) and coc.live(q.mult(x, y))
        ]
        if len(pairs) > max_pairs:
            rng = np.random.default_rng(seed)
            idx = rng.choice(len(pairs), size=max_pairs, replace=False)
            pairs = [pairs[i] for i in idx]
            notes.append(f"sampled {max_pairs} live pairs (seed {seed})")
    identity_witnesses = []
    representation_witnesses = []
    checked = 0
    for x, y in pairs:
        xy = q.mult(x, y)
        lhs = coc.value(xy)
        rhs = rep.image(x).apply(coc.value(y)) + coc.value(x)
        checked += 1
        if mode == "exact":
            ok = np.array_equal(lhs, rhs)
        else:
            ok = np.allclose(lhs, rhs, rtol=0.0, atol=tolerance)
        if not ok:
            identity_witnesses.append((x, y, float(np.max(np.abs(lhs - rhs)))))
        if not rep.image(x).compose(rep.image(y)).equals(rep.image(xy), tolerance):
            representation_witnesses.append((x, y))
    return CocycleReport(
        passed=not identity_witnesses and not representation_witnesses,
        mode=mode,
        tolerance=tolerance,
        identity_checked=checked,
        representation_checked=checked,
        identity_witnesses=identity_witnesses,
        representation_witnesses=representation_witnesses,
        notes=notes,
    )


@dataclass
class CocycleFamily:
    """Lifted cocycles indexed by scale, over one chain."""

    chain: GroupChain
    members: dict[int, LiftedCocycle]

    def scales(self) -> list[int]:
        return sorted(self.members)

    def norms(self, g) -> dict[int, float]:
        return {r: self.members[r].norm(g) for r in self.scales()}


def family_from_fce(fib: FibredEmbedding, scales) -> CocycleFamily:
    """One lifted cocycle per scale, each on the shallowest feasible level."""
    chain = fib.space.chain
    members = {}
    for r in scales:
        level = select_level_for_r(chain, 2 * int(r))
        local = local_cocycle_from_fce(fib, int(r), level)
        members[int(r)] = lift_to_group(local, chain)
    return CocycleFamily(chain=chain, members=members)


@dataclass
class UltraReport:
    """Norm behaviour of a cocycle family across scales, element by element.

    The family plays the role of a sequence approaching a limit object; the
    verdicts here are finite-scale evidence for that reading, not a proof.
    """

    passed: bool
    tolerance: float
    rows: list  # (g, |g|, {r: norm}, upper_ok, lower_ok, constant_live)

    def to_text(self) -> str:
        lines = [f"cocycle family norms: {'PASS' if self.passed else 'FAIL'}"]
        for g, n, seq, upper_ok, lower_ok, const in self.rows:
            series = ", ".join(f"r={r}: {v:.12g}" for r, v in sorted(seq.items()))
            verdict = []
            if not upper_ok:
                verdict.append("upper bound violated")
            if not lower_ok:
                verdict.append("lower bound violated at live scales")
            verdict.append("constant on live scales" if const else "varies on live scales")
            lines.append(f"  g={g} (length {n}): {series} [{'; '.join(verdict)}]")
        lines.append(
            "finite-scale evidence only: bounds checked on the available scales,"
            " not in any limit"
        )
        return "\n".join(lines)


def ultraproduct_hypothesis_check(
    family: CocycleFamily,
    elements,
    rho_minus,
    rho_plus,
    tolerance: float = 1e-9,
) -> UltraReport:
    """Check family norms against controls: upper at every scale, lower at live ones.

    A scale is live for g when it exceeds the length of g; below that the
    lift vanishes by construction and only the upper bound is meaningful.
    """
    rows = []
    passed = True
    for g in elements:
        n = ambient_word_length(family.chain, g)
        seq = family.norms(g)
        lo = float(rho_minus[n])
        hi = float(rho_plus[n])
        upper_ok = all(v <= hi + tolerance for v in seq.values())
        live = {r: v for r, v in seq.items() if r > n}
        lower_ok = all(v >= lo - tolerance for v in live.values())
        const = not live or max(live.values()) - min(live.values()) <= tolerance
        passed = passed and upper_ok and lower_ok
        rows.append((tuple(g), n, seq, upper_ok, lower_ok, const))
    return UltraReport(passed=passed, tolerance=tolerance, rows=rows)
