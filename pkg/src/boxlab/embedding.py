"""Finite embeddings of box spaces into l^p and their distortion controls.

A control pair is the sampled analogue of the usual pair of monotone
comparison functions: lower and upper envelopes indexed by realized
distances.  Divergence cannot be observed on a finite space, so verifiers
only report the attained range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boxspace import BoxPoint, BoxSpace, format_point
from .errors import ControlSampleError
from .lpspace import LpVector, lp_norm

__all__ = [
    "CoarseEmbeddingMap",
    "ControlPair",
    "CoarseReport",
    "PnormReport",
    "profile",
    "linf_embedding",
    "cycle_plane_embedding",
    "torus_coordinate_embedding",
    "identity_controls",
    "verify_coarse",
    "pnorm_power_check",
]


@dataclass
class CoarseEmbeddingMap:
    """Finite map from a box space into l^p, stored as a table."""

    domain: BoxSpace
    p: float
    dim: int
    table: dict[BoxPoint, np.ndarray]

    def __post_init__(self):
        self.p = float(self.p)
        self.table = {pt: np.asarray(v, dtype=np.float64) for pt, v in self.table.items()}
        pts = self.domain.points()
        missing = [pt for pt in pts if pt not in self.table]
        if missing:
            raise ValueError(f"table missing point {format_point(missing[0])}")
        for pt, v in self.table.items():
            if v.shape != (self.dim,):
                raise ValueError(
                    f"vector at {format_point(pt)} has shape {v.shape}, expected ({self.dim},)"
                )

    def __call__(self, point: BoxPoint) -> np.ndarray:
        return self.table[point]

    def vector(self, point: BoxPoint) -> LpVector:
        return LpVector(self.p, tuple(self.table[point]))

    def matrix(self) -> np.ndarray:
        return np.vstack([self.table[pt] for pt in self.domain.points()])


@dataclass
class ControlPair:
    """Monotone lower/upper envelopes sampled on realized distances."""

    rho_minus: dict[int, float]
    rho_plus: dict[int, float]

    def __post_init__(self):
        for name, sample in (("rho_minus", self.rho_minus), ("rho_plus", self.rho_plus)):
            ts = sorted(sample)
            vals = [sample[t] for t in ts]
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} samples are not nondecreasing")
        for t in set(self.rho_minus) & set(self.rho_plus):
            if self.rho_minus[t] > self.rho_plus[t]:
                raise ValueError(f"rho_minus exceeds rho_plus at t={t}")

    def realized_distances(self) -> list[int]:
        return sorted(set(self.rho_minus) | set(self.rho_plus))


def profile(f: CoarseEmbeddingMap) -> ControlPair:
    """Tightest monotone controls attained by ``f`` on its whole domain.

    Raw per-distance minima take a running minimum from the right and maxima
    a running maximum from the left, which is the optimal nondecreasing pair
    still sandwiching every realized pair.
    """
    pts = f.domain.points()
    if not pts:
        raise ValueError("empty domain")
    dist = f.domain.distance_matrix()
    mat = f.matrix()
    lo: dict[int, float] = {}
    hi: dict[int, float] = {}
    for i in range(len(pts)):
        diffs = mat[i + 1 :] - mat[i]
        if diffs.shape[0] == 0:
            continue
        norms = lp_norm(diffs, f.p, axis=1)
        for j, nrm in enumerate(norms, start=i + 1):
            t = int(dist[i, j])
            v = float(nrm)
            lo[t] = min(lo.get(t, v), v)
            hi[t] = max(hi.get(t, v), v)
    if not lo:
        raise ValueError("domain has a single point, no realized distances")
    ts = sorted(lo)
    for a, b in zip(reversed(ts[:-1]), reversed(ts[1:])):
        lo[a] = min(lo[a], lo[b])
    for a, b in zip(ts, ts[1:]):
        hi[b] = max(hi[b], hi[a])
    return ControlPair(lo, hi)


def linf_embedding(space: BoxSpace, basepoint: BoxPoint | None = None) -> CoarseEmbeddingMap:
    """Distance-difference embedding x -> (d(x, y) - d(x0, y))_y, isometric into l^inf."""
    pts = space.points()
    if basepoint is None:
        basepoint = space.identity_point(0)
    dist = space.distance_matrix()
    base_row = dist[space.point_index(basepoint)]
    table = {pt: dist[i] - base_row for i, pt in enumerate(pts)}
    return CoarseEmbeddingMap(space, math.inf, len(pts), table)


def cycle_plane_embedding(space: BoxSpace, p: float = 2.0) -> CoarseEmbeddingMap:
    """Each cyclic level mapped to the unit circle of the plane with the p-norm."""
    table = {}
    for i, q in enumerate(space.chain.levels):
        if not hasattr(q, "moduli") or len(q.moduli) != 1:
            raise ValueError(f"level {i} is not a rank-one cyclic quotient")
        m = q.moduli[0]
        for k in range(q.order):
            angle = 2.0 * math.pi * k / m
            table[BoxPoint(i, k)] = np.array([math.cos(angle), math.sin(angle)])
    return CoarseEmbeddingMap(space, p, 2, table)


def torus_coordinate_embedding(space: BoxSpace, p: float = 2.0) -> CoarseEmbeddingMap:
    """Each torus coordinate mapped to its own plane circle, concatenated."""
    ranks = set()
    for i, q in enumerate(space.chain.levels):
        if not hasattr(q, "moduli"):
            raise ValueError(f"level {i} is not a cyclic product quotient")
        ranks.add(len(q.moduli))
    if len(ranks) != 1:
        raise ValueError(f"levels mix coordinate counts {sorted(ranks)}")
    rank = ranks.pop()
    table = {}
    for i, q in enumerate(space.chain.levels):
        for x in range(q.order):
            coords = []
            for c, m in zip(q.decode(x), q.moduli):
                angle = 2.0 * math.pi * c / m
                coords.extend((math.cos(angle), math.sin(angle)))
            table[BoxPoint(i, x)] = np.array(coords)
    return CoarseEmbeddingMap(space, p, 2 * rank, table)


def identity_controls(distances) -> ControlPair:
    sample = {int(t): float(t) for t in distances}
    return ControlPair(dict(sample), dict(sample))


@dataclass
class CoarseReport:
    """Outcome of a sandwich check, with witnesses for every violated pair."""

    passed: bool
    tolerance: float
    pair_count: int
    witnesses: list[tuple[BoxPoint, BoxPoint, int, float, float, float]] = field(
        default_factory=list
    )
    divergence_note: str = ""

    def to_text(self) -> str:
        lines = [f"coarse sandwich: {'PASS' if self.passed else 'FAIL'}"]
        lines.append(f"pairs checked: {self.pair_count}, tolerance {self.tolerance:g}")
        for x, y, t, nrm, lo, hi in self.witnesses:
            lines.append(
                f"  violated at ({format_point(x)}, {format_point(y)}):"
                f" d={t}, norm={nrm:.12g}, bounds [{lo:.12g}, {hi:.12g}]"
            )
        if self.divergence_note:
            lines.append(self.divergence_note)
        return "\n".join(lines)


def _control_value(sample, t: int, which: str) -> float:
    try:
        return float(sample[t])
    except KeyError:
        raise ControlSampleError(f"{which} sample missing realized distance {t}") from None


def verify_coarse(
    f: CoarseEmbeddingMap,
    rho_minus,
    rho_plus,
    tolerance: float = 1e-9,
) -> CoarseReport:
    """Check rho_minus(d(x,y)) <= |f(x)-f(y)| <= rho_plus(d(x,y)) on all pairs.

    The controls are mappings from realized distances to values and must be
    nondecreasing there.  Divergence is reported only as the attained range.
    """
    for name, sample in (("rho_minus", rho_minus), ("rho_plus", rho_plus)):
        ts = sorted(sample)
        vals = [sample[t] for t in ts]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"{name} samples are not nondecreasing")
    pts = f.domain.points()
    dist = f.domain.distance_matrix()
    mat = f.matrix()
    witnesses = []
    pair_count = 0
    max_t = 0
    for i in range(len(pts)):
        for j in range(i, len(pts)):
            t = int(dist[i, j])
            nrm = float(lp_norm(mat[j] - mat[i], f.p))
            lo = _control_value(rho_minus, t, "rho_minus")
            hi = _control_value(rho_plus, t, "rho_plus")
            pair_count += 1
            max_t = max(max_t, t)
            if nrm < lo - tolerance or nrm > hi + tolerance:
                witnesses.append((pts[i], pts[j], t, nrm, lo, hi))
    lo_at_max = float(rho_minus[max_t]) if max_t in rho_minus else float("nan")
    note = (
        f"finite-range divergence surrogate: rho_minus reaches {lo_at_max:.12g} at the"
        f" largest realized distance {max_t}; divergence itself is not observable"
        " on a finite space"
    )
    return CoarseReport(
        passed=not witnesses,
        tolerance=tolerance,
        pair_count=pair_count,
        witnesses=witnesses,
        divergence_note=note,
    )


@dataclass
class PnormReport:
    """Cube/annulus combination bound for block p-norms."""

    block_count: int
    p: float
    scale: float
    combined_norm: float
    lower: float
    upper: float
    precondition_ok: bool
    passed: bool

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = "" if self.precondition_ok else " (precondition violated, bound vacuous)"
        return (
            f"p-norm combination: {status}{extra}\n"
            f"blocks n={self.block_count}, p={self.p:g}, scale c=n^(1/p)={self.scale:.12g}\n"
            f"achieved N={self.combined_norm:.12g}, required range"
            f" [{self.lower:.12g}, {self.upper:.12g}]"
        )


def pnorm_power_check(
    n: int,
    p,
    block_norms,
    lower: float,
    upper: float,
    tolerance: float = 1e-9,
) -> PnormReport:
    """Verify c*lower <= N <= c*upper with c = n^(1/p) for block norms in [lower, upper]."""
    p = float(p)
    norms = [float(b) for b in block_norms]
    if n < 1 or len(norms) != n:
        raise ValueError(f"expected {n} block norms, got {len(norms)}")
    if not 0 <= lower <= upper:
        raise ValueError(f"need 0 <= lower <= upper, got [{lower}, {upper}]")
    scale = 1.0 if math.isinf(p) else n ** (1.0 / p)
    combined = float(lp_norm(norms, p))
    precondition = all(lower - tolerance <= b <= upper + tolerance for b in norms)
    sandwich = scale * lower - tolerance <= combined <= scale * upper + tolerance
    return PnormReport(
        block_count=n,
        p=p,
        scale=scale,
        combined_norm=combined,
        lower=scale * lower,
        upper=scale * upper,
        precondition_ok=precondition,
        passed=sandwich if precondition else True,
    )
