"""Signed intersection matrices of flat pairs under a windowed group action.

For each pair (A_i, B_j) the translates γ·A_i with γ in the congruence window
that cross B_j transversally are collected, duplicates under the stabilizer of
B_j are removed, and the signs are summed.  An upper triangular matrix with
nonzero, sign-consistent diagonal certifies that the n cycles are independent
as far as the window can see.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import DimensionMismatch, SharedEndpoint
from .flats import ConfigSpec, Flat, flats_intersect, float_act, float_tau, translate_flat
from .moebius import INF
from .quaternion import GroupSpec, QuatElem, congruence_window

VERDICT_CERTIFIED = "RankAtLeastN"
VERDICT_INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class TranslateRecord:
    gamma: QuatElem
    flat: Flat
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("only meeting translates are recorded")

    def to_json(self) -> dict:
        return {"gamma": self.gamma.to_json(), "sign": self.sign, "flat": self.flat.to_json()}


# ---------------------------------------------------------------------------
# float screening; every accepted candidate is re-decided exactly


_MARGIN = 1e-7


def _float_endpoints(flat: Flat) -> list[tuple[float, float]]:
    return [(math.inf if g.start is INF else float(g.start), math.inf if g.end is INF else float(g.end)) for g in flat.coords]


def _clearly_unlinked(p: tuple[float, float], q: tuple[float, float]) -> bool:
    """True only when floats separate the four points with room to spare and the
    pairs do not interleave."""
    pts = [p[0], p[1], q[0], q[1]]
    if any(math.isinf(x) or abs(x) > 1e9 for x in pts):
        return False
    scale = 1.0 + max(abs(x) for x in pts)
    srt = sorted(pts)
    if any(b - a < _MARGIN * scale for a, b in zip(srt, srt[1:])):
        return False
    lo, hi = min(p), max(p)
    inside = [lo < x < hi for x in q]
    return inside[0] == inside[1]


def _screen_translate(gamma: QuatElem, fa, fb) -> bool:
    """False when floats show that γ·A misses B in some factor."""
    for e, pa, pb in zip(gamma.algebra.split_embeddings, fa, fb):
        m = float_tau(gamma, e)
        img = (float_act(m, pa[0]), float_act(m, pa[1]))
        if _clearly_unlinked(img, pb):
            return False
    return True


def _maybe_same(gamma: QuatElem, flat_a, flat_b) -> bool:
    """Float screen for γ·flat_a = flat_b as sets."""
    for e, pa, pb in zip(gamma.algebra.split_embeddings, flat_a, flat_b):
        m = float_tau(gamma, e)
        img = (float_act(m, pa[0]), float_act(m, pa[1]))
        if not (_close_pair(img, pb) or _close_pair(img, (pb[1], pb[0]))):
            return False
    return True


def _close_pair(x, y) -> bool:
    return all(_close(a, b) for a, b in zip(x, y))


def _close(a: float, b: float) -> bool:
    if math.isinf(b) or abs(b) > 1e9:
        return math.isinf(a) or abs(a) > 1e6
    if math.isinf(a):
        return False
    return abs(a - b) <= 1e-6 * (1.0 + abs(b))


# ---------------------------------------------------------------------------
# orbit enumeration


def stabilizer_in_window(B: Flat, g: GroupSpec, window: list[QuatElem] | None = None) -> list[QuatElem]:
    """Window elements that map B onto itself (orientation ignored), in enumeration order."""
    window = congruence_window(g) if window is None else window
    fb = _float_endpoints(B)
    out = []
    for delta in window:
        if _maybe_same(delta, fb, fb) and translate_flat(B, delta).same_set(B):
            out.append(delta)
    return out


@dataclass
class OrbitScan:
    records: list[TranslateRecord]
    raw_count: int
    asymptotic: int
    stabilizer_size: int


def scan_translates(A: Flat, B: Flat, g: GroupSpec, window: list[QuatElem] | None = None,
                    stabilizer: list[QuatElem] | None = None) -> OrbitScan:
    """orbit_translates with bookkeeping about what was skipped."""
    if A.r != B.r:
        raise DimensionMismatch(f"flats of dimension {A.r} and {B.r}")
    window = congruence_window(g) if window is None else window
    stab = stabilizer_in_window(B, g, window) if stabilizer is None else stabilizer
    fa, fb = _float_endpoints(A), _float_endpoints(B)
    meeting = []
    asymptotic = 0
    # the identity goes first so that an untranslated crossing is the retained representative
    ordered = sorted(window, key=lambda x: 0 if _is_one(x) else 1)
    for gamma in ordered:
        if not _screen_translate(gamma, fa, fb):
            continue
        moved = translate_flat(A, gamma)
        try:
            s = flats_intersect(moved, B)
        except SharedEndpoint:
            asymptotic += 1
            continue
        if s:
            meeting.append(TranslateRecord(gamma, moved, s))
    kept: list[TranslateRecord] = []
    for rec in meeting:
        if not any(equivalent_translates(rec.flat, k.flat, stab) for k in kept):
            kept.append(rec)
    return OrbitScan(kept, len(meeting), asymptotic, len(stab))


def _is_one(x: QuatElem) -> bool:
    c = x.coords
    return c[0] == 1 and all(v.is_zero() for v in c[1:])


def equivalent_translates(f1: Flat, f2: Flat, stabilizer: list[QuatElem]) -> bool:
    """Whether δ·f1 = f2 as sets for some δ in the given stabilizer list (or δ = 1)."""
    if f1.same_set(f2):
        return True
    p1, p2 = _float_endpoints(f1), _float_endpoints(f2)
    for delta in stabilizer:
        if _maybe_same(delta, p1, p2) and translate_flat(f1, delta).same_set(f2):
            return True
    return False


def orbit_translates(A: Flat, B: Flat, g: GroupSpec) -> list[TranslateRecord]:
    """Translates γ·A (γ in the congruence window) crossing B, one per stabilizer class."""
    return scan_translates(A, B, g).records


def signed_count(records: list[TranslateRecord]) -> tuple[int, bool]:
    signs = [r.sign for r in records]
    return sum(signs), len(set(signs)) <= 1


# ---------------------------------------------------------------------------
# matrices and certificates


@dataclass
class IntersectionMatrix:
    n: int
    entries: list[list[int]]
    witnesses: list[list[list[TranslateRecord]]]
    sign_consistent: list[list[bool]]
    raw_counts: list[list[int]] = field(default_factory=list)
    asymptotic: list[list[int]] = field(default_factory=list)

    def is_upper_triangular(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.n) for j in range(i))

    def diagonal_nonzero(self) -> bool:
        return all(self.entries[i][i] != 0 for i in range(self.n))

    def all_consistent(self) -> bool:
        return all(all(row) for row in self.sign_consistent)

    def support(self) -> list[list[bool]]:
        return [[v != 0 for v in row] for row in self.entries]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + [f"B{j + 1}" for j in range(self.n)])
        for i, row in enumerate(self.entries):
            w.writerow([f"A{i + 1}"] + row)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "entries": self.entries,
            "sign_consistent": self.sign_consistent,
            "witness_counts": [[len(w) for w in row] for row in self.witnesses],
            "witnesses": [[[r.gamma.to_json() for r in w] for w in row] for row in self.witnesses],
        }


def intersection_matrix(c: ConfigSpec, g: GroupSpec) -> IntersectionMatrix:
    window = congruence_window(g)
    stabs = [stabilizer_in_window(B, g, window) for B in c.B]
    n = c.n
    entries = [[0] * n for _ in range(n)]
    witnesses = [[[] for _ in range(n)] for _ in range(n)]
    consistent = [[True] * n for _ in range(n)]
    raw = [[0] * n for _ in range(n)]
    asym = [[0] * n for _ in range(n)]
    for i, A in enumerate(c.A):
        for j, B in enumerate(c.B):
            scan = scan_translates(A, B, g, window, stabs[j])
            entries[i][j], consistent[i][j] = signed_count(scan.records)
            witnesses[i][j] = scan.records
            raw[i][j] = scan.raw_count
            asym[i][j] = scan.asymptotic
    return IntersectionMatrix(n, entries, witnesses, consistent, raw, asym)


@dataclass
class Certificate:
    verdict: str
    matrix: IntersectionMatrix
    params: dict
    caveats: list[str]

    @property
    def n(self) -> int:
        return self.matrix.n

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "n": self.n,
            "matrix": self.matrix.entries,
            "sign_consistent": self.matrix.sign_consistent,
            "witness_counts": [[len(w) for w in row] for row in self.matrix.witnesses],
            "witnesses": [[[{"gamma": r.gamma.to_json(), "sign": r.sign} for r in w] for w in row]
                          for row in self.matrix.witnesses],
            "params": self.params,
            "caveats": self.caveats,
        }


def certify(c: ConfigSpec, g: GroupSpec, provenance: dict | None = None) -> Certificate:
    """Assemble the matrix and decide whether it proves rank ≥ n inside the window."""
    m = intersection_matrix(c, g)
    caveats = [
        f"orbit enumeration is bounded by height {g.height} at level {g.level}; "
        "translates outside the window are not seen"
    ]
    for i in range(m.n):
        for j in range(m.n):
            if not m.sign_consistent[i][j]:
                caveats.append(f"entry ({i + 1},{j + 1}) mixes crossing signs; increase congruence level m")
    for i in range(m.n):
        for j in range(i):
            if m.entries[i][j]:
                caveats.append(f"entry ({i + 1},{j + 1}) below the diagonal is nonzero")
        if not m.entries[i][i]:
            caveats.append(f"diagonal entry ({i + 1},{i + 1}) vanishes")
    skipped = sum(map(sum, m.asymptotic))
    if skipped:
        caveats.append(f"{skipped} translates share a boundary point with a B-flat and were not counted")
    if any(f.provenance is None for f in c.A + c.B):
        caveats.append("some flats carry no stabilizing element; their compactness is not witnessed")
    ok = m.is_upper_triangular() and m.diagonal_nonzero() and m.all_consistent()
    params = {"group": g.to_json(), "n": c.n, "r": c.r}
    if provenance:
        params.update(provenance)
    return Certificate(VERDICT_CERTIFIED if ok else VERDICT_INCONCLUSIVE, m, params, caveats)
