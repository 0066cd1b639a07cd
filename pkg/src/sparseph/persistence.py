"""Persistence diagrams, rectangle counts, and the rank-based oracle.

The reduction is standard boundary-matrix column reduction over GF(2) with
columns stored as Python integer bitmasks and the clearing shortcut (degree
k+1 columns are reduced first; their pivot rows are known cycle creators).
Zero-persistence pairs (birth equal to death) are discarded.  Cycles still
alive at the truncation cutoff are right-censored: reported with death
+inf and flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gf2
from .cech import FilteredComplex

__all__ = [
    "Rectangle",
    "Diagram",
    "compute_diagram",
    "persistent_betti",
    "count_rectangle",
    "persistent_betti_oracle",
    "save_diagram_csv",
    "load_diagram_csv",
    "diagram_to_dict",
]


@dataclass(frozen=True)
class Rectangle:
    """Half-open birth/death window (birth_lo, birth_hi] x (death_lo, death_hi].

    left_closed widens the birth window to [0, birth_hi] (and requires
    birth_lo == 0).  death_hi may be inf; birth_hi must be finite.
    Coordinates are in diagram (scaled) units.
    """

    birth_lo: float
    birth_hi: float
    death_lo: float
    death_hi: float
    left_closed: bool = False

    def __post_init__(self):
        s, t, u, v = self.birth_lo, self.birth_hi, self.death_lo, self.death_hi
        if math.isnan(s) or math.isnan(t) or math.isnan(u) or math.isnan(v):
            raise ValueError("rectangle coordinates must not be NaN")
        if not (0 <= s <= t <= u <= v):
            raise ValueError(
                f"rectangle needs 0 <= birth_lo <= birth_hi <= death_lo <= death_hi, "
                f"got ({s}, {t}, {u}, {v})")
        if not math.isfinite(t):
            raise ValueError("birth_hi must be finite")
        if self.left_closed and s != 0:
            raise ValueError("left_closed rectangles must have birth_lo == 0")

    def contains(self, birth: float, death: float) -> bool:
        birth_ok = birth <= self.birth_hi if self.left_closed \
            else self.birth_lo < birth <= self.birth_hi
        return birth_ok and self.death_lo < death <= self.death_hi

    def max_finite_coordinate(self) -> float:
        return self.death_hi if math.isfinite(self.death_hi) else self.death_lo

    def to_dict(self) -> dict:
        return {"birth_lo": self.birth_lo, "birth_hi": self.birth_hi,
                "death_lo": self.death_lo, "death_hi": self.death_hi,
                "left_closed": self.left_closed}

    @staticmethod
    def from_dict(data: dict) -> "Rectangle":
        death_hi = data["death_hi"]
        if isinstance(death_hi, str):
            death_hi = float(death_hi)
        return Rectangle(
            birth_lo=float(data["birth_lo"]), birth_hi=float(data["birth_hi"]),
            death_lo=float(data["death_lo"]), death_hi=float(death_hi),
            left_closed=bool(data.get("left_closed", False)))


@dataclass(frozen=True)
class Diagram:
    """Degree-k persistence pairs in scaled units (filtration value / scale).

    cutoff is the truncation value in the same scaled units; censored says
    whether any pair has death beyond it (reported as inf).
    """

    k: int
    scale: float
    pairs: tuple[tuple[float, float], ...]
    censored: bool
    cutoff: float

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


def compute_diagram(fc: FilteredComplex, k: int, scale: float = 1.0) -> Diagram:
    """Degree-k persistence diagram of a truncated filtration.

    k must be at most fc.max_dim - 1: homology in degree k needs the
    (k+1)-skeleton to witness deaths.
    """
    if k < 0:
        raise ValueError(f"degree k must be >= 0, got {k}")
    if k > fc.max_dim - 1:
        raise ValueError(
            f"degree {k} needs simplices of dimension {k + 1}, "
            f"complex is truncated at dimension {fc.max_dim}")
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError(f"scale must be positive and finite, got {scale}")

    position = {verts: pos for pos, (verts, _) in enumerate(fc.simplices)}
    vals = [val for _, val in fc.simplices]

    # reduce degree k+1 first; pivot rows are cleared creators of degree k
    pivots: dict[int, int] = {}
    deaths: dict[int, int] = {}
    for j, (verts, _) in enumerate(fc.simplices):
        if len(verts) != k + 2:
            continue
        col = 0
        for drop in range(len(verts)):
            face = verts[:drop] + verts[drop + 1:]
            col ^= 1 << position[face]
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                deaths[low] = j
                break
            col ^= other

    infinite: list[int] = []
    if k == 0:
        for i, (verts, _) in enumerate(fc.simplices):
            if len(verts) == 1 and i not in deaths:
                infinite.append(i)
    else:
        kpivots: dict[int, int] = {}
        for i, (verts, _) in enumerate(fc.simplices):
            if len(verts) != k + 1 or i in deaths:
                continue
            col = 0
            for drop in range(len(verts)):
                face = verts[:drop] + verts[drop + 1:]
                col ^= 1 << position[face]
            while col:
                low = col.bit_length() - 1
                other = kpivots.get(low)
                if other is None:
                    kpivots[low] = col
                    break
                col ^= other
            if col == 0:
                infinite.append(i)

    pairs = []
    for i, j in deaths.items():
        birth, death = vals[i], vals[j]
        if birth < death:
            pairs.append((birth / scale, death / scale))
    for i in infinite:
        pairs.append((vals[i] / scale, math.inf))
    pairs.sort()
    return Diagram(
        k=k,
        scale=float(scale),
        pairs=tuple(pairs),
        censored=bool(infinite) and k >= 1,
        cutoff=fc.cutoff / scale,
    )


def persistent_betti(diag: Diagram, s: float, t: float) -> int:
    """Number of pairs with birth <= s and death > t.

    t == inf returns 0 (nothing outlives infinity).  Finite t beyond the
    diagram cutoff is rejected: censored deaths cannot be compared there.
    """
    if math.isnan(s) or math.isnan(t):
        raise ValueError("persistent Betti arguments must not be NaN")
    if not 0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    if math.isinf(t):
        return 0
    if t > diag.cutoff:
        raise ValueError(
            f"t={t} is beyond the diagram truncation ({diag.cutoff}); "
            "rebuild the filtration with a larger cutoff")
    return sum(1 for b, d in diag.pairs if b <= s and d > t)


def count_rectangle(diag: Diagram, rect: Rectangle) -> int:
    """Number of diagram points inside the rectangle.

    Censored pairs (death inf) land in windows with death_hi == inf.  A
    finite window reaching beyond the truncation cutoff cannot be counted
    faithfully and is rejected.
    """
    limit = rect.death_hi if math.isfinite(rect.death_hi) else rect.death_lo
    if limit > diag.cutoff:
        raise ValueError(
            f"rectangle reaches {limit}, beyond the diagram truncation ({diag.cutoff})")
    return sum(1 for b, d in diag.pairs if rect.contains(b, d))


def _boundary_matrix(cols: list[tuple[int, ...]], row_index: dict[tuple[int, ...], int],
                     n_rows: int) -> np.ndarray:
    M = np.zeros((n_rows, len(cols)), dtype=np.uint8)
    for j, verts in enumerate(cols):
        for drop in range(len(verts)):
            face = verts[:drop] + verts[drop + 1:]
            M[row_index[face], j] = 1
    return M


def persistent_betti_oracle(fc: FilteredComplex, k: int, s: float, t: float,
                            scale: float = 1.0) -> int:
    """Rank-based persistent Betti number, independent of the reduction.

    beta(s, t) = dim(Z_k(s) + B_k(t)) - dim B_k(t), computed from GF(2)
    ranks of boundary matrices and a kernel basis.  s, t are in scaled
    units; both must be within the truncation.
    """
    if not 0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    if k < 1 or k > fc.max_dim - 1:
        raise ValueError(f"degree {k} not covered by this complex")
    s_phys, t_phys = s * scale, t * scale
    if t_phys > fc.cutoff:
        raise ValueError(f"t={t} is beyond the truncation ({fc.cutoff / scale})")

    k_all = fc.by_dim(k)
    km1_all = fc.by_dim(k - 1)
    kp1_all = fc.by_dim(k + 1)
    k_s = [verts for verts, val in k_all if val <= s_phys]
    k_t = [verts for verts, val in k_all if val <= t_phys]
    km1_s = [verts for verts, val in km1_all if val <= s_phys]
    kp1_t = [verts for verts, val in kp1_all if val <= t_phys]

    # Z_k(s): kernel of the degree-k boundary restricted to value <= s
    row_s = {verts: i for i, verts in enumerate(km1_s)}
    bdry_k_s = _boundary_matrix(k_s, row_s, len(km1_s))
    kern = gf2.kernel_basis(bdry_k_s)              # (len(k_s), z)

    # everything embedded in C_k(t); k_s is a prefix of k_t in filtration order
    row_t = {verts: i for i, verts in enumerate(k_t)}
    bdry_kp1_t = _boundary_matrix(kp1_t, row_t, len(k_t))
    stacked = np.zeros((len(k_t), kern.shape[1] + len(kp1_t)), dtype=np.uint8)
    stacked[:len(k_s), :kern.shape[1]] = kern
    stacked[:, kern.shape[1]:] = bdry_kp1_t
    return gf2.rank(stacked) - gf2.rank(bdry_kp1_t)


def save_diagram_csv(diag: Diagram, path) -> None:
    """One row per pair: birth,death with 17 significant digits, inf literal."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(diagram_csv(diag))


def diagram_csv(diag: Diagram) -> str:
    lines = []
    for b, d in diag.pairs:
        dtxt = "inf" if math.isinf(d) else f"{d:.17g}"
        lines.append(f"{b:.17g},{dtxt}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_diagram_csv(path, k: int, scale: float, cutoff: float) -> Diagram:
    """Read pairs written by save_diagram_csv."""
    pairs = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 2:
                raise ValueError(f"line {lineno}: expected birth,death, got {line!r}")
            try:
                b = float(cells[0])
                d = math.inf if cells[1] == "inf" else float(cells[1])
            except ValueError:
                raise ValueError(f"line {lineno}: could not parse {line!r}")
            pairs.append((b, d))
    return Diagram(k=k, scale=scale, pairs=tuple(sorted(pairs)),
                   censored=any(math.isinf(d) for _, d in pairs), cutoff=cutoff)


def diagram_to_dict(diag: Diagram) -> dict:
    """JSON-ready representation (inf rendered as the string "inf")."""
    return {
        "k": diag.k,
        "scale": diag.scale,
        "cutoff": diag.cutoff,
        "censored": diag.censored,
        "pairs": [[b, ("inf" if math.isinf(d) else d)] for b, d in diag.pairs],
    }
