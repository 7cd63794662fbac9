"""Compact basic semialgebraic sets: membership, bounding boxes, LMI conversion.

A set is the collection of points satisfying g_i(x) >= 0 for every
constraint polynomial g_i, intersected with an axis-aligned box.  Membership
uses exact closed comparisons with no tolerance; boundary points have
measure zero and tolerances would bias downstream uniformity tests.

Set definition file format (text)::

    # comment
    dim 2
    box_lower 0.46 0.03
    box_upper 2.02 1.64
    constraint ge0        # or le0; le0 constraints are stored negated
    1.0 2 0
    -2.0 1 0
    ...                   # polynomial term lines, `coeff e1 ... en`
    end

Four definitions transcribed from the bundled studies ship as package data:
``oned``, ``schur3``, ``stabilizability``, ``cerone``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .polycore import Box, Polynomial, format_polynomial_text, parse_polynomial_text

__all__ = [
    "SemialgebraicSet",
    "LmiPencil",
    "contains",
    "contains_many",
    "bounding_box",
    "lmi_to_polynomials",
    "parse_set_text",
    "format_set_text",
    "load_set_file",
    "write_set_file",
    "load_bundled_set",
    "BUNDLED_SETS",
]

BUNDLED_SETS = ("oned", "schur3", "stabilizability", "cerone")


@dataclass(frozen=True)
class SemialgebraicSet:
    """Constraints g_1..g_m (all >= 0) plus an outer box."""

    dimension: int
    constraints: tuple
    box: Box
    name: str = ""

    def __post_init__(self):
        if self.box.dimension != self.dimension:
            raise ValueError("box dimension does not match set dimension")
        constraints = tuple(self.constraints)
        for g in constraints:
            if not isinstance(g, Polynomial) or g.dimension != self.dimension:
                raise ValueError("every constraint must be a Polynomial of the set dimension")
        object.__setattr__(self, "constraints", constraints)


def contains(K: SemialgebraicSet, x: Sequence[float]) -> bool:
    """True iff g_i(x) >= 0 for every constraint and x lies in the box."""
    x = tuple(float(v) for v in x)
    if len(x) != K.dimension:
        raise ValueError(f"point has dimension {len(x)}, set has {K.dimension}")
    if not K.box.contains(x):
        return False
    return all(g.evaluate(x) >= 0.0 for g in K.constraints)


def contains_many(K: SemialgebraicSet, points: np.ndarray) -> np.ndarray:
    """Vectorized membership for an (m, n) array of points."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != K.dimension:
        raise ValueError(f"expected points of shape (m, {K.dimension})")
    ok = K.box.contains_many(points)
    for g in K.constraints:
        if not ok.any():
            break
        ok = ok & (g.evaluate_many(points) >= 0.0)
    return ok


def bounding_box(K: SemialgebraicSet, resolution: int) -> Box:
    """Conservative outer box from a full-grid membership scan.

    Scans a resolution^n grid over K.box, takes the tight box around all
    member grid points, expands it outward by one grid step per side, and
    clips back to K.box.  The expansion makes the result an outer box for
    any feature the grid resolves.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    n = K.dimension
    axes = [np.linspace(K.box.lower[i], K.box.upper[i], resolution) for i in range(n)]
    steps = [(K.box.upper[i] - K.box.lower[i]) / (resolution - 1) for i in range(n)]

    lo = [np.inf] * n
    hi = [-np.inf] * n
    found = False
    # scan in slabs along the first axis to bound memory
    tail = np.array(list(itertools.product(*axes[1:]))) if n > 1 else None
    chunk = max(1, int(2e6 // max(1, resolution ** (n - 1))))
    for start in range(0, resolution, chunk):
        x0 = axes[0][start : start + chunk]
        if n == 1:
            pts = x0.reshape(-1, 1)
        else:
            pts = np.concatenate(
                [
                    np.repeat(x0, tail.shape[0]).reshape(-1, 1),
                    np.tile(tail, (x0.shape[0], 1)),
                ],
                axis=1,
            )
        mask = contains_many(K, pts)
        if mask.any():
            found = True
            member = pts[mask]
            for i in range(n):
                lo[i] = min(lo[i], float(member[:, i].min()))
                hi[i] = max(hi[i], float(member[:, i].max()))
    if not found:
        raise ValueError("set appears empty at this resolution")
    lower = tuple(max(K.box.lower[i], lo[i] - steps[i]) for i in range(n))
    upper = tuple(min(K.box.upper[i], hi[i] + steps[i]) for i in range(n))
    return Box(lower, upper)


@dataclass(frozen=True)
class LmiPencil:
    """Affine symmetric matrix pencil F(x) = F0 + F1 x1 + ... + Fn xn."""

    matrices: tuple  # (F0, F1, ..., Fn), each a symmetric (m, m) array

    def __post_init__(self):
        mats = tuple(np.asarray(F, dtype=float) for F in self.matrices)
        if len(mats) < 2:
            raise ValueError("pencil needs F0 plus at least one coefficient matrix")
        size = mats[0].shape[0]
        for F in mats:
            if F.shape != (size, size):
                raise ValueError("all pencil matrices must be square and of equal size")
            if not np.allclose(F, F.T, atol=1e-12):
                raise ValueError("pencil matrices must be symmetric")
        object.__setattr__(self, "matrices", mats)

    @property
    def size(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def dimension(self) -> int:
        return len(self.matrices) - 1

    def entry(self, i: int, j: int) -> Polynomial:
        """Polynomial entry F(x)[i, j]."""
        n = self.dimension
        terms = {(0,) * n: float(self.matrices[0][i, j])}
        for v in range(n):
            alpha = [0] * n
            alpha[v] = 1
            terms[tuple(alpha)] = float(self.matrices[v + 1][i, j])
        return Polynomial(n, terms)

    def evaluate(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        M = self.matrices[0].copy()
        for v in range(self.dimension):
            M += self.matrices[v + 1] * x[v]
        return M


def _poly_det(entries: list[list[Polynomial]]) -> Polynomial:
    """Determinant of a square polynomial matrix by cofactor expansion."""
    m = len(entries)
    if m == 1:
        return entries[0][0]
    dim = entries[0][0].dimension
    det = Polynomial.zero(dim)
    for j in range(m):
        minor = [[entries[r][c] for c in range(m) if c != j] for r in range(1, m)]
        cof = entries[0][j] * _poly_det(minor)
        det = det + cof if j % 2 == 0 else det - cof
    return det


def lmi_to_polynomials(pencil: LmiPencil) -> list[Polynomial]:
    """All 2^m - 1 principal minors of F(x) as polynomials in x.

    x satisfies every minor >= 0 iff F(x) is positive semidefinite, which
    turns an LMI region into a basic semialgebraic constraint list.
    """
    m = pencil.size
    if m > 6:
        raise ValueError(f"pencil size {m} > 6 would generate {2**m - 1} minors; refusing")
    entries = [[pencil.entry(i, j) for j in range(m)] for i in range(m)]
    minors = []
    for r in range(1, m + 1):
        for subset in itertools.combinations(range(m), r):
            sub = [[entries[i][j] for j in subset] for i in subset]
            minors.append(_poly_det(sub))
    return minors


# -- set definition files ---------------------------------------------


def format_set_text(K: SemialgebraicSet) -> str:
    lines = []
    if K.name:
        lines.append(f"# set: {K.name}")
    lines.append(f"dim {K.dimension}")
    lines.append("box_lower " + " ".join(repr(v) for v in K.box.lower))
    lines.append("box_upper " + " ".join(repr(v) for v in K.box.upper))
    for g in K.constraints:
        lines.append("constraint ge0")
        lines.append(format_polynomial_text(g))
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_set_text(text: str, name: str = "") -> SemialgebraicSet:
    dim = None
    lower = None
    upper = None
    constraints = []
    block_lines: list[str] | None = None
    block_sense = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if block_lines is not None:
            if line == "end":
                if dim is None:
                    raise ValueError(f"line {lineno}: constraint before dim")
                g = parse_polynomial_text("\n".join(block_lines), dim)
                constraints.append(-g if block_sense == "le0" else g)
                block_lines = None
            else:
                block_lines.append(line)
            continue
        fields = line.split()
        key = fields[0]
        if key == "dim":
            dim = int(fields[1])
        elif key == "box_lower":
            lower = tuple(float(v) for v in fields[1:])
        elif key == "box_upper":
            upper = tuple(float(v) for v in fields[1:])
        elif key == "constraint":
            if len(fields) != 2 or fields[1] not in ("ge0", "le0"):
                raise ValueError(f"line {lineno}: constraint sense must be ge0 or le0")
            block_sense = fields[1]
            block_lines = []
        else:
            raise ValueError(f"line {lineno}: unknown directive {key!r}")
    if block_lines is not None:
        raise ValueError("unterminated constraint block")
    if dim is None or lower is None or upper is None:
        raise ValueError("set file must define dim, box_lower and box_upper")
    return SemialgebraicSet(dim, tuple(constraints), Box(lower, upper), name=name)


def load_set_file(path) -> SemialgebraicSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_set_text(fh.read(), name=str(path))


def write_set_file(K: SemialgebraicSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_set_text(K))


def load_bundled_set(name: str) -> SemialgebraicSet:
    """Load one of the shipped set definitions by short name."""
    if name not in BUNDLED_SETS:
        raise ValueError(f"unknown bundled set {name!r}; available: {', '.join(BUNDLED_SETS)}")
    text = resources.files("polysamp").joinpath(f"sets/{name}.set").read_text(encoding="utf-8")
    return parse_set_text(text, name=name)
