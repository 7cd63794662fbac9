"""Dense multivariate polynomial arithmetic over a box.

Polynomials are stored as a map from exponent tuples to float coefficients,
iterated in graded-lexicographic order so that every reduction (evaluation,
integration) sums terms in a fixed, reproducible order.  All types are
immutable after construction and safe to share across threads.

Text format (used by set/approximation files and the CLI): one term per
line, ``coeff e1 e2 ... en`` with the coefficient first and one integer
exponent per variable; lines starting with ``#`` are comments.  Floats are
printed with ``repr`` (shortest round-trip representation) so a written
polynomial parses back bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

Monomial = tuple  # exponent tuple, one nonnegative int per variable

__all__ = [
    "Monomial",
    "Polynomial",
    "Box",
    "UnivariateSlice",
    "integrate_box",
    "marginalize_trailing",
    "conditional_slice",
    "antiderivative",
    "derivative",
    "invert_monotone",
    "monomial_degree",
    "monomial_box_integral",
    "parse_polynomial_text",
    "format_polynomial_text",
]


def monomial_degree(alpha: Monomial) -> int:
    """Total degree |alpha| of an exponent tuple."""
    return int(sum(alpha))


def _grlex_key(alpha: Monomial):
    return (monomial_degree(alpha), alpha)


def _neumaier_sum(values: Iterable[float]) -> float:
    """Compensated (Neumaier) summation; order of `values` is preserved."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


class Polynomial:
    """Immutable dense multivariate polynomial with canonical term storage.

    Zero coefficients are never stored; `terms` maps exponent tuples to
    floats and all tuples share the ambient dimension.  The degree of the
    zero polynomial is 0 by convention.
    """

    __slots__ = ("dimension", "_terms", "_order")

    def __init__(self, dimension: int, terms: Mapping[Monomial, float]):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        clean = {}
        for alpha, coeff in terms.items():
            alpha = tuple(int(e) for e in alpha)
            if len(alpha) != dimension:
                raise ValueError(
                    f"monomial {alpha} has {len(alpha)} exponents, expected {dimension}"
                )
            if any(e < 0 for e in alpha):
                raise ValueError(f"negative exponent in monomial {alpha}")
            coeff = float(coeff)
            if coeff != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + coeff
        clean = {a: c for a, c in clean.items() if c != 0.0}
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_order", tuple(sorted(clean, key=_grlex_key)))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, dimension: int) -> "Polynomial":
        return cls(dimension, {})

    @classmethod
    def constant(cls, dimension: int, value: float) -> "Polynomial":
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> "Polynomial":
        """The polynomial x_index (0-based variable index)."""
        if not 0 <= index < dimension:
            raise ValueError(f"variable index {index} out of range for dimension {dimension}")
        alpha = [0] * dimension
        alpha[index] = 1
        return cls(dimension, {tuple(alpha): 1.0})

    @classmethod
    def from_univariate(cls, coefficients: Sequence[float]) -> "Polynomial":
        """Build a 1-D polynomial from ascending coefficients (c0, c1, ...)."""
        return cls(1, {(k,): c for k, c in enumerate(coefficients)})

    # -- structure ----------------------------------------------------

    @property
    def terms(self) -> Mapping[Monomial, float]:
        return dict(self._terms)

    def ordered_terms(self) -> list[tuple[Monomial, float]]:
        """Terms in graded-lexicographic order (the canonical iteration order)."""
        return [(alpha, self._terms[alpha]) for alpha in self._order]

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(monomial_degree(a) for a in self._terms)

    def coefficient(self, alpha: Monomial) -> float:
        return self._terms.get(tuple(alpha), 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dimension == other.dimension and self._terms == other._terms

    __hash__ = None

    def __repr__(self) -> str:
        return f"Polynomial(dim={self.dimension}, terms={len(self._terms)}, degree={self.degree})"

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dimension != self.dimension:
                raise ValueError("dimension mismatch in polynomial arithmetic")
            return other
        return Polynomial.constant(self.dimension, float(other))

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self._terms)
        for alpha, coeff in other._terms.items():
            terms[alpha] = terms.get(alpha, 0.0) + coeff
        return Polynomial(self.dimension, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.dimension, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(self.dimension, {a: c * float(other) for a, c in self._terms.items()})
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch in polynomial arithmetic")
        terms: dict[Monomial, float] = {}
        for a1 in self._order:
            c1 = self._terms[a1]
            for a2 in other._order:
                prod = tuple(e1 + e2 for e1, e2 in zip(a1, a2))
                terms[prod] = terms.get(prod, 0.0) + c1 * other._terms[a2]
        return Polynomial(self.dimension, terms)

    def __rmul__(self, other) -> "Polynomial":
        return self.__mul__(other)

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial power requires a nonnegative integer")
        result = Polynomial.constant(self.dimension, 1.0)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # -- evaluation ---------------------------------------------------

    def evaluate(self, x: Sequence[float]) -> float:
        """Value at a point, summed term-by-term in canonical order."""
        x = tuple(float(v) for v in x)
        if len(x) != self.dimension:
            raise ValueError(f"point has dimension {len(x)}, polynomial has {self.dimension}")
        if not self._terms:
            return 0.0
        maxdeg = [0] * self.dimension
        for alpha in self._order:
            for i, e in enumerate(alpha):
                if e > maxdeg[i]:
                    maxdeg[i] = e
        powers = []
        for i in range(self.dimension):
            row = [1.0] * (maxdeg[i] + 1)
            for k in range(1, maxdeg[i] + 1):
                row[k] = row[k - 1] * x[i]
            powers.append(row)

        def term_value(alpha):
            v = self._terms[alpha]
            for i, e in enumerate(alpha):
                if e:
                    v *= powers[i][e]
            return v

        return _neumaier_sum(term_value(a) for a in self._order)

    def evaluate_horner(self, x: Sequence[float]) -> float:
        """Second evaluation path: recursive Horner in the leading variable."""
        x = tuple(float(v) for v in x)
        if len(x) != self.dimension:
            raise ValueError(f"point has dimension {len(x)}, polynomial has {self.dimension}")
        return _horner_multivariate(self._terms, self.dimension, x, 0)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized values at an (m, n) array of points."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1) if self.dimension == 1 else points.reshape(1, -1)
        if points.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {points.shape[1]}, polynomial has {self.dimension}"
            )
        m = points.shape[0]
        if not self._terms:
            return np.zeros(m)
        maxdeg = max(max(alpha) for alpha in self._order)
        pw = np.ones((self.dimension, maxdeg + 1, m))
        for k in range(1, maxdeg + 1):
            pw[:, k, :] = pw[:, k - 1, :] * points.T
        out = np.zeros(m)
        for alpha in self._order:
            t = np.full(m, self._terms[alpha])
            for i, e in enumerate(alpha):
                if e:
                    t = t * pw[i, e, :]
            out += t
        return out

    def __call__(self, x):
        return self.evaluate(x)


def _horner_multivariate(terms: Mapping[Monomial, float], dim: int, x: tuple, var: int) -> float:
    if var == dim - 1:
        coeffs: dict[int, float] = {}
        for alpha, c in terms.items():
            coeffs[alpha[var]] = coeffs.get(alpha[var], 0.0) + c
        if not coeffs:
            return 0.0
        top = max(coeffs)
        acc = 0.0
        for k in range(top, -1, -1):
            acc = acc * x[var] + coeffs.get(k, 0.0)
        return acc
    groups: dict[int, dict[Monomial, float]] = {}
    for alpha, c in terms.items():
        groups.setdefault(alpha[var], {})[alpha] = c
    if not groups:
        return 0.0
    top = max(groups)
    acc = 0.0
    for k in range(top, -1, -1):
        inner = _horner_multivariate(groups.get(k, {}), dim, x, var + 1) if k in groups else 0.0
        acc = acc * x[var] + inner
    return acc


@dataclass(frozen=True)
class Box:
    """Axis-aligned product of intervals with nonempty interior."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper):
            raise ValueError("lower and upper must have equal length")
        if not lower:
            raise ValueError("box must have dimension >= 1")
        for a, b in zip(lower, upper):
            if not a < b:
                raise ValueError(f"degenerate interval [{a}, {b}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lower, self.upper):
            v *= b - a
        return v

    def interval(self, i: int) -> tuple:
        return (self.lower[i], self.upper[i])

    def contains(self, x: Sequence[float]) -> bool:
        if len(x) != self.dimension:
            raise ValueError("dimension mismatch")
        return all(a <= float(v) <= b for v, a, b in zip(x, self.lower, self.upper))

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((points >= lo) & (points <= hi), axis=1)

    def prefix(self, k: int) -> "Box":
        """Sub-box of the first k axes."""
        return Box(self.lower[:k], self.upper[:k])


def monomial_box_integral(alpha: Monomial, box: Box) -> float:
    """Exact integral of x^alpha over the box, one factor per axis."""
    if len(alpha) != box.dimension:
        raise ValueError("dimension mismatch")
    v = 1.0
    for e, a, b in zip(alpha, box.lower, box.upper):
        v *= (b ** (e + 1) - a ** (e + 1)) / (e + 1)
    return v


def integrate_box(poly: Polynomial, box: Box) -> float:
    """Exact integral of `poly` over `box` via the monomial formula."""
    if poly.dimension != box.dimension:
        raise ValueError("dimension mismatch between polynomial and box")
    return _neumaier_sum(
        coeff * monomial_box_integral(alpha, box) for alpha, coeff in poly.ordered_terms()
    )


def marginalize_trailing(poly: Polynomial, box: Box, k: int) -> Polynomial:
    """Integrate out variables x_{k+1}..x_n over their box intervals.

    Returns a polynomial in x_1..x_k (dimension k) equal to the exact
    iterated integral.
    """
    n = poly.dimension
    if box.dimension != n:
        raise ValueError("dimension mismatch between polynomial and box")
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < {n}, got {k}")
    terms: dict[Monomial, float] = {}
    for alpha, coeff in poly.ordered_terms():
        head = alpha[:k]
        factor = coeff
        for i in range(k, n):
            e = alpha[i]
            a, b = box.lower[i], box.upper[i]
            factor *= (b ** (e + 1) - a ** (e + 1)) / (e + 1)
        terms[head] = terms.get(head, 0.0) + factor
    return Polynomial(k, terms)


@dataclass(frozen=True)
class UnivariateSlice:
    """x |-> sum_k c_k x^k restricted to [lo, hi], coefficients ascending."""

    coefficients: tuple
    lo: float
    hi: float

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            coeffs = (0.0,)
        lo = float(self.lo)
        hi = float(self.hi)
        if not lo < hi:
            raise ValueError(f"degenerate interval [{lo}, {hi}]")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, y: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * y + c
        return acc

    def evaluate_many(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        acc = np.zeros_like(y)
        for c in reversed(self.coefficients):
            acc = acc * y + c
        return acc

    def __call__(self, y):
        return self.evaluate(float(y))


def conditional_slice(poly: Polynomial, fixed: Sequence[float], box: Box) -> UnivariateSlice:
    """Univariate section x_i |-> P(fixed, x_i) on the i-th box interval.

    `poly` must already be marginalized to dimension i = len(fixed) + 1; the
    normalization of the conditional density is deferred to the sampler (the
    marginal-ratio denominator cancels under inverse-transform sampling).
    """
    i = poly.dimension
    fixed = tuple(float(v) for v in fixed)
    if len(fixed) != i - 1:
        raise ValueError(f"expected {i - 1} fixed values for a dimension-{i} polynomial")
    if box.dimension < i:
        raise ValueError("box dimension too small for conditioning")
    for j, v in enumerate(fixed):
        if not box.lower[j] <= v <= box.upper[j]:
            raise ValueError(f"fixed value x_{j + 1} = {v} outside box interval {box.interval(j)}")
    top = 0
    for alpha in poly.terms:
        top = max(top, alpha[i - 1])
    coeffs = [0.0] * (top + 1)
    for alpha, coeff in poly.ordered_terms():
        v = coeff
        for j in range(i - 1):
            v *= fixed[j] ** alpha[j]
        coeffs[alpha[i - 1]] += v
    return UnivariateSlice(tuple(coeffs), box.lower[i - 1], box.upper[i - 1])


def _horner_ascending(coeffs: Sequence[float], y: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * y + c
    return acc


def antiderivative(slice_: UnivariateSlice) -> UnivariateSlice:
    """Antiderivative F with F(lo) = 0 and F' = the input slice.

    The constant term is chosen so that evaluating F at lo by Horner gives
    exactly 0.0.
    """
    src = slice_.coefficients
    coeffs = [0.0] * (len(src) + 1)
    for k, c in enumerate(src):
        coeffs[k + 1] = c / (k + 1)
    coeffs[0] = -_horner_ascending(coeffs[1:], slice_.lo) * slice_.lo
    return UnivariateSlice(tuple(coeffs), slice_.lo, slice_.hi)


def derivative(slice_: UnivariateSlice) -> UnivariateSlice:
    """Coefficient-wise derivative (k * c_k, degree drops by one)."""
    src = slice_.coefficients
    if len(src) == 1:
        return UnivariateSlice((0.0,), slice_.lo, slice_.hi)
    coeffs = tuple(src[k] * k for k in range(1, len(src)))
    return UnivariateSlice(coeffs, slice_.lo, slice_.hi)


def invert_monotone(F: UnivariateSlice, w: float, tol_abs: float | None = None) -> float:
    """Root y in [lo, hi] of F(y) = w for a nondecreasing slice F.

    Bracketed bisection down to width 1e-8 * (hi - lo), then Newton polish
    (at most 20 iterations) with a pure-bisection fallback.  The result
    satisfies |F(y) - w| <= tol_abs with tol_abs = 1e-12 * max(1, F(hi))
    unless conditioning forbids it, in which case the bracket is shrunk to
    machine width.
    """
    w = float(w)
    flo = F.evaluate(F.lo)
    fhi = F.evaluate(F.hi)
    if fhi < flo:
        raise ArithmeticError(
            f"slice is decreasing across its interval (F(lo)={flo}, F(hi)={fhi}); "
            "positivity certification failed"
        )
    if not flo <= w <= fhi:
        raise ValueError(f"target {w} outside [F(lo), F(hi)] = [{flo}, {fhi}]")
    if tol_abs is None:
        tol_abs = 1e-12 * max(1.0, abs(fhi))

    lo, hi = F.lo, F.hi
    if w == flo:
        return lo
    if w == fhi:
        return hi

    width_goal = 1e-8 * (hi - lo)
    while hi - lo > width_goal:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F.evaluate(mid) - w <= 0.0:
            lo = mid
        else:
            hi = mid

    y = 0.5 * (lo + hi)
    deriv = derivative(F)
    fy = F.evaluate(y) - w
    for _ in range(20):
        if abs(fy) <= tol_abs:
            return y
        slope = deriv.evaluate(y)
        if slope <= 0.0:
            break
        step = fy / slope
        y_new = y - step
        if not lo <= y_new <= hi:
            break
        fy_new = F.evaluate(y_new) - w
        if fy_new <= 0.0:
            lo = y_new
        else:
            hi = y_new
        if abs(fy_new) > 0.5 * abs(fy):
            y, fy = y_new, fy_new
            break
        y, fy = y_new, fy_new
    if abs(fy) <= tol_abs:
        return y

    # Newton did not certify the residual; bisect to machine width.
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = F.evaluate(mid) - w
        if abs(fm) <= tol_abs:
            return mid
        if fm <= 0.0:
            lo = mid
        else:
            hi = mid
    flo_res = F.evaluate(lo) - w
    fhi_res = F.evaluate(hi) - w
    return lo if abs(flo_res) <= abs(fhi_res) else hi


# -- text format ------------------------------------------------------


def format_polynomial_text(poly: Polynomial) -> str:
    """One `coeff e1 ... en` line per term, graded-lex order, repr floats."""
    lines = []
    for alpha, coeff in poly.ordered_terms():
        lines.append(" ".join([repr(coeff)] + [str(e) for e in alpha]))
    if not lines:
        lines.append(" ".join(["0.0"] + ["0"] * poly.dimension))
    return "\n".join(lines)


def parse_polynomial_text(text: str, dimension: int) -> Polynomial:
    """Parse the term-per-line format; `#` starts a comment."""
    terms: dict[Monomial, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != dimension + 1:
            raise ValueError(
                f"line {lineno}: expected coefficient plus {dimension} exponents, got {len(parts)} fields"
            )
        try:
            coeff = float(parts[0])
            alpha = tuple(int(p) for p in parts[1:])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if any(e < 0 for e in alpha):
            raise ValueError(f"line {lineno}: negative exponent")
        terms[alpha] = terms.get(alpha, 0.0) + coeff
    return Polynomial(dimension, terms)
