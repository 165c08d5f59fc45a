"""Sparse polynomials over exact rationals for the collision normal form.

The normal-form computation runs over a fixed ten-slot monomial alphabet:

========  =====  ==================================================
slot      name   meaning
========  =====  ==================================================
0..1      z1 z2  regularised binary coordinates (graded)
2         xi     separation offset x - x*        (graded)
3..4      e1 e2  binary energy offsets h_i - h_i* (graded)
5         w      momentum offset y - y*          (graded)
6..7      p1 p2  reference energies h_i*, kept symbolic
8..9      g1 g2  cube roots of the binary scale constants a_i
========  =====  ==================================================

Grading (the "degree" everywhere below) counts only the six state slots;
p1, p2 ride along as formal parameters and g1, g2 obey g_i**3 -> a_i with
a_i an exact rational carried by the ring.  When a_i happens to be a
perfect rational cube the ring substitutes the exact root immediately, so
for equal masses every coefficient is a plain rational.

Coefficients are ``fractions.Fraction`` values (gmpy2.mpq when available,
same string form "p/q").  Keys are plain int tuples; a ``Poly`` is a dict
from key to coefficient with zero coefficients removed.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

try:  # exact-rational fast path; Fraction is the fallback and the reference
    from gmpy2 import mpq as _RAT
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _RAT = Fraction


def RAT(num=0, den=None):
    """Coerce to the ring's exact rational type (accepts int, str "p/q", Fraction)."""
    if den is None:
        if isinstance(num, float):
            return _RAT(Fraction(num))
        return _RAT(num)
    return _RAT(num, den)


RAT_ZERO = RAT(0)
RAT_ONE = RAT(1)

NVARS = 10
Z1, Z2, XI, E1, E2, W, P1, P2, G1, G2 = range(NVARS)
NSTATE = 6
VAR_NAMES = ("z1", "z2", "xi", "e1", "e2", "w", "p1", "p2", "g1", "g2")

Key = tuple  # length-NVARS int tuple


def state_degree(key: Key) -> int:
    """Total degree of a monomial key in the six graded state slots."""
    return key[0] + key[1] + key[2] + key[3] + key[4] + key[5]


def icbrt(n: int) -> int | None:
    """Exact integer cube root of n >= 0, or None if n is not a cube."""
    if n < 0:
        raise ValueError("icbrt expects a non-negative integer")
    if n < 2:
        return n
    r = round(n ** (1.0 / 3.0))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c * c * c == n:
            return c
    return None


def rational_cbrt(q) -> object | None:
    """Exact rational cube root of q > 0, or None when irrational."""
    num = icbrt(int(q.numerator))
    if num is None:
        return None
    den = icbrt(int(q.denominator))
    if den is None:
        return None
    return RAT(num, den)


class Ring:
    """Monomial context: the exact values of a1, a2 behind the g-slots."""

    __slots__ = ("a1", "a2", "cbrt1", "cbrt2")

    def __init__(self, a1, a2):
        self.a1 = RAT(a1)
        self.a2 = RAT(a2)
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError("binary scale constants must be positive")
        self.cbrt1 = rational_cbrt(self.a1)
        self.cbrt2 = rational_cbrt(self.a2)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.a1 == other.a1 and self.a2 == other.a2

    def __hash__(self):
        return hash((self.a1, self.a2))

    def __repr__(self):
        return f"Ring(a1={self.a1}, a2={self.a2})"

    # -- term normalisation ------------------------------------------------

    def reduce_term(self, key: Key, coeff):
        """Apply g_i**3 -> a_i (and the exact root when a_i is a cube)."""
        e1, e2 = key[G1], key[G2]
        if e1 < 3 and e2 < 3 and (e1 == 0 or self.cbrt1 is None) and (
            e2 == 0 or self.cbrt2 is None
        ):
            return key, coeff
        if e1 >= 3:
            coeff = coeff * self.a1 ** (e1 // 3)
            e1 %= 3
        if e2 >= 3:
            coeff = coeff * self.a2 ** (e2 // 3)
            e2 %= 3
        if e1 and self.cbrt1 is not None:
            coeff = coeff * self.cbrt1**e1
            e1 = 0
        if e2 and self.cbrt2 is not None:
            coeff = coeff * self.cbrt2**e2
            e2 = 0
        return key[:G1] + (e1, e2), coeff

    # -- constructors ------------------------------------------------------

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.const(1)

    def const(self, value) -> "Poly":
        c = RAT(value)
        if c == 0:
            return self.zero()
        return Poly(self, {(0,) * NVARS: c})

    def var(self, slot: int) -> "Poly":
        return self.monomial({slot: 1})

    def monomial(self, exps: Mapping[int, int] | Sequence[int], coeff=1) -> "Poly":
        if isinstance(exps, Mapping):
            key = [0] * NVARS
            for slot, e in exps.items():
                key[slot] = e
        else:
            key = list(exps)
            if len(key) != NVARS:
                raise ValueError(f"monomial key must have {NVARS} slots")
        c = RAT(coeff)
        if c == 0:
            return self.zero()
        key, c = self.reduce_term(tuple(key), c)
        return Poly(self, {key: c})

    def from_terms(self, terms: Iterable[tuple[Sequence[int], object]]) -> "Poly":
        out: dict = {}
        for key, coeff in terms:
            key = tuple(key)
            c = RAT(coeff)
            if c == 0:
                continue
            key, c = self.reduce_term(key, c)
            c = out.get(key, RAT_ZERO) + c
            if c == 0:
                out.pop(key, None)
            else:
                out[key] = c
        return Poly(self, out)

    def from_json(self, data: dict) -> "Poly":
        if tuple(data.get("vars", VAR_NAMES)) != VAR_NAMES:
            raise ValueError("polynomial JSON has an incompatible variable list")
        return self.from_terms((tuple(k), RAT(c)) for k, c in data["terms"])


class Poly:
    """Immutable-by-convention sparse polynomial over a :class:`Ring`."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict):
        self.ring = ring
        self.terms = terms

    # -- basics ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def copy(self) -> "Poly":
        return Poly(self.ring, dict(self.terms))

    def constant_term(self):
        return self.terms.get((0,) * NVARS, RAT_ZERO)

    def coefficient(self, exps: Mapping[int, int] | Sequence[int]):
        if isinstance(exps, Mapping):
            key = [0] * NVARS
            for slot, e in exps.items():
                key[slot] = e
            exps = key
        return self.terms.get(tuple(exps), RAT_ZERO)

    def degree(self) -> int:
        """Maximum state degree (-1 for the zero polynomial)."""
        if not self.terms:
            return -1
        return max(state_degree(k) for k in self.terms)

    def min_degree(self) -> int:
        if not self.terms:
            return -1
        return min(state_degree(k) for k in self.terms)

    def active_slots(self) -> set[int]:
        used: set[int] = set()
        for key in self.terms:
            for slot in range(NVARS):
                if key[slot]:
                    used.add(slot)
        return used

    # -- ring operations ---------------------------------------------------

    def __neg__(self):
        return Poly(self.ring, {k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = self.ring.const(other)
        if self.ring != other.ring:
            raise ValueError("polynomials from different rings")
        if len(other.terms) > len(self.terms):
            self, other = other, self
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, RAT_ZERO) + c
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return Poly(self.ring, out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = self.ring.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = RAT(c)
        if c == 0:
            return self.ring.zero()
        return Poly(self.ring, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(RAT_ONE / RAT(other))

    def mul(self, other: "Poly", max_degree: int | None = None) -> "Poly":
        """Product, optionally truncated to state degree <= max_degree."""
        if self.ring != other.ring:
            raise ValueError("polynomials from different rings")
        if not self.terms or not other.terms:
            return self.ring.zero()
        if len(self.terms) > len(other.terms):
            self, other = other, self
        reduce_term = self.ring.reduce_term
        out: dict = {}
        bterms = other.terms
        for ka, ca in self.terms.items():
            da = state_degree(ka)
            for kb, cb in bterms.items():
                if max_degree is not None and da + state_degree(kb) > max_degree:
                    continue
                key = (
                    ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2], ka[3] + kb[3],
                    ka[4] + kb[4], ka[5] + kb[5], ka[6] + kb[6], ka[7] + kb[7],
                    ka[8] + kb[8], ka[9] + kb[9],
                )
                c = ca * cb
                if key[8] >= 3 or key[9] >= 3:
                    key, c = reduce_term(key, c)
                s = out.get(key, RAT_ZERO) + c
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return Poly(self.ring, out)

    def pow(self, n: int, max_degree: int | None = None) -> "Poly":
        if n < 0:
            raise ValueError("negative powers are not polynomial")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result.mul(base, max_degree)
            n >>= 1
            if n:
                base = base.mul(base, max_degree)
        return result

    def __pow__(self, n: int):
        return self.pow(n)

    # -- calculus ----------------------------------------------------------

    def diff(self, slot: int) -> "Poly":
        out: dict = {}
        for key, c in self.terms.items():
            e = key[slot]
            if not e:
                continue
            nk = key[:slot] + (e - 1,) + key[slot + 1 :]
            s = out.get(nk, RAT_ZERO) + c * e
            if s == 0:
                out.pop(nk, None)
            else:
                out[nk] = s
        return Poly(self.ring, out)

    # -- grading -----------------------------------------------------------

    def trunc(self, max_degree: int) -> "Poly":
        return Poly(
            self.ring,
            {k: c for k, c in self.terms.items() if state_degree(k) <= max_degree},
        )

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(
            self.ring,
            {k: c for k, c in self.terms.items() if state_degree(k) == d},
        )

    def split_degrees(self) -> dict[int, "Poly"]:
        buckets: dict[int, dict] = {}
        for k, c in self.terms.items():
            buckets.setdefault(state_degree(k), {})[k] = c
        return {d: Poly(self.ring, t) for d, t in sorted(buckets.items())}

    def filter_terms(self, pred: Callable[[Key], bool]) -> "Poly":
        return Poly(self.ring, {k: c for k, c in self.terms.items() if pred(k)})

    # -- substitution ------------------------------------------------------

    def subs(self, mapping: Mapping[int, "Poly"], max_degree: int | None = None) -> "Poly":
        """Substitute polynomials for slots; other slots pass through.

        Truncation at ``max_degree`` is applied to every intermediate
        product; it is lossless for the retained degrees because state
        degrees only ever add.
        """
        ring = self.ring
        slots = sorted(mapping)
        caches: dict[int, list[Poly]] = {s: [ring.one(), mapping[s]] for s in slots}

        def power(slot: int, e: int) -> Poly:
            cache = caches[slot]
            while len(cache) <= e:
                cache.append(cache[-1].mul(cache[1], max_degree))
            return cache[e]

        out = ring.zero()
        for key, c in self.terms.items():
            rest = list(key)
            for s in slots:
                rest[s] = 0
            acc = ring.monomial(rest, c)
            if max_degree is not None and acc.degree() > max_degree:
                continue
            for s in slots:
                e = key[s]
                if e:
                    acc = acc.mul(power(s, e), max_degree)
                    if acc.is_zero():
                        break
            out = out + acc
        return out

    def subs_values(self, values: Mapping[int, object]) -> "Poly":
        """Substitute exact rational values for the given slots."""
        ring = self.ring
        vals = {s: RAT(v) for s, v in values.items()}
        terms: list[tuple[Key, object]] = []
        for key, c in self.terms.items():
            nk = list(key)
            for s, v in vals.items():
                e = nk[s]
                if e:
                    c = c * v**e
                    nk[s] = 0
            terms.append((tuple(nk), c))
        return ring.from_terms(terms)

    def divexact_var(self, slot: int, power: int) -> "Poly":
        """Divide by var**power; every term must contain the factor."""
        out: dict = {}
        for key, c in self.terms.items():
            if key[slot] < power:
                raise ValueError(
                    f"term {key} is not divisible by {VAR_NAMES[slot]}**{power}"
                )
            out[key[:slot] + (key[slot] - power,) + key[slot + 1 :]] = c
        return Poly(self.ring, out)

    # -- numerics ----------------------------------------------------------

    def evaluate(self, values: Sequence[float]) -> float:
        """Evaluate at float values for all ten slots."""
        total = 0.0
        for key, c in self.terms.items():
            t = float(c)
            for slot in range(NVARS):
                e = key[slot]
                if e:
                    t *= values[slot] ** e
            total += t
        return total

    def evaluate_exact(self, values: Sequence[object]):
        """Evaluate at exact rational values for all ten slots.

        Only valid when the radical slots are inactive or their values are
        supplied consistently by the caller.
        """
        total = RAT_ZERO
        vals = [RAT(v) for v in values]
        for key, c in self.terms.items():
            t = c
            for slot in range(NVARS):
                e = key[slot]
                if e:
                    t = t * vals[slot] ** e
            total += t
        return total

    def to_numeric(
        self, param_values: Mapping[int, float] | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Exponent matrix and float coefficients over the six state slots.

        Exponents on the parameter and radical slots are folded into the
        float coefficients using ``param_values`` (slot -> value); those
        slots must be covered when they appear.
        """
        folded: dict[tuple, float] = {}
        for key, c in self.terms.items():
            f = float(c)
            for slot in (P1, P2, G1, G2):
                e = key[slot]
                if e:
                    if param_values is None or slot not in param_values:
                        raise ValueError(
                            f"slot {VAR_NAMES[slot]} is active; supply its value"
                        )
                    f *= param_values[slot] ** e
            sk = key[:NSTATE]
            folded[sk] = folded.get(sk, 0.0) + f
        if not folded:
            return np.zeros((0, NSTATE), dtype=np.int64), np.zeros(0)
        keys = sorted(folded)
        exps = np.array(keys, dtype=np.int64)
        coeffs = np.array([folded[k] for k in keys])
        return exps, coeffs

    # -- serialisation and display ------------------------------------------

    def to_json(self) -> dict:
        terms = [
            [list(k), str(self.terms[k])] for k in sorted(self.terms)
        ]
        return {"vars": list(VAR_NAMES), "terms": terms}

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms):
            c = self.terms[key]
            factors = [
                f"{VAR_NAMES[s]}^{key[s]}" if key[s] > 1 else VAR_NAMES[s]
                for s in range(NVARS)
                if key[s]
            ]
            mono = "*".join(factors) or "1"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)


# -- Fischer pairing --------------------------------------------------------


def _multifactorial(key: Key) -> int:
    out = 1
    for slot in range(NSTATE):
        e = key[slot]
        while e > 1:
            out *= e
            e -= 1
    return out


def fischer_inner(p: Poly, q: Poly):
    """Apolar pairing <x^a, x^b> = a! delta_ab on the six state slots.

    Defined for polynomials whose coefficients are plain rationals, i.e.
    with parameter and radical slots already substituted away.
    """
    for poly in (p, q):
        for key in poly.terms:
            if any(key[s] for s in (P1, P2, G1, G2)):
                raise ValueError(
                    "the Fischer pairing is defined on the state slots only; "
                    "substitute parameters first"
                )
    if len(p.terms) > len(q.terms):
        p, q = q, p
    total = RAT_ZERO
    for key, c in p.terms.items():
        d = q.terms.get(key)
        if d is not None:
            total += c * d * _multifactorial(key)
    return total


def fischer_inner_vec(ps: Sequence[Poly], qs: Sequence[Poly]):
    """Component-wise sum of Fischer pairings for vectors of polynomials."""
    if len(ps) != len(qs):
        raise ValueError("vectors must have equal length")
    total = RAT_ZERO
    for p, q in zip(ps, qs):
        total += fischer_inner(p, q)
    return total


# -- exact dense linear algebra ---------------------------------------------
#
# Plain list-of-lists Gaussian elimination over the exact rational type.
# Sizes in this package stay tiny (a few dozen rows), so no pivoting
# strategy beyond "first nonzero" is needed.


def rref(matrix: Sequence[Sequence[object]]) -> tuple[list[list[object]], list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    rows = [[RAT(x) for x in row] for row in matrix]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = RAT_ONE / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def matrix_rank(matrix: Sequence[Sequence[object]]) -> int:
    return len(rref(matrix)[1])


def nullspace(matrix: Sequence[Sequence[object]]) -> list[list[object]]:
    """Basis of the right kernel (one vector per free column)."""
    if not matrix:
        return []
    ncols = len(matrix[0])
    rows, pivots = rref(matrix)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [RAT_ZERO] * ncols
        vec[fc] = RAT_ONE
        for r, pc in enumerate(pivots):
            vec[pc] = -rows[r][fc]
        basis.append(vec)
    return basis


def solve_linear(
    matrix: Sequence[Sequence[object]], rhs: Sequence[object]
) -> list[object] | None:
    """One exact solution of A x = b (free variables set to zero), or None."""
    if not matrix:
        return None if any(RAT(b) != 0 for b in rhs) else []
    ncols = len(matrix[0])
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rows, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [RAT_ZERO] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][ncols]
    return x
