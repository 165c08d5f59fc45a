"""Cohomological operator of the double-collision leading part.

The leading part of the regularised field is X0 = (z2^2, z1^2, 0, 0, 0, 0).
Degree-by-degree normalisation removes from each graded component of a
field everything in the image of

    L(U) = [X0, U],

keeping only the part in a complement.  The complement used here is the
kernel of the adjoint of L with respect to the apolar (Fischer) pairing
<x^a, x^b> = a! delta_ab, which makes the split orthogonal:

    H_{d+1} = Im(L|H_d) (+) Ker(L*|H_{d+1}).

Writing Lt f = z2^2 f_z1 + z1^2 f_z2 for the scalar transport operator,
the operator and its adjoint act componentwise as

    L(U)  = (Lt U1 - 2 z2 U2,  Lt U2 - 2 z1 U1,  Lt U3, ..., Lt U6)
    L*(W) = (Lt* W1 - 2 dW2/dz1,  Lt* W2 - 2 dW1/dz2,  Lt* W3, ...)

with Lt* w = z2 w_z1z1 + z1 w_z2z2.  Both only touch the z-slots, so the
linear algebra decomposes into tiny independent blocks indexed by the
monomial in the remaining slots; each block is solved exactly over the
rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

from .ratpoly import (
    NSTATE,
    NVARS,
    RAT,
    RAT_ONE,
    RAT_ZERO,
    Poly,
    Ring,
    Z1,
    Z2,
    matrix_rank,
    nullspace,
    rref,
    solve_linear,
    state_degree,
)

# -- vector-field operations -------------------------------------------------


def x0_field(ring: Ring) -> list[Poly]:
    """The leading collision part (z2^2, z1^2, 0, 0, 0, 0)."""
    z1, z2 = ring.var(Z1), ring.var(Z2)
    zero = ring.zero()
    return [z2 * z2, z1 * z1, zero, zero, zero, zero]


def lie_bracket(
    x: Sequence[Poly], y: Sequence[Poly], max_degree: int | None = None
) -> list[Poly]:
    """[X, Y] = DY.X - DX.Y on six-component polynomial fields."""
    if len(x) != NSTATE or len(y) != NSTATE:
        raise ValueError("fields must have six components")
    ring = x[0].ring
    out = []
    for i in range(NSTATE):
        acc = ring.zero()
        for j in range(NSTATE):
            acc = acc + y[i].diff(j).mul(x[j], max_degree)
            acc = acc - x[i].diff(j).mul(y[j], max_degree)
        out.append(acc)
    return out


def ltilde(f: Poly) -> Poly:
    """Scalar transport operator along X0: z2^2 f_z1 + z1^2 f_z2."""
    ring = f.ring
    z1, z2 = ring.var(Z1), ring.var(Z2)
    return (z2 * z2).mul(f.diff(Z1)) + (z1 * z1).mul(f.diff(Z2))


def ltilde_star(w: Poly) -> Poly:
    """Fischer adjoint of :func:`ltilde`: z2 w_z1z1 + z1 w_z2z2."""
    ring = w.ring
    z1, z2 = ring.var(Z1), ring.var(Z2)
    return z2.mul(w.diff(Z1).diff(Z1)) + z1.mul(w.diff(Z2).diff(Z2))


def cohomological_op(u: Sequence[Poly]) -> list[Poly]:
    """L(U) = [X0, U] in its explicit componentwise form."""
    ring = u[0].ring
    z1, z2 = ring.var(Z1), ring.var(Z2)
    out = [ltilde(c) for c in u]
    out[0] = out[0] - (2 * z2).mul(u[1])
    out[1] = out[1] - (2 * z1).mul(u[0])
    return out


def adjoint_op(w: Sequence[Poly]) -> list[Poly]:
    """L*(W), the Fischer adjoint of :func:`cohomological_op`."""
    out = [ltilde_star(c) for c in w]
    out[0] = out[0] - w[1].diff(Z1).scale(2)
    out[1] = out[1] - w[0].diff(Z2).scale(2)
    return out


# -- small exact matrices for the z-blocks ------------------------------------
#
# Homogeneous 2-variable polynomials of z-degree k are coordinatised by
# the z2-exponent: index i <-> z1^(k-i) z2^i, i = 0..k.


def _mat_lt(k: int) -> list[list]:
    """Matrix of the scalar transport operator, degree k -> k+1."""
    rows = [[RAT_ZERO] * (k + 1) for _ in range(k + 2)]
    for i in range(k + 1):
        a, b = k - i, i
        if a:
            rows[b + 2][i] += RAT(a)
        if b:
            rows[b - 1][i] += RAT(b)
    return rows

def _mat_lt_star(k: int) -> list[list]:
    """Matrix of the adjoint transport operator, degree k -> k-1."""
    rows = [[RAT_ZERO] * (k + 1) for _ in range(k)]
    for i in range(k + 1):
        a, b = k - i, i
        if a >= 2:
            rows[b + 1][i] += RAT(a * (a - 1))
        if b >= 2:
            rows[b - 2][i] += RAT(b * (b - 1))
    return rows


def _mat_pair_l(k: int) -> list[list]:
    """Matrix of L on the coupled (U1, U2) block, U z-degree k.

    Coordinates are stacked [U1; U2] and [T1; T2] with the scalar layout
    above; T has z-degree k+1.
    """
    du, dt = k + 1, k + 2
    rows = [[RAT_ZERO] * (2 * du) for _ in range(2 * dt)]
    lt = _mat_lt(k)
    for i in range(du):
        for r in range(dt):
            if lt[r][i]:
                rows[r][i] += lt[r][i]
                rows[dt + r][du + i] += lt[r][i]
    for i in range(du):
        b = i
        # -2 z2 U2 into T1; z2-exp becomes b+1
        rows[b + 1][du + i] -= RAT(2)
        # -2 z1 U1 into T2; z2-exp stays b
        rows[dt + b][i] -= RAT(2)
    return rows


def _mat_pair_lstar(k: int) -> list[list]:
    """Matrix of L* on the coupled block, W z-degree k+1 -> U z-degree k."""
    du, dt = k + 1, k + 2
    rows = [[RAT_ZERO] * (2 * dt) for _ in range(2 * du)]
    lts = _mat_lt_star(k + 1)
    for i in range(dt):
        for r in range(du):
            if lts[r][i]:
                rows[r][i] += lts[r][i]
                rows[du + r][dt + i] += lts[r][i]
    for i in range(dt):
        a, b = k + 1 - i, i
        # -2 d/dz1 W2 into U1*; z2-exp stays b
        if a:
            rows[b][dt + i] -= RAT(2 * a)
        # -2 d/dz2 W1 into U2*; z2-exp becomes b-1
        if b:
            rows[du + b - 1][i] -= RAT(2 * b)
    return rows


def _matvec(m: list[list], v: list) -> list:
    return [
        sum((row[j] * v[j] for j in range(len(v)) if v[j]), RAT_ZERO) for row in m
    ]


def _matmul(a: list[list], b: list[list]) -> list[list]:
    if not a or not b:
        return []
    n, k, m = len(a), len(b), len(b[0])
    out = [[RAT_ZERO] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for t in range(k):
            f = ai[t]
            if f:
                bt = b[t]
                oi = out[i]
                for j in range(m):
                    if bt[j]:
                        oi[j] += f * bt[j]
    return out


def _minimal_norm_split(
    mat_l: list[list], mat_lstar: list[list], t: list
) -> tuple[list, list]:
    """Split t = n + L u with L* n = 0 and u of minimal Fischer norm.

    Returns (n, u) in block coordinates.  Implemented by the normal
    equations restricted to the image of L*: u = L* c where
    (L* L L*) c = L* t; the restriction makes u unique even though c is
    not.
    """
    dim_u = len(mat_lstar)
    if dim_u == 0:
        return list(t), []
    a = _matmul(_matmul(mat_lstar, mat_l), mat_lstar)
    rhs = _matvec(mat_lstar, t)
    c = solve_linear(a, rhs)
    if c is None:
        raise RuntimeError(
            "kernel-projection inconsistency in a cohomological block"
        )
    u = _matvec(mat_lstar, c)
    lu = _matvec(mat_l, u)
    n = [ti - li for ti, li in zip(t, lu)]
    if any(x for x in _matvec(mat_lstar, n)):
        raise RuntimeError("split residual is not in the adjoint kernel")
    return n, u


# -- slice bookkeeping ---------------------------------------------------------


def _slice_key(key: tuple) -> tuple:
    return key[2:]


def _gather_slices(p: Poly) -> dict[tuple, dict[tuple[int, int], object]]:
    out: dict[tuple, dict] = {}
    for key, c in p.terms.items():
        out.setdefault(_slice_key(key), {})[(key[0], key[1])] = c
    return out


def _zdict_to_vec(zd: dict, k: int) -> list:
    vec = [RAT_ZERO] * (k + 1)
    for (a, b), c in zd.items():
        if a + b != k:
            raise ValueError("slice is not z-homogeneous")
        vec[b] = c
    return vec


def _vec_terms(vec: list, k: int, skey: tuple):
    for b, c in enumerate(vec):
        if c:
            yield (k - b, b) + skey, c


@dataclass
class SplitResult:
    """Resonant part and minimal-norm preimage for one graded component."""

    resonant: list[Poly]
    generator: list[Poly]


def graded_component_split(t_field: Sequence[Poly]) -> SplitResult:
    """Split a graded field component T = N + L(U).

    ``t_field`` must be homogeneous in the state grading (all six
    components of one total degree).  N collects the resonant terms
    (adjoint kernel), U the minimal-norm generator with [X0, U] = T - N.
    """
    ring = t_field[0].ring
    n_terms: list[list] = [[] for _ in range(NSTATE)]
    u_terms: list[list] = [[] for _ in range(NSTATE)]

    # coupled block: components 0 and 1 share slices
    s0 = _gather_slices(t_field[0])
    s1 = _gather_slices(t_field[1])
    for skey in sorted(set(s0) | set(s1)):
        zd0 = s0.get(skey, {})
        zd1 = s1.get(skey, {})
        k_t = next(a + b for a, b in (*zd0, *zd1))
        if k_t == 0:
            # no z-content: L cannot reach it, the term is resonant
            for (a, b), c in zd0.items():
                n_terms[0].append(((a, b) + skey, c))
            for (a, b), c in zd1.items():
                n_terms[1].append(((a, b) + skey, c))
            continue
        k_u = k_t - 1
        t_vec = _zdict_to_vec(zd0, k_t) + _zdict_to_vec(zd1, k_t)
        n_vec, u_vec = _minimal_norm_split(
            _mat_pair_l(k_u), _mat_pair_lstar(k_u), t_vec
        )
        dt, du = k_t + 1, k_u + 1
        n_terms[0].extend(_vec_terms(n_vec[:dt], k_t, skey))
        n_terms[1].extend(_vec_terms(n_vec[dt:], k_t, skey))
        if u_vec:
            u_terms[0].extend(_vec_terms(u_vec[:du], k_u, skey))
            u_terms[1].extend(_vec_terms(u_vec[du:], k_u, skey))

    # scalar components
    for comp in range(2, NSTATE):
        for skey, zd in sorted(_gather_slices(t_field[comp]).items()):
            k_t = next(a + b for a, b in zd)
            if k_t == 0:
                n_terms[comp].extend(((a, b) + skey, c) for (a, b), c in zd.items())
                continue
            k_u = k_t - 1
            t_vec = _zdict_to_vec(zd, k_t)
            n_vec, u_vec = _minimal_norm_split(
                _mat_lt(k_u), _mat_lt_star(k_t), t_vec
            )
            n_terms[comp].extend(_vec_terms(n_vec, k_t, skey))
            if u_vec:
                u_terms[comp].extend(_vec_terms(u_vec, k_u, skey))

    resonant = [ring.from_terms(ts) for ts in n_terms]
    generator = [ring.from_terms(ts) for ts in u_terms]
    return SplitResult(resonant=resonant, generator=generator)


# -- kernels and graded bases --------------------------------------------------


def kernel_ltilde(ring: Ring, k: int) -> list[Poly]:
    """Basis of the scalar transport kernel at z-degree k."""
    if k == 0:
        return [ring.one()]
    vecs = nullspace(_mat_lt(k))
    return [ring.from_terms(_vec_terms(v, k, (0,) * (NVARS - 2))) for v in vecs]


def kernel_ltilde_star(ring: Ring, k: int) -> list[Poly]:
    """Basis of the adjoint transport kernel at z-degree k."""
    if k == 0:
        return [ring.one()]
    vecs = nullspace(_mat_lt_star(k))
    return [ring.from_terms(_vec_terms(v, k, (0,) * (NVARS - 2))) for v in vecs]


def scalar_image_residual(t: Poly) -> tuple[Poly, Poly]:
    """Split a z-homogeneous scalar t = n + Lt(u); returns (n, u)."""
    ring = t.ring
    slices = _gather_slices(t)
    n_terms: list = []
    u_terms: list = []
    for skey, zd in sorted(slices.items()):
        k_t = next(a + b for a, b in zd)
        if k_t == 0:
            n_terms.extend(((a, b) + skey, c) for (a, b), c in zd.items())
            continue
        n_vec, u_vec = _minimal_norm_split(
            _mat_lt(k_t - 1), _mat_lt_star(k_t), _zdict_to_vec(zd, k_t)
        )
        n_terms.extend(_vec_terms(n_vec, k_t, skey))
        u_terms.extend(_vec_terms(u_vec, k_t - 1, skey))
    return t.ring.from_terms(n_terms), t.ring.from_terms(u_terms)


def _center_monomials(d: int):
    """Monomials of the four non-z state slots with total degree d."""
    if d == 0:
        yield (0, 0, 0, 0)
        return
    for combo in combinations_with_replacement(range(4), d):
        exps = [0, 0, 0, 0]
        for c in combo:
            exps[c] += 1
        yield tuple(exps)


def _pad_key(zpart: tuple[int, int], center: tuple) -> tuple:
    return zpart + center + (0, 0, 0, 0)


def _column_space_basis(mat: list[list]) -> list[list]:
    """Independent spanning set of the column space (as coordinate vectors)."""
    if not mat or not mat[0]:
        return []
    rows, _ = rref([list(col) for col in zip(*mat)])
    return [row for row in rows if any(row)]


def graded_split(ring: Ring, d: int) -> tuple[list[list[Poly]], list[list[Poly]]]:
    """Bases of Im(L|H_d) and Ker(L*|H_{d+1}) inside H_{d+1}.

    H_d is the space of six-component fields whose entries are homogeneous
    polynomials of state degree d over the rationals (no parameter or
    radical slots).  The two lists decompose H_{d+1} orthogonally for the
    componentwise Fischer pairing; their sizes add up to dim H_{d+1}.
    """
    if d < 0:
        raise ValueError("degree must be non-negative")
    zero = ring.zero()

    def vec6(assign: dict[int, list[tuple]]) -> list[Poly]:
        out = [zero] * NSTATE
        for comp, terms in assign.items():
            out[comp] = ring.from_terms(terms)
        return out

    im_basis: list[list[Poly]] = []
    ker_basis: list[list[Poly]] = []

    # Image of L on H_d, slice by center monomial of degree dm <= d.
    for dm in range(d + 1):
        k_u = d - dm
        k_t = k_u + 1
        dt = k_t + 1
        for center in _center_monomials(dm):
            skey = center + (0, 0, 0, 0)
            for col in _column_space_basis(_mat_pair_l(k_u)):
                im_basis.append(vec6({
                    0: list(_vec_terms(col[:dt], k_t, skey)),
                    1: list(_vec_terms(col[dt:], k_t, skey)),
                }))
            scalar_cols = _column_space_basis(_mat_lt(k_u))
            for comp in range(2, NSTATE):
                for col in scalar_cols:
                    im_basis.append(vec6({comp: list(_vec_terms(col, k_t, skey))}))

    # Kernel of L* on H_{d+1}, slice by center monomial of degree dm <= d+1.
    for dm in range(d + 2):
        k_t = d + 1 - dm
        dt = k_t + 1
        for center in _center_monomials(dm):
            skey = center + (0, 0, 0, 0)
            if k_t == 0:
                for comp in range(NSTATE):
                    ker_basis.append(vec6({comp: [((0, 0) + skey, RAT_ONE)]}))
                continue
            for vec in nullspace(_mat_pair_lstar(k_t - 1)):
                ker_basis.append(vec6({
                    0: list(_vec_terms(vec[:dt], k_t, skey)),
                    1: list(_vec_terms(vec[dt:], k_t, skey)),
                }))
            scalar_kers = nullspace(_mat_lt_star(k_t))
            for comp in range(2, NSTATE):
                for vec in scalar_kers:
                    ker_basis.append(vec6({comp: list(_vec_terms(vec, k_t, skey))}))

    return im_basis, ker_basis


def state_space_dim(d: int) -> int:
    """dim H_d: six components times the degree-d monomial count in six vars."""
    from math import comb

    return 6 * comb(d + 5, 5)
