"""Degree-by-degree resonant normal form of the collision passage.

Starting from the exact Taylor field of :mod:`.taylor`, each graded
component T_d is split as T_d = N_d + [X0, U_{d-1}] using the orthogonal
decomposition of :mod:`.homological`; the near-identity change
w -> w + U_{d-1}(w) then removes the image part without touching lower
degrees.  Everything runs over exact rationals, so the output resonant
families are certificates, not approximations:

* the normalising transform psi (original variables as polynomials in
  the normal-form variables) with an exact conjugacy identity
  D(psi) . N = X o psi through the truncation degree,
* the resonant field N itself (z and energy components only; the
  separation and momentum components empty),
* a polynomial first integral kappa of N computed by integrating the
  transport equation, with the degree of its surviving drift recorded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .homological import (
    cohomological_op,
    graded_component_split,
    ltilde,
    scalar_image_residual,
    x0_field,
)
from .masses import DerivedConstants, derive_constants
from .ratpoly import (
    E1,
    E2,
    G1,
    G2,
    NSTATE,
    P1,
    P2,
    RAT,
    W,
    XI,
    Z1,
    Z2,
    Poly,
    Ring,
)
from .taylor import ExpansionBase, glc_field_poly


def field_derivative(f: Poly, vf: list[Poly], max_degree: int | None = None) -> Poly:
    """Directional derivative of a scalar along a six-component field."""
    out = f.ring.zero()
    for j in range(NSTATE):
        df = f.diff(j)
        if df:
            out = out + df.mul(vf[j], max_degree)
    return out


def pushforward(
    vf: list[Poly], u: list[Poly], max_degree: int
) -> list[Poly]:
    """Field of w' where w = w' + U(w'), truncated at max_degree.

    Solves (I + DU) N = X o (id + U) by fixed-point iteration; U has
    minimum degree >= 2 so each sweep gains at least one degree.
    """
    ring = vf[0].ring
    sub = {i: ring.var(i) + u[i] for i in range(NSTATE) if u[i]}
    composed = [f.subs(sub, max_degree) for f in vf]
    du = [[u[i].diff(j) for j in range(NSTATE)] for i in range(NSTATE)]
    n = composed
    for _ in range(max_degree + 1):
        nxt = []
        for i in range(NSTATE):
            acc = composed[i]
            for j in range(NSTATE):
                if du[i][j] and n[j]:
                    acc = acc - du[i][j].mul(n[j], max_degree)
            nxt.append(acc)
        if nxt == n:
            return n
        n = nxt
    raise RuntimeError("pushforward iteration failed to stabilise")


def compose_map(psi: list[Poly], u: list[Poly], max_degree: int) -> list[Poly]:
    """psi o (id + U), truncated."""
    ring = psi[0].ring
    sub = {i: ring.var(i) + u[i] for i in range(NSTATE) if u[i]}
    return [p.subs(sub, max_degree) for p in psi]


@dataclass
class KappaResult:
    """Polynomial first integral of the truncated normal form."""

    kappa: Poly
    drift: Poly
    drift_degree: int  # minimum state degree of the surviving drift (-1: none)


@dataclass
class NormalFormResult:
    constants: DerivedConstants
    base: ExpansionBase
    max_degree: int
    input_field: list[Poly]
    normal_form: list[Poly]
    transform: list[Poly]
    corrections: dict[int, list[Poly]] = field(default_factory=dict)

    @property
    def ring(self) -> Ring:
        return self.normal_form[0].ring

    @property
    def residual_degree(self) -> int:
        return self.max_degree

    # -- certificates --------------------------------------------------------

    def conjugacy_residual(self) -> list[Poly]:
        """D(psi) . N - X o psi truncated at max_degree; zero iff conjugate."""
        ring = self.ring
        sub = {i: self.transform[i] for i in range(NSTATE)}
        out = []
        for i in range(NSTATE):
            acc = ring.zero()
            for j in range(NSTATE):
                dpij = self.transform[i].diff(j)
                if dpij and self.normal_form[j]:
                    acc = acc + dpij.mul(self.normal_form[j], self.max_degree)
            acc = acc - self.input_field[i].subs(sub, self.max_degree)
            out.append(acc)
        return out

    def energy_combination(self) -> Poly:
        """a2^(-1/3) h1' + a1^(-1/3) h2' of the normal form (zero iff the
        weighted energy sum is an exact invariant of the truncation)."""
        ring = self.ring
        w1 = ring.monomial({G2: 2}, RAT(1) / ring.a2)
        w2 = ring.monomial({G1: 2}, RAT(1) / ring.a1)
        return w1.mul(self.normal_form[3]) + w2.mul(self.normal_form[4])

    # -- views ----------------------------------------------------------------

    def nf_component(self, i: int) -> Poly:
        return self.normal_form[i]

    def z_remainders(self) -> tuple[Poly, Poly]:
        """Normal-form z-components with the quadratic leading part removed."""
        ring = self.ring
        z1, z2 = ring.var(Z1), ring.var(Z2)
        return (
            self.normal_form[0] - z2 * z2,
            self.normal_form[1] - z1 * z1,
        )

    def to_json(self) -> dict:
        return {
            "masses": [str(m) for m in (
                self.constants.masses.m1, self.constants.masses.m2,
                self.constants.masses.m3, self.constants.masses.m4,
            )],
            "x_star": str(self.base.x_star),
            "y_star": str(self.base.y_star),
            "max_degree": self.max_degree,
            "state_order": ["z1", "z2", "xi", "e1", "e2", "w"],
            "normal_form": [p.to_json() for p in self.normal_form],
            "transform": [p.to_json() for p in self.transform],
            "corrections": {
                str(d): [p.to_json() for p in u]
                for d, u in sorted(self.corrections.items())
            },
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def normal_form(
    vf: list[Poly],
    constants: DerivedConstants,
    base: ExpansionBase | None = None,
    max_degree: int = 9,
) -> NormalFormResult:
    """Normalise a polynomial field whose leading part is X0.

    Removes the image of the cohomological operator degree by degree from
    3 to ``max_degree``; after each change the affected graded component
    is asserted to equal the predicted resonant part.
    """
    if base is None:
        base = ExpansionBase()
    ring = vf[0].ring
    x0 = x0_field(ring)
    for i in range(NSTATE):
        low = vf[i].trunc(2) - x0[i]
        if low:
            raise ValueError(
                "field does not have the double-collision leading part X0"
            )

    current = [f.trunc(max_degree) for f in vf]
    psi = [ring.var(i) for i in range(NSTATE)]
    corrections: dict[int, list[Poly]] = {}

    for deg in range(3, max_degree + 1):
        t_parts = [f.homogeneous_part(deg) for f in current]
        if all(p.is_zero() for p in t_parts):
            continue
        split = graded_component_split(t_parts)
        u = split.generator
        if all(p.is_zero() for p in u):
            continue
        corrections[deg - 1] = u
        current = pushforward(current, u, max_degree)
        psi = compose_map(psi, u, max_degree)
        for i in range(NSTATE):
            if current[i].homogeneous_part(deg) != split.resonant[i]:
                raise RuntimeError(
                    f"degree-{deg} component disagrees with its resonant part"
                )

    return NormalFormResult(
        constants=constants,
        base=base,
        max_degree=max_degree,
        input_field=[f.trunc(max_degree) for f in vf],
        normal_form=current,
        transform=psi,
        corrections=corrections,
    )


def normal_form_for_masses(
    masses,
    base: ExpansionBase | None = None,
    max_degree: int = 9,
) -> NormalFormResult:
    """Convenience path: masses -> constants -> Taylor field -> normal form."""
    constants = derive_constants(masses)
    if base is None:
        base = ExpansionBase()
    vf = glc_field_poly(constants, base, max_degree)
    return normal_form(vf, constants, base, max_degree)


def kappa_integral(result: NormalFormResult) -> KappaResult:
    """First integral kappa of the truncated normal form.

    Starts from the transport invariant (z1^3 - z2^3)/6 and repairs each
    surviving drift order by solving the scalar transport equation; every
    repair must land exactly in the image (certified by the split).  The
    returned drift is the derivative of kappa along the truncated normal
    form; its minimum degree is the order at which invariance fails.
    """
    ring = result.ring
    z1, z2 = ring.var(Z1), ring.var(Z2)
    kappa = (z1.pow(3) - z2.pow(3)).scale(Fraction(1, 6))
    max_degree = result.max_degree
    vf = result.normal_form

    for _ in range(max_degree):
        drift = field_derivative(kappa, vf)
        low_deg = drift.min_degree() if drift else -1
        if low_deg < 0 or low_deg > max_degree:
            return KappaResult(kappa=kappa, drift=drift, drift_degree=low_deg)
        low = drift.homogeneous_part(low_deg)
        resonant, gen = scalar_image_residual(low)
        if resonant:
            raise RuntimeError(
                f"kappa drift at degree {low_deg} is not integrable"
            )
        # Lt(gen) = low, so subtracting gen cancels the lowest drift order.
        kappa = kappa - gen
    raise RuntimeError("kappa integration did not terminate")


@dataclass
class FamilyReport:
    """Resonant families read off a finished normal form.

    ``r61``/``r62`` are the energy-squared blocks of the first z-equation,
    ``kappa7`` the parameter-squared block of the transport invariant,
    ``rh`` the z-shape of the first energy equation normalised to the
    reference scale, each as {(z1 exp, z2 exp): Fraction}.  ``rh`` is None
    when the truncation stops below the degree where it appears.  The
    prefactors multiply the rh shape in the two energy equations; the
    second binary carries the z-swapped (hence negated) shape.
    """

    r61: dict[tuple[int, int], Fraction]
    r62: dict[tuple[int, int], Fraction]
    kappa7: dict[tuple[int, int], Fraction]
    rh: dict[tuple[int, int], Fraction] | None
    rh_prefactor_1: float
    rh_prefactor_2: float
    exchange_symmetric: bool


def _swap_keys(fam: dict) -> dict:
    return {(b, a): c for (a, b), c in fam.items()}


def _state_clean(key: tuple, allowed: tuple[int, ...]) -> bool:
    return all(key[i] == 0 for i in range(2, NSTATE) if i not in allowed)


def _hsq_block(p: Poly, e_slot: int, p_slot: int, zdeg: int) -> dict:
    """z-coefficients of the (e + p)^2 block, checked across all splits."""
    weights = {(0, 2): 1, (1, 1): 2, (2, 0): 1}
    out: dict[tuple[int, int], dict] = {}
    for key, coeff in p.terms.items():
        if key[0] + key[1] != zdeg:
            continue
        split = (key[e_slot], key[p_slot])
        if sum(split) != 2 or not _state_clean(key, (e_slot, p_slot)):
            continue
        if any(key[i] for i in (G1, G2)):
            raise ValueError("energy-squared block carries mass factors")
        zkey = (key[0], key[1])
        out.setdefault(zkey, {})[split] = coeff / weights[split]
    fam = {}
    for zkey, parts in out.items():
        vals = set(parts.values())
        if len(parts) != 3 or len(vals) != 1:
            raise ValueError(f"inconsistent energy block at z-monomial {zkey}")
        fam[zkey] = vals.pop()
    return fam


def _param_sq_block(p: Poly, p_slot: int) -> dict:
    """z-coefficients of the pure parameter-squared terms of a scalar."""
    fam = {}
    for key, coeff in p.terms.items():
        if key[p_slot] != 2 or not _state_clean(key, (p_slot,)):
            continue
        fam[(key[0], key[1])] = coeff
    return fam


def _scaled_family(p: Poly, zdeg: int, reference: dict):
    """Match pure-z terms against reference * (g-monomial prefactor).

    Returns (shape, prefactor_terms) with shape scaled so that it equals
    the reference exactly when the component has the reference's shape;
    raises when the shape disagrees.
    """
    blocks: dict[tuple[int, int], dict] = {}
    for key, coeff in p.terms.items():
        if key[0] + key[1] != zdeg or not _state_clean(key, ()):
            continue
        blocks.setdefault((key[0], key[1]), {})[(key[G1], key[G2])] = coeff
    if not blocks:
        return None, {}
    ref_zkey = max(reference)  # (9, 0); present in every valid shape
    if ref_zkey not in blocks:
        raise ValueError("family misses its leading z-monomial")
    pref = {g: c / reference[ref_zkey] for g, c in blocks[ref_zkey].items()}
    for zkey in set(blocks) | set(reference):
        want = {
            g: c * reference.get(zkey, Fraction(0)) for g, c in pref.items()
        }
        want = {g: c for g, c in want.items() if c}
        if want != blocks.get(zkey, {}):
            raise ValueError(f"family shape disagrees at z-monomial {zkey}")
    return dict(reference), pref


def extract_resonant_families(
    result: NormalFormResult, kappa: KappaResult | None = None
) -> FamilyReport:
    """Read the resonant families and their prefactors off an engine run.

    Raises ValueError when a component does not have the expected block
    structure (which is what a corrupted engine would produce); a clean
    run at truncation below the energy-resonance degree reports rh=None.
    """
    if kappa is None:
        kappa = kappa_integral(result)
    c = result.constants
    z1p, z2p = result.normal_form[0], result.normal_form[1]
    r61 = _hsq_block(z1p, E1, P1, 6)
    r62 = _hsq_block(z1p, E2, P2, 6)
    sym = (
        _hsq_block(z2p, E2, P2, 6) == _swap_keys(r61)
        and _hsq_block(z2p, E1, P1, 6) == _swap_keys(r62)
    )

    kappa7 = _param_sq_block(kappa.kappa, P1)
    k2 = _param_sq_block(kappa.kappa, P2)
    sym = sym and k2 == {z: -v for z, v in _swap_keys(kappa7).items()}

    from .families import RH as _RH

    rh, pref1 = _scaled_family(result.normal_form[3], 9, _RH)
    pref1_num = pref2_num = math.nan
    if rh is not None:
        swapped = _swap_keys(_RH)
        rh2, pref2 = _scaled_family(result.normal_form[4], 9, swapped)
        sym = sym and rh2 == swapped
        pref1_num = sum(
            float(v) * c.a1_cbrt**g1 * c.a2_cbrt**g2
            for (g1, g2), v in pref1.items()
        )
        pref2_num = sum(
            float(v) * c.a1_cbrt**g1 * c.a2_cbrt**g2
            for (g1, g2), v in pref2.items()
        )
    return FamilyReport(
        r61=r61,
        r62=r62,
        kappa7=kappa7,
        rh=rh,
        rh_prefactor_1=pref1_num,
        rh_prefactor_2=pref2_num,
        exchange_symmetric=sym,
    )


def rotate_pi4(vf: list[Poly], max_degree: int | None = None) -> list[Poly]:
    """Rewrite a field in the diagonal frame zt1 = (z1+z2)/2, zt2 = (z1-z2)/2.

    The returned components are functions of (zt1, zt2) stored in the z1-
    and z2-slots; non-z components transform by substitution only.
    """
    ring = vf[0].ring
    zt1, zt2 = ring.var(Z1), ring.var(Z2)
    sub = {Z1: zt1 + zt2, Z2: zt1 - zt2}
    substituted = [f.subs(sub, max_degree) for f in vf]
    out = list(substituted)
    out[0] = (substituted[0] + substituted[1]).scale(Fraction(1, 2))
    out[1] = (substituted[0] - substituted[1]).scale(Fraction(1, 2))
    return out


def rotate_scalar_pi4(f: Poly, max_degree: int | None = None) -> Poly:
    """Scalar version of :func:`rotate_pi4` (substitution only)."""
    ring = f.ring
    zt1, zt2 = ring.var(Z1), ring.var(Z2)
    return f.subs({Z1: zt1 + zt2, Z2: zt1 - zt2}, max_degree)


def swap_z(f: Poly) -> Poly:
    """Exchange the two z-slots of every monomial."""
    return Poly(
        f.ring,
        {(k[1], k[0]) + k[2:]: c for k, c in f.terms.items()},
    )
