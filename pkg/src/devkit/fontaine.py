"""Correspondence between Galois representations and Frobenius modules.

Both directions run through a common unramified extension tower.  A
Frobenius module becomes a representation by solving the Frobenius
equation at the smallest tower level where the solution space has the
module's full size; the Galois generator then acts on that solution
basis.  A representation comes back by solving the Galois-generator
equation on tower ⊗ V, with Frobenius as the leftover action.  Either
way the heavy lifting is the invariants machinery: one generator set is
solved, the other becomes the residual action on the basis.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import (
    ExtensionBudgetExceeded,
    NotEtale,
    RingMismatch,
    SchemaError,
)
from .linalg import identity_mat, mat_coerce
from .modules import (
    INF,
    CanonicalModule,
    ModuleHom,
    exponents_from_json,
    exponents_to_json,
    kernel_cokernel,
)
from .rings import (
    FieldFrobenius,
    FiniteField,
    GaloisRing,
    Identity,
    PrimePower,
    WittFrobenius,
    el_from_json,
    el_to_json,
    embedding_morphism,
    lex_min_irreducible,
)
from .semilinear import MonoidSpec, SModule, check_etale, equivariant_homs
from .transfer import devissage_descent, extend_scalars, invariants

PHI = "phi"
SIGMA = "sigma"


@dataclass
class TowerBudget:
    """Search limits: tower height and the iso-search enumeration cap."""

    max_level: int = 12
    iso_cap: int = 4096

    def __post_init__(self):
        if not isinstance(self.max_level, int) or self.max_level < 1:
            raise SchemaError("tower budget must be a positive integer")
        if not isinstance(self.iso_cap, int) or self.iso_cap < 1:
            raise SchemaError("iso search cap must be a positive integer")


def _as_budget(budget):
    if budget is None:
        return TowerBudget()
    if isinstance(budget, TowerBudget):
        return budget
    return TowerBudget(max_level=budget)


def coefficient_shape(R):
    """(p, precision N, residue degree d) of an unramified coefficient ring."""
    if isinstance(R, PrimePower):
        return R.p, R.N, 1
    if isinstance(R, FiniteField):
        return R.p, 1, R.d
    if isinstance(R, GaloisRing):
        return R.p, R.N, R.d
    raise RingMismatch("%s is not an unramified coefficient ring" % R.describe())


def std_frobenius(R, e=1):
    """The canonical p^e-power Frobenius descriptor on a coefficient ring."""
    if isinstance(R, FiniteField):
        return FieldFrobenius(e)
    if isinstance(R, (GaloisRing, PrimePower)):
        return WittFrobenius(e)
    raise RingMismatch("%s has no standard Frobenius" % R.describe())


def tower_ring(p, N, deg):
    """The canonical degree-deg unramified extension of Z/p^N."""
    if deg == 1:
        return PrimePower(p, N)
    f = lex_min_irreducible(p, deg)
    if N == 1:
        return FiniteField(p, f)
    return GaloisRing(p, N, f)


def _field_tower(p, deg):
    """Degree-deg extension of F_p in its field descriptor.

    Mod p the two degree-one descriptors name the same ring; towers are
    built in field form so that every level embeds into the next.
    """
    return FiniteField(p, lex_min_irreducible(p, deg))


def _swap_prime_descriptor(D, target):
    """Move a one-generator module between the two descriptors of F_p."""
    R = D.ring
    if R == target:
        return D
    if isinstance(R, FiniteField) and isinstance(target, PrimePower):
        def conv(x):
            return int(x[0])
    elif isinstance(R, PrimePower) and isinstance(target, FiniteField):
        def conv(x):
            return (int(x) % target.p,)
    else:
        raise RingMismatch("no descriptor swap %s -> %s"
                           % (R.describe(), target.describe()))
    monoid = MonoidSpec(target, [(PHI, std_frobenius(target, 1))])
    base = CanonicalModule(ring=target, exps=D.base.exps)
    act = [[conv(x) for x in row] for row in D.action(PHI)]
    return SModule(monoid, base, {PHI: act})


def _pointwise_identity(R, endo):
    if isinstance(endo, Identity):
        return True
    if isinstance(R, PrimePower) and isinstance(endo, WittFrobenius):
        return True
    if isinstance(R, FiniteField) and isinstance(endo, FieldFrobenius):
        return endo.e % R.d == 0
    if isinstance(R, GaloisRing) and isinstance(endo, WittFrobenius):
        return endo.e % R.d == 0
    return False


def standard_phi_module(D):
    """Validate and rewrap a Frobenius module in standard form.

    The module must have the single generator label "phi" acting through
    the p-power Frobenius (any descriptor that is pointwise the same map
    is accepted and normalized, e.g. Identity over Z/p^N).
    """
    if list(D.monoid.labels) != [PHI]:
        raise SchemaError('a Frobenius module has exactly one generator "phi"')
    R = D.ring
    p, N, d = coefficient_shape(R)
    endo = D.monoid.endo_of(PHI)
    std = std_frobenius(R, 1)
    if endo != std and not (d == 1 and _pointwise_identity(R, endo)):
        raise SchemaError("the phi generator must be the p-power Frobenius")
    monoid = MonoidSpec(R, [(PHI, std)])
    return SModule(monoid, D.base, {PHI: D.action(PHI)})


class GaloisRep:
    """A linear representation of the profinite Frobenius over Z/p^N.

    The single topological generator acts by an invertible module map on
    a canonical module; exponents are kept in descending order so the
    matrix indexing matches the module convention.
    """

    def __init__(self, ring, base, frob):
        if not isinstance(ring, PrimePower):
            raise SchemaError("representations live over Z/p^N")
        if base.ring != ring:
            raise RingMismatch("carrier ring disagrees with the stated ring")
        if list(base.exps) != sorted(base.exps, reverse=True):
            raise SchemaError("representation exponents must be descending")
        for e in base.exps:
            if e != INF and not 1 <= e < ring.N:
                raise SchemaError(
                    "finite exponents must lie strictly below the precision")
        if not isinstance(frob, ModuleHom):
            frob = ModuleHom(base, base, mat_coerce(ring, frob))
        if frob.source != base or frob.target != base:
            raise RingMismatch("frob must be an endomorphism of the carrier")
        out = kernel_cokernel(frob)
        if not out.iso:
            raise NotEtale("the Galois generator must act invertibly",
                           witness={"kernel": [list(map(str, g))
                                               for g in out.kernel_gens]})
        self.ring = ring
        self.base = base
        self.frob = frob

    def ngens(self):
        return self.base.ngens()

    def __eq__(self, other):
        return (isinstance(other, GaloisRep)
                and self.ring == other.ring
                and self.base == other.base
                and self.frob == other.frob)


def rep_as_smodule(V):
    """The representation as a module with one linear generator "frob"."""
    monoid = MonoidSpec(V.ring, [("frob", Identity())])
    return SModule(monoid, V.base, {"frob": V.frob.matrix})


def _exp_multiset(exps):
    return tuple(sorted(exps, reverse=True))


def _exp_tokens(exps):
    return ["inf" if e == INF else e for e in exps]


def _size_key(exps):
    return (len(exps), sum(1 for e in exps if e == INF),
            sum(0 if e == INF else e for e in exps))


@dataclass
class LangSolution:
    """Accepted tower level for a semilinear fixed-point search."""

    level: int
    tower: object
    extended: SModule
    solved: tuple
    inv: object
    comparison_iso: bool
    certificate: object


def _tower_module(D, m):
    """Base change a standard module to tower level m, Galois label added."""
    R = D.ring
    p, N, d = coefficient_shape(R)
    T = R if m == 1 else tower_ring(p, N, d * m)
    a = embedding_morphism(R, T)
    E = extend_scalars(D, a)
    monoid = MonoidSpec(T, [(PHI, std_frobenius(T, 1)),
                            (SIGMA, std_frobenius(T, d))],
                        commuting_pairs=[(PHI, SIGMA)])
    n = D.ngens()
    return SModule(monoid, E.base,
                   {PHI: E.action(PHI), SIGMA: identity_mat(T, n)})


def _solve_at_level(E, solved, route):
    N = coefficient_shape(E.ring)[1]
    if route == "descent" or (route == "auto" and N > 1):
        return devissage_descent(E, solved)
    inv = invariants(E, solved)
    return inv, None


def lang_solve(D, budget=None, route="auto"):
    """Climb the tower until the fixed points reach the module's size.

    The fixed-point space is compared against the input's exponent
    multiset at each level; the first match wins.  For N > 1 the solve
    runs through descent unless route="direct" forces the one-shot
    solver.
    """
    from .transfer import comparison

    budget = _as_budget(budget)
    D = standard_phi_module(D)
    p, N, d = coefficient_shape(D.ring)
    if N == 1 and isinstance(D.ring, PrimePower):
        # mod p the tower climbs through field descriptors
        D = _swap_prime_descriptor(D, _field_tower(p, 1))
    report = check_etale(D)
    if not report.etale:
        raise NotEtale("the action matrix does not linearize invertibly",
                       witness=report.failures)
    want = _exp_multiset(D.base.exps)
    best_level, best_exps = None, None
    for m in range(1, budget.max_level + 1):
        E = _tower_module(D, m)
        result, cert = _solve_at_level(E, (PHI,), route)
        got = _exp_multiset(result.module.exps)
        if got == want:
            comp = comparison(E, result)
            return LangSolution(level=m, tower=E.ring, extended=E,
                                solved=(PHI,), inv=result,
                                comparison_iso=comp.iso, certificate=cert)
        if best_exps is None or _size_key(got) > _size_key(best_exps):
            best_level, best_exps = m, got
    raise ExtensionBudgetExceeded(
        "no tower level up to %d reaches the full exponent multiset"
        % budget.max_level,
        best_level=best_level, best_exponents=_exp_tokens(best_exps))


def module_to_rep(D, budget=None, route="auto"):
    """Fixed points up the tower, with the Galois generator as frob."""
    sol = lang_solve(D, budget=budget, route=route)
    frob = sol.inv.smodule.action(SIGMA)
    fixed = sol.inv.entry.fixed
    if isinstance(fixed, FiniteField):
        # solving phi over a field tower always lands in the prime field,
        # which the representation side names Z/p
        Zp = PrimePower(fixed.p, 1)
        base = CanonicalModule(ring=Zp, exps=sol.inv.module.exps)
        frob = [[int(x[0]) for x in row] for row in frob]
        rep = GaloisRep(Zp, base, frob)
    else:
        rep = GaloisRep(fixed, sol.inv.module, frob)
    return rep, sol


def rep_to_module(V, target, budget=None, route="auto"):
    """Solve the Galois equation on tower ⊗ V; Frobenius is what remains.

    The target names the coefficient ring of the output (its canonical
    presentation: the minimal polynomial must be the lexicographically
    first irreducible of its degree, which is what the fixed-subring
    table produces).
    """
    from .transfer import comparison

    budget = _as_budget(budget)
    p, N, d = coefficient_shape(target)
    if (V.ring.p, V.ring.N) != (p, N):
        raise RingMismatch("target ring has the wrong prime or precision")
    canonical = target == tower_ring(p, N, d) or (
        N == 1 and target == _field_tower(p, d))
    if not canonical:
        raise SchemaError("target must be in canonical presentation")
    k = V.ngens()
    want = _exp_multiset(V.base.exps)
    best_level, best_exps = None, None
    for m in range(1, budget.max_level + 1):
        T = _field_tower(p, d * m) if N == 1 else tower_ring(p, N, d * m)
        monoid = MonoidSpec(T, [(PHI, std_frobenius(T, 1)),
                                (SIGMA, std_frobenius(T, d))],
                            commuting_pairs=[(PHI, SIGMA)])
        # frob coefficients are integers mod p^N, which land in any tower
        # level through the canonical unit
        G = [[T.from_int(x) for x in row] for row in V.frob.matrix]
        base = CanonicalModule(ring=T, exps=V.base.exps)
        E = SModule(monoid, base, {PHI: identity_mat(T, k), SIGMA: G})
        result, cert = _solve_at_level(E, (SIGMA,), route)
        got = _exp_multiset(result.module.exps)
        if got == want:
            comp = comparison(E, result)
            D = result.smodule
            if isinstance(target, PrimePower) and isinstance(
                    D.ring, FiniteField):
                D = _swap_prime_descriptor(D, target)
            D = standard_phi_module(D)
            if not check_etale(D).etale:
                raise NotEtale("the residual Frobenius is not invertible")
            sol = LangSolution(level=m, tower=T, extended=E, solved=(SIGMA,),
                               inv=result, comparison_iso=comp.iso,
                               certificate=cert)
            return D, sol
        if best_exps is None or _size_key(got) > _size_key(best_exps):
            best_level, best_exps = m, got
    raise ExtensionBudgetExceeded(
        "no tower level up to %d recovers the representation's size"
        % budget.max_level,
        best_level=best_level, best_exponents=_exp_tokens(best_exps))


# ---------------------------------------------------------------------------
# explicit isomorphism search

def invertible_equivariant_map(D1, D2, cap=4096):
    """An invertible equivariant map D1 -> D2, or None.

    Invertibility only depends on the mod-p class of the coefficients,
    so enumerating F_p combinations of the equivariant basis is a
    complete search; past the cap it falls back to seeded sampling.
    """
    if _exp_multiset(D1.base.exps) != _exp_multiset(D2.base.exps):
        return None
    if D1.ngens() == 0:
        return ModuleHom(D1.base, D2.base, [])
    basis = equivariant_homs(D1, D2).homs
    k = len(basis)
    if k == 0:
        return None
    R = D1.ring
    p = R.p

    def combine(coeffs):
        mat = None
        for c, hom in zip(coeffs, basis):
            if c == 0:
                continue
            scaled = [[R.mul(R.from_int(c), x) for x in row]
                      for row in hom.matrix]
            if mat is None:
                mat = scaled
            else:
                mat = [[R.add(a, b) for a, b in zip(ra, rb)]
                       for ra, rb in zip(mat, scaled)]
        if mat is None:
            return None
        return ModuleHom(D1.base, D2.base, mat)

    if p ** k <= cap:
        coeff_sets = _all_coeffs(p, k)
    else:
        rng = random.Random(p * 1000 + k)
        coeff_sets = ([rng.randrange(p) for _ in range(k)]
                      for _ in range(cap))
    for coeffs in coeff_sets:
        hom = combine(coeffs)
        if hom is not None and kernel_cokernel(hom).iso:
            return hom
    return None


def _all_coeffs(p, k):
    total = p ** k
    for idx in range(1, total):
        out = []
        x = idx
        for _ in range(k):
            out.append(x % p)
            x //= p
        yield out


@dataclass
class RoundtripReport:
    direction: str
    ok: bool
    forward_level: int
    back_level: int
    exponents_match: bool
    comparisons: tuple
    iso: object
    rep: object
    module: object


def roundtrip_check(x, budget=None, target=None):
    """Run the two functors in both orders and exhibit the isomorphism."""
    budget = _as_budget(budget)
    if isinstance(x, GaloisRep):
        if target is None:
            target = PrimePower(x.ring.p, x.ring.N)
        D, sol_d = rep_to_module(x, target, budget=budget)
        V2, sol_v = module_to_rep(D, budget=budget)
        match = _exp_multiset(x.base.exps) == _exp_multiset(V2.base.exps)
        iso = invertible_equivariant_map(rep_as_smodule(x), rep_as_smodule(V2),
                                         cap=budget.iso_cap)
        return RoundtripReport(
            direction="rep", ok=match and iso is not None,
            forward_level=sol_d.level, back_level=sol_v.level,
            exponents_match=match,
            comparisons=(sol_d.comparison_iso, sol_v.comparison_iso),
            iso=iso, rep=V2, module=D)
    D = standard_phi_module(x)
    V, sol_v = module_to_rep(D, budget=budget)
    D2, sol_d = rep_to_module(V, D.ring, budget=budget)
    match = _exp_multiset(D.base.exps) == _exp_multiset(D2.base.exps)
    iso = invertible_equivariant_map(D, D2, cap=budget.iso_cap)
    return RoundtripReport(
        direction="module", ok=match and iso is not None,
        forward_level=sol_v.level, back_level=sol_d.level,
        exponents_match=match,
        comparisons=(sol_v.comparison_iso, sol_d.comparison_iso),
        iso=iso, rep=V, module=D2)


# ---------------------------------------------------------------------------
# JSON forms

def rep_to_json(V):
    return {
        "module": exponents_to_json(V.base),
        "frob": [[el_to_json(V.ring, x) for x in row]
                 for row in V.frob.matrix],
    }


def rep_from_json(obj, caps=None):
    if not isinstance(obj, dict):
        raise SchemaError("representation must be an object")
    unknown = set(obj) - {"module", "frob"}
    if unknown:
        raise SchemaError("unknown representation fields: %s" % sorted(unknown))
    for key in ("module", "frob"):
        if key not in obj:
            raise SchemaError("representation needs %s" % key)
    base = exponents_from_json(obj["module"], caps=caps)
    R = base.ring
    if not isinstance(R, PrimePower):
        raise SchemaError("representations live over Z/p^N")
    n = base.ngens()
    mat = obj["frob"]
    if not isinstance(mat, list) or len(mat) != n or any(
            not isinstance(row, list) or len(row) != n for row in mat):
        raise SchemaError("frob must be an %d x %d matrix" % (n, n))
    frob = [[el_from_json(R, x) for x in row] for row in mat]
    return GaloisRep(R, base, frob)
