"""Semilinear module structures: actions, the etale test, monoidal operations.

An action generator s carries a ring endomorphism phi_s and a matrix A_s;
the module map is v -> A_s * (phi_s applied entrywise to v).  Because every
supported endomorphism fixes the prime subring pointwise, each such map is
linear over the prime subring, and every fixed-point or equivariance
question flattens to a finite linear system there.  The flattening layer
at the bottom of this file is shared with the transfer machinery.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import CAPS
from .errors import (
    ActionMismatch,
    NotEtale,
    RingMismatch,
    SchemaError,
    SizeGuard,
    UnknownGenerator,
)
from .linalg import (
    hstack,
    identity_mat,
    kron,
    mat_coerce,
    mat_mul,
    mat_vec,
    transpose,
)
from .modules import (
    INF,
    CanonicalModule,
    ModuleHom,
    canonical_module,
    column_span_basis,
    exponents_from_json,
    exponents_to_json,
    hom_canonical,
    identity_hom,
    kernel_cokernel,
    relation_matrix,
    residue_rep,
    smith_decompose,
    solve_linear,
    tensor_canonical,
)
from .rings import (
    FiniteField,
    GaloisRing,
    PrimePower,
    TruncatedLaurent,
    apply_endo,
    check_endo_domain,
    el_from_json,
    el_to_json,
    endo_from_json,
    endo_on_level,
    endo_to_json,
    ring_from_json,
    ring_to_json,
)


class MonoidSpec:
    """Monoid generators acting on a ring, given by labeled endomorphisms.

    Words are free; declared commutation is checked on the ring rather
    than assumed.  Normal subsets name the generator sets eligible as
    the S' of invariants and descent.
    """

    def __init__(self, ring, generators, commuting_pairs=(), normal_subsets=None):
        self.ring = ring
        self.labels = []
        self.endos = {}
        for label, endo in generators:
            if label in self.endos:
                raise SchemaError("duplicate generator label %r" % label)
            check_endo_domain(ring, endo)
            self.labels.append(label)
            self.endos[label] = endo
        self.commuting_pairs = [tuple(p) for p in commuting_pairs]
        rng = random.Random(0)
        for a, b in self.commuting_pairs:
            ea, eb = self.endo_of(a), self.endo_of(b)
            for _ in range(32):
                x = ring.random_element(rng)
                lhs = apply_endo(ring, ea, apply_endo(ring, eb, x))
                rhs = apply_endo(ring, eb, apply_endo(ring, ea, x))
                if lhs != rhs:
                    raise ActionMismatch(
                        "generators %r and %r do not commute on the ring at %r"
                        % (a, b, x))
        self.normal_subsets = {str(k): tuple(v)
                               for k, v in (normal_subsets or {}).items()}
        for name, subset in self.normal_subsets.items():
            for label in subset:
                self.endo_of(label)

    def endo_of(self, label):
        if label not in self.endos:
            raise UnknownGenerator("no generator labeled %r" % label)
        return self.endos[label]

    def __eq__(self, other):
        return (isinstance(other, MonoidSpec)
                and self.ring == other.ring
                and self.labels == other.labels
                and self.endos == other.endos
                and self.commuting_pairs == other.commuting_pairs)

    def __hash__(self):
        return hash((self.ring, tuple(self.labels),
                     tuple(sorted(self.endos.items(), key=lambda kv: kv[0]))))


def endo_matrix_image(R, endo, M):
    return [[apply_endo(R, endo, x) for x in row] for row in M]


@dataclass
class LinearizedMap:
    label: object
    hom: ModuleHom


class SModule:
    """A canonical module with one semilinear action matrix per generator."""

    def __init__(self, monoid, base, actions):
        if base.ring != monoid.ring:
            raise RingMismatch("module and monoid live over different rings")
        self.monoid = monoid
        self.base = base
        R = base.ring
        acts = {}
        for label in monoid.labels:
            if label not in actions:
                raise UnknownGenerator("missing action matrix for %r" % label)
            # ModuleHom validates torsion compatibility and normalizes
            hom = ModuleHom(base, base, mat_coerce(R, actions[label]))
            acts[label] = hom.matrix
        extra = set(actions) - set(monoid.labels)
        if extra:
            raise UnknownGenerator("action matrices for unknown labels %s"
                                   % sorted(map(repr, extra)))
        self.actions = acts
        for a, b in monoid.commuting_pairs:
            A, B = acts[a], acts[b]
            ea, eb = monoid.endo_of(a), monoid.endo_of(b)
            lhs = mat_mul(R, A, endo_matrix_image(R, ea, B))
            rhs = mat_mul(R, B, endo_matrix_image(R, eb, A))
            if ModuleHom(base, base, lhs, check=False) != \
                    ModuleHom(base, base, rhs, check=False):
                raise ActionMismatch(
                    "action matrices for %r and %r do not commute" % (a, b))

    @property
    def ring(self):
        return self.base.ring

    def ngens(self):
        return self.base.ngens()

    def action(self, label):
        if label not in self.actions:
            raise UnknownGenerator("no generator labeled %r" % label)
        return self.actions[label]

    def apply_generator(self, label, v):
        R = self.ring
        endo = self.monoid.endo_of(label)
        w = [apply_endo(R, endo, x) for x in v]
        return mat_vec(R, self.action(label), w)

    def act(self, word, v):
        """Left-to-right composite: [s1, s2] maps v to A_s1 phi_s1(A_s2 phi_s2(v))."""
        out = [self.ring.el(x) for x in v]
        for label in reversed(list(word)):
            out = self.apply_generator(label, out)
        return out


def linearize(D, label):
    return LinearizedMap(label=label,
                         hom=ModuleHom(D.base, D.base, D.action(label), check=False))


def hom_inverse(hom):
    """Two-sided inverse of an isomorphism of canonical modules."""
    R = hom.source.ring
    n = hom.target.ngens()
    big = hstack(hom.matrix, relation_matrix(hom.target))
    cols = []
    for i in range(n):
        e = [R.zero()] * n
        e[i] = R.one()
        x = solve_linear(R, big, e, ncols=hom.source.ngens() + n)
        if x is None:
            raise NotEtale("map is not surjective, no inverse",
                           witness={"unreached": i})
        cols.append(x[:hom.source.ngens()])
    inv = ModuleHom(hom.target, hom.source,
                    [[cols[j][i] for j in range(n)]
                     for i in range(hom.source.ngens())])
    ident = identity_hom(hom.source)
    if inv.compose(hom) != ident or hom.compose(inv) != identity_hom(hom.target):
        raise NotEtale("inverse verification failed", witness=None)
    return inv


@dataclass
class EtaleReport:
    etale: bool
    inverses: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)


def check_etale(D):
    """Every linearization must be an isomorphism; witnesses either way."""
    inverses = {}
    failures = {}
    for label in D.monoid.labels:
        hom = linearize(D, label).hom
        out = kernel_cokernel(hom)
        if out.iso:
            inverses[label] = hom_inverse(hom)
        else:
            witness = None
            if out.kernel_gens:
                witness = {"kind": "kernel", "vector": out.kernel_gens[0]}
            elif out.cokernel_gens:
                witness = {"kind": "cokernel", "vector": out.cokernel_gens[0][0]}
            failures[label] = {"kernel": out.kernel, "cokernel": out.cokernel,
                               "witness": witness}
    return EtaleReport(etale=not failures, inverses=inverses, failures=failures)


def _sorted_product_basis(exps_in_product_order):
    """Stable permutation putting product-order exponents in canonical order."""
    order = sorted(range(len(exps_in_product_order)),
                   key=lambda i: exps_in_product_order[i], reverse=True)
    # order[k] = product index at sorted slot k
    place = [0] * len(order)
    for slot, idx in enumerate(order):
        place[idx] = slot
    return order, place


def _permute_action(R, K, place):
    n = len(K)
    out = [[R.zero()] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            out[place[a]][place[b]] = K[a][b]
    return out


def tensor_unit(monoid):
    """The unit object: the ring itself with every generator acting by 1."""
    base = canonical_module(monoid.ring, [INF])
    one = monoid.ring.one()
    return SModule(monoid, base, {label: [[one]] for label in monoid.labels})


def tensor_smod(D1, D2):
    """Tensor product: Kronecker action matrices in the sorted summand basis."""
    if D1.monoid != D2.monoid:
        raise RingMismatch("tensor factors live over different monoids")
    R = D1.ring
    prod_exps = [min(a, b) for a in D1.base.exps for b in D2.base.exps]
    order, place = _sorted_product_basis(prod_exps)
    base = canonical_module(R, prod_exps)
    assert base.exps == tuple(prod_exps[i] for i in order)
    actions = {}
    for label in D1.monoid.labels:
        K = kron(R, D1.action(label), D2.action(label))
        actions[label] = _permute_action(R, K, place)
    return SModule(D1.monoid, base, actions)


def internal_hom(D1, D2):
    """Internal Hom; needs D1 etale so the rule F -> B phi(F) A^{-1} closes.

    On the matrix-unit basis E[k][j] (k a D2 generator, j a D1 generator)
    the action matrix is the Kronecker form B tensor (A^{-1})^T, sorted
    into the canonical summand order of the hom module.
    """
    if D1.monoid != D2.monoid:
        raise RingMismatch("hom arguments live over different monoids")
    report = check_etale(D1)
    if not report.etale:
        bad = sorted(report.failures)[0]
        raise NotEtale("internal hom needs an etale first argument",
                       witness={"generator": bad,
                                "failure": report.failures[bad]["witness"]})
    R = D1.ring
    s = D1.ngens()
    t = D2.ngens()
    prod_exps = [min(D1.base.exps[j], D2.base.exps[k])
                 for k in range(t) for j in range(s)]
    order, place = _sorted_product_basis(prod_exps)
    base = canonical_module(R, prod_exps)
    actions = {}
    for label in D1.monoid.labels:
        Ainv = report.inverses[label].matrix
        K = kron(R, D2.action(label), transpose(Ainv, ncols=s))
        actions[label] = _permute_action(R, K, place)
    return SModule(D1.monoid, base, actions), order


def hom_entry_layout(D1, D2):
    """Index map: product slot k*s + j <-> matrix entry (k, j)."""
    s = D1.ngens()
    t = D2.ngens()
    return [(k, j) for k in range(t) for j in range(s)]


def check_relations(D, samples=16):
    """Report-only verification of commutation and semilinearity."""
    R = D.ring
    rng = random.Random(0)
    problems = []
    for a, b in D.monoid.commuting_pairs:
        A, B = D.action(a), D.action(b)
        ea, eb = D.monoid.endo_of(a), D.monoid.endo_of(b)
        lhs = mat_mul(R, A, endo_matrix_image(R, ea, B))
        rhs = mat_mul(R, B, endo_matrix_image(R, eb, A))
        if ModuleHom(D.base, D.base, lhs, check=False) != \
                ModuleHom(D.base, D.base, rhs, check=False):
            problems.append({"kind": "commutation", "pair": (a, b)})
    eff = D.base.eff_exps()
    for label in D.monoid.labels:
        endo = D.monoid.endo_of(label)
        for _ in range(samples):
            v = [R.random_element(rng) for _ in range(D.ngens())]
            c = R.random_element(rng)
            lhs = D.apply_generator(label, [R.mul(c, x) for x in v])
            fc = apply_endo(R, endo, c)
            rhs = [R.mul(fc, x) for x in D.apply_generator(label, v)]
            for i, e in enumerate(eff):
                if residue_rep(R, R.sub(lhs[i], rhs[i]), e) != R.zero():
                    problems.append({"kind": "semilinearity", "generator": label})
                    break
            else:
                continue
            break
    return {"ok": not problems, "problems": problems}


# ---------------------------------------------------------------------------
# devissage restriction

@dataclass
class RestrictedStructures:
    power: int
    image: SModule
    torsion: SModule
    subquotients: list


def _r_unit_of(R, endo):
    """The unit u with phi(r) = u * r; errors if the valuation moves."""
    r = R.r_el()
    img = apply_endo(R, endo, r)
    u, k = R.r_split(img)
    if k != 1:
        raise ActionMismatch(
            "endomorphism does not preserve the devissage ideal: val %d" % k)
    return u


def restrict_devissage(D, n):
    """Induced actions on r^n D, D[r^n], and all graded residue subquotients.

    On r^n D the action picks up the twist u^n where phi(r) = u r; on the
    torsion piece each generator scales by u to its own r-exponent.  The
    subquotients list gives the residue-level action at every grade,
    which is what the etale-by-levels criterion consumes.
    """
    from .modules import graded_pieces

    R = D.ring
    bound = R.bound()
    gp = graded_pieces(D.base, n)

    keep_img = [i for i, e in enumerate(D.base.exps)
                if (bound if e == INF else e) > n]
    img_ring = gp.image.ring
    img_actions = {}
    img_endos = []
    for label in D.monoid.labels:
        endo = D.monoid.endo_of(label)
        u = _r_unit_of(R, endo) if n else R.one()
        un = R.pow_el(u, n)
        A = D.action(label)
        lvl = img_ring.bound()
        sub = [[R.reduce_to_level(R.mul(un, A[i][j]), lvl)
                for j in keep_img] for i in keep_img]
        img_actions[label] = sub
        img_endos.append((label, endo_on_level(R, endo, lvl)))
    img_monoid = MonoidSpec(img_ring, img_endos,
                            commuting_pairs=D.monoid.commuting_pairs)
    # generator order matches graded_pieces: kept indices in module order
    image = _smodule_in_graded_order(img_monoid, D, keep_img, n, img_actions)

    keep_tor = [i for i, e in enumerate(D.base.exps)
                if e != INF and min(e, n) > 0]
    tor_ring = gp.torsion.ring
    tor_actions = {}
    tor_endos = []
    mexp = {i: max(0, (D.base.exps[i] if D.base.exps[i] != INF else bound) - n)
            for i in keep_tor}
    for label in D.monoid.labels:
        endo = D.monoid.endo_of(label)
        u = _r_unit_of(R, endo) if any(mexp.values()) else R.one()
        A = D.action(label)
        lvl = tor_ring.bound()
        r = R.r_el()
        sub = []
        for i in keep_tor:
            row = []
            for j in keep_tor:
                # A[i][j] r^(m_j) e_i expressed on the generator r^(m_i) e_i
                c = R.mul(A[i][j], R.pow_el(r, mexp[j]))
                c = R.r_shift_down(c, mexp[i])
                c = R.mul(c, R.pow_el(u, mexp[j]))
                row.append(R.reduce_to_level(c, lvl))
            sub.append(row)
        tor_actions[label] = sub
        tor_endos.append((label, endo_on_level(R, endo, lvl)))
    tor_monoid = MonoidSpec(tor_ring, tor_endos,
                            commuting_pairs=D.monoid.commuting_pairs)
    tor_exps = [min(D.base.exps[i], n) for i in keep_tor]
    tor_base = CanonicalModule(ring=tor_ring,
                               exps=tuple(INF if e >= tor_ring.bound() else e
                                          for e in tor_exps))
    torsion = SModule(tor_monoid, tor_base, tor_actions)

    return RestrictedStructures(power=n, image=image, torsion=torsion,
                                subquotients=residue_subquotients(D))


def _smodule_in_graded_order(monoid, D, keep, n, actions):
    ring = monoid.ring
    exps = []
    for i in keep:
        e = D.base.exps[i]
        ne = INF if e == INF else e - n
        exps.append(INF if ne == INF or ne >= ring.bound() else ne)
    base = CanonicalModule(ring=ring, exps=tuple(exps))
    return SModule(monoid, base, actions)


def residue_subquotients(D):
    """The action induced on each r^n D / r^(n+1) D over the residue ring.

    Grade n keeps the generators of effective exponent > n; the matrix is
    the residue of u^n A on those generators, u the r-unit of each endo.
    """
    R = D.ring
    bound = R.bound()
    res_ring = R.level_ring(1)
    out = []
    units = {label: _r_unit_of(R, D.monoid.endo_of(label))
             for label in D.monoid.labels}
    res_endos = [(label, endo_on_level(R, D.monoid.endo_of(label), 1))
                 for label in D.monoid.labels]
    res_monoid = MonoidSpec(res_ring, res_endos,
                            commuting_pairs=D.monoid.commuting_pairs)
    for n in range(bound):
        keep = [i for i, e in enumerate(D.base.exps)
                if (bound if e == INF else e) > n]
        actions = {}
        for label in D.monoid.labels:
            un = R.pow_el(units[label], n)
            A = D.action(label)
            actions[label] = [[R.reduce_to_level(R.mul(un, A[i][j]), 1)
                               for j in keep] for i in keep]
        base = canonical_module(res_ring, [1] * len(keep))
        out.append(SModule(res_monoid, base, actions))
    return out


def etale_by_levels(D):
    """The devissage criterion: etale iff every residue subquotient is."""
    return all(check_etale(Q).etale for Q in residue_subquotients(D))


# ---------------------------------------------------------------------------
# prime-subring flattening and semilinear solving

class FlatModule:
    """A canonical module rewritten over its prime subring.

    For p-split rings every prime coordinate of a generator inherits the
    generator's exponent; for X-split windows only the coordinates below
    the exponent survive, free over the residue prime field.  to_flat and
    from_flat convert carrier vectors; from_flat uses canonical zero fill
    on dropped coordinates.
    """

    def __init__(self, M):
        R = M.ring
        self.carrier = M
        self.ring = R
        Rp = R.prime_ring()
        self.rp = Rp
        beta = R.prime_rank()
        self.beta = beta
        self.x_split = isinstance(R, TruncatedLaurent)
        exps = []
        self.keep = []
        eff = M.eff_exps()
        if self.x_split:
            window = R.window
            for e in eff:
                kept = []
                for c in range(beta):
                    # t-major layout: coordinate c = j * window + ix
                    ix = c % window
                    if ix < e:
                        kept.append(c)
                        exps.append(INF)
                self.keep.append(kept)
        else:
            for orig in M.exps:
                for c in range(beta):
                    exps.append(INF if orig == INF else orig)
                self.keep.append(list(range(beta)))
        self.module = canonical_module(Rp, exps)
        self.nflat = len(exps)
        self.offsets = []
        pos = 0
        for kept in self.keep:
            self.offsets.append(pos)
            pos += len(kept)

    def to_flat(self, v):
        R = self.ring
        out = []
        for i, kept in enumerate(self.keep):
            vec = R.to_prime_vec(R.el(v[i]))
            out.extend(vec[c] for c in kept)
        return out

    def from_flat(self, w):
        R = self.ring
        out = []
        for i, kept in enumerate(self.keep):
            vec = [0] * self.beta
            for pos, c in enumerate(kept):
                vec[c] = w[self.offsets[i] + pos]
            out.append(R.from_prime_vec(vec))
        return out

    def relation_columns(self):
        """Ambient relation vectors of the flat carrier (torsion only)."""
        Rp = self.rp
        cols = []
        bound = Rp.bound()
        r = Rp.r_el()
        for i, e in enumerate(self.module.eff_exps()):
            if e >= bound:
                continue
            col = [Rp.zero()] * self.nflat
            col[i] = Rp.pow_el(r, e)
            cols.append(col)
        return cols

    def flat_matrix(self, fn):
        """Matrix over the prime ring of an additive carrier self-map."""
        cols = []
        for c in range(self.nflat):
            w = [self.rp.zero()] * self.nflat
            w[c] = self.rp.one()
            cols.append(self.to_flat(fn(self.from_flat(w))))
        return [[cols[c][i] for c in range(self.nflat)] for i in range(self.nflat)]


def reduce_flat(flat, vec):
    """Canonical representative of a flat vector modulo the carrier torsion."""
    Rp = flat.rp
    return [residue_rep(Rp, x, e)
            for x, e in zip(vec, flat.module.eff_exps())]


def solve_additive_kernel(flat, maps, cap=None):
    """Canonical generators of the joint kernel of additive carrier maps.

    maps: list of functions on carrier vectors (must be well defined on
    the quotient).  Returns Howell-normalized flat vectors including the
    torsion closure, with vectors that vanish on the carrier dropped.
    """
    cap = CAPS["equivariant_dim"] if cap is None else cap
    if flat.nflat * max(1, len(maps)) > cap:
        raise SizeGuard("flattened system is too large",
                        dim=flat.nflat * max(1, len(maps)), cap=cap)
    Rp = flat.rp
    if flat.nflat == 0:
        return []
    stacked = []
    for fn in maps:
        stacked.extend(flat.flat_matrix(fn))
    src = canonical_module(Rp, [INF] * flat.nflat)
    tgt_exps = list(flat.module.exps) * len(maps)
    tgt = CanonicalModule(ring=Rp, exps=tuple(tgt_exps))
    if not maps:
        gens = [[Rp.one() if i == c else Rp.zero() for i in range(flat.nflat)]
                for c in range(flat.nflat)]
    else:
        hom = ModuleHom(src, tgt, stacked, check=False)
        gens = kernel_cokernel(hom).kernel_gens
    gens = [list(g) for g in gens] + flat.relation_columns()
    basis = column_span_basis(Rp, gens, flat.nflat)
    out = []
    z = Rp.zero()
    for v in basis:
        if any(x != z for x in reduce_flat(flat, v)):
            out.append(v)
    return out


def semilinear_fixed_points(D, labels=None, cap=None):
    """Flat basis of {v : A_s phi_s(v) = v for all chosen generators}."""
    labels = list(D.monoid.labels) if labels is None else list(labels)
    R = D.ring
    flat = FlatModule(D.base)
    maps = []
    for label in labels:
        endo = D.monoid.endo_of(label)
        A = D.action(label)

        def T(v, endo=endo, A=A):
            w = [apply_endo(R, endo, x) for x in v]
            w = mat_vec(R, A, w)
            return [R.sub(a, b) for a, b in zip(w, v)]

        maps.append(T)
    return flat, solve_additive_kernel(flat, maps, cap=cap)


# ---------------------------------------------------------------------------
# equivariant homs

@dataclass
class EquivariantHoms:
    flat: FlatModule
    flat_basis: list
    homs: list


def _hom_carrier_layout(D1, D2):
    """The hom space as a canonical module with embedding data.

    Summand (k, j) holds maps sending source generator j to multiples of
    target generator k; its exponent is min of the two effective
    exponents, embedded as r^(need) times a residue representative.
    """
    R = D1.ring
    se = D1.base.eff_exps()
    te = D2.base.eff_exps()
    exps = []
    needs = []
    for k in range(D2.ngens()):
        for j in range(D1.ngens()):
            need = max(0, te[k] - se[j])
            needs.append(need)
            exps.append(min(se[j], te[k]))
    bound = R.bound()
    carrier = CanonicalModule(ring=R,
                              exps=tuple(INF if e >= bound else e for e in exps))
    return carrier, needs


def _entries_to_matrix(D1, D2, vec, needs):
    R = D1.ring
    r = R.r_el()
    s = D1.ngens()
    out = []
    for k in range(D2.ngens()):
        row = []
        for j in range(s):
            idx = k * s + j
            row.append(R.mul(R.pow_el(r, needs[idx]), vec[idx]))
        out.append(row)
    return out


def _matrix_to_entries(D1, D2, M, needs):
    R = D1.ring
    s = D1.ngens()
    out = []
    for k in range(D2.ngens()):
        for j in range(s):
            out.append(R.r_shift_down(M[k][j], needs[k * s + j]))
    return out


def equivariant_homs(D1, D2, cap=None):
    """Generating set of the S-equivariant maps D1 -> D2.

    Solves B_s phi_s(F) = F A_s over the prime subring on the flattened
    hom carrier; the returned ModuleHoms are the canonical basis vectors
    read back as matrices.
    """
    if D1.monoid != D2.monoid:
        raise RingMismatch("equivariant homs need a shared monoid")
    R = D1.ring
    carrier, needs = _hom_carrier_layout(D1, D2)
    flat = FlatModule(carrier)
    maps = []
    for label in D1.monoid.labels:
        endo = D1.monoid.endo_of(label)
        A = D1.action(label)
        B = D2.action(label)

        def T(vec, endo=endo, A=A, B=B):
            F = _entries_to_matrix(D1, D2, vec, needs)
            lhs = mat_mul(R, B, endo_matrix_image(R, endo, F))
            rhs = mat_mul(R, F, A)
            diff = [[R.sub(a, b) for a, b in zip(ra, rb)]
                    for ra, rb in zip(lhs, rhs)]
            return _matrix_to_entries(D1, D2, diff, needs)

        maps.append(T)
    basis = solve_additive_kernel(flat, maps, cap=cap)
    homs = []
    for v in basis:
        F = _entries_to_matrix(D1, D2, flat.from_flat(v), needs)
        homs.append(ModuleHom(D1.base, D2.base, F))
    return EquivariantHoms(flat=flat, flat_basis=basis, homs=homs)


# ---------------------------------------------------------------------------
# random instances (shared by tests and the self-test command)

def random_smodule(monoid, exps, rng, tries=64):
    """A random well-formed SModule with the stated exponents."""
    R = monoid.ring
    base = canonical_module(R, exps)
    n = base.ngens()
    eff = base.eff_exps()
    r = R.r_el()
    actions = {}
    for label in monoid.labels:
        M = []
        for i in range(n):
            row = []
            for j in range(n):
                need = max(0, eff[i] - eff[j])
                row.append(R.mul(R.pow_el(r, need), R.random_element(rng)))
            M.append(row)
        actions[label] = M
    return SModule(monoid, base, actions)


def random_etale_smodule(monoid, exps, rng, tries=256):
    """Rejection-sample until every action matrix linearizes invertibly."""
    for _ in range(tries):
        D = random_smodule(monoid, exps, rng)
        if check_etale(D).etale:
            return D
    raise NotEtale("no etale instance found within the sampling budget")


# ---------------------------------------------------------------------------
# JSON forms

def monoid_to_json(M):
    out = {
        "ring": ring_to_json(M.ring),
        "generators": [{"label": label, "endo": endo_to_json(M.ring, M.endos[label])}
                       for label in M.labels],
    }
    if M.commuting_pairs:
        out["commuting_pairs"] = [list(p) for p in M.commuting_pairs]
    if M.normal_subsets:
        out["normal_subsets"] = {k: list(v) for k, v in M.normal_subsets.items()}
    return out


def monoid_from_json(obj, caps=None):
    if not isinstance(obj, dict):
        raise SchemaError("monoid must be an object")
    unknown = set(obj) - {"ring", "generators", "commuting_pairs", "normal_subsets"}
    if unknown:
        raise SchemaError("unknown monoid fields: %s" % sorted(unknown))
    if "ring" not in obj or "generators" not in obj:
        raise SchemaError("monoid needs ring and generators")
    R = ring_from_json(obj["ring"], caps=caps)
    gens = []
    if not isinstance(obj["generators"], list) or not obj["generators"]:
        raise SchemaError("generators must be a nonempty list")
    for g in obj["generators"]:
        if not isinstance(g, dict) or set(g) != {"label", "endo"}:
            raise SchemaError("each generator needs exactly label and endo")
        if not isinstance(g["label"], str):
            raise SchemaError("generator labels must be strings")
        gens.append((g["label"], endo_from_json(R, g["endo"])))
    pairs = obj.get("commuting_pairs", [])
    if not isinstance(pairs, list) or any(
            not isinstance(p, list) or len(p) != 2 for p in pairs):
        raise SchemaError("commuting_pairs must be a list of label pairs")
    subsets = obj.get("normal_subsets", {})
    if not isinstance(subsets, dict):
        raise SchemaError("normal_subsets must be an object")
    return MonoidSpec(R, gens, commuting_pairs=[tuple(p) for p in pairs],
                      normal_subsets=subsets)


def smodule_to_json(D):
    R = D.ring
    return {
        "monoid": monoid_to_json(D.monoid),
        "module": exponents_to_json(D.base),
        "actions": {label: [[el_to_json(R, x) for x in row]
                            for row in D.action(label)]
                    for label in D.monoid.labels},
        "convention": "A-phi",
    }


def smodule_from_json(obj, caps=None):
    if not isinstance(obj, dict):
        raise SchemaError("smodule must be an object")
    unknown = set(obj) - {"monoid", "module", "actions", "convention"}
    if unknown:
        raise SchemaError("unknown smodule fields: %s" % sorted(unknown))
    for key in ("monoid", "module", "actions", "convention"):
        if key not in obj:
            raise SchemaError("smodule needs %s" % key)
    if obj["convention"] != "A-phi":
        raise SchemaError("unsupported action convention %r" % (obj["convention"],))
    monoid = monoid_from_json(obj["monoid"], caps=caps)
    base = exponents_from_json(obj["module"], caps=caps)
    if base.ring != monoid.ring:
        raise RingMismatch("module ring disagrees with the monoid ring")
    if not isinstance(obj["actions"], dict):
        raise SchemaError("actions must be an object")
    R = monoid.ring
    n = base.ngens()
    actions = {}
    for label, mat in obj["actions"].items():
        if not isinstance(mat, list) or len(mat) != n or any(
                not isinstance(row, list) or len(row) != n for row in mat):
            raise SchemaError("action matrix for %r has the wrong shape" % label)
        actions[label] = [[el_from_json(R, x) for x in row] for row in mat]
    return SModule(monoid, base, actions)
