"""Coinduction of rings and modules along submonoid inclusions.

Supported inclusions are finite-index subgroups and product submonoids
f_1 N x ... x f_d N inside N^d.  In both cases the maximal left cosets
partition the ambient monoid, so the coinduced object is the product of
one copy of the base object per coset representative, and an ambient
generator acts by permuting components with a twist through the
submonoid action whenever the step crosses back into the submonoid.
Listed relation quadruples (s1, s2, t1, t2) with s1 t1 = s2 t2 are kept
and enforced lazily; for the supported variants they reduce to
tautologies because the cosets are disjoint.
"""

from __future__ import annotations

import itertools

from .config import CAPS
from .errors import (
    ActionMismatch,
    NotEtale,
    NotSubtleFinite,
    RingMismatch,
    SchemaError,
    SizeGuard,
)
from .linalg import identity_mat, mat_coerce, mat_mul, mat_vec
from .modules import INF, CanonicalModule, ModuleHom, kernel_cokernel, residue_rep
from .rings import (
    FieldFrobenius,
    FiniteField,
    GaloisRing,
    Identity,
    PrimePower,
    TruncatedLaurent,
    WittFrobenius,
    apply_endo,
)




# ---------------------------------------------------------------------------
# submonoid data

class SubmonoidData:
    """A supported inclusion: f_1 N x ... x f_d N in N^d, or H inside G.

    Numeric reps are d-tuples in the modulus box, group reps are element
    indices into the multiplication table.  Pass maximal_reps to pin a
    transversal; leave it None to have enumerate_cosets compute the
    canonical one (box order, identity first).
    """

    def __init__(self, variant, moduli=None, table=None, subgroup=None,
                 maximal_reps=None, l_relations=None):
        if variant not in ("numeric", "group"):
            raise SchemaError("variant must be numeric or group")
        self.variant = variant
        self.maximal_reps = None if maximal_reps is None else [
            tuple(t) if variant == "numeric" else t for t in maximal_reps]
        self.l_relations = [] if l_relations is None else list(l_relations)
        if variant == "numeric":
            if table is not None or subgroup is not None:
                raise SchemaError("numeric data takes moduli only")
            moduli = tuple(moduli or ())
            if not moduli or any(not isinstance(f, int) or f < 1
                                 for f in moduli):
                raise SchemaError("moduli must be positive integers")
            if len(moduli) > CAPS["numeric_dims"]:
                raise SizeGuard("too many coordinates", dim=len(moduli),
                                cap=CAPS["numeric_dims"])
            if max(moduli) > CAPS["numeric_modulus"]:
                raise SizeGuard("modulus too large", dim=max(moduli),
                                cap=CAPS["numeric_modulus"])
            self.moduli = moduli
            self.table = None
            self.subgroup = None
        else:
            if moduli is not None:
                raise SchemaError("group data takes a table and a subgroup")
            self.moduli = None
            self.table = [list(row) for row in table]
            n = len(self.table)
            if n > CAPS["group_order"]:
                raise SizeGuard("group too large", dim=n,
                                cap=CAPS["group_order"])
            _check_group_table(self.table)
            self.subgroup = list(subgroup)
            _check_subgroup(self.table, self.subgroup)

    @property
    def d(self):
        return len(self.moduli)

    def order(self):
        return len(self.table)

    def identity(self):
        """The neutral element: the zero vector, or the table's identity."""
        if self.variant == "numeric":
            return (0,) * self.d
        return _table_identity(self.table)

    def ambient_labels(self):
        if self.variant == "numeric":
            return ["t%d" % (j + 1) for j in range(self.d)]
        return ["g%d" % g for g in range(len(self.table))]

    def sub_labels(self):
        if self.variant == "numeric":
            return ["s%d" % (j + 1) for j in range(self.d)]
        return ["h%d" % h for h in self.subgroup]


def _table_identity(table):
    n = len(table)
    for e in range(n):
        if all(table[e][g] == g and table[g][e] == g for g in range(n)):
            return e
    raise SchemaError("multiplication table has no identity")


def _check_group_table(table):
    n = len(table)
    for row in table:
        if len(row) != n or any(not isinstance(x, int) or not 0 <= x < n
                                for x in row):
            raise SchemaError("table rows must index back into the group")
    e = _table_identity(table)
    for a in range(n):
        if e not in table[a]:
            raise SchemaError("element %d has no inverse" % a)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if table[table[a][b]][c] != table[a][table[b][c]]:
                    raise SchemaError("multiplication table is not associative")


def _check_subgroup(table, subgroup):
    n = len(table)
    seen = set(subgroup)
    if len(seen) != len(subgroup):
        raise SchemaError("subgroup list repeats elements")
    if any(not isinstance(h, int) or not 0 <= h < n for h in subgroup):
        raise SchemaError("subgroup must list element indices")
    e = _table_identity(table)
    if e not in seen:
        raise SchemaError("subgroup must contain the identity")
    for a in subgroup:
        for b in subgroup:
            if table[a][b] not in seen:
                raise SchemaError("subgroup is not closed under the table")
    for a in subgroup:
        if not any(table[a][b] == e for b in subgroup):
            raise SchemaError("subgroup is not closed under inverses")


def _group_inverse(table, g):
    e = _table_identity(table)
    for x in range(len(table)):
        if table[g][x] == e:
            return x
    raise SchemaError("element %d has no inverse" % g)


class CosetCertificate:
    """Verified transversal plus the bound used for the cofinality search."""

    def __init__(self, reps, bound, identity_index):
        self.reps = list(reps)
        self.bound = bound
        self.identity_index = identity_index


def enumerate_cosets(data):
    """Compute or verify the maximal coset transversal.

    Numeric cosets are t + (f_1 N x ... x f_d N); the bounded search
    checks every point of [0, B)^d lies in a listed coset and raises
    NotSubtleFinite when one escapes.  Group cosets are Hg; the listed
    reps must hit every coset exactly once, with the subgroup's own
    coset represented by the identity.
    """
    if data.variant == "numeric":
        box = [tuple(t) for t in itertools.product(
            *[range(f) for f in data.moduli])]
        reps = data.maximal_reps if data.maximal_reps is not None else box
        if sorted(reps) != sorted(set(reps)):
            raise SchemaError("coset representatives repeat")
        for t in reps:
            if len(t) != data.d or any(not 0 <= t[i] < data.moduli[i]
                                       for i in range(data.d)):
                raise SchemaError("representative %r is not maximal" % (t,))
        bound = 2 * max(data.moduli)
        covered = {tuple(x[i] % data.moduli[i] for i in range(data.d))
                   for x in itertools.product(range(bound),
                                              repeat=data.d)}
        missing = covered - set(reps)
        if missing:
            raise NotSubtleFinite(
                "point %r of [0,%d)^%d lies in no listed coset"
                % (sorted(missing)[0], bound, data.d))
        _check_l_relations_numeric(data, reps)
        return CosetCertificate(reps, bound, reps.index(data.identity()))
    table = data.table
    n = len(table)
    sub = set(data.subgroup)
    cosets = {}
    for g in range(n):
        key = frozenset(table[h][g] for h in sub)
        cosets.setdefault(key, []).append(g)
    if data.maximal_reps is not None:
        reps = list(data.maximal_reps)
        if any(not isinstance(g, int) or not 0 <= g < n for g in reps):
            raise SchemaError("representatives must index into the group")
        keys = [frozenset(table[h][g] for h in sub) for g in reps]
        if len(set(keys)) != len(reps) or len(reps) != len(cosets):
            raise NotSubtleFinite("listed reps do not hit every coset once")
    else:
        e = _table_identity(table)
        reps = []
        for key in cosets:
            members = cosets[key]
            reps.append(e if e in members else min(members))
    e = _table_identity(table)
    identity_rep = next(g for g in reps
                        if frozenset(table[h][g] for h in sub) == frozenset(sub))
    if identity_rep != e:
        raise SchemaError("the subgroup coset must be represented by the identity")
    reps.sort()
    _check_l_relations_group(data, reps)
    return CosetCertificate(reps, n, reps.index(e))


def _check_l_relations_numeric(data, reps):
    rep_set = set(reps)
    for quad in data.l_relations:
        s1, s2, t1, t2 = (tuple(x) for x in quad)
        if tuple(t1) not in rep_set or tuple(t2) not in rep_set:
            raise SchemaError("relation endpoints must be representatives")
        for s in (s1, s2):
            if any(s[i] % data.moduli[i] != 0 or s[i] < 0
                   for i in range(data.d)):
                raise SchemaError("relation twists must lie in the submonoid")
        if tuple(a + b for a, b in zip(s1, t1)) != tuple(
                a + b for a, b in zip(s2, t2)):
            raise SchemaError("relation quadruple is not an equality")


def _check_l_relations_group(data, reps):
    table = data.table
    sub = set(data.subgroup)
    rep_set = set(reps)
    for quad in data.l_relations:
        s1, s2, t1, t2 = quad
        if t1 not in rep_set or t2 not in rep_set:
            raise SchemaError("relation endpoints must be representatives")
        if s1 not in sub or s2 not in sub:
            raise SchemaError("relation twists must lie in the subgroup")
        if table[s1][t1] != table[s2][t2]:
            raise SchemaError("relation quadruple is not an equality")


# ---------------------------------------------------------------------------
# endomorphism bookkeeping

def _endo_power(R, endo):
    """The p-power Frobenius exponent of a supported endomorphism."""
    if isinstance(endo, Identity):
        return 0
    if isinstance(R, FiniteField) and isinstance(endo, FieldFrobenius):
        return endo.e
    if isinstance(R, (PrimePower, GaloisRing)) and isinstance(
            endo, WittFrobenius):
        return endo.e
    raise RingMismatch("coinduction supports power-of-Frobenius actions only")


def _endo_order(R):
    if isinstance(R, PrimePower):
        return 1
    if isinstance(R, (FiniteField, GaloisRing)):
        return R.d
    raise RingMismatch("%s has no Frobenius bookkeeping" % R.describe())


def _norm_power(R, e):
    return e % _endo_order(R)


def _power_endo(R, e):
    """Canonical descriptor for the e-th power of Frobenius."""
    e = _norm_power(R, e)
    if e == 0:
        return Identity()
    if isinstance(R, FiniteField):
        return FieldFrobenius(e)
    return WittFrobenius(e)


def compose_endos(R, outer, inner):
    """The composite endomorphism, in canonical power form."""
    return _power_endo(R, _endo_power(R, outer) + _endo_power(R, inner))


def power_of_endo(R, endo, k):
    return _power_endo(R, k * _endo_power(R, endo))


class MonoidRing:
    """A coefficient ring with endomorphisms for a list of generators.

    Numeric data reads the j-th endo as the action of the j-th
    generator; group data reads one endo per listed element, in order.
    Endomorphisms are normalized to canonical Frobenius powers.
    """

    def __init__(self, ring, endos):
        self.ring = ring
        self.endos = [_power_endo(ring, _endo_power(ring, a)) for a in endos]

    def apply(self, idx, x):
        return apply_endo(self.ring, self.endos[idx], x)


def _check_group_ring_action(mr, data):
    table = data.table
    if len(mr.endos) != len(table):
        raise ActionMismatch("group action needs one endomorphism per element")
    e = _table_identity(table)
    if _endo_power(mr.ring, mr.endos[e]) != 0:
        raise ActionMismatch("the identity must act as the identity")
    powers = [_endo_power(mr.ring, a) for a in mr.endos]
    order = _endo_order(mr.ring)
    for a in range(len(table)):
        for b in range(len(table)):
            if (powers[a] + powers[b]) % order != powers[table[a][b]] % order:
                raise ActionMismatch("ring action is not multiplicative")


def _sub_ring_action(mr, data):
    """The submonoid's endomorphisms extracted from ambient data."""
    if data.variant == "numeric":
        if len(mr.endos) != data.d:
            raise ActionMismatch("numeric action needs one endo per coordinate")
        return [power_of_endo(mr.ring, mr.endos[j], data.moduli[j])
                for j in range(data.d)]
    _check_group_ring_action(mr, data)
    return [mr.endos[h] for h in data.subgroup]


# ---------------------------------------------------------------------------
# coinduced ring

class CoinducedRing:
    """Product of one base-ring copy per coset rep, with twisted shifts.

    Elements are tuples of base elements indexed like reps.  The ambient
    generator labeled by transitions[label] sends component t to the
    component at its source index, twisting through the stored
    endomorphism when the step wraps through the submonoid.
    """

    def __init__(self, base, data, sub_endos, certificate):
        self.base = base
        self.data = data
        self.sub_endos = list(sub_endos)
        self.reps = list(certificate.reps)
        self.identity_index = certificate.identity_index
        self.certificate = certificate
        self.transitions = _ring_transitions(base, data, self.sub_endos,
                                             self.reps)
        self.labels = list(self.transitions)

    def ncomponents(self):
        return len(self.reps)

    def describe(self):
        return "Coind(%s)^%d" % (self.base.describe(), len(self.reps))

    def el(self, parts):
        parts = tuple(parts)
        if len(parts) != len(self.reps):
            raise SchemaError("element needs one part per representative")
        return parts

    def zero(self):
        return (self.base.zero(),) * len(self.reps)

    def one(self):
        return (self.base.one(),) * len(self.reps)

    def add(self, x, y):
        return tuple(self.base.add(a, b) for a, b in zip(x, y))

    def mul(self, x, y):
        return tuple(self.base.mul(a, b) for a, b in zip(x, y))

    def neg(self, x):
        return tuple(self.base.neg(a) for a in x)

    def apply_generator(self, label, x):
        src, twist = self.transitions[label]
        return tuple(apply_endo(self.base, twist[t], x[src[t]])
                     for t in range(len(self.reps)))

    def sub_twist(self, s):
        """The composite endomorphism of a submonoid element."""
        if self.data.variant == "numeric":
            e = 0
            for j in range(self.data.d):
                q, r = divmod(s[j], self.data.moduli[j])
                if r != 0 or s[j] < 0:
                    raise SchemaError("%r is not in the submonoid" % (s,))
                e += q * _endo_power(self.base, self.sub_endos[j])
            return _power_endo(self.base, e)
        idx = self.data.subgroup.index(s)
        return self.sub_endos[idx]

    def check_constraints(self, x):
        """Lazily enforce the listed relation quadruples on one element."""
        for quad in self.data.l_relations:
            s1, s2, t1, t2 = quad
            if self.data.variant == "numeric":
                s1, s2, t1, t2 = (tuple(v) for v in quad)
            i1, i2 = self.reps.index(t1), self.reps.index(t2)
            lhs = apply_endo(self.base, self.sub_twist(s1), x[i1])
            rhs = apply_endo(self.base, self.sub_twist(s2), x[i2])
            if lhs != rhs:
                return False
        return True

    def enumerate_elements(self, cap=None):
        cap = CAPS["enumeration"] if cap is None else cap
        total = ring_size(self.base) ** len(self.reps)
        if total > cap:
            raise SizeGuard("enumeration too large", dim=total, cap=cap)
        parts = list(self.base.enumerate_elements())
        return [x for x in itertools.product(parts, repeat=len(self.reps))
                if self.check_constraints(x)]


def _ring_transitions(base, data, sub_endos, reps):
    out = {}
    if data.variant == "numeric":
        index = {t: i for i, t in enumerate(reps)}
        for j in range(data.d):
            src, twist = [], []
            for t in reps:
                stepped = list(t)
                stepped[j] += 1
                wrap = stepped[j] == data.moduli[j]
                if wrap:
                    stepped[j] = 0
                src.append(index[tuple(stepped)])
                twist.append(sub_endos[j] if wrap else Identity())
            out["t%d" % (j + 1)] = (src, twist)
        return out
    table = data.table
    sub = data.subgroup
    index = {g: i for i, g in enumerate(reps)}
    coset_rep = {}
    for g in range(len(table)):
        members = {table[h][g] for h in sub}
        coset_rep[g] = next(r for r in reps if r in members)
    for gp in range(len(table)):
        src, twist = [], []
        for t in reps:
            moved = table[t][gp]
            k = coset_rep[moved]
            h = table[moved][_group_inverse(table, k)]
            src.append(index[k])
            twist.append(sub_endos[sub.index(h)])
        out["g%d" % gp] = (src, twist)
    return out


def coinduce_ring(sub, data):
    """Coinduce an S-ring along the inclusion described by data.

    sub is a MonoidRing whose endos give the submonoid generators'
    action: d endos for numeric data, one per subgroup element for group
    data (identity must act trivially, composition must follow the
    table).
    """
    cert = enumerate_cosets(data)
    if data.variant == "numeric":
        if len(sub.endos) != data.d:
            raise ActionMismatch("numeric action needs one endo per coordinate")
        sub_endos = sub.endos
    else:
        if len(sub.endos) != len(data.subgroup):
            raise ActionMismatch(
                "group action needs one endomorphism per subgroup element")
        e = data.subgroup.index(_table_identity(data.table))
        if _endo_power(sub.ring, sub.endos[e]) != 0:
            raise ActionMismatch("the identity must act as the identity")
        order = _endo_order(sub.ring)
        powers = [_endo_power(sub.ring, a) for a in sub.endos]
        for i, a in enumerate(data.subgroup):
            for j, b in enumerate(data.subgroup):
                k = data.subgroup.index(data.table[a][b])
                if (powers[i] + powers[j]) % order != powers[k] % order:
                    raise ActionMismatch("ring action is not multiplicative")
        sub_endos = sub.endos
    return CoinducedRing(sub.ring, data, sub_endos, cert)


def ring_size(R):
    if isinstance(R, PrimePower):
        return R.p ** R.N
    if isinstance(R, FiniteField):
        return R.p ** R.d
    if isinstance(R, GaloisRing):
        return R.p ** (R.N * R.d)
    if isinstance(R, TruncatedLaurent):
        return ring_size(R.base) ** (R.high - R.low)
    raise RingMismatch("%s has unknown cardinality" % R.describe())


def _residue_count(R, e):
    if e == INF:
        return ring_size(R)
    if isinstance(R, PrimePower):
        return R.p ** min(e, R.N)
    if isinstance(R, FiniteField):
        return R.p ** (R.d if e >= 1 else 0)
    if isinstance(R, GaloisRing):
        return R.p ** (R.d * min(e, R.N))
    if isinstance(R, TruncatedLaurent):
        return ring_size(R.base) ** min(e, R.high - R.low)
    raise RingMismatch("%s has unknown cardinality" % R.describe())


def _residue_elements(R, e):
    out = []
    seen = set()
    for x in R.enumerate_elements():
        r = residue_rep(R, x, e)
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# block maps between component modules

class BlockMap:
    """A component-permuting semilinear map between coinduced carriers.

    Component t of the output is mat[t] applied to the twist[t]-image of
    input component src[t].  Twists are canonical Frobenius powers, so
    composites compare syntactically.
    """

    def __init__(self, ring, src, twists, mats):
        self.ring = ring
        self.src = list(src)
        self.twists = [_power_endo(ring, _endo_power(ring, a))
                       for a in twists]
        self.mats = [mat_coerce(ring, m) for m in mats]

    def apply(self, parts):
        R = self.ring
        out = []
        for t in range(len(self.src)):
            vec = [apply_endo(R, self.twists[t], x)
                   for x in parts[self.src[t]]]
            out.append(mat_vec(R, self.mats[t], vec))
        return out

    def __eq__(self, other):
        return (isinstance(other, BlockMap) and self.ring == other.ring
                and self.src == other.src and self.twists == other.twists
                and self.mats == other.mats)


def block_identity(ring, sizes):
    return BlockMap(ring, list(range(len(sizes))),
                    [Identity()] * len(sizes),
                    [identity_mat(ring, n) for n in sizes])


def block_compose(outer, inner):
    """outer after inner, twisting matrices through the outer endos."""
    R = outer.ring
    src, twists, mats = [], [], []
    for t in range(len(outer.src)):
        mid = outer.src[t]
        src.append(inner.src[mid])
        twists.append(compose_endos(R, outer.twists[t], inner.twists[mid]))
        twisted = [[apply_endo(R, outer.twists[t], x) for x in row]
                   for row in inner.mats[mid]]
        mats.append(mat_mul(R, outer.mats[t], twisted))
    return BlockMap(R, src, twists, mats)


def block_power(bmap, k, sizes):
    out = block_identity(bmap.ring, sizes)
    for _ in range(k):
        out = block_compose(bmap, out)
    return out


# ---------------------------------------------------------------------------
# coinduced modules

class CoinducedModule:
    """Componentwise module over a CoinducedRing with ambient action.

    Elements are lists of coordinate vectors, one per representative.
    actions[label] moves components exactly like the ring's transitions,
    with a matrix on top.
    """

    def __init__(self, ring, components, actions):
        self.ring = ring
        self.components = list(components)
        for M in self.components:
            if M.ring != ring.base:
                raise RingMismatch("components must live over the base ring")
        self.actions = dict(actions)
        for label, bmap in self.actions.items():
            if label not in ring.transitions:
                raise SchemaError("unknown ambient generator %r" % label)
            src, twist = ring.transitions[label]
            if bmap.src != src or bmap.twists != [
                    _power_endo(ring.base, _endo_power(ring.base, a))
                    for a in twist]:
                raise ActionMismatch(
                    "module action must shadow the ring transition")

    def sizes(self):
        return [M.ngens() for M in self.components]

    def apply(self, label, parts):
        return self.actions[label].apply(parts)

    def ev(self, parts):
        """Evaluation at the identity representative."""
        return list(parts[self.ring.identity_index])

    def etale_report(self):
        failures = {}
        for label, bmap in self.actions.items():
            for t in range(len(self.components)):
                hom = ModuleHom(self.components[bmap.src[t]],
                                self.components[t], bmap.mats[t])
                out = kernel_cokernel(hom)
                if not out.iso:
                    failures.setdefault(label, []).append(t)
        return failures

    def enumerate_elements(self, cap=None):
        cap = CAPS["enumeration"] if cap is None else cap
        total = 1
        for M in self.components:
            for e in M.eff_exps():
                total *= _residue_count(M.ring, e)
        if total > cap:
            raise SizeGuard("enumeration too large", dim=total, cap=cap)
        per_component = []
        for M in self.components:
            coords = [_residue_elements(M.ring, e) for e in M.eff_exps()]
            per_component.append([list(v) for v in itertools.product(*coords)])
        return [list(parts) for parts in itertools.product(*per_component)]


def _module_word_checks(D, data, sub_endos):
    """Verify D's labels compose like the submonoid they claim to be."""
    R = D.ring
    labels = list(D.monoid.labels)
    mats = [mat_coerce(R, D.action(l)) for l in labels]
    endos = [D.monoid.endo_of(l) for l in labels]
    for i, (endo, want) in enumerate(zip(endos, sub_endos)):
        if _norm_power(R, _endo_power(R, endo)) != _endo_power(R, want):
            raise ActionMismatch(
                "label %r does not act through the submonoid generator"
                % labels[i])
    if data.variant == "numeric":
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                left = mat_mul(R, mats[i], _endo_mat(R, endos[i], mats[j]))
                right = mat_mul(R, mats[j], _endo_mat(R, endos[j], mats[i]))
                if left != right:
                    raise ActionMismatch("submonoid generators must commute")
        return
    table = data.table
    sub = data.subgroup
    e = sub.index(_table_identity(table))
    n = D.base.ngens()
    if mats[e] != identity_mat(R, n):
        raise ActionMismatch("the identity must act by the identity matrix")
    for i, a in enumerate(sub):
        for j, b in enumerate(sub):
            k = sub.index(table[a][b])
            composite = mat_mul(R, mats[i], _endo_mat(R, endos[i], mats[j]))
            if composite != mats[k]:
                raise ActionMismatch("module action is not multiplicative")


def _endo_mat(R, endo, M):
    return [[apply_endo(R, endo, x) for x in row] for row in M]


def coinduce_module(D, data):
    """Coinduce a submonoid module to the ambient monoid.

    D's labels line up positionally with the submonoid generators
    (numeric) or the listed subgroup elements (group).  Each component
    of the result carries a copy of D; an ambient generator shifts
    components and applies D's own action on the wrapping step.
    """
    R = D.ring
    labels = list(D.monoid.labels)
    expected = data.d if data.variant == "numeric" else len(data.subgroup)
    if len(labels) != expected:
        raise ActionMismatch(
            "module needs %d generator labels for this inclusion" % expected)
    sub_endos = [_power_endo(R, _endo_power(R, D.monoid.endo_of(l)))
                 for l in labels]
    _module_word_checks(D, data, sub_endos)
    ring = coinduce_ring(MonoidRing(R, sub_endos), data)
    n = D.base.ngens()
    mats = [mat_coerce(R, D.action(l)) for l in labels]
    actions = {}
    for label in ring.labels:
        src, twist = ring.transitions[label]
        blocks = []
        for t in range(len(ring.reps)):
            if data.variant == "numeric":
                # the step wraps through the submonoid exactly when the
                # coordinate is at its modulus edge, twist power or not
                j = int(label[1:]) - 1
                wraps = ring.reps[t][j] == data.moduli[j] - 1
                blocks.append(mats[j] if wraps else identity_mat(R, n))
            else:
                blocks.append(mats[_group_twist_index(ring, data, label, t)])
        actions[label] = BlockMap(R, src, twist, blocks)
    components = [D.base] * len(ring.reps)
    return CoinducedModule(ring, components, actions)


def _group_twist_index(ring, data, label, t):
    """Index into the subgroup of the twist for one transition step."""
    table = data.table
    gp = int(label[1:])
    rep = ring.reps[t]
    moved = table[rep][gp]
    k = ring.reps[ring.transitions[label][0][t]]
    h = table[moved][_group_inverse(table, k)]
    return data.subgroup.index(h)


def descend_action_labels(data):
    return data.sub_labels()


def _ambient_word(Dc, rep):
    """The action of a representative, as a composite of generator maps."""
    sizes = Dc.sizes()
    if Dc.ring.data.variant == "numeric":
        word = block_identity(Dc.ring.base, sizes)
        for j in range(Dc.ring.data.d):
            step = Dc.actions["t%d" % (j + 1)]
            word = block_compose(block_power(step, rep[j], sizes), word)
        return word
    return Dc.actions["g%d" % rep]


def _check_ambient_module(Dc):
    """The labels must compose like the ambient monoid itself."""
    ring = Dc.ring
    sizes = Dc.sizes()
    if ring.data.variant == "numeric":
        for i in range(ring.data.d):
            for j in range(i + 1, ring.data.d):
                a = Dc.actions["t%d" % (i + 1)]
                b = Dc.actions["t%d" % (j + 1)]
                if block_compose(a, b) != block_compose(b, a):
                    raise ActionMismatch("ambient generators must commute")
        return
    table = ring.data.table
    e = _table_identity(table)
    if Dc.actions["g%d" % e] != block_identity(ring.base, sizes):
        raise ActionMismatch("the identity must act by the identity")
    for a in range(len(table)):
        for b in range(len(table)):
            left = block_compose(Dc.actions["g%d" % a],
                                 Dc.actions["g%d" % b])
            if left != Dc.actions["g%d" % table[a][b]]:
                raise ActionMismatch("ambient action is not multiplicative")


class DescendResult:
    def __init__(self, module, witness, recoinduced):
        self.module = module
        self.witness = witness
        self.recoinduced = recoinduced


def descend_from_coinduced(Dc):
    """Base change along evaluation at the identity, with an iso witness.

    Requires free components and invertible blocks.  Returns the
    descended submonoid module, the blockwise isomorphism from Dc onto
    its re-coinduction, and the re-coinduced module itself; the witness
    is machine-checked for invertibility and equivariance.
    """
    from .semilinear import MonoidSpec, SModule

    ring = Dc.ring
    R = ring.base
    for M in Dc.components:
        if any(e != INF for e in M.exps):
            raise SchemaError("descent needs free components")
    failures = Dc.etale_report()
    if failures:
        raise NotEtale("blocks do not act invertibly", witness=failures)
    _check_ambient_module(Dc)
    ir = ring.identity_index
    data = ring.data
    labels = data.sub_labels()
    pairs = []
    acts = {}
    if data.variant == "numeric":
        sizes = Dc.sizes()
        for j in range(data.d):
            step = Dc.actions["t%d" % (j + 1)]
            word = block_power(step, data.moduli[j], sizes)
            if word.src[ir] != ir:
                raise ActionMismatch("submonoid word must fix the identity")
            pairs.append((labels[j], word.twists[ir]))
            acts[labels[j]] = word.mats[ir]
    else:
        for idx, h in enumerate(data.subgroup):
            word = Dc.actions["g%d" % h]
            if word.src[ir] != ir:
                raise ActionMismatch("subgroup must fix the identity coset")
            pairs.append((labels[idx], word.twists[ir]))
            acts[labels[idx]] = word.mats[ir]
    commuting = []
    if data.variant == "numeric":
        commuting = [(labels[i], labels[j])
                     for i in range(data.d) for j in range(i + 1, data.d)]
    monoid = MonoidSpec(R, pairs, commuting_pairs=commuting)
    descended = SModule(monoid, Dc.components[ir], acts)
    src, twists, mats = [], [], []
    for t in range(len(ring.reps)):
        word = _ambient_word(Dc, ring.reps[t])
        src.append(word.src[ir])
        twists.append(word.twists[ir])
        mats.append(word.mats[ir])
    witness = BlockMap(R, src, twists, mats)
    if sorted(witness.src) != list(range(len(ring.reps))):
        raise ActionMismatch("representative words must permute components")
    for t in range(len(ring.reps)):
        hom = ModuleHom(Dc.components[witness.src[t]], Dc.components[ir],
                        witness.mats[t])
        if not kernel_cokernel(hom).iso:
            raise NotEtale("witness block %d is not invertible" % t)
    recoinduced = coinduce_module(descended, data)
    for label in ring.labels:
        left = block_compose(recoinduced.actions[label], witness)
        right = block_compose(witness, Dc.actions[label])
        if left != right:
            raise ActionMismatch("witness fails equivariance at %r" % label)
    return DescendResult(descended, witness, recoinduced)


# ---------------------------------------------------------------------------
# the tensor-coinduction comparison

class TensorCoinductionReport:
    def __init__(self, iso, blocks):
        self.iso = iso
        self.blocks = blocks


def check_tensor_coinduction(ambient, sub, D, data, inclusion=None):
    """Check that coinduction commutes with tensoring by an ambient module.

    ambient carries the big monoid's action on D's coefficient ring, sub
    is the submonoid ring being coinduced, inclusion the equivariant map
    between them (None means they coincide).  D is a module for the
    ambient monoid, étale and free.  The comparison map is blockwise
    "twist by the representative's action"; each block is run through
    kernel_cokernel over the submonoid ring.
    """
    from .semilinear import MonoidSpec, SModule, check_etale

    R = ambient.ring
    if D.ring != R:
        raise RingMismatch("the module must live over the ambient ring")
    if inclusion is None:
        if sub.ring != R:
            raise RingMismatch("distinct rings need an explicit inclusion")

        def include(x):
            return x
    else:
        if inclusion.source != R or inclusion.target != sub.ring:
            raise RingMismatch("inclusion endpoints do not match")
        include = inclusion
    derived = _sub_ring_action(ambient, data)
    if len(sub.endos) != len(derived):
        raise ActionMismatch("submonoid ring has the wrong generator count")
    for a, b in zip(derived, sub.endos):
        for x in R.enumerate_elements():
            if include(apply_endo(R, a, x)) != apply_endo(
                    sub.ring, b, include(x)):
                raise ActionMismatch(
                    "inclusion is not equivariant for the submonoid")
    labels = list(D.monoid.labels)
    expected = data.d if data.variant == "numeric" else len(data.table)
    if len(labels) != expected:
        raise ActionMismatch(
            "module needs %d generator labels for the ambient monoid"
            % expected)
    if any(e != INF for e in D.base.exps):
        raise SchemaError("the comparison needs a free module")
    report = check_etale(D)
    if not report.etale:
        raise NotEtale("the module must be étale", witness=report.failures)
    n = D.base.ngens()
    cert = enumerate_cosets(data)
    endos = [D.monoid.endo_of(l) for l in labels]
    mats = [mat_coerce(R, D.action(l)) for l in labels]
    for i, endo in enumerate(endos):
        if _norm_power(R, _endo_power(R, endo)) != _endo_power(
                R, ambient.endos[i]):
            raise ActionMismatch(
                "module semilinearity must follow the ambient ring action")
    if data.variant == "group":
        table = data.table
        e = _table_identity(table)
        if mats[e] != identity_mat(R, n):
            raise ActionMismatch("the identity must act by the identity matrix")
        for a in range(len(table)):
            for b in range(len(table)):
                left = mat_mul(R, mats[a], _endo_mat(R, endos[a], mats[b]))
                if left != mats[table[a][b]]:
                    raise ActionMismatch("module action is not multiplicative")
    else:
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                left = mat_mul(R, mats[i], _endo_mat(R, endos[i], mats[j]))
                right = mat_mul(R, mats[j], _endo_mat(R, endos[j], mats[i]))
                if left != right:
                    raise ActionMismatch("ambient generators must commute")
    blocks = {}
    ok = True
    free = CanonicalModule(ring=sub.ring, exps=(INF,) * n)
    for t in cert.reps:
        word = _word_matrix(R, data, endos, mats, t, n)
        twisted = [[include(x) for x in row] for row in word]
        hom = ModuleHom(free, free, twisted)
        out = kernel_cokernel(hom)
        blocks[t] = twisted
        ok = ok and out.iso
    return TensorCoinductionReport(iso=ok, blocks=blocks)


def _word_matrix(R, data, endos, mats, rep, n):
    """Matrix of the composite action of a representative on basis vectors."""
    if data.variant == "group":
        return mats[rep]
    ordered = []
    for j in range(data.d):
        ordered.extend([j] * rep[j])
    acc = identity_mat(R, n)
    for j in reversed(ordered):
        acc = mat_mul(R, mats[j], _endo_mat(R, endos[j], acc))
    return acc


# ---------------------------------------------------------------------------
# the fixed-point bijection

class BijectionReport:
    def __init__(self, bijection, fixed_count, target_count):
        self.bijection = bijection
        self.fixed_count = fixed_count
        self.target_count = target_count


def invariants_bijection(data, X, cap=None):
    """Check evaluation at the identity on ambient-fixed points.

    X is a MonoidRing (submonoid ring action) or an SModule for the
    submonoid.  Both the coinduction's ambient-fixed elements and X's
    own submonoid-fixed elements are enumerated; the verdict is whether
    evaluation at the identity representative matches them bijectively.
    """
    from .semilinear import SModule

    if isinstance(X, MonoidRing):
        ring = coinduce_ring(X, data)
        elements = ring.enumerate_elements(cap=cap)
        fixed = [x for x in elements
                 if all(ring.apply_generator(l, x) == x for l in ring.labels)]
        images = {x[ring.identity_index] for x in fixed}
        target = {x for x in X.ring.enumerate_elements()
                  if all(apply_endo(X.ring, a, x) == x for a in X.endos)}
        return BijectionReport(
            bijection=len(images) == len(fixed) and images == target,
            fixed_count=len(fixed), target_count=len(target))
    if not isinstance(X, SModule):
        raise SchemaError("expected a MonoidRing or a submonoid module")
    Dc = coinduce_module(X, data)
    elements = Dc.enumerate_elements(cap=cap)
    R0 = Dc.ring.base
    eff = [M.eff_exps() for M in Dc.components]

    def reduce_parts(parts):
        return [[residue_rep(R0, x, e) for x, e in zip(vec, eff[i])]
                for i, vec in enumerate(parts)]

    fixed = []
    for m in elements:
        if all(_parts_eq(reduce_parts(Dc.apply(l, m)), m)
               for l in Dc.ring.labels):
            fixed.append(m)
    images = {tuple(Dc.ev(m)) for m in fixed}
    R = X.ring
    labels = list(X.monoid.labels)
    mats = {l: mat_coerce(R, X.action(l)) for l in labels}
    target = set()
    coords = [_residue_elements(R, e) for e in X.base.eff_exps()]
    for v in itertools.product(*coords):
        vec = list(v)
        good = True
        for l in labels:
            endo = X.monoid.endo_of(l)
            out = mat_vec(R, mats[l],
                          [apply_endo(R, endo, x) for x in vec])
            out = [residue_rep(R, x, e)
                   for x, e in zip(out, X.base.eff_exps())]
            if out != vec:
                good = False
                break
        if good:
            target.add(tuple(vec))
    return BijectionReport(
        bijection=len(images) == len(fixed) and images == target,
        fixed_count=len(fixed), target_count=len(target))


def _parts_eq(a, b):
    return all(list(x) == list(y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# JSON forms

def data_to_json(data):
    if data.variant == "numeric":
        return {"variant": "numeric", "moduli": list(data.moduli)}
    return {"variant": "group", "table": [list(r) for r in data.table],
            "subgroup": list(data.subgroup)}


def data_from_json(obj):
    if not isinstance(obj, dict):
        raise SchemaError("inclusion must be an object")
    variant = obj.get("variant")
    if variant == "numeric":
        unknown = set(obj) - {"variant", "moduli", "maximal_reps",
                              "l_relations"}
        if unknown:
            raise SchemaError("unknown inclusion fields: %s" % sorted(unknown))
        reps = obj.get("maximal_reps")
        return SubmonoidData("numeric", moduli=obj.get("moduli"),
                             maximal_reps=reps,
                             l_relations=obj.get("l_relations"))
    if variant == "group":
        unknown = set(obj) - {"variant", "table", "subgroup", "maximal_reps",
                              "l_relations"}
        if unknown:
            raise SchemaError("unknown inclusion fields: %s" % sorted(unknown))
        if "table" not in obj or "subgroup" not in obj:
            raise SchemaError("group inclusion needs table and subgroup")
        return SubmonoidData("group", table=obj["table"],
                             subgroup=obj["subgroup"],
                             maximal_reps=obj.get("maximal_reps"),
                             l_relations=obj.get("l_relations"))
    raise SchemaError("variant must be numeric or group")


def coinduced_to_json(Dc):
    from .rings import el_to_json, endo_to_json, ring_to_json
    R = Dc.ring.base
    return {
        "inclusion": data_to_json(Dc.ring.data),
        "ring": ring_to_json(R),
        "endos": [endo_to_json(R, e) for e in Dc.ring.sub_endos],
        "components": [["inf" if e == INF else e for e in M.exps]
                       for M in Dc.components],
        "actions": {label: {
            "src": list(bmap.src),
            "twists": [endo_to_json(R, a) for a in bmap.twists],
            "mats": [[[el_to_json(R, x) for x in row] for row in m]
                     for m in bmap.mats],
        } for label, bmap in Dc.actions.items()},
    }


def coinduced_from_json(obj, caps=None):
    from .rings import el_from_json, endo_from_json, ring_from_json
    if not isinstance(obj, dict):
        raise SchemaError("coinduced module must be an object")
    required = {"inclusion", "ring", "endos", "components", "actions"}
    unknown = set(obj) - required
    if unknown:
        raise SchemaError("unknown coinduced fields: %s" % sorted(unknown))
    missing = required - set(obj)
    if missing:
        raise SchemaError("coinduced module needs %s" % sorted(missing))
    data = data_from_json(obj["inclusion"])
    R = ring_from_json(obj["ring"], caps=caps)
    if not isinstance(obj["endos"], list):
        raise SchemaError("endos must be a list")
    endos = [endo_from_json(R, e) for e in obj["endos"]]
    ring = coinduce_ring(MonoidRing(R, endos), data)
    if not isinstance(obj["components"], list):
        raise SchemaError("components must be a list of exponent vectors")
    components = []
    for exps in obj["components"]:
        if not isinstance(exps, list):
            raise SchemaError("components must be a list of exponent vectors")
        parsed = []
        for e in exps:
            if e == "inf":
                parsed.append(INF)
            elif isinstance(e, int) and not isinstance(e, bool) and e > 0:
                parsed.append(e)
            else:
                raise SchemaError("exponents must be positive integers or 'inf'")
        components.append(CanonicalModule(ring=R, exps=tuple(parsed)))
    if len(components) != len(ring.reps):
        raise SchemaError("component count must match the representatives")
    if not isinstance(obj["actions"], dict):
        raise SchemaError("actions must be an object")
    if set(obj["actions"]) != set(ring.labels):
        raise SchemaError("actions must cover exactly the ambient generators")
    actions = {}
    for label, spec in obj["actions"].items():
        if not isinstance(spec, dict):
            raise SchemaError("action %r must be an object" % label)
        extra = set(spec) - {"src", "twists", "mats"}
        if extra:
            raise SchemaError("unknown action fields: %s" % sorted(extra))
        for key in ("src", "twists", "mats"):
            if key not in spec:
                raise SchemaError("action %r needs %s" % (label, key))
        n = len(ring.reps)
        if (not isinstance(spec["src"], list) or len(spec["src"]) != n
                or not isinstance(spec["twists"], list)
                or len(spec["twists"]) != n
                or not isinstance(spec["mats"], list)
                or len(spec["mats"]) != n):
            raise SchemaError(
                "action %r needs one src, twist and matrix per component"
                % label)
        src = []
        for s in spec["src"]:
            if not isinstance(s, int) or isinstance(s, bool) or not 0 <= s < n:
                raise SchemaError("src indices must name components")
            src.append(s)
        twists = [endo_from_json(R, a) for a in spec["twists"]]
        mats = []
        for t, m in enumerate(spec["mats"]):
            rows = components[t].ngens()
            cols = components[src[t]].ngens()
            if not isinstance(m, list) or len(m) != rows or any(
                    not isinstance(row, list) or len(row) != cols
                    for row in m):
                raise SchemaError(
                    "matrix %d of action %r has the wrong shape" % (t, label))
            mats.append([[el_from_json(R, x) for x in row] for row in m])
        actions[label] = BlockMap(R, src, twists, mats)
    return CoinducedModule(ring, components, actions)
