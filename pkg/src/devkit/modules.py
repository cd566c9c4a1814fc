"""Finitely presented modules over chain coefficient rings.

A chain ring has every nonzero element equal to unit * r^k for one fixed
generator r, so any finite presentation diagonalizes: U A V = D with U, V
invertible and D diagonal.  The isomorphism class of the presented module
is the multiset of exponents read off the diagonal, with inf standing for
summands isomorphic to the full ring.

Conventions used throughout:
  * matrices are lists of rows; a presentation matrix has one row per
    generator and one column per relation
  * canonical exponent lists are sorted in descending order, inf first
  * an exponent at or above the nilpotency bound of r is the same summand
    as a free one, and is normalized to inf on construction
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    LevelExceedsPrecision,
    MorphismDomainMismatch,
    RingMismatch,
    SchemaError,
)
from .linalg import hstack, identity_mat, mat_coerce, mat_copy, mat_mul, mat_vec
from .rings import PrimePower, ring_from_json, ring_to_json

INF = float("inf")


def _require_chain(R):
    if not R.is_chain():
        raise RingMismatch("%s has no chain structure" % R.describe())


def _dims(A, ncols=None):
    g = len(A)
    if g:
        m = len(A[0])
        if any(len(row) != m for row in A):
            raise RingMismatch("ragged matrix")
        if ncols is not None and ncols != m:
            raise RingMismatch("stated column count disagrees with the matrix")
        return g, m
    return 0, (ncols or 0)


def residue_rep(R, a, k):
    """Canonical representative of a modulo r^k."""
    if k <= 0:
        return R.zero()
    if k >= R.bound():
        return a
    return R.lift_from_level(R.reduce_to_level(a, k), k)


@dataclass
class SmithResult:
    """U A V = D with all four transforms kept.

    Rows of the input are generators, columns are relations.  The diagonal
    of D is normalized to pure powers of r.
    """

    ring: object
    D: list
    diag: list
    U: list
    Uinv: list
    V: list
    Vinv: list


def _smith_gf2(R, A, ncols=None):
    """Bitmask specialization of smith_decompose for Z/2.

    Over the prime field every nonzero entry has valuation zero, so the
    minimal-valuation pivot rule degenerates to the first nonzero entry in
    row-major order, unit normalization is a no-op, and every clearing
    step is an xor.  Rows are packed into integers; Uinv is tracked
    transposed so its column operations are single xors as well.  The
    output matches the generic routine entry for entry.
    """
    g, m = _dims(A, ncols)
    rows = mat_coerce(R, A)
    D = [sum(row[j] << j for j in range(m)) for row in rows]
    U = [1 << i for i in range(g)]
    UinvT = [1 << i for i in range(g)]
    V = [1 << j for j in range(m)]
    Vinv = [1 << j for j in range(m)]

    for s in range(min(g, m)):
        i0 = j0 = -1
        for i in range(s, g):
            t = D[i] >> s
            if t:
                i0 = i
                j0 = s + ((t & -t).bit_length() - 1)
                break
        if i0 < 0:
            break
        if i0 != s:
            D[s], D[i0] = D[i0], D[s]
            U[s], U[i0] = U[i0], U[s]
            UinvT[s], UinvT[i0] = UinvT[i0], UinvT[s]
        if j0 != s:
            swap = (1 << s) | (1 << j0)
            for i in range(g):
                x = D[i]
                if ((x >> s) ^ (x >> j0)) & 1:
                    D[i] = x ^ swap
            for i in range(m):
                x = V[i]
                if ((x >> s) ^ (x >> j0)) & 1:
                    V[i] = x ^ swap
            Vinv[s], Vinv[j0] = Vinv[j0], Vinv[s]
        for i in range(s + 1, g):
            if (D[i] >> s) & 1:
                D[i] ^= D[s]
                U[i] ^= U[s]
                UinvT[s] ^= UinvT[i]
        # column s is now zero away from the pivot, so the column pass
        # only touches row s of D
        cols = D[s] & ~((1 << (s + 1)) - 1)
        if cols:
            D[s] = 1 << s
            for i in range(m):
                if (V[i] >> s) & 1:
                    V[i] ^= cols
            acc = 0
            t = cols
            while t:
                low = t & -t
                acc ^= Vinv[low.bit_length() - 1]
                t ^= low
            Vinv[s] ^= acc

    Dm = [[(D[i] >> j) & 1 for j in range(m)] for i in range(g)]
    Um = [[(U[i] >> j) & 1 for j in range(g)] for i in range(g)]
    Uinvm = [[(UinvT[j] >> i) & 1 for j in range(g)] for i in range(g)]
    Vm = [[(V[i] >> j) & 1 for j in range(m)] for i in range(m)]
    Vinvm = [[(Vinv[i] >> j) & 1 for j in range(m)] for i in range(m)]
    diag = [Dm[s][s] for s in range(min(g, m))]
    return SmithResult(ring=R, D=Dm, diag=diag, U=Um, Uinv=Uinvm,
                       V=Vm, Vinv=Vinvm)


def smith_decompose(R, A, ncols=None):
    """Diagonalize A over the chain ring R, tracking the change of basis.

    Pivots take the entry of minimal r-valuation in the remaining block,
    ties broken by lowest (row, col).  Over a chain ring one pass of
    column-then-row clearing per pivot suffices: subtracting a multiple of
    the minimal-valuation pivot never creates a smaller valuation.
    """
    _require_chain(R)
    if isinstance(R, PrimePower) and R.p == 2 and R.N == 1:
        return _smith_gf2(R, A, ncols)
    g, m = _dims(A, ncols)
    D = mat_coerce(R, A)
    U = identity_mat(R, g)
    Uinv = identity_mat(R, g)
    V = identity_mat(R, m)
    Vinv = identity_mat(R, m)
    bound = R.bound()
    z = R.zero()

    for s in range(min(g, m)):
        best = None
        best_val = bound
        for i in range(s, g):
            row = D[i]
            for j in range(s, m):
                if row[j] != z:
                    v = R.val(row[j])
                    if v < best_val:
                        best_val = v
                        best = (i, j)
                        if v == 0:
                            break
            if best_val == 0:
                break
        if best is None:
            break
        i0, j0 = best
        if i0 != s:
            D[s], D[i0] = D[i0], D[s]
            U[s], U[i0] = U[i0], U[s]
            for row in Uinv:
                row[s], row[i0] = row[i0], row[s]
        if j0 != s:
            for row in D:
                row[s], row[j0] = row[j0], row[s]
            for row in V:
                row[s], row[j0] = row[j0], row[s]
            Vinv[s], Vinv[j0] = Vinv[j0], Vinv[s]
        u, k = R.r_split(D[s][s])
        uinv = R.invert(u)
        D[s] = [R.mul(uinv, x) for x in D[s]]
        U[s] = [R.mul(uinv, x) for x in U[s]]
        for row in Uinv:
            row[s] = R.mul(row[s], u)
        for i in range(s + 1, g):
            x = D[i][s]
            if x != z:
                q = R.r_shift_down(x, k)
                D[i] = [R.sub(a, R.mul(q, b)) for a, b in zip(D[i], D[s])]
                U[i] = [R.sub(a, R.mul(q, b)) for a, b in zip(U[i], U[s])]
                for row in Uinv:
                    row[s] = R.add(row[s], R.mul(row[i], q))
        for j in range(s + 1, m):
            x = D[s][j]
            if x != z:
                q = R.r_shift_down(x, k)
                for row in D:
                    row[j] = R.sub(row[j], R.mul(q, row[s]))
                for row in V:
                    row[j] = R.sub(row[j], R.mul(q, row[s]))
                Vinv[s] = [R.add(a, R.mul(q, b)) for a, b in zip(Vinv[s], Vinv[j])]
    diag = [D[s][s] for s in range(min(g, m))]
    return SmithResult(ring=R, D=D, diag=diag, U=U, Uinv=Uinv, V=V, Vinv=Vinv)


@dataclass(frozen=True)
class CanonicalModule:
    """Direct sum of R/r^k summands, exponents descending, inf for free."""

    ring: object
    exps: tuple

    def rank(self):
        return sum(1 for e in self.exps if e == INF)

    def torsion_exps(self):
        return tuple(e for e in self.exps if e != INF)

    def eff_exps(self):
        """Exponents with inf collapsed to the precision bound."""
        b = self.ring.bound()
        return tuple(b if e == INF else min(e, b) for e in self.exps)

    def ngens(self):
        return len(self.exps)

    def is_zero(self):
        return not self.exps

    def describe(self):
        body = ", ".join("inf" if e == INF else str(e) for e in self.exps)
        return "%s-module [%s]" % (self.ring.describe(), body)


def canonical_module(R, exps):
    """Normalize an exponent list into a CanonicalModule."""
    _require_chain(R)
    bound = R.bound()
    out = []
    for e in exps:
        if e == INF:
            out.append(INF)
            continue
        if not isinstance(e, int) or isinstance(e, bool) or e <= 0:
            raise SchemaError("exponents must be positive integers or inf")
        out.append(INF if e >= bound else e)
    out.sort(reverse=True)
    return CanonicalModule(ring=R, exps=tuple(out))


def relation_matrix(M):
    """The diagonal presentation matrix of a canonical module."""
    R = M.ring
    n = M.ngens()
    r = R.r_el()
    out = []
    for i, e in enumerate(M.eff_exps()):
        row = [R.zero()] * n
        row[i] = R.pow_el(r, e)
        out.append(row)
    return out


def exponents_from_smith(res):
    """Read the canonical exponents off a Smith decomposition."""
    R = res.ring
    bound = R.bound()
    g = len(res.U)
    exps = []
    for d in res.diag:
        k = R.val(d)
        if k == 0:
            continue
        exps.append(INF if k >= bound else k)
    exps.extend([INF] * (g - len(res.diag)))
    return canonical_module(R, exps)


class PresentedModule:
    """Generators and relations, shape fixed by the relation vectors.

    Each relation is a vector with one coordinate per generator.  When
    there are no relations the generator count must be given explicitly.
    """

    def __init__(self, ring, relations, ngens=None):
        _require_chain(ring)
        relations = [list(rel) for rel in relations]
        if relations:
            n = len(relations[0])
            if any(len(rel) != n for rel in relations):
                raise SchemaError("relation vectors must all have the same length")
            if ngens is not None and ngens != n:
                raise SchemaError("stated generator count disagrees with the relations")
        else:
            if ngens is None:
                raise SchemaError("a relation-free module needs an explicit generator count")
            n = ngens
        if n < 0:
            raise SchemaError("generator count must be nonnegative")
        self.ring = ring
        self.ngens = n
        self.relations = [[ring.el(x) for x in rel] for rel in relations]

    def matrix(self):
        """Presentation matrix, generators as rows, relations as columns."""
        return [[rel[i] for rel in self.relations] for i in range(self.ngens)]

    def smith(self):
        return smith_decompose(self.ring, self.matrix(), ncols=len(self.relations))

    def canonical(self):
        return exponents_from_smith(self.smith())


# ---------------------------------------------------------------------------
# kernels and linear solving over a chain ring

def free_kernel(R, A, ncols=None):
    """Generating vectors for ker(A) acting on column vectors.

    Columns of V matching a diagonal entry r^k contribute r^(bound-k)
    times the column; columns past the diagonal contribute directly.
    """
    res = smith_decompose(R, A, ncols=ncols)
    g, m = _dims(A, ncols)
    bound = R.bound()
    r = R.r_el()
    z = R.zero()
    gens = []
    for j in range(m):
        if j < len(res.diag):
            k = R.val(res.diag[j])
        else:
            k = bound
        if k == 0:
            continue
        col = [res.V[i][j] for i in range(m)]
        if k < bound:
            c = R.pow_el(r, bound - k)
            col = [R.mul(c, x) for x in col]
        if any(x != z for x in col):
            gens.append(col)
    return gens


def solve_linear(R, A, b, ncols=None):
    """One solution x of A x = b over the chain ring, or None."""
    res = smith_decompose(R, A, ncols=ncols)
    g, m = _dims(A, ncols)
    bound = R.bound()
    c = mat_vec(R, res.U, b)
    y = [R.zero()] * m
    for i in range(g):
        if i < len(res.diag):
            k = R.val(res.diag[i])
        else:
            k = bound
        if R.val(c[i]) < k:
            return None
        if k < bound and i < m:
            y[i] = R.r_shift_down(c[i], k)
    return mat_vec(R, res.V, y)


# ---------------------------------------------------------------------------
# morphisms between canonical modules

class ModuleHom:
    """R-linear map between canonical modules, as a matrix on generators.

    Columns are images of source generators in target coordinates.  The
    entry condition val(F[i][j]) >= eff(n_i) - eff(n_j) is exactly
    well-definedness on the quotients, and is checked on construction.
    """

    def __init__(self, source, target, matrix, check=True):
        if source.ring != target.ring:
            raise RingMismatch("source and target live over different rings")
        R = source.ring
        s = source.ngens()
        t = target.ngens()
        matrix = mat_coerce(R, matrix)
        if len(matrix) != t or any(len(row) != s for row in matrix):
            raise MorphismDomainMismatch("matrix shape does not fit the modules")
        se = source.eff_exps()
        te = target.eff_exps()
        z = R.zero()
        if check:
            for i in range(t):
                for j in range(s):
                    need = te[i] - se[j]
                    if need > 0 and matrix[i][j] != z:
                        if R.val(matrix[i][j]) < need:
                            raise MorphismDomainMismatch(
                                "entry (%d, %d) is not well defined on the quotients" % (i, j))
        # canonical representative: row i lives modulo r^(target exponent)
        matrix = [[residue_rep(R, x, te[i]) for x in row]
                  for i, row in enumerate(matrix)]
        self.source = source
        self.target = target
        self.matrix = matrix

    def __eq__(self, other):
        return (isinstance(other, ModuleHom)
                and self.source == other.source
                and self.target == other.target
                and self.matrix == other.matrix)

    def __hash__(self):
        return hash((self.source, self.target,
                     tuple(tuple(row) for row in self.matrix)))

    def __call__(self, v):
        return mat_vec(self.source.ring, self.matrix, v)

    def compose(self, other):
        """self after other."""
        if other.target != self.source:
            raise MorphismDomainMismatch("composition shapes do not match")
        R = self.source.ring
        return ModuleHom(other.source, self.target,
                         mat_mul(R, self.matrix, other.matrix), check=False)


def identity_hom(M):
    return ModuleHom(M, M, identity_mat(M.ring, M.ngens()), check=False)


def zero_hom(source, target):
    R = source.ring
    return ModuleHom(source, target,
                     [[R.zero()] * source.ngens() for _ in range(target.ngens())],
                     check=False)


@dataclass
class KernelCokernel:
    kernel: CanonicalModule
    cokernel: CanonicalModule
    iso: bool
    kernel_gens: list = field(default_factory=list)
    cokernel_gens: list = field(default_factory=list)


def kernel_cokernel(hom):
    """Kernel and cokernel of a map of canonical modules.

    Everything is computed through presentations: a class in the target
    dies in the cokernel iff it lands in the span of the images and the
    target relations, so the cokernel is presented by [F | D_T].  Kernel
    generators come from the free kernel of the same block matrix,
    projected to the source coordinates; their relations are a second
    syzygy computation against the source relations.
    """
    R = hom.source.ring
    s = hom.source.ngens()
    t = hom.target.ngens()
    D_T = relation_matrix(hom.target)
    D_S = relation_matrix(hom.source)
    big = hstack(hom.matrix, D_T)
    z = R.zero()

    raw = free_kernel(R, big, ncols=s + t)
    src_eff = hom.source.eff_exps()
    kgens = []
    for vec in raw:
        head = [residue_rep(R, x, e) for x, e in zip(vec[:s], src_eff)]
        if any(x != z for x in head):
            kgens.append(head)

    if kgens:
        kmat = [[col[i] for col in kgens] for i in range(s)]
        syz = free_kernel(R, hstack(kmat, D_S), ncols=len(kgens) + s)
        rel_rows = [vec[:len(kgens)] for vec in syz]
        relmat = [[rel[i] for rel in rel_rows] for i in range(len(kgens))]
        kernel = exponents_from_smith(
            smith_decompose(R, relmat, ncols=len(rel_rows)))
    else:
        kernel = canonical_module(R, [])

    cres = smith_decompose(R, big, ncols=s + t)
    cokernel = exponents_from_smith(cres)
    bound = R.bound()
    cok_gens = []
    for i in range(t):
        if i < len(cres.diag):
            k = R.val(cres.diag[i])
        else:
            k = bound
        if k == 0:
            continue
        e = INF if k >= bound else k
        cok_gens.append(([cres.Uinv[a][i] for a in range(t)], e))

    iso = kernel.is_zero() and cokernel.is_zero()
    return KernelCokernel(kernel=kernel, cokernel=cokernel, iso=iso,
                          kernel_gens=kgens, cokernel_gens=cok_gens)


# ---------------------------------------------------------------------------
# devissage invariants

def mu_devissage(M):
    """Ranks of the quotient filtration: entry n counts exponents > n."""
    bound = M.ring.bound()
    return [sum(1 for e in M.exps if e > n) for n in range(bound)]


def tau_devissage(M):
    """Ranks of the torsion filtration: entry n counts finite exponents >= n + 1."""
    bound = M.ring.bound()
    return [sum(1 for e in M.exps if e != INF and e >= n + 1)
            for n in range(bound)]


def torsion_bound(M):
    finite = [e for e in M.exps if e != INF]
    return max(finite) if finite else 0


@dataclass
class GradedPieces:
    power: int
    image: CanonicalModule
    image_inclusion: list
    torsion: CanonicalModule
    torsion_inclusion: list


def graded_pieces(M, k):
    """The submodules r^k M and M[r^k] of a canonical module.

    Membership in r^k M is decided on effective exponents, so free
    summands die once k reaches the precision bound; the ones that
    survive keep inf.  M[r^k] collects the torsion summands with capped
    exponents over the level-k ring; free summands contribute nothing to
    it, which is the infinite-precision answer the exponent calculus
    encodes.  Both come with inclusion matrices into M written over the
    ambient ring.
    """
    R = M.ring
    bound = R.bound()
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise LevelExceedsPrecision("power %r must be a nonnegative integer" % (k,))
    r = R.r_el()
    n = M.ngens()

    img_exps = []
    img_cols = []
    for i, e in enumerate(M.exps):
        eff = bound if e == INF else e
        if eff > k:
            img_exps.append(INF if e == INF else e - k)
            col = [R.zero()] * n
            col[i] = R.pow_el(r, k)
            img_cols.append(col)
    img_level = R.level_ring(bound - k) if 1 <= bound - k else R.level_ring(1)
    image = canonical_module(img_level, img_exps)
    image_inclusion = [[col[i] for col in img_cols] for i in range(n)]

    tor_exps = []
    tor_cols = []
    for i, e in enumerate(M.exps):
        if e == INF:
            continue
        cap = min(e, k)
        if cap == 0:
            continue
        tor_exps.append(cap)
        col = [R.zero()] * n
        col[i] = R.pow_el(r, max(0, e - k))
        tor_cols.append(col)
    tor_level = R.level_ring(min(k, bound)) if k >= 1 else R.level_ring(1)
    torsion = canonical_module(tor_level, tor_exps)
    torsion_inclusion = [[col[i] for col in tor_cols] for i in range(n)]

    return GradedPieces(power=k, image=image, image_inclusion=image_inclusion,
                        torsion=torsion, torsion_inclusion=torsion_inclusion)


def lift_module(R, M, n):
    """The flat lift of a residue-ring module to precision level n in R.

    M must live over R's residue ring, where every nonzero summand is a
    line; the lift is free over the level-n ring with the same summand
    count, the unique module reducing to M with constant dévissage ranks.
    """
    _require_chain(R)
    if M.ring != R.level_ring(1):
        raise LevelExceedsPrecision(
            "%s does not live over the residue ring of %s"
            % (M.describe(), R.describe()))
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= R.bound():
        raise LevelExceedsPrecision("level %r not in 1..%d" % (n, R.bound()))
    level = R.level_ring(n)
    return canonical_module(level, [INF] * M.ngens())


# ---------------------------------------------------------------------------
# tensor and hom

def tensor_canonical(M1, M2):
    """Tensor product summand by summand: exponents combine by min."""
    if M1.ring != M2.ring:
        raise RingMismatch("tensor factors live over different rings")
    exps = [min(a, b) for a in M1.exps for b in M2.exps]
    return canonical_module(M1.ring, exps)


def hom_canonical(M1, M2):
    """Hom(R/r^a, R/r^b) = R/r^min(a,b), summand by summand."""
    if M1.ring != M2.ring:
        raise RingMismatch("hom arguments live over different rings")
    exps = [min(a, b) for a in M1.exps for b in M2.exps]
    return canonical_module(M1.ring, exps)


# ---------------------------------------------------------------------------
# canonical spanning sets (Howell-style normal form)

def _reduce_against(R, vec, placed):
    """Reduce vec against placed (vector, pos, k) pivots, left to right."""
    bound = R.bound()
    for w, pos, k in placed:
        e = vec[pos]
        if e == R.zero():
            continue
        if R.val(e) >= k:
            q = R.r_shift_down(e, k)
            vec = [R.sub(a, R.mul(q, b)) for a, b in zip(vec, w)]
    return vec


def _echelon(R, vectors, length):
    z = R.zero()
    bound = R.bound()
    work = [list(v) for v in vectors]
    placed = []
    for pos in range(length):
        best = None
        best_val = bound
        for idx, v in enumerate(work):
            if v[pos] != z:
                val = R.val(v[pos])
                if val < best_val:
                    best_val = val
                    best = idx
                    if val == 0:
                        break
        if best is None:
            continue
        piv = work.pop(best)
        u, k = R.r_split(piv[pos])
        uinv = R.invert(u)
        piv = [R.mul(uinv, c) for c in piv]
        for v in work:
            if v[pos] != z:
                q = R.r_shift_down(v[pos], k)
                v[:] = [R.sub(a, R.mul(q, b)) for a, b in zip(v, piv)]
        for w, pos2, k2 in placed:
            e = w[pos]
            rep = residue_rep(R, e, k)
            if rep != e:
                q = R.r_shift_down(R.sub(e, rep), k)
                w[:] = [R.sub(a, R.mul(q, b)) for a, b in zip(w, piv)]
        placed.append((piv, pos, k))
    return placed


def column_span_basis(R, vectors, length):
    """Canonical generating set for the span of the given vectors.

    Echelon with minimal-valuation pivots, unit-normalized, entries above
    each pivot reduced to canonical residues, then closed under the
    annihilator multiples r^(bound-k) of each pivot.  Two generating sets
    span the same submodule iff they produce identical output.
    """
    _require_chain(R)
    bound = R.bound()
    r = R.r_el()
    z = R.zero()
    work = [list(R.el(x) for x in v) for v in vectors
            if any(R.el(x) != z for x in v)]
    for v in work:
        if len(v) != length:
            raise RingMismatch("vector length disagrees with the stated ambient rank")
    while True:
        placed = _echelon(R, work, length)
        fresh = []
        for v, pos, k in placed:
            if 0 < k:
                c = R.pow_el(r, bound - k)
                cand = [R.mul(c, x) for x in v]
                cand = _reduce_against(R, cand, placed)
                if any(x != z for x in cand):
                    fresh.append(cand)
        if not fresh:
            return [v for v, _, _ in placed]
        work = [v for v, _, _ in placed] + fresh


def span_equal(R, vecs_a, vecs_b, length):
    return (column_span_basis(R, vecs_a, length)
            == column_span_basis(R, vecs_b, length))


# ---------------------------------------------------------------------------
# JSON forms

def presented_to_json(P):
    from .rings import el_to_json
    return {
        "ring": ring_to_json(P.ring),
        "generators": P.ngens,
        "relations": [[el_to_json(P.ring, x) for x in rel] for rel in P.relations],
    }


def presented_from_json(obj, caps=None):
    from .rings import el_from_json
    if not isinstance(obj, dict):
        raise SchemaError("module must be an object")
    unknown = set(obj) - {"ring", "relations", "generators"}
    if unknown:
        raise SchemaError("unknown module fields: %s" % sorted(unknown))
    if "ring" not in obj or "relations" not in obj:
        raise SchemaError("module needs ring and relations")
    R = ring_from_json(obj["ring"], caps=caps)
    rels = obj["relations"]
    if not isinstance(rels, list) or any(not isinstance(r, list) for r in rels):
        raise SchemaError("relations must be a list of vectors")
    ngens = obj.get("generators")
    if ngens is not None and (not isinstance(ngens, int) or isinstance(ngens, bool)):
        raise SchemaError("generators must be an integer")
    parsed = [[el_from_json(R, x) for x in rel] for rel in rels]
    return PresentedModule(R, parsed, ngens=ngens)


def exponents_to_json(M):
    return {
        "ring": ring_to_json(M.ring),
        "exponents": ["inf" if e == INF else e for e in M.exps],
    }


def exponents_from_json(obj, caps=None):
    if not isinstance(obj, dict):
        raise SchemaError("module must be an object")
    unknown = set(obj) - {"ring", "exponents"}
    if unknown:
        raise SchemaError("unknown module fields: %s" % sorted(unknown))
    if "ring" not in obj or "exponents" not in obj:
        raise SchemaError("module needs ring and exponents")
    R = ring_from_json(obj["ring"], caps=caps)
    exps = []
    for e in obj["exponents"]:
        if e == "inf":
            exps.append(INF)
        elif isinstance(e, int) and not isinstance(e, bool):
            exps.append(e)
        else:
            raise SchemaError("exponents must be integers or the token inf")
    return canonical_module(R, exps)
