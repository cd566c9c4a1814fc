"""Matrix helpers over ring descriptors.

Matrices are lists of rows of ring elements.  Nothing here assumes a chain
structure; Smith reduction lives with the module theory.  The fast paths
(matrix inversion, subring coordinates) work on prime-ring coordinates,
which are always plain ints mod p^N.
"""

from __future__ import annotations

from .errors import NotAUnit, RingMismatch
from .rings import _prime_basis


def zero_mat(R, n, m):
    z = R.zero()
    return [[z] * m for _ in range(n)]


def identity_mat(R, n):
    z, o = R.zero(), R.one()
    return [[o if i == j else z for j in range(n)] for i in range(n)]


def mat_coerce(R, rows):
    return [[R.el(x) for x in row] for row in rows]


def mat_copy(A):
    return [list(row) for row in A]


def mat_eq(A, B):
    return [list(r) for r in A] == [list(r) for r in B]


def transpose(A, ncols=None):
    if not A:
        return [[] for _ in range(ncols)] if ncols else []
    return [list(col) for col in zip(*A)]


def mat_add(R, A, B):
    return [[R.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(R, A, B):
    return [[R.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_neg(R, A):
    return [[R.neg(a) for a in row] for row in A]


def mat_scale(R, c, A):
    return [[R.mul(c, a) for a in row] for row in A]


def mat_mul(R, A, B):
    if A and B and len(A[0]) != len(B):
        raise RingMismatch("matrix shapes do not compose")
    m = len(B[0]) if B else 0
    out = []
    z = R.zero()
    for row in A:
        orow = []
        for j in range(m):
            acc = z
            for k, a in enumerate(row):
                if a != z:
                    acc = R.add(acc, R.mul(a, B[k][j]))
            orow.append(acc)
        out.append(orow)
    return out


def mat_vec(R, A, v):
    z = R.zero()
    out = []
    for row in A:
        acc = z
        for a, x in zip(row, v):
            if a != z and x != z:
                acc = R.add(acc, R.mul(a, x))
        out.append(acc)
    return out


def hstack(A, B):
    if not A:
        return mat_copy(B)
    if not B:
        return mat_copy(A)
    return [list(ra) + list(rb) for ra, rb in zip(A, B)]


def vstack(A, B):
    return mat_copy(A) + mat_copy(B)


def kron(R, A, B):
    """Kronecker product, blocks A[i][j] * B."""
    if not A or not B:
        return []
    out = []
    for arow in A:
        for brow in B:
            out.append([R.mul(a, b) for a in arow for b in brow])
    return out


def mat_entrywise(A, fn):
    return [[fn(a) for a in row] for row in A]


# ---------------------------------------------------------------------------
# integer matrices over Z/p^N (prime-ring coordinates)

def int_mat_mul(A, B, mod):
    if not A or not B:
        return [[] for _ in A]
    m = len(B[0])
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) % mod for col in Bt] for row in A]


def int_mat_vec(A, v, mod):
    return [sum(a * x for a, x in zip(row, v)) % mod for row in A]


def pp_invert_matrix(Rp, M):
    """Inverse of M over Z/p^N; NotAUnit when the residue matrix is singular.

    Gaussian elimination gives the inverse mod p, then Newton steps
    X <- X(2I - MX) lift it, doubling the p-adic precision each time.
    """
    n = len(M)
    if n == 0:
        return []
    p = Rp.p
    A = [[x % p for x in row] + [1 if i == j else 0 for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if A[r][col] % p:
                piv = r
                break
        if piv is None:
            raise NotAUnit("matrix is singular modulo p")
        A[col], A[piv] = A[piv], A[col]
        inv = pow(A[col][col], -1, p)
        A[col] = [x * inv % p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                c = A[r][col]
                A[r] = [(x - c * y) % p for x, y in zip(A[r], A[col])]
    X = [row[n:] for row in A]
    mod = Rp.modulus
    ident2 = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range((Rp.N - 1).bit_length()):
        T = [[(d - x) % mod for d, x in zip(drow, xrow)]
             for drow, xrow in zip(ident2, int_mat_mul(M, X, mod))]
        X = int_mat_mul(X, T, mod)
    return X


class SubringView:
    """A ring as a free module over an embedded subring.

    The default basis is 1, t, .., t^(m-1) for the ambient generator t,
    which is a basis for every unramified tower step.  Coordinates are
    computed through one cached prime-matrix inverse.
    """

    def __init__(self, R, sub, embed, basis=None):
        self.ring = R
        self.sub = sub
        self.embed = embed
        beta = R.prime_rank()
        bs = sub.prime_rank()
        if beta % bs:
            raise RingMismatch("prime ranks are incompatible")
        self.rank = beta // bs
        if basis is None:
            t = R.t_el()
            basis = [R.one()]
            for _ in range(self.rank - 1):
                basis.append(R.mul(basis[-1], t))
        if len(basis) != self.rank:
            raise RingMismatch("basis has the wrong length")
        self.basis = list(basis)
        cols = []
        for k in range(self.rank):
            for j in range(bs):
                x = R.mul(self.basis[k], embed(_prime_basis(sub, j)))
                cols.append(R.to_prime_vec(x))
        Phi = [[cols[c][i] for c in range(beta)] for i in range(beta)]
        Rp = R.prime_ring()
        try:
            self._phi_inv = pp_invert_matrix(Rp, Phi)
        except NotAUnit:
            raise RingMismatch("the stated basis is not free") from None
        self._mod = Rp.modulus
        self._bs = bs

    def to_coords(self, x):
        """Coordinates of x in the subring, one per basis element."""
        v = self.ring.to_prime_vec(self.ring.el(x))
        w = int_mat_vec(self._phi_inv, v, self._mod)
        bs = self._bs
        return tuple(self.sub.from_prime_vec(w[k * bs:(k + 1) * bs])
                     for k in range(self.rank))

    def from_coords(self, coords):
        R = self.ring
        acc = R.zero()
        for b, c in zip(self.basis, coords):
            acc = R.add(acc, R.mul(b, self.embed(c)))
        return acc
