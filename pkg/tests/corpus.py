"""Shared construction helpers for test corpora.

Coboundary modules B * phi(B)^{-1} are the ones whose fixed points have
full rank and whose comparison map is an isomorphism; random invertible
matrices provide them.  Plain random etale modules (unit linearization,
arbitrary norm class) come from devkit.semilinear.random_etale_smodule.
"""

from devkit.linalg import mat_mul
from devkit.modules import INF, canonical_module, smith_decompose
from devkit.rings import apply_endo
from devkit.semilinear import SModule, hom_inverse, linearize


def random_invertible_matrix(R, n, rng, tries=256):
    for _ in range(tries):
        M = [[R.random_element(rng) for _ in range(n)] for _ in range(n)]
        res = smith_decompose(R, M, ncols=n)
        if all(R.val(d) == 0 for d in res.diag) and len(res.diag) == n:
            return M
    raise AssertionError("no invertible matrix found")


def invert_matrix(R, M):
    n = len(M)
    base = canonical_module(R, [INF] * n)
    from devkit.modules import ModuleHom
    return hom_inverse(ModuleHom(base, base, M)).matrix


def coboundary_smodule(monoid, n, rng, diag=None):
    """A free module whose actions are B phi_s(B)^{-1} (times a fixed diag).

    These have trivial norm class by construction, so invariants have
    full rank and the comparison morphism is an isomorphism.
    """
    R = monoid.ring
    B = random_invertible_matrix(R, n, rng)
    Binv = invert_matrix(R, B)
    base = canonical_module(R, [INF] * n)
    actions = {}
    for label in monoid.labels:
        endo = monoid.endo_of(label)
        phiBinv = [[apply_endo(R, endo, x) for x in row] for row in Binv]
        A = mat_mul(R, B, phiBinv)
        if diag is not None:
            A = mat_mul(R, A, diag)
        actions[label] = A
    return SModule(monoid, base, actions)


def all_etale_free_smodules(monoid, max_rank):
    """Every free module with invertible action matrices, all generators
    acting by the same matrix.  Enumeration order is deterministic."""
    R = monoid.ring
    out = []
    for n in range(1, max_rank + 1):
        base = canonical_module(R, [INF] * n)
        for M in _all_invertible(R, n):
            actions = {label: M for label in monoid.labels}
            out.append(SModule(monoid, base, actions))
    return out


def _all_invertible(R, n):
    elems = list(R.enumerate_elements())

    def rows(k, chosen):
        if k == n:
            yield [list(r) for r in chosen]
            return
        for combo in _vectors(elems, n):
            trial = chosen + [combo]
            res = smith_decompose(R, [list(r) for r in trial], ncols=n)
            if all(R.val(d) == 0 for d in res.diag):
                yield from rows(k + 1, trial)

    yield from rows(0, [])


def _vectors(elems, n):
    if n == 0:
        yield []
        return
    for head in elems:
        for tail in _vectors(elems, n - 1):
            yield [head] + tail


def cyclic_table(n):
    """Multiplication table of Z/n, elements 0..n-1."""
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def symmetric_table(n):
    """Multiplication table of S_n over sorted permutation tuples.

    Entry [i][j] is the index of p_i after p_j, so left factors act
    outermost.  Returns (table, even_indices).
    """
    import itertools

    perms = sorted(itertools.permutations(range(n)))

    def compose(p, q):
        return tuple(p[q[i]] for i in range(n))

    table = [[perms.index(compose(p, q)) for q in perms] for p in perms]
    even = [i for i, p in enumerate(perms)
            if sum(1 for a, b in itertools.combinations(range(n), 2)
                   if p[a] > p[b]) % 2 == 0]
    return table, even
