"""Batch front end: JSON problem files in, deterministic JSON reports out.

Each subcommand maps onto one library operation.  Reports go to stdout
with sorted keys and no timing data, so a fixed (payload, seed) pair
always reproduces the same bytes.  Failures leave as structured JSON on
stderr: exit code 3 for malformed input, 2 for any other library error.
Exit code 0 means the computed verdict is true, 1 that it is false.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import __version__, config
from .config import DEFAULT_CAPS, load_caps
from .errors import DevkitError, NotEtale, SchemaError
from .linalg import mat_mul
from .modules import (
    INF,
    CanonicalModule,
    ModuleHom,
    PresentedModule,
    canonical_module,
    exponents_from_smith,
    exponents_to_json,
    kernel_cokernel,
    presented_from_json,
)
from .rings import (
    FieldFrobenius,
    FiniteField,
    GaloisRing,
    PrimePower,
    TruncatedLaurent,
    WittFrobenius,
    apply_endo,
    el_to_json,
    endo_from_json,
    ring_from_json,
    ring_to_json,
)
from .semilinear import (
    MonoidSpec,
    SModule,
    check_etale,
    check_relations,
    etale_by_levels,
    hom_inverse,
    internal_hom,
    random_etale_smodule,
    random_smodule,
    smodule_from_json,
    smodule_to_json,
    tensor_smod,
)
from .transfer import comparison, devissage_descent, invariants
from .fontaine import (
    GaloisRep,
    TowerBudget,
    module_to_rep,
    rep_from_json,
    rep_to_json,
    rep_to_module,
    roundtrip_check,
)
from . import coinduction


SCHEMA_VERSION = 1
TIERS = {"empty": 0, "small": 1, "medium": 3}


# ---------------------------------------------------------------------------
# serialization helpers

def _mat_json(R, mat):
    return [[el_to_json(R, x) for x in row] for row in mat]


def _vec_json(R, vec):
    return [el_to_json(R, x) for x in vec]


def _exp_tokens(M):
    return ["inf" if e == INF else e for e in M.exps]


def _display_exps(M):
    """Exponent tokens with the ring's nilpotency bound spelled out."""
    bound = M.ring.bound()
    return ["inf@%d" % bound if e == INF else e for e in M.exps]


def _witness_json(R, witness):
    if witness is None:
        return None
    return {"kind": witness["kind"], "vector": _vec_json(R, witness["vector"])}


def _failures_json(R, failures):
    out = {}
    for label, info in failures.items():
        out[label] = {
            "kernel": _exp_tokens(info["kernel"]),
            "cokernel": _exp_tokens(info["cokernel"]),
            "witness": _witness_json(R, info["witness"]),
        }
    return out


# ---------------------------------------------------------------------------
# problem file validation

def _check_keys(obj, allowed, required, what):
    if not isinstance(obj, dict):
        raise SchemaError("%s must be an object" % what)
    unknown = set(obj) - set(allowed)
    if unknown:
        raise SchemaError("unknown %s fields: %s" % (what, sorted(unknown)))
    missing = set(required) - set(obj)
    if missing:
        raise SchemaError("%s needs %s" % (what, sorted(missing)))


def _int_option(options, key, minimum):
    value = options[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise SchemaError("option %r must be an integer >= %d" % (key, minimum))
    return value


def _parse_options(obj):
    _check_keys(obj, {"seed", "budget", "caps", "tier"}, (), "options")
    options = {"seed": 0, "budget": None, "caps": {}, "tier": "small"}
    if "seed" in obj:
        options["seed"] = _int_option(obj, "seed", 0)
    if "budget" in obj:
        options["budget"] = _int_option(obj, "budget", 1)
    if "caps" in obj:
        caps = obj["caps"]
        if not isinstance(caps, dict):
            raise SchemaError("option 'caps' must be an object")
        for key, value in caps.items():
            if key not in DEFAULT_CAPS:
                raise SchemaError("unknown cap %r" % key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise SchemaError("cap %r must be a positive integer" % key)
        options["caps"] = dict(caps)
    if "tier" in obj:
        tier = obj["tier"]
        if tier not in TIERS:
            raise SchemaError("tier must be one of %s" % sorted(TIERS))
        options["tier"] = tier
    return options


def _validate_problem(problem):
    _check_keys(problem, {"schema", "command", "payload", "options"},
                {"schema", "command"}, "problem file")
    if problem["schema"] != SCHEMA_VERSION:
        raise SchemaError("unsupported schema version %r" % (problem["schema"],))
    command = problem["command"]
    if command not in _HANDLERS:
        raise SchemaError("unknown command %r" % (command,))
    payload = problem.get("payload", {})
    if not isinstance(payload, dict):
        raise SchemaError("payload must be an object")
    options = _parse_options(problem.get("options", {}))
    return command, payload, options


def _budget_of(options):
    if options["budget"] is None:
        return None
    return TowerBudget(max_level=options["budget"])


def _labels_of(payload, D):
    labels = payload.get("labels")
    if labels is None:
        return tuple(D.monoid.labels)
    if not isinstance(labels, list) or not labels or any(
            not isinstance(l, str) for l in labels):
        raise SchemaError("labels must be a nonempty list of strings")
    if len(set(labels)) != len(labels):
        raise SchemaError("labels must be distinct")
    for l in labels:
        if l not in D.monoid.labels:
            raise SchemaError("unknown generator label %r" % l)
    return tuple(labels)


# ---------------------------------------------------------------------------
# command handlers

def _run_check_etale(payload, options):
    _check_keys(payload, {"smodule"}, {"smodule"}, "check-etale payload")
    D = smodule_from_json(payload["smodule"])
    report = check_etale(D)
    R = D.ring
    body = {
        "etale": report.etale,
        "inverses": {label: _mat_json(R, inv.matrix)
                     for label, inv in report.inverses.items()},
        "failures": _failures_json(R, report.failures),
    }
    certificate = {"inverses": body["inverses"]}
    return report.etale, body, certificate


def _run_devissage(payload, options):
    _check_keys(payload, {"module"}, {"module"}, "devissage payload")
    P = presented_from_json(payload["module"])
    res = P.smith()
    M = exponents_from_smith(res)
    R = P.ring
    body = {
        "generators": P.ngens,
        "relations": len(P.relations),
        "exponents": _display_exps(M),
        "module": exponents_to_json(M),
    }
    certificate = {
        "U": _mat_json(R, res.U),
        "D": _mat_json(R, res.D),
        "V": _mat_json(R, res.V),
        "diagonal": _vec_json(R, res.diag),
    }
    return True, body, certificate


def _run_tensor(payload, options):
    _check_keys(payload, {"left", "right"}, {"left", "right"},
                "tensor payload")
    left = smodule_from_json(payload["left"])
    right = smodule_from_json(payload["right"])
    product = tensor_smod(left, right)
    report = check_etale(product)
    body = {
        "result": smodule_to_json(product),
        "etale": report.etale,
        "failures": _failures_json(product.ring, report.failures),
    }
    return report.etale, body, None


def _run_hom(payload, options):
    _check_keys(payload, {"source", "target"}, {"source", "target"},
                "hom payload")
    source = smodule_from_json(payload["source"])
    target = smodule_from_json(payload["target"])
    H, order = internal_hom(source, target)
    report = check_etale(H)
    body = {
        "result": smodule_to_json(H),
        "entry_order": list(order),
        "etale": report.etale,
        "failures": _failures_json(H.ring, report.failures),
    }
    return report.etale, body, None


def _run_invariants(payload, options):
    _check_keys(payload, {"smodule", "labels"}, {"smodule"},
                "invariants payload")
    D = smodule_from_json(payload["smodule"])
    labels = _labels_of(payload, D)
    inv = invariants(D, labels)
    comp = comparison(D, inv)
    body = {
        "labels": list(labels),
        "fixed_ring": ring_to_json(inv.entry.fixed),
        "module": exponents_to_json(inv.module),
        "exponents": _display_exps(inv.module),
        "basis": [_vec_json(D.ring, v) for v in inv.basis],
        "comparison": {"iso": comp.iso,
                       "witness": _witness_json(D.ring, comp.witness)},
    }
    return comp.iso, body, None


def _run_descend(payload, options):
    _check_keys(payload, {"smodule", "labels", "strict"}, {"smodule"},
                "descend payload")
    D = smodule_from_json(payload["smodule"])
    labels = _labels_of(payload, D)
    strict = payload.get("strict", False)
    if not isinstance(strict, bool):
        raise SchemaError("strict must be a boolean")
    inv, cert = devissage_descent(D, labels, strict=strict)
    levels = [{"level": rec.level,
               "fully_lifted": rec.fully_lifted,
               "reduces_to_previous": rec.reduces_to_previous,
               "comparison_iso": rec.comparison_iso}
              for rec in cert.levels]
    body = {
        "labels": list(labels),
        "fixed_ring": ring_to_json(inv.entry.fixed),
        "module": exponents_to_json(inv.module),
        "exponents": _display_exps(inv.module),
        "basis": [_vec_json(D.ring, v) for v in inv.basis],
        "certificate": {"levels": levels, "final_agrees": cert.final_agrees},
    }
    certificate = {
        "levels": [dict(rec, basis_size=len(cert.levels[i].basis))
                   for i, rec in enumerate(levels)],
        "final_agrees": cert.final_agrees,
    }
    return cert.final_agrees, body, certificate


def _run_fontaine_d2v(payload, options):
    _check_keys(payload, {"smodule"}, {"smodule"}, "fontaine-d2v payload")
    D = smodule_from_json(payload["smodule"])
    V, sol = module_to_rep(D, budget=_budget_of(options))
    body = {
        "rep": rep_to_json(V),
        "level": sol.level,
        "comparison_iso": sol.comparison_iso,
    }
    certificate = {"level": sol.level, "tower": sol.tower.describe()}
    return sol.comparison_iso, body, certificate


def _run_fontaine_v2d(payload, options):
    _check_keys(payload, {"rep", "target"}, {"rep", "target"},
                "fontaine-v2d payload")
    V = rep_from_json(payload["rep"])
    target = ring_from_json(payload["target"])
    D, sol = rep_to_module(V, target, budget=_budget_of(options))
    body = {
        "smodule": smodule_to_json(D),
        "level": sol.level,
        "comparison_iso": sol.comparison_iso,
    }
    certificate = {"level": sol.level, "tower": sol.tower.describe()}
    return sol.comparison_iso, body, certificate


def _run_fontaine_roundtrip(payload, options):
    _check_keys(payload, {"rep", "smodule", "target"}, (),
                "fontaine-roundtrip payload")
    has_rep = "rep" in payload
    has_mod = "smodule" in payload
    if has_rep == has_mod:
        raise SchemaError(
            "fontaine-roundtrip needs exactly one of rep or smodule")
    target = None
    if "target" in payload:
        if not has_rep:
            raise SchemaError("target only applies to the rep direction")
        target = ring_from_json(payload["target"])
    x = rep_from_json(payload["rep"]) if has_rep \
        else smodule_from_json(payload["smodule"])
    rt = roundtrip_check(x, budget=_budget_of(options), target=target)
    if rt.direction == "rep":
        iso_ring = x.ring
        recovered = _exp_tokens(rt.rep.base)
    else:
        iso_ring = rt.module.ring
        recovered = _exp_tokens(rt.module.base)
    body = {
        "direction": rt.direction,
        "ok": rt.ok,
        "forward_level": rt.forward_level,
        "back_level": rt.back_level,
        "exponents_match": rt.exponents_match,
        "comparisons": list(rt.comparisons),
        "recovered_exponents": recovered,
        "iso": None if rt.iso is None else _mat_json(iso_ring, rt.iso.matrix),
    }
    return rt.ok, body, None


def _block_map_json(R, bmap):
    from .rings import endo_to_json
    return {
        "src": list(bmap.src),
        "twists": [endo_to_json(R, a) for a in bmap.twists],
        "mats": [_mat_json(R, m) for m in bmap.mats],
    }


def _run_coinduce(payload, options):
    allowed = {"inclusion", "smodule", "ring", "endos", "descend", "bijection"}
    _check_keys(payload, allowed, {"inclusion"}, "coinduce payload")
    data = coinduction.data_from_json(payload["inclusion"])
    has_mod = "smodule" in payload
    has_ring = "ring" in payload or "endos" in payload
    if has_mod == has_ring:
        raise SchemaError(
            "coinduce needs either smodule or ring with endos")

    if has_ring:
        _check_keys(payload, allowed, {"inclusion", "ring", "endos"},
                    "coinduce payload")
        for key in ("descend", "bijection"):
            if payload.get(key):
                raise SchemaError("%s applies to module coinduction" % key)
        R = ring_from_json(payload["ring"])
        if not isinstance(payload["endos"], list):
            raise SchemaError("endos must be a list")
        endos = [endo_from_json(R, e) for e in payload["endos"]]
        ring = coinduction.coinduce_ring(coinduction.MonoidRing(R, endos),
                                         data)
        cert = ring.certificate
        body = {
            "ring": ring.describe(),
            "reps": [list(r) if isinstance(r, tuple) else r
                     for r in ring.reps],
            "transitions": {label: {
                "src": list(ring.transitions[label][0]),
                "twists": [_endo_json_of(R, a)
                           for a in ring.transitions[label][1]],
            } for label in ring.labels},
        }
        certificate = {"reps": body["reps"], "bound": cert.bound,
                       "identity_index": cert.identity_index}
        return True, body, certificate

    D = smodule_from_json(payload["smodule"])
    Dc = coinduction.coinduce_module(D, data)
    failures = Dc.etale_report()
    etale = not failures
    verdict = etale
    cert = Dc.ring.certificate
    body = {
        "reps": [list(r) if isinstance(r, tuple) else r
                 for r in Dc.ring.reps],
        "components": len(Dc.components),
        "etale": etale,
        "failures": {label: list(ts) for label, ts in failures.items()},
        "coinduced": coinduction.coinduced_to_json(Dc),
    }
    if payload.get("bijection"):
        br = coinduction.invariants_bijection(data, D)
        body["bijection"] = {
            "holds": br.bijection,
            "fixed_count": br.fixed_count,
            "target_count": br.target_count,
        }
        verdict = verdict and br.bijection
    if payload.get("descend"):
        res = coinduction.descend_from_coinduced(Dc)
        exact = (res.recoinduced.actions == Dc.actions
                 and [M.exps for M in res.recoinduced.components]
                 == [M.exps for M in Dc.components])
        body["descended"] = smodule_to_json(res.module)
        body["witness"] = _block_map_json(Dc.ring.base, res.witness)
        body["roundtrip_exact"] = exact
        verdict = verdict and exact
    certificate = {"reps": body["reps"], "bound": cert.bound,
                   "identity_index": cert.identity_index}
    return verdict, body, certificate


def _endo_json_of(R, endo):
    from .rings import endo_to_json
    return endo_to_json(R, endo)


# ---------------------------------------------------------------------------
# selftest suites

class _SuiteLog:
    def __init__(self):
        self.passed = 0
        self.failures = []

    def check(self, ok, description):
        if ok:
            self.passed += 1
        else:
            self.failures.append(description)


def _selftest_rings(rng, factor, log):
    rings = [
        PrimePower(2, 3),
        FiniteField(2, (1, 1, 1)),
        GaloisRing(2, 2, (1, 1, 1)),
        TruncatedLaurent(PrimePower(2, 2), 0, 6),
    ]
    for R in rings:
        name = R.describe()
        for _ in range(6 * factor):
            a = R.random_element(rng)
            b = R.random_element(rng)
            c = R.random_element(rng)
            log.check(R.mul(R.mul(a, b), c) == R.mul(a, R.mul(b, c)),
                      "%s: multiplication is not associative" % name)
            log.check(R.mul(a, R.add(b, c)) == R.add(R.mul(a, b), R.mul(a, c)),
                      "%s: multiplication does not distribute" % name)
            log.check(R.add(a, R.neg(a)) == R.zero(),
                      "%s: negation is not an inverse" % name)
    for R, endo in [(FiniteField(2, (1, 1, 1)), FieldFrobenius(1)),
                    (GaloisRing(2, 2, (1, 1, 1)), WittFrobenius(1))]:
        name = R.describe()
        for _ in range(6 * factor):
            a = R.random_element(rng)
            b = R.random_element(rng)
            log.check(apply_endo(R, endo, R.add(a, b))
                      == R.add(apply_endo(R, endo, a), apply_endo(R, endo, b)),
                      "%s: Frobenius is not additive" % name)
            log.check(apply_endo(R, endo, R.mul(a, b))
                      == R.mul(apply_endo(R, endo, a), apply_endo(R, endo, b)),
                      "%s: Frobenius is not multiplicative" % name)


def _selftest_modules(rng, factor, log):
    rings = [PrimePower(2, 3), GaloisRing(2, 2, (1, 1, 1))]
    for R in rings:
        name = R.describe()
        for _ in range(4 * factor):
            ngens = rng.randrange(1, 4)
            nrels = rng.randrange(0, 4)
            rels = [[R.random_element(rng) for _ in range(ngens)]
                    for _ in range(nrels)]
            P = PresentedModule(R, rels, ngens=ngens)
            res = P.smith()
            if res.diag or res.V:
                recomposed = mat_mul(R, mat_mul(R, res.U, P.matrix()), res.V)
                log.check(recomposed == res.D,
                          "%s: smith transforms do not recompose" % name)
            M = exponents_from_smith(res)
            log.check(list(M.exps) == sorted(M.exps, reverse=True),
                      "%s: exponents are not descending" % name)
            log.check(canonical_module(R, M.exps).exps == M.exps,
                      "%s: canonical form is not idempotent" % name)


def _phi_monoid(R, power=1):
    if isinstance(R, FiniteField):
        return MonoidSpec(R, [("phi", FieldFrobenius(power))])
    return MonoidSpec(R, [("phi", WittFrobenius(power))])


def _selftest_semilinear(rng, factor, log):
    F4 = FiniteField(2, (1, 1, 1))
    GR = GaloisRing(2, 2, (1, 1, 1))
    cases = [(F4, (INF,)), (F4, (INF, INF)), (GR, (INF, 1)), (GR, (2, 1))]
    for R, exps in cases:
        monoid = _phi_monoid(R)
        for _ in range(2 * factor):
            D = random_etale_smodule(monoid, exps, rng)
            report = check_etale(D)
            log.check(report.etale,
                      "sampled module failed the direct etale test")
            log.check(etale_by_levels(D),
                      "etale module failed the residue-level criterion")
        for _ in range(2 * factor):
            D = random_smodule(monoid, exps, rng)
            log.check(check_etale(D).etale == etale_by_levels(D),
                      "direct and residue etale tests disagree")


def _random_invertible(R, n, rng, tries=64):
    free = CanonicalModule(ring=R, exps=(INF,) * n)
    for _ in range(tries):
        B = [[R.random_element(rng) for _ in range(n)] for _ in range(n)]
        hom = ModuleHom(free, free, B)
        if kernel_cokernel(hom).iso:
            return hom
    raise NotEtale("no invertible sample found within the budget")


def _selftest_transfer(rng, factor, log):
    GR = GaloisRing(2, 2, (1, 1, 1))
    monoid = _phi_monoid(GR)
    for exps in [(INF,), (2, 1)]:
        for _ in range(2 * factor):
            D = random_etale_smodule(monoid, exps, rng)
            inv = invariants(D, ("phi",))
            direct, cert = devissage_descent(D, ("phi",))
            log.check(cert.final_agrees,
                      "descent basis disagrees with the direct solve")
            log.check(direct.module.exps == inv.module.exps,
                      "descent exponents disagree with the direct solve")
    # coboundary twists are trivializable, so base change must be onto
    endo = monoid.endo_of("phi")
    for _ in range(2 * factor):
        hom = _random_invertible(GR, 2, rng)
        twisted = [[apply_endo(GR, endo, x) for x in row] for row in hom.matrix]
        inv_twisted = hom_inverse(ModuleHom(hom.source, hom.target, twisted))
        A = mat_mul(GR, hom.matrix, inv_twisted.matrix)
        D = SModule(monoid, hom.source, {"phi": A})
        comp = comparison(D, invariants(D, ("phi",)))
        log.check(comp.iso,
                  "comparison fails on a trivializable coboundary twist")


def _selftest_fontaine(rng, factor, log):
    Z4 = PrimePower(2, 2)
    rep = GaloisRep(Z4, CanonicalModule(ring=Z4, exps=(INF,)), [[3]])
    rt = roundtrip_check(rep)
    log.check(rt.ok, "rank-1 representation does not round-trip")
    F4 = FiniteField(2, (1, 1, 1))
    t = F4.el((0, 1))
    D = SModule(_phi_monoid(F4), CanonicalModule(ring=F4, exps=(INF,)),
                {"phi": [[t]]})
    rt = roundtrip_check(D)
    log.check(rt.ok, "rank-1 Frobenius module does not round-trip")
    for _ in range(factor):
        M = random_etale_smodule(_phi_monoid(F4), (INF,), rng)
        log.check(roundtrip_check(M).ok,
                  "sampled Frobenius module does not round-trip")


def _selftest_coinduction(rng, factor, log):
    F4 = FiniteField(2, (1, 1, 1))
    t = F4.el((0, 1))
    data = coinduction.SubmonoidData("numeric", moduli=(2,))
    # the doubled generator acts by the squared Frobenius, so the fixed
    # pairs are the diagonal
    mr = coinduction.MonoidRing(F4, [FieldFrobenius(2)])
    br = coinduction.invariants_bijection(data, mr)
    log.check(br.bijection and br.fixed_count == 4,
              "ring invariants bijection fails for the index-2 inclusion")
    spec = MonoidSpec(F4, [("s1", FieldFrobenius(2))])
    D = SModule(spec, CanonicalModule(ring=F4, exps=(INF,)), {"s1": [[t]]})
    br = coinduction.invariants_bijection(data, D)
    log.check(br.bijection, "module invariants bijection fails")
    for _ in range(factor):
        D = random_etale_smodule(MonoidSpec(F4, [("s1", FieldFrobenius(2))]),
                                 (INF, INF), rng)
        Dc = coinduction.coinduce_module(D, data)
        res = coinduction.descend_from_coinduced(Dc)
        log.check(res.recoinduced.actions == Dc.actions,
                  "descend does not invert coinduction")


_SELFTEST_SUITES = [
    ("rings", _selftest_rings),
    ("module_core", _selftest_modules),
    ("semilinear", _selftest_semilinear),
    ("transfer", _selftest_transfer),
    ("fontaine", _selftest_fontaine),
    ("coinduction", _selftest_coinduction),
]


def _corrupted_fixture_log():
    """Negative control: a deliberately broken action must be caught."""
    F4 = FiniteField(2, (1, 1, 1))
    t = F4.el((0, 1))
    one, zero = F4.one(), F4.zero()
    monoid = MonoidSpec(F4, [("a", FieldFrobenius(1)), ("b", FieldFrobenius(1))],
                        commuting_pairs=(("a", "b"),))
    base = CanonicalModule(ring=F4, exps=(INF, INF))
    eye = [[one, zero], [zero, one]]
    D = SModule(monoid, base, {"a": eye, "b": eye})
    # corrupt one matrix behind the constructor's back
    D.actions["a"] = [[t, one], [zero, one]]
    D.actions["b"] = [[zero, one], [one, zero]]
    log = _SuiteLog()
    problems = check_relations(D)
    log.check(not problems,
              "corrupted action matrix fixture fails the relation check")
    return log


def _run_selftest(payload, options):
    _check_keys(payload, {"corrupt"}, (), "selftest payload")
    corrupt = payload.get("corrupt", False)
    if not isinstance(corrupt, bool):
        raise SchemaError("corrupt must be a boolean")
    tier = options["tier"]
    factor = TIERS[tier]
    seed = options["seed"]
    suites = {}
    total_passed = 0
    total_failed = 0
    for name, fn in _SELFTEST_SUITES:
        log = _SuiteLog()
        if factor > 0:
            rng = random.Random("%d:%s" % (seed, name))
            fn(rng, factor, log)
        suites[name] = {"passed": log.passed, "failed": len(log.failures),
                        "failures": log.failures}
        total_passed += log.passed
        total_failed += len(log.failures)
    if corrupt:
        log = _corrupted_fixture_log()
        suites["negative_control"] = {
            "passed": log.passed, "failed": len(log.failures),
            "failures": log.failures,
        }
        total_passed += log.passed
        total_failed += len(log.failures)
    body = {
        "tier": tier,
        "suites": suites,
        "counts": {"passed": total_passed, "failed": total_failed},
    }
    return total_failed == 0, body, None


_HANDLERS = {
    "check-etale": _run_check_etale,
    "devissage": _run_devissage,
    "tensor": _run_tensor,
    "hom": _run_hom,
    "invariants": _run_invariants,
    "descend": _run_descend,
    "fontaine-d2v": _run_fontaine_d2v,
    "fontaine-v2d": _run_fontaine_v2d,
    "fontaine-roundtrip": _run_fontaine_roundtrip,
    "coinduce": _run_coinduce,
    "selftest": _run_selftest,
}


# ---------------------------------------------------------------------------
# dispatch

def dispatch(problem):
    """Validate a problem file, run its command, return (report, certificate)."""
    command, payload, options = _validate_problem(problem)
    effective = load_caps()
    effective.update(options["caps"])
    saved = dict(config.CAPS)
    config.CAPS.clear()
    config.CAPS.update(effective)
    try:
        verdict, body, certificate = _HANDLERS[command](payload, options)
    finally:
        config.CAPS.clear()
        config.CAPS.update(saved)
    report = {
        "command": command,
        "schema": SCHEMA_VERSION,
        "seed": options["seed"],
        "timing": None,
        "verdict": verdict,
        "version": __version__,
    }
    report.update(body)
    return report, certificate


def _load_problem(path):
    try:
        if path == "-":
            raw = sys.stdin.read()
        else:
            with open(path, "r", encoding="utf-8") as fh:
                raw = fh.read()
    except OSError as exc:
        raise SchemaError("cannot read problem file: %s" % exc) from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError("problem file is not valid JSON: %s" % exc) from None


def _error_json(exc):
    return {"error": {
        "kind": type(exc).__name__,
        "message": str(exc),
        "detail": exc.payload() if isinstance(exc, DevkitError) else {},
    }}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="devkit",
        description="Run devkit operations on JSON problem files and emit "
                    "deterministic JSON reports.",
        epilog="The DEVKIT_CAPS environment variable (a JSON object) "
               "overrides size guards; problem-file options may tighten "
               "them further.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "check-etale": "test that every action matrix linearizes invertibly",
        "devissage": "canonical exponents of a presented module",
        "tensor": "tensor product of two action modules",
        "hom": "internal hom of two action modules",
        "invariants": "fixed points over the fixed subring, with comparison",
        "descend": "level-by-level fixed points along the r-adic filtration",
        "fontaine-d2v": "Frobenius module to Galois representation",
        "fontaine-v2d": "Galois representation to Frobenius module",
        "fontaine-roundtrip": "both functors in sequence, with the witness iso",
        "coinduce": "coinduce a module or ring along a submonoid inclusion",
        "selftest": "run the seeded property suites",
    }
    for name, desc in descriptions.items():
        cmd = sub.add_parser(name, help=desc, description=desc)
        cmd.add_argument("--input", metavar="FILE",
                         help="JSON problem file ('-' for stdin)")
        cmd.add_argument("--seed", type=int, metavar="N",
                         help="seed for pseudo-random suites (default 0)")
        cmd.add_argument("--budget", type=int, metavar="M",
                         help="tower-level budget for fontaine searches")
        cmd.add_argument("--tier", choices=sorted(TIERS),
                         help="selftest size tier (default small)")
        cmd.add_argument("--emit-certificate", metavar="FILE",
                         help="write the certificate object to FILE")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.input is not None:
            problem = _load_problem(args.input)
            if isinstance(problem, dict) and "command" not in problem:
                problem["command"] = args.command
            if isinstance(problem, dict) and problem.get("command") != args.command:
                raise SchemaError(
                    "problem file names command %r but %r was requested"
                    % (problem.get("command"), args.command))
        elif args.command == "selftest":
            problem = {"schema": SCHEMA_VERSION, "command": "selftest"}
        else:
            raise SchemaError("command %r needs --input" % args.command)
        if not isinstance(problem, dict):
            raise SchemaError("problem file must be an object")
        options = dict(problem.get("options", {}))
        if not isinstance(options, dict):
            raise SchemaError("options must be an object")
        if args.seed is not None:
            options["seed"] = args.seed
        if args.budget is not None:
            options["budget"] = args.budget
        if args.tier is not None:
            options["tier"] = args.tier
        if options:
            problem["options"] = options
        report, certificate = dispatch(problem)
    except SchemaError as exc:
        print(json.dumps(_error_json(exc), sort_keys=True), file=sys.stderr)
        return 3
    except DevkitError as exc:
        print(json.dumps(_error_json(exc), sort_keys=True), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- errors must leave as reports
        print(json.dumps(_error_json(exc), sort_keys=True), file=sys.stderr)
        return 2
    print(json.dumps(report, sort_keys=True, indent=2))
    if args.emit_certificate and certificate is not None:
        with open(args.emit_certificate, "w", encoding="utf-8") as fh:
            json.dump(certificate, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0 if report["verdict"] else 1


if __name__ == "__main__":
    sys.exit(main())
