"""Bundled reproduction runs for the known curvature constants.

Each case returns a :class:`Reproduction` holding the expected value, the
computed value and whether the comparison passed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .graph_curvature import (
    GeSearchConfig,
    bakry_emery_curvature,
    ge_curvature_search,
    idle_hodge,
    intertwining_curvature,
    splitting_hodge,
    two_point_entropic_exact,
    universal_bound,
)
from .instances import epsilon_graph, path_graph, two_point_graph, uniform_complete_graph
from .mapping_rep import cyclic_shifts, hypercube, intertwining_curvature_mapping, mapping_hodge
from .optimize import SearchConfig
from .qms_core import (
    Fodc,
    commuting_projections,
    dephasing,
    depolarizing,
    family_generator,
    pimsner_popa,
)
from .qms_curvature import (
    be_curvature_qms,
    ge_derivative_infimum,
    intertwining_curvature_qms,
    mlsi_falsify,
    product_hodge,
    splitting_hodge_qms,
    witness_upper_bound,
)
from .report import CurvatureReport


@dataclass
class Reproduction:
    case: str
    expected: float
    computed: float
    relation: str
    passed: bool
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.case}: expected {self.relation} {self.expected:.10g}, computed {self.computed:.10g}"

    def report(self) -> CurvatureReport:
        return CurvatureReport(
            "reproduce",
            self.computed,
            {},
            None,
            "exact_pencil" if self.extra.get("mode", "exact_pencil") == "exact_pencil" else "sampled",
            samples=self.extra.get("samples"),
            seed=self.extra.get("seed"),
            tolerances={"tolerance": self.extra.get("tolerance", 0.0)},
            details={
                "case": self.case,
                "expected": self.expected,
                "relation": self.relation,
                "pass": self.passed,
                **{k: v for k, v in self.extra.items() if k not in ("mode", "samples", "seed", "tolerance")},
            },
        )


def _compare(case, expected, computed, relation, tol, **extra):
    if relation == "=":
        ok = abs(computed - expected) <= tol
    elif relation == ">=":
        ok = computed >= expected - tol
    elif relation == "<=":
        ok = computed <= expected + tol
    else:
        ok = computed < expected
    return Reproduction(case, float(expected), float(computed), relation, bool(ok), {"tolerance": tol, **extra})


def complete_graph_n4(samples, seed):
    g = uniform_complete_graph(4)
    rep = intertwining_curvature(g, splitting_hodge(g, 0.75))
    return _compare("complete-graph-n4", 0.75, rep.bound, "=", 1e-8)


def be_complete_graph(samples, seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.1, 1.0, 5)
    m /= m.sum()
    from .instances import complete_graph

    rep = bakry_emery_curvature(complete_graph(m))
    return _compare("be-complete-graph", 0.5 + m.min(), rep.bound, "=", 1e-8)


def two_point_03(samples, seed):
    exact = two_point_entropic_exact(0.3)
    rep = ge_curvature_search(two_point_graph(0.3), "logarithmic", GeSearchConfig(samples=samples, seed=seed))
    return _compare("two-point-0.3", exact, rep.bound, "=", 1e-3, mode="sampled", samples=samples, seed=seed)


def universal_bound_p3(samples, seed):
    g = path_graph(3, m=4.0, b=1.0)
    bound = universal_bound(g)
    rep = intertwining_curvature(g, idle_hodge(g))
    out = _compare("universal-bound-p3", -5.5, bound, "=", 1e-12, idle_intertwining=rep.bound)
    out.passed = out.passed and rep.bound >= bound - 1e-8
    return out


def hypercube_involutive(samples, seed):
    mr = hypercube(3, kappa=1.3)
    rep = intertwining_curvature_mapping(mr, mapping_hodge(mr, "involutive"))
    return _compare("hypercube-involutive", 2.6, rep.bound, ">=", 1e-8)


def cyclic_commuting(samples, seed):
    mr = cyclic_shifts(6)
    rep = intertwining_curvature_mapping(mr, mapping_hodge(mr, "commuting"))
    return _compare("cyclic-commuting", 0.0, rep.bound, ">=", 1e-9)


def epsilon_example(samples, seed):
    g = epsilon_graph(0.01)
    be = bakry_emery_curvature(g).bound
    rep = ge_curvature_search(g, "logarithmic", GeSearchConfig(samples=samples, seed=seed))
    out = _compare("epsilon-example", 0.9, rep.bound, "<", 0.0, mode="sampled", samples=samples, seed=seed, bakry_emery=be)
    out.passed = out.passed and be >= 1 - 1e-6
    return out


def depolarizing_n2_intertwining(samples, seed):
    gen = depolarizing(2)
    calc = Fodc(gen)
    hodge = splitting_hodge_qms(calc, 5 / 6)
    rep = intertwining_curvature_qms(hodge, SearchConfig(samples=samples, seed=seed), real_structure=False)
    return _compare("depolarizing-n2-intertwining", 5 / 6, rep.bound, "=", 1e-6, mode="sampled", samples=samples, seed=seed)


def depolarizing_witness(samples, seed):
    results = []
    for n in (2, 3, 4):
        calc = Fodc(depolarizing(n))
        e = np.zeros((n, n))
        e[0, 1] = 1.0
        results.append(witness_upper_bound(splitting_hodge_qms(calc, 0.5 + 1 / (n + 1)), calc.partial(e)) - (0.5 + 1 / (n + 1)))
    worst = max(abs(r) for r in results)
    return _compare("depolarizing-witness", 0.0, worst, "=", 1e-8)


def depolarizing_ge(samples, seed):
    rep = ge_derivative_infimum(depolarizing(2), "logarithmic", samples=samples, seed=seed)
    return _compare("depolarizing-ge-n2", 1.0, rep.bound, ">=", 1e-3, mode="sampled", samples=samples, seed=seed)


def mlsi_qubit(samples, seed):
    gen = depolarizing(2)
    holds = mlsi_falsify(gen, 2.0, samples=samples, seed=seed)
    sharp = mlsi_falsify(gen, 2.2, samples=samples, seed=seed)
    out = _compare("mlsi-qubit", 2.0, 2.0, "=", 0.0, mode="sampled", samples=samples, seed=seed, rate_2_2_falsified=not sharp.holds)
    out.passed = holds.holds and not sharp.holds
    return out


def dephasing_blocks(samples, seed):
    spec = {"kind": "blocks", "sizes": [2, 1]}
    c = pimsner_popa(spec, SearchConfig(samples=samples, steps=100, seed=seed)).value
    rep = be_curvature_qms(dephasing(spec), SearchConfig(samples=samples, seed=seed), self_adjoint=False)
    return _compare("dephasing-blocks", 0.5 + c / (1 + c), rep.bound, ">=", 1e-4, mode="sampled", samples=samples, seed=seed, pimsner_popa=c)


def commuting_projections_case(samples, seed):
    p1 = np.diag([1.0, 1.0, 0.0, 0.0])
    p2 = np.diag([1.0, 0.0, 1.0, 0.0])
    alphas = (1.0, 1.0)
    gen = commuting_projections([p1, p2], alphas)
    hodges = [splitting_hodge_qms(Fodc(family_generator(gen, k)), alphas[k]) for k in range(2)]
    rep = intertwining_curvature_qms(product_hodge(gen, hodges), SearchConfig(samples=samples, seed=seed), real_structure=False)
    return _compare("commuting-projections", 1.0, rep.bound, ">=", 1e-4, mode="sampled", samples=samples, seed=seed)


CASES = {
    "complete-graph-n4": complete_graph_n4,
    "be-complete-graph": be_complete_graph,
    "two-point-0.3": two_point_03,
    "universal-bound-p3": universal_bound_p3,
    "hypercube-involutive": hypercube_involutive,
    "cyclic-commuting": cyclic_commuting,
    "epsilon-example": epsilon_example,
    "depolarizing-n2-intertwining": depolarizing_n2_intertwining,
    "depolarizing-witness": depolarizing_witness,
    "depolarizing-ge-n2": depolarizing_ge,
    "mlsi-qubit": mlsi_qubit,
    "dephasing-blocks": dephasing_blocks,
    "commuting-projections": commuting_projections_case,
}


def reproduce(case: str, samples: int = 1000, seed: int = 0) -> Reproduction:
    try:
        func = CASES[case]
    except KeyError:
        raise ValidationError(f"unknown case {case!r}; known cases: {', '.join(CASES)}") from None
    return func(samples, seed)
