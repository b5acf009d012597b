import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab.errors import CertificationError, ValidationError
from curvlab.graph_core import carre_du_champ, gamma2, graph_from_matrices
from curvlab.graph_curvature import (
    GeFalsifyConfig,
    GeSearchConfig,
    bakry_emery_curvature,
    certify_hodge,
    ge_curvature_search,
    ge_falsify,
    ge_rate_estimate,
    ge_rate_profile,
    ge_sides,
    idle_hodge,
    intertwining_curvature,
    jmap,
    splitting_hodge,
    two_point_entropic_exact,
    universal_bound,
)
from curvlab.instances import (
    complete_graph,
    epsilon_graph,
    path_graph,
    random_graph,
    random_subunit_degree_graph,
    two_point_graph,
    uniform_complete_graph,
)

seeds = st.integers(0, 10_000)


def _two_point_oracle(lam):
    """Brute-force grid minimum of the two-point entropic integrand."""
    beta = np.linspace(-1, 1, 2_000_001)[1:-1]
    a = lam * (1 + beta)
    b = (1 - lam) * (1 - beta)
    with np.errstate(invalid="ignore", divide="ignore"):
        logmean = np.where(np.abs(a - b) > 1e-12, (a - b) / (np.log(a) - np.log(b)), a)
    return 0.5 + float((logmean / (1 - beta**2)).min())


def test_two_point_exact_matches_brute_force():
    for lam in (0.1, 0.3, 0.5, 0.8):
        assert two_point_entropic_exact(lam) == pytest.approx(_two_point_oracle(lam), abs=1e-9)


def test_two_point_frozen_value():
    # Grid oracle above, frozen.
    assert two_point_entropic_exact(0.3) == pytest.approx(0.9686233959, abs=1e-9)
    assert two_point_entropic_exact(0.5) == pytest.approx(1.0, abs=1e-9)


def test_two_point_rejects_degenerate_lambda():
    with pytest.raises(ValidationError):
        two_point_entropic_exact(1.0)


def test_bakry_emery_path_frozen():
    # Two-point graph with m = (1/2, 1/2): value 1.
    assert bakry_emery_curvature(two_point_graph(0.5)).bound == pytest.approx(1.0, abs=1e-12)


@given(seed=seeds)
@settings(max_examples=30, deadline=None)
def test_bakry_emery_is_sharp_and_valid(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 7)))
    rep = bakry_emery_curvature(g)
    K = rep.bound
    # No sampled function beats the bound.
    for _ in range(50):
        f = rng.standard_normal(g.size)
        assert np.all(gamma2(g, f).real - K * carre_du_champ(g, f).real >= -1e-8 * (1 + abs(K)))
    # The witness attains it at its vertex.
    x = g.index(g.vertices[int(np.argmin([rep.per_site[str(v)] for v in g.vertices]))])
    f = np.real(rep.witness["vector"])
    ratio = gamma2(g, f)[x].real / carre_du_champ(g, f)[x].real
    assert ratio == pytest.approx(K, rel=1e-6, abs=1e-6)


def test_bakry_emery_isolated_vertex_is_infinite():
    g = graph_from_matrices([1, 1, 1], [[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    rep = bakry_emery_curvature(g)
    assert rep.per_site["2"] == np.inf
    assert np.isfinite(rep.bound)


@given(seed=seeds)
@settings(max_examples=25, deadline=None)
def test_hodge_constructions_certify(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 7)))
    for hodge in (idle_hodge(g), splitting_hodge(g, float(rng.uniform(-1, 2)))):
        assert hodge.certified
        xi = rng.standard_normal(len(g.edges)) + 1j * rng.standard_normal(len(g.edges))
        np.testing.assert_allclose(hodge.matrix @ jmap(g, xi), jmap(g, hodge.matrix @ xi), atol=1e-9)


def test_uncertified_hodge_rejected():
    g = uniform_complete_graph(3)
    bad = certify_hodge(g, 2 * np.eye(len(g.edges)))
    assert not bad.certified
    with pytest.raises(CertificationError):
        intertwining_curvature(g, bad)
    with pytest.raises(ValidationError):
        certify_hodge(g, np.eye(2))


@given(seed=seeds)
@settings(max_examples=25, deadline=None)
def test_intertwining_never_exceeds_bakry_emery(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 7)))
    be = bakry_emery_curvature(g).bound
    assert intertwining_curvature(g, idle_hodge(g)).bound <= be + 1e-8
    assert intertwining_curvature(g, splitting_hodge(g, 0.3)).bound <= be + 1e-8


def test_real_and_complex_paths_agree():
    g = random_graph(np.random.default_rng(2), 5)
    hodge = idle_hodge(g)
    a = intertwining_curvature(g, hodge, field_kind="real").bound
    b = intertwining_curvature(g, hodge, field_kind="complex").bound
    assert a == pytest.approx(b, abs=1e-9)


def test_universal_bound_frozen_and_validated():
    assert universal_bound(path_graph(3, m=4.0, b=1.0)) == pytest.approx(-5.5)
    with pytest.raises(ValidationError):
        universal_bound(path_graph(3, m=1.0, b=1.0))


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_intertwining_constant_implies_gradient_estimates(seed):
    rng = np.random.default_rng(seed)
    g = random_subunit_degree_graph(rng, int(rng.integers(2, 6)))
    K = intertwining_curvature(g, idle_hodge(g)).bound
    for mean in ("logarithmic", "arithmetic", "geometric"):
        assert ge_falsify(g, mean, K, GeFalsifyConfig(samples=100, seed=seed)) is None


@given(seed=seeds, n=st.integers(2, 5))
@settings(max_examples=20, deadline=None)
def test_ge_rate_estimate_is_the_time_derivative(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    f = rng.standard_normal(n)
    rho = rng.uniform(0.2, 1.0, n)
    rho /= rho.sum()
    for mean in ("logarithmic", "geometric", "harmonic", "left_trivial"):
        K = ge_rate_estimate(g, mean, f, rho)
        h = 1e-5
        diffs = [np.subtract(*ge_sides(g, mean, K, f, rho, t))[0] for t in (h, 2 * h)]
        # lhs - rhs vanishes at t=0; its slope with K = estimate must vanish too.
        slope = (4 * diffs[0] - diffs[1]) / (2 * h)
        scale = ge_sides(g, mean, 0.0, f, rho, 0.0)[1][0]
        assert abs(slope) <= 1e-5 * max(1.0, scale)


@given(seed=seeds)
@settings(max_examples=15, deadline=None)
def test_arithmetic_gradient_estimate_recovers_bakry_emery(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 6)))
    be = bakry_emery_curvature(g).bound
    found = ge_curvature_search(g, "arithmetic", GeSearchConfig(samples=10, seed=seed, refine_steps=20)).bound
    assert found == pytest.approx(be, abs=1e-6)


def test_ge_rate_profile_is_minimum_over_functions():
    rng = np.random.default_rng(7)
    g = random_graph(rng, 4)
    rho = np.array([0.1, 0.2, 0.3, 0.4])
    value, witness = ge_rate_profile(g, "logarithmic", rho)
    assert ge_rate_estimate(g, "logarithmic", np.real(witness), rho) == pytest.approx(value, abs=1e-8)
    for _ in range(100):
        est = ge_rate_estimate(g, "logarithmic", rng.standard_normal(4), rho)
        assert est >= value - 1e-9


def test_ge_search_reproducible_and_budget_monotone():
    g = two_point_graph(0.3)
    a = ge_curvature_search(g, "logarithmic", GeSearchConfig(samples=30, seed=1))
    b = ge_curvature_search(g, "logarithmic", GeSearchConfig(samples=30, seed=1))
    c = ge_curvature_search(g, "logarithmic", GeSearchConfig(samples=60, seed=1))
    assert a.to_json() == b.to_json()
    assert c.bound <= a.bound


def test_ge_search_upper_bounds_exact_two_point_value():
    for lam in (0.2, 0.5):
        found = ge_curvature_search(two_point_graph(lam), "logarithmic", GeSearchConfig(samples=50)).bound
        assert found >= two_point_entropic_exact(lam) - 1e-6


def test_falsify_detects_too_large_constant():
    g = uniform_complete_graph(4)
    cex = ge_falsify(g, "logarithmic", 3.0, GeFalsifyConfig(samples=50))
    assert cex is not None and cex.lhs > cex.rhs
    assert ge_falsify(g, "logarithmic", 0.75, GeFalsifyConfig(samples=200)) is None


def test_complete_graph_closed_forms():
    m = np.array([0.1, 0.2, 0.3, 0.4])
    assert bakry_emery_curvature(complete_graph(m)).bound == pytest.approx(0.6, abs=1e-10)
    g = uniform_complete_graph(5)
    assert intertwining_curvature(g, splitting_hodge(g, 0.7)).bound == pytest.approx(0.7, abs=1e-9)


def test_epsilon_graph_layout():
    g = epsilon_graph(0.1)
    assert g.vertices == (1, 2, 3)
    assert g.m[0] == pytest.approx(10.0) and g.m[2] == pytest.approx(0.05)
    assert math.isfinite(bakry_emery_curvature(g).bound)
