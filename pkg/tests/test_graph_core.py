import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab.errors import ValidationError
from curvlab.graph_core import (
    HeatSemigroup,
    build_graph,
    carre_du_champ,
    gamma2,
    gradient,
    gradient_adjoint,
    graph_from_json,
    graph_from_matrices,
    graph_to_json,
    heat_semigroup,
    inner_edge,
    inner_vertex,
    laplacian,
)
from curvlab.instances import path_graph, random_graph

seeds = st.integers(0, 10_000)


def _graph(seed, n=None):
    rng = np.random.default_rng(seed)
    return random_graph(rng, n or int(rng.integers(2, 8))), rng


def test_path_laplacian_frozen():
    g = path_graph(3, m=4.0, b=1.0)
    expected = np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]]) / 4.0
    np.testing.assert_allclose(laplacian(g), expected)


def test_build_graph_from_labels():
    g = build_graph(["a", "b", "c"], {"a": 1, "b": 2, "c": 1}, [("a", "b", 0.5), ("b", "c", 1.5)])
    assert g.size == 3
    assert g.b[g.index("a"), g.index("b")] == 0.5
    assert g.b[g.index("c"), g.index("b")] == 1.5


@pytest.mark.parametrize(
    "m,b",
    [
        ([1.0, -1.0], [[0, 1], [1, 0]]),
        ([1.0, 1.0], [[0, 1], [2, 0]]),
        ([1.0, 1.0], [[1, 1], [1, 0]]),
        ([1.0, 1.0], [[0, -1], [-1, 0]]),
        ([1.0, np.nan], [[0, 1], [1, 0]]),
    ],
)
def test_invalid_graphs_rejected(m, b):
    with pytest.raises(ValidationError):
        graph_from_matrices(m, b)


def test_json_round_trip():
    g, _ = _graph(5, 5)
    h = graph_from_json(graph_to_json(g))
    np.testing.assert_allclose(h.b, g.b)
    np.testing.assert_allclose(h.m, g.m)


def test_json_missing_key():
    with pytest.raises(ValidationError):
        graph_from_json({"vertices": [1], "m": {"1": 1}})


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_laplacian_self_adjoint_and_positive(seed):
    g, rng = _graph(seed)
    lap = laplacian(g)
    sym = np.diag(g.m) @ lap
    np.testing.assert_allclose(sym, sym.T, atol=1e-12)
    assert np.linalg.eigvalsh(sym).min() >= -1e-12
    np.testing.assert_allclose(lap @ np.ones(g.size), 0, atol=1e-12)


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_gradient_adjoint_and_dirichlet_form(seed):
    g, rng = _graph(seed)
    f = rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size)
    xi = rng.standard_normal(len(g.edges)) + 1j * rng.standard_normal(len(g.edges))
    assert inner_edge(g, gradient(g, f), xi) == pytest.approx(inner_vertex(g, f, gradient_adjoint(g, xi)), abs=1e-10)
    # ⟨f, Lf⟩ = ‖∂f‖² = Σ m Γ(f)
    energy = inner_vertex(g, f, laplacian(g) @ f)
    assert energy == pytest.approx(inner_edge(g, gradient(g, f), gradient(g, f)), abs=1e-10)
    assert energy.real == pytest.approx(float(np.sum(g.m * carre_du_champ(g, f).real)), abs=1e-10)


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_carre_du_champ_matches_definition(seed):
    g, rng = _graph(seed)
    lap = laplacian(g)
    f = rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size)
    h = rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size)
    by_def = 0.5 * (np.conj(lap @ f) * h + np.conj(f) * (lap @ h) - lap @ (np.conj(f) * h))
    np.testing.assert_allclose(carre_du_champ(g, f, h), by_def, atol=1e-10)
    assert np.all(carre_du_champ(g, f).real >= -1e-12)


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_gamma2_integrates_to_laplacian_norm(seed):
    g, rng = _graph(seed)
    f = rng.standard_normal(g.size)
    lhs = float(np.sum(g.m * gamma2(g, f).real))
    lf = laplacian(g) @ f
    assert lhs == pytest.approx(float(np.sum(g.m * lf * lf)), rel=1e-9, abs=1e-10)


@given(seed=seeds, t=st.floats(0.0, 5.0), s=st.floats(0.0, 5.0))
@settings(max_examples=40, deadline=None)
def test_heat_semigroup(seed, t, s):
    g, _ = _graph(seed)
    semi = HeatSemigroup(g)
    np.testing.assert_allclose(semi(t), scipy.linalg.expm(-t * laplacian(g)), atol=1e-10)
    np.testing.assert_allclose(semi(t) @ semi(s), semi(t + s), atol=1e-10)
    np.testing.assert_allclose(semi(t) @ np.ones(g.size), 1, atol=1e-10)
    assert semi(t).min() >= -1e-12


def test_heat_semigroup_negative_time():
    g, _ = _graph(0, 3)
    with pytest.raises(ValidationError):
        heat_semigroup(g, -0.1)
