import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mealygroups.automaton import parse_recursion
from mealygroups.group import GroupHandle
from mealygroups.presets import preset
from mealygroups.spectra import (MarkovMatrix, contained, histogram, jacobi_eigh, level_spectrum,
                                 markov_matrix, schreier_graph, spectrum, spectrum_union)

from conftest import ALL_PRESETS
from oracles import char_poly_roots, level_perm


def trivial_group():
    return GroupHandle(parse_recursion("e = (e, e)"))


# ---------------------------------------------------------- Schreier graphs

def test_trivial_group_graph_has_isolated_vertices():
    g = schreier_graph(trivial_group(), 2)
    assert g.n_vertices == 4 and g.edges() == []
    assert g.n_components() == 4


def test_891_level_3_connected():
    assert schreier_graph(GroupHandle(preset(891)), 3).n_components() == 1


@pytest.mark.parametrize("idx", [741, 802, 846, 2852])
def test_edge_count_and_labels(idx):
    G = GroupHandle(preset(idx))
    for n in range(4):
        g = schreier_graph(G, n)
        assert len(g.edges()) == len(G.symmetric) * 2 ** n
        for lab, p in zip(g.labels, g.perms):
            assert sorted(p) == list(range(2 ** n))


def test_graph_perms_match_table_oracle():
    G = GroupHandle(preset(741))
    g = schreier_graph(G, 4)
    for s, p in zip(G.symmetric, g.perms):
        assert list(p) == level_perm(G.automaton, (s.letter,), 4)


def test_graph_exports():
    g = schreier_graph(GroupHandle(preset(802)), 2)
    dot = g.to_dot()
    assert dot.startswith("digraph") and dot.count("->") == len(g.edges())
    lines = g.edge_list().splitlines()
    assert len(lines) == len(g.edges())
    assert all(len(a) == 2 and len(b) == 2 for a, b, _ in (l.split() for l in lines))


def test_level_bounds():
    with pytest.raises(ValueError):
        schreier_graph(GroupHandle(preset(741)), 13)


# ---------------------------------------------------------- Markov matrices

def test_802_level_1_matrix():
    M = markov_matrix(GroupHandle(preset(802)), 1)
    assert M.denominator == 3
    assert M.counts.tolist() == [[2, 1], [1, 2]]
    assert np.allclose(M.dense(), [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])


def test_trivial_group_matrix_is_identity():
    M = markov_matrix(trivial_group(), 3)
    assert (M.dense() == np.eye(8)).all()


@pytest.mark.parametrize("idx", ALL_PRESETS)
def test_matrix_symmetric_and_stochastic(idx):
    M = markov_matrix(GroupHandle(preset(idx)), 5)
    assert M.is_symmetric()
    assert (M.counts.sum(axis=0) == M.denominator).all()
    assert (M.counts.sum(axis=1) == M.denominator).all()
    assert (M.counts >= 0).all()


# ------------------------------------------------------------------ spectra

def test_802_level_1_spectrum():
    r = spectrum(markov_matrix(GroupHandle(preset(802)), 1))
    assert np.allclose(r.eigenvalues, [1 / 3, 1])


def test_trivial_group_spectrum():
    r = level_spectrum(trivial_group(), 3)
    assert np.allclose(r.eigenvalues, 1.0)
    assert r.multiplicity(1.0) == 8 == r.components


@pytest.mark.parametrize("n", range(1, 8))
def test_891_eigenvalue_one_simple(n):
    r = level_spectrum(GroupHandle(preset(891)), n)
    assert r.multiplicity(1.0) == 1 == r.components


@pytest.mark.parametrize("idx", ALL_PRESETS)
def test_multiplicity_of_one_is_component_count(idx):
    G = GroupHandle(preset(idx))
    for n in range(0, 6):
        r = level_spectrum(G, n)
        assert r.multiplicity(1.0) == r.components
        assert r.eigenvalues.min() >= -1 - 1e-8 and r.eigenvalues.max() <= 1 + 1e-8


@pytest.mark.parametrize("idx", [741, 775, 846, 2294])
def test_spectra_nested(idx):
    G = GroupHandle(preset(idx))
    prev = level_spectrum(G, 0).eigenvalues
    for n in range(1, 7):
        cur = level_spectrum(G, n).eigenvalues
        assert contained(prev, cur, 1e-6)
        prev = cur


@pytest.mark.parametrize("idx", ALL_PRESETS)
def test_jacobi_matches_char_poly_at_level_2(idx):
    A = markov_matrix(GroupHandle(preset(idx)), 2).dense()
    vals = jacobi_eigh(A)[0]
    assert np.allclose(vals, char_poly_roots(A), atol=1e-8)


@st.composite
def symmetric(draw):
    n = draw(st.integers(1, 8))
    B = draw(arrays(np.float64, (n, n), elements=st.floats(-1, 1)))
    return (B + B.T) / 2


@given(symmetric())
@settings(max_examples=60, deadline=None)
def test_jacobi_against_numpy_reference(A):
    vals, vecs, off, _, _ = jacobi_eigh(A, vectors=True)
    assert off < 1e-10
    assert np.allclose(vals, np.linalg.eigvalsh(A), atol=1e-8)
    assert np.allclose(A @ vecs, vecs * vals, atol=1e-7)


def test_non_symmetric_rejected():
    with pytest.raises(ValueError):
        spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))
    bad = MarkovMatrix(np.array([[1, 1], [0, 1]]), 2)
    with pytest.raises(ValueError):
        spectrum(bad)


def test_residuals_small():
    r = level_spectrum(GroupHandle(preset(775)), 6)
    assert r.residual is not None and r.residual < 1e-8


# ---------------------------------------------------------------- histograms

def test_histogram_bins_and_csv():
    h = histogram([-1.0, -0.99, 0.0, 0.5, 1.0])
    assert len(h.counts) == 64 and h.counts.sum() == 5
    assert h.counts[0] == 2 and h.counts[-1] == 1 and h.counts[32] == 1
    rows = h.to_csv().splitlines()
    assert rows[0] == "bin_lo,bin_hi,count" and len(rows) == 65


def test_trivial_group_single_bin():
    u = spectrum_union(trivial_group(), 3)
    assert (u.histogram.counts > 0).sum() == 1 and u.histogram.counts[-1] == 8


def test_union_merges_levels():
    u = spectrum_union(GroupHandle(preset(802)), 3)
    assert len(u.values) == sum(2 ** n for n in range(4))
    assert u.histogram.counts.sum() == 8
    assert list(u.values) == sorted(u.values)


def test_spectrum_json():
    import json
    r = level_spectrum(GroupHandle(preset(802)), 2)
    d = json.loads(r.to_json())
    assert d["level"] == 2 and d["mult_one"] == d["components"]
    assert len(d["eigenvalues"]) == 4
