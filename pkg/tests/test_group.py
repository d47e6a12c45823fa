import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mealygroups.automaton import parse_recursion
from mealygroups.element import Element, Infinite, finitary_depth, verify_certificate
from mealygroups.group import (Contracting, FiniteGroup, GroupHandle, InfiniteWitness,
                               NonContracting, NotSelfReplicating, SelfReplicating,
                               closure_level_order, cyclic_normal_form, find_relators,
                               finiteness, fingerprint,
                               growth_series, is_abelian, is_level_transitive,
                               level_quotient_order, nucleus, nucleus_is_closed,
                               self_replicating, sf_exponents, validate_witness, verify_relator)
from mealygroups.presets import preset, tables

from conftest import ALL_PRESETS
from oracles import closure, level_perm

TRIVIAL = "e = (e, e)"


def trivial_group():
    return GroupHandle(parse_recursion(TRIVIAL))


# ------------------------------------------------------------------ growth

@pytest.mark.parametrize("idx, series", [
    (741, [1, 7, 29, 115, 441, 1643]),
    (802, [1, 4, 7, 8, 8, 8]),
])
def test_growth_examples(idx, series):
    assert growth_series(GroupHandle(preset(idx)), len(series) - 1) == series


@pytest.mark.slow
def test_growth_849_radius_8():
    G = GroupHandle(preset(849))
    assert growth_series(G, 8) == [1, 5, 17, 53, 153, 421, 1125, 2945, 7589]


def test_growth_trivial_group():
    assert growth_series(trivial_group(), 4) == [1] * 5


@pytest.mark.parametrize("idx", [741, 752, 775, 802, 846, 891])
def test_growth_bounds(idx):
    G = GroupHandle(preset(idx))
    s = len(G.symmetric)
    gr = growth_series(G, 4)
    for a, b in zip(gr, gr[1:]):
        assert a <= b <= a * s + a


def test_growth_matches_level_closure_for_finite_group():
    # 802 is finite; its ball stabilizes at the group order, which is also
    # the order of its faithful action on a deep enough level
    G = GroupHandle(preset(802))
    assert growth_series(G, 6)[-1] == 8
    assert len(closure([tuple(p) for p in G.level_perms(4)])) == 8


# -------------------------------------------------------- level quotients

@pytest.mark.parametrize("idx, n, exp", [(741, 4, 12), (846, 5, 10), (752, 8, 13)])
def test_level_quotient_examples(idx, n, exp):
    q = level_quotient_order(GroupHandle(preset(idx)), n)
    assert q.order == 2 ** exp and q.exponent == exp


@pytest.mark.parametrize("idx", ALL_PRESETS)
def test_level_zero_and_dyadic_monotone(idx):
    G = GroupHandle(preset(idx))
    assert level_quotient_order(G, 0).order == 1
    row = sf_exponents(G, 7)
    assert row[0] == 0
    for n, (a, b) in enumerate(zip(row, row[1:]), start=1):
        assert a <= b <= 2 ** n - 1


@pytest.mark.parametrize("idx", ALL_PRESETS)
def test_chain_matches_closure_at_small_levels(idx):
    G = GroupHandle(preset(idx))
    A = G.automaton
    gens = [((g.letter[0], 1),) for g in G.generators]
    for n in range(1, 5):
        perms = [tuple(level_perm(A, w, n)) for w in gens]
        assert level_quotient_order(G, n).order == len(closure(perms))
        assert closure_level_order(G, n) == len(closure(perms))


def test_level_quotient_general_alphabet():
    A = parse_recursion("a = (0 1 2)(a, a, a)\nb = (0 1)(b, b, a)")
    G = GroupHandle(A)
    for n in (1, 2):
        perms = [tuple(g.element.level_permutation(n)) for g in G.generators]
        assert level_quotient_order(G, n).order == len(closure(perms))
    with pytest.raises(ValueError):
        sf_exponents(G, 2)


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        level_quotient_order(GroupHandle(preset(741)), -1)


def test_sf_trivial_group():
    assert sf_exponents(trivial_group(), 5) == [0] * 6


# ---------------------------------------------------------------- relators

def test_relators_846_exactly_squares():
    rels = find_relators(GroupHandle(preset(846)), 10).as_text()
    assert sorted(rels) == ["a^2", "b^2", "c^2"]


def test_relators_741_contains_ca2():
    G = GroupHandle(preset(741))
    R = find_relators(G, 6)
    want = cyclic_normal_form(G.word("ca^2").letters)
    assert want in R.relators


def test_relators_trivial_group_only_generator_words():
    # the generator is trivial, so its length-1 word is the only relator
    assert find_relators(trivial_group(), 6).as_text() == ["e"]


@pytest.mark.parametrize("idx", [741, 775, 802, 846, 891])
def test_found_relators_are_trivial_and_reduced(idx):
    G = GroupHandle(preset(idx))
    R = find_relators(G, 8)
    for r in R.relators:
        assert len(r) <= 8
        assert G.element(R.as_text()[R.relators.index(r)]).is_trivial()


@pytest.mark.parametrize("idx, word", [
    (891, "acabcbacbacb"),
    (2294, "b^-1ca^-1c"),
    (2294, "b⁻¹ca⁻¹c"),
])
def test_verify_relator_examples(idx, word):
    assert verify_relator(GroupHandle(preset(idx)), word)


def test_verify_relator_empty_word():
    assert verify_relator(GroupHandle(preset(741)), "")
    assert not verify_relator(GroupHandle(preset(741)), "b")


@pytest.mark.parametrize("idx", sorted(tables()))
def test_table_relators_hold(idx):
    G = GroupHandle(preset(idx))
    for w in tables()[idx]["relators"]:
        assert verify_relator(G, w), w


# ----------------------------------------------------------------- nucleus

def test_nucleus_752_has_41_elements():
    res = nucleus(GroupHandle(preset(752)))
    assert isinstance(res, Contracting)
    assert len(res.nucleus) == 41
    assert nucleus_is_closed(res.nucleus)
    assert Element.identity() in res.nucleus


@pytest.mark.parametrize("idx, word, vertex", [(741, "b", (0,)), (2852, "ab", (1, 0))])
def test_noncontracting_witnesses(idx, word, vertex):
    G = GroupHandle(preset(idx))
    res = nucleus(G)
    assert isinstance(res, NonContracting)
    assert validate_witness(res)
    assert res.element == G.element(word)
    assert res.vertex == vertex


def test_nucleus_trivial_group():
    res = nucleus(trivial_group())
    assert isinstance(res, Contracting)
    assert res.nucleus == [Element.identity()]


@pytest.mark.parametrize("idx", [775, 783, 802])
def test_contracting_nuclei_are_section_closed(idx):
    res = nucleus(GroupHandle(preset(idx)))
    assert isinstance(res, Contracting)
    S = set(res.nucleus)
    for g in res.nucleus:
        assert all(s in S for s in g.sections())


def test_witness_validation_rejects_tampering():
    res = nucleus(GroupHandle(preset(741)))
    bad = NonContracting(res.element, (1,) + res.vertex, res.word, res.certificate)
    assert not validate_witness(bad)


# ------------------------------------------------------- self-replication

def test_self_replicating_741():
    v = self_replicating(GroupHandle(preset(741)))
    assert isinstance(v, SelfReplicating)
    assert set(v.witness) == {0, 1}


def test_not_self_replicating_752():
    v = self_replicating(GroupHandle(preset(752)))
    assert isinstance(v, NotSelfReplicating)
    assert v.section_order < v.group_order


def test_self_replicating_trivial_group():
    assert isinstance(self_replicating(trivial_group()), SelfReplicating)


@pytest.mark.parametrize("idx", [752, 802, 846])
def test_no_certificate_excludes_yes(idx):
    # a No certificate says the section subgroup is proper at some level, so
    # no word over section generators can reach every generator there
    G = GroupHandle(preset(idx))
    v = self_replicating(G)
    if isinstance(v, NotSelfReplicating):
        from mealygroups.group import section_generators
        from mealygroups.permgroup import tree_chain
        secs = section_generators(G, v.vertex)
        perms = [s.level_permutation(v.level) for s in secs]
        sub = tree_chain(perms, v.level).order(v.level) if perms else 1
        full = level_quotient_order(G, v.level).order
        assert sub == v.section_order < full == v.group_order


# -------------------------------------------------------------- finiteness

def test_finite_802():
    v = finiteness(GroupHandle(preset(802)))
    assert isinstance(v, FiniteGroup) and v.order == 8
    assert len(set(v.elements)) == 8


def test_finite_trivial_automaton():
    v = finiteness(trivial_group())
    assert isinstance(v, FiniteGroup) and v.order == 1


def test_infinite_775_witness():
    G = GroupHandle(preset(775))
    v = finiteness(G)
    assert isinstance(v, InfiniteWitness)
    assert isinstance(v.certificate, Infinite)
    assert verify_certificate(v.element, v.certificate.certificate)
    assert G.element(v.word) == v.element


def test_is_abelian_examples():
    assert is_abelian(GroupHandle(preset(802)))
    assert not is_abelian(GroupHandle(preset(846)))
    assert is_abelian(trivial_group())


def test_level_transitive_891():
    G = GroupHandle(preset(891))
    for n in range(1, 10):
        assert is_level_transitive(G, n)


def test_level_transitive_802_and_trivial():
    G = GroupHandle(preset(802))
    # order 8 acts regularly on the 8 vertices of level 3, but not on 16
    assert is_level_transitive(G, 3)
    assert not is_level_transitive(G, 4)
    assert not is_level_transitive(trivial_group(), 1)
    assert is_level_transitive(trivial_group(), 0)


@pytest.mark.parametrize("idx", [741, 752, 802, 846, 2294])
def test_level_transitive_matches_orbit_oracle(idx):
    G = GroupHandle(preset(idx))
    A = G.automaton
    for n in range(1, 6):
        perms = [level_perm(A, ((q, 1),), n) for q in range(A.n_states)]
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for p in perms:
                if p[v] not in seen:
                    seen.add(p[v])
                    stack.append(p[v])
        assert is_level_transitive(G, n) == (len(seen) == 2 ** n)


# ------------------------------------------------------------- fingerprint

def test_fingerprints_849_2852_share_sf():
    f1 = fingerprint(GroupHandle(preset(849)))
    f2 = fingerprint(GroupHandle(preset(2852)))
    assert f1.sf == f2.sf == (0, 1, 3, 6, 12, 23, 45)


def test_fingerprint_trivial_group():
    f = fingerprint(trivial_group())
    assert set(f.sf) == {0} and set(f.gr) == {1}
    assert f.abelian and f.generator_orders == ()
    assert not any(f.level_transitive)


def test_fingerprints_741_846_differ_at_level_3():
    f1 = fingerprint(GroupHandle(preset(741)))
    f2 = fingerprint(GroupHandle(preset(846)))
    assert f1.sf[3] == 6 and f2.sf[3] == 5


def test_fingerprint_deterministic():
    G = GroupHandle(preset(775))
    assert fingerprint(G) == fingerprint(GroupHandle(preset(775)))


# ---------------------------------------------------------- identity suites

def test_793_conjugation_identities():
    G = GroupHandle(preset(793))
    x, y = G.element("ba"), G.element("cabc")
    a, b, c = (G.element(s) for s in "abc")
    xi, yi = x.inverse(), y.inverse()
    assert x.conj(a) == xi and y.conj(a) == yi
    assert x.conj(b) == xi and y.conj(b) == x * yi * xi
    assert x.conj(c) == yi and y.conj(c) == xi


def test_891_lamplighter_identities():
    G = GroupHandle(preset(891))
    x, y = G.element("ac"), G.element("cb")
    sigma = Element.from_recursion((1, 0), (Element.identity(), Element.identity()))
    assert x == Element.from_recursion((1, 0), (y, x.inverse()))
    assert y == Element.from_recursion((0, 1), (y.inverse(), x))
    assert x * y == sigma


@pytest.mark.parametrize("n", range(5))
def test_891_finitary_depths(n):
    G = GroupHandle(preset(891))
    x, y = G.element("ac"), G.element("cb")
    s_n = y.inverse() ** n * x * y ** (n + 1)
    assert finitary_depth(s_n) == 2 * n + 1


def test_2294_baumslag_solitar_relation():
    G = GroupHandle(preset(2294))
    mu, a = G.element("ca^-1"), G.element("a")
    assert a * mu * a.inverse() == mu.inverse() ** 3
    assert G.element("bc^-1") == mu


def test_849_commutator_identity():
    G = GroupHandle(preset(849))
    lhs = G.element("[a^-1,c][c,a]")
    rhs = Element.from_recursion((0, 1), (G.element("[a,c]"), Element.identity()))
    assert lhs == rhs
    assert not lhs.is_trivial()


@given(st.sampled_from([775, 793]), st.integers(1, 4))
@settings(max_examples=10, deadline=None)
def test_775_793_generators_are_involutions(idx, k):
    G = GroupHandle(preset(idx))
    for g in G.generators:
        assert (g.element ** (2 * k)).is_trivial()


# ---------------------------------------------------------- free monoids

def _positive_words_distinct(G, names, max_len):
    seen = {}
    for n in range(max_len + 1):
        for w in itertools.product(names, repeat=n):
            e = G.element("".join(w)) if w else G.identity()
            if e in seen:
                return seen[e], w
            seen[e] = w
    return None


def test_free_monoid_2396():
    assert _positive_words_distinct(GroupHandle(preset(2396)), "abc", 7) is None


def test_free_monoid_2852():
    assert _positive_words_distinct(GroupHandle(preset(2852)), "ab", 7) is None


def test_positive_words_collide_in_finite_group():
    assert _positive_words_distinct(GroupHandle(preset(802)), "abc", 3) is not None
