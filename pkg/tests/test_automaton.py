import re

import pytest
from hypothesis import given, settings, strategies as st

from mealygroups.automaton import (MealyAutomaton, NotInvertibleError, ParseError,
                                   automaton_index, canonical_form, dual_automaton,
                                   enumerate_all, format_recursion, from_index,
                                   inverse_automaton, invert_states, minimize, moore_dot,
                                   parse_recursion, relabel_letters, relabel_states,
                                   symmetry_key, symmetry_reduce, validate_invertible)
from mealygroups.element import Element
from mealygroups.presets import preset, preset_indices, preset_text

from conftest import ALL_PRESETS
from oracles import act_state, words


def automata(max_states=4, d=2):
    """Random invertible automata with 1..max_states states."""
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_states))
        trans = tuple(tuple(draw(st.integers(0, n - 1)) for _ in range(d)) for _ in range(n))
        outs = tuple(tuple(draw(st.permutations(range(d)))) for _ in range(n))
        return MealyAutomaton(tuple("abcdefgh"[:n]), d, trans, outs)
    return build()


def three_state():
    return st.integers(1, 5832).map(from_index)


# ------------------------------------------------------------------ parsing

def test_parse_741_tables():
    A = parse_recursion("a = s (c, a)\nb = (b, a)\nc = (a, a)")
    assert A.states == ("a", "b", "c")
    assert A.outputs == ((1, 0), (0, 1), (0, 1))
    assert A.transitions[0] == (2, 0)


def test_parse_identity():
    A = parse_recursion("e = (e, e)")
    assert A.n_states == 1 and A.outputs == ((0, 1),)


def test_parse_undeclared_trivial_state_rejected():
    with pytest.raises(ParseError, match="undeclared"):
        parse_recursion("a = s (b, 1)\nb = s (b, a)")


def test_parse_declared_trivial_state_matches_2852():
    A = parse_recursion("a = s (b, 1)\nb = s (b, a)\n1 = (1, 1)")
    assert canonical_form(minimize(A)) == canonical_form(minimize(preset(2852)))


@pytest.mark.parametrize("text, where", [
    ("a = (a, a)\na = (a, a)", "duplicate"),
    ("a = s(a)", "section"),
    ("a = (0 0)(a, a)", "disjoint"),
    ("a = s(a, a) b", "unexpected"),
])
def test_parse_errors_carry_position(text, where):
    with pytest.raises(ParseError) as exc:
        parse_recursion(text)
    assert where in str(exc.value)
    assert re.match(r"line \d+, column \d+", str(exc.value))


def test_parse_general_alphabet_cycle_notation():
    A = parse_recursion("a = (0 1 2)(a, b, a)\nb = (b, b, b)")
    assert A.d == 3 and A.outputs[0] == (1, 2, 0)


@pytest.mark.parametrize("idx", ALL_PRESETS)
def test_presets_parse_and_round_trip(idx):
    A = preset(idx)
    assert validate_invertible(A)
    assert parse_recursion(format_recursion(A)) == A


@given(automata())
def test_format_parse_round_trip(A):
    assert parse_recursion(format_recursion(A)) == A


# --------------------------------------------------------------- inversion

def test_validate_invertible():
    assert validate_invertible(preset(846))
    bad = MealyAutomaton(("a",), 2, ((0, 0),), ((0, 0),))
    assert not validate_invertible(bad)


def test_inverse_of_identity():
    A = parse_recursion("e = (e, e)")
    assert inverse_automaton(A).outputs == A.outputs


def test_inverse_2294_on_word():
    A = preset(2294)
    Ai = inverse_automaton(A)
    w = (0, 1, 1, 0)
    assert act_state(Ai, 0, act_state(A, 0, w)) == w


def test_inverse_of_involutive_846_is_isomorphic():
    A = preset(846)
    assert canonical_form(inverse_automaton(A)) == canonical_form(A)


def test_inverse_rejects_noninvertible():
    bad = MealyAutomaton(("a",), 2, ((0, 0),), ((0, 0),))
    with pytest.raises(NotInvertibleError):
        inverse_automaton(bad)


@given(automata())
@settings(max_examples=60)
def test_inverse_property(A):
    Ai = inverse_automaton(A)
    assert validate_invertible(Ai)
    for q in range(A.n_states):
        for w in words(2, 8)[::17]:
            assert act_state(Ai, q, act_state(A, q, w)) == w


# ------------------------------------------------------------------- dual

def test_dual_846():
    D, dual_inv, birev = dual_automaton(preset(846))
    assert dual_inv and birev
    expected = parse_recursion("A = (a c b)(B, A, A)\nB = (a c)(A, B, B)", letters=("a", "b", "c"))
    assert canonical_form(D) == canonical_form(expected)
    assert validate_invertible(D)


@given(automata(max_states=3))
def test_dual_involution(A):
    if A.n_states < 2:
        return
    DD = dual_automaton(dual_automaton(A)[0])[0]
    assert canonical_form(DD) == canonical_form(A)


def test_bireversible_definition_agrees():
    # bireversible iff A, dual(A) and dual(A^-1) are all invertible
    for A in list(enumerate_all())[::37]:
        D, dinv, birev = dual_automaton(A)
        want = dinv and validate_invertible(dual_automaton(inverse_automaton(A))[0])
        assert birev == want


# ------------------------------------------------------------- minimization

def test_minimize_2852_makes_c_trivial():
    M = minimize(preset(2852))
    assert Element.from_state(M, "c").is_trivial()


def test_minimize_duplicate_identities():
    A = parse_recursion("e = (f, g)\nf = (g, e)\ng = (e, e)")
    assert minimize(A).n_states == 1


def test_741_is_minimal_by_portraits():
    A = preset(741)
    assert minimize(A).n_states == 3
    ports = [tuple(act_state(A, q, w) for w in words(2, 3)) for q in range(3)]
    assert len(set(ports)) == 3


@given(automata())
def test_minimize_idempotent_and_sound(A):
    M = minimize(A)
    MM = minimize(M)
    assert MM.n_states == M.n_states
    assert canonical_form(MM) == canonical_form(M)
    # every original state acts like the class that keeps its name or merges it
    for q in range(A.n_states):
        acts = {act_state(A, q, w) for w in words(2, 6)}
        assert any({act_state(M, p, w) for w in words(2, 6)} == acts for p in range(M.n_states))


# ------------------------------------------------------------ canonical form

def test_pointed_canonical_identity_vs_775_c_squared():
    from mealygroups.group import GroupHandle
    G = GroupHandle(preset(775))
    c2 = G.element("c^2")
    ident = parse_recursion("e = (e, e)")
    assert c2 == Element.from_state(ident, "e")


@given(automata(), st.randoms())
def test_canonical_form_relabel_invariant(A, rnd):
    perm = list(range(A.n_states))
    rnd.shuffle(perm)
    B = relabel_states(A, perm)
    assert canonical_form(B) == canonical_form(A)


def test_pointed_canonical_distinguishes_states():
    A = preset(741)
    keys = {canonical_form(A, q) for q in A.states}
    assert len(keys) == 3


# -------------------------------------------------------------- enumeration

def test_enumerate_all_count_and_first():
    allA = list(enumerate_all())
    assert len(allA) == 5832
    first = allA[0]
    assert all(Element.from_state(first, q).is_trivial() for q in range(3))
    assert all(validate_invertible(A) for A in allA)
    codes = {(A.transitions, A.outputs) for A in allA}
    assert len(codes) == 5832


def test_index_round_trip():
    for n in (1, 741, 2852, 5832):
        assert automaton_index(from_index(n)) == n
    for idx in preset_indices():
        assert automaton_index(preset(idx)) == idx


@given(three_state())
def test_symmetry_key_invariant(A):
    k = symmetry_key(A)
    assert symmetry_key(relabel_states(A, (1, 0, 2))) == k
    assert symmetry_key(relabel_states(A, (1, 2, 0))) == k
    assert symmetry_key(relabel_letters(A, (1, 0))) == k
    assert symmetry_key(invert_states(A)) == k


def test_symmetry_reduce_partition():
    R = symmetry_reduce(enumerate_all())
    assert R.total == 5832
    assert sum(len(c.members) for c in R.classes) == 5832
    members = [m for c in R.classes for m in c.members]
    assert len(set(members)) == 5832
    # each class is closed under the generating symmetries
    for c in R.classes[::23]:
        A = from_index(c.members[0])
        assert automaton_index(invert_states(A)) in c.members


def test_small_classes_generate_few_groups():
    from mealygroups.group import GroupHandle, growth_series, sf_exponents
    R = symmetry_reduce(enumerate_all())
    prints = set()
    for c in R.classes:
        if c.minimized_states < 3:
            G = GroupHandle(c.representative)
            prints.add((tuple(sf_exponents(G, 5)), tuple(growth_series(G, 3)),
                        len(G.generators)))
    # groups of 2-state automata: trivial, C2, C2xC2, Z, infinite dihedral,
    # lamplighter; different generating sets can split a group's prints
    sfs = {p[0] for p in prints}
    assert len(sfs) <= 6


# ---------------------------------------------------------------------- DOT

def _parse_dot(text):
    nodes = re.findall(r'^\s*"([^"]+)" \[label=', text, re.M)
    edges = re.findall(r'^\s*"([^"]+)" -> "([^"]+)" \[label="([^"]+)"\];', text, re.M)
    return nodes, sorted(edges)


def test_dot_identity():
    nodes, edges = _parse_dot(moore_dot(parse_recursion("e = (e, e)")))
    assert nodes == ["e"] and len(edges) == 2


def test_dot_741():
    nodes, edges = _parse_dot(moore_dot(preset(741)))
    assert len(nodes) == 3 and len(edges) == 6
    assert ("a", "c", "0") in edges and ("a", "a", "1") in edges


@given(automata())
def test_dot_round_trip(A):
    nodes, edges = _parse_dot(moore_dot(A))
    want = sorted((A.states[q], A.states[A.transitions[q][x]], str(x))
                  for q in range(A.n_states) for x in range(A.d))
    assert nodes == list(A.states) and edges == want
    assert moore_dot(A) == moore_dot(A)


def test_preset_text_unknown():
    with pytest.raises(KeyError):
        preset_text(1)
