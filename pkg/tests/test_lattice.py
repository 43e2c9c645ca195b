import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfpm.lattice import (
    ORIGIN,
    BoxSpec,
    LatticeAnimal,
    can_add,
    can_remove,
    edge_boundary,
    enumerate_animals,
    is_connected4,
    is_simply_connected,
    read_animals,
    write_animals,
)

import oracles


def test_box_site_counts():
    assert len(BoxSpec(0).sites()) == 1
    assert len(BoxSpec(1).sites()) == 9
    assert len(BoxSpec(3).sites()) == 49


def test_box_site_order_row_major():
    s = BoxSpec(1).sites()
    assert s[0] == (-1, -1)
    assert s[1] == (0, -1)
    assert s[-1] == (1, 1)
    assert s == sorted(s, key=lambda p: (p[1], p[0]))


def test_box_index_roundtrip():
    spec = BoxSpec(2)
    for i, site in enumerate(spec.sites()):
        assert spec.index(site) == i


def test_edge_boundary_examples():
    assert edge_boundary({(0, 0)}) == 4
    assert edge_boundary({(0, 0), (1, 0)}) == 6
    block3 = {(x, y) for x in range(3) for y in range(3)}
    assert edge_boundary(block3) == 12


def test_edge_boundary_empty_rejected():
    with pytest.raises(ValueError):
        edge_boundary(set())


def test_simply_connected_examples():
    assert is_simply_connected({(0, 0)})
    assert is_simply_connected({(0, 0), (1, 0), (1, 1)})
    ring = {(x, y) for x in range(3) for y in range(3)} - {(1, 1)}
    assert not is_simply_connected(ring)
    assert not is_simply_connected({(0, 0), (1, 1)})


def test_animal_rejects_invalid_site_set():
    with pytest.raises(ValueError):
        LatticeAnimal.from_sites({(0, 0), (2, 0)})
    a = LatticeAnimal.from_sites({(1, 0), (2, 0)})
    assert not a.contains_origin()


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_animals(BoxSpec(1), 1)) == 1
    assert sum(1 for _ in enumerate_animals(BoxSpec(1), 2)) == 5
    assert sum(1 for _ in enumerate_animals(BoxSpec(2), 3)) == 23


def test_enumeration_no_duplicates_and_valid():
    seen = set()
    for a in enumerate_animals(BoxSpec(2), 5):
        key = frozenset(a.sites)
        assert key not in seen
        seen.add(key)
        assert ORIGIN in key
        assert is_simply_connected(key)
        assert a.boundary_size == edge_boundary(key)


def test_enumeration_matches_naive_filter():
    spec = BoxSpec(3)
    naive = set(map(frozenset, oracles.naive_animals(spec, 6)))
    fast = {frozenset(a.sites) for a in enumerate_animals(spec, 6)}
    assert fast == naive


def test_enumeration_deterministic_order():
    first = [a.sites for a in enumerate_animals(BoxSpec(2), 4)]
    second = [a.sites for a in enumerate_animals(BoxSpec(2), 4)]
    assert first == second


def test_enumeration_closed_under_rotation():
    family = {frozenset(a.sites) for a in enumerate_animals(BoxSpec(2), 5)}
    rotated = {frozenset((-y, x) for x, y in a) for a in family}
    assert rotated == family


def test_boundary_bounds_over_family():
    for a in enumerate_animals(BoxSpec(2), 6):
        assert 4 <= a.boundary_size <= 2 * a.size + 2


def test_animal_line_roundtrip(tmp_path):
    animals = list(enumerate_animals(BoxSpec(2), 4))
    path = tmp_path / "animals.txt"
    write_animals(animals, path)
    back = read_animals(path)
    assert [a.sites for a in back] == [a.sites for a in animals]
    assert [a.boundary_size for a in back] == [a.boundary_size for a in animals]


def test_animal_line_rejects_corruption(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 6 0,0\n")  # size says 2, one site listed
    with pytest.raises(ValueError):
        read_animals(path)


@st.composite
def small_animals(draw):
    """Grow a random valid animal via the local add criterion."""
    occupied = {ORIGIN}
    n = draw(st.integers(min_value=0, max_value=8))
    for _ in range(n):
        fringe = sorted(
            {
                nb
                for s in occupied
                for nb in [(s[0] + 1, s[1]), (s[0] - 1, s[1]), (s[0], s[1] + 1), (s[0], s[1] - 1)]
                if nb not in occupied and can_add(occupied, nb)
            }
        )
        if not fringe:
            break
        occupied.add(draw(st.sampled_from(fringe)))
    return occupied


@settings(max_examples=200, deadline=None)
@given(small_animals())
def test_local_moves_preserve_validity(occupied):
    assert is_simply_connected(occupied)
    fringe = {
        (s[0] + dx, s[1] + dy)
        for s in occupied
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
        if (s[0] + dx, s[1] + dy) not in occupied
    }
    for c in sorted(fringe):
        grown = occupied | {c}
        assert can_add(occupied, c) == (
            is_connected4(grown) and is_simply_connected(grown)
        )
    for c in sorted(occupied):
        if c == ORIGIN:
            continue
        shrunk = occupied - {c}
        expected = bool(shrunk) and is_simply_connected(shrunk)
        assert can_remove(occupied, c) == expected


@settings(max_examples=150, deadline=None)
@given(small_animals())
def test_boundary_formula_matches_perimeter_count(occupied):
    perimeter = sum(
        1
        for s in occupied
        for nb in [(s[0] + 1, s[1]), (s[0] - 1, s[1]), (s[0], s[1] + 1), (s[0], s[1] - 1)]
        if nb not in occupied
    )
    assert edge_boundary(occupied) == perimeter


def test_naive_subset_filter_small_box():
    # independent sanity anchor for the oracle itself
    spec = BoxSpec(1)
    count = 0
    others = [s for s in spec.sites() if s != ORIGIN]
    for k in range(2):
        for combo in itertools.combinations(others, k):
            s = frozenset(combo) | {ORIGIN}
            if is_connected4(s) and is_simply_connected(s):
                count += 1
    assert count == 5
