import random
from collections import deque

import pytest

from solprobe.groups import LamplighterGroup, SixthGroup, SolGroup
from solprobe.metric import (BudgetExceeded, GenSet, LowerBound, depth, enumerate_ball,
                             load_ball, read_ball_header, restricted_distance, save_ball)

from oracles import mitm_sphere_sizes, standard_letters

Z16 = SixthGroup()
LL2 = LamplighterGroup(2)
SOL = SolGroup()


def std(group):
    return GenSet(group, group.standard_generators(), name="standard")


@pytest.fixture(scope="module")
def ll2_ball():
    return enumerate_ball(std(LL2), 8)


@pytest.fixture(scope="module")
def z16_ball():
    return enumerate_ball(std(Z16), 7)


def test_genset_closure_order_and_z():
    gs = std(Z16)
    t, a = Z16.t, Z16.embed(1)
    assert gs.letters == (t, t.inverse(), a, a.inverse())
    assert gs.z == 1
    # duplicates and the identity are dropped
    assert GenSet(Z16, [t, t.inverse(), Z16.identity]).letters == (t, t.inverse())


def test_genset_requires_symmetry_without_closure():
    with pytest.raises(ValueError):
        GenSet(Z16, [Z16.t], symmetric_closure=False)


def test_radius_zero_and_one():
    gs = std(SOL)
    assert enumerate_ball(gs, 0).sphere_sizes() == [1]
    t1 = enumerate_ball(gs, 1)
    assert t1.sphere(1) == list(gs.letters)
    assert all(t1.word_length(s) == 1 for s in gs.letters)
    assert t1.word_length(SOL.identity) == 0


# sphere sizes confirmed by the meet-in-the-middle oracle in tests/oracles.py
FROZEN_SPHERES = {
    "lamplighter-2": [1, 4, 10, 24, 53, 116, 244, 512, 1052],
    "z16": [1, 4, 12, 36, 86, 200, 456, 1000, 2168],
    "sol": [1, 6, 26, 70, 170, 390, 858, 1834],
}
GROUPS = {"lamplighter-2": LL2, "z16": Z16, "sol": SOL}


@pytest.mark.parametrize("family", sorted(FROZEN_SPHERES))
def test_sphere_sizes_frozen(family):
    R = len(FROZEN_SPHERES[family]) - 1
    assert enumerate_ball(std(GROUPS[family]), R).sphere_sizes() == FROZEN_SPHERES[family]


@pytest.mark.parametrize("family", sorted(FROZEN_SPHERES))
def test_sphere_sizes_match_oracle_small(family):
    letters, e, mul = standard_letters(family)
    assert enumerate_ball(std(GROUPS[family]), 5).sphere_sizes() == mitm_sphere_sizes(letters, e, mul, 5)


def test_parallel_enumeration_matches_serial():
    import solprobe.metric as metric
    old = metric._PARALLEL_MIN_FRONTIER
    metric._PARALLEL_MIN_FRONTIER = 10
    try:
        par = enumerate_ball(std(Z16), 6, workers=3)
    finally:
        metric._PARALLEL_MIN_FRONTIER = old
    ser = enumerate_ball(std(Z16), 6)
    assert par.elements == ser.elements


def test_two_letter_product_length(z16_ball):
    t, a = Z16.t, Z16.embed(1)
    n = z16_ball.word_length(t * a)
    assert 1 <= n <= 2
    assert n == 2


def test_absent_outside_ball(z16_ball):
    assert z16_ball.word_length(Z16.element(20)) is None


def test_geodesic_reevaluates(ll2_ball):
    rng = random.Random(0)
    for g in rng.sample(ll2_ball.elements, 50):
        w = ll2_ball.geodesic(g)
        assert len(w) == ll2_ball.word_length(g)
        assert LL2.word_evaluate(w) == g


def test_norm_symmetry(ll2_ball):
    for g in ll2_ball.sphere(6):
        assert ll2_ball.word_length(g.inverse()) == 6


def _restricted_bfs(table, g, h, r):
    seen = {g: 0}
    q = deque([g])
    while q:
        x = q.popleft()
        if x == h:
            return seen[x]
        for s in table.gens.letters:
            y = x * s
            n = table.word_length(y)
            if y not in seen and n is not None and n <= r:
                seen[y] = seen[x] + 1
                q.append(y)
    return None


def test_restricted_distance_matches_unidirectional_bfs(ll2_ball):
    rng = random.Random(2)
    for _ in range(40):
        r = rng.randint(3, 6)
        g = rng.choice(ll2_ball.elements[:ll2_ball.offsets[r + 1]])
        h = rng.choice(ll2_ball.elements[:ll2_ball.offsets[r + 1]])
        assert restricted_distance(ll2_ball, g, h, r) == _restricted_bfs(ll2_ball, g, h, r)


def test_restricted_distance_slack_equals_word_length(ll2_ball):
    rng = random.Random(4)
    for _ in range(30):
        g = rng.choice(ll2_ball.elements[:ll2_ball.offsets[3]])
        h = rng.choice(ll2_ball.elements[:ll2_ball.offsets[3]])
        assert restricted_distance(ll2_ball, g, h, 8) == ll2_ball.word_length(g.inverse() * h)
    assert restricted_distance(ll2_ball, LL2.t, LL2.t, 1) == 0


def test_restricted_distance_preconditions(ll2_ball):
    with pytest.raises(ValueError):
        restricted_distance(ll2_ball, LL2.identity, LL2.t, 9)
    with pytest.raises(ValueError):
        restricted_distance(ll2_ball, LL2.identity, LL2.element(3), 2)


def test_depth_conventions(z16_ball):
    assert depth(z16_ball, Z16.identity) == 1
    assert depth(z16_ball, Z16.t) == 1
    with pytest.raises(ValueError):
        depth(z16_ball, Z16.element(30))


def test_depth_lower_bound_when_capped(ll2_ball):
    from solprobe.goodgen import good_gen_set_lamplighter
    from solprobe.probes import pocket_element
    ggs = good_gen_set_lamplighter(2)
    table = enumerate_ball(ggs.gens(), 8)
    k2 = pocket_element(ggs, ggs.nonzero()[0], 2)
    assert depth(table, k2) == 5
    assert depth(table, k2, max_steps=2) == LowerBound(3)


def test_budget_exceeded_keeps_complete_spheres():
    with pytest.raises(BudgetExceeded) as info:
        enumerate_ball(std(Z16), 10, mem_bytes=200_000)
    part = info.value.table
    full = enumerate_ball(std(Z16), part.radius)
    assert part.sphere_sizes() == full.sphere_sizes()


def test_save_load_roundtrip(tmp_path, z16_ball):
    path = tmp_path / "b.spb"
    save_ball(z16_ball, path)
    head = read_ball_header(path)
    assert head["radius"] == 7 and head["sphere_sizes"] == z16_ball.sphere_sizes()
    back = load_ball(path)
    assert back.norms == z16_ball.norms
    assert back.gens == z16_ball.gens
    save_ball(back, tmp_path / "c.spb")
    assert (tmp_path / "c.spb").read_bytes() == path.read_bytes()


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "x.spb"
    p.write_bytes(b"not a ball")
    with pytest.raises(ValueError):
        load_ball(p)
