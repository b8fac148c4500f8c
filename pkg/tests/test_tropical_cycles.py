import pytest

from tropical.errors import CycleError
from tropical.period_engine import GluingData, compute_period
from tropical.tropical_cycles import (
    CycleEdge,
    CycleHomology,
    CycleVertex,
    SkeletonWeights,
    TropicalOneCycle,
    balancing_defects,
    check_balancing,
    crossings,
    from_skeleton_weights,
    validate_cycle,
    vertex_balancing,
)


def _cycle(name, vertices, edges):
    return TropicalOneCycle(
        name,
        {vid: CycleVertex(vid, cell) for vid, cell in vertices},
        [CycleEdge(eid, s, t, xi, list(route)) for eid, s, t, xi, route in edges],
    )


@pytest.mark.parametrize("name", ["tate_k2", "circle", "interval", "torus", "focus_focus"])
def test_fixture_cycles_are_valid(manifest, name):
    m = manifest(name)
    for cycle in m.all_cycles().values():
        report = validate_cycle(m.affine, cycle)
        assert report.is_valid, (name, cycle.name, report.errors)
        assert check_balancing(m.affine, cycle)


def test_unbalanced_vertex_is_reported(manifest):
    affine = manifest("torus").affine
    cycle = _cycle("bad", [("p", "f00"), ("q", "f00")],
                   [("a", "p", "q", (1, 0), []), ("b", "q", "p", (2, 0), [])])
    report = validate_cycle(affine, cycle)
    assert "Unbalanced" in report.kinds()
    assert balancing_defects(affine, cycle)["p"] == (1, 0)


def test_interior_vertex_must_sit_in_a_maximal_cell(manifest):
    affine = manifest("torus").affine
    cycle = _cycle("edge_vertex", [("p", "h00")], [("a", "p", "p", (1, 0), [])])
    assert "Vertex" in validate_cycle(affine, cycle).kinds()


def test_empty_cycle_is_reported(manifest):
    report = validate_cycle(manifest("torus").affine, TropicalOneCycle("empty", {}, []))
    assert report.kinds() == ["Empty"]


def test_route_must_close_up(manifest):
    affine = manifest("torus").affine
    cycle = _cycle("open", [("p", "f00")], [("a", "p", "p", (1, 0), ["v10<u10"])])
    assert "Route" in validate_cycle(affine, cycle).kinds()


def test_tate_crossing(manifest):
    m = manifest("tate_k3")
    (crossing,) = crossings(m.affine, m.cycles["beta"])
    assert crossing.piece == "v0"
    assert crossing.kappa == 3
    assert crossing.pairing == 1


def test_torus_crossings(manifest):
    m = manifest("torus")
    assert [c.pairing for c in crossings(m.affine, m.cycles["x_loop"])] == [1, 1]
    assert [c.pairing for c in crossings(m.affine, m.cycles["x_transverse"])] == [0, 0]


def test_focus_focus_crossings_avoid_the_discriminant(manifest):
    m = manifest("focus_focus")
    found = crossings(m.affine, m.cycles["around"])
    assert [c.piece for c in found] == ["A<rho", "C<rho"]
    assert all(c.pairing == 0 for c in found)


def test_skeleton_weights_give_one_edge_per_cell(manifest):
    m = manifest("torus")
    row = m.generated_cycles()["row"]
    assert sorted(e.id for e in row.edges) == ["e_h00", "e_h10"]
    assert validate_cycle(m.affine, row).is_valid
    assert all(v == (0, 0) for v in vertex_balancing(m.affine, m.skeletons["row"].weights).values())


def test_upper_and_lower_choices_agree_in_homology(manifest):
    m = manifest("torus")
    weights = m.skeletons["column"].weights
    ctx = CycleHomology(m.affine)
    lower = ctx.to_homology_class(from_skeleton_weights(m.affine, weights, "lower"))
    upper = ctx.to_homology_class(from_skeleton_weights(m.affine, weights, "upper"))
    assert not lower.is_zero()
    assert lower == upper


@pytest.mark.parametrize("weights", [{"h00": 1}, {"f00": 1}, {"h00": 0, "h10": 0}])
def test_bad_skeleton_weights(manifest, weights):
    with pytest.raises(CycleError):
        from_skeleton_weights(manifest("torus").affine, SkeletonWeights(weights))


def test_unknown_choice_rejected(manifest):
    with pytest.raises(CycleError):
        from_skeleton_weights(manifest("torus").affine, SkeletonWeights({"h00": 1, "h10": 1}), "middle")


def test_interval_skeleton_ends_on_the_boundary(manifest):
    m = manifest("interval")
    cycle = from_skeleton_weights(m.affine, SkeletonWeights({"e0": 1}))
    assert validate_cycle(m.affine, cycle).is_valid
    assert not CycleHomology(m.affine).to_homology_class(cycle).is_zero()


def test_torus_cycles_generate(manifest):
    m = manifest("torus")
    ctx = CycleHomology(m.affine)
    achieved, target, ok = ctx.generation_check(list(m.all_cycles().values()))
    assert (achieved, target, ok) == (4, 4, True)


def test_focus_focus_generation(manifest):
    m = manifest("focus_focus")
    achieved, target, ok = CycleHomology(m.affine).generation_check(list(m.all_cycles().values()))
    assert ok
    assert achieved == target


def test_no_cycles_generate_only_trivial_homology(manifest):
    achieved, target, ok = CycleHomology(manifest("torus").affine).generation_check([])
    assert (achieved, target, ok) == (0, 4, False)


def test_cycle_algebra_in_homology(manifest):
    m = manifest("torus")
    ctx = CycleHomology(m.affine)
    beta = m.cycles["x_loop"]
    chain = ctx.chain_of(beta)
    assert any(chain)
    assert ctx.chain_of(beta.reversed(m.affine)) == [-x for x in chain]
    assert ctx.chain_of(beta.scaled(2)) == [2 * x for x in chain]
    assert ctx.chain_of(beta.disjoint_union(beta)) == [2 * x for x in chain]
    base = ctx.to_homology_class(beta)
    assert ctx.to_homology_class(beta.scaled(3)).free == tuple(3 * x for x in base.free)


def test_disjoint_union_renames_clashes(manifest):
    beta = manifest("torus").cycles["x_loop"]
    union = beta.disjoint_union(beta)
    assert len(union.vertices) == 2
    assert len({e.id for e in union.edges}) == 2
    assert union.valency_sum() == 2 * beta.valency_sum()


@pytest.mark.parametrize("name", ["torus", "focus_focus"])
def test_boundaries_have_zero_class(manifest, name):
    ctx = CycleHomology(manifest(name).affine)
    boundary = ctx.chain.boundary(2)
    for j in range(ctx.chain.dim(2)):
        column = [row[j] for row in boundary]
        assert ctx.class_of_chain(column).is_zero()


def test_adding_a_boundary_keeps_the_class(manifest):
    m = manifest("torus")
    ctx = CycleHomology(m.affine)
    chain = ctx.chain_of(m.cycles["x_loop"])
    boundary = ctx.chain.boundary(2)
    shifted = [x + row[0] - 3 * row[1] for x, row in zip(chain, boundary)]
    assert ctx.class_of_chain(shifted) == ctx.to_homology_class(m.cycles["x_loop"])
    total = [a + b for a, b in zip(chain, ctx.chain_of(m.cycles["x_loop"].reversed(m.affine)))]
    assert ctx.class_of_chain(total).is_zero()
    with pytest.raises(CycleError):
        ctx.class_of_chain(chain[:-1])


@pytest.mark.parametrize("skeleton", ["row", "column"])
def test_upper_and_lower_choices_have_equal_periods(manifest, skeleton):
    m = manifest("torus")
    weights = m.skeletons[skeleton].weights
    gluing = GluingData.trivial(m.affine.n)
    lower = compute_period(m.affine, from_skeleton_weights(m.affine, weights, "lower"), gluing, m.slabs)
    upper = compute_period(m.affine, from_skeleton_weights(m.affine, weights, "upper"), gluing, m.slabs)
    assert lower.sign == upper.sign
    assert lower.t_exponent == upper.t_exponent
    assert abs(lower.constant - upper.constant) < 1e-25
