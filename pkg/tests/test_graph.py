
import pytest

from conftest import MODELS
from tailalgebra import bundled_models, model_source
from tailalgebra.dsl import analyze, compile_model, to_source
from tailalgebra.dsl.graph import OPS, Node, build_graph
from tailalgebra.errors import CycleError


def g_of(body: str):
    return compile_model("model m {\n" + body + "\n}\n")


def ops(g):
    return [(n.kind, n.op, n.parents, n.params) for n in g.nodes]


def test_constant_folding_into_translate():
    g = g_of("x ~ Normal(0,1)\ny = 2*3 + x\nquery y")
    assert ops(g) == [("draw", None, (), ()), ("op", "shift", (0,), (6.0,))]


def test_full_folding_leaves_a_constant():
    g = g_of("c = exp(0) + 2^3\nquery c")
    assert len(g) == 1 and g.nodes[0].kind == "const" and g.nodes[0].value == 9.0


def test_dead_code_elimination():
    g = g_of("x ~ Normal(0,1)\nw ~ Cauchy(0,1)\ny = x^2\nquery y")
    assert all(n.dist is None or n.dist.name != "cauchy" for n in g.nodes)
    assert "w" not in g.names


def test_common_subexpressions_shared():
    g = g_of("x ~ Normal(0,1)\na = x*x\nb = x*x\nz = a + b\nquery z")
    assert [n.op for n in g.nodes if n.kind == "op"] == ["mul", "add"]


def test_inline_draws_are_distinct():
    g = g_of("y = Normal(0,1) * Normal(0,1)\nquery y")
    assert sum(n.kind == "draw" for n in g.nodes) == 2


def test_subtraction_is_add_of_negation():
    g = g_of("x ~ Normal(0,1)\nz ~ Normal(0,1)\ny = x - z\nquery y")
    assert [n.op for n in g.nodes if n.kind == "op"] == ["neg", "add"]


def test_iid_is_virtual():
    g = g_of("v = iid(4, Normal(0,1)^2)\nquery v")
    assert ops(g)[-1] == ("op", "iid", (1,), (4.0,))
    assert len(g) == 3
    assert g.nodes[0].scope == 2 and g.nodes[1].scope == 2
    big = g_of("v = iid(1000000, Normal(0,1)^2)\nquery v")
    assert len(big) == 3


def test_graph_invariants_on_bundled_models():
    for name in bundled_models():
        g = compile_model(model_source(name))
        for n in g.nodes:
            assert all(p < n.id for p in n.parents)
            if n.kind == "op":
                assert OPS[n.op] is None or len(n.parents) == OPS[n.op]
                assert not all(g.nodes[p].kind == "const" for p in n.parents)


@pytest.mark.parametrize("name", sorted(bundled_models()))
def test_lowering_is_idempotent(name):
    g = compile_model(model_source(name))
    g2 = compile_model(to_source(g))
    assert g2.structure() == g.structure()
    assert compile_model(to_source(g2)).structure() == g.structure()


def test_bundled_models_match_files():
    names = {p.stem for p in MODELS.glob("*.gga")}
    assert set(bundled_models()) == names


def test_ancestor_masks():
    g = g_of("x ~ Normal(0,1)\nz ~ Normal(0,1)\ny = x*z\nw = y + x\nquery w")
    x, z = g.node_of("x"), g.node_of("z")
    assert g.draws_in(g.ancestors[g.node_of("w")]) == sorted([x, z])


def test_build_graph_rejects_cycles_and_arity():
    with pytest.raises(CycleError):
        build_graph("m", [Node(0, "op", "neg", (0,))], {}, (), ())
    from tailalgebra.errors import DSLError
    from tailalgebra.catalog import AtomicDistribution
    d = Node(0, "draw", dist=AtomicDistribution("normal", (0, 1)))
    with pytest.raises(DSLError):
        build_graph("m", [d, Node(1, "op", "add", (0,))], {}, (), ())


def test_long_chain_is_linear():
    from tailalgebra.catalog import AtomicDistribution
    n = 100_000
    nodes = [Node(0, "draw", dist=AtomicDistribution("normal", (0, 1)))]
    nodes += [Node(i, "op", "scale", (i - 1,), (1.0 + (i % 2),)) for i in range(1, n)]
    g = build_graph("chain", nodes, {}, (n - 1,), ())
    rep = analyze(g)
    assert rep.visits == n
    assert len(rep.entries) == n
