import pytest

from tailalgebra.dsl import compile_model, parse
from tailalgebra.dsl import parser as P
from tailalgebra.errors import (ArityError, CycleError, DSLError, DSLSyntaxError,
                                LogNormalTail, UndefinedVariable, UnknownDistribution,
                                UnknownFunction)


def model(body: str) -> str:
    return "model m {\n" + body + "\n}\n"


def test_draw():
    m = parse(model("x ~ Normal(0,1)"))
    (st,) = m.body
    assert isinstance(st, P.Draw) and st.name == "x" and st.dist.dist == "Normal"


def test_expression_shapes():
    (st,) = parse(model("y = x^2 + 3*z")).body
    e = st.expr
    assert isinstance(e, P.BinOp) and e.op == "+"
    assert isinstance(e.left, P.Pow)
    assert isinstance(e.right, P.BinOp) and e.right.op == "*"


def test_comments_and_whitespace():
    src = "# header\nmodel   m{x~Normal( 0 ,1 )# trailing\nquery x}"
    assert len(parse(src).body) == 2


@pytest.mark.parametrize("body, exc, line, col", [
    ("x ~ Normal(0,1)\ny = foo(x)\nquery y", UnknownFunction, 3, 5),
    ("x ~ Foo(0,1)\nquery x", UnknownDistribution, 2, 5),
    ("x ~ Normal(0,1,2)\nquery x", ArityError, 2, 5),
    ("x ~ Normal(0,1\nquery x", DSLSyntaxError, 3, 1),
    ("x ~ Normal(0,1)\ny = x ^ x\nquery y", DSLSyntaxError, 3, 7),
    ("y = exp(1, 2)\nquery y", ArityError, 2, 5),
])
def test_errors_carry_positions(body, exc, line, col):
    with pytest.raises(exc) as info:
        compile_model(model(body))
    assert (info.value.line, info.value.col) == (line, col)
    assert str(info.value).startswith(f"{line}:{col}: ")


@pytest.mark.parametrize("body, exc", [
    ("y = y + 1\nquery y", CycleError),
    ("y = iid(0, Normal(0,1))\nquery y", DSLError),
    ("y = iid(2.5, Normal(0,1))\nquery y", DSLError),
    ("query y", UndefinedVariable),
    ("y = x + 1\nquery y", UndefinedVariable),
    ("c = 3\nobserve c", DSLError),
    ("x ~ Normal(0,-1)\nquery x", DSLError),
])
def test_semantic_errors(body, exc):
    with pytest.raises(exc):
        compile_model(model(body))


def test_lognormal_is_distinct_and_positioned():
    with pytest.raises(LogNormalTail) as info:
        compile_model(model("x ~ LogNormal(0, 1)\nquery x"))
    assert (info.value.line, info.value.col) == (2, 5)


def test_error_json():
    with pytest.raises(UnknownFunction) as info:
        compile_model(model("y = foo(1)\nquery y"))
    d = info.value.to_json()
    assert d == {"error": "UnknownFunction", "message": "unknown function 'foo'",
                 "line": 2, "col": 5}


def test_two_models_rejected():
    with pytest.raises(DSLSyntaxError):
        parse(model("x ~ Normal(0,1)") + model("y ~ Normal(0,1)"))
