import pytest

from psdrank.bounds import SimplexOptConfig
from psdrank.exceptions import DomainError
from psdrank.reproduce import EXAMPLE_IDS, Row, reproduce


@pytest.mark.parametrize("example_id", EXAMPLE_IDS)
def test_every_example_reproduces(example_id):
    rep = reproduce(example_id, SimplexOptConfig(restarts=4))
    assert rep.rows
    assert rep.passed, "\n".join(rep.lines())


def test_row_relations():
    assert Row("x", 2.09, 2.1, ">=").passed
    assert not Row("x", 2.09, 2.08, ">=").passed
    assert Row("x", 1.59, 1.587, "~", 0.01).passed
    assert Row("x", 3, 3, "=").passed
    assert Row("x", 1.1, 1.0989, "<").passed
    with pytest.raises(ValueError):
        _ = Row("x", 1, 1, "?").passed


def test_named_rows():
    ex47 = {r.quantity: r for r in reproduce("ex4.7").rows}
    assert ex47["B4' with published D"].published_value == 8.33 and ex47["B4' with published D"].passed
    ne = {r.quantity: r for r in reproduce("ne", n=3).rows}
    assert ne["factorization size"].computed_value == 3
    ex54 = [r.published_value for r in reproduce("ex5.4").rows]
    assert 1.59 in ex54 and 2.0 in ex54


def test_parameter_overrides_and_errors():
    assert reproduce("ne", n=4).passed
    assert reproduce("mc", n=25, c=4).passed
    assert reproduce("ex3.6", a=0.5).passed
    with pytest.raises(DomainError):
        reproduce("ex0")
    with pytest.raises(DomainError):
        reproduce("ne", c=2)


def test_report_lines_and_dict():
    rep = reproduce("ex5.4")
    d = rep.to_dict()
    assert d["example_id"] == "ex5.4" and d["pass"] is True
    assert all(line.startswith("[PASS]") for line in rep.lines())
