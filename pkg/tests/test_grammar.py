import pytest

from hetnil.forms import e, eb, wedge
from hetnil.grammar import GrammarError, parse, parse_sections
from hetnil.jets import expf, jet, kappa2, param


def test_scalars_and_precedence():
    assert parse("2*t^2 - f1*f2/s") == param("t", 2) * 2 - jet(1) * jet(2) * param("s", -1)
    assert parse("-(f1)^2") == -(jet(1) * jet(1))
    assert parse("s^-2") == param("s", -2)
    assert parse("exp(-2f)*exp(f)") == expf(-1)
    assert parse("kappa2") == kappa2()
    assert parse("d1(exp(2f))") == expf(2) * jet(1) * 2
    assert parse("lap(f1)") == sum((jet(1, i, i) for i in range(2, 5)), jet(1, 1, 1))


def test_forms():
    assert parse("eb13 + 2*eb24") == eb(1, 3) + eb(2, 4) * 2
    assert parse("eb31") == -eb(1, 3)
    assert not parse("e11")
    assert parse("e1*e2") == wedge(e(1), e(2))
    assert parse("t*(eb1 + eb2)/s") == (eb(1) + eb(2)) * (param("t") * param("s", -1))


@pytest.mark.parametrize("text", [
    "f1 +", "f5", "x", "t/(t+s)", "(f1 + f2)^-1", "f1^1/2", "eb1 + t", "eb1^2", "lap(eb1)", "2 $ 3", "(t",
])
def test_rejects(text):
    with pytest.raises(GrammarError):
        parse(text)


def test_sections():
    text = """
    # comment
    [a]
      t +   # trailing comment
      s
    [b]
    eb12
    """
    out = parse_sections(text)
    assert out == {"a": param("t") + param("s"), "b": eb(1, 2)}
    with pytest.raises(ValueError):
        parse_sections("t\n[a]\ns")
    with pytest.raises(ValueError):
        parse_sections("[a]\nt\n[a]\ns")
    with pytest.raises(GrammarError, match=r"\[a\]"):
        parse_sections("[a]\nt +")
