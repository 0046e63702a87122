import pytest
from hypothesis import given
from hypothesis import strategies as st

from activeflux.families import (
    Custom,
    FourthOrder,
    HalfCflExact,
    Method3,
    SecondOrder,
    SuperDuper,
    ThirdOrder,
    Traditional,
    family_text,
    fourth_order_STU,
    parse_family,
    resolve,
    second_order_U,
    super_duper,
    third_order_TU,
)

courant = st.floats(0.01, 1.0)


@given(courant)
def test_traditional(nu):
    p = resolve(Traditional(), nu)
    assert p.as_tuple() == (3.0, 3.0, 1 - nu, nu)


def test_super_duper_at_half():
    assert resolve(SuperDuper(), 0.5).as_tuple() == (4.0, 4.0, 0.5, 0.5)


def test_half_cfl_exact_r3():
    assert resolve(HalfCflExact(3.0), 0.9).as_tuple() == (3.0, 5.0, 0.125, 1.125)


def test_second_order_u():
    assert second_order_U(3, 3, 0.7) == pytest.approx(0.3)
    assert second_order_U(1, 1, 0.5) == 0.5
    assert second_order_U(2, 4, 1) == -0.5
    with pytest.raises(ValueError):
        second_order_U(0, 1, 0.5)


@given(courant)
def test_third_order_reduces_to_traditional(nu):
    T, U = third_order_TU(3, 3, nu)
    assert T == pytest.approx(1 - nu, abs=1e-14)
    assert U == pytest.approx(nu, abs=1e-14)


def test_third_order_hand_values():
    assert third_order_TU(4, 4, 0.5) == pytest.approx((0.5, 0.5), abs=1e-15)
    T, U = third_order_TU(2, 2, 0.7)
    assert T == pytest.approx(-(1.7 * 2) / 3 + 1.5, abs=1e-15)
    assert U == pytest.approx((4 * 0.2 + 3) / 6, abs=1e-15)
    with pytest.raises(ValueError):
        third_order_TU(1, -1, 0.5)


@given(courant)
def test_super_duper_is_fourth_order_member(nu):
    S, T, U = fourth_order_STU(6 / (2 - nu), nu)
    sd = super_duper(nu)
    assert S == pytest.approx(6 / (1 + nu), abs=1e-13)
    assert (T, U) == pytest.approx((0.5, 0.5), abs=1e-13)
    assert sd.as_tuple() == pytest.approx((6 / (2 - nu), S, T, U), abs=1e-13)


@given(st.floats(-10, 10))
def test_fourth_order_at_half_is_half_cfl_family(R):
    S, T, U = fourth_order_STU(R, 0.5)
    assert S == pytest.approx(8 - R, abs=1e-12)
    assert T == pytest.approx((R - 2) ** 2 / 8, abs=1e-12)
    assert U == pytest.approx((R - 6) ** 2 / 8, abs=1e-12)


def test_super_duper_closed_forms():
    p = resolve(SuperDuper(), 0.7)
    assert p.R == pytest.approx(4.615384615384615)
    assert p.S == pytest.approx(3.5294117647058822)
    assert resolve(SuperDuper(), 1.0).as_tuple() == (6.0, 3.0, 0.5, 0.5)


def test_method3_is_third_order_with_equal_weights():
    assert resolve(Method3(2.5), 0.3) == resolve(ThirdOrder(2.5, 2.5), 0.3)


def test_third_order_with_s_equal_8_minus_r_is_half_cfl_exact():
    for R in (1.0, 3.0, 5.5):
        a = resolve(ThirdOrder(R, 8 - R), 0.5).as_tuple()
        assert a == pytest.approx(resolve(HalfCflExact(R), 0.5).as_tuple(), abs=1e-14)


def test_resolve_guards_division():
    with pytest.raises(ValueError):
        resolve(ThirdOrder(2.0, -2.0), 0.5)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("traditional", Traditional()),
        ("method3:R=4", Method3(4.0)),
        ("third:R=2,S=6", ThirdOrder(2.0, 6.0)),
        ("fourth:R=3", FourthOrder(3.0)),
        ("SuperDuper", SuperDuper()),
        ("halfcfl:r=3", HalfCflExact(3.0)),
        ("custom:R=1,S=2,T=0.5,U=-1e-3", Custom(1.0, 2.0, 0.5, -1e-3)),
        ("second:R=1,S=2,T=0.25", SecondOrder(1.0, 2.0, 0.25)),
    ],
)
def test_parse_family(text, expected):
    spec = parse_family(text)
    assert spec == expected
    assert parse_family(family_text(spec)) == spec


@pytest.mark.parametrize("text", ["nope", "method3", "method3:R=x", "third:R=2", "method3:Q=1", "fourth:R=1,,S"])
def test_parse_family_rejects(text):
    with pytest.raises(ValueError):
        parse_family(text)


def test_str_is_text_form():
    assert str(Method3(3.75)) == "method3:R=3.75"
    assert str(SuperDuper()) == "superduper"
