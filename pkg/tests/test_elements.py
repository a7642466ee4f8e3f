import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heva import (
    Element,
    ElementFormatError,
    TailTooLarge,
    TruncationPolicy,
    axpy,
    format_element,
    inner_product,
    norm,
    parse_element,
    scale,
    truncate,
)

POLICY = TruncationPolicy(cutoff=64, abs_tol=1e-9, max_tail=10.0)

finite_coeffs = st.dictionaries(
    st.integers(min_value=0, max_value=40),
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
    max_size=8,
)


def test_orthonormality():
    assert inner_product(Element.basis(3), Element.basis(3)) == (1.0, 0.0)
    assert inner_product(Element.basis(3), Element.basis(5)) == (0.0, 0.0)


def test_orthonormality_grid():
    for i in range(8):
        for j in range(8):
            value, unc = inner_product(Element.basis(i), Element.basis(j))
            assert unc == 0.0
            assert value == (1.0 if i == j else 0.0)


def test_inner_product_geometric_against_first_coordinate():
    v = Element({i: 2.0 ** -(i + 1) for i in range(10)})
    assert inner_product(v, Element.basis(0)) == (0.5, 0.0)


def test_inner_product_uncertainty_charges_tails():
    v = Element({0: 3.0}, tail_bound=0.1)
    w = Element({0: 4.0}, tail_bound=0.2)
    value, unc = inner_product(v, w)
    assert value == 12.0
    assert unc == pytest.approx(0.1 * 0.2 + 0.1 * 4.0 + 0.2 * 3.0, abs=1e-15)


def test_norm_examples():
    assert norm(Element.basis(7)) == (1.0, 0.0)
    assert norm(Element.zero()) == (0.0, 0.0)
    assert norm(Element({0: 0.6, 1: 0.8})) == (1.0, 0.0)


def test_norm_uncertainty_interval():
    v = Element({0: 3.0, 1: 4.0}, tail_bound=12.0)
    value, unc = norm(v)
    assert value == 5.0
    assert value + unc == pytest.approx(13.0, abs=1e-12)


def test_axpy_examples():
    v = Element({4: 2.5, 9: -1.0})
    assert axpy(0.0, v, Element.basis(2)) == Element.basis(2)
    assert axpy(1.0, Element.basis(1), Element.basis(1)) == Element({1: 2.0})
    mixed = axpy(2.0, Element({0: 1.0}, 0.1), Element({1: 1.0}, 0.2))
    assert mixed == Element({0: 2.0, 1: 1.0}, tail_bound=0.4)


def test_scale_is_axpy_with_zero():
    assert scale(3.0, Element.basis(2)) == Element({2: 3.0})


def test_truncate_noop_below_cutoff():
    v = Element({0: 1.0, 1: -2.0, 2: 0.5})
    assert truncate(v, TruncationPolicy(cutoff=10, abs_tol=1e-9, max_tail=1.0)) == v


def test_truncate_moves_mass_to_tail():
    v = Element({0: 1.0, 100: 0.3})
    out = truncate(v, TruncationPolicy(cutoff=50, abs_tol=1e-9, max_tail=1.0))
    assert out == Element({0: 1.0}, tail_bound=0.3)


def test_truncate_refuses_when_tail_exceeds_cap():
    v = Element({100: 0.9})
    with pytest.raises(TailTooLarge):
        truncate(v, TruncationPolicy(cutoff=50, abs_tol=1e-9, max_tail=0.5))


@settings(max_examples=100, derandomize=True)
@given(finite_coeffs)
def test_norm_consistency(coeffs):
    v = Element(coeffs)
    assert norm(v).value ** 2 == pytest.approx(
        inner_product(v, v).value, abs=POLICY.abs_tol * (1 + norm(v).value ** 2)
    )


@settings(max_examples=100, derandomize=True)
@given(finite_coeffs, finite_coeffs)
def test_triangle_inequality(cv, cw):
    v, w = Element(cv), Element(cw)
    assert norm(axpy(1.0, v, w)).value <= norm(v).value + norm(w).value + POLICY.abs_tol


@settings(max_examples=100, derandomize=True)
@given(finite_coeffs, st.integers(min_value=1, max_value=50))
def test_truncation_soundness(coeffs, cutoff):
    v = Element(coeffs)
    policy = TruncationPolicy(cutoff=cutoff, abs_tol=1e-9, max_tail=1e9)
    out = truncate(v, policy)
    dropped = Element({i: x for i, x in coeffs.items() if i >= cutoff})
    # The reported increase is exactly the l2 norm of what was dropped.
    assert out.tail_bound - v.tail_bound == norm(dropped).value


@settings(max_examples=60, derandomize=True)
@given(finite_coeffs, st.floats(min_value=-8, max_value=8, allow_nan=False))
def test_axpy_tail_bound_is_minkowski(coeffs, a):
    v = Element(coeffs, tail_bound=0.25)
    w = Element({1: 1.0}, tail_bound=0.5)
    assert axpy(a, v, w).tail_bound == abs(a) * 0.25 + 0.5


def test_element_rejects_bad_input():
    with pytest.raises(ValueError):
        Element({-1: 1.0})
    with pytest.raises(ValueError):
        Element({0: math.nan})
    with pytest.raises(ValueError):
        Element({0: 1.0}, tail_bound=-0.1)


def test_policy_validation():
    with pytest.raises(ValueError):
        TruncationPolicy(cutoff=0)
    with pytest.raises(ValueError):
        TruncationPolicy(abs_tol=0.0)
    with pytest.raises(ValueError):
        TruncationPolicy(max_tail=-1.0)


def test_text_format_round_trip():
    v = Element({0: 0.5, 3: -0.25, 17: 1e-12}, tail_bound=0.125)
    assert parse_element(format_element(v)) == v


def test_text_format_comments_and_blank_lines():
    text = "# header\n\n0 1.0\n# mid\n2 -0.5\ntail 0.25\n"
    assert parse_element(text) == Element({0: 1.0, 2: -0.5}, 0.25)


@pytest.mark.parametrize(
    "bad",
    [
        "0 1.0\n0 2.0\n",  # duplicate index
        "0 one\n",
        "0\n",
        "tail 0.1\n0 1.0\n",  # entries after tail
        "tail x\n",
        "-3 1.0\n",
    ],
)
def test_text_format_rejects(bad):
    with pytest.raises(ElementFormatError):
        parse_element(bad)


def test_sparse_equality_ignores_stored_zeros():
    assert Element({0: 0.0, 2: 1.0}) == Element({2: 1.0})
    assert Element({2: 1.0}, 0.1) != Element({2: 1.0})
