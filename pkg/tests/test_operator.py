import math

import numpy as np
import pytest

from heva import (
    ConstantSequence,
    Element,
    GeometricSequence,
    InvalidWeights,
    MissingCertificate,
    NotMarkov,
    StructureMap,
    TruncationPolicy,
    axpy,
    build_branching,
    build_house_of_cards,
    build_identity,
    build_renewal,
    certify_hilbert_schmidt,
    certify_rowsum,
    certify_schur,
    empirical_norm_lower_bound,
    evolution_apply,
    in_domain,
    norm,
    power_apply,
    square_basis,
    to_structure_map,
)
from oracles import dense_evolution, dense_structure_window, dense_vector
from util_random import random_dense_stochastic, random_element, random_unit_element

POLICY = TruncationPolicy(cutoff=64, abs_tol=1e-9, max_tail=1e-3)


@pytest.fixture(scope="module")
def renewal_map():
    return to_structure_map(build_renewal(GeometricSequence(0.5, start=1)))


@pytest.fixture(scope="module")
def identity_map():
    return to_structure_map(build_identity())


# -- evolution_apply -----------------------------------------------------------


def test_apply_renewal_descent(renewal_map):
    assert evolution_apply(renewal_map, Element.basis(3), POLICY) == Element.basis(2)


def test_apply_zero(renewal_map):
    assert evolution_apply(renewal_map, Element.zero(), POLICY) == Element.zero()


def test_apply_mixed_vector(renewal_map):
    policy = TruncationPolicy(cutoff=20, abs_tol=1e-9, max_tail=1e-3)
    out = evolution_apply(
        renewal_map, axpy(1.0, Element.basis(0), Element.basis(2)), policy
    )
    assert out[1] == 1.5
    C = dense_structure_window(renewal_map, 20)
    expected = dense_evolution(C, dense_vector(out, 20), steps=0)
    v = np.zeros(20)
    v[0] = v[2] = 1.0
    expected = C @ v
    for k in range(20):
        assert out[k] == pytest.approx(expected[k], abs=1e-12)


def test_apply_matches_square_basis_exactly(renewal_map, identity_map):
    for smap in (renewal_map, identity_map):
        for i in range(8):
            via_apply = evolution_apply(smap, Element.basis(i), POLICY)
            via_square = square_basis(smap, i, POLICY)
            assert via_apply.coefficients == via_square.coefficients
            assert via_apply.tail_bound == via_square.tail_bound


def test_apply_linearity(renewal_map):
    for trial in range(30):
        v = random_element(61, trial)
        w = random_element(62, trial)
        a = -1.5 + trial / 9.0
        lhs = evolution_apply(renewal_map, axpy(a, v, w), POLICY)
        rhs = axpy(
            a,
            evolution_apply(renewal_map, v, POLICY),
            evolution_apply(renewal_map, w, POLICY),
        )
        tol = POLICY.abs_tol * (1.0 + abs(a))
        for k in set(lhs.coefficients) | set(rhs.coefficients):
            assert lhs[k] == pytest.approx(rhs[k], abs=tol)


# -- in_domain -----------------------------------------------------------------


def test_in_domain_finite_map_is_exact():
    smap = StructureMap.from_columns({0: {0: 0.5, 1: 0.5}, 1: {0: 1.0}})
    verdict = in_domain(smap, Element({0: 1.0, 1: 2.0}), POLICY)
    assert verdict.certified
    assert verdict.bound == pytest.approx(verdict.partial_sum, rel=1e-15)


def test_in_domain_markov_basis_vector(renewal_map):
    verdict = in_domain(renewal_map, Element.basis(0), POLICY)
    assert verdict.certified
    assert verdict.bound <= 1.0 + 1e-12


def test_in_domain_without_metadata_is_inconclusive():
    lazy = StructureMap(
        lambda i, cut: [(k, 0.5) for k in range(cut)] if i == 0 else [(i - 1, 1.0)]
    )
    verdict = in_domain(lazy, Element.basis(0), POLICY)
    assert not verdict.certified
    assert verdict.bound is None
    # Partial sums grow linearly with the cutoff: 0.25 per output index.
    assert verdict.partial_sum == pytest.approx(0.25 * POLICY.cutoff, rel=1e-12)
    wider = in_domain(
        lazy, Element.basis(0), TruncationPolicy(cutoff=128, abs_tol=1e-9, max_tail=1.0)
    )
    assert wider.partial_sum > verdict.partial_sum


# -- certificates --------------------------------------------------------------


def test_hilbert_schmidt_block():
    smap = StructureMap.from_columns(
        {i: {k: 0.1 for k in range(5)} for i in range(5)}, "5x5 block"
    )
    cert = certify_hilbert_schmidt(smap, POLICY)
    assert cert.certified and cert.variant == "HilbertSchmidt"
    assert cert.hs_sum == pytest.approx(0.25, abs=1e-12)
    assert cert.norm_bound == pytest.approx(0.5, abs=1e-12)


def test_hilbert_schmidt_identity_diverges(identity_map):
    cert = certify_hilbert_schmidt(identity_map, POLICY)
    assert not cert.certified
    assert cert.details["partial_sum"] == pytest.approx(POLICY.cutoff, abs=1e-12)


def test_hilbert_schmidt_zero_map():
    cert = certify_hilbert_schmidt(StructureMap.from_columns({}), POLICY)
    assert cert.certified
    assert cert.hs_sum == 0.0
    assert cert.norm_bound == 0.0


def test_hilbert_schmidt_respects_cutoff_grid():
    smap = StructureMap.from_columns({0: {0: 0.5, 100: 0.5}})
    cert = certify_hilbert_schmidt(smap, POLICY)
    # The out-of-window entry is stored, so the tail is exact, not dropped.
    assert cert.hs_sum == pytest.approx(0.5, abs=1e-15)


def test_schur_house_of_cards_summable():
    smap = to_structure_map(build_house_of_cards(GeometricSequence(0.5)))
    cert = certify_schur(smap, None, None, POLICY)
    assert cert.certified
    assert cert.m1 == pytest.approx(1.0, abs=1e-12)
    assert cert.m2 == pytest.approx(1.0, abs=1e-12)
    assert cert.norm_bound == pytest.approx(1.0, abs=1e-12)


def test_schur_renewal(renewal_map):
    cert = certify_schur(renewal_map, None, None, POLICY)
    assert cert.certified
    assert cert.m1 == 1.0
    assert cert.m2 == 2.0
    assert cert.norm_bound == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert cert.norm_bound <= 2.0


def test_schur_house_of_cards_constant_inconclusive():
    smap = to_structure_map(build_house_of_cards(ConstantSequence(0.5)))
    for cutoff in (100, 256):
        policy = TruncationPolicy(cutoff=cutoff, abs_tol=1e-9, max_tail=1e-3)
        cert = certify_schur(smap, None, None, policy)
        assert not cert.certified
        assert cert.details["measured_m2"] == pytest.approx(0.5 * cutoff, abs=1e-9)
        assert cert.details["argmax_row"] == 0


def test_schur_rejects_nonpositive_weights(renewal_map):
    with pytest.raises(InvalidWeights):
        certify_schur(renewal_map, lambda k: 0.0, None, POLICY)


def test_schur_explicit_with_custom_weights():
    smap = StructureMap.from_columns({0: {0: 0.5, 1: 0.5}, 1: {0: 1.0}})
    alpha = lambda k: 1.0 + k  # noqa: E731
    beta = lambda i: 2.0  # noqa: E731
    cert = certify_schur(smap, alpha, beta, POLICY)
    assert cert.certified
    # M1 = max((0.5*1 + 0.5*2)/2, (1*1)/2) = 0.75; M2 = max over rows.
    assert cert.m1 == pytest.approx(0.75, abs=1e-15)
    assert cert.m2 == pytest.approx(max((0.5 * 2 + 1.0 * 2) / 1.0, (0.5 * 2) / 2.0))


def test_rowsum_renewal_reports_family_bound(renewal_map):
    for cutoff in (3, 17, 64, 256):
        cert = certify_rowsum(
            renewal_map, TruncationPolicy(cutoff=cutoff, abs_tol=1e-9, max_tail=1e-3)
        )
        assert cert.certified and cert.variant == "RowSum"
        assert cert.m == 2.0
        assert cert.norm_bound == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_rowsum_identity(identity_map):
    cert = certify_rowsum(identity_map, POLICY)
    assert cert.m == 1.0
    assert cert.norm_bound == 1.0


def test_rowsum_branching_uses_pgf_bound():
    smap = to_structure_map(build_branching([0.5, 0.5]))
    cert = certify_rowsum(smap, POLICY)
    assert cert.certified
    assert cert.m == pytest.approx(6.0, abs=1e-12)
    assert cert.details["measured_sup"] == pytest.approx(2.0, abs=1e-9)


def test_rowsum_rejects_non_markov():
    smap = StructureMap.from_columns({0: {0: 0.9}})
    with pytest.raises(NotMarkov):
        certify_rowsum(smap, POLICY)


def test_rowsum_house_of_cards_constant_inconclusive():
    smap = to_structure_map(build_house_of_cards(ConstantSequence(0.5)))
    cert = certify_rowsum(smap, POLICY)
    assert not cert.certified
    assert cert.details["measured_sup"] == pytest.approx(0.5 * POLICY.cutoff, abs=1e-9)


def test_certificate_rendering(renewal_map):
    line = certify_rowsum(renewal_map, POLICY).render()
    assert line == f"CERTIFIED RowSum norm_bound={math.sqrt(2.0)!r} cutoff=64"
    bad = certify_schur(
        to_structure_map(build_house_of_cards(ConstantSequence(0.5))),
        None,
        None,
        POLICY,
    )
    assert bad.render().startswith("INCONCLUSIVE ")


# -- power_apply ---------------------------------------------------------------


def test_power_one_equals_apply(renewal_map):
    v = random_element(71, 3)
    assert power_apply(renewal_map, v, 1, POLICY).coefficients == (
        evolution_apply(renewal_map, v, POLICY).coefficients
    )


def test_power_renewal_two_steps(renewal_map):
    policy = TruncationPolicy(cutoff=20, abs_tol=1e-9, max_tail=1e-3)
    out = power_apply(renewal_map, Element.basis(1), 2, policy)
    expected = square_basis(renewal_map, 0, policy)
    assert out.coefficients == expected.coefficients

    back = power_apply(renewal_map, Element.basis(0), 2, policy)
    assert back[0] == pytest.approx(0.5, abs=1e-15)

    C = dense_structure_window(renewal_map, 20)
    oracle = np.linalg.matrix_power(C, 2) @ dense_vector(Element.basis(0), 20)
    for k in range(20):
        assert back[k] == pytest.approx(oracle[k], abs=1e-12)


def test_power_additivity(renewal_map):
    v = random_element(81, 5)
    left = power_apply(renewal_map, v, 5, POLICY)
    right = power_apply(renewal_map, power_apply(renewal_map, v, 2, POLICY), 3, POLICY)
    assert left.coefficients == right.coefficients
    assert left.tail_bound == pytest.approx(right.tail_bound, rel=1e-12)


def test_power_dense_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 13))
        C = random_dense_stochastic(rng, n)
        smap = StructureMap.from_dense(C)
        policy = TruncationPolicy(cutoff=n, abs_tol=1e-12, max_tail=1.0)
        v = random_element(91, int(rng.integers(0, 1000)), max_index=n)
        steps = int(rng.integers(1, 17))
        out = power_apply(smap, v, steps, policy)
        oracle = np.linalg.matrix_power(C, steps) @ dense_vector(v, n)
        for k in range(n):
            assert out[k] == pytest.approx(oracle[k], abs=1e-10)


def test_power_strict_tails_needs_certificate():
    # No metadata at all: a truncated column creates a tail on step one, and
    # propagating it on step two has no norm bound to lean on.
    lazy = StructureMap(
        lambda i, cut: [(k, 0.25) for k in range(min(4, cut))] if i == 0 else [],
        column_l1=lambda i: 1.0 if i == 0 else 0.0,
    )
    policy = TruncationPolicy(cutoff=2, abs_tol=1e-9, max_tail=10.0)
    with pytest.raises(MissingCertificate):
        power_apply(lazy, Element.basis(0), 2, policy, strict_tails=True)
    out = power_apply(lazy, Element.basis(0), 2, policy)
    assert math.isinf(out.tail_bound)


def test_power_certified_tail_growth(renewal_map):
    policy = TruncationPolicy(cutoff=8, abs_tol=1e-9, max_tail=1.0)
    out = power_apply(renewal_map, Element.basis(0), 3, policy)
    assert 0.0 < out.tail_bound < 1.0
    explicit = power_apply(renewal_map, Element.basis(0), 3, policy, norm_bound=2.0)
    assert explicit.tail_bound >= out.tail_bound


# -- empirical norm ------------------------------------------------------------


def test_empirical_identity(identity_map):
    assert empirical_norm_lower_bound(identity_map, 50, 3, POLICY) == pytest.approx(
        1.0, abs=1e-9
    )


def test_empirical_zero_map():
    zero = StructureMap.from_columns({})
    assert empirical_norm_lower_bound(zero, 20, 3, POLICY) == 0.0


def test_empirical_renewal_between_one_and_schur_bound(renewal_map):
    value = empirical_norm_lower_bound(renewal_map, 200, 1, POLICY)
    assert 1.0 < value <= math.sqrt(2.0)


def test_empirical_never_beats_certificates(renewal_map, identity_map):
    for smap in (renewal_map, identity_map):
        cert = certify_rowsum(smap, POLICY)
        value = empirical_norm_lower_bound(smap, 100, 17, POLICY)
        assert value <= cert.norm_bound + POLICY.abs_tol


def test_certificate_soundness_random_vectors(renewal_map):
    cert = certify_schur(renewal_map, None, None, POLICY)
    for trial in range(100):
        v = random_unit_element(99, trial)
        image = evolution_apply(renewal_map, v, POLICY, _enforce_max_tail=False)
        assert norm(image).value <= cert.norm_bound * norm(v).value + 1e-9
