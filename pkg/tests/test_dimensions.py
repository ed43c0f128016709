import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatpoint.dimensions import (
    CaseLabel,
    SystemSpec,
    _third_case_proof_text,
    _third_case_table,
    binom,
    classify_case,
    conditions_count,
    dim_L0,
    expected_proj_dim,
    expected_vec_dim,
    image_intersection,
    image_intersection_cases,
    kernel_sum,
    kernel_sum_cases,
    select_k,
    virtual_dim,
)


@pytest.mark.parametrize("a,b,want", [(4, 2, 6), (0, 0, 1), (2, 3, 0)])
def test_binom(a, b, want):
    assert binom(a, b) == want


@pytest.mark.parametrize("spec,want", [((2, 1, 5), 0), ((2, 2, 2), -1), ((8, 1, 16), 28)])
def test_virtual_dim(spec, want):
    assert virtual_dim(SystemSpec(*spec)) == want


def test_virtual_dim_rejects_negative_degree():
    with pytest.raises(ValueError):
        virtual_dim(SystemSpec(-1, 1, 1))


@pytest.mark.parametrize("spec,want", [((2, 2, 2), -1), ((4, 2, 5), -1), ((8, 1, 16), 28)])
def test_expected_proj_dim(spec, want):
    assert expected_proj_dim(*spec) == want


@pytest.mark.parametrize(
    "spec,want",
    [((4, 1, 16), 0), ((-1, 3, 4), 0), ((8, 1, 16), 29), ((3, 0, 7), 10), ((5, 4, 0), 21), ((-2, 0, 0), 0)],
)
def test_expected_vec_dim(spec, want):
    assert expected_vec_dim(*spec) == want


@pytest.mark.parametrize("m,n,want", [(2, 5, 15), (0, 7, 0), (1, 16, 16)])
def test_conditions_count(m, n, want):
    assert conditions_count(m, n) == want


def test_spec_validation():
    with pytest.raises(ValueError):
        SystemSpec(3, -1, 2)
    with pytest.raises(ValueError):
        SystemSpec(3, 1, -2)
    assert str(SystemSpec(4, 2, 16)) == "L_4(2^16)"


@pytest.mark.parametrize("m,n2,want", [(1, 4, (2,)), (2, 4, (4,)), (1, 9, (3,))])
def test_select_k(m, n2, want):
    assert select_k(m, n2).candidates == want


def test_select_k_two_candidates_on_exact_root():
    # n2 = 1: 1 + 4m(m+1) = (2m+1)^2, so k_l = m - 1 is an integer
    for m in range(1, 10):
        assert select_k(m, 1).candidates == (m - 1, m)


@pytest.mark.parametrize("m,n2", [(0, 4), (2, 0)])
def test_select_k_rejects_degenerate(m, n2):
    with pytest.raises(ValueError):
        select_k(m, n2)


@given(st.integers(1, 50), st.integers(1, 200))
def test_select_k_bracket_property(m, n2):
    ks = select_k(m, n2).candidates
    c = n2 * m * (m + 1) // 2
    lower = lambda k: k * (k + 3) // 2 + 1 - c >= 0  # noqa: E731
    upper = lambda k: (k - 1) * (k + 2) // 2 + 1 - c <= 0  # noqa: E731
    assert 1 <= len(ks) <= 2
    assert list(ks) == list(range(ks[0], ks[-1] + 1))
    assert all(lower(k) and upper(k) for k in ks)
    assert not lower(ks[0] - 1)
    assert not upper(ks[-1] + 1)


@pytest.mark.parametrize(
    "args,want", [((8, 2, 1, 4, 4), 21), ((4, 2, 1, 4, 4), 0), ((0, 0, 1, 4, 4), 0)]
)
def test_kernel_sum(args, want):
    assert kernel_sum(*args) == want


@pytest.mark.parametrize(
    "args,want", [((8, 2, 1, 4, 4), 8), ((4, 2, 1, 4, 4), 0), ((2, 2, 1, 4, 4), 0)]
)
def test_image_intersection(args, want):
    assert image_intersection(*args) == want


@pytest.mark.parametrize(
    "args,want", [((8, 2, 1, 4, 4), 29), ((4, 2, 1, 4, 4), 0), ((10, 4, 2, 4, 4), 18)]
)
def test_dim_L0(args, want):
    assert dim_L0(*args) == want
    d, k, m, n1, n2 = args
    assert want == expected_vec_dim(d, m, n1 * n2)


@pytest.mark.parametrize(
    "args,want",
    [((8, 2, 1, 4, 4), CaseLabel.II), ((4, 2, 1, 4, 4), CaseLabel.A), ((2, 4, 2, 4, 4), CaseLabel.A)],
)
def test_classify_case(args, want):
    assert classify_case(*args) is want


def test_classify_case_none_off_bracket():
    # k far below the bracket: L_k(m^n2) has negative virtual dimension
    assert classify_case(30, 0, 5, 4, 4) is CaseLabel.NONE


@given(st.integers(0, 60), st.integers(0, 8), st.integers(0, 60))
def test_vec_is_proj_plus_one(d, m, n):
    e = expected_proj_dim(d, m, n)
    assert expected_vec_dim(d, m, n) == (e + 1 if e >= 0 else 0)


@given(st.integers(0, 40), st.integers(0, 40), st.integers(1, 6), st.sampled_from([4, 9, 16, 25, 36]))
def test_monotone_in_multiplicity_and_degree(d, k, m, n):
    assert expected_vec_dim(d, k, n) >= expected_vec_dim(d, k + 1, n)
    assert expected_vec_dim(k, m, n) >= expected_vec_dim(k - 1, m, n)


def _grid(d_max=30, m_max=5, counts=(4, 9, 16, 25, 36)):
    for d in range(d_max + 1):
        for k in range(d + 1):
            for m in range(1, m_max + 1):
                for n1 in counts:
                    for n2 in counts:
                        yield d, k, m, n1, n2


def test_kernel_sum_matches_case_table():
    seen = set()
    for args in _grid():
        for label, want in kernel_sum_cases(*args):
            seen.add(label)
            assert kernel_sum(*args) == want, (label, args)
    assert seen == {"1", "2", "3", "4"}


def test_image_intersection_matches_case_table():
    seen = set()
    for args in _grid():
        for label, want in image_intersection_cases(*args):
            seen.add(label)
            assert image_intersection(*args) == want, (label, args)
    assert seen == {"1", "2", "3", "4", "otherwise"}


def test_third_case_sign():
    table_hits = proof_text_hits = 0
    for args in _grid(d_max=20, m_max=3):
        if "3" not in dict(image_intersection_cases(*args)):
            continue
        d, k, m, n1, n2 = args
        got = image_intersection(*args)
        table_hits += got == _third_case_table(d, k, n1)
        proof_text_hits += got == _third_case_proof_text(d, k, n1)
        assert got == _third_case_table(d, k, n1)
    assert table_hits > 0 and proof_text_hits == 0


def test_theorem2_grid():
    for d in range(31):
        for m in range(1, 6):
            for n1 in (4, 9):
                for n2 in (4, 9):
                    for k in select_k(m, n2):
                        assert classify_case(d, k, m, n1, n2) is not CaseLabel.NONE
                        assert dim_L0(d, k, m, n1, n2) == expected_vec_dim(d, m, n1 * n2)


def test_case_label_values_agree_with_dim_L0():
    for args in _grid(d_max=20, m_max=3, counts=(4, 9)):
        d, k, m, n1, n2 = args
        label = classify_case(*args)
        if label in (CaseLabel.I, CaseLabel.II, CaseLabel.III, CaseLabel.IV):
            assert dim_L0(*args) == _full_minus(d, m, n1 * n2), args
        elif label is CaseLabel.A:
            assert dim_L0(*args) == 0, args


def _full_minus(d, m, n):
    # d(d+3)/2 + 1 - n m(m+1)/2, not floored
    return math.comb(d + 2, 2) - n * m * (m + 1) // 2


@settings(max_examples=300)
@given(st.integers(0, 30), st.integers(1, 5), st.sampled_from([4, 9]), st.sampled_from([4, 9]), st.data())
def test_semicontinuity_bound(d, m, n1, n2, data):
    k = data.draw(st.integers(0, d))
    assert dim_L0(d, k, m, n1, n2) >= expected_vec_dim(d, m, n1 * n2)
