import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from fatpoint.dimensions import SystemSpec, expected_vec_dim
from fatpoint.oracle import (
    DEFAULT_PRIME,
    NON_SPECIAL,
    PROBABLY_SPECIAL,
    OracleConfig,
    PointConfig,
    PrimeField,
    build_conditions_matrix,
    derivative_orders,
    hasse_row,
    is_prime,
    monomial_basis,
    oracle_dim,
    probe_speciality,
    rank_mod_p,
    trial_points,
)

F = PrimeField()


def sympy_rank(mat, p):
    rows = [[int(v) % p for v in r] for r in np.asarray(mat).tolist()]
    if not rows or not rows[0]:
        return 0
    return DomainMatrix([[GF(p)(v) for v in r] for r in rows], (len(rows), len(rows[0])), GF(p)).rank()


def taylor_row(point, order, d, p):
    """Coefficient of X^a Y^b in f(x0+X, y0+Y), monomial by monomial."""
    x, y = sympy.symbols("x y")
    a, b = order
    out = []
    for i, j in monomial_basis(d):
        poly = sympy.Poly(sympy.expand((point[0] + x) ** i * (point[1] + y) ** j), x, y)
        out.append(int(poly.coeff_monomial(x**a * y**b)) % p)
    return out


def test_monomial_basis():
    assert monomial_basis(0) == [(0, 0)]
    assert monomial_basis(1) == [(0, 0), (1, 0), (0, 1)]
    assert len(monomial_basis(2)) == 6
    for d in range(12):
        b = monomial_basis(d)
        assert len(b) == len(set(b)) == (d + 1) * (d + 2) // 2
        assert [i + j for i, j in b] == sorted(i + j for i, j in b)


def test_hasse_row_examples():
    assert hasse_row((1, 1), (0, 0), 1, F) == [1, 1, 1]
    assert hasse_row((17, 5), (1, 0), 1, F) == [0, 1, 0]
    assert hasse_row((2, 3), (1, 0), 2, F) == [0, 1, 0, 4, 3, 0]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 50), st.integers(1, 50), st.integers(0, 3), st.integers(0, 3), st.integers(0, 6))
def test_hasse_row_is_taylor_coefficient(x0, y0, a, b, d):
    assert hasse_row((x0, y0), (a, b), d, F) == taylor_row((x0, y0), (a, b), d, F.p)


def test_matrix_rows_agree_with_hasse_row():
    spec = SystemSpec(5, 3, 4)
    pts = trial_points(4, F.p, 7, 0)
    mat = build_conditions_matrix(spec, pts, F)
    orders = derivative_orders(3)
    expect = [hasse_row(tuple(int(c) for c in q), o, 5, F) for q in pts.points for o in orders]
    assert mat.tolist() == expect


@pytest.mark.parametrize("spec,shape", [((2, 1, 5), (5, 6)), ((2, 2, 2), (6, 6)), ((4, 2, 5), (15, 15))])
def test_matrix_shape(spec, shape):
    s = SystemSpec(*spec)
    assert build_conditions_matrix(s, trial_points(s.n, F.p, 1, 0), F).shape == shape


def test_matrix_rejects_small_prime():
    s = SystemSpec(7, 1, 2)
    with pytest.raises(ValueError):
        build_conditions_matrix(s, trial_points(2, 7, 1, 0), PrimeField(7))


def test_prime_field_validation():
    assert is_prime(DEFAULT_PRIME) and is_prime(2147483629) and not is_prime(2147483649)
    with pytest.raises(ValueError):
        PrimeField(15)
    with pytest.raises(ValueError):
        PrimeField(2305843009213693951)  # prime but too large for int64 products


def test_rank_examples():
    assert rank_mod_p(np.zeros((4, 5), dtype=np.int64), F) == 0
    assert rank_mod_p(np.eye(6, dtype=np.int64), F) == 6
    s = SystemSpec(2, 2, 2)
    mat = build_conditions_matrix(s, trial_points(2, F.p, 11, 0), F)
    assert rank_mod_p(mat, F) == sympy_rank(mat, F.p) == 5


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.sampled_from([2, 3, 5, 7, 101]), st.data())
def test_rank_matches_sympy(r, c, p, data):
    rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), min_size=r, max_size=r))
    assert rank_mod_p(rows, p) == sympy_rank(rows, p)


def test_rank_of_conditions_matrices_matches_sympy():
    for spec in [(6, 4, 3), (4, 2, 5), (7, 2, 9), (9, 3, 4)]:
        s = SystemSpec(*spec)
        mat = build_conditions_matrix(s, trial_points(s.n, F.p, 3, 1), F)
        assert rank_mod_p(mat, F) == sympy_rank(mat, F.p)


@pytest.mark.parametrize(
    "spec,vec,certified",
    [((2, 2, 2), 1, False), ((4, 2, 5), 1, False), ((8, 1, 16), 29, True), ((0, 1, 4), 0, True)],
)
def test_oracle_dim_examples(spec, vec, certified, cfg):
    r = oracle_dim(SystemSpec(*spec), cfg)
    assert (r.vec_dim, r.certified_nonspecial) == (vec, certified)


def test_oracle_requires_trials():
    with pytest.raises(ValueError):
        oracle_dim(SystemSpec(2, 1, 1), OracleConfig(trials=0))


def test_oracle_determinism_and_witness(cfg):
    s = SystemSpec(9, 3, 5)
    a, b = oracle_dim(s, cfg), oracle_dim(s, cfg)
    assert (a.vec_dim, a.ranks, a.witness_trial) == (b.vec_dim, b.ranks, b.witness_trial)
    assert a.certified_nonspecial
    # the witness trial is reproducible from its seed
    pts = trial_points(s.n, cfg.prime, cfg.seed, a.witness_trial)
    assert s.cols - rank_mod_p(build_conditions_matrix(s, pts, F), F) == expected_vec_dim(s)


def test_oracle_trials_monotone():
    s = SystemSpec(2, 2, 2)
    prev = None
    for t in range(1, 5):
        v = oracle_dim(s, OracleConfig(trials=t)).vec_dim
        assert prev is None or v <= prev
        prev = v


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 12), st.integers(0, 4), st.integers(0, 12))
def test_oracle_lower_bound(d, m, n):
    s = SystemSpec(d, m, n)
    r = oracle_dim(s, OracleConfig(trials=1))
    assert r.vec_dim >= max(s.cols - s.rows, 0)
    assert r.vec_dim >= expected_vec_dim(s)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.data())
def test_simple_points_impose_independent_conditions(d, data):
    n = data.draw(st.integers(0, (d + 1) * (d + 2) // 2))
    assert oracle_dim(SystemSpec(d, 1, n)).certified_nonspecial


def test_points_are_seeded():
    a = trial_points(5, F.p, 42, 3).points
    b = trial_points(5, F.p, 42, 3).points
    c = trial_points(5, F.p, 42, 4).points
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert a.min() >= 1 and a.max() <= F.p - 1
    assert isinstance(trial_points(1, F.p, 1, 0), PointConfig)


@pytest.mark.parametrize("spec,gap", [((2, 2, 2), 1), ((4, 2, 5), 1), ((6, 4, 3), 1)])
def test_probe_special(spec, gap):
    res = probe_speciality(SystemSpec(*spec))
    assert res.kind == PROBABLY_SPECIAL and res.gap == gap
    assert len(set(res.primes)) == 2
    assert str(res) == f"ProbablySpecial(gap={gap})"


def test_probe_nonspecial_and_unknown():
    assert probe_speciality(SystemSpec(3, 1, 9)).kind == NON_SPECIAL
    assert probe_speciality(SystemSpec(3, 1, 9), OracleConfig(trials=0)).kind == "Unknown"


def test_special_rank_by_brute_force():
    # L_6(4^3): 30 conditions on 28 monomials, yet rank 27 (triangle of doubled lines)
    s = SystemSpec(6, 4, 3)
    mat = build_conditions_matrix(s, trial_points(3, F.p, 99, 0), F)
    assert sympy_rank(mat, F.p) == 27
