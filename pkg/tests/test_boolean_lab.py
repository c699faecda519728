import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uhatcot import boolean_lab as B
from uhatcot.boolean_lab.fourier import random_query
from uhatcot.boolean_lab.restrictions import STAR
from uhatcot.core import hamming_neighbor
from uhatcot.tasks import median_oracle, mult_digit


def _as_bruteforce(f):
    """Direct definition: average over x of the number of flipped-output neighbours."""
    n = f.arity
    total = 0
    for x in itertools.product((0, 1), repeat=n):
        fx = f(x)
        total += sum(f(hamming_neighbor(x, i)) != fx for i in range(1, n + 1))
    return Fraction(total, 2 ** n)


# -- sensitivity --------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["parity", "and", "or", "majority", "const0", "const1"])
@pytest.mark.parametrize("n", [1, 2, 5, 7])
def test_exact_matches_definition(name, n):
    f = B.by_name(name, n)
    assert B.avg_sensitivity_exact(f) == _as_bruteforce(f)


def test_closed_forms():
    for n in range(1, 17):
        assert B.avg_sensitivity_exact(B.parity(n)) == n
        assert B.avg_sensitivity_exact(B.and_(n)) == Fraction(2 * n, 2 ** n)
        assert B.avg_sensitivity_exact(B.constant(n, 1)) == 0


def test_pointwise_sensitivity():
    assert B.sensitivity(B.and_(4), (1, 1, 1, 1)) == 4
    assert B.sensitivity(B.and_(4), (0, 1, 1, 1)) == 1
    assert B.sensitivity(B.and_(4), (0, 0, 1, 1)) == 0


def test_symmetric_function_permutation_invariance():
    n = 6
    f = B.majority(n)
    perm = [3, 0, 5, 1, 4, 2]
    g = B.BooleanFunction(n, lambda r: f.evaluate(r[:, perm]))
    assert B.avg_sensitivity_exact(f) == B.avg_sensitivity_exact(g)


def test_exhaustive_cap():
    with pytest.raises(B.CapExceeded):
        B.avg_sensitivity_exact(B.parity(21))


def test_sampled_and_within_ci():
    est = B.avg_sensitivity_sampled(B.and_(10), n_inputs=20_000, n_flips=50, seed=3)
    assert abs(est.value - 20 / 1024) <= 4 * est.stderr


def test_sampled_parity_has_zero_error():
    est = B.avg_sensitivity_sampled(B.parity(30), 50, 50, seed=1)
    assert est.value == 30 and est.stderr == 0


def test_mult_digit_fn_matches_task():
    n = 3
    for k in range(1, 2 * n + 1):
        f = B.mult_digit_fn(n, k)
        for row in itertools.product((0, 1), repeat=2 * n):
            assert f(row) == mult_digit(row[:n], row[n:], k)


def test_mult_digit_profile_small():
    rows = B.mult_digit_sensitivity(2, sampled=False)
    # M_1 = x_lsb AND y_lsb
    assert rows[0] == (1, 1.0, 0.0)
    assert len(rows) == 4


def test_median_last_bit_fn_matches_oracle():
    n, bits = 3, 2
    f = B.median_last_bit_fn(n, bits)
    for row in itertools.product((0, 1), repeat=n * bits):
        vals = [int("".join(map(str, row[i * bits:(i + 1) * bits])), 2) for i in range(n)]
        assert f(row) == median_oracle(vals) & 1


def test_default_median_bits():
    assert [B.default_median_bits(n) for n in (1, 2, 8, 9, 32)] == [1, 2, 4, 5, 6]


def test_linear_fit():
    slope, icpt = B.linear_fit([1, 2, 3], [3, 5, 7])
    assert math.isclose(slope, 2) and math.isclose(icpt, 1)


# -- Fourier ------------------------------------------------------------------------------


def test_triple_product_exact():
    assert B.fourier_exact(B.FourierQuery(1, 1, {1}, {1}, set())) == Fraction(1, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.data())
def test_sampled_correlation_matches_exact(n, data):
    t = data.draw(st.integers(1, n))
    q = random_query(n, t, np.random.default_rng(data.draw(st.integers(0, 10_000))))
    exact = float(B.fourier_exact(q))
    est = B.fourier_correlation(q, samples=40_000, seed=5)
    tol = 5 * max(est.stderr, 1 / math.sqrt(40_000))
    assert abs(est.value - exact) <= tol


def test_query_validation():
    with pytest.raises(ValueError):
        B.FourierQuery(4, 2, c={2})
    with pytest.raises(ValueError):
        B.FourierQuery(4, 5)
    with pytest.raises(ValueError):
        B.FourierQuery(4, 2, a={5})


def test_scan_shape_and_determinism():
    a = B.fourier_scan(6, [2, 3], combos=4, samples=500, seed=2)
    b = B.fourier_scan(6, [2, 3], combos=4, samples=500, seed=2)
    assert a == b and len(a) == 8
    best = B.max_abs_by_t(a)
    assert sorted(best) == [2, 3]


# -- restrictions --------------------------------------------------------------------------


def test_restriction_parse_and_merge():
    rho = B.Restriction.parse("1*0*")
    assert rho.stars == 2 and rho.free == (1, 3) and str(rho) == "1*0*"
    assert str(rho.merge(B.Restriction.parse("*1"))) == "1*01"
    with pytest.raises(ValueError):
        B.Restriction.parse("1x")
    rows = rho.fill(np.array([[0, 1], [1, 1]], dtype=np.uint8))
    assert rows.tolist() == [[1, 0, 0, 1], [1, 1, 0, 1]]


def test_restrict_apply_and_constancy():
    f = B.and_(4)
    assert B.is_constant_on(f, B.Restriction.parse("**0*"))
    assert not B.is_constant_on(f, B.Restriction.parse("**1*"))
    g = B.restrict_apply(f, B.Restriction.parse("1*1*"))
    assert g.arity == 2 and g.truth_table().tolist() == [0, 0, 0, 1]


@pytest.mark.parametrize("n", [2, 6, 12])
def test_search_and_or(n):
    for f in (B.and_(n), B.or_(n)):
        r = B.restriction_search(f, (n - 1) / n)
        assert r.rho is not None and r.max_stars == n - 1 and r.exhaustive
        assert B.is_constant_on(f, r.rho)


def test_search_parity_has_no_stars():
    r = B.restriction_search(B.parity(8), 0.1)
    assert r.rho is None and r.max_stars == 0 and r.best.stars == 0


def test_search_majority_threshold():
    # fixing ceil(n/2) ones forces majority; floor(n/2) stars remain
    n = 7
    r = B.restriction_search(B.majority(n), 0.0)
    assert r.max_stars == 3


def test_greedy_path_for_wide_functions():
    n = 28
    r = B.restriction_search(B.and_(n), 0.5, budget=50, seed=1)
    assert r.method == "greedy+random" and not r.exhaustive
    assert r.rho is not None and B.is_constant_on(B.and_(n), r.rho)
    assert all(v in (0, 1, STAR) for v in r.rho.values)


def test_search_rejects_bad_fraction():
    with pytest.raises(ValueError):
        B.restriction_search(B.and_(3), 1.5)
