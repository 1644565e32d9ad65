"""Exact q-arithmetic: examples with independent oracles, field properties."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcpn.qcoeff import (
    ONE,
    ZERO,
    QPoleError,
    QScalar,
    is_positive_at_q,
    qfactorial,
    qint,
    qmultinomial,
    qpow,
)


def expand_qint(n: int) -> QScalar:
    """Independent oracle: [n] = sum_{k=0}^{n-1} q^{n-1-2k} expanded directly."""
    acc = ZERO
    for k in range(n):
        acc = acc + qpow(n - 1 - 2 * k)
    return acc


def test_qint_trivial_values():
    assert qint(0) == ZERO
    assert qint(1) == ONE
    assert qint(2) == qpow(1) + qpow(-1)
    assert qint(-3) == -qint(3)


def test_qint_against_expansion_oracle():
    for n in range(1, 12):
        assert qint(n) == expand_qint(n)


def test_qint_half_integer():
    # [1/2]^2 = (q^{1/2}-q^{-1/2})^2/(q-q^{-1})^2
    lhs = qint(Fraction(1, 2)) ** 2
    num = (qpow(Fraction(1, 2)) - qpow(Fraction(-1, 2))) ** 2
    den = (qpow(1) - qpow(-1)) ** 2
    assert lhs == num / den


def test_qfactorial():
    assert qfactorial(0) == ONE
    assert qfactorial(1) == ONE
    assert qfactorial(3) == qint(3) * qint(2)
    with pytest.raises(ValueError):
        qfactorial(-1)


def test_qmultinomial_examples():
    assert qmultinomial([1, 1]) == qint(2)
    assert qmultinomial([5, 0, 0]) == ONE
    # [2,1]! = [3]!/([2]![1]!) = [3], via the expansion oracle
    assert qmultinomial([2, 1]) == expand_qint(3)


def test_qmultinomial_symmetry():
    for js in ([2, 1, 3], [0, 4, 1], [2, 2]):
        base = qmultinomial(js)
        assert qmultinomial(list(reversed(js))) == base
        assert qmultinomial(sorted(js)) == base


def test_eval_examples():
    assert qint(2).evalf(0.5) == pytest.approx(2.5, abs=1e-14)
    assert ONE.evalf(0.37) == 1.0
    assert qint(3).evalf(0.5) == pytest.approx(5.25, abs=1e-14)


def test_eval_q_exact():
    assert qint(3).eval_q_exact(Fraction(1, 2)) == Fraction(21, 4)
    with pytest.raises(ValueError):
        qpow(Fraction(1, 2)).eval_q_exact(Fraction(1, 2))


def test_limit_q1():
    assert qint(7).limit_q1() == 7
    assert qmultinomial([2, 2]).limit_q1() == 6
    x = qpow(1) - qpow(-1)
    assert (x / x).limit_q1() == 1
    with pytest.raises(QPoleError):
        (ONE / (qpow(1) - qpow(-1))).limit_q1()


def test_limit_q1_multinomial_is_classical():
    for js in ([1, 2], [3, 1], [2, 2, 1]):
        total = sum(js)
        classical = math.factorial(total)
        for j in js:
            classical //= math.factorial(j)
        assert qmultinomial(js).limit_q1() == classical


def test_pascal_identity():
    # [n+m] = [n] q^m + q^{-n} [m], symbolically
    for n in range(0, 13, 3):
        for m in range(0, 13, 4):
            assert qint(n + m) == qint(n) * qpow(m) + qpow(-n) * qint(m)


def test_positivity():
    assert is_positive_at_q(qint(3) * qint(2))
    assert not is_positive_at_q(ZERO)
    assert not is_positive_at_q(-qint(2))


small_scalars = st.builds(
    lambda c, e: QScalar.s_pow(e, c),
    st.integers(min_value=-4, max_value=4).filter(lambda c: c != 0),
    st.integers(min_value=-6, max_value=6),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(small_scalars, min_size=1, max_size=4), st.lists(small_scalars, min_size=1, max_size=4))
def test_eval_is_multiplicative(xs, ys):
    a = sum(xs, ZERO)
    b = sum(ys, ZERO)
    q0 = 0.5
    lhs = (a * b).evalf(q0)
    rhs = a.evalf(q0) * b.evalf(q0)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(small_scalars, min_size=1, max_size=3), st.lists(small_scalars, min_size=1, max_size=3))
def test_field_laws(xs, ys):
    a = sum(xs, ZERO)
    b = sum(ys, ZERO)
    assert a + b == b + a
    assert a * b == b * a
    assert (a - b) + b == a
    if not b.is_zero():
        assert (a / b) * b == a


def test_canonical_equality():
    # same element reached along different arithmetic routes
    x = (qpow(2) - qpow(-2)) / (qpow(1) - qpow(-1))
    assert x == qint(2)
    assert hash(x) == hash(qint(2))
