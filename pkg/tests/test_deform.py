import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from germsolve.deform import (MatrixFamily, PolyFamily, characteristic_coefficients,
                              characteristic_direct, eigenvalue_deformation, root_deformation)
from germsolve.series import DomainError, Q, Ring, TruncSeries

import oracles


def T(trunc):
    R = Ring(("t",), trunc)
    return R, R.var(0)


def coeff_list(s, N):
    return [Fraction(int(s.coeff((k,)).numerator), int(s.coeff((k,)).denominator)) for k in range(N + 1)]


def test_tougeron_root():
    R, t = T(12)
    rep = root_deformation(PolyFamily([-t ** 6, -t, R.one()]), 10)
    assert rep.verdict == "deforms" and rep.part1 and rep.part2 and rep.fired == "part1"
    assert coeff_list(rep.root, 10) == oracles.root_y2_ty_t6(10)


def test_bk_root():
    R, t = T(12)
    rep = root_deformation(PolyFamily([t ** 2, t, t]), 10)
    assert rep.verdict == "deforms" and not rep.part1 and rep.part2 and rep.fired == "part2"
    assert coeff_list(rep.root, 10) == oracles.root_y2_y_t(10)


def test_zero_root():
    R, t = T(12)
    rep = root_deformation(PolyFamily([R.zero(), -t, R.one()]), 10)
    assert rep.verdict == "deforms" and rep.root.is_zero()


def test_a1_zero_inapplicable():
    R, t = T(12)
    rep = root_deformation(PolyFamily([-t * t, R.zero(), R.one()]), 10)
    assert rep.verdict == "inapplicable" and rep.root is None
    assert "no sufficient condition fired" in rep.message


def test_bad_family():
    R, t = T(6)
    with pytest.raises(DomainError):
        PolyFamily([R.one(), t])
    with pytest.raises(DomainError):
        root_deformation(PolyFamily([-t ** 6, -t, R.one()]), 6)  # needs truncation 7


def test_eigen_tougeron():
    R, t = T(10)
    z = R.zero()
    rep = eigenvalue_deformation(MatrixFamily([[z, t ** 3], [t ** 3, t]]), 8)
    assert rep.charpoly == ["-t^6", "-t", "1"]
    assert rep.fired == "part1" and "trace(adj A)^2" in rep.bullet
    assert coeff_list(rep.root, 8) == oracles.root_y2_ty_t6(8)


def test_eigen_diag():
    R, t = T(10)
    z = R.zero()
    rep = eigenvalue_deformation(MatrixFamily([[z, z], [z, t]]), 8)
    assert rep.verdict == "deforms" and rep.root.is_zero()


def test_eigen_plus_minus_t():
    R, t = T(10)
    z = R.zero()
    rep = eigenvalue_deformation(MatrixFamily([[z, t], [t, z]]), 8)
    assert rep.verdict == "inapplicable" and rep.root is None
    # the eigenvalues +t and -t do deform: the certificate is only sufficient
    fam = PolyFamily(characteristic_coefficients(MatrixFamily([[z, t], [t, z]])))
    assert fam.evaluate(t).is_zero() and fam.evaluate(-t).is_zero()


def random_family(seed, trunc=12):
    rng = random.Random(seed)
    R, t = T(trunc)

    def poly(lo):
        return TruncSeries(R, {(k,): Q(rng.randint(-2, 2)) for k in range(lo, 6) if rng.random() < 0.4})

    a1 = t ** rng.randint(1, 2) * (1 + poly(1))
    return PolyFamily([poly(1), a1] + [poly(0) for _ in range(rng.randint(1, 2))]), R


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40)
def test_root_invariants(seed):
    fam, R = random_family(seed)
    rep = root_deformation(fam, 8)
    if rep.part1:
        assert rep.part2
    if rep.verdict == "deforms":
        R8 = Ring(("t",), 8)
        small = PolyFamily([c.in_ring(R8) for c in fam.coefficients])
        assert small.evaluate(rep.root.in_ring(R8)).is_zero()


@given(st.integers(0, 10 ** 6), st.integers(1, 4))
@settings(max_examples=25)
def test_charpoly_matches_direct(seed, n):
    rng = random.Random(seed)
    R, t = T(6)
    A = [[TruncSeries(R, {(k,): Q(rng.randint(-2, 2)) for k in range(1 if i == j else 0, 4)
                          if rng.random() < 0.5}) for j in range(n)] for i in range(n)]
    A[0][0] = t * A[0][0]
    try:
        fam = MatrixFamily(A)
    except DomainError:
        return
    assert characteristic_coefficients(fam) == characteristic_direct(fam)
