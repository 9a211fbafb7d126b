import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from germsolve.jetgroup import (JetAutomorphism, JetMap, JetQuotient, OrbitFailure, OrbitLift,
                                TangentVector, determinacy_bound, jet_act, jet_exp, jet_ln,
                                orbit_lift, project, random_automorphism, random_series,
                                random_tangent, stabilizer_tangent, tangent_space)
from germsolve.series import DomainError, Q, Ring, SeriesVec

import oracles
import sympy as sp

SHAPES = {"r0": (1, 1), "k0": (2, 1), "matrix": (2, 2)}


def vec(*xs):
    return SeriesVec(list(xs))


def test_jet_act_examples():
    R = Ring(("x",), 6)
    x = R.var(0)
    w = vec(x ** 3 - 2 * x ** 5)
    assert jet_act(JetAutomorphism.identity("r0", R), w) == w
    g = JetAutomorphism("r0", R, (1, 1), (x + x * x,))
    assert jet_act(g, vec(x)) == vec(x + x * x)
    assert jet_act(g, vec(x ** 3)) == vec(x ** 3 + 3 * x ** 4 + 3 * x ** 5 + x ** 6)


def test_bad_automorphisms():
    R = Ring(("x",), 6)
    x = R.var(0)
    with pytest.raises(DomainError):
        JetAutomorphism("r0", R, (1, 1), (x + 1,))
    with pytest.raises(DomainError):
        JetAutomorphism("r0", R, (1, 1), (2 * x,))


def test_ln_identity_and_exp_derivation():
    R = Ring(("x",), 5)
    x = R.var(0)
    q = JetQuotient(R, (1, 1))
    assert jet_ln(JetMap.identity(q)).is_zero()
    xi = TangentVector("r0", R, (1, 1), (x * x,), None, None)
    g = jet_exp(xi.to_map(q))
    assert g.apply(vec(x)) == vec(x + x ** 2 + x ** 3 + x ** 4 + x ** 5)
    assert xi.exp_apply(vec(x)) == vec(x + x ** 2 + x ** 3 + x ** 4 + x ** 5)


def test_non_unipotent_rejected():
    R = Ring(("x",), 4)
    q = JetQuotient(R, (1, 1))
    with pytest.raises(DomainError):
        jet_ln(JetMap.identity(q).scale(Q(2)))
    with pytest.raises(DomainError):
        jet_exp(JetMap.identity(q))


def test_tangent_space_examples():
    R = Ring(("x",), 8)
    x = R.var(0)
    T = tangent_space("r0", vec(x ** 3))
    assert T.slice_dims() == {d: (1 if d >= 4 else 0) for d in range(9)}
    T = tangent_space("r0", vec(x))
    assert T.slice_dims() == {d: (1 if d >= 2 else 0) for d in range(9)}
    T = tangent_space("r0", vec(R.const(5)))
    assert all(v == 0 for v in T.slice_dims().values())


@pytest.mark.parametrize("k", [2, 3, 4])
def test_determinacy_powers(k):
    R = Ring(("x",), 10)
    rep = determinacy_bound("r0", vec(R.var(0) ** (k + 1)))
    X = sp.Symbol("x")
    assert rep.bound == k + 2 == oracles.tangent_cover_bound(X ** (k + 1), [X], 10)


def test_determinacy_small_cases():
    R = Ring(("x",), 8)
    assert determinacy_bound("r0", vec(R.var(0))).bound == 2
    R2 = Ring(("x", "y"), 6)
    f = vec(R2.var(0) ** 2 + R2.var(1) ** 2)
    X, Y = sp.symbols("x y")
    for flavor in ("r0", "k0"):
        assert determinacy_bound(flavor, f).bound == oracles.tangent_cover_bound(
            X ** 2 + Y ** 2, [X, Y], 6, flavor)


def test_orbit_lift_binomial():
    R = Ring(("x",), 12)
    x = R.var(0)
    out = orbit_lift("r0", vec(x ** 3), vec(x ** 4), 4)
    assert isinstance(out, OrbitLift)
    phi = out.automorphism.phi[0]
    want = [Fraction(0)] + oracles.binomial_series(Fraction(1, 3), 9)
    got = [Fraction(int(phi.coeff((d,)).numerator), int(phi.coeff((d,)).denominator))
           for d in range(11)]
    assert got == want
    assert jet_act(out.automorphism, vec(x ** 3)) == vec(x ** 3 + x ** 4)


def test_orbit_lift_trivial_and_failure():
    R = Ring(("x",), 8)
    x = R.var(0)
    out = orbit_lift("r0", vec(x ** 3), vec(R.zero()), 4)
    assert out and out.automorphism.phi == (x,)
    bad = orbit_lift("r0", vec(x ** 3), vec(x ** 3), 3)
    assert isinstance(bad, OrbitFailure) and bad.slice == 3


def _sample_w(flavor, R, rng):
    a, b = SHAPES[flavor]
    return SeriesVec([random_series(R, rng, 1, 0.5) for _ in range(a * b)])


@pytest.mark.parametrize("flavor", ["r0", "k0", "matrix"])
@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=4)
def test_exp_ln_roundtrip(flavor, seed):
    rng = random.Random(seed)
    R = Ring(("x", "y"), 6)
    shape = SHAPES[flavor]
    g = random_automorphism(flavor, R, shape, rng)
    G = g.to_map()
    xi = jet_ln(G)
    assert jet_exp(xi) == G
    lam = random_tangent(flavor, R, shape, rng)
    X = lam.to_map()
    E = jet_exp(X, lam)
    assert E.in_group
    assert jet_ln(E) == X
    assert jet_ln(G @ G) == xi.scale(Q(2))


@pytest.mark.parametrize("flavor", ["r0", "k0", "matrix"])
@given(seed=st.integers(0, 10 ** 6), j=st.integers(1, 4))
@settings(max_examples=10)
def test_stabilizer_additivity_and_first_order(flavor, seed, j):
    rng = random.Random(seed)
    R = Ring(("x", "y"), 6)
    shape = SHAPES[flavor]
    w = _sample_w(flavor, R, rng)
    T = tangent_space(flavor, w, 6, shape)
    lam = stabilizer_tangent(T, random_tangent(flavor, R, shape, rng), j)
    lw = lam.apply(w)
    assert project(lw, j).is_zero()
    hw = lam.exp_apply(w)
    # first-order identity: exp(lam) w - w = lam w modulo the next slice
    assert project(hw - w, j + 1) == project(lw, j + 1)
    # additivity with h = exp(lam) in the j-th stabilizer and g arbitrary unipotent
    assert project(hw, j) == project(w, j)
    g = random_automorphism(flavor, R, shape, rng)
    ghw = g.act(hw)
    assert project(ghw - w, j + 1) == project(g.act(w) - w, j + 1) + project(hw - w, j + 1)


@pytest.mark.parametrize("flavor", ["r0", "k0"])
@given(seed=st.integers(0, 10 ** 6))
@settings(max_examples=6)
def test_orbit_lift_constructive(flavor, seed):
    rng = random.Random(seed)
    R = Ring(("x", "y"), 7)
    x, y = R.var(0), R.var(1)
    w = vec(x ** 2 + y ** 3) if flavor == "r0" else vec(x ** 2 + y ** 2, x * y)
    shape = (w.rank, 1)
    rep = determinacy_bound(flavor, w, 7, shape)
    assert rep.bound is not None
    k = rep.bound
    u = SeriesVec([random_series(R, rng, k, 0.4) for _ in range(w.rank)])
    out = orbit_lift(flavor, w, u, k, 7, shape)
    assert isinstance(out, OrbitLift)
    assert (jet_act(out.automorphism, w) - w - u).truncate(7).is_zero()
    assert out.automorphism.to_map().is_unipotent()
