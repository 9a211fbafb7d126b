"""Shared fixture builders: random matrices, named equation systems."""

import random

from germsolve.modfilt import FiltrationSpec, IdealT, PolyMatrix, SubmoduleT
from germsolve.series import Q, Ring, SeriesVec, TruncSeries
from germsolve.solver import decompose_equation


def random_poly(ring: Ring, rng: random.Random, max_degree: int, density=0.35, constant=0.15):
    terms = {}
    for mono in ring.monomials(max_degree):
        p = constant if sum(mono) == 0 else density
        if rng.random() < p:
            c = rng.randint(-3, 3)
            if c:
                terms[mono] = Q(c)
    return TruncSeries(ring, terms)


def random_matrix(ring, rng, p, n, max_degree=2):
    return PolyMatrix([[random_poly(ring, rng, max_degree) for _ in range(n)] for _ in range(p)])


def system(xnames, ynames, D, build):
    """build(xs, ys) -> list of equations in the joint ring."""
    xy = Ring(tuple(xnames) + tuple(ynames), D)
    xs = [xy.var(v) for v in xnames]
    ys = [xy.var(v) for v in ynames]
    return decompose_equation(build(xs, ys), Ring(tuple(xnames), D), ynames)


def newton(D):
    return system(["x"], ["y"], D, lambda xs, ys: [ys[0] ** 2 + ys[0] * xs[0] - xs[0] ** 3])


def newton_filtration(sys_):
    R = sys_.xring
    x = R.var(0)
    return FiltrationSpec(SubmoduleT(R, 1, [SeriesVec([x * x])]), IdealT(R, [x]))


def twovar(D, k=3, g=None):
    def build(xs, ys):
        x1, x2 = xs
        y1, y2 = ys
        gg = x1 ** 7 if g is None else g(x1, x2)
        return [y1 ** 2 - y2 ** 2 + y1 * x1 ** k + y2 * x2 ** k + gg]
    return system(["x1", "x2"], ["y1", "y2"], D, build)


def split(D, n=3, m=3, modified=False):
    def build(xs, ys):
        x1, x2 = xs
        y1, y2 = ys
        second = (y1 ** 2 if modified else y2 ** 2) + y2 * x2 - x2 ** m
        return [y1 ** 2 + y1 * x1 - x1 ** n, second]
    return system(["x1", "x2"], ["y1", "y2"], D, build)


def split_filtration(sys_):
    R = sys_.xring
    x1, x2, z = R.var(0), R.var(1), R.zero()
    V1 = SubmoduleT(R, 2, [SeriesVec([x1, z]), SeriesVec([z, x2])])
    return FiltrationSpec(V1, IdealT.maximal(R))


def m_power_module(R, k, rank):
    return (IdealT.maximal(R) ** k).times_module(rank)


def single_equation(seed: int, D: int = 8):
    """a x^e y + c2(x) y^2 + c3(x) y^3 + u(x) with u in (x^(2e+1)).

    Substituting y = x^e z gives a z + c2 z^2 + x^e c3 z^3 + u / x^(2e) = 0,
    so the root with y(0) = 0 is unique and a Newton oracle applies.
    Returns (system, filtration, e, parts) with parts the raw x-coefficients.
    """
    rng = random.Random(seed)
    e = rng.choice([1, 2])
    a = Q(rng.choice([1, -1, 2, -3])) / rng.choice([1, 2])
    xy = Ring(("x", "y"), D)
    x, y = xy.var("x"), xy.var("y")
    R = Ring(("x",), D)

    def poly(lo, hi):
        return sum((Q(rng.randint(-3, 3)) * x ** k for k in range(lo, hi + 1)), xy.zero())

    c2, c3 = poly(0, 2), poly(0, 2)
    u = x ** (2 * e + 1) * (Q(rng.choice([1, -1, 2])) + poly(1, 2))
    F = a * x ** e * y + c2 * y ** 2 + c3 * y ** 3 + u
    sys_ = decompose_equation([F], R, ["y"])
    xr = R.var(0)
    filt = FiltrationSpec(SubmoduleT(R, 1, [SeriesVec([xr ** (e + 1)])]), IdealT(R, [xr]))
    return sys_, filt, e, (a, c2, c3, u)


def injective_fixtures(count: int = 20, D: int = 8):
    """(name, system, filtration) with injective L."""
    out = [("newton", newton(D), None), ("split", split(D), None)]
    out[0] = ("newton", out[0][1], newton_filtration(out[0][1]))
    out[1] = ("split", out[1][1], split_filtration(out[1][1]))
    seed = 0
    while len(out) < count:
        s, f, _, _ = single_equation(seed, D)
        out.append(("single_%d" % seed, s, f))
        seed += 1
    return out
