"""Symbolic re-derivation of the manufactured sources of the "stratified" case."""

import re

import numpy as np
import pytest
import sympy as sp

import bioconv

x, y, z = sp.symbols("x y z", real=True)
X = (x, y, z)


def grad(f):
    return [sp.diff(f, v) for v in X]


def div(w):
    return sum(sp.diff(w[i], X[i]) for i in range(3))


def lap(f):
    return div(grad(f))


@pytest.fixture(scope="module")
def case():
    prm = bioconv.mms_parameters("stratified")
    L1, L2, L3 = prm["edges"]
    k1, k2, k3 = sp.pi / L1, sp.pi / L2, sp.pi / L3
    U, P, en, ec = sp.Rational(1, 2), sp.Rational(3, 10), sp.Rational(1, 10), sp.Rational(1, 5)
    psi = U * sp.sin(k1 * x) ** 2 * sp.sin(k2 * y) ** 2 * sp.sin(k3 * z)
    u = [sp.diff(psi, y), -sp.diff(psi, x), sp.Integer(0)]
    p = P * sp.cos(k1 * x) * sp.cos(k2 * y) * sp.cos(k3 * z)
    n_hat = en * (sp.cos(k3 * z) + sp.Rational(1, 2) * sp.cos(k1 * x) * sp.cos(k2 * y))
    c_hat = ec * sp.cos(k3 * z)

    m = re.fullmatch(r"bump\(c_star=([0-9.eE+-]+), width=([0-9.eE+-]+)\)", prm["consumption"])
    assert m, prm["consumption"]
    width = float(m.group(2))
    measure = L1 * L2 * L3
    n = prm["alpha1"] / measure + n_hat
    c = prm["alpha2"] / measure + c_hat
    # c stays inside the rising ramp (0, width) over the whole box
    t = c / width
    r = t**2 * (3 - 2 * t)

    Sc, gam, chi = prm["S_c"], prm["gamma"], prm["chi"]
    delta, beta, g = prm["delta"], prm["beta"], prm["gravity"]
    adv = lambda f: sum(u[i] * sp.diff(f, X[i]) for i in range(3))
    F = [-Sc * lap(u[i]) + adv(u[i]) + Sc * sp.diff(p, X[i]) for i in range(3)]
    F[2] += gam * Sc * g * n_hat
    f_n = -lap(n_hat) + adv(n_hat) + chi * div([n * r * gc for gc in grad(c)])
    f_c = -delta * lap(c_hat) + adv(c_hat) + beta * r * n

    fields = {"u": u, "p": p, "n_hat": n_hat, "c_hat": c_hat, "F": F, "f_n": f_n, "f_c": f_c, "r_of_c": r}
    return prm, {k: sp.lambdify(X, v, "numpy") for k, v in fields.items()}


def points(edges, count=200, seed=3):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=(count, 3)) * np.asarray(edges)


def evaluate(fn, pts):
    out = fn(pts[:, 0], pts[:, 1], pts[:, 2])
    if isinstance(out, list):
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), pts.shape[:1]) for c in out], axis=1)
    return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[:1])


@pytest.mark.parametrize("name", ["u", "p", "n_hat", "c_hat", "r_of_c", "f_n", "f_c", "F"])
def test_stratified_matches_symbolic(case, name):
    prm, fns = case
    pts = points(prm["edges"])
    got = bioconv.mms_evaluate("stratified", pts)[name]
    want = evaluate(fns[name], pts)
    scale = max(1.0, np.max(np.abs(want)))
    assert np.max(np.abs(got - want)) <= 1e-12 * scale


def test_rest_case_has_zero_sources():
    pts = points([1.0, 1.0, 1.0], count=20)
    ev = bioconv.mms_evaluate("rest", pts)
    for key in ("u", "n_hat", "c_hat", "f_n", "f_c", "F"):
        assert np.all(ev[key] == 0.0)
