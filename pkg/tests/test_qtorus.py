import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenmod import (EUCLIDEAN, RNorm, TorusElement, beta_act, cocycle,
                       deserialize, fejer_truncate, gns_matrix, involution,
                       l_seminorm, monomial, serialize, torus_norm,
                       twisted_product, unit)

from conftest import random_torus_element

THETA = 1.0 / math.sqrt(2.0)


# -- cocycle -------------------------------------------------------------------

def test_cocycle_identity_random_triples():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        g1, g2, g3 = (tuple(rng.integers(-20, 21, size=2)) for _ in range(3))
        lhs = cocycle(THETA, g1, g2) * cocycle(THETA, (g1[0] + g2[0], g1[1] + g2[1]), g3)
        rhs = cocycle(THETA, g2, g3) * cocycle(THETA, g1, (g2[0] + g3[0], g2[1] + g3[1]))
        worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-12


def test_cocycle_examples():
    assert cocycle(0.3, (1, 0), (1, 0)) == pytest.approx(1.0)
    assert cocycle(0.5, (1, 0), (0, 1)) == pytest.approx(-1j)
    assert cocycle(0.0, (3, -2), (5, 7)) == pytest.approx(1.0)
    assert abs(abs(cocycle(THETA, (4, -1), (2, 9))) - 1.0) < 1e-14


# -- product and involution ----------------------------------------------------

def test_product_associativity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b, c = (random_torus_element(rng, THETA) for _ in range(3))
        lhs = twisted_product(twisted_product(a, b), c)
        rhs = twisted_product(a, twisted_product(b, c))
        assert (lhs - rhs).l1_norm() < 1e-12 * max(1.0, rhs.l1_norm())


def test_unit_element():
    rng = np.random.default_rng(6)
    a = random_torus_element(rng, THETA)
    e = unit(THETA)
    assert (twisted_product(e, a) - a).l1_norm() == 0.0
    assert (twisted_product(a, e) - a).l1_norm() == 0.0


def test_single_term_product_phase():
    u = monomial(THETA, 1, 0)
    v = monomial(THETA, 0, 1)
    uv = twisted_product(u, v)
    assert uv.coeffs[(1, 1)] == pytest.approx(np.exp(-1j * math.pi * THETA))


def test_commutation_relation():
    u = monomial(THETA, 1, 0)
    v = monomial(THETA, 0, 1)
    vu = twisted_product(v, u)
    uv = twisted_product(u, v)
    # V*U picks up the full 2 pi theta phase against U*V
    diff = (vu - uv * np.exp(2j * math.pi * THETA)).l1_norm()
    assert diff < 1e-14


def test_involution_properties():
    rng = np.random.default_rng(7)
    a = random_torus_element(rng, THETA)
    b = random_torus_element(rng, THETA)
    assert (involution(involution(a)) - a).l1_norm() < 1e-14
    lhs = involution(twisted_product(a, b))
    rhs = twisted_product(involution(b), involution(a))
    assert (lhs - rhs).l1_norm() < 1e-12
    assert involution(a).l1_norm() == pytest.approx(a.l1_norm())
    u = monomial(THETA, 1, 0)
    assert (twisted_product(involution(u), u) - unit(THETA)).l1_norm() < 1e-14


def test_l1_submultiplicative():
    rng = np.random.default_rng(8)
    for _ in range(10):
        a, b = random_torus_element(rng, THETA), random_torus_element(rng, THETA)
        assert twisted_product(a, b).l1_norm() <= a.l1_norm() * b.l1_norm() + 1e-12


# -- GNS truncation and norms --------------------------------------------------

def test_gns_unit_is_identity():
    M = gns_matrix(unit(THETA), 3)
    assert np.allclose(M, np.eye(49))


def test_gns_adjoint_compatibility():
    rng = np.random.default_rng(9)
    a = random_torus_element(rng, THETA)
    M = gns_matrix(a, 6)
    N = gns_matrix(involution(a), 6)
    # interior entries only: columns whose lattice point keeps support inside
    side = 13
    D = np.abs(N - M.conj().T).reshape(side, side, side, side)
    interior = slice(3, side - 3)
    assert D[interior, interior, interior, interior].max() < 1e-13


def test_gns_product_compatibility_interior():
    rng = np.random.default_rng(10)
    a = random_torus_element(rng, THETA, radius=1)
    b = random_torus_element(rng, THETA, radius=1)
    R = 6
    side = 2 * R + 1
    M = gns_matrix(twisted_product(a, b), R) - gns_matrix(a, R) @ gns_matrix(b, R)
    D = np.abs(M).reshape(side, side, side, side)
    interior = slice(3, side - 3)
    assert D[:, :, interior, interior].max() < 1e-12


def test_selfadjoint_shift_singular_value_oracle():
    # largest singular value of the truncation of U + U* on box R is the
    # path-graph eigenvalue 2 cos(pi / (2R + 2))
    a = monomial(THETA, 1, 0) + monomial(THETA, -1, 0)
    for R in (4, 8, 12):
        M = gns_matrix(a, R)
        top = np.linalg.norm(M, 2)
        assert top == pytest.approx(2.0 * math.cos(math.pi / (2 * R + 2)), abs=1e-10)


def test_torus_norm_unit_and_unitary():
    iv = torus_norm(unit(THETA), box_radius=4)
    assert iv.lower == pytest.approx(1.0, abs=1e-9)
    assert iv.upper == pytest.approx(1.0)
    iv = torus_norm(monomial(THETA, 1, 0), box_radius=4)
    assert iv.upper == pytest.approx(1.0)
    assert iv.lower == pytest.approx(1.0, abs=1e-9)


def test_torus_norm_enclosure_and_monotone():
    a = monomial(THETA, 1, 0) + monomial(THETA, -1, 0)
    prev = 0.0
    for R in (4, 8, 16):
        iv = torus_norm(a, box_radius=R, max_refinements=0)
        assert iv.lower <= iv.upper + 1e-15
        assert iv.lower >= prev - 1e-12
        prev = iv.lower
    assert iv.upper == pytest.approx(2.0)
    assert iv.lower > 1.97


def test_torus_norm_refinement_history():
    a = monomial(THETA, 1, 0) + monomial(THETA, -1, 0)
    iv = torus_norm(a, box_radius=4, max_refinements=2, refine_tol=1e-12)
    radii = [r for r, _ in iv.refinement]
    assert radii == sorted(radii)
    lows = [v for _, v in iv.refinement]
    assert all(b >= a - 1e-12 for a, b in zip(lows, lows[1:]))


# -- beta action and Fejér truncation ------------------------------------------

def test_beta_act_basics():
    rng = np.random.default_rng(12)
    a = random_torus_element(rng, THETA)
    assert (beta_act(a, 0.0, 0.0) - a).l1_norm() == 0.0
    assert beta_act(a, 1.3, -0.4).l1_norm() == pytest.approx(a.l1_norm())
    u = monomial(THETA, 1, 0)
    assert (beta_act(u, math.pi, 0.0) + u).l1_norm() < 1e-14


def test_beta_act_homomorphism():
    rng = np.random.default_rng(13)
    a, b = random_torus_element(rng, THETA), random_torus_element(rng, THETA)
    lhs = beta_act(twisted_product(a, b), 0.7, -1.1)
    rhs = twisted_product(beta_act(a, 0.7, -1.1), beta_act(b, 0.7, -1.1))
    assert (lhs - rhs).l1_norm() < 1e-12


def test_fejer_examples():
    e = unit(THETA)
    assert (fejer_truncate(e, 5) - e).l1_norm() == 0.0
    u = monomial(THETA, 1, 0)
    assert fejer_truncate(u, 1).l1_norm() == 0.0
    assert (fejer_truncate(u, 4) - u * 0.75).l1_norm() < 1e-15


def test_fejer_support_and_contraction():
    rng = np.random.default_rng(14)
    a = random_torus_element(rng, THETA, radius=6, n_coeffs=12)
    for N in (2, 4):
        t = fejer_truncate(a, N)
        assert all(abs(n) < N and abs(m) < N for (n, m) in t.coeffs)
        assert t.l1_norm() <= a.l1_norm() + 1e-14


def test_fejer_lipschitz_bound():
    # ||a - fejer(a)|| <= C(N) L(a) with C(N) the per-monomial constant
    rng = np.random.default_rng(15)
    a = random_torus_element(rng, THETA, radius=5, n_coeffs=8)
    a = a + involution(a)
    for N in (4, 8):
        resid = a - fejer_truncate(a, N)
        cn = 0.0
        for (n, m) in a.coeffs:
            if (n, m) == (0, 0):
                continue
            wn = max(0.0, 1.0 - abs(n) / N) * max(0.0, 1.0 - abs(m) / N)
            cn = max(cn, (1.0 - wn) / math.hypot(n, m))
        lhs = torus_norm(resid, box_radius=8).upper
        rhs = cn * l_seminorm(a, box_radius=8).upper
        assert lhs <= rhs + 1e-10


# -- L-seminorm ----------------------------------------------------------------

def test_l_seminorm_unit_vanishes():
    iv = l_seminorm(unit(THETA), box_radius=4)
    assert iv.lower == 0.0
    assert iv.upper == 0.0


def test_l_seminorm_brackets_one_frequency_oracle():
    a = (monomial(THETA, 1, 0) + monomial(THETA, -1, 0)) * 0.5
    iv = l_seminorm(a, box_radius=8, direction_samples=64)
    assert iv.lower <= 1.0 + 1e-9
    assert iv.upper >= 1.0 - 1e-9


def test_l_seminorm_homogeneity():
    rng = np.random.default_rng(16)
    a = random_torus_element(rng, THETA)
    iv1 = l_seminorm(a, box_radius=6)
    iv3 = l_seminorm(a * 3.0, box_radius=6)
    assert iv3.lower == pytest.approx(3.0 * iv1.lower, rel=1e-9)
    assert iv3.upper == pytest.approx(3.0 * iv1.upper, rel=1e-9)


def test_rnorm_variants():
    for kind in ("euclidean", "l1", "linf"):
        nrm = RNorm(kind)
        assert nrm(0.0, 0.0) == 0.0
        pts = nrm.sphere(16)
        assert all(abs(nrm(x, y) - 1.0) < 1e-12 for x, y in pts)
    assert EUCLIDEAN(3.0, 4.0) == pytest.approx(5.0)
    assert RNorm("l1")(3.0, 4.0) == pytest.approx(7.0)
    assert RNorm("linf")(3.0, 4.0) == pytest.approx(4.0)


# -- serialization -------------------------------------------------------------

coeff_strategy = st.dictionaries(
    st.tuples(st.integers(-30, 30), st.integers(-30, 30)),
    st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6),
    min_size=0, max_size=12)


@given(coeffs=coeff_strategy)
@settings(max_examples=60, deadline=None)
def test_serialize_roundtrip(coeffs):
    a = TorusElement(THETA, coeffs)
    b = deserialize(serialize(a))
    assert b.theta == a.theta
    assert set(b.coeffs) == set(a.coeffs)
    for g, c in a.coeffs.items():
        assert b.coeffs[g] == c


def test_serialize_deterministic():
    rng = np.random.default_rng(17)
    a = random_torus_element(rng, THETA, n_coeffs=8)
    assert serialize(a) == serialize(a)
    # order of insertion must not matter
    items = list(a.coeffs.items())
    b = TorusElement(THETA, dict(reversed(items)))
    assert serialize(a) == serialize(b)


def test_theta_mismatch_rejected():
    a = monomial(0.3, 1, 0)
    b = monomial(0.4, 0, 1)
    with pytest.raises(ValueError):
        twisted_product(a, b)
