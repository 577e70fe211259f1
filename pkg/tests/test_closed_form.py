import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qhlab.closed_form import (
    chordal,
    chordal_batch,
    inversion_map,
    j_batch,
    j_metric,
    k_halfspace,
    k_radial_ball,
    k_segment_to_boundary,
    modulus_bounds,
    rho_ball,
    rho_ball_batch,
    rho_halfspace_batch,
)
from qhlab.errors import (
    CenterSingularity,
    NotOnNearestBoundarySegment,
    NotRadialConfiguration,
    OutOfRange,
    PointOutsideDomain,
)
from qhlab.geometry import make_domain

mp.mp.dps = 50

DISK = make_domain({"kind": "ball", "params": {"center": [0, 0], "radius": 1}})
# grid coordinates keep squared distances clear of float underflow
coord = st.integers(-7000, 7000).map(lambda i: i / 10_000)
point = st.tuples(coord, coord)


def _disk_pairs(count, seed):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random((2, count)))
    a = 2 * np.pi * rng.random((2, count))
    X = np.column_stack([r[0] * np.cos(a[0]), r[0] * np.sin(a[0])]) * 0.999
    Y = np.column_stack([r[1] * np.cos(a[1]), r[1] * np.sin(a[1])]) * 0.999
    return X, Y


# --- j -----------------------------------------------------------------------------

def test_j_half_strip_sequence_is_log5():
    G = make_domain({"kind": "half_strip", "params": {"complement": True}})
    for n in range(1, 21):
        assert j_metric(G, [n, -2], [n, 2]).value == pytest.approx(math.log(5), abs=1e-15)


def test_j_identity_and_outside():
    assert j_metric(DISK, [0.2, 0.1], [0.2, 0.1]).value == 0.0
    with pytest.raises(PointOutsideDomain):
        j_metric(DISK, [0.2, 0.1], [1.2, 0.1])


# --- hyperbolic metrics --------------------------------------------------------------------

def test_rho_ball_reference_value():
    # 50-digit evaluation of 2 arsinh(|x-y|/t), t = sqrt((1-|x|^2)(1-|y|^2))
    ref = 2 * mp.asinh(mp.mpf(1) / mp.mpf("0.75"))
    assert rho_ball([0.5, 0], [-0.5, 0]).value == pytest.approx(float(ref), abs=1e-14)
    assert float(ref) == pytest.approx(2.1972245773362196, abs=1e-15)
    assert rho_ball([0.3, 0.1], [0.3, 0.1]).value == 0.0


def test_rho_ball_tanh_identity():
    X, Y = _disk_pairs(10_000, 1)
    rho = rho_ball_batch(X, Y)
    d2 = np.sum((X - Y) ** 2, axis=1)
    t2 = (1 - np.sum(X * X, axis=1)) * (1 - np.sum(Y * Y, axis=1))
    assert np.allclose(np.tanh(rho / 2) ** 2, d2 / (d2 + t2), rtol=1e-12, atol=1e-15)


def test_rho_ball_symmetric():
    X, Y = _disk_pairs(10_000, 2)
    assert np.array_equal(rho_ball_batch(X, Y), rho_ball_batch(Y, X))


def test_rho_ball_outside():
    with pytest.raises(PointOutsideDomain):
        rho_ball([1.0, 0], [0, 0])


def test_k_halfspace_vertical():
    assert k_halfspace([0, 0, 1], [0, 0, math.e]).value == pytest.approx(1.0, abs=1e-15)
    assert k_halfspace([0.3, 2.0], [0.3, 2.0]).value == 0.0
    with pytest.raises(PointOutsideDomain):
        k_halfspace([0, 1], [0, -1])


def test_k_halfspace_matches_cosh_form():
    x, y = [0.0, 1.0], [1.0, 1.0]
    ref = mp.acosh(1 + mp.mpf(1) / 2)
    assert k_halfspace(x, y).value == pytest.approx(float(ref), abs=1e-15)


# --- chordal -------------------------------------------------------------------------

def test_chordal_examples():
    assert chordal([0.3, 0.4], [0.3, 0.4]).value == 0.0
    assert chordal([1, 0], [-1, 0]).value == pytest.approx(1.0, abs=1e-15)
    assert chordal(math.inf, [0, 0]).value == 1.0
    assert chordal(math.inf, math.inf).value == 0.0


def test_chordal_sharp_bound():
    rng = np.random.default_rng(3)
    X = rng.uniform(-2, 2, (100_000, 2))
    Y = rng.uniform(-2, 2, (100_000, 2))
    d = np.linalg.norm(X - Y, axis=1)
    keep = d < 2
    q = chordal_batch(X[keep], Y[keep])
    bound = d[keep] / (1 + (d[keep] / 2) ** 2)
    assert np.all(q <= bound * (1 + 1e-12))
    # equality at y = -x
    x = X[:100]
    assert np.allclose(chordal_batch(x, -x),
                       2 * np.linalg.norm(x, axis=1) / (1 + np.sum(x * x, axis=1)), rtol=1e-14)


# --- radial and segment forms ------------------------------------------------------------

def test_k_radial_ball_examples():
    assert k_radial_ball([0, 0], [0.5, 0]).value == pytest.approx(math.log(2), abs=1e-15)
    assert k_radial_ball([0.3, 0], [-0.3, 0]).value == pytest.approx(2 * math.log(1 / 0.7),
                                                                     abs=1e-15)
    assert k_radial_ball([0.2, 0], [0.6, 0]).value == pytest.approx(math.log(2), abs=1e-15)
    with pytest.raises(NotRadialConfiguration):
        k_radial_ball([0.2, 0], [0, 0.6])


def test_k_segment_to_boundary_examples():
    sq = make_domain({"kind": "rectangle", "params": {"lo": [0, 0], "hi": [1, 1]}})
    v = k_segment_to_boundary(sq, [0.5, 0.5], [0.5, 0.3], [0.5, 0.1]).value
    assert v == pytest.approx(math.log(3), abs=1e-14)
    assert k_segment_to_boundary(sq, [0.5, 0.5], [0.5, 0.3], [0.5, 0.3]).value == 0.0
    with pytest.raises(NotOnNearestBoundarySegment):
        k_segment_to_boundary(sq, [0.5, 0.5], [0.4, 0.3], [0.6, 0.1])


# --- inversion ---------------------------------------------------------------------------

def test_inversion_examples():
    assert np.allclose(inversion_map([0, 0], 1.0, [2, 0]), [0.5, 0])
    with pytest.raises(CenterSingularity):
        inversion_map([1, 1], 1.0, [1, 1])
    with pytest.raises(OutOfRange):
        inversion_map([0, 0], 0.0, [1, 1])


def test_inversion_involution_and_distance_identity():
    rng = np.random.default_rng(4)
    a = np.array([0.3, -0.2, 0.5])
    r = 1.7
    X = rng.normal(size=(10_000, 3)) * 2
    Y = rng.normal(size=(10_000, 3)) * 2
    hX, hY = inversion_map(a, r, X), inversion_map(a, r, Y)
    assert np.allclose(inversion_map(a, r, hX), X, rtol=0, atol=1e-12 * np.max(np.abs(X)))
    lhs = np.linalg.norm(hX - hY, axis=1)
    rhs = r * r * np.linalg.norm(X - Y, axis=1) / (np.linalg.norm(X - a, axis=1)
                                                    * np.linalg.norm(Y - a, axis=1))
    assert np.allclose(lhs, rhs, rtol=1e-10)


# --- modulus bound functions -----------------------------------------------------------

def test_modulus_bounds_examples():
    assert modulus_bounds("euclid_from_k", 0.0, 3.0) == 0.0
    assert modulus_bounds("chordal_from_euclid", 2 - 1e-9) == pytest.approx(1.0, abs=1e-9)
    assert modulus_bounds("euclid_from_j", 2 * math.atanh(0.5), 1.0) == pytest.approx(1.0,
                                                                                     abs=1e-15)
    with pytest.raises(OutOfRange):
        modulus_bounds("chordal_from_euclid", 2.0)
    with pytest.raises(OutOfRange):
        modulus_bounds("euclid_from_k", -1.0)


# --- sandwich relations -----------------------------------------------------------------

def test_j_rho_sandwich_in_disk():
    X, Y = _disk_pairs(100_000, 5)
    j = j_batch(DISK, X, Y)
    rho = rho_ball_batch(X, Y)
    assert np.all(j <= rho * (1 + 1e-12))
    assert np.all(rho <= 2 * j * (1 + 1e-12))
    x = X[:1000]
    assert np.allclose(rho_ball_batch(x, -x), 2 * j_batch(DISK, x, -x), rtol=1e-12)


def test_rho_lemma_forms():
    X, Y = _disk_pairs(100_000, 6)
    rho = rho_ball_batch(X, Y)
    d = np.linalg.norm(X - Y, axis=1)
    assert np.all(d <= 2 * np.tanh(rho / 4) * (1 + 1e-12))
    x = X[:1000]
    assert np.allclose(np.linalg.norm(2 * x, axis=1),
                       2 * np.tanh(rho_ball_batch(x, -x) / 4), rtol=1e-12)


def test_j_not_additive_along_diameter():
    rng = np.random.default_rng(7)
    r = rng.uniform(1e-3, 0.999, 1000)
    ang = rng.uniform(0, 2 * np.pi, 1000)
    x = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    zero = np.zeros_like(x)
    assert np.all(j_batch(DISK, -x, x) < j_batch(DISK, -x, zero) + j_batch(DISK, zero, x))


# --- metric axioms ---------------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(point, point, point)
def test_metric_axioms_in_disk(x, y, z):
    X, Y, Z = (np.array([p]) for p in (x, y, z))
    for f in (lambda a, b: j_batch(DISK, a, b), rho_ball_batch, chordal_batch):
        xy, yz, xz = f(X, Y)[0], f(Y, Z)[0], f(X, Z)[0]
        assert xy == f(Y, X)[0]
        assert xz <= xy + yz + 1e-12
        assert xy >= 0
        assert (xy == 0) == (x == y)


@settings(max_examples=300, deadline=None)
@given(st.tuples(st.floats(-5, 5), st.floats(0.01, 5)),
       st.tuples(st.floats(-5, 5), st.floats(0.01, 5)),
       st.tuples(st.floats(-5, 5), st.floats(0.01, 5)))
def test_halfspace_metric_axioms(x, y, z):
    X, Y, Z = (np.array([p]) for p in (x, y, z))
    xy, yz, xz = (rho_halfspace_batch(a, b)[0] for a, b in ((X, Y), (Y, Z), (X, Z)))
    assert xy == rho_halfspace_batch(Y, X)[0]
    assert xz <= xy + yz + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_radial_forms_agree_with_integral(r, s):
    assume(abs(r - s) > 1e-9)
    # quasihyperbolic length of the radius [r e1, s e1] is |log((1-r)/(1-s))|
    ref = abs(mp.log((1 - mp.mpf(r)) / (1 - mp.mpf(s))))
    assert k_radial_ball([r, 0], [s, 0]).value == pytest.approx(float(ref), rel=1e-12, abs=1e-15)
