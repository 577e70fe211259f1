import dataclasses
import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhlab.bounds import (
    TRANSFER_KINDS,
    Part,
    a_alpha_theta,
    a_theta,
    catalog,
    check_bound,
    closed_bounds,
    get_bound,
    jung_radius,
    linear,
    log_modulus,
    phi2_modulus,
    phi_transfer,
    sharpness_defect,
)
from qhlab.errors import InvalidSpec, NoHypothesisHits, OutOfRange

mp.mp.dps = 50
GRID = [i / 10 for i in range(1, 10)]


def mp_a_theta(t):
    t = mp.mpf(t)
    return 1 + 2 / t + mp.pi / (2 * mp.log((2 + 2 * t) / (2 + t)))


def mp_a_alpha_theta(a, t):
    a, t = mp.mpf(a), mp.mpf(t)
    return ((2 + t + a * t) / (t * (1 - a ** 2))
            + (1 + a) * mp.pi / (2 * (1 - a) * mp.log((2 + 2 * t) / (2 + t + a * t))))


# --- constants ------------------------------------------------------------------------

@pytest.mark.parametrize("theta", GRID)
def test_a_theta_matches_reference(theta):
    assert a_theta(theta) == pytest.approx(float(mp_a_theta(theta)), abs=1e-12)


@pytest.mark.parametrize("theta", GRID)
def test_a_alpha_theta_matches_reference(theta):
    for alpha in (0.1, 0.2, 0.5):
        ref = float(mp_a_alpha_theta(alpha, theta))
        assert a_alpha_theta(alpha, theta) == pytest.approx(ref, rel=1e-13, abs=1e-12)
    assert abs(a_alpha_theta(1e-8, theta) - a_theta(theta)) < 1e-4


def test_constant_examples():
    assert a_theta(0.5) == pytest.approx(5 + math.pi / (2 * math.log(1.2)), abs=1e-12)
    assert a_theta(0.5) == pytest.approx(13.6155, abs=1e-4)
    assert a_theta(1 - 1e-12) == pytest.approx(3 + math.pi / (2 * math.log(4 / 3)), abs=1e-9)
    assert a_alpha_theta(0.2, 0.25) == pytest.approx(float(mp_a_alpha_theta("0.2", "0.25")),
                                                     abs=1e-12)
    for bad in (0.0, -0.1, 1.0, math.nan):
        with pytest.raises(OutOfRange):
            a_theta(bad)
    with pytest.raises(OutOfRange):
        a_alpha_theta(1.0, 0.5)


def test_jung_radius():
    assert jung_radius(2, 1.0) == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert jung_radius(3, 2.0) == pytest.approx(2 * math.sqrt(3 / 8), abs=1e-15)
    factors = [jung_radius(n, 1.0) for n in range(2, 101)]
    assert all(b > a for a, b in zip(factors, factors[1:]))
    assert factors[-1] < 1 / math.sqrt(2)
    for n, d in ((1, 1.0), (2, 0.0), (2, -1.0), (2.5, 1.0), (2, math.inf)):
        with pytest.raises(OutOfRange):
            jung_radius(n, d)


# --- modulus transfer ---------------------------------------------------------------------

TRANSFERS = {
    "bilipschitz": dict(L=1.5, phi=linear()),
    "inversion": dict(m=0.5, M=2.0, phi=log_modulus(2.0)),
    "puncture": dict(theta=0.5, phi1=log_modulus(2.0)),
    "multi_puncture": dict(m=3, theta=0.5, phi0=log_modulus(2.0)),
    "uniform_removal": dict(m=2, theta=0.5, c=2.0),
    "removal_set": dict(theta=0.5, phi1=log_modulus(2.0), phi2=phi2_modulus()),
    "phi_to_omega": dict(phi=linear()),
}


def test_transfer_table_complete():
    assert set(TRANSFERS) == set(TRANSFER_KINDS)


@pytest.mark.parametrize("kind", sorted(TRANSFERS))
def test_transfer_increasing_and_vanishing(kind):
    phi = phi_transfer(kind, **TRANSFERS[kind])
    t = np.concatenate([[0.0], np.geomspace(1e-4, 20.0, 99)])
    v = phi(t)
    assert v[0] == 0.0
    assert np.all(np.diff(v) > 0)


def test_transfer_examples():
    ident = phi_transfer("bilipschitz", L=1.0, phi=linear())
    t = np.linspace(0, 10, 11)
    assert np.array_equal(ident(t), t)
    phi4 = phi_transfer("puncture", theta=0.5, phi1=log_modulus(2.0))
    a = mp_a_theta("0.25")
    ref = 2 * max(mp.pi / mp.log(3) * mp.log(4), a * 2 * mp.log(4))
    assert float(phi4(1.0)) == pytest.approx(float(ref), rel=1e-13)
    assert float(phi4(1.0)) == pytest.approx(132.5784, abs=1e-4)
    ur = phi_transfer("uniform_removal", m=1, theta=0.5, c=2.0)
    assert ur.constant == pytest.approx(6 * a_theta(0.25) * 2, rel=1e-15)
    omega = phi_transfer("phi_to_omega", phi=log_modulus(1.0))
    assert np.allclose(omega(t), t, rtol=1e-12)


def test_transfer_errors():
    with pytest.raises(OutOfRange):
        phi_transfer("bilipschitz", L=0.5, phi=linear())
    with pytest.raises(OutOfRange):
        phi_transfer("inversion", m=2.0, M=1.0, phi=linear())
    with pytest.raises(OutOfRange):
        phi_transfer("puncture", theta=1.0, phi1=linear())
    with pytest.raises(OutOfRange):
        phi_transfer("puncture", theta=0.5)
    with pytest.raises(OutOfRange):
        phi_transfer("bilipschitz", L=2.0, phi=lambda t: 1.0 - np.asarray(t))
    with pytest.raises(OutOfRange):
        phi_transfer("uniform_removal", m=0, theta=0.5, c=2.0)
    with pytest.raises(OutOfRange):
        phi_transfer("teleport")


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 5.0), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
def test_bilipschitz_transfer_monotone(L, s, t):
    phi = phi_transfer("bilipschitz", L=L, phi=log_modulus(3.0))
    lo, hi = sorted((s, t))
    assert float(phi(lo)) <= float(phi(hi))
    assert float(phi(hi)) >= float(log_modulus(3.0)(hi)) - 1e-12


# --- catalog ------------------------------------------------------------------------------

def test_catalog_size_and_names():
    names = [b.name for b in catalog()]
    assert len(names) >= 14
    assert len(set(names)) == len(names)
    for b in catalog():
        assert b.backend in ("closed", "numeric")
        assert b.citation and b.sampling


def test_get_bound_errors():
    with pytest.raises(InvalidSpec):
        get_bound("no_such_bound")
    with pytest.raises(InvalidSpec):
        get_bound("newlem1", colour=3)
    assert get_bound("newlem1", s=0.5).params["s"] == 0.5


@pytest.mark.parametrize("spec", [b for b in closed_bounds() if b.witness is not None],
                         ids=lambda b: b.name)
def test_sharpness_witnesses(spec):
    assert sharpness_defect(spec) <= 1e-12


def test_bernoulli_equality_at_one():
    t = np.geomspace(1e-6, 1e3, 50)
    assert np.array_equal(np.log1p(1.0 * t), 1.0 * np.log1p(t))


@pytest.mark.parametrize("spec", closed_bounds(), ids=lambda b: b.name)
def test_closed_bounds_hold(spec):
    r = check_bound(spec, 10_000, seed=7)
    assert r.passed, r.violations[:3]
    assert r.hits > 0


# --- checker mechanics ------------------------------------------------------------------

def test_checker_detects_false_bound():
    base = get_bound("rho_j_sandwich")

    def wrong(cfg, params, metrics):
        return [Part("2 j <= rho", 2 * p.lhs, p.rhs) for p in base.assertion(cfg, params, metrics)
                if p.label.startswith("j")]

    spec = dataclasses.replace(base, assertion=wrong)
    r = check_bound(spec, 2000, seed=1)
    assert not r.passed and r.violation_count > 0
    assert r.violations


def test_check_bound_deterministic_across_workers():
    a = check_bound("rho_j_sandwich", 10_000, seed=42)
    b = check_bound("rho_j_sandwich", 10_000, seed=42, workers=2)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    c = check_bound("rho_j_sandwich", 10_000, seed=43)
    assert c.min_margin != a.min_margin


def test_check_bound_errors():
    with pytest.raises(InvalidSpec):
        check_bound("rho_j_sandwich", 0)
    with pytest.raises(InvalidSpec):
        check_bound("newlem1", 10)
    with pytest.raises(InvalidSpec):
        check_bound("rho_j_sandwich", 10, metric_backend="oracle")
    never = dataclasses.replace(get_bound("bernoulli"),
                                hypothesis=lambda cfg, p: np.zeros(len(cfg["a"]), bool))
    with pytest.raises(NoHypothesisHits):
        check_bound(never, 100)


def test_report_serializes():
    d = check_bound("chordal", 1000, seed=3).to_dict()
    for key in ("name", "citation", "samples", "hits", "violations", "max_sharpness_defect"):
        assert key in d
    json.dumps(d)


def test_numeric_bound_small():
    r = check_bound(get_bound("newlem1", s=0.9), 200, seed=5, metric_backend="with_numeric",
                    tol=1e-2)
    assert r.passed
