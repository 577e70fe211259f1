import math

import numpy as np
import pytest

from qhlab.bounds import log_modulus, phi2_modulus, phi_transfer
from qhlab.errors import AxisMismatch, InvalidSpec
from qhlab.geometry import make_domain
from qhlab.profiler import (
    SequenceReport,
    divergence_sequence,
    envelope_vs_theorem,
    phi_envelope,
    uniformity_constant,
)

DISK = make_domain({"kind": "ball", "params": {"center": [0, 0], "radius": 1}})
TOL = 1e-2


@pytest.fixture(scope="module")
def disk_ratio():
    return phi_envelope(DISK, 300, 10, seed=1, axis="ratio", tol=TOL)


@pytest.fixture(scope="module")
def disk_j():
    return phi_envelope(DISK, 300, 10, seed=1, axis="j_value", tol=TOL)


# --- envelopes ------------------------------------------------------------------------------

def test_disk_envelope_below_two_log(disk_ratio):
    p = disk_ratio
    ne = p.nonempty()
    assert ne.any()
    bound = 2 * np.log1p(p.t_max[ne])
    assert np.all(p.envelope[ne] <= bound + TOL)


def test_envelope_structure(disk_ratio):
    p = disk_ratio
    ne = p.nonempty()
    assert p.accepted + p.rejected + p.skipped == p.samples
    assert int(p.counts.sum()) == p.accepted
    assert np.all(np.diff(p.edges) > 0)
    assert np.all(np.diff(p.rectified[ne]) >= 0)
    assert np.all(p.envelope[ne] <= p.rectified[ne])
    assert np.all(np.isnan(p.envelope[~ne]))
    assert np.all((p.t_max[ne] >= p.edges[:-1][ne]) & (p.t_max[ne] <= p.edges[1:][ne]))
    assert p.to_dict()["lower_estimate"] is True
    assert p.to_csv().splitlines()[0] == "bin_lo,bin_hi,count,sup_k,rectified_sup,t_max"


def test_axis_duality(disk_ratio, disk_j):
    # omega(t) = phi(e^t - 1): pairs with j <= t are exactly those with ratio <= e^t - 1
    for t in disk_j.edges[1:]:
        w = disk_j.step(t, inclusive=False)
        if math.isnan(w):
            continue
        assert w <= disk_ratio.step(math.expm1(t), inclusive=True) + TOL


def test_envelope_deterministic(disk_ratio):
    again = phi_envelope(DISK, 300, 10, seed=1, axis="ratio", tol=TOL, workers=2)
    assert np.array_equal(again.envelope, disk_ratio.envelope, equal_nan=True)
    assert np.array_equal(again.counts, disk_ratio.counts)


def test_envelope_errors(disk_j):
    with pytest.raises(InvalidSpec):
        phi_envelope(DISK, 0, 10)
    with pytest.raises(InvalidSpec):
        phi_envelope(DISK, 10, 0)
    with pytest.raises(AxisMismatch):
        phi_envelope(DISK, 10, 4, axis="chordal")
    with pytest.raises(AxisMismatch):
        envelope_vs_theorem(disk_j, log_modulus(2.0))


def test_comparison_skips_empty_bins():
    edges = np.array([1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e3, 1e4])
    p = phi_envelope(DISK, 100, edges=edges, seed=2, tol=TOL)
    c = envelope_vs_theorem(p, log_modulus(2.0))
    assert c.skipped_bins
    assert c.passed
    assert len(c.rows) + len(c.skipped_bins) == edges.size - 1
    assert p.predicted is not None


def test_comparison_fails_against_too_small_modulus(disk_ratio):
    c = envelope_vs_theorem(disk_ratio, log_modulus(0.5))
    assert not c.passed and c.min_margin < -TOL


# --- uniformity constant ------------------------------------------------------------------

def test_disk_uniformity_constant():
    u = uniformity_constant(DISK, 300, seed=1, tol=TOL)
    assert 1.0 <= float(u) <= 2.0 + TOL
    assert u.lower_estimate
    assert float(u) == pytest.approx(u.k_hat / u.j)


def test_uniformity_skips_coincident_pairs():
    # a single-point sampling region yields only x = y pairs, which carry no ratio
    with pytest.raises(InvalidSpec):
        uniformity_constant(DISK, 5, seed=0, region=([0.1, 0.1], [0.1, 0.1]))


def test_half_strip_constant_grows_with_region():
    G = make_domain({"kind": "half_strip", "params": {"complement": True}})
    small = uniformity_constant(G, 200, seed=1, tol=TOL, region=([-2, -2], [2, 2]))
    large = uniformity_constant(G, 200, seed=1, tol=TOL, region=([-8, -8], [8, 8]))
    assert float(large) > float(small)


# --- set removal -------------------------------------------------------------------------

def test_removal_modulus_assumption_on_ball_complement():
    # plane minus the removed ball, sampled near the ball
    C = make_domain({"kind": "complement_closed_ball", "params": {"center": [0, 0],
                                                                   "radius": 0.05}})
    p = phi_envelope(C, 150, 8, seed=3, tol=TOL, region=([-0.3, -0.3], [0.3, 0.3]))
    assert envelope_vs_theorem(p, phi2_modulus()).passed


def test_disk_minus_small_ball_below_removal_modulus():
    G = make_domain({"kind": "remove_closed_ball", "params": {"center": [0, 0], "radius": 0.05},
                     "base": {"kind": "ball", "params": {"center": [0, 0]}}})
    phi = phi_transfer("removal_set", theta=0.5, phi1=log_modulus(2.0), phi2=phi2_modulus())
    p = phi_envelope(G, 200, 8, seed=4, tol=TOL)
    c = envelope_vs_theorem(p, phi)
    assert c.passed and c.min_margin > 0


# --- divergence sequences -------------------------------------------------------------------

def test_half_strip_sequence():
    rep = divergence_sequence("half_strip", 3)
    assert isinstance(rep, SequenceReport)
    assert [r.n for r in rep.rows] == [1, 2, 3]
    for r in rep.rows:
        assert r.j_exact == pytest.approx(math.log(5), abs=4 * math.ulp(math.log(5)))
        assert r.j_matches
        assert r.k_hat >= r.k_lower - 1e-12
        assert r.k_lower >= r.paper_lower_bound
        assert r.bracket_ok
    assert rep.rows[-1].k_hat > rep.rows[0].k_hat
    header = rep.to_csv().splitlines()[0].split(",")
    assert header == list(SequenceReport.COLUMNS)


def test_exp_cusp_lower_bracket_exceeds_n():
    rep = divergence_sequence("exp_cusp", 2)
    for r in rep.rows:
        assert r.k_lower > r.n
        assert r.k_lower >= r.paper_lower_bound
        assert r.k_hat >= r.k_lower - 1e-12
        # the vertical gap to the cusp is e^-n (1 - 1/e) and delta(z_n) is at most that
        assert r.j_exact >= math.log1p(2 / (1 - math.exp(-1))) - 1e-12
        assert not r.j_matches


def test_sequence_errors():
    with pytest.raises(InvalidSpec):
        divergence_sequence("half_strip", 1)
    with pytest.raises(InvalidSpec):
        divergence_sequence("spiral", 4)
