"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``[criterion N] PASS/FAIL`` line; the lines are repeated
in the terminal summary.
"""

import math
import os
import subprocess
import sys
import time

import mpmath as mp
import numpy as np
import pytest

from qhlab.bounds import (
    a_alpha_theta,
    a_theta,
    check_bound,
    closed_bounds,
    get_bound,
    log_modulus,
    phi_transfer,
    sharpness_defect,
)
from qhlab.bounds.check import MARGIN
from qhlab.geometry import make_domain
from qhlab.profiler import divergence_sequence, envelope_vs_theorem, phi_envelope
from qhlab.solver import geodesic, k_distance

DISK = make_domain({"kind": "ball", "params": {"center": [0, 0], "radius": 1}})
GRID = [i / 10 for i in range(1, 10)]


def test_criterion_1_radial(criterion):
    t0 = time.perf_counter()
    num = k_distance(DISK, [0, 0], [0.5, 0], tol=1e-3, method="numeric")
    elapsed = time.perf_counter() - t0
    auto = k_distance(DISK, [0, 0], [0.5, 0], tol=1e-3)
    target = 0.6931471805599453
    ok = (abs(num.value - target) <= 1e-3 and abs(auto.value - target) <= 1e-3
          and elapsed < 30)
    criterion("criterion 1", ok, f"numeric k={num.value:.12f} auto k={auto.value:.12f} "
                                 f"({auto.method}) in {elapsed:.2f}s")


def test_criterion_2_antipodal(criterion):
    target = 2 * math.log(10 / 7)
    num = k_distance(DISK, [-0.3, 0], [0.3, 0], tol=1e-3, method="numeric")
    path = geodesic(DISK, [-0.3, 0], [0.3, 0], tol=1e-3)
    # h: mesh spacing at the path's refinement level over the disk's bounding box
    h = 2.0 / 16.0 / 2 ** path.refinement_level
    gap = float(np.min(np.linalg.norm(path.vertices, axis=1)))
    ok = abs(num.value - target) <= 1e-3 and abs(path.k_length - target) <= 1e-3 and gap <= 2 * h
    criterion("criterion 2", ok, f"k={num.value:.10f} target={target:.10f} "
                                 f"min|z| on path={gap:.3g} 2h={2 * h:.3g}")


def test_criterion_3_closed_suite(criterion):
    t0 = time.perf_counter()
    reports = [check_bound(spec, 100_000, seed=42) for spec in closed_bounds()]
    elapsed = time.perf_counter() - t0
    bad = [r.name for r in reports if r.violation_count]
    ok = not bad and MARGIN == 1e-12 and elapsed < 60 and len(reports) >= 10
    criterion("criterion 3", ok, f"{len(reports)} closed bounds, violations in {bad or 'none'}, "
                                 f"{elapsed:.1f}s")


def test_criterion_4_witnesses(criterion):
    names = ("rhoineq", "jung_appl_2", "jung_tanh_j", "chordal")
    defects = {n: sharpness_defect(get_bound(n)) for n in names}
    ok = all(d is not None and d <= 1e-12 for d in defects.values())
    criterion("criterion 4", ok, ", ".join(f"{n}={d:.2g}" for n, d in defects.items()))


def test_criterion_5_numeric_bounds(criterion):
    a = check_bound(get_bound("newlem1", s=0.9), 10_000, seed=42,
                    metric_backend="with_numeric", tol=1e-2)
    b = check_bound(get_bound("complementofB", r=1.0, R=2.0), 100, seed=42,
                    metric_backend="with_numeric", tol=1e-2)
    ok = a.violation_count == 0 and b.violation_count == 0 and a.hits > 0 and b.hits > 0
    criterion("criterion 5", ok, f"newlem1 {a.violation_count}/{a.hits} violations, "
                                 f"complementofB {b.violation_count}/{b.hits} violations")


def test_criterion_6_constants(criterion):
    mp.mp.dps = 50
    worst = 0.0
    limit = 0.0
    for th in GRID:
        t = mp.mpf(th)
        ref = 1 + 2 / t + mp.pi / (2 * mp.log((2 + 2 * t) / (2 + t)))
        worst = max(worst, abs(a_theta(th) - float(ref)))
        a = mp.mpf("0.2")
        ref2 = ((2 + t + a * t) / (t * (1 - a ** 2))
                + (1 + a) * mp.pi / (2 * (1 - a) * mp.log((2 + 2 * t) / (2 + t + a * t))))
        worst = max(worst, abs(a_alpha_theta(0.2, th) - float(ref2)))
        limit = max(limit, a_alpha_theta(1e-8, th) - a_theta(th))
    ok = worst <= 1e-12 and limit < 1e-4
    criterion("criterion 6", ok, f"max |err| vs 50 digits={worst:.2g}, "
                                 f"max a(1e-8,t)-a(t)={limit:.2g}")


def test_criterion_7_half_strip(criterion):
    rep = divergence_sequence("half_strip", 20, tol=1e-2)
    log5 = math.log(5)
    j_exact = all(r.j_exact == log5 for r in rep.rows)
    last = rep.rows[-1]
    ok = j_exact and len(rep.rows) == 20 and last.n == 20 and last.k_hat / last.j_exact > 2
    criterion("criterion 7 (half_strip)", ok,
              f"j == log 5 for n=1..20: {j_exact}; k_hat/j at n=20 = {last.k_hat / last.j_exact:.3f}")


@pytest.fixture(scope="module")
def cusp_report():
    return divergence_sequence("exp_cusp", 8, tol=1e-2)


def test_criterion_7_exp_cusp_divergence(cusp_report, criterion):
    rows = cusp_report.rows
    ok = (len(rows) == 8
          and all(r.k_lower > r.n for r in rows)
          and all(r.k_hat >= r.k_lower for r in rows if math.isfinite(r.k_hat)))
    lows = ", ".join(f"{r.k_lower:.2f}" for r in rows)
    criterion("criterion 7 (exp_cusp k > n)", ok, f"lower brackets n=1..8: {lows}")


@pytest.mark.xfail(strict=True, reason="delta(z_n) = e^-n (1 - 1/e) makes j about 1.4265")
def test_criterion_7_exp_cusp_j_is_log3(cusp_report, criterion):
    js = [r.j_exact for r in cusp_report.rows]
    criterion("criterion 7 (exp_cusp j == log 3)", all(j == math.log(3) for j in js),
              f"j values {min(js):.6f}..{max(js):.6f}, log 3 = {math.log(3):.6f}")


@pytest.mark.parametrize("name,spec", [
    ("unit square", {"kind": "rectangle", "params": {"lo": [0, 0], "hi": [1, 1]}}),
    ("unit disk", {"kind": "ball", "params": {"center": [0, 0], "radius": 1}}),
])
def test_criterion_8_convex_modulus(name, spec, criterion):
    prof = phi_envelope(make_domain(spec), 10_000, 40, seed=42, axis="ratio", tol=1e-2)
    cmp = envelope_vs_theorem(prof, lambda t: 1.05 * np.asarray(t))
    ok = prof.nonempty().any() and cmp.min_margin >= 0.0
    criterion(f"criterion 8 ({name})", ok,
              f"{int(prof.nonempty().sum())} nonempty bins, min(1.05 t - envelope)="
              f"{cmp.min_margin:.4g}, {prof.solves} solves")


def test_criterion_9_puncture(criterion):
    punctured = make_domain({"kind": "remove_points", "params": {"points": [[0, 0]]},
                             "base": {"kind": "ball", "params": {"center": [0, 0],
                                                                 "radius": 1}}})
    phi4 = phi_transfer("puncture", theta=0.5, phi1=log_modulus(2.0))
    prof = phi_envelope(punctured, 10_000, 40, seed=42, axis="ratio", tol=1e-2)
    cmp = envelope_vs_theorem(prof, phi4)
    ok = prof.nonempty().any() and cmp.passed and cmp.min_margin >= 0.0
    criterion("criterion 9", ok, f"{int(prof.nonempty().sum())} nonempty bins, "
                                 f"min(phi4 - envelope)={cmp.min_margin:.4g}")


def test_criterion_10_determinism(tmp_path, criterion):
    def run(tag, extra=(), env_workers=None):
        out = tmp_path / f"{tag}.json"
        env = dict(os.environ)
        env.pop("QHLAB_WORKERS", None)
        if env_workers is not None:
            env["QHLAB_WORKERS"] = env_workers
        subprocess.run([sys.executable, "-m", "qhlab.cli", "verify", "--seed", "42",
                        "--out", str(out), *extra], check=True, env=env)
        return out.read_bytes()

    outs = [run("a"), run("b"), run("c", ("--workers", "2")), run("d", env_workers="3")]
    ok = all(o == outs[0] for o in outs) and len(outs[0]) > 0
    criterion("criterion 10", ok, f"{len(outs)} runs, {len(outs[0])} bytes each, identical={ok}")
