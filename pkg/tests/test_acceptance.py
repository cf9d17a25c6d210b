"""Acceptance gate: one PASS/FAIL line per criterion, printed to the terminal."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from helpers import NE_MODES, expm_trajectory, generic_labels, kron_lyapunov, random_hurwitz, random_plant
from sparsewac.cases import bundled_network_path, two_area_four_machine
from sparsewac.grid_model import LinearPlant, build_cost_average, build_cost_two_area, linearize_swing
from sparsewac.loop_analysis import (
    SimScenario,
    default_frequency_grid,
    delay_margin_single_channel,
    disk_margins,
    mode_report,
    pade_block,
    simulate,
)
from sparsewac.matrix_equations import solve_care, solve_lyapunov, spectrum
from sparsewac.sparse_h2 import AdmmOptions, admm_solve, gamma_sweep, h2_cost, h2_gradient, shrink

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail, elapsed, budget):
        ok = ok and elapsed < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.2f} s, budget {budget:g} s)")
        return ok
    return emit


def test_inter_area_mode_fixture(report):
    t0 = time.perf_counter()
    worst = 0.0
    for lam, zeta, f in NE_MODES:
        A = np.array([[lam.real, lam.imag], [-lam.imag, lam.real]])
        (m,) = mode_report(A).modes
        worst = max(worst, abs(m.damping - zeta) / zeta, abs(m.frequency - f) / f)
    el = time.perf_counter() - t0
    ok = report("Inter-area mode fixture", worst <= 5e-5,
                f"10 values, max relative error {worst:.3g} (5 significant digits: <= 5e-5)", el, 1)
    assert ok


def test_lqr_margin_guarantee(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2016)
    worst_pm, worst_gr = math.inf, 0.0
    for _ in range(25):
        pl, cs = random_plant(rng)
        _, K = solve_care(pl.A, pl.B2, cs.Q, cs.R)
        rep = disk_margins(pl, K)
        worst_pm = min(worst_pm, rep.phase_margin)
        worst_gr = max(worst_gr, rep.gain_reduction)
    el = time.perf_counter() - t0
    ok = report("LQR margin guarantee", worst_pm >= 59.5 and worst_gr <= 0.505,
                f"25 systems, min phase margin {worst_pm:.4f} deg, max gain reduction {worst_gr:.5f}",
                el, 30)
    assert ok


def test_admm_recovers_lqr(report):
    """Gamma = 0 on 10 plants, in two settings.

    (a) default options started at the Riccati gain: the solver must stay there;
    (b) started at the Riccati gain for 2R with rho = 1 and tolerances 1e-7: the
        solver must travel back to the optimum.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_k = worst_j = 0.0
    all_conv = True
    for _ in range(10):
        pl, cs = random_plant(rng, full_noise=True)
        K0 = solve_care(pl.A, pl.B2, cs.Q, cs.R)[1]
        J0 = h2_cost(pl, cs, K0)
        K_far = solve_care(pl.A, pl.B2, cs.Q, 2 * cs.R)[1]
        runs = [(K0, AdmmOptions()),
                (K_far, AdmmOptions(rho=1.0, primal_tol=1e-7, dual_tol=1e-7, max_iters=20000))]
        for K_init, opts in runs:
            gain, diag = admm_solve(pl, cs, 0.0, K_init=K_init, opts=opts)
            all_conv &= diag.converged
            worst_k = max(worst_k, np.linalg.norm(gain.K - K0) / np.linalg.norm(K0))
            worst_j = max(worst_j, abs(h2_cost(pl, cs, gain.K) - J0) / J0)
    el = time.perf_counter() - t0
    ok = report("ADMM recovers LQR", worst_k <= 1e-4 and worst_j <= 1e-6 and all_conv,
                f"10 plants x 2 starts, max rel gain error {worst_k:.3g}, max rel J error {worst_j:.3g}, "
                f"all converged {all_conv}", el, 120)
    assert ok


def test_sweep_monotonicity(report):
    t0 = time.perf_counter()
    net, act, _ = two_area_four_machine()
    pl = linearize_swing(net, act)
    cs = build_cost_average(pl, 2.0, 2.0, 0.1)
    res = gamma_sweep(pl, cs, np.logspace(-4, 0, 15))
    J = np.concatenate([[res.J0], res.costs])
    viol = max(0.0, float(np.max((J[:-1] - J[1:]) / J[:-1])))
    card0 = int(np.count_nonzero(np.abs(res.K0) > 1e-8))
    hurwitz = all(spectrum(pl.A - pl.B2 @ r.gain.K).is_hurwitz for r in res.records)
    all_ok = all(r.ok for r in res.records)
    el = time.perf_counter() - t0
    ok = report("Sweep monotonicity", viol <= 1e-8 and res.cards[-1] < card0 and hurwitz and all_ok,
                f"15 gammas, worst relative decrease {viol:.3g}, card {card0} -> {res.cards[-1]}, "
                f"all Hurwitz {hurwitz}, all solved {all_ok}", el, 300)
    assert ok


def test_oracle_equivalences(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    lyap = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 9))
        A = random_hurwitz(rng, n, margin=0.3)
        C = rng.normal(size=(n, n))
        W = C.T @ C
        Pk = kron_lyapunov(A, W)
        lyap = max(lyap, np.max(np.abs(solve_lyapunov(A, W) - Pk)) / max(1.0, np.max(np.abs(Pk))))
    grad = 0.0
    for _ in range(20):
        pl, cs = random_plant(rng, n=int(rng.integers(2, 6)))
        K = solve_care(pl.A, pl.B2, cs.Q, cs.R)[1]
        K = K + 0.2 * np.abs(K).max() * rng.normal(size=K.shape)
        while not spectrum(pl.A - pl.B2 @ K).is_hurwitz:
            K = 0.5 * (K + solve_care(pl.A, pl.B2, cs.Q, cs.R)[1])
        G = h2_gradient(pl, cs, K)
        fd = np.zeros_like(K)
        h = 1e-5
        for idx in np.ndindex(K.shape):
            E = np.zeros_like(K)
            E[idx] = h
            fd[idx] = (h2_cost(pl, cs, K + E) - h2_cost(pl, cs, K - E)) / (2 * h)
        grad = max(grad, np.linalg.norm(G - fd) / np.linalg.norm(fd))
    sim = 0.0
    for _ in range(5):
        pl, cs = random_plant(rng, n=int(rng.integers(1, 5)))
        K = solve_care(pl.A, pl.B2, cs.Q, cs.R)[1]
        x0 = rng.normal(size=pl.n)
        Acl = pl.A - pl.B2 @ K
        step = min(0.001, 1.0 / np.max(np.abs(np.linalg.eigvals(Acl))))
        tr = simulate(pl, K, SimScenario(horizon=10.0, step=step, x0=x0))
        ref = expm_trajectory(Acl, x0, tr.t)
        sim = max(sim, float(np.max(np.abs(tr.x - ref))))
    grid = np.linspace(-10, 10, 200001)
    prox = 0.0
    for _ in range(200):
        v, tau = rng.uniform(-5, 5), rng.uniform(1e-3, 3)
        best = grid[np.argmin(tau * np.abs(grid) + 0.5 * (grid - v) ** 2)]
        prox = max(prox, abs(float(shrink(v, tau)) - best))
    el = time.perf_counter() - t0
    ok = report("Oracle equivalences", lyap <= 1e-8 and grad <= 1e-4 and sim <= 1e-6 and prox <= 1e-4,
                f"Lyapunov {lyap:.2g} (1e-8), gradient {grad:.2g} (1e-4), simulate {sim:.2g} (1e-6), "
                f"shrink vs grid {prox:.2g} (grid spacing 1e-4)", el, 120)
    assert ok


def test_coherency_cost_structure(report):
    """Uniform angle shifts cost only eps; the eps = 0 two-area cost has rank 2.

    "Exactly" is checked to floating-point rounding: the deviation of
    ``Q_theta 1`` from ``eps 1`` must stay within n_g units in the last place
    of the largest entry.
    """
    t0 = time.perf_counter()
    net, act, part = two_area_four_machine()
    pl = linearize_swing(net, act)
    a = pl.labels.angle
    worst_ulps = 0.0
    for ell, m, eps in [(2.0, 2.0, 0.1), (1.0, 3.0, 0.0), (3.3, 0.5, 0.37)]:
        Q = build_cost_average(pl, ell, m, eps).Q
        dev = np.max(np.abs(Q[np.ix_(a, a)] @ np.ones(len(a)) - eps))
        worst_ulps = max(worst_ulps, dev / np.spacing(np.max(np.abs(Q))))
    Q2 = build_cost_two_area(pl, part, net.M, 2.0, 2.0, 0.0).Q
    rank = int(np.linalg.matrix_rank(Q2))
    el = time.perf_counter() - t0
    ok = report("Coherency cost structure", worst_ulps <= len(a) and rank == 2,
                f"uniform shift deviation {worst_ulps:.1f} ulp (<= {len(a)}), two-area rank {rank}", el, 1)
    assert ok


def test_delay_machinery(report):
    t0 = time.perf_counter()
    blk = pade_block(0.75, 2)
    dev = float(np.max(np.abs(np.abs(blk.freq_response(1j * default_frequency_grid())) - 1.0)))
    integ = LinearPlant(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1)), generic_labels(1, 1))
    dm = delay_margin_single_channel(integ, [[1.0]], (0, 0))
    el = time.perf_counter() - t0
    ok = report("Delay machinery",
                dev <= 1e-10 and abs(dm.phase_margin - 90) <= 1e-6 and abs(dm.delay_margin - math.pi / 2) <= 1e-6,
                f"Pade(2) max | |P(iw)| - 1 | = {dev:.2g}, L=1/s: PM {dm.phase_margin:.9f} deg, "
                f"delay {dm.delay_margin:.9f} s", el, 5)
    assert ok


def test_cli_sweep_determinism(report, tmp_path):
    t0 = time.perf_counter()
    model = tmp_path / "model.json"
    run = [sys.executable, "-m", "sparsewac.cli"]
    subprocess.run(run + ["build-model", bundled_network_path(), "-o", str(model)], check=True,
                   capture_output=True)
    outs = []
    for tag in ("a", "b"):
        cp = subprocess.run(run + ["sweep", str(model), "--outdir", str(tmp_path / tag),
                                   "--gamma-min", "1e-3", "--gamma-max", "1", "--gamma-count", "4",
                                   "--seed", "11"], capture_output=True)
        assert cp.returncode == 0, cp.stderr.decode()
        outs.append((tmp_path / tag / "summary.tsv").read_bytes())
    same = outs[0] == outs[1]
    el = time.perf_counter() - t0
    ok = report("CLI sweep determinism", same,
                f"two runs, summary tables byte-identical: {same} ({len(outs[0])} bytes)", el, 300)
    assert ok
