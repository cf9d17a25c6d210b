import json

import numpy as np
import pytest

from helpers import NE_MODES, generic_labels, sig_digits_match
from sparsewac import cli
from sparsewac.cases import bundled_network_path, line_admittance
from sparsewac.grid_model import CostSpec, LinearPlant, PowerNetwork
from sparsewac.modelio import GainRecord, load_model, save_model
from sparsewac.sparse_h2 import SweepRecord, SweepResult


def read_table(path):
    lines = open(path).read().splitlines()
    header = lines[0].split("\t")
    return header, [dict(zip(header, l.split("\t"))) for l in lines[1:]]


@pytest.fixture
def two_machine_net(tmp_path):
    net = PowerNetwork(M=np.array([1.0, 2.0]), D=np.array([0.1, 0.2]), E=np.ones(2), P=np.zeros(2),
                       theta=np.array([0.1, 0.0]), Y=line_admittance(2, [(0, 1, 0.5j)]),
                       names=["A", "B"])
    path = tmp_path / "net2.json"
    save_model(path, network=net)
    return path


@pytest.fixture
def bundled_model(tmp_path):
    out = tmp_path / "model.json"
    assert cli.main(["build-model", bundled_network_path(), "-o", str(out)]) == 0
    return out


def test_build_model_two_machine(two_machine_net, tmp_path, capsys):
    out = tmp_path / "m.json"
    assert cli.main(["build-model", str(two_machine_net), "-o", str(out),
                     "--ell", "2", "--m", "2", "--eps", "0.1"]) == 0
    mf = load_model(out)
    assert mf.plant.n == 4
    assert mf.cost.provenance == {"builder": "average", "ell": 2.0, "m": 2.0, "eps": 0.1}
    assert "states\t4" in capsys.readouterr().out


def test_build_model_two_area_cost(bundled_model, tmp_path):
    out = tmp_path / "m2.json"
    assert cli.main(["build-model", bundled_network_path(), "-o", str(out), "--cost", "two-area"]) == 0
    assert load_model(out).cost.provenance["builder"] == "two_area"


def test_build_model_negative_inertia(tmp_path, capsys):
    text = open(bundled_network_path()).read().replace('"M": 0.3448357100324399', '"M": -0.5', 1)
    bad = tmp_path / "bad.json"
    bad.write_text(text)
    assert cli.main(["build-model", str(bad), "-o", str(tmp_path / "x.json")]) == 2
    assert "generator G1" in capsys.readouterr().err


def test_missing_file_is_input_error(tmp_path):
    assert cli.main(["analyze", str(tmp_path / "nope.json")]) == 2


def test_sweep_gamma_zero_only(bundled_model, tmp_path):
    od = tmp_path / "o"
    assert cli.main(["sweep", str(bundled_model), "--outdir", str(od),
                     "--gamma-min", "0", "--gamma-max", "0", "--gamma-count", "1"]) == 0
    header, rows = read_table(od / "summary.tsv")
    assert len(rows) == 1
    assert all(float(r["degradation_pct"]) == 0 for r in rows)
    assert (od / "gains" / "gamma_000.json").exists()
    assert (od / "patterns" / "gamma_000.txt").exists()
    _, mrows = read_table(od / "margins.tsv")
    assert float(mrows[0]["phase_margin_deg"]) >= 59.5


@pytest.mark.slow
def test_sweep_default_schedule_has_40_rows(two_machine_net, tmp_path):
    model = tmp_path / "m.json"
    cli.main(["build-model", str(two_machine_net), "-o", str(model)])
    od = tmp_path / "o"
    assert cli.main(["sweep", str(model), "--outdir", str(od), "--max-iters", "20",
                     "--reweight-steps", "1"]) == 0
    _, rows = read_table(od / "summary.tsv")
    assert len(rows) == 40
    assert float(rows[0]["gamma"]) == pytest.approx(1e-4)


def test_sweep_table_format(bundled_model, tmp_path, capsys):
    od = tmp_path / "o"
    assert cli.main(["sweep", str(bundled_model), "--outdir", str(od), "--gammas", "0", "0.05",
                     "--max-iters", "20"]) == 0
    text = (od / "summary.tsv").read_text()
    header = text.splitlines()[0].split("\t")
    assert header == cli.SUMMARY_HEADER
    for line in text.splitlines()[1:]:
        for field in line.split("\t"):
            float(field)
    digest = capsys.readouterr().out.splitlines()
    assert digest[0] == "gamma\tcard\tdegradation_pct\tphase_margin_deg"
    assert len(digest) == 3


def test_config_overrides_flags_and_env_outdir(bundled_model, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma-min": 0, "gamma-max": 0, "gamma-count": 1}))
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path / "envout"))
    assert cli.main(["sweep", str(bundled_model), "--gamma-count", "7", "--config", str(cfg)]) == 0
    _, rows = read_table(tmp_path / "envout" / "summary.tsv")
    assert len(rows) == 1


def test_config_unknown_key(bundled_model, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gama": 1}))
    assert cli.main(["sweep", str(bundled_model), "--config", str(cfg)]) == 2
    assert "unknown option" in capsys.readouterr().err


def test_bad_schedule(bundled_model, tmp_path):
    assert cli.main(["sweep", str(bundled_model), "--outdir", str(tmp_path),
                     "--gamma-min", "1", "--gamma-max", "0.1"]) == 2
    assert cli.main(["sweep", str(bundled_model), "--outdir", str(tmp_path),
                     "--gamma-min", "0", "--gamma-count", "3"]) == 2


def test_no_successful_solve_exit_3(bundled_model, tmp_path, monkeypatch):
    def failing(plant, cost, gammas, opts):
        K = np.zeros((plant.p, plant.n))
        from sparsewac.sparse_h2 import FeedbackGain

        rec = SweepRecord(0.1, FeedbackGain(K), 1.0, 0, 0, 0.0, 0, False, ok=False, message="boom")
        return SweepResult([rec], 1.0, K)

    monkeypatch.setattr(cli.sh, "gamma_sweep", failing)
    assert cli.main(["sweep", str(bundled_model), "--outdir", str(tmp_path), "--gammas", "0.1"]) == 3


def test_numerical_failure_exit_4(tmp_path):
    # the +1 mode cannot be reached by the input: no stabilizing Riccati solution
    pl = LinearPlant(np.diag([1.0, -1.0]), np.eye(2), np.array([[0.0], [1.0]]), generic_labels(2, 1))
    model = tmp_path / "m.json"
    save_model(model, plant=pl, cost=CostSpec(np.eye(2), np.eye(1)))
    assert cli.main(["sweep", str(model), "--outdir", str(tmp_path), "--gammas", "0"]) == 4


def test_analyze_table_fixture(tmp_path, capsys):
    import scipy.linalg as sla

    A = sla.block_diag(*[np.array([[l.real, l.imag], [-l.imag, l.real]]) for l, _, _ in NE_MODES])
    pl = LinearPlant(A, np.zeros((10, 1)), np.eye(10)[:, :1], generic_labels(10, 1))
    model = tmp_path / "fixture.json"
    save_model(model, plant=pl)
    assert cli.main(["analyze", str(model), "--outdir", str(tmp_path)]) == 0
    _, rows = read_table(tmp_path / "modes.tsv")
    assert len(rows) == 5
    for lam, zeta, f in NE_MODES:
        row = min(rows, key=lambda r: abs(complex(float(r["real"]), float(r["imag"])) - lam))
        assert sig_digits_match(float(row["damping"]), zeta)
        assert sig_digits_match(float(row["frequency_hz"]), f)


def test_analyze_unstable_gain(tmp_path, capsys):
    pl = LinearPlant(np.array([[1.0]]), np.ones((1, 1)), np.ones((1, 1)), generic_labels(1, 1))
    model = tmp_path / "m.json"
    save_model(model, plant=pl)
    assert cli.main(["analyze", str(model), "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "diagnostic" in out and "# modes" in out
    assert "diagnostic" in (tmp_path / "margins.txt").read_text()


def test_analyze_lists_remote_channels(bundled_model, tmp_path, capsys):
    K = np.zeros((3, 8))
    K[[0, 1, 2], [4, 5, 6]] = 1.0
    K[2, 3] = 0.3
    gain = tmp_path / "g.json"
    save_model(gain, gain=GainRecord(K))
    assert cli.main(["analyze", str(bundled_model), "--gain", str(gain), "--outdir", str(tmp_path)]) == 0
    _, rows = read_table(tmp_path / "remote_channels.tsv")
    assert [(r["input"], r["state"]) for r in rows] == [("2", "3")]
    assert "remote links: 1" in (tmp_path / "pattern.txt").read_text()


def test_simulate_zero(bundled_model, tmp_path):
    assert cli.main(["simulate", str(bundled_model), "--outdir", str(tmp_path), "--horizon", "1"]) == 0
    data = np.loadtxt(tmp_path / "trajectory.tsv", skiprows=1)
    assert not data[:, 1:].any()


def test_simulate_delayed_channel(bundled_model, tmp_path, capsys):
    K = np.zeros((3, 8))
    K[2, 3] = 0.3
    gain = tmp_path / "g.json"
    save_model(gain, gain=GainRecord(K))
    assert cli.main(["simulate", str(bundled_model), "--gain", str(gain), "--outdir", str(tmp_path),
                     "--horizon", "2", "--x0", "mode:0", "--x0-scale", "0.01",
                     "--noise-std", "0.01", "--delay", "2,3,0.75"]) == 0
    out = capsys.readouterr().out
    assert "states\t10" in out and "delay_states\t2" in out
    header = (tmp_path / "trajectory.tsv").read_text().splitlines()[0].split("\t")
    assert "pade1_1" in header and "theta1-theta4" in header


def test_simulate_bad_delay(bundled_model, tmp_path):
    assert cli.main(["simulate", str(bundled_model), "--outdir", str(tmp_path), "--delay", "9,0,1"]) == 2
    assert cli.main(["simulate", str(bundled_model), "--outdir", str(tmp_path), "--delay", "oops"]) == 2


def test_simulate_is_deterministic(bundled_model, tmp_path):
    args = ["simulate", str(bundled_model), "--horizon", "1", "--noise-std", "0.01"]
    cli.main(args + ["--outdir", str(tmp_path / "a")])
    cli.main(args + ["--outdir", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.tsv").read_bytes() == (tmp_path / "b" / "trajectory.tsv").read_bytes()


def test_polish(bundled_model, tmp_path, capsys):
    mf = load_model(bundled_model)
    from sparsewac.matrix_equations import solve_care

    K = solve_care(mf.plant.A, mf.plant.B2, mf.cost.Q, mf.cost.R)[1]
    pattern = np.zeros_like(K, dtype=bool)
    pattern[[0, 1, 2], [0, 1, 2]] = pattern[[0, 1, 2], [4, 5, 6]] = True
    gain = tmp_path / "g.json"
    save_model(gain, gain=GainRecord(np.where(pattern, K, 0.0), pattern))
    out = tmp_path / "p.json"
    assert cli.main(["polish", str(bundled_model), "--gain", str(gain), "-o", str(out)]) == 0
    polished = load_model(out).gain
    assert not polished.K[~pattern].any()
    assert "converged\t1" in capsys.readouterr().out


def test_polish_needs_gain(bundled_model, tmp_path):
    assert cli.main(["polish", str(bundled_model), "--outdir", str(tmp_path)]) == 2
