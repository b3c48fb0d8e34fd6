import os
import subprocess
from pathlib import Path

import pytest

import idtw

ROOT = Path(__file__).resolve().parents[2]
KB_DIR = ROOT / "kb"
DATA = Path(os.environ.get("IDTW_DATA_DIR", ROOT / "data" / "synthetic"))
CLI = os.environ.get("IDTW_CLI")
DAY = 1440


def study(d):
    return dict(kb=str(d / "domain.kb"), data=str(d / "data.csv"), events=str(d / "events.csv"),
                labels=str(d / "labels.csv"), config=str(d / "experiment.cfg"))


def test_knowledge_base_loads_and_round_trips():
    kb = idtw.load_knowledge_base(str(KB_DIR / "oncology.kb"))
    assert kb.concept_names() == ["WBC", "PLATELET", "HGB", "BANDS", "MONOCYTE"]
    assert kb.half_life("HGB") == DAY
    assert [s[0] for s in kb.states("WBC")][-1] == "VERY HIGH"
    again = idtw.parse_knowledge_base(kb.serialize())
    assert again.serialize() == kb.serialize()


def test_errors_map_to_python_exceptions():
    with pytest.raises(idtw.KbError):
        idtw.parse_knowledge_base("# empty\n")
    with pytest.raises(idtw.ParseError):
        idtw.parse_knowledge_base("[concept X\n")
    with pytest.raises(idtw.ConfigError):
        idtw.dtw_distance([[0.0]], [[1.0]], band="diagonal")
    assert issubclass(idtw.KbError, idtw.Error)


def test_state_and_gradient_abstraction():
    kb = idtw.load_knowledge_base(str(KB_DIR / "oncology.kb"))
    states = idtw.abstract_state([(DAY, 10.0), (2 * DAY, 10.5)], kb, "HGB")
    assert [(s["start"], s["end"], s["label"]) for s in states] == [(0, 3 * DAY, "MODERATELY LOW")]
    grads = idtw.abstract_gradient([(0, 10.0), (DAY, 11.0)], kb, "HGB")
    assert grads[0]["label"] == "INCREASING"
    assert grads[0]["value"] == 1.0


def test_dtw_and_bands():
    assert idtw.dtw_distance([[0, 0, 1]], [[0, 1]]) == 0.0
    a = [[0.1, 0.5, 0.9, 0.3], [0.2, 0.2, 0.4, 0.8]]
    b = [[0.3, 0.9, 0.1], [0.6, 0.1, 0.5]]
    free = idtw.dtw_distance(a, b)
    assert idtw.dtw_distance(a, b, band="kb0") >= idtw.dtw_distance(a, b, band="kb1") >= free
    kb = idtw.load_knowledge_base(str(KB_DIR / "diabetes.kb"))
    assert idtw.kb_band_radius(kb, ["ALBUMINURIA", "CREATININE", "HBA1C"], "Month") == 6


def test_metrics_against_scipy():
    stats = pytest.importorskip("scipy.stats")
    a = [0.71, 0.80, 0.64, 0.90, 0.77, 0.83]
    b = [0.69, 0.72, 0.66, 0.81, 0.70, 0.79]
    got = idtw.paired_t_test(a, b)
    want = stats.ttest_rel(a, b)
    assert got["t"] == pytest.approx(want.statistic, abs=1e-9)
    assert got["p"] == pytest.approx(want.pvalue, abs=1e-9)
    assert got["dof"] == 5
    assert idtw.paired_t_test(a, a)["p"] == 1.0


def test_auc_and_youden():
    assert idtw.roc_auc([0.8, 0.3, 0.5, 0.1], [True, True, False, False]) == 0.75
    y = idtw.youden_optimal([0.9, 0.8, 0.1, 0.2], [True, True, False, False])
    assert y["youden_j"] == 1.0 and y["threshold"] == 0.8
    with pytest.raises(idtw.DataError):
        idtw.roc_auc([0.1, 0.2], [True, True])


def test_grid_arithmetic():
    assert len(idtw.k_values(161)) == 7
    assert len(idtw.k_values(125)) == 6
    assert idtw.experiment_count(5, 3, 3, 2, 2, 7) == 33600
    assert idtw.experiment_count(4, 3, 3, 2, 2, 6) == 13536


def test_cross_validation_on_bundled_data():
    results = idtw.run_cv(concepts="LAB_A:S;LAB_B:S", ks=[1, 3], seed=7, **study(DATA))
    assert [r["config_id"].endswith(f"|k{k}") for r, k in zip(results, (1, 3))] == [True, True]
    for r in results:
        assert r["error"] == ""
        assert r["folds_scored"] == 10
        assert r["mean_auc"] >= 0.9
        assert len(r["folds"]) == 10


def test_synthetic_generation_is_deterministic(tmp_path):
    idtw.generate_synthetic(str(tmp_path / "a"), entities=30, seed=3)
    idtw.generate_synthetic(str(tmp_path / "b"), entities=30, seed=3)
    for name in ("data.csv", "events.csv", "labels.csv", "domain.kb", "experiment.cfg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert '"LAB_A"' in idtw.separable_domain_json()


def test_grid_reports(tmp_path):
    d = tmp_path / "cohort"
    idtw.generate_synthetic(str(d), entities=24, seed=5)
    cfg = (d / "experiment.cfg").read_text()
    cfg = cfg.replace("interpolations=nearest,linear,average", "interpolations=linear")
    cfg = cfg.replace("folds=10", "folds=4").replace("max_concepts=2", "max_concepts=1")
    (d / "experiment.cfg").write_text(cfg)
    one = idtw.run_grid(out_dir=str(tmp_path / "w1"), workers=1, **study(d))
    idtw.run_grid(out_dir=str(tmp_path / "w3"), workers=3, **study(d))
    assert len(one) == idtw.experiment_count(2, 1, 1, 2, 2, len(idtw.k_values(24)))
    for name in ("folds.csv", "results.csv", "aggregate.csv"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w3" / name).read_bytes()
    header = (tmp_path / "w1" / "aggregate.csv").read_text().splitlines()[0]
    assert header == "representation,n_configs,mean_auc,variance,p_vs_raw"


@pytest.mark.skipif(not CLI, reason="IDTW_CLI not set")
def test_cli_round_trip(tmp_path):
    def run(*args):
        return subprocess.run([CLI, *args], check=True, capture_output=True, text=True).stdout

    out = tmp_path / "s"
    run("synth", "--out", str(out), "--entities", "24", "--seed", "2")
    common = ["--kb", str(out / "domain.kb"), "--data", str(out / "data.csv"), "--events", str(out / "events.csv"),
              "--labels", str(out / "labels.csv"), "--config", str(out / "experiment.cfg")]
    assert "LAB_A" in run("abstract", *common)
    assert run("represent", *common, "--concepts", "LAB_A:S", "--entity", "E0001").startswith("E0001,Day,30")
    dist = float(run("match", *common, "--concepts", "LAB_A:S", "E0001", "E0001").strip().split(",")[-1])
    assert dist == 0.0
    assert "mean_auc" in run("classify", *common, "--concepts", "LAB_A:S", "--k", "1")

    bad = subprocess.run([CLI, "abstract", "--kb", str(out / "labels.csv"), "--data", str(out / "data.csv")],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert "line" in bad.stderr
