import json
from pathlib import Path

import pytest

from votemetrics.cli import main

TOY = """\
# candidates: A,B,C
# seats: 1
weight,ranking
3,A>B>C
2,B>C>A
2,C>B>A
"""

TOY2 = """\
# candidates: A,B,C,D
# seats: 2
weight,ranking
4,A>B>C>D
3,B>C
2,C
1,D>A
"""


@pytest.fixture
def corpus(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    (d / "ward_one.csv").write_text(TOY)
    (d / "ward_two.csv").write_text(TOY2)
    return d


def test_analyze_writes_reports(tmp_path, corpus, capsys):
    out = tmp_path / "out"
    code = main(["analyze", str(corpus / "ward_one.csv"), "-o", str(out),
                 "--rules", "borda,plurality,stv,optimal-u"])
    assert code == 0
    metrics_csv = (out / "metrics.csv").read_text().splitlines()
    assert metrics_csv[0].startswith("# manifest: ")
    assert metrics_csv[1] == "election_id,rule,sigma_iia,sigma_u,m_value,n,m,seats"
    assert len(metrics_csv) == 6  # comment + header + 4 rules
    payload = json.loads((out / "analysis.json").read_text())
    assert len(payload["reports"]) == 4
    rankings = (out / "rankings.csv").read_text()
    assert "borda," in rankings
    stdout = capsys.readouterr().out
    assert "sigma_iia=" in stdout and "sigma_u=" in stdout


def test_analyze_missing_file_exits_2(tmp_path):
    assert main(["analyze", str(tmp_path / "nope.csv"),
                 "-o", str(tmp_path / "o")]) == 2


def test_analyze_malformed_file_exits_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# candidates: A,B\nweight,ranking\n1,A>A\n")
    assert main(["analyze", str(bad), "-o", str(tmp_path / "o")]) == 2


def test_analyze_bad_rule_exits_3(tmp_path, corpus):
    assert main(["analyze", str(corpus / "ward_one.csv"),
                 "-o", str(tmp_path / "o"), "--rules", "nonsense"]) == 3


def test_analyze_stv_without_seats_metadata_exits_3(tmp_path):
    p = tmp_path / "noseats.csv"
    p.write_text("# candidates: A,B,C\nweight,ranking\n1,A>B\n")
    assert main(["analyze", str(p), "-o", str(tmp_path / "o"),
                 "--rules", "stv"]) == 3


def test_sweep_counts_and_schema(tmp_path, corpus, capsys):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", str(corpus), "-o", str(out),
                 "--rules", "borda,3-approval,2-approval,plurality,stv"])
    assert code == 0
    lines = out.read_text().splitlines()
    rows = [l for l in lines if not l.startswith("#")][1:]
    assert len(rows) == 10  # 2 elections x 5 rules
    assert rows == sorted(rows)  # (election_id, rule) collation
    assert "swept 2 files: 2 ok, 0 failed" in capsys.readouterr().out


def test_sweep_parallel_matches_serial(tmp_path, corpus):
    out1 = tmp_path / "serial.csv"
    out2 = tmp_path / "parallel.csv"
    args = ["sweep", str(corpus), "--rules", "borda,plurality"]
    assert main(args + ["-o", str(out1), "--jobs", "1"]) == 0
    assert main(args + ["-o", str(out2), "--jobs", "2"]) == 0
    assert out1.read_text() == out2.read_text()


def test_sweep_isolates_per_file_failures(tmp_path, corpus, capsys):
    (corpus / "broken.csv").write_text("# candidates: A\nweight,ranking\n1,Z\n")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", str(corpus), "-o", str(out),
                 "--rules", "plurality"]) == 0
    err = capsys.readouterr().err
    assert "broken" in err
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 2


def test_sweep_empty_corpus_exits_4(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["sweep", str(empty), "-o", str(tmp_path / "x.csv")]) == 4


def test_generate_outputs_are_seed_deterministic(tmp_path):
    args = ["generate", "--m", "4", "--alpha", "2.0", "--voters", "30",
            "--profiles", "3", "--seed", "5", "--seats", "2"]
    out1, out2 = tmp_path / "g1", tmp_path / "g2"
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2)]) == 0
    files1 = sorted(p.name for p in out1.glob("*.csv"))
    assert len(files1) == 3
    for name in files1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    config = json.loads((out1 / "config.json").read_text())
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert config["manifest"] == manifest["hash"]
    # generated profiles are sweepable (seats metadata present)
    assert main(["sweep", str(out1), "-o", str(tmp_path / "s.csv"),
                 "--rules", "stv"]) == 0


def test_generate_bad_alpha_exits_3(tmp_path):
    assert main(["generate", "--m", "4", "--alpha", "-1", "-o",
                 str(tmp_path / "g")]) == 3


def test_bt_experiment_csv(tmp_path):
    out = tmp_path / "bt.csv"
    code = main(["bt-experiment", "--m", "4", "--alpha", "2.0", "--voters",
                 "40", "--profiles", "2", "--seed", "1", "--seats", "2",
                 "--rules", "borda,plurality,stv", "-o", str(out)])
    assert code == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "replicate,rule,sigma_iia,sigma_u,alpha,m"
    assert len(lines) == 1 + 2 * 3


def test_bootstrap_csv_and_determinism(tmp_path, corpus):
    out1, out2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
    args = ["bootstrap", str(corpus / "ward_one.csv"), "--rules", "plurality",
            "--metrics", "sigma_u", "--resamples", "80", "--seed", "9"]
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = [l for l in out1.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "election_id,rule,metric,mean,lo,hi,B,confidence"
    assert lines[1].startswith("ward_one,plurality,sigma_u,")


def test_bootstrap_bad_confidence_exits_3(tmp_path, corpus):
    assert main(["bootstrap", str(corpus / "ward_one.csv"),
                 "-o", str(tmp_path / "b.csv"), "--confidence", "1.5"]) == 3
