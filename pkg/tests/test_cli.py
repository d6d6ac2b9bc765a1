import json

import pytest

from heapstream import oracle
from heapstream.cli import main

FIG1_CSV = "u,nu\n0.1,1\n0.7,2\n0.2,2\n0.4,3\n0.8,1\n0.3,1\n"


def read(path):
    return path.read_text()


def test_sort_small_run_writes_trace_forest_sequence(tmp_path):
    code = main(["sort", "--mu", "dirac:2", "--n", "6", "--seed", "1",
                 "--out", str(tmp_path)])
    assert code == 0
    lines = read(tmp_path / "trace.csv").strip().splitlines()
    assert lines[0] == "n,R"
    assert len(lines) == 7
    rs = [int(row.split(",")[1]) for row in lines[1:]]
    assert rs == sorted(rs)
    assert (tmp_path / "forest.json").exists()
    assert (tmp_path / "sequence.csv").exists()


def test_sort_capacity_one_final_r_matches_dumped_labels(tmp_path):
    assert main(["sort", "--mu", "pmf:1.0", "--n", "1000", "--seed", "3",
                 "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "sequence.csv").strip().splitlines()[1:]
    labels = [float(r.split(",")[0]) for r in rows]
    final_r = int(read(tmp_path / "trace.csv").strip().splitlines()[-1].split(",")[1])
    assert final_r == oracle.lds_length(labels)


def test_sort_replays_worked_example(tmp_path):
    seq = tmp_path / "fig1.csv"
    seq.write_text(FIG1_CSV)
    out = tmp_path / "run"
    assert main(["sort", "--sequence-file", str(seq), "--out", str(out)]) == 0
    last = read(out / "trace.csv").strip().splitlines()[-1]
    assert last == "6,2"
    trees = json.loads(read(out / "forest.json"))
    assert len(trees) == 2


def test_sort_bad_mu_exits_2(tmp_path):
    assert main(["sort", "--mu", "dirac:0", "--n", "5", "--out", str(tmp_path)]) == 2


def test_sort_requires_n_or_sequence(tmp_path):
    assert main(["sort", "--out", str(tmp_path)]) == 2


def test_sort_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["sort", "--mu", "geom:0.5", "--n", "200", "--seed", "7",
                     "--out", str(out)]) == 0
    for name in ("trace.csv", "forest.json", "sequence.csv"):
        assert read(a / name) == read(b / name)


def test_simulate_writes_rep_field_svg(tmp_path):
    assert main(["simulate", "--mu", "dirac:2", "--a", "0", "--b", "4",
                 "--horizon", "5", "--seed", "2", "--svg",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "rep.json"))
    assert doc["strip"] == [0.0, 4.0] and doc["horizon"] == 5.0
    assert (tmp_path / "field.csv").exists()
    svg = read(tmp_path / "rep.svg")
    assert svg.startswith("<?xml") and "</svg>" in svg
    # json text round-trips without numeric loss
    assert json.loads(json.dumps(doc)) == doc


def test_simulate_tiny_horizon_gives_empty_outputs(tmp_path):
    assert main(["simulate", "--mu", "dirac:2", "--horizon", "1e-9",
                 "--seed", "1", "--out", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "rep.json"))
    assert doc["h_lines"] == [] and doc["v_lines"] == []


def test_simulate_rejects_inverted_strip(tmp_path):
    assert main(["simulate", "--a", "2", "--b", "1", "--out", str(tmp_path)]) == 2


def test_simulate_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--mu", "geom:0.4", "--b", "2", "--horizon", "8",
                     "--seed", "9", "--out", str(out)]) == 0
    for name in ("rep.json", "field.csv"):
        assert read(a / name) == read(b / name)


def test_estimate_slope_writes_estimates(tmp_path):
    assert main(["estimate", "--mu", "dirac:2", "--method", "slope",
                 "--n", "10000", "--replicas", "8", "--seed", "4",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "estimate.json"))
    assert doc["method"] == "slope"
    assert doc["provenance"]["dist"] == "dirac:2"
    assert doc["slope"]["point"] > 0
    lines = read(tmp_path / "estimate.csv").strip().splitlines()
    assert lines[0] == "method,point,ci_low,ci_high,replicas,n,width"
    assert len(lines) == 3   # ratio and slope rows


def test_estimate_strip_writes_monotone_counts(tmp_path):
    assert main(["estimate", "--mu", "dirac:2", "--method", "strip",
                 "--widths", "e1,e2,e3", "--replicas", "12", "--seed", "5",
                 "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "counts.csv").strip().splitlines()[1:]
    for row in rows:
        vals = [int(v) for v in row.split(",")]
        assert vals == sorted(vals)


def test_estimate_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["estimate", "--mu", "dirac:2", "--method", "ratio",
                     "--n", "2000", "--replicas", "6", "--seed", "11",
                     "--out", str(out)]) == 0
    for name in ("estimate.json", "estimate.csv"):
        assert read(a / name) == read(b / name)


def test_estimate_single_replica_exits_2(tmp_path):
    assert main(["estimate", "--mu", "dirac:2", "--method", "ratio",
                 "--n", "1000", "--replicas", "1", "--out", str(tmp_path)]) == 2


def test_estimate_capacity_one_ratio_warns_but_succeeds(tmp_path, capsys):
    assert main(["estimate", "--mu", "dirac:1", "--method", "ratio",
                 "--n", "1000", "--replicas", "4", "--seed", "1",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "estimate.json"))
    assert doc["warning"]
    assert "capacity-1" in capsys.readouterr().err


def test_estimate_missing_args_exit_2(tmp_path):
    assert main(["estimate", "--method", "slope", "--out", str(tmp_path)]) == 2
    assert main(["estimate", "--method", "strip", "--out", str(tmp_path)]) == 2
    assert main(["estimate", "--method", "strip", "--widths", "bogus",
                 "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("suite,trials", [
    ("optimality", 40),
    ("ulam", 10),
    ("scaling", 9),
    ("monotonicity", 20),
    ("restriction", 20),
    ("timechange", 10),
])
def test_check_suites_pass(tmp_path, suite, trials):
    assert main(["check", "--suite", suite, "--trials", str(trials),
                 "--seed", "123", "--out", str(tmp_path)]) == 0


def test_check_unknown_suite_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["check", "--suite", "bogus", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_check_field_suites_accept_mu(tmp_path):
    assert main(["check", "--suite", "timechange", "--mu", "geom:0.5",
                 "--trials", "5", "--seed", "3", "--out", str(tmp_path)]) == 0


def test_output_dir_env_override(tmp_path, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv("HEAPSTREAM_OUT", str(target))
    assert main(["sort", "--mu", "dirac:2", "--n", "5", "--seed", "1"]) == 0
    assert (target / "trace.csv").exists()
    # explicit --out wins over the environment
    explicit = tmp_path / "explicit"
    assert main(["sort", "--mu", "dirac:2", "--n", "5", "--seed", "1",
                 "--out", str(explicit)]) == 0
    assert (explicit / "trace.csv").exists()
