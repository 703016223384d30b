import json

import pytest

from rssiguard.cli import main

LAYOUT = {
    "aps": [[1, 9], [11, 9], [6, 5], [11, 2]],
    "areas": [[2.5, 7], [9.5, 7], [6, 4.5]],
    "gate": [6, 0],
    "outside": [[0, -6], [12, -6], [12, -0.5], [0, -0.5]],
    "k": 2,
    "m": 1,
    "eta": 2.0,
}


@pytest.fixture
def layout(tmp_path):
    path = tmp_path / "layout.json"
    path.write_text(json.dumps(LAYOUT))
    return path


def run(*args):
    return main([str(a) for a in args])


def test_simulate_train_detect(tmp_path, layout, capsys):
    train_csv, test_csv, model = tmp_path / "train.csv", tmp_path / "test.csv", tmp_path / "m.json"
    assert run("simulate", "--layout", layout, "--positions", "areas", "--ap-indices", "0,1,2",
               "--trials", 60, "--seed", 1, "--out", train_csv) == 0
    assert train_csv.read_text().startswith("pos_x,pos_y,ap_1,ap_2,ap_3\n")
    assert run("simulate", "--layout", layout, "--at", "6,4.5", "--ap-indices", "0,1,2",
               "--trials", 200, "--seed", 1, "--out", tmp_path / "t0.csv") == 0
    assert run("train", "--train-csv", tmp_path / "t0.csv", "--nu", 0.1, "--model-out", model) == 0
    assert run("simulate", "--layout", layout, "--positions", "gate", "--ap-indices", "0,1,2",
               "--trials", 10, "--seed", 2, "--out", test_csv) == 0
    capsys.readouterr()
    assert run("detect", "--model", model, "--test-csv", test_csv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "window,pos_x,pos_y,decision_value,verdict"
    assert len(lines) == 11
    assert all(l.split(",")[-1] in ("target", "non_target") for l in lines[1:])
    assert lines[1].split(",")[3].split(".")[1].__len__() == 6


def test_detect_empty_file(tmp_path, layout, capsys):
    model = tmp_path / "m.json"
    run("simulate", "--layout", layout, "--trials", 40, "--seed", 1, "--out", tmp_path / "a.csv")
    assert run("train", "--train-csv", tmp_path / "a.csv", "--model-out", model) == 0
    (tmp_path / "empty.csv").write_text("")
    capsys.readouterr()
    assert run("detect", "--model", model, "--test-csv", tmp_path / "empty.csv") == 0
    assert capsys.readouterr().out == "window,pos_x,pos_y,decision_value,verdict\n"


def test_rate_point_and_domain(tmp_path, layout, capsys):
    assert run("rate", "--layout", layout, "--area", 2, "--at", "6,4.5", "--at", "6,0") == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "t_x,t_y,distance,lambda_t,delta,rate"
    assert out[1].split(",")[-1] == "0.100000"
    assert run("rate", "--layout", layout, "--domain", "--samples", 2000, "--seed", 0) == 0
    assert capsys.readouterr().out.splitlines()[0] == "rate,standard_error,samples"
    assert run("rate", "--layout", layout, "--domain") == 1


def test_optimize_with_report(tmp_path, layout, capsys):
    report = tmp_path / "rep.json"
    assert run("optimize", "--layout", layout, "--validate", "analytic", "--report", report) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "rank,ap_indices,area_indices,objective"
    assert len(out) == 19
    assert json.loads(report.read_text())["r"] == 1.0
    assert run("optimize", "--layout", layout, "--k", 4, "--m", 3, "--max-combinations", 0) == 1


def test_eval_manifest(tmp_path, layout, capsys):
    names = []
    for i in range(3):
        p = tmp_path / f"t{i}.csv"
        run("simulate", "--layout", layout, "--at", "2.5,7", "--trials", 60, "--seed", i, "--out", p)
        names.append(p.name)
    run("simulate", "--layout", layout, "--positions", "gate", "--trials", 60, "--seed", 9, "--out", tmp_path / "g.csv")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"target": names, "negatives": {"gate": ["g.csv"]}}))
    out = tmp_path / "report.json"
    assert run("eval", "--manifest", manifest, "--out", out, "--folds-csv", tmp_path / "f.csv") == 0
    rep = json.loads(out.read_text())
    assert len(rep["folds"]) == 3 and 0 <= rep["f_measure"] <= 1
    assert (tmp_path / "f.csv").read_text().startswith("fold,tp,fp,fn,tn")


def test_experiments(tmp_path, capsys):
    assert run("experiment", "fig2", "--seed", 0, "--draws", 20000, "--plot-data", tmp_path / "h.json") == 0
    assert "reported" in capsys.readouterr().err
    assert run("experiment", "fig3", "--seed", 0, "--trials", 50, "--out", tmp_path / "f3.csv") == 0
    assert len((tmp_path / "f3.csv").read_text().splitlines()) == 21


@pytest.mark.parametrize(
    "argv",
    [
        ["experiment", "fig2", "--seed", "0", "--draws", "20000"],
        ["experiment", "fig3", "--seed", "3", "--trials", "40"],
        ["experiment", "store", "--seed", "1"],
        ["rate", "--layout", "{layout}", "--domain", "--samples", "3000", "--seed", "5"],
        ["optimize", "--layout", "{layout}", "--validate", "surrogate", "--trials", "100", "--seed", "2"],
    ],
)
def test_stochastic_commands_byte_identical(tmp_path, layout, argv):
    outs = []
    for n in range(2):
        out = tmp_path / f"out{n}.txt"
        args = [a.format(layout=layout) for a in argv] + ["--out", str(out)]
        assert main(args) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] and outs[0]


def test_simulate_byte_identical(tmp_path, layout):
    for n in range(2):
        run("simulate", "--layout", layout, "--positions", "all", "--model", "rayleigh",
            "--trials", 20, "--seed", 7, "--out", tmp_path / f"s{n}.csv")
    assert (tmp_path / "s0.csv").read_bytes() == (tmp_path / "s1.csv").read_bytes()


def test_exit_codes(tmp_path, layout, capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--layout", str(layout), "--trials", "5"])  # --seed missing
    assert info.value.code == 1
    assert run("simulate", "--layout", tmp_path / "missing.json", "--seed", 1, "--out", tmp_path / "x.csv") == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("optimize", "--layout", bad) == 1
    assert run("rate", "--layout", layout, "--sigma", 0) == 1
    assert run("simulate", "--layout", layout, "--seed", 1, "--trials", 0, "--out", tmp_path / "x.csv") == 1
    degenerate = tmp_path / "flat.csv"
    degenerate.write_text("pos_x,pos_y,ap_1\n" + "0,0,-40\n" * 10)
    assert run("train", "--train-csv", degenerate, "--model-out", tmp_path / "m.json") == 1
    assert "ap_1" in capsys.readouterr().err
    assert run("train", "--train-csv", tmp_path / "nope.csv", "--model-out", tmp_path / "m.json") == 2


def test_train_nonconvergence_is_numerical(tmp_path, layout, monkeypatch):
    import rssiguard.cli as cli
    from rssiguard.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("SMO did not converge", 1.0, 5)

    run("simulate", "--layout", layout, "--trials", 40, "--seed", 1, "--out", tmp_path / "a.csv")
    monkeypatch.setattr(cli, "train", boom)
    assert run("train", "--train-csv", tmp_path / "a.csv", "--model-out", tmp_path / "m.json") == 3
