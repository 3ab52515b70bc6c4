import json

import numpy as np
import pytest

from bidegree.cli import main
from bidegree.estimation import P0Params
from bidegree.graph import (
    NoisyBiSequence,
    degrees,
    read_bisequence_csv,
    read_edge_list,
    sample_p0,
    write_edge_list,
)
from bidegree.graphical import is_bigraphical


@pytest.fixture
def workdir(tmp_path):
    g = sample_p0(P0Params.linear(40, 0.5), np.random.default_rng(8))
    write_edge_list(g, tmp_path / "g.tsv")
    (tmp_path / "priv.json").write_text('{"epsilon": 2.0, "mechanism": "discrete_laplace", "seed": 12345}')
    return tmp_path


def test_release_denoise_fit_infer(workdir, capsys):
    w = workdir
    assert main(["release", str(w / "g.tsv"), "--privacy", str(w / "priv.json"), "-o", str(w / "z.csv")]) == 0
    assert (w / "z.csv").read_text().startswith("node,out_noisy,in_noisy\n")
    z = read_bisequence_csv(w / "z.csv", NoisyBiSequence)
    assert z.n == 40

    assert main(["denoise", str(w / "z.csv"), "-o", str(w / "d.csv"), "--emit-graph", str(w / "syn.tsv")]) == 0
    d_hat = read_bisequence_csv(w / "d.csv")
    assert is_bigraphical(d_hat)
    assert degrees(read_edge_list(w / "syn.tsv", n=40)) == d_hat

    assert main(["fit", str(w / "z.csv"), "-o", str(w / "theta.csv"), "--diagnostics", str(w / "fit.json")]) == 0
    lines = (w / "theta.csv").read_text().splitlines()
    assert lines[0] == "node,alpha,beta" and len(lines) == 41
    assert lines[-1].endswith(",0.0")
    diag = json.loads((w / "fit.json").read_text())
    assert diag["status"] == "converged" and diag["residual"] <= 1e-8

    capsys.readouterr()
    assert main(["infer", str(w / "fit.json"), "--privacy", str(w / "priv.json"), "--pair", "1,2", "--pair", "39,40"]) == 0
    out = capsys.readouterr().out
    se_block, ci_block = out.split("\n\n")
    assert se_block.splitlines()[0] == "parameter,node,estimate,se"
    assert len(se_block.splitlines()) == 1 + 40 + 39
    ci = ci_block.strip().splitlines()
    assert ci[0] == "i,j,center,lower,upper" and ci[1].startswith("1,2,")
    _, _, c, lo, hi = map(float, ci[1].split(","))
    assert lo < c < hi


def test_release_is_reproducible(workdir, capsys):
    args = ["release", str(workdir / "g.tsv"), "--epsilon", "1.0", "--seed", "3"]
    main(args)
    a = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == a


def test_fit_from_edge_list(workdir, capsys):
    assert main(["fit", str(workdir / "g.tsv"), "--method", "fixed_point"]) == 0
    assert capsys.readouterr().out.startswith("node,alpha,beta\n1,")


def test_fit_nonexistent_exit_code(tmp_path):
    (tmp_path / "d.csv").write_text("node,out,in\n1,2,2\n2,2,2\n3,2,2\n")
    assert main(["fit", str(tmp_path / "d.csv"), "--diagnostics", str(tmp_path / "f.json")]) == 3
    assert json.loads((tmp_path / "f.json").read_text())["status"] == "nonexistent"
    with pytest.raises(SystemExit):
        main(["infer", str(tmp_path / "f.json")])


def test_bad_input_reports_error(tmp_path, capsys):
    (tmp_path / "bad.tsv").write_text("1\t1\n")
    assert main(["release", str(tmp_path / "bad.tsv"), "--epsilon", "1"]) == 2
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("table", ["coverage", "distance", "qq"])
def test_simulate(tmp_path, table):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 20, "replications": 15, "pairs": [[1, 2]], "seed": 1}))
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--table", table, "--config", str(cfg), "-o", str(out1)]) == 0
    assert main(["simulate", "--table", table, "--config", str(cfg), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert "," in out1.read_text().splitlines()[0]


def test_simulate_config_list(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"configs": [{"n": 20, "replications": 5}, {"n": 30, "replications": 5, "epsilon": "log_over_n4"}]}))
    assert main(["simulate", "--table", "distance", "--config", str(cfg), "--fast"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and lines[2].startswith("30,log_over_n4,")
