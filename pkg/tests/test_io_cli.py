import numpy as np
import pytest

from ctsboot.cli import main
from ctsboot.io import (
    InputError,
    encode_protein,
    format_sequences,
    load_mapping,
    model_spec_from_dict,
    parse_sequences,
    test_config_from_dict,
)
from ctsboot.models import MarkovChain


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


def test_parse_round_trip():
    text = "#alphabet: a,b,c\n#seed: 4\na, b,c,a\n\nc,c,b\n"
    sf = parse_sequences(text)
    assert sf.rows == [["a", "b", "c", "a"], ["c", "c", "b"]]
    assert sf.meta == {"seed": "4"}
    out = format_sequences(sf)
    assert out == "#alphabet: a,b,c\n#seed: 4\na,b,c,a\nc,c,b\n"
    assert format_sequences(parse_sequences(out)) == out
    series = sf.to_series()
    assert series[0].values.tolist() == [0, 1, 2, 0]


def test_numeric_alphabet_inferred_in_numeric_order():
    sf = parse_sequences("10,2,1\n2,2,10\n")
    assert sf.resolved_alphabet().labels == ("1", "2", "10")


def test_parse_errors_carry_line_numbers():
    with pytest.raises(InputError, match=":3:"):
        parse_sequences("#alphabet: a,b\na,b\na,x\n")
    with pytest.raises(InputError, match=":1:"):
        parse_sequences("a,,b\n")
    with pytest.raises(InputError):
        parse_sequences("a,a,a\n").resolved_alphabet()


def test_encode_protein():
    sf = encode_protein(">p1 first\nLLL\n>p2\nRGL*\n")
    assert sf.rows == [["1", "1", "1"], ["3", "2", "1"]]
    assert sf.alphabet.labels == ("1", "2", "3")
    assert sf.meta["records"] == "p1 p2"
    with pytest.raises(InputError, match="empty"):
        encode_protein(">a\nLL\n>b\n\n")
    with pytest.raises(InputError, match="'bad'"):
        encode_protein(">bad\nLLXZ\n")


def test_custom_mapping(tmp_path):
    path = tmp_path / "map.yaml"
    path.write_text("a: LVIMFWC\nb: GASTPHYRKEDQN\n")
    sf = encode_protein(">x\nLGK\n", load_mapping(path))
    assert sf.rows == [["a", "b", "b"]]


def test_config_dicts():
    cfg = test_config_from_dict({"metric": "mle", "method": "sb", "model": "hmm", "lags": "1,2", "p": 0.2, "B": 9})
    assert cfg.family.name == "hmm" and cfg.family.order == 2 and cfg.lags == (1, 2) and cfg.cont_prob == 0.2
    with pytest.raises(InputError):
        test_config_from_dict({"metric": "cc", "colour": 1})
    with pytest.raises(InputError):
        test_config_from_dict({"method": "jackknife"})
    spec = model_spec_from_dict({"family": "mc", "transition": [[0.5, 0.5], [0.1, 0.9]]})
    assert isinstance(spec, MarkovChain)
    with pytest.raises(InputError):
        model_spec_from_dict({"family": "mc"})


def test_simulate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run(capsys, "simulate", "--scenario", 3, "--delta", 0.1, "--T", 50, "--count", 3, "--seed", 7, "--out", a)[0] == 0
    assert run(capsys, "simulate", "--scenario", 3, "--delta", 0.1, "--T", 50, "--count", 3, "--seed", 7, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    sf = parse_sequences(a.read_text())
    assert len(sf.rows) == 3 and all(len(r) == 50 for r in sf.rows)
    assert sf.meta["seed"] == "7"


def test_simulate_scenario_four_header(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", 4, "--delta", 0.05, "--T", 30, "--count", 6, "--seed", 2)
    assert code == 0
    sf = parse_sequences(out)
    sizes = [int(v) for v in sf.meta["alphabet_sizes"].split(",")]
    assert len(sizes) == 6 and all(2 <= R <= 5 for R in sizes)
    for R, row in zip(sizes, sf.rows):
        assert {int(t) for t in row} <= set(range(1, R + 1))


def test_simulate_constant_spec(tmp_path, capsys):
    spec = tmp_path / "spec.yaml"
    spec.write_text("family: mc\ntransition: [[1, 0], [0, 1]]\n")
    with pytest.warns(Warning):
        code, out, _ = run(capsys, "simulate", "--spec", spec, "--T", 20, "--count", 4, "--seed", 1)
    assert code == 0
    for row in parse_sequences(out).rows:
        assert len(set(row)) == 1


def test_simulate_inadmissible_delta(capsys):
    code, _, err = run(capsys, "simulate", "--scenario", 1, "--delta", 0.5, "--T", 10)
    assert code == 2 and "delta" in err


def test_cmd_test_identical(tmp_path, capsys):
    f = tmp_path / "x.txt"
    run(capsys, "simulate", "--scenario", 1, "--T", 100, "--seed", 1, "--out", f)
    code, out, _ = run(capsys, "test", f, f, "--metric", "cc", "--B", 50)
    rep = report(out)
    assert code == 0 and rep["pvalue"] == "1" and rep["reject"] == "false" and rep["observed"] == "0"


def test_cmd_test_malformed(tmp_path, capsys):
    good = tmp_path / "g.txt"
    bad = tmp_path / "b.txt"
    good.write_text("#alphabet: 1,2\n1,2,1,2,1\n")
    bad.write_text("#alphabet: 1,2\n1,2,q,2,1\n")
    code, _, err = run(capsys, "test", good, bad)
    assert code == 2 and ":2:" in err
    two = tmp_path / "two.txt"
    two.write_text("1,2,1\n2,1,2\n")
    assert run(capsys, "test", good, two)[0] == 2
    assert run(capsys, "test", good, tmp_path / "missing.txt")[0] == 2


def test_cmd_test_config_file(tmp_path, capsys):
    f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
    run(capsys, "simulate", "--scenario", 3, "--T", 120, "--seed", 1, "--out", f1)
    run(capsys, "simulate", "--scenario", 3, "--T", 120, "--seed", 2, "--out", f2)
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("metric: mle\nmethod: ba\nmodel: ndarma\norder: 1\nB: 40\nseed: 3\n")
    code, out, _ = run(capsys, "test", f1, f2, "--config", cfg)
    rep = report(out)
    assert code == 0 and rep["metric"] == "mle" and rep["B"] == "40"
    _, again, _ = run(capsys, "test", f1, f2, "--config", cfg, "--jobs", 3)
    assert again == out
    _, override, _ = run(capsys, "test", f1, f2, "--config", cfg, "--B", 30)
    assert report(override)["B"] == "30"


def test_cmd_test_scenario_three_rejects(tmp_path, capsys):
    f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
    run(capsys, "simulate", "--scenario", 3, "--delta", 0.0, "--T", 500, "--seed", 21, "--out", f1)
    run(capsys, "simulate", "--scenario", 3, "--delta", 0.2, "--T", 500, "--seed", 22, "--out", f2)
    code, out, _ = run(capsys, "test", f1, f2, "--metric", "cc", "--method", "mbb", "--B", 250, "--seed", 5)
    assert code == 0 and report(out)["reject"] == "true"


def test_bench(tmp_path, capsys):
    cfg = tmp_path / "grid.yaml"
    cfg.write_text("scenarios: [1]\ndeltas: [0.1]\nlengths: [60]\nmetrics: [cc]\nmethods: [mbb]\nN: 5\nB: 20\nseed: 2\n")
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert run(capsys, "bench", "--config", cfg, "--out", out1)[0] == 0
    assert run(capsys, "bench", "--config", cfg, "--out", out2)[0] == 0
    lines = out1.read_text().splitlines()
    assert lines[0].startswith("scenario,delta,T") and len(lines) == 2
    assert out1.read_bytes() == out2.read_bytes()
    code, text, _ = run(capsys, "bench", "--config", cfg, "--out", out1, "--resume")
    assert code == 0 and "Scenario 1" in text and out1.read_bytes() == out2.read_bytes()


def test_bench_tuning_sweep(tmp_path, capsys):
    cfg = tmp_path / "grid.yaml"
    cfg.write_text("scenarios: [1]\ndeltas: [0.0]\nlengths: [60]\nmetrics: [cc]\nmethods: [mbb]\nblock_sizes: [4, 8]\nN: 4\nB: 15\n")
    out = tmp_path / "r.csv"
    assert run(capsys, "bench", "--config", cfg, "--out", out)[0] == 0
    tuning = (tmp_path / "r.tuning.csv").read_text().splitlines()
    assert tuning[0].split(",")[5:7] == ["param", "value"] and len(tuning) == 3


def test_bench_bad_config(tmp_path, capsys):
    cfg = tmp_path / "grid.yaml"
    cfg.write_text("scenarios: [1]\nwhatever: 3\n")
    assert run(capsys, "bench", "--config", cfg)[0] == 2


def test_cluster_singleton(tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    corpus.write_text("1,2,3,1,2,3,3,2,1,1,2\n")
    code, out, _ = run(capsys, "cluster", corpus, "--B", 20, "--out", tmp_path / "o")
    assert code == 0 and "1 clusters" in out
    assert (tmp_path / "o" / "pvalues.csv").read_text().splitlines()[-1] == "s1,1"
    assert (tmp_path / "o" / "coords.csv").read_text().splitlines()[0] == "# seed: 0"


def test_cluster_duplicate_pair(tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    line = "1,2,3,1,2,3,3,2,1,1,2,2,2,3,1,1,3,2,1,3"
    corpus.write_text(f"{line}\n{line}\n")
    code, out, _ = run(capsys, "cluster", corpus, "--B", 20, "--out", tmp_path / "o")
    assert code == 0
    part = (tmp_path / "o" / "partition.csv").read_text().splitlines()
    assert part[-2:] == ["s1,1", "s2,1"]


def test_cluster_protein_names(tmp_path, capsys):
    fasta = tmp_path / "p.fa"
    fasta.write_text(">alpha\nLLRGKVLLAGSTKEDLLV\n>beta\nRKRKEDGGAALLVVIIMQ\n")
    enc = tmp_path / "enc.txt"
    assert run(capsys, "encode", fasta, "--out", enc)[0] == 0
    assert run(capsys, "cluster", enc, "--B", 20, "--out", tmp_path / "o")[0] == 0
    rows = (tmp_path / "o" / "coords.csv").read_text().splitlines()
    assert rows[2].startswith("alpha,") and rows[3].startswith("beta,")


def test_encode_errors(tmp_path, capsys):
    fasta = tmp_path / "p.fa"
    fasta.write_text(">x\nLLB\n")
    code, _, err = run(capsys, "encode", fasta)
    assert code == 2 and "'x'" in err
