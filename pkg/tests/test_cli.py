import json

import numpy as np
import pytest

from dualhg.cli import main
from dualhg.export import load_checkpoint, parse_embeddings

FAST = ["--set", "feature_epochs=20", "--set", "dim=8", "--set", "feature_dim=8"]


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    edges, labels = d / "edges.tsv", d / "labels.tsv"
    assert main(["gen-synth", "--n-u", "24", "--n-v", "30", "--k", "2", "--blocks", "2",
                 "--intra", "0.4", "--noise", "0.05", "--seed", "3", "--out", str(edges),
                 "--labels-out", str(labels)]) == 0
    return d, str(edges), str(labels)


def _ids(path):
    return sorted({line.split("\t")[0] for line in open(path)})


def test_train_zero_epochs_shape(data, tmp_path):
    d, edges, _ = data
    out = tmp_path / "emb.tsv"
    assert main(["train", "--edges", edges, "--epochs", "0", "--out", str(out)]) == 0
    vecs, meta, mode = parse_embeddings(out.read_text())
    assert meta["dim"] == 32 and mode == "asym"
    n_u = len({line.split("\t")[0] for line in open(edges)})
    n_v = len({line.split("\t")[1] for line in open(edges)})
    assert len(vecs["U"]) == n_u and len(vecs["V"]) == n_v
    assert all(len(v) == 32 for v in vecs["V"].values())
    assert (tmp_path / "emb.tsv.log.tsv").exists()


def test_train_with_attributes_and_checkpoint(data, tmp_path):
    _, edges, _ = data
    rng = np.random.default_rng(0)
    us = sorted({line.split("\t")[0] for line in open(edges)})
    vs = sorted({line.split("\t")[1] for line in open(edges)})
    au, av = tmp_path / "au.tsv", tmp_path / "av.tsv"
    au.write_text("".join(f"{u}\t" + "\t".join(map(str, rng.normal(size=7))) + "\n" for u in us))
    av.write_text("".join(f"{v}\t" + "\t".join(map(str, rng.normal(size=11))) + "\n" for v in vs))
    out, ck = tmp_path / "emb.tsv", tmp_path / "ck"
    assert main(["train", "--edges", edges, "--attrs-u", str(au), "--attrs-v", str(av),
                 "--epochs", "2", "--set", "dim=4", "--out", str(out),
                 "--checkpoint", str(ck)]) == 0
    params, meta = load_checkpoint(str(ck))
    assert meta["config"]["dim"] == 4 and meta["config"]["attrs_u"] == str(au)
    assert params["W.U"].shape[1] == 4


def test_train_is_byte_identical(data, tmp_path):
    _, edges, _ = data
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.tsv"
        assert main(["train", "--edges", edges, "--epochs", "3", "--seed", "7",
                     "--out", str(out)] + FAST) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    other = tmp_path / "c.tsv"
    main(["train", "--edges", edges, "--epochs", "3", "--seed", "8", "--out", str(other)] + FAST)
    assert other.read_bytes() != outs[0]


def test_eval_lp_json_and_determinism(data, tmp_path):
    _, edges, _ = data
    args = ["eval-lp", "--edges", edges, "--epochs", "2", "--repeats", "1", "--folds", "2",
            "--untrained"] + FAST
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    report = json.loads(a.read_text())
    assert len(report["auroc"]["values"]) == 2
    assert "auroc_untrained" in report
    assert report["config"]["epochs"] == 2 and report["config"]["dim"] == 8
    assert report["protocol"]["repeats"] == 1


def test_eval_nc(data, tmp_path):
    _, edges, labels = data
    out = tmp_path / "nc.json"
    assert main(["eval-nc", "--edges", edges, "--labels", labels, "--epochs", "2",
                 "--folds", "3", "--out", str(out)] + FAST) == 0
    report = json.loads(out.read_text())
    assert len(report["macro_f1"]["values"]) == 3


def test_exit_codes(data, tmp_path, capsys):
    _, edges, _ = data
    assert main(["eval-nc", "--edges", edges]) == 2
    assert "labels" in capsys.readouterr().err
    assert main(["train", "--edges", edges, "--set", "lambda=2.0"]) == 2
    assert main(["train", "--edges", edges, "--set", "nonsense"]) == 2
    assert main(["train", "--edges", str(tmp_path / "missing.tsv")]) == 3
    bad = tmp_path / "bad.tsv"
    bad.write_text("u1\tv1\n")
    assert main(["train", "--edges", str(bad)]) == 3
    assert main(["train"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["train", "--mode", "both"])
    assert exc.value.code == 2


def test_config_file_precedence(data, tmp_path):
    _, edges, _ = data
    conf = tmp_path / "run.conf"
    conf.write_text(f"edges = {edges}\nlambda = 0.75\nepochs = 50\nrepeats = 1\nfolds = 2\n"
                    "feature_epochs = 10\ndim = 4\n")
    out = tmp_path / "r.json"
    assert main(["eval-lp", "--config", str(conf), "--epochs", "1", "--out", str(out)]) == 0
    cfg = json.loads(out.read_text())["config"]
    assert cfg["lambda"] == 0.75 and cfg["epochs"] == 1 and cfg["dim"] == 4


def test_init_features_and_dump_hg(data, tmp_path):
    _, edges, _ = data
    feats = tmp_path / "f.tsv"
    assert main(["init-features", "--edges", edges, "--out", str(feats)] + FAST) == 0
    lines = feats.read_text().splitlines()
    assert lines[0] == "# dualhg features dim_u=8 dim_v=8"
    assert len(lines[1].split("\t")) == 2 + 8
    hg = tmp_path / "hg.tsv"
    assert main(["dump-hg", "--edges", edges, "--out", str(hg)]) == 0
    rows = hg.read_text().splitlines()
    assert rows[0].startswith("#domain") and len(rows) == 1 + 2 * 3


def test_sweep_lambda(data, tmp_path):
    _, edges, _ = data
    out = tmp_path / "s.json"
    assert main(["sweep", "--edges", edges, "--param", "lambda", "--values", "0.25,0.5,0.75",
                 "--epochs", "1", "--repeats", "1", "--folds", "2", "--out", str(out)] + FAST) == 0
    report = json.loads(out.read_text())
    assert list(report["reports"]) == ["0.25", "0.5", "0.75"]
    assert [r["config"]["lambda"] for r in report["reports"].values()] == [0.25, 0.5, 0.75]


def test_ablate_per_type(tmp_path):
    edges = tmp_path / "e3.tsv"
    main(["gen-synth", "--n-u", "16", "--n-v", "20", "--k", "3", "--blocks", "2",
          "--intra", "0.5", "--noise", "0.05", "--out", str(edges)])
    out = tmp_path / "ab.json"
    assert main(["ablate", "--edges", str(edges), "--per-type", "--epochs", "1",
                 "--repeats", "1", "--folds", "2", "--out", str(out)] + FAST) == 0
    report = json.loads(out.read_text())
    assert len(report["flags"]) == 4 and len(report["per_type"]) == 4
    for run in report["flags"].values():
        assert run["config"]["intra"] == run["flags"]["intra"]
        assert run["config"]["inter"] == run["flags"]["inter"]
    assert report["per_type"]["base"]["network"]["edge_types"] == ["base"]
