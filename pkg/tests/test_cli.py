import csv
import json

import numpy as np
import pytest

from synth import gaussian, planted_cluster, write_llama, write_mixtral, write_role_series
from weightscope import cli
from weightscope.checkpoint import Role
from weightscope.simcore import COMPARED_KINDS, IndexKind
from weightscope.verify import SuiteResult


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def four_layers(tmp_path):
    mats = [gaussian(40 + i, (16, 24)) for i in range(4)]
    return write_role_series(tmp_path / "m.safetensors", Role.MLP_UP, mats)


@pytest.fixture
def planted(tmp_path):
    path = tmp_path / "planted.safetensors"
    return write_role_series(path, Role.MLP_UP, planted_cluster(1))


def test_layers_heatmap_csv(four_layers, tmp_path):
    out = tmp_path / "out"
    assert run("layers", "--checkpoint", four_layers, "--out", out) == 0
    rows = read_csv(out / "heatmap_MlpUp_DOCS.csv")
    assert rows[0] == ["layer", "0", "1", "2", "3"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3"]
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert values.shape == (4, 4)
    assert np.all(np.diag(values) == 1.0)
    doc = json.loads((out / "heatmap_MlpUp_DOCS.json").read_text())
    exact = np.array(doc["values"])
    # CSV holds 9 significant digits, JSON the full doubles
    np.testing.assert_allclose(values, exact, rtol=5e-9)
    assert all(float(format(v, ".9g")) == float(s)
               for v, s in zip(exact.ravel(), np.array(rows)[1:, 1:].ravel()))
    dist = read_csv(out / "distance_MlpUp_DOCS.csv")
    assert dist[0] == ["distance", "mean_sim", "std_sim"] and len(dist) == 4


def test_layers_byte_identical(four_layers, tmp_path):
    for name in ("a", "b"):
        assert run("layers", "--checkpoint", four_layers, "--kind", "DOCS", "LINEAR_CKA",
                   "--out", tmp_path / name, "--format", "csv,json,png") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "heatmap_MlpUp_DOCS.png" in files and "heatmap_MlpUp_DOCS.scale.json" in files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_all_kinds_and_gini(planted, tmp_path):
    out = tmp_path / "out"
    assert run("layers", "--checkpoint", planted, "--kind", "all", "--out", out,
               "--format", "csv") == 0
    heatmaps = sorted(out.glob("heatmap_MlpUp_*.csv"))
    assert len(heatmaps) == 8
    assert run("gini", "--checkpoint", planted, "--kind", "all", "--out", out, "--reuse") == 0
    rows = read_csv(out / "gini.csv")
    assert rows[0] == ["role", "kind", "gini"]
    ginis = {r[1]: float(r[2]) for r in rows[1:]}
    assert set(ginis) == {k.value for k in COMPARED_KINDS}
    assert max(ginis, key=ginis.get) == "DOCS"


def test_gini_reuse_reads_csv(four_layers, tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    v = np.array([[1, 0.2, 0.6], [0.6, 1, 0.2], [0.2, 0.6, 1]])
    with open(out / "heatmap_MlpUp_DOCS.csv", "w") as fh:
        fh.write("layer,0,1,2\n" + "".join(
            f"{i}," + ",".join(map(str, row)) + "\n" for i, row in enumerate(v)))
    assert run("gini", "--checkpoint", four_layers, "--out", out, "--reuse") == 0
    assert float(read_csv(out / "gini.csv")[1][2]) == pytest.approx(0.25, abs=1e-9)


def test_aggregate_mean_selects_docs_mean(four_layers, tmp_path):
    out = tmp_path / "out"
    assert run("layers", "--checkpoint", four_layers, "--aggregate", "mean", "--out", out) == 0
    assert (out / "heatmap_MlpUp_DOCS_MEAN.csv").exists()
    assert not (out / "heatmap_MlpUp_DOCS.csv").exists()


def test_blocks(planted, tmp_path):
    out = tmp_path / "out"
    assert run("blocks", "--checkpoint", planted, "--role", "MlpUp", "--out", out) == 0
    for k in range(3, 8):
        rows = read_csv(out / f"blocks_MlpUp_k{k}.csv")
        assert rows[0] == ["start", "average"]
        assert len(rows) - 1 == 12 - k + 1


def test_compare_same_model(four_layers, tmp_path):
    out = tmp_path / "out"
    assert run("compare", "--checkpoint", four_layers, four_layers, "--kind", "DOCS",
               "LINEAR_CKA", "--out", out) == 0
    rows = read_csv(out / "compare_MlpUp.csv")
    assert rows[0] == ["layer", "DOCS", "LINEAR_CKA"]
    assert all(float(v) == 1.0 for r in rows[1:] for v in r[1:])


def test_compare_three_models(four_layers, tmp_path):
    other = write_role_series(tmp_path / "c.safetensors", Role.MLP_UP,
                              [gaussian(90 + i, (16, 24)) for i in range(4)])
    out = tmp_path / "out"
    assert run("compare", "--checkpoint", four_layers, four_layers, other, "--out", out) == 0
    rows = read_csv(out / "ratio_MlpUp.csv")
    assert rows[0] == ["layer", "kind", "sim_ab", "sim_ac", "ratio"]
    for r in rows[1:]:
        assert float(r[2]) == 1.0
        assert float(r[4]) == pytest.approx(1 / float(r[3]), rel=1e-8)
    doc = json.loads((out / "ratio_MlpUp.json").read_text())
    assert doc["models"] == ["m", "m", "c"]


def test_experts(tmp_path):
    path = write_mixtral(tmp_path / "x.safetensors", {
        0: {Role.EXPERT_W1: [gaussian(e, (8, 12)) for e in range(3)]},
        1: {Role.EXPERT_W1: [gaussian(e + 5, (8, 12)) for e in range(2)]}})
    out = tmp_path / "out"
    assert run("experts", "--checkpoint", path, "--naming", "mixtral", "--role", "ExpertW1",
               "--out", out) == 0
    rows = read_csv(out / "experts_L0_ExpertW1_DOCS.csv")
    assert rows[0] == ["expert", "0", "1", "2"]
    assert (out / "experts_L1_ExpertW1_DOCS.csv").exists()
    assert run("experts", "--checkpoint", path, "--naming", "mixtral", "--layer", "1",
               "--out", tmp_path / "only1") == 0
    assert [p.name for p in sorted((tmp_path / "only1").glob("*.csv"))] == [
        "experts_L1_ExpertW1_DOCS.csv"]


def test_ortho(tmp_path):
    layers = [{Role.WQ: gaussian(i, (64, 64)), Role.WO: gaussian(10 + i, (64, 64))}
              for i in range(2)]
    path = write_llama(tmp_path / "m.safetensors", layers)
    out = tmp_path / "out"
    assert run("ortho", "--checkpoint", path, "--out", out, "--seed", "3") == 0
    for role in ("Wq", "Wo"):
        rows = read_csv(out / f"ortho_{role}.csv")
        assert rows[0] == ["series", "layer", "theta", "offdiag_avg_cos"]
        layer_rows = [r for r in rows[1:] if r[0] == "layer"]
        ref = [r for r in rows[1:] if r[0] == "m_theta"]
        assert [r[1] for r in layer_rows] == ["0", "1"]
        assert [float(r[2]) for r in ref] == [0.001, 0.002, 0.003, 0.005]
        vals = [float(r[3]) for r in ref]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_stdout_json(four_layers, tmp_path, capsys):
    assert run("layers", "--checkpoint", four_layers, "--out", tmp_path / "o", "--stdout",
               "json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["command"] == "layers"
    assert "heatmap_MlpUp_DOCS.csv" in doc["files"]
    assert doc["results"]["MlpUp_DOCS"]["values"][0][0] == 1.0


def test_quiet_stdout_by_default(four_layers, tmp_path, capsys):
    assert run("layers", "--checkpoint", four_layers, "--out", tmp_path / "o") == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "writing heatmap_MlpUp_DOCS.csv" in captured.err


@pytest.mark.parametrize("argv, code", [
    (["layers"], 2),
    (["layers", "--kind", "PEARSON"], 2),
    (["layers", "--svcca-threshold", "0"], 2),
    (["layers", "--format", "csv,bmp"], 2),
    (["layers", "--naming", "nope"], 2),
    (["layers", "--role", "Bogus"], 2),
    (["layers", "--seed", "-1"], 2),
    (["compare"], 2),
    (["layers", "--role", "MlpDown"], 3),
])
def test_exit_codes(four_layers, tmp_path, argv, code):
    if argv != ["layers"]:
        argv = argv[:1] + ["--checkpoint", str(four_layers)] + argv[1:]
    assert run(*argv, "--out", tmp_path / "o") == code


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        run("nonsense")
    assert info.value.code == 2


def test_ingestion_and_numeric_codes(tmp_path):
    bad = tmp_path / "bad.safetensors"
    bad.write_bytes(b"\x00")
    assert run("layers", "--checkpoint", bad, "--out", tmp_path / "o") == 3
    assert run("layers", "--checkpoint", tmp_path / "missing", "--out", tmp_path / "o") == 3
    nan = np.ones((4, 4))
    nan[0, 0] = np.nan
    path = write_role_series(tmp_path / "nan.safetensors", Role.MLP_UP, [nan])
    assert run("layers", "--checkpoint", path, "--out", tmp_path / "o") == 3
    zero = gaussian(1, (4, 6))
    zero[:, 3] = 0
    path = write_role_series(tmp_path / "z.safetensors", Role.MLP_UP, [zero, zero])
    assert run("layers", "--checkpoint", path, "--out", tmp_path / "o") == 4
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("layers", "--checkpoint", path, "--out", blocker / "sub") == 2


def test_verify_mismatch_exit_code(tmp_path, monkeypatch):
    import weightscope.verify as verify

    monkeypatch.setattr(verify, "run_suite",
                        lambda seed, progress=None: SuiteResult([], False, True))
    assert run("verify", "--out", tmp_path) == 5
    doc = json.loads((tmp_path / "verify_report.json").read_text())
    assert doc["behaviour_match"] is False


def test_kind_parsing():
    assert cli._kinds(["DOCS,linear_cka", "all"])[:2] == [IndexKind.DOCS, IndexKind.LINEAR_CKA]
    assert len(cli._kinds(["all"])) == 8
