"""Acceptance criteria 1-10, each checked at its stated tolerance."""

import json
import math
import time
import tracemalloc

import numpy as np
import pytest

from synth import planted_cluster, ratio_fixture, write_role_series
from weightscope import cli
from weightscope import rng as R
from weightscope.analysis import gini, similarity_matrix, similarity_ratio
from weightscope.checkpoint import Role, RoleTag, open_checkpoint
from weightscope.simcore import (COMPARED_KINDS, IndexKind, cross_reduce, docs,
                                 gumbel_fit_location, max_cos_sim)
from weightscope.verify import (WITNESS_PAIRS, EXPECTED_BEHAVIOUR, Classification, orthogonal_samples,
                                hadamard_pair, verify_docs_properties)


def test_criterion_01_witness_values(criterion):
    start = time.perf_counter()
    values = [docs(x, y).value for x, y, _ in WITNESS_PAIRS]
    elapsed = time.perf_counter() - start
    devs = [abs(v - ref) for v, (_, _, ref) in zip(values, WITNESS_PAIRS)]
    ok = max(devs) <= 0.01 and elapsed < 1.0
    assert criterion(1, "3x3 orthogonal pairs give 0.88 / 0.76 +/- 0.01", ok,
                     f"values {values[0]:.5f}, {values[1]:.5f}; {elapsed * 1e3:.1f} ms")


def test_criterion_02_hadamard_pair(criterion):
    start = time.perf_counter()
    frob_dev = docs_dev = 0.0
    for m in (2, 4, 8, 16, 64, 256):
        x, y = hadamard_pair(m)
        frob_dev = max(frob_dev, abs(np.sum((x - y) ** 2) - 2 * m) / (2 * m))
        score = docs(x, y)
        assert score.meta["fit_x"].degenerate and score.meta["fit_y"].degenerate
        docs_dev = max(docs_dev, abs(score.value - 1 / math.sqrt(m)))
    elapsed = time.perf_counter() - start
    ok = frob_dev <= 1e-9 and docs_dev <= 1e-12 and elapsed < 5.0
    assert criterion(2, "||X-Y||_F^2 = 2m and DOCS = 1/sqrt(m)", ok,
                     f"frob rel dev {frob_dev:.1e}, docs dev {docs_dev:.1e}, {elapsed:.2f} s")


def test_criterion_03_property_suite(criterion):
    reports = {r.property: r for r in verify_docs_properties(trials=100, seed=42)}
    limits = {"PT": 1e-12, "Symmetry": 1e-9, "IS": 1e-9, "Reflexivity": 0.0}
    ok = all(reports[p].trials == 100 and reports[p].max_deviation <= tol
             and reports[p].classification is Classification.HOLDS
             for p, tol in limits.items())
    detail = ", ".join(f"{p} {reports[p].max_deviation:.1e}" for p in limits)
    assert criterion(3, "PT / symmetry / IS / reflexivity over 100 trials", ok, detail)


def test_criterion_04_orthogonal_constancy(criterion, tmp_path):
    n_values = (4, 16, 64, 256)
    worst = 0.0
    for kind in (IndexKind.LINREG, IndexKind.CCA_R2, IndexKind.CCA_NUCLEAR,
                 IndexKind.SVCCA_R2, IndexKind.SVCCA_NUCLEAR, IndexKind.LINEAR_CKA,
                 IndexKind.LINEAR_HSIC):
        samples = orthogonal_samples(kind, n_values, 50, seed=42, svcca_threshold=1.0)
        for n, vals in samples.items():
            target = n / (n - 1) ** 2 if kind is IndexKind.LINEAR_HSIC else 1.0
            worst = max(worst, float(np.max(np.abs(vals - target))))
    docs_std = float(np.std(orthogonal_samples(IndexKind.DOCS, (4,), 50, seed=42)[4], ddof=1))

    code = cli.main(["verify", "--out", str(tmp_path)])
    report = json.loads((tmp_path / "verify_report.json").read_text())
    behaviour = {r["kind"]: r["classification"] for r in report["reports"]
                 if r["property"] == "OrthogonalBehavior" and r["trials"] == 200}
    table_ok = behaviour == {k.value: c.value for k, c in EXPECTED_BEHAVIOUR.items()}
    ok = worst <= 1e-8 and docs_std > 1e-3 and table_ok and code == 0
    assert criterion(4, "baselines constant on orthogonal pairs, DOCS discriminative", ok,
                     f"max baseline dev {worst:.1e}, DOCS std at n=4 {docs_std:.4f}, "
                     f"table match {table_ok}, verify exit {code}")


def test_criterion_05_gumbel_recovery(criterion):
    g = R.generator(20240607)
    samples = 0.7 - 0.05 * np.log(-np.log(g.random(10_000)))
    u = gumbel_fit_location(samples).location_u
    c = 0.123456789
    degenerate = gumbel_fit_location([c] * 25).location_u
    ok = 0.695 <= u <= 0.705 and degenerate == c
    assert criterion(5, "Gumbel location recovered; constant sample returns c exactly", ok,
                     f"u_hat {u:.5f}, degenerate u == c: {degenerate == c}")


def test_criterion_06_kernel_oracle(criterion):
    g = R.generator(6)
    bitwise = True
    cross_tile = 0.0
    for _ in range(200):
        n, mx, my = (int(v) for v in g.integers(1, 129, 3))
        x, y = R.normal(g, (n, mx)), R.normal(g, (n, my))
        xn = x / np.sqrt(np.einsum("ij,ij->j", x, x))
        yn = y / np.sqrt(np.einsum("ij,ij->j", y, y))
        naive = np.abs(xn.T @ yn).max(axis=1)
        row, _ = cross_reduce(x, y, "max", tile=512)
        bitwise &= row.tobytes() == naive.tobytes()
        ref = max_cos_sim(x, y, tile=512).values
        for tile in (64, 128):
            cross_tile = max(cross_tile, float(np.max(np.abs(
                max_cos_sim(x, y, tile=tile).values - ref))))
    ok = bitwise and cross_tile <= 1e-9
    assert criterion(6, "tiled max |cos| equals naive full matrix", ok,
                     f"bitwise at tile 512: {bitwise}, max dev across tiles {cross_tile:.1e}")


def _planted_ginis(seed=1):
    mats = planted_cluster(seed)
    return {k: gini(similarity_matrix(mats, k)) for k in list(COMPARED_KINDS)
            + [IndexKind.DOCS_MEAN]}


def test_criterion_07_gini(criterion):
    uniform = np.full((6, 6), 0.4)
    np.fill_diagonal(uniform, 1.0)
    g_uniform = gini(uniform)
    hand = np.array([[1.0, 0.2, 0.6], [0.6, 1.0, 0.2], [0.2, 0.6, 1.0]])
    g_hand = gini(hand)
    ginis = _planted_ginis()
    eight = {k: ginis[k] for k in COMPARED_KINDS}
    top = max(eight, key=eight.get)
    runner_up = sorted(eight.values())[-2]
    ok = g_uniform == 0.0 and abs(g_hand - 0.25) <= 1e-12 and top is IndexKind.DOCS \
        and eight[IndexKind.DOCS] > runner_up
    assert criterion(7, "Gini pipeline and DOCS highest on planted clusters", ok,
                     f"uniform {g_uniform}, hand {g_hand:.12f}, DOCS "
                     f"{eight[IndexKind.DOCS]:.4f} vs next {runner_up:.4f}")


def test_criterion_08_similarity_ratio(criterion, tmp_path):
    a, b, c = ratio_fixture(seed=8, layers=4)
    indexes = [open_checkpoint(write_role_series(tmp_path / f"{name}.safetensors",
                                                 Role.MLP_UP, mats))
               for name, mats in zip("abc", (a, b, c))]
    rep = similarity_ratio(*indexes, RoleTag(Role.MLP_UP), IndexKind.DOCS)
    ratios = rep.ratios
    ok = bool(np.all(ratios > 5))
    assert criterion(8, "DOCS ratio > 5 on every layer", ok,
                     "ratios " + ", ".join(f"{r:.3f}" for r in ratios))


def test_criterion_09_mean_ablation(criterion):
    ginis = _planted_ginis()
    g_max, g_mean = ginis[IndexKind.DOCS], ginis[IndexKind.DOCS_MEAN]
    ok = g_mean < g_max
    assert criterion(9, "DOCS_MEAN Gini below DOCS Gini on planted clusters", ok,
                     f"DOCS {g_max:.4f}, DOCS_MEAN {g_mean:.4f}")


@pytest.mark.slow
def test_criterion_10_performance(criterion):
    g = np.random.default_rng(10)
    x = g.standard_normal((4096, 8192), dtype=np.float32)
    y = g.standard_normal((4096, 8192), dtype=np.float32)
    input_bytes = x.nbytes + y.nbytes
    tracemalloc.start()
    try:
        start = time.perf_counter()
        value = docs(x, y).value
        elapsed = time.perf_counter() - start
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    ok = elapsed < 30.0 and peak < 1.5 * input_bytes and 0.0 < value < 1.0
    assert criterion(10, "4096x8192 f32 DOCS under 30 s and 1.5x input memory", ok,
                     f"{elapsed:.1f} s, peak extra {peak / 2**20:.0f} MiB "
                     f"vs limit {1.5 * input_bytes / 2**20:.0f} MiB")
