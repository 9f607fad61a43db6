"""Acceptance gate: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed even under
capture) or ``python tests/test_acceptance.py``.
"""
import itertools
import json
import math
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from fermicorr import (
    DetectorConfig,
    GridSpec,
    HermitianMatrix,
    PartitionSpec,
    SamplingKernel,
    SpectralModel,
    antibunching_curve,
    bundle_from_matrix,
    build_sampling_kernel,
    check_partition_bound,
    coherence_time_from_bandwidth,
    estimate_g2,
    exact_subset_probabilities,
    fischer_cross_check,
    lemma_check,
    sample_many,
    set_partitions,
    sweep_partitions,
)
from fermicorr.cli import main as cli_main
from fermicorr.dpp_sampler import analytic_g2
from fermicorr.hermitian_linalg import determinant

sys.path.insert(0, str(Path(__file__).parent))
from conftest import TC, block_diagonal_psd, ginibre  # noqa: E402

CORPUS_SIZE = 1000
CORPUS_SEED = 20240601


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def corpus():
    """(matrix, is_control) pairs; k cycles through 1..8.

    Every tenth matrix is built from a diagonal B, and 1x1 matrices are
    diagonal by construction, so both count as controls.
    """
    rng = np.random.default_rng(CORPUS_SEED)
    out = []
    for i in range(CORPUS_SIZE):
        k = 1 + i % 8
        if i % 10 == 0:
            b = np.diag(rng.uniform(0.5, 2.0, k) * np.exp(2j * np.pi * rng.uniform(size=k)))
        else:
            b = ginibre(rng, k + 2, k)
        out.append((HermitianMatrix(b.conj().T @ b), i % 10 == 0 or k == 1))
    return out


CORPUS = corpus()


def test_1_lemma_suite(capsys):
    start = time.perf_counter()
    bad = []
    for n, (a, control) in enumerate(CORPUS):
        r = lemma_check(a)
        if not (r.holds and r.rhs - r.lhs >= -1e-10 * r.rhs) or r.is_equality != control:
            bad.append(n)
    elapsed = time.perf_counter() - start
    controls = sum(c for _, c in CORPUS)
    verdict(capsys, 1, not bad and elapsed < 10,
            f"{len(CORPUS)} matrices ({controls} diagonal controls), "
            f"{len(bad)} failures, {elapsed:.2f}s (limit 10s)")


def _two_block_partitions(k):
    # unordered {A, complement}, A containing index 0
    rest = range(1, k)
    for r in range(0, k - 1):
        for extra in itertools.combinations(rest, r):
            a = (0,) + extra
            b = tuple(i for i in range(k) if i not in a)
            yield a, b


def test_2_partition_suite(capsys):
    start = time.perf_counter()
    failures, partitions, splits, sweeps, worst = 0, 0, 0, 0, 0.0
    for a, _ in CORPUS:
        k = a.dim
        bundle = bundle_from_matrix(a)
        for blocks in _two_block_partitions(k):
            partitions += 1
            failures += not check_partition_bound(bundle, PartitionSpec(k, blocks)).holds
        # block-unitary route on every split point of the instance
        for l in range(1, k):
            blocks = (tuple(range(l)), tuple(range(l, k)))
            report = check_partition_bound(bundle, PartitionSpec(k, blocks))
            det_d, det_dp, _ = fischer_cross_check(a, l)
            err = max(abs(det_d - report.lhs), abs(det_dp - report.rhs)) / abs(report.rhs)
            worst = max(worst, err)
            splits += 1
            failures += err > 1e-10
        if k <= 5:
            sweeps += 1
            failures += sum(not r.holds for r in sweep_partitions(bundle))
    elapsed = time.perf_counter() - start
    verdict(capsys, 2, failures == 0 and elapsed < 60,
            f"{partitions} two-block partitions, {splits} split cross-checks "
            f"(worst relative gap {worst:.1e}), {sweeps} full sweeps, {failures} failures, "
            f"{elapsed:.1f}s (limit 60s)")


def test_3_equality_iff_block_diagonal(capsys):
    rng = np.random.default_rng(3)
    eps = 1e-3
    kernels = equalities = flips = perturbations = errors = 0
    for _ in range(100):
        sizes = list(rng.integers(1, 4, size=rng.integers(2, 4)))
        a = block_diagonal_psd(rng, sizes) + 0.1 * np.eye(sum(sizes))
        edges = np.cumsum([0] + sizes)
        blocks = tuple(tuple(range(lo, hi)) for lo, hi in zip(edges[:-1], edges[1:]))
        k = sum(sizes)
        partition = PartitionSpec(k, blocks)
        try:
            base = check_partition_bound(bundle_from_matrix(HermitianMatrix(a)), partition)
            kernels += 1
            equalities += base.is_equality
            label = np.repeat(np.arange(len(sizes)), sizes)
            for i, j in itertools.combinations(range(k), 2):
                if label[i] == label[j]:
                    continue
                p = a.copy()
                p[i, j] += eps
                p[j, i] += eps
                r = check_partition_bound(bundle_from_matrix(HermitianMatrix(p)), partition)
                perturbations += 1
                flips += (not r.is_equality) and r.slack > 0 and r.holds
        except Exception:
            errors += 1
    ok = errors == 0 and equalities == kernels == 100 and flips == perturbations
    verdict(capsys, 3, ok,
            f"{equalities}/100 block-diagonal kernels at equality, "
            f"{flips}/{perturbations} perturbations strictly below, {errors} exceptions")


def test_4_antibunching_curve(capsys):
    model = SpectralModel(omega0=3e15, coherence_time=TC, group_speed=1e6)
    n = 801
    rows = antibunching_curve(model, -4 * TC, 4 * TC, n)
    tau = np.array([t for t, _ in rows])
    g = np.array([v for _, v in rows])
    mid = n // 2
    at_tc = antibunching_curve(model, -TC, TC, 3)
    checks = {
        "zero at 0": tau[mid] == 0.0 and g[mid] == 0.0,
        ">=0.999 at 4Tc": g[0] >= 0.999 and g[-1] >= 0.999,
        "1-exp(-pi) at Tc": all(abs(v - (1 - math.exp(-math.pi))) <= 1e-12
                                for v in (at_tc[0][1], at_tc[2][1])),
        "even": np.array_equal(g, g[::-1]),
        "monotone": bool(np.all(np.diff(g[mid:]) >= 0) and np.all(np.diff(g[:mid + 1]) <= 0)),
    }
    verdict(capsys, 4, all(checks.values()),
            ", ".join(f"{k}: {'ok' if v else 'no'}" for k, v in checks.items()))


def test_5_coherence_time(capsys):
    tc = coherence_time_from_bandwidth(0.2)
    verdict(capsys, 5, 2.0e-14 <= tc <= 2.1e-14, f"Tc(0.2 eV) = {tc:.4e} s")


def _psd_kernel(rng, n, top):
    b = ginibre(rng, n, n)
    a = b.conj().T @ b
    return SamplingKernel.from_matrix(top * a / np.linalg.eigvalsh(a)[-1])


def test_6_sampler_vs_exact(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    n = 10**6
    tvs = []
    for seed in (61, 62):
        kernel = _psd_kernel(rng, 4, 0.95)
        counts = Counter(s.occupied_bins for s in sample_many(kernel, n, seed))
        exact = exact_subset_probabilities(kernel)
        tvs.append(0.5 * sum(abs(counts.get(s, 0) / n - p) for s, p in exact.items()))
    worst_z, subsets = 0.0, 0
    for seed in (63, 64):
        kernel = _psd_kernel(rng, 8, 0.9)
        occ = np.zeros((n, 8), dtype=bool)
        for row, s in enumerate(sample_many(kernel, n, seed)):
            occ[row, list(s.occupied_bins)] = True
        for size in (1, 2, 3):
            for subset in itertools.combinations(range(8), size):
                p = determinant(kernel.K.submatrix(subset))
                hat = occ[:, list(subset)].all(axis=1).mean()
                se = math.sqrt(max(p * (1 - p), 1e-300) / n)
                worst_z = max(worst_z, abs(hat - p) / se)
                subsets += 1
    elapsed = time.perf_counter() - start
    ok = max(tvs) <= 0.005 and worst_z <= 4 and elapsed < 120
    verdict(capsys, 6, ok,
            f"TV {', '.join(f'{t:.4f}' for t in tvs)} (limit 0.005); "
            f"{subsets} inclusion probabilities, max |z| {worst_z:.2f} (limit 4); "
            f"{elapsed:.1f}s (limit 120s)")


def test_7_empirical_antibunching(capsys):
    start = time.perf_counter()
    dt = TC / 8
    model = SpectralModel(omega0=3e15, coherence_time=TC, group_speed=1e6, intensity=0.05 / dt)
    grid = GridSpec(n_bins=64, bin_width=dt)
    kernel = build_sampling_kernel(model, DetectorConfig(eta=1.0, area=1.0, bin_width=dt), grid)
    h = estimate_g2(kernel, 10**5, 42)
    analytic = analytic_g2(model, grid)
    z = np.abs(h.g2_estimate - analytic) / h.stderr
    gap = (h.g2_estimate[31] - h.g2_estimate[0]) / math.hypot(h.stderr[0], h.stderr[31])
    elapsed = time.perf_counter() - start
    ok = gap > 5 and z.max() <= 3 and elapsed < 300
    verdict(capsys, 7, ok,
            f"g2(1) = {h.g2_estimate[0]:.4f}, g2(32) = {h.g2_estimate[31]:.4f}, "
            f"separation {gap:.1f} sigma (need > 5), max |z| vs analytic {z.max():.2f} "
            f"(limit 3), {elapsed:.1f}s (limit 300s)")


def test_8_cli_determinism(capsys, tmp_path):
    dt = TC / 8
    model = {"shape": "gaussian", "omega0_rad_per_s": 3e15, "coherence_time_s": TC,
             "group_speed_m_per_s": 1e6, "intensity_per_m2_s": 0.05 / dt}
    (tmp_path / "model.json").write_text(json.dumps(model))
    (tmp_path / "det.json").write_text(json.dumps({"eta": 1, "area_m2": 1, "bin_width_s": dt}))
    pts = [{"r": [0, 0, 0], "t": t * TC} for t in (0, 0.3, 2, 2.4, 5)]
    (tmp_path / "pts.json").write_text(json.dumps(pts))
    m, p, d = (str(tmp_path / f) for f in ("model.json", "pts.json", "det.json"))
    commands = {
        "curve": ["curve", "--model", m],
        "check": ["check", "--model", m, "--points", p, "--partition", "1,2|3,5|4"],
        "sweep": ["sweep", "--model", m, "--points", p],
        "crosscheck": ["crosscheck", "--model", m, "--points", p],
        "coherence-time": ["coherence-time", "0.2eV", "--model", m],
        "sample": ["sample", "--model", m, "--detector", d, "--grid", "n=32",
                   "--n-samples", "2000", "--seed", "5"],
    }
    differing = []
    for name, argv in commands.items():
        outputs = []
        for rep in range(2):
            out = tmp_path / f"{name}-{rep}.out"
            code = cli_main(argv + ["--out", str(out)])
            outputs.append((code, out.read_bytes()))
        text = outputs[0][1].decode().lower()
        if outputs[0] != outputs[1] or outputs[0][0] != 0 or "timestamp" in text:
            differing.append(name)
    verdict(capsys, 8, not differing,
            f"{len(commands)} commands re-run, byte-identical except: {differing or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
