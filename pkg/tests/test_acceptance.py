"""Acceptance criteria, one test each, run at the stated tolerances.

Each test prints a single ``ACCEPTANCE <id> PASS|FAIL`` line (visible
without ``-s``) before asserting.
"""
import time

import numpy as np
import pytest
from scipy.stats import norm

from asinlab import cli
from asinlab import experiment as ex
from asinlab.config import load_config, preset_names
from asinlab.correlator import loss_and_grad
from asinlab.interpreter import calibrate_threshold
from asinlab.metrics import read_summary_csv
from asinlab.resolution import (
    Detector,
    delta_cr,
    estimate_pfp,
    fisher_information,
    location_channel,
    quadratic_channel,
)
from asinlab.sensing import AsinMatrix, MeasurementProcess, apply_asin, apply_measurement


@pytest.fixture
def report(capsys):
    def emit(cid, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {cid} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def _timed_run(preset, out):
    t0 = time.perf_counter()
    code = cli.main(["run", "--config", preset, "--out", str(out)])
    return code, time.perf_counter() - t0


@pytest.fixture(scope="module")
def preset_stacks():
    stacks = {}
    for name in ("tumor", "sludge"):
        cfg = load_config(name)
        train, test = ex.generate_scenes(cfg)
        stacks[name] = (cfg, ex.train_stack(cfg, train), test)
    return stacks


def test_c1_tumor_accuracy(tmp_path, report, capsys):
    code, elapsed = _timed_run("tumor", tmp_path)
    capsys.readouterr()
    cfg = load_config("tumor")
    summary = read_summary_csv(tmp_path / "eval.csv")
    ok = (code == 0 and cfg["run.n_train"] == 200 and cfg["run.n_test"] == 500
          and cfg["asin.method"] == "fisher_discriminant"
          and summary.accuracy >= 0.95 and elapsed <= 10.0)
    report("C1", ok, f"tumor accuracy={summary.accuracy:.4f} (>=0.95) runtime={elapsed:.2f}s (<=10)")


def test_c2_sludge_pearson(tmp_path, report, capsys):
    code, elapsed = _timed_run("sludge", tmp_path)
    capsys.readouterr()
    cfg = load_config("sludge")
    summary = read_summary_csv(tmp_path / "eval.csv")
    grid = ex.sludge_test_grid(cfg, cfg["run.n_test"])
    n_vol = len({v for v, _ in grid})
    n_prof = len({p for _, p in grid})
    ok = (code == 0 and n_vol >= 20 and n_prof == 4 and cfg["run.n_test"] >= 200
          and summary.pearson_r >= 0.90 and elapsed <= 10.0)
    report("C2", ok, f"sludge r={summary.pearson_r:.4f} (>=0.90) volumes={n_vol} profiles={n_prof} "
                     f"n_test={cfg['run.n_test']} runtime={elapsed:.2f}s (<=10)")


def test_c3_location_fisher(report):
    t0 = time.perf_counter()
    est = fisher_information(location_channel(0.5), 0.0, 100_000, h=1e-3, seed=2024)
    elapsed = time.perf_counter() - t0
    ok = abs(est.value - 4.0) <= 0.4 and elapsed <= 5.0
    report("C3", ok, f"I={est.value:.4f} (4.0 +/- 10%) se={est.std_error:.3f} runtime={elapsed:.3f}s (<=5)")


def test_c4_np_threshold(report):
    rng = np.random.Generator(np.random.PCG64(4))
    cal = calibrate_threshold(rng.standard_normal(100_000), 0.05)
    fresh = estimate_pfp(Detector(cal.threshold), location_channel(1.0), 0.0, 100_000, 44)
    ok = (abs(cal.threshold - norm.ppf(0.95)) <= 0.03 and abs(cal.achieved_pfp - 0.05) <= 0.005
          and abs(fresh.value - 0.05) <= 0.005)
    report("C4", ok, f"threshold={cal.threshold:.4f} (1.6449 +/- 0.03) "
                     f"P_fp calibration={cal.achieved_pfp:.4f} fresh={fresh.value:.4f} (0.05 +/- 0.005)")


def test_c5_quadratic_cr(report):
    cfg = load_config("quadratic")
    rep = delta_cr(quadratic_channel(cfg["resolution.sigma"]), cfg["resolution.theta0"],
                   cfg["resolution.epsilon"], cfg["resolution.delta_max"], cfg["resolution.n_grid"],
                   cfg["resolution.n_samples"], cfg["resolution.h"], seed=cfg["run.master_seed"])
    ok = (cfg["resolution.sigma"] == 1.0 and cfg["resolution.theta0"] == 1.0
          and cfg["resolution.epsilon"] == 0.5 and abs(rep.delta - 0.0607) <= 2 * rep.step)
    report("C5", ok, f"delta_CR={rep.delta:.4f} (0.0607 within 2 x step={rep.step:.4f})")


def _fd_rel_err(w, b, X, y, kind, l2, h=1e-6):
    _, gw, gb = loss_and_grad(w, b, X, y, kind, l2)
    analytic = np.append(gw, gb)
    theta = np.append(w, b)
    fd = np.empty_like(theta)
    for j in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        fd[j] = (loss_and_grad(up[:-1], up[-1], X, y, kind, l2)[0]
                 - loss_and_grad(dn[:-1], dn[-1], X, y, kind, l2)[0]) / (2 * h)
    return np.linalg.norm(analytic - fd) / max(np.linalg.norm(fd), 1e-12)


def _non_increasing(losses, ulps=8):
    # once converged the loss is flat; the float mean then jitters by an ulp or two
    losses = np.asarray(losses)
    slack = ulps * np.finfo(float).eps * np.abs(losses[:-1])
    return bool(np.all(np.diff(losses) <= slack) and losses[-1] < losses[0])


def test_c6_gradients_and_monotone_loss(report, preset_stacks):
    rng = np.random.Generator(np.random.PCG64(6))
    worst = 0.0
    for i in range(20):
        kind = "classifier" if i % 2 == 0 else "regressor"
        n, k = rng.integers(5, 40), rng.integers(1, 8)
        X = rng.standard_normal((n, k))
        y = rng.integers(0, 2, n).astype(float) if kind == "classifier" else rng.standard_normal(n)
        w, b = rng.standard_normal(k), float(rng.standard_normal())
        worst = max(worst, _fd_rel_err(w, b, X, y, kind, float(rng.uniform(0, 0.1))))
    monotone = {name: _non_increasing(stack.loss_curve) for name, (_, stack, _) in preset_stacks.items()}
    ok = worst <= 1e-5 and all(monotone.values())
    report("C6", ok, f"max gradient rel err={worst:.2e} (<=1e-5) monotone loss={monotone}")


def test_c7_reproducible_checksums(tmp_path, report, capsys):
    results = {}
    for name in preset_names():
        cmd = "run" if load_config(name)["scenario.name"] != "none" else "resolution"
        for rep in ("a", "b"):
            assert cli.main([cmd, "--config", name, "--out", str(tmp_path / name / rep)]) == 0
        a = (tmp_path / name / "a" / "manifest.txt").read_bytes()
        b = (tmp_path / name / "b" / "manifest.txt").read_bytes()
        results[name] = a == b and a.count(b"\n") > 2
    capsys.readouterr()
    report("C7", all(results.values()), f"byte-identical manifests per preset: {results}")


def test_c8_asin_composition_and_linearity(report):
    rng = np.random.Generator(np.random.PCG64(8))
    exact, worst = True, 0.0
    for _ in range(100):
        n, m = rng.integers(2, 30), rng.integers(1, 30)
        k = rng.integers(1, m + 1)
        proc = MeasurementProcess(rng.standard_normal((m, n)), float(rng.uniform(0, 1)))
        asin = AsinMatrix(rng.standard_normal((k, m)))
        e = rng.standard_normal(n)
        seed = int(rng.integers(0, 2**63))
        exact &= np.array_equal(apply_asin(asin, proc, e, seed),
                                asin.P_asin @ apply_measurement(proc, e, seed))
        clean = MeasurementProcess(proc.P, 0.0)
        e2 = rng.standard_normal(n)
        a, c = rng.standard_normal(2)
        lhs = apply_measurement(clean, a * e + c * e2, 0)
        rhs = a * apply_measurement(clean, e, 0) + c * apply_measurement(clean, e2, 0)
        scale = np.abs(a) * np.abs(proc.P) @ np.abs(e) + np.abs(c) * np.abs(proc.P) @ np.abs(e2)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(scale, 1e-300))))
    ok = exact and worst <= 1e-9
    report("C8", ok, f"apply_asin exact={exact} linearity max rel err={worst:.2e} (<=1e-9)")
