"""End-to-end scenario experiments driven by a :class:`RunConfig`.

Seeds fan out from ``run.master_seed`` through fixed stream indices:
scene generation 1, sensor noise 2, ASIN design 3, training init 4,
resolution Monte Carlo 5.
"""
import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .correlator import CorrelatorKind, CorrelatorModel, TrainConfig, train_correlator
from .exceptions import ConfigurationError, DimensionError
from .interpreter import (
    ThresholdCal,
    calibrate_threshold,
    fit_affine,
    write_decisions_csv,
)
from .io import fmt, read_matrix, write_matrix
from .metrics import EvalSummary, accuracy_confusion, pearson_r, roc_auc, roc_curve, write_summary_csv
from .resolution import (
    CHANNEL_PRESETS,
    Detector,
    ScenarioChannel,
    delta_cr,
    delta_np,
    linear_gain_channel,
)
from .scenegen import (
    ScenarioConfig,
    gen_sludge_scene,
    gen_tumor_scene,
    read_scenes_csv,
    scenes_to_arrays,
    write_scenes_csv,
)
from .sensing import (
    AsinMatrix,
    MeasurementProcess,
    crude_process,
    design_asin_matrix,
    identity_process,
    measure_batch,
)

SCENES_TRAIN = "scenes_train.csv"
SCENES_TEST = "scenes_test.csv"
SENSOR_FILE = "sensor_matrix.txt"
ASIN_FILE = "asin_matrix.txt"
MODEL_FILE = "model.txt"
THRESHOLD_FILE = "calibration.txt"
AFFINE_FILE = "scalar_calibration.txt"
MANIFEST = "manifest.txt"


@dataclass
class TrainedStack:
    proc: MeasurementProcess
    asin: AsinMatrix
    model: CorrelatorModel
    threshold: ThresholdCal | None = None
    affine: tuple[float, float] | None = None
    loss_curve: np.ndarray | None = None


def scenario_config(cfg):
    s = cfg.section("scenario")
    try:
        return ScenarioConfig(n=s["n"], clutter_level=s["clutter_level"],
                              signature_amplitude=s["signature_amplitude"],
                              profile_count=s["profile_count"], noise_free=s["noise_free"],
                              pulse_width=s["pulse_width"], target_lo=s["target_lo"],
                              target_hi=s["target_hi"])
    except ConfigurationError as exc:
        raise ConfigurationError(f"scenario.{exc.key}: {exc}", key=f"scenario.{exc.key}") from exc


def sensor_process(cfg):
    s = cfg.section("sensor")
    n = cfg["scenario.n"]
    if s["kind"] == "identity":
        return identity_process(n, s["noise_std"])
    if s["m"] > n:
        raise ConfigurationError(f"sensor.m = {s['m']} exceeds scenario.n = {n}", key="sensor.m")
    return crude_process(n, s["m"], s["width"], s["noise_std"])


def _scene_seeds(cfg):
    total = cfg["run.n_train"] + cfg["run.n_test"]
    return [int(v) for v in _rng.derive_seeds(cfg["run.master_seed"], _rng.STREAM_SCENEGEN, total)]


def _noise_seeds(cfg):
    total = cfg["run.n_train"] + cfg["run.n_test"]
    return [int(v) for v in _rng.derive_seeds(cfg["run.master_seed"], _rng.STREAM_SENSOR, total)]


def _stage_seed(cfg, key, stream):
    if cfg[key] is not None:
        return cfg[key]
    return int(_rng.derive_seeds(cfg["run.master_seed"], stream, 1)[0])


def sludge_test_grid(cfg, count):
    """(volume, profile) for test scene ``i``: profiles cycle fastest, then volume steps."""
    steps, profiles = cfg["scenario.volume_steps"], cfg["scenario.profile_count"]
    volumes = np.linspace(0.0, cfg["scenario.volume_max"], steps)
    return [(float(volumes[(i // profiles) % steps]), i % profiles) for i in range(count)]


def generate_scenes(cfg):
    """Train and test scenes for the configured scenario."""
    name = cfg["scenario.name"]
    if name == "none":
        raise ConfigurationError("scenario.name = none has no scenes to generate",
                                 key="scenario.name")
    sc = scenario_config(cfg)
    seeds = _scene_seeds(cfg)
    n_train, n_test = cfg["run.n_train"], cfg["run.n_test"]
    if name == "tumor":
        scenes = [gen_tumor_scene(sc, i % 2, seeds[i]) for i in range(n_train + n_test)]
        return scenes[:n_train], scenes[n_train:]
    rng = _rng.substream(cfg["run.master_seed"], _rng.STREAM_SCENEGEN, 1)
    train_vol = rng.uniform(0.0, cfg["scenario.volume_max"], n_train)
    train = [gen_sludge_scene(sc, train_vol[i], i % sc.profile_count, seeds[i])
             for i in range(n_train)]
    test = [gen_sludge_scene(sc, v, p, seeds[n_train + i])
            for i, (v, p) in enumerate(sludge_test_grid(cfg, n_test))]
    return train, test


def _kind(cfg):
    return CorrelatorKind.CLASSIFIER if cfg["scenario.name"] == "tumor" else CorrelatorKind.REGRESSOR


def train_stack(cfg, train_scenes):
    """Sensor, ASIN design, correlator training and interpreter calibration."""
    proc = sensor_process(cfg)
    E, y = scenes_to_arrays(train_scenes)
    S = measure_batch(proc, E, _noise_seeds(cfg)[:len(train_scenes)])

    n_cal = math.ceil(cfg["interpret.calibration_fraction"] * len(train_scenes))
    fit_idx = slice(0, len(train_scenes) - n_cal)
    cal_idx = slice(len(train_scenes) - n_cal, None) if n_cal else fit_idx

    kind = _kind(cfg)
    asin = design_asin_matrix(cfg["asin.method"], S[fit_idx], y[fit_idx] if kind is
                              CorrelatorKind.CLASSIFIER else None, cfg["asin.k"],
                              _stage_seed(cfg, "asin.seed", _rng.STREAM_ASIN))
    Sp = S @ asin.P_asin.T
    tcfg = TrainConfig(cfg["train.epochs"], cfg["train.learning_rate"], cfg["train.l2"],
                       _stage_seed(cfg, "train.seed", _rng.STREAM_TRAIN))
    model, losses = train_correlator(Sp[fit_idx], y[fit_idx], tcfg, kind)
    scores = Sp @ model.w + model.b

    stack = TrainedStack(proc, asin, model, loss_curve=losses)
    if kind is CorrelatorKind.CLASSIFIER:
        null = scores[cal_idx][y[cal_idx] == 0]
        stack.threshold = calibrate_threshold(null, cfg["interpret.target_pfp"])
    else:
        stack.affine = fit_affine(scores[cal_idx], y[cal_idx])
    return stack


def score_test_scenes(cfg, stack, test_scenes):
    E, y = scenes_to_arrays(test_scenes)
    seeds = _noise_seeds(cfg)[cfg["run.n_train"]:cfg["run.n_train"] + len(test_scenes)]
    Sp = measure_batch(stack.proc, E, seeds, asin=stack.asin)
    if Sp.shape[1] != stack.model.k:
        raise DimensionError(f"model expects {stack.model.k} inputs, ASIN stage yields {Sp.shape[1]}")
    return Sp @ stack.model.w + stack.model.b, y


def evaluate(cfg, stack, test_scenes):
    """Returns ``(summary, scores, truths)`` on the test scenes."""
    scores, y = score_test_scenes(cfg, stack, test_scenes)
    if stack.threshold is not None:
        preds = (scores >= stack.threshold.threshold).astype(int)
        s = accuracy_confusion(preds, y.astype(int))
        auc = roc_auc(scores, y.astype(int)) if 0 < y.sum() < len(y) else None
        return EvalSummary(s.n, s.accuracy, s.tp, s.fp, s.tn, s.fn, auc), scores, y
    a, c = stack.affine
    return EvalSummary(len(y), pearson_r=pearson_r(y, a * scores + c)), scores, y


# -- resolution ----------------------------------------------------------------

def _preset_channel(cfg):
    name = cfg["resolution.channel"]
    sigma = cfg["resolution.sigma"] or 1.0
    if name == "linear":
        return linear_gain_channel(cfg["resolution.gain"], sigma)
    return CHANNEL_PRESETS[name](sigma=sigma)


def resolution_reports(cfg, stack=None):
    """Compute the configured NP and/or CR reports; returns ``{kind: report}``."""
    r = cfg.section("resolution")
    seed, sigma_seed, null_seed = (
        int(v) for v in _rng.derive_seeds(cfg["run.master_seed"], _rng.STREAM_RESOLUTION, 3))
    if r["channel"] == "pipeline":
        if stack is None:
            raise ConfigurationError("pipeline resolution needs a trained model",
                                     key="resolution.channel")
        if cfg["scenario.name"] == "none":
            raise ConfigurationError("pipeline resolution needs a scenario", key="scenario.name")
        channel = ScenarioChannel(cfg["scenario.name"], scenario_config(cfg), stack.proc,
                                  stack.asin, sigma=r["sigma"], theta_ref=r["theta0"],
                                  sigma_seed=sigma_seed)
        detector = None
        if stack.threshold is not None:
            detector = Detector(stack.threshold.threshold, stack.model)
    else:
        channel = _preset_channel(cfg)
        null = channel.sample_batch(r["theta0"], r["n_mc"], null_seed)[:, 0]
        detector = Detector(calibrate_threshold(null, cfg["interpret.target_pfp"]).threshold)

    out = {}
    if r["kind"] in ("np", "both"):
        if detector is None:
            raise ConfigurationError("NP resolution needs a binary detector (tumor scenario)",
                                     key="resolution.kind")
        out["np"] = delta_np(detector, channel, r["theta0"], r["epsilon"], r["delta_max"],
                             r["n_grid"], r["n_mc"], seed)
    if r["kind"] in ("cr", "both"):
        out["cr"] = delta_cr(channel, r["theta0"], r["epsilon"], r["delta_max"],
                             r["n_grid"], r["n_samples"], r["h"], seed, r["n_inner"])
    return out


# -- artifacts -----------------------------------------------------------------

def save_stack(out, stack):
    out = Path(out)
    write_matrix(out / SENSOR_FILE, stack.proc.P)
    stack.asin.save(out / ASIN_FILE)
    stack.model.save(out / MODEL_FILE)
    if stack.threshold is not None:
        stack.threshold.save(out / THRESHOLD_FILE)
    if stack.affine is not None:
        (out / AFFINE_FILE).write_text(f"{fmt(stack.affine[0])}\n{fmt(stack.affine[1])}\n")
    if stack.loss_curve is not None:
        with open(out / "loss_curve.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss"])
            for i, v in enumerate(stack.loss_curve):
                w.writerow([i, fmt(v)])


def load_stack(cfg, model_path):
    """Rebuild a trained stack from a model file and its sibling artifacts."""
    model_path = Path(model_path)
    d = model_path.parent
    model = CorrelatorModel.load(model_path)
    proc = MeasurementProcess(read_matrix(d / SENSOR_FILE), cfg["sensor.noise_std"]) \
        if (d / SENSOR_FILE).exists() else sensor_process(cfg)
    asin = AsinMatrix.load(d / ASIN_FILE, cfg["asin.method"])
    stack = TrainedStack(proc, asin, model)
    if (d / THRESHOLD_FILE).exists():
        stack.threshold = ThresholdCal.load(d / THRESHOLD_FILE)
    if (d / AFFINE_FILE).exists():
        a, c = (float(v) for v in (d / AFFINE_FILE).read_text().split())
        stack.affine = (a, c)
    if model.k != asin.P_asin.shape[0]:
        raise DimensionError(f"model has {model.k} weights but ASIN matrix has "
                             f"{asin.P_asin.shape[0]} rows")
    return stack


def write_scenes(out, train, test):
    write_scenes_csv(Path(out) / SCENES_TRAIN, train)
    write_scenes_csv(Path(out) / SCENES_TEST, test)


def read_test_scenes(out):
    return read_scenes_csv(Path(out) / SCENES_TEST)


def write_eval(out, summary, scores, truths, stack):
    out = Path(out)
    write_summary_csv(out / "eval.csv", summary)
    if stack.threshold is not None:
        write_decisions_csv(out / "decisions.csv", scores, stack.threshold)
        if 0 < truths.sum() < len(truths):
            thr, pfp, pd = roc_curve(scores, truths.astype(int))
            with open(out / "roc.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["threshold", "pfp", "pd"])
                for row in zip(thr, pfp, pd):
                    w.writerow([fmt(v) for v in row])
    else:
        a, c = stack.affine
        with open(out / "estimates.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["truth", "score", "estimate"])
            for t, s in zip(truths, scores):
                w.writerow([fmt(t), fmt(s), fmt(a * s + c)])


def write_resolution(out, reports):
    for kind, rep in reports.items():
        rep.write_csv(Path(out) / f"resolution_{kind}.csv")


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out, cfg):
    """Record config hash, master seed and checksums of every artifact in ``out``."""
    out = Path(out)
    lines = [f"config_sha256 {cfg.digest()}", f"master_seed {cfg['run.master_seed']}"]
    for p in sorted(out.iterdir()):
        if p.is_file() and p.name != MANIFEST:
            lines.append(f"{sha256_file(p)}  {p.name}")
    (out / MANIFEST).write_text("\n".join(lines) + "\n")
