import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asinlab.exceptions import DomainError, InsufficientDataError
from asinlab.interpreter import (
    DecisionKind,
    DecisionLevel,
    NeymanPearsonInterpreter,
    ScalarCalibrator,
    ThresholdCal,
    calibrate_threshold,
    fit_affine,
    interpret_binary,
    interpret_scalar,
    midpoint_quantile,
    wilson_interval,
    write_decisions_csv,
)
from asinlab.metrics import roc_curve


def _cal(threshold):
    return ThresholdCal(threshold, 0.05, 100)


def test_tie_decides_present():
    d = interpret_binary(2.0, _cal(2.0))
    assert d.present is True and d.p_present == 0.5
    assert d.kind is DecisionKind.BINARY and d.estimate is None


def test_sigmoid_saturation():
    assert interpret_binary(50.0, _cal(0.0)).p_present >= 1 - 1e-20


def test_below_threshold_hand_value():
    d = interpret_binary(0.0, _cal(1.0))
    assert d.present is False
    assert d.p_present == pytest.approx(0.2689414213699951, abs=1e-12)


def test_non_finite_score_rejected():
    with pytest.raises(DomainError):
        interpret_binary(float("nan"), _cal(0.0))


@settings(max_examples=100)
@given(a=st.floats(-1e3, 1e3), b=st.floats(-1e3, 1e3), t=st.floats(-10, 10))
def test_binary_monotone(a, b, t):
    lo, hi = sorted((a, b))
    dl, dh = interpret_binary(lo, _cal(t)), interpret_binary(hi, _cal(t))
    assert dl.present <= dh.present
    assert dl.p_present <= dh.p_present


def test_p_present_strictly_increasing_on_grid():
    p = [interpret_binary(s, _cal(0.0)).p_present for s in np.linspace(-20, 20, 401)]
    assert np.all(np.diff(p) > 0)


def test_decision_level_fields_exclusive():
    with pytest.raises(DomainError):
        DecisionLevel(DecisionKind.BINARY, present=True, p_present=0.5, estimate=1.0)
    with pytest.raises(DomainError):
        DecisionLevel(DecisionKind.SCALAR, present=True, estimate=1.0)
    with pytest.raises(DomainError):
        DecisionLevel(DecisionKind.BINARY, present=True, p_present=1.5)


def test_median_at_half():
    scores = np.concatenate([-np.arange(1, 31.0), np.arange(1, 31.0)])
    cal = calibrate_threshold(scores, 0.5)
    assert cal.threshold == pytest.approx(np.median(scores))
    assert cal.achieved_pfp == 0.5


def test_four_point_order_statistics():
    cal_points = [1.0, 2.0, 3.0, 4.0]
    # brute force over thresholds between order statistics: only (3, 4] gives pfp 0.25
    valid = [t for t in np.linspace(0, 5, 501)
             if np.mean(np.array(cal_points) >= t) == 0.25]
    assert min(valid) > 3 and max(valid) <= 4
    assert midpoint_quantile(cal_points, 0.75) == 3.5
    assert 3 < 3.5 <= 4


def test_calibration_needs_twenty_scores():
    with pytest.raises(InsufficientDataError):
        calibrate_threshold(np.arange(19.0), 0.1)
    with pytest.raises(DomainError):
        calibrate_threshold(np.arange(40.0), 1.0)


def test_gaussian_threshold():
    scores = np.random.default_rng(0).standard_normal(100_000)
    cal = calibrate_threshold(scores, 0.05)
    assert cal.threshold == pytest.approx(1.6448536269514722, abs=0.03)
    assert cal.achieved_pfp == pytest.approx(0.05, abs=0.005)
    lo, hi = cal.achieved_ci
    assert lo <= cal.achieved_pfp <= hi


@settings(max_examples=100, deadline=None)
@given(n=st.integers(20, 400), pfp=st.floats(0.01, 0.99), seed=st.integers(0, 2**32))
def test_calibration_within_one_order_statistic(n, pfp, seed):
    scores = np.random.default_rng(seed).normal(size=n)
    cal = calibrate_threshold(scores, pfp)
    alarms = int(np.sum(scores >= cal.threshold))
    assert abs(alarms - pfp * n) <= 1.0 + 1e-9


def test_roc_pfp_non_increasing():
    rng = np.random.default_rng(2)
    s = np.round(rng.normal(size=300), 1)
    t = (rng.random(300) < 0.5).astype(int)
    thr, pfp, pd = roc_curve(s, t)
    assert np.all(np.diff(thr) > 0)
    assert np.all(np.diff(pfp) <= 0) and np.all(np.diff(pd) <= 0)


def test_wilson_interval_known_value():
    # 5 of 10 at z = 1.96: centre 0.5, half-width 1.96*sqrt(0.025+0.0096)/1.384
    lo, hi = wilson_interval(5, 10)
    assert lo == pytest.approx(0.2366, abs=1e-4) and hi == pytest.approx(0.7634, abs=1e-4)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0


@pytest.mark.parametrize("a,c,score,expected", [(1, 0, 4.2, 4.2), (0, 5, -7.0, 5.0), (2, -1, 3, 5)])
def test_interpret_scalar(a, c, score, expected):
    d = interpret_scalar(score, a, c)
    assert d.estimate == expected and d.present is None


def test_fit_affine_recovers_line():
    s = np.linspace(0, 10, 30)
    a, c = fit_affine(s, 3 * s - 2)
    assert a == pytest.approx(3) and c == pytest.approx(-2)


def test_calibration_file_round_trip(tmp_path):
    cal = calibrate_threshold(np.random.default_rng(1).normal(size=200), 0.1)
    cal.save(tmp_path / "cal.txt")
    assert len((tmp_path / "cal.txt").read_text().splitlines()) == 3
    back = ThresholdCal.load(tmp_path / "cal.txt")
    assert (back.threshold, back.target_pfp, back.n_calibration) == (
        cal.threshold, cal.target_pfp, cal.n_calibration)


def test_decisions_csv(tmp_path):
    write_decisions_csv(tmp_path / "d.csv", [0.0, 1.0, 2.0], _cal(1.0))
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "score,present,p_present"
    assert lines[1].startswith("0.0,0,") and lines[2] == "1.0,1,0.5"


def test_estimators():
    from sklearn.base import clone

    rng = np.random.default_rng(0)
    scores = np.concatenate([rng.normal(size=500), rng.normal(3, 1, size=500)])
    y = np.repeat([0, 1], 500)
    npi = NeymanPearsonInterpreter(target_pfp=0.1).fit(scores, y)
    assert clone(npi).get_params() == {"target_pfp": 0.1}
    assert np.mean(npi.predict(scores[:500])) == pytest.approx(0.1, abs=0.01)
    p = npi.predict_proba([npi.threshold_])
    np.testing.assert_allclose(p, [[0.5, 0.5]])
    sc = ScalarCalibrator().fit(scores, 2 * scores + 1)
    np.testing.assert_allclose(sc.predict([1.0]), [3.0])
