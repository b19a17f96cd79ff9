import json

import numpy as np
import pytest

from zerofilter.reporting import (ExperimentReport, config_hash, fit_rate, load_report, persist_report,
                                  report_csv, report_json)


def sample_report():
    rep = ExperimentReport("demo", {"alpha_list": [0.1, 0.05], "N": 64})
    rep.rows = [{"alpha": 0.1, "value": 1 / 3}, {"alpha": 0.05, "value": 2 / 3}]
    rep.fits["alpha"] = fit_rate([1, 2, 4, 8], [3, 12, 48, 192])
    rep.gate("value small", True, 0.5, 1.0, frozen=True)
    rep.stamp("start")
    return rep


class TestFitRate:
    def test_exact_power_law(self):
        x = np.array([0.1, 0.05, 0.025, 0.0125])
        fit = fit_rate(x, 3 * x**2)
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(3), abs=1e-12)
        assert fit.count == 4 and fit.dropped is None
        assert fit.ci_low == pytest.approx(2.0) and fit.ci_high == pytest.approx(2.0)

    def test_drops_outlier_at_largest_x(self):
        x = np.logspace(-3, -1, 8)
        y = x**2 * (1 + 1e-3 * np.sin(np.arange(8)))
        y[-1] *= 50
        fit = fit_rate(x, y)
        assert fit.dropped == pytest.approx(x[-1])
        assert fit.slope == pytest.approx(2.0, abs=1e-2)

    def test_bootstrap_seeded(self):
        x = np.logspace(-2, 0, 6)
        y = x**1.5 * np.exp(0.05 * np.cos(7 * np.arange(6)))
        assert fit_rate(x, y, seed=3) == fit_rate(x, y, seed=3)

    def test_nonpositive_points_skipped(self):
        fit = fit_rate([1, 2, 3], [0, 0, 0])
        assert fit.count == 0 and np.isnan(fit.slope)


class TestPersistence:
    def test_csv_shape(self, tmp_path):
        rep = sample_report()
        path = tmp_path / "r.csv"
        persist_report(rep, path)
        lines = path.read_text().splitlines()
        assert len(lines) == len(rep.rows) + 1
        assert lines[0] == "alpha,value"
        assert lines[1] == "0.10000000000000001,0.33333333333333331"

    def test_json_round_trip(self, tmp_path):
        rep = sample_report()
        path = tmp_path / "r.json"
        persist_report(rep, path, "json")
        back = load_report(path)
        assert back.to_dict(False) == json.loads(report_json(rep))
        assert back.fits == rep.fits and back.gates == rep.gates

    def test_timestamps_excluded_by_default(self):
        a, b = sample_report(), sample_report()
        b.timestamps["start"] = "another time"
        assert report_json(a) == report_json(b)
        assert "timestamps" in report_json(a, include_timestamps=True)

    def test_unwritable_path(self, tmp_path):
        path = tmp_path / "missing" / "r.csv"
        with pytest.raises(OSError, match="missing"):
            persist_report(sample_report(), path)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            persist_report(sample_report(), tmp_path / "r.x", "xml")

    def test_config_hash_canonical(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_summary_and_passed(self):
        rep = sample_report()
        assert rep.passed
        rep.gate("too big", False, 3.0, 1.0)
        assert not rep.passed
        assert "FAIL too big" in rep.summary()
        assert report_csv(rep).count("\n") == 3
