"""Self-check suite reports: shape, serializability, aggregation."""

import json

import pytest

from tunnelsaddle import run_suite


def _assert_report_shape(report, expected_suites):
    assert set(report) == {"suites", "passed"}
    assert [s["suite"] for s in report["suites"]] == expected_suites
    for suite in report["suites"]:
        assert suite["checks"], suite["suite"]
        for check in suite["checks"]:
            assert isinstance(check["name"], str)
            assert isinstance(check["passed"], bool)
        assert suite["passed"] == all(c["passed"] for c in suite["checks"])
    json.dumps(report)  # every detail value must be serializable


class TestSingleSuites:
    def test_contour(self):
        report = run_suite("contour")
        _assert_report_shape(report, ["contour"])
        assert report["passed"]

    def test_trajectory(self):
        report = run_suite("trajectory")
        _assert_report_shape(report, ["trajectory"])
        assert report["passed"]

    def test_unknown_suite(self):
        with pytest.raises(KeyError, match="unknown suite"):
            run_suite("spectral")


class TestFullRun:
    def test_all_suites_pass(self):
        report = run_suite("all")
        _assert_report_shape(
            report, ["contour", "trajectory", "action", "oracle"])
        assert report["passed"]
