import logging
import math
import re
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from classifier import classify_corollary
from errors import DomainError
from moment_core import ModuleParams
from scan import (
    BOUNDARY_FUNCTIONS,
    DEFAULT_WINDOW,
    GridAxis,
    RunConfig,
    boundary_curves,
    boundary_value,
    classify_point,
    parse_grid,
    record_from_row,
    run_scan,
    sign_predicate,
)
from reports import CSV_COLUMNS

JUNCTION = (3 + math.sqrt(3), 3 - math.sqrt(3))


# ---------- Grid parsing ----------

def test_axis_values_are_exact():
    axis = GridAxis.parse("1/2:2:1/2")
    assert axis.values() == [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)]


def test_decimal_axis():
    axis = GridAxis.parse("0.1:0.3:0.1")
    assert axis.values() == [Fraction(1, 10), Fraction(2, 10), Fraction(3, 10)]


def test_default_window():
    axis = GridAxis.parse(DEFAULT_WINDOW)
    values = axis.values()
    assert len(values) == 300
    assert values[0] == Fraction(1, 10) and values[-1] == 30


@pytest.mark.parametrize("text", ["0:1:1/2", "1:2", "1:2:0", "2:1:1", "a:b:c", "-1:2:1"])
def test_bad_axis_is_rejected(text):
    with pytest.raises(DomainError):
        GridAxis.parse(text)


def test_parse_grid():
    s1_axis, s2_axis = parse_grid("1:3:1,2:4:1")
    assert s1_axis.values() == [1, 2, 3]
    assert s2_axis.values() == [2, 3, 4]
    same = parse_grid("1:3:1")
    assert same[0] == same[1]
    with pytest.raises(DomainError):
        parse_grid("1:2:1,1:2:1,1:2:1")


# ---------- RunConfig ----------

def test_run_config_defaults():
    config = RunConfig()
    assert config.format == "json"
    assert config.mode == "rational"
    assert len(config.points()) == 300 * 300


@pytest.mark.parametrize("field, value", [
    ("m_cap", 0),
    ("n_cap", -1),
    ("jobs", 0),
    ("tol", 0.0),
    ("format", "png"),
    ("mode", "complex"),
])
def test_run_config_validation(field, value):
    with pytest.raises(ValidationError):
        RunConfig(**{field: value})


# ---------- Classification ----------

def test_sign_predicate_matches_the_verdict():
    grid = [Fraction(k, 3) for k in range(1, 40)]
    for s1 in grid:
        for s2 in grid[::3]:
            assert sign_predicate(s1, s2) is classify_corollary(ModuleParams(s1, s2)).subnormal


def test_classify_point_record():
    record = classify_point(Fraction(15), Fraction(10))
    assert record.s1 == "15" and record.s2 == "10"
    assert record.gamma == "-75"
    assert record.disc == "2025"
    assert not record.subnormal
    assert record.witness is None


def test_classify_point_with_witness_caps():
    record = classify_point(Fraction(15), Fraction(10), witness_caps=(100, 0))
    assert record.witness.startswith("D_75(0)")
    assert classify_point(Fraction(1), Fraction(1), witness_caps=(100, 0)).witness is None


def test_diagonal_flips_at_two():
    assert classify_point(Fraction(2), Fraction(2)).subnormal
    assert classify_point(Fraction(2), Fraction(2)).boundary_flag
    assert not classify_point(Fraction(201, 100), Fraction(201, 100)).subnormal
    assert classify_point(Fraction(199, 100), Fraction(199, 100)).subnormal


def test_real_mode_point():
    record = classify_point(Fraction(3, 2), Fraction(25), mode="real")
    assert record.subnormal
    assert record.s1 == "3/2"


def test_scan_is_independent_of_worker_count():
    s1_axis, s2_axis = parse_grid("1/2:4:1/2")
    serial = run_scan(RunConfig(s1_axis=s1_axis, s2_axis=s2_axis, jobs=1))
    parallel = run_scan(RunConfig(s1_axis=s1_axis, s2_axis=s2_axis, jobs=2))
    assert len(serial) == 64
    assert serial == parallel
    keys = [(Fraction(r.s1), Fraction(r.s2)) for r in serial]
    assert keys == sorted(keys)


def test_scan_logs_run_id(caplog):
    caplog.set_level(logging.INFO)
    s1_axis, s2_axis = parse_grid("1:2:1")
    run_scan(RunConfig(s1_axis=s1_axis, s2_axis=s2_axis), context={"run_id": "scan-1"})
    assert any("[Scan scan-1]" in r.message for r in caplog.records)
    run_scan(RunConfig(s1_axis=s1_axis, s2_axis=s2_axis))
    assert any(re.search(r"\[Scan [0-9a-f\-]{36}\]", r.message) for r in caplog.records)


def test_record_from_row():
    record = classify_point(Fraction(8), Fraction(12))
    row = dict(zip(CSV_COLUMNS, record.csv_row()))
    assert record_from_row(row) == record
    del row["branch"]
    with pytest.raises(DomainError):
        record_from_row(row)


@pytest.mark.slow
def test_full_window_agrees_with_sign_predicate():
    records = run_scan(RunConfig(jobs=4))
    assert len(records) == 90000
    for r in records:
        assert r.subnormal is sign_predicate(Fraction(r.s1), Fraction(r.s2))


# ---------- Boundary curves ----------

def test_curves_meet_at_the_triple_root_point():
    x, y = JUNCTION
    assert boundary_value("s=p", [x])[0] == pytest.approx(y, rel=1e-12)
    assert boundary_value("disc=0 lower", [x])[0] == pytest.approx(y, rel=1e-12)


def test_lower_discriminant_branch_through_three():
    assert boundary_value("disc=0 lower", [3.0])[0] == pytest.approx(9 / 8)
    assert boundary_value("disc=0 lower", [3.001])[0] == pytest.approx(9 / 8, rel=1e-2)
    assert np.isnan(boundary_value("disc=0 upper", [3.0])[0])


def test_three_s_line():
    assert boundary_value("3s=p", [6.0])[0] == pytest.approx(6.0)
    assert np.isnan(boundary_value("3s=p", [2.0])[0])


def test_points_on_the_curves_have_matching_invariants():
    x = np.linspace(4, 20, 9)
    s = x + boundary_value("s=p", x)
    p = x * boundary_value("s=p", x)
    assert np.allclose(s, p)
    y = boundary_value("disc=0 upper", x)
    gamma = 3 * (x + y) - x * y
    assert np.allclose(gamma ** 2, 24 * x * y, rtol=1e-9)


def test_boundary_curves_are_clipped():
    curves = boundary_curves(30.0, samples=500)
    assert set(curves) == set(BOUNDARY_FUNCTIONS)
    for cx, cy in curves.values():
        assert len(cx) == len(cy) > 0
        assert np.all(cy > 0) and np.all(cy <= 30.0)


def test_boundary_arguments_are_validated():
    with pytest.raises(DomainError):
        boundary_curves(0)
    with pytest.raises(DomainError):
        boundary_value("hyperbola", [1.0])
