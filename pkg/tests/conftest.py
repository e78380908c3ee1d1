# tests/conftest.py
import os
import sys
from fractions import Fraction

import pytest

# ------------------------
# Ensure src/ is in sys.path
# ------------------------
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
SRC_PATH = os.path.join(PROJECT_ROOT, "src")
if SRC_PATH not in sys.path:
    sys.path.insert(0, SRC_PATH)
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from moment_core import ModuleParams  # noqa: E402

# ------------------------
# Reference parameter pairs
# ------------------------
SUBNORMAL_CASES = [(Fraction(1), Fraction(1)), (Fraction(3, 2), Fraction(25)), (Fraction(2), Fraction(2))]
NOT_SUBNORMAL_CASES = [(Fraction(15), Fraction(10)), (Fraction(6), Fraction(6)), (Fraction(8), Fraction(12))]
RUN_ID_PATTERN = r"\[{kind} [0-9a-f\-]{{36}}\]"


@pytest.fixture
def params_1_1():
    return ModuleParams(1, 1)


@pytest.fixture
def params_15_10():
    return ModuleParams(15, 10)


@pytest.fixture
def params_6_6():
    return ModuleParams(6, 6)


@pytest.fixture
def params_8_12():
    return ModuleParams(8, 12)


@pytest.fixture
def params_2_2():
    return ModuleParams(2, 2)


@pytest.fixture
def params_3_3():
    """Complex roots with -1 < Re(alpha) < 0: not subnormal, density changes sign."""
    return ModuleParams(3, 3)


@pytest.fixture(params=SUBNORMAL_CASES, ids=lambda p: f"{p[0]},{p[1]}")
def subnormal_params(request):
    return ModuleParams(*request.param)


@pytest.fixture(params=NOT_SUBNORMAL_CASES, ids=lambda p: f"{p[0]},{p[1]}")
def not_subnormal_params(request):
    return ModuleParams(*request.param)


@pytest.fixture
def golden_path(tmp_path):
    """Golden file location inside a temporary directory."""
    return str(tmp_path / "golden" / "reference_cases.json")
