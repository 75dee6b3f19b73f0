import csv
import io
import json

import pytest

from twistl.assembly import assemble_L
from twistl.dirichlet import char_from_label
from twistl.errors import NonPrimitiveCharacter, TooLarge
from twistl.oracle import (
    CSV_HEADER,
    BenchConfig,
    direct_integral_L,
    first_primitive,
    nearest_divisor_split,
    reflection_residual,
    scaling_report,
    truncation_check,
)


def test_direct_integral_matches_engines(delta):
    chi = char_from_label(5, 3)
    ref = direct_integral_L(delta, chi, 0.5)
    for engine in ("naive", "fast"):
        assert abs(assemble_L(delta, chi, engine=engine).value - ref) <= 1e-6 * abs(ref)


def test_guards(delta):
    with pytest.raises(TooLarge):
        direct_integral_L(delta, first_primitive(100_003), 0.5)
    with pytest.raises(NonPrimitiveCharacter):
        direct_integral_L(delta, char_from_label(9, 8), 0.5)
    with pytest.raises(ValueError):
        truncation_check(delta, 16, 3.5, 2.5)


def test_truncation_and_reflection(delta):
    assert truncation_check(delta, 16, 2.5, 3.5) <= 1e-8
    for n in (1, 3, 5, 7, 9, 11, 13, 15):
        assert reflection_residual(delta, 16, n, 1 / 16) <= 1e-9


def test_nearest_divisor_split():
    assert nearest_divisor_split(36) == (2, 18)
    assert nearest_divisor_split(7776) == (4, 1944)
    assert nearest_divisor_split(97) == (1, 97)


def test_report_serialisation(delta):
    rep = scaling_report([(36, 2, 18), (60, 6, 10)], delta, BenchConfig(naive_limit=40))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 3
    assert rows[2][CSV_HEADER.index("naive_re")] == ""  # above naive_limit
    data = json.loads(rep.to_json())
    assert data["passed"] and len(data["rows"]) == 2
    assert rep.rows[0].rel_dev <= 1e-6
