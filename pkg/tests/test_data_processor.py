import json
from fractions import Fraction

import mpmath
import pytest

from app.analytic.certificate import SubcriticalityCertificate
from app.combinatorics.blocks import SandwichRow
from app.combinatorics.composition import GrammarCheckRow
from app.oracle.census import CENSUS_FIELDS, CensusRow
from app.report_components.data_processor import (
    GRAMMAR_FIELDS,
    SANDWICH_FIELDS,
    census_table_rows,
    certificate_record,
    constants_record,
    format_value,
    grammar_table_rows,
    render_table,
    sandwich_table_rows,
    to_csv,
    to_json,
)


@pytest.fixture
def sample_census_rows():
    """Census rows for k = 1 on three and four vertices"""
    return [
        CensusRow(n=3, k=1, count_A=1, count_Z=8, count_B=1, count_Gk_connected=4, count_Gk=8),
        CensusRow(n=4, k=1, count_A=9, count_Z=63, count_B=10, count_Gk_connected=38, count_Gk=64),
    ]


class TestFormatValue:
    """Tests for format_value"""

    @pytest.mark.parametrize("value", [True, False, None, 7, 10**40, "text"])
    def test_passthrough(self, value):
        assert format_value(value) == value

    def test_float_rounding(self):
        assert format_value(0.1 + 0.2) == 0.3
        assert format_value(1 / 3) == 0.333333333333

    def test_fraction(self):
        assert format_value(Fraction(1, 3)) == 0.333333333333

    def test_huge_fraction_stays_exact_in_digits(self):
        """Beyond the float range the value is printed by mpmath"""
        value = format_value(Fraction(10**400, 3))
        assert isinstance(value, str)
        assert value.startswith("3.33333333333") and "e+399" in value

    def test_mpf(self):
        assert format_value(mpmath.mpf(2) / 3) == 0.666666666667
        assert format_value(mpmath.mpf(0)) == 0.0

    def test_tiny_mpf_is_not_zeroed(self):
        value = format_value(mpmath.mpf("1e-400"))
        assert isinstance(value, str)
        assert "e-400" in value

    @pytest.mark.parametrize(
        "value, expected",
        [(float("inf"), "inf"), (float("-inf"), "-inf"), (float("nan"), "nan"), (mpmath.inf, "inf")],
    )
    def test_non_finite(self, value, expected):
        assert format_value(value) == expected


class TestSerialisation:
    """Tests for to_csv, to_json and render_table"""

    def test_csv(self):
        text = to_csv(("a", "b", "c"), [(1, 0.5, True), (None, Fraction(1, 4), False)])
        assert text == "a,b,c\n1,0.5,true\n,0.25,false\n"

    def test_csv_big_integers(self):
        text = to_csv(("n", "count"), [(30, 30**28)])
        assert text.splitlines()[1] == f"30,{30**28}"

    def test_json(self):
        data = json.loads(to_json({"x": Fraction(1, 2), "y": [mpmath.inf, 3], "z": {"w": None}}))
        assert data == {"x": 0.5, "y": ["inf", 3], "z": {"w": None}}

    def test_json_ends_with_newline(self):
        assert to_json([]).endswith("\n")

    def test_render_table_json(self):
        rows = json.loads(render_table(("n", "v"), [(1, 2.0), (2, 3.5)], "json"))
        assert rows == [{"n": 1, "v": 2.0}, {"n": 2, "v": 3.5}]

    def test_render_table_csv(self):
        assert render_table(("n",), [(1,), (2,)], "csv") == "n\n1\n2\n"

    def test_render_table_length_mismatch(self):
        with pytest.raises(ValueError):
            render_table(("n", "v"), [(1,)], "json")


class TestRowBuilders:
    """Tests for the table row builders"""

    def test_census_rows(self, sample_census_rows):
        rows = census_table_rows(sample_census_rows)
        assert len(rows[0]) == len(CENSUS_FIELDS)
        assert rows[1] == (4, 1, 9, 63, 10, 38, 64)

    def test_census_csv(self, sample_census_rows):
        text = to_csv(CENSUS_FIELDS, census_table_rows(sample_census_rows))
        assert text.splitlines()[0] == "n,k,count_A,count_Z,count_B,count_Gk_connected,count_Gk"
        assert text.splitlines()[2] == "4,1,9,63,10,38,64"

    def test_sandwich_rows(self):
        row = SandwichRow(n=4, raw_lower=42, lower=7, oracle_count=None, upper=100)
        assert sandwich_table_rows([row]) == [(4, 42, 7, None, 100)]
        assert to_csv(SANDWICH_FIELDS, sandwich_table_rows([row])).splitlines()[1] == "4,42,7,,100"

    def test_grammar_rows(self):
        row = GrammarCheckRow(n=3, grammar_connected=4, oracle_connected=4, grammar_all=8, oracle_all=8)
        assert grammar_table_rows([row]) == [(3, 4, 4, 8, 8, True)]
        assert len(GRAMMAR_FIELDS) == 6


class TestRecords:
    def test_constants_record(self):
        record = constants_record(4)
        assert record["k"] == 4
        assert record["eta"] == pytest.approx(0.02354, abs=5e-6)
        assert record["beta_check"] is True
        assert record["tail_constant"] == pytest.approx(record["c_upper"] / record["gamma_minus_three_halves"])

    def test_constants_record_k1(self):
        assert constants_record(1)["beta_check"] is False

    def test_certificate_record(self):
        cert = SubcriticalityCertificate(
            k=2, eta=0.1, tau=None, rho=None, cdot_at_rho=None, margin=None, relative_margin=None
        )
        record = certificate_record(cert)
        assert record["valid"] is False
        assert record["orders"] == []
        assert json.loads(to_json(record))["tau"] is None
