from datetime import datetime

import pytest

from semlift.terms import Iri, Literal, XSD_BOOLEAN, XSD_DATE, XSD_DATETIME, XSD_DOUBLE, XSD_LONG, XSD_STRING
from semlift.values import (
    SECONDS_PER_DAY,
    duration_literal,
    duration_term_value,
    format_duration,
    lexical_for_db_value,
    number_literal,
    numeric_value,
    parse_duration,
    temporal_value,
)


class TestDurations:
    @pytest.mark.parametrize(
        "lexical,seconds",
        [
            ("P7D", 7 * SECONDS_PER_DAY),
            ("-P7D", -7 * SECONDS_PER_DAY),
            ("P2Y", 730 * SECONDS_PER_DAY),
            ("P1M", 30 * SECONDS_PER_DAY),
            ("PT1S", 1),
            ("P1DT2H3M4S", SECONDS_PER_DAY + 2 * 3600 + 3 * 60 + 4),
            ("PT0S", 0),
        ],
    )
    def test_parse(self, lexical, seconds):
        assert parse_duration(lexical) == seconds

    def test_two_years_equals_730_days(self):
        assert parse_duration("P2Y") == parse_duration("P730D") == 63_072_000

    @pytest.mark.parametrize("bad", ["", "P", "-P", "7D", "P7", "PT", "P1.5D", "PT0.5S"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_duration(bad)

    def test_format_canonical(self):
        assert format_duration(7 * SECONDS_PER_DAY) == "P7D"
        assert format_duration(-7 * SECONDS_PER_DAY) == "-P7D"
        assert format_duration(0) == "PT0S"
        assert format_duration(SECONDS_PER_DAY + 61) == "P1DT1M1S"

    def test_round_trip(self):
        for s in (0, 1, -1, 604800, 63072000, 90061):
            assert parse_duration(format_duration(s)) == s

    def test_duration_term_value(self):
        assert duration_term_value(duration_literal(604800)) == 604800
        assert duration_term_value(Literal("P7D", XSD_STRING)) is None
        assert duration_term_value(Iri("http://e.x/")) is None


class TestNumericValues:
    def test_integers_stay_exact(self):
        assert numeric_value(Literal("72", XSD_LONG)) == 72
        assert isinstance(numeric_value(Literal("72", XSD_LONG)), int)

    def test_doubles(self):
        assert numeric_value(Literal("1.7", XSD_DOUBLE)) == 1.7

    def test_non_numeric(self):
        assert numeric_value(Literal("x", XSD_STRING)) is None
        assert numeric_value(Literal("nope", XSD_LONG)) is None
        assert numeric_value(Iri("http://e.x/")) is None

    def test_number_literal_partition(self):
        assert number_literal(3).datatype != XSD_DOUBLE
        assert number_literal(3.0).datatype == XSD_DOUBLE
        with pytest.raises(TypeError):
            number_literal(True)


class TestTemporalValues:
    def test_date_promotes_to_midnight(self):
        assert temporal_value(Literal("2012-01-01", XSD_DATE)) == datetime(2012, 1, 1)

    def test_datetime(self):
        assert temporal_value(
            Literal("2012-01-01T10:30:00", XSD_DATETIME)
        ) == datetime(2012, 1, 1, 10, 30)

    def test_zoned_rejected(self):
        assert temporal_value(Literal("2012-01-01T10:30:00+02:00", XSD_DATETIME)) is None

    def test_garbage(self):
        assert temporal_value(Literal("not a date", XSD_DATE)) is None
        assert temporal_value(Literal("2012-01-01", XSD_STRING)) is None


class TestDbLexicals:
    def test_integers(self):
        assert lexical_for_db_value(72, XSD_LONG) == "72"
        assert lexical_for_db_value("72", XSD_LONG) is None
        assert lexical_for_db_value(True, XSD_LONG) is None

    def test_doubles(self):
        assert lexical_for_db_value(1.5, XSD_DOUBLE) == "1.5"
        assert lexical_for_db_value(2, XSD_DOUBLE) == "2.0"

    def test_booleans(self):
        assert lexical_for_db_value(1, XSD_BOOLEAN) == "true"
        assert lexical_for_db_value(0, XSD_BOOLEAN) == "false"
        assert lexical_for_db_value(2, XSD_BOOLEAN) is None

    def test_dates_validated(self):
        assert lexical_for_db_value("2012-01-01", XSD_DATE) == "2012-01-01"
        assert lexical_for_db_value("2012-13-40", XSD_DATE) is None
        assert lexical_for_db_value(20120101, XSD_DATE) is None

    def test_none_passes_through(self):
        assert lexical_for_db_value(None, XSD_LONG) is None
