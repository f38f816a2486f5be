from datetime import date, timedelta

import pytest

from semlift import kb
from semlift.kb import (
    ASSETS,
    RuleAsset,
    age_reference,
    asset_path,
    assets_fingerprint,
    bmi_reference,
    gate_reference,
    load_asset,
    load_rules,
    load_vocabulary,
    stage_assets,
    validate_assets,
)


class TestAssets:
    def test_every_asset_parses(self):
        for asset in ASSETS:
            doc = load_asset(asset.name)
            assert doc.rules, asset.name

    def test_shipped_set_validates_clean(self):
        assert validate_assets() == []

    def test_stage_partition_covers_all(self):
        staged = (
            stage_assets("conversion")
            + stage_assets("normalization")
            + stage_assets("analysis")
        )
        assert sorted(a.name for a in staged) == sorted(a.name for a in ASSETS)

    def test_unknown_asset_name(self):
        with pytest.raises(KeyError, match="unknown rule asset"):
            asset_path("convert_everything")

    def test_load_rules_mixes_names_and_paths(self, tmp_path):
        extra = tmp_path / "extra.n3"
        extra.write_text(
            "@prefix ex: <http://x/>.\n{?a ex:p ?b} => {?b ex:q ?a}.\n",
            encoding="utf-8",
        )
        rules = load_rules(["analyze_bmi", str(extra)])
        assert any(r.id.startswith("analyze_bmi.n3#") for r in rules)
        assert any(r.id.startswith("extra.n3#") for r in rules)

    def test_vocabulary_declares_core_terms(self):
        subjects = {t.s.value for t in load_vocabulary() if hasattr(t.s, "value")}
        assert kb.HUMAN_NS + "hasBodyMassIndex" in subjects
        assert kb.UNITS_NS + "kilogramPerMeterSquare" in subjects

    def test_fingerprint_is_short_stable_hex(self):
        fp = assets_fingerprint()
        assert fp == assets_fingerprint()
        assert len(fp) == 16
        int(fp, 16)

    def test_fingerprint_tracks_content(self, tmp_path, monkeypatch):
        src = kb.KB_DIR
        for f in src.iterdir():
            (tmp_path / f.name).write_bytes(f.read_bytes())
        monkeypatch.setattr(kb, "KB_DIR", tmp_path)
        before = assets_fingerprint()
        with open(tmp_path / "analyze_bmi.n3", "a", encoding="utf-8") as fh:
            fh.write("# trailing comment\n")
        assert assets_fingerprint() != before


class TestValidation:
    def _with_assets(self, monkeypatch, tmp_path, text: str):
        (tmp_path / "vocab.n3").write_bytes((kb.KB_DIR / "vocab.n3").read_bytes())
        (tmp_path / "bad.n3").write_text(text, encoding="utf-8")
        monkeypatch.setattr(kb, "KB_DIR", tmp_path)
        asset = RuleAsset("bad", "bad.n3", "analysis")
        monkeypatch.setattr(kb, "ASSETS", (asset,))
        monkeypatch.setattr(kb, "_BY_NAME", {"bad": asset})

    def test_syntax_violation(self, monkeypatch, tmp_path):
        self._with_assets(monkeypatch, tmp_path, "{?a ex:p ?b} => {")
        violations = validate_assets()
        assert len(violations) == 1
        assert violations[0]["kind"] == "syntax"
        assert violations[0]["asset"] == "bad"

    def test_vocabulary_violation(self, monkeypatch, tmp_path):
        self._with_assets(
            monkeypatch,
            tmp_path,
            "@prefix ex: <http://example.org/made-up#>.\n"
            "{?p ex:hasShoeSize ?s} => {?p ex:hasBigFeet true}.\n",
        )
        violations = validate_assets()
        kinds = {v["kind"] for v in violations}
        assert kinds == {"vocabulary"}
        assert any("hasShoeSize" in v["message"] for v in violations)


class TestBmiOracle:
    def test_reference_value(self):
        assert bmi_reference(72, 1.70) == pytest.approx(24.913494809688583, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            bmi_reference(0, 1.7)
        with pytest.raises(ValueError):
            bmi_reference(72, -1.7)


class TestAgeOracle:
    def test_birthday_boundaries(self):
        birth = date(1980, 6, 15)
        assert age_reference(birth, date(2012, 6, 14)) == 31
        assert age_reference(birth, date(2012, 6, 15)) == 32
        assert age_reference(birth, date(2012, 6, 16)) == 32

    def test_same_day_is_zero(self):
        assert age_reference(date(2000, 1, 1), date(2000, 1, 1)) == 0

    def test_reference_before_birth(self):
        with pytest.raises(ValueError):
            age_reference(date(2000, 1, 1), date(1999, 12, 31))


class TestGateOracle:
    BIRTH = date(1970, 1, 1)
    LENGTH = date(2012, 1, 1)

    @pytest.mark.parametrize(
        "delta_days,ok",
        [
            (-8, False),  # weight just over a week before the length
            (-7, True),  # exactly a week before: inclusive bound
            (0, True),
            (730, True),  # exactly two 365-day years: inclusive
            (731, False),
        ],
    )
    def test_measurement_delay_window(self, delta_days, ok):
        weight = self.LENGTH + timedelta(days=delta_days)
        assert gate_reference(weight, self.LENGTH, self.BIRTH) is ok

    @pytest.mark.parametrize("age,ok", [(17, False), (18, True), (19, True)])
    def test_adults_only(self, age, ok):
        birth = self.LENGTH.replace(year=self.LENGTH.year - age)
        assert gate_reference(self.LENGTH, self.LENGTH, birth) is ok

    def test_age_taken_at_later_measurement(self):
        # 18th birthday falls between the two measurement dates; the
        # later one decides, so the pair qualifies
        birth = date(1994, 2, 1)
        length = date(2012, 1, 15)
        weight = date(2012, 2, 10)
        assert age_reference(birth, length) == 17
        assert gate_reference(weight, length, birth) is True
