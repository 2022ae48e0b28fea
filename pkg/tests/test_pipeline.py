import math

import pytest

from ksatptf.classic import ClassicModelId
from ksatptf.errors import FileError, HeaderMismatch
from ksatptf.pipeline import (
    COLUMNS,
    ESTIMATE,
    EVALUATE,
    MISSING_DIMENSION,
    ZERO_CLAY,
    ZERO_SILT,
    SplitMix64,
    SynthConfig,
    filter_applicable,
    generate_synthetic,
    ingest_csv,
    write_csv,
)
from ksatptf.soil import SoilSample

from oracles import REF_CRITERIA, oracle_particle_stats, usda_matches

HEADER = ",".join(COLUMNS)


def write(tmp_path, lines, name="in.csv"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


GOOD = "s1,lab,const-head,1.45,40,40,20,7.6,7.6,12.5"


class TestIngest:
    def test_good_row(self, tmp_path):
        result = ingest_csv(write(tmp_path, [HEADER, GOOD]))
        assert result.rejected == []
        (s,) = result.accepted
        assert s == SoilSample("s1", 40, 40, 20, 1.45, 7.6, 7.6, 12.5, "lab", "const-head")

    def test_rejections_keep_row_numbers_and_reasons(self, tmp_path):
        lines = [
            HEADER,
            GOOD,
            "s2,lab,m,1.45,40,40,25,7.6,7.6,12.5",  # sum 105
            "s3,lab,m,abc,40,40,20,7.6,7.6,12.5",
            "s4,lab,m,1.45,40,40,20,7.6,7.6,",
            "s5,lab,m,1.45,40,40,20,7.6,7.6",
            "",
            "s6,lab,m,2.70,40,40,20,7.6,7.6,1",
            "s7,lab,m,1.45,-1,81,20,7.6,7.6,1",
            "s8,lab,m,1.45,40,40,20,0,7.6,1",
            "s9,lab,m,1.45,40,40,20,,,3",
        ]
        result = ingest_csv(write(tmp_path, lines))
        reasons = {r.row: r.reason for r in result.rejected}
        assert reasons == {
            2: "TextureSumViolation",
            3: "ParseError",
            4: "MissingMeasurement",
            5: "ParseError",
            7: "NonphysicalDensity",
            8: "PercentOutOfRange",
            9: "NonPositiveField",
        }
        assert [s.id for s in result.accepted] == ["s1", "s9"]
        assert result.accepted[1].height is None
        assert len(result.accepted) + len(result.rejected) == result.total_rows == 9

    def test_estimate_mode_allows_missing_ksat(self, tmp_path):
        header = ",".join(c for c in COLUMNS if c != "ksat_cm_per_day")
        result = ingest_csv(write(tmp_path, [header, "s1,lab,m,1.45,40,40,20,7.6,7.6"]), ESTIMATE)
        assert result.accepted[0].ksat_measured is None
        with pytest.raises(HeaderMismatch):
            ingest_csv(write(tmp_path, [header, "s1,lab,m,1.45,40,40,20,7.6,7.6"]), EVALUATE)

    def test_renormalize_and_tolerance(self, tmp_path):
        path = write(tmp_path, [HEADER, "s1,lab,m,1.45,40,40,20.4,7.6,7.6,1"])
        kept = ingest_csv(path, renormalize=True).accepted[0]
        assert math.fsum(kept.texture) == pytest.approx(100, abs=1e-12)
        assert ingest_csv(path, tolerance=0.1).rejected[0].reason == "TextureSumViolation"

    @pytest.mark.parametrize("header,missing,unknown", [
        (HEADER.replace(",clay_pct", ""), ("clay_pct",), ()),
        (HEADER + ",extra", (), ("extra",)),
        (HEADER.replace("sand_pct", "sand"), ("sand_pct",), ("sand",)),
    ])
    def test_header_mismatch(self, tmp_path, header, missing, unknown):
        with pytest.raises(HeaderMismatch) as exc:
            ingest_csv(write(tmp_path, [header]))
        assert exc.value.missing == missing
        assert exc.value.unknown == unknown

    def test_ignore_extra(self, tmp_path):
        result = ingest_csv(write(tmp_path, [HEADER + ",note", GOOD + ",hello"]), ignore_extra=True)
        assert len(result.accepted) == 1

    def test_duplicate_column(self, tmp_path):
        with pytest.raises(HeaderMismatch):
            ingest_csv(write(tmp_path, [HEADER + ",id", GOOD + ",x"]))

    def test_empty_file(self, tmp_path):
        with pytest.raises(HeaderMismatch):
            ingest_csv(write(tmp_path, []))

    def test_unreadable(self, tmp_path):
        with pytest.raises(FileError):
            ingest_csv(tmp_path / "nope.csv")

    def test_write_round_trip(self, tmp_path):
        samples = generate_synthetic(SynthConfig(seed=3, count=200))
        samples[0] = SoilSample("comma, id", 40, 40, 20, 1.4, None, 5.0, 2.0, "a", "b")
        path = tmp_path / "rt.csv"
        write_csv(samples, path)
        assert ingest_csv(path).accepted == samples


class TestApplicability:
    def test_reasons(self):
        samples = [
            SoilSample("ok", 40, 40, 20, 1.4, 5, 5),
            SoilSample("nosilt", 80, 0, 20, 1.4, 5, 5),
            SoilSample("noclay", 80, 20, 0, 1.4),
        ]
        kept, excluded = filter_applicable(samples, ClassicModelId.JABRO92)
        assert [s.id for s in kept] == ["ok"]
        assert [(e.sample.id, e.reason) for e in excluded] == [("nosilt", ZERO_SILT), ("noclay", ZERO_CLAY)]
        kept, excluded = filter_applicable(samples, "cpxr")
        assert [(e.sample.id, e.reason) for e in excluded] == [("noclay", MISSING_DIMENSION)]
        for model in ClassicModelId:
            if model is not ClassicModelId.JABRO92:
                assert filter_applicable(samples, model)[0] == samples

    def test_partition(self):
        samples = generate_synthetic(SynthConfig(seed=9, count=3000))
        kept, excluded = filter_applicable(samples, ClassicModelId.JABRO92)
        k = sum(1 for s in samples if s.silt_pct == 0 or s.clay_pct == 0)
        assert k > 0
        assert len(excluded) == k and len(kept) == len(samples) - k
        assert {s.id for s in kept} | {e.sample.id for e in excluded} == {s.id for s in samples}


class TestSplitMix64:
    def test_reference_vector(self):
        rng = SplitMix64(1234567)
        assert [rng.next_u64() for _ in range(5)] == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ]

    def test_uniform_range(self):
        rng = SplitMix64(1)
        values = [rng.uniform() for _ in range(100_000)]
        assert all(0.0 <= u < 1.0 for u in values)
        # five standard errors of the mean of U(0, 1) at this sample size
        assert abs(sum(values) / len(values) - 0.5) < 5 * math.sqrt(1 / 12 / len(values))


class TestSynthetic:
    def test_deterministic(self):
        a = generate_synthetic(SynthConfig(seed=42, count=500))
        b = generate_synthetic(SynthConfig(seed=42, count=500))
        c = generate_synthetic(SynthConfig(seed=43, count=500))
        assert a == b
        assert a != c

    def test_prefix_stable(self):
        assert generate_synthetic(SynthConfig(count=100)) == generate_synthetic(SynthConfig(count=300))[:100]

    def test_rows_are_valid(self):
        cfg = SynthConfig(seed=42, count=2000)
        for s in generate_synthetic(cfg):
            hundredths = [round(v * 100) for v in s.texture]
            assert sum(hundredths) == 10000 and min(hundredths) >= 0
            assert all(abs(h / 100 - v) == 0 for h, v in zip(hundredths, s.texture))
            assert 1.0 <= s.bulk_density <= 1.8
            assert 2.0 <= s.height <= 60.0 and 2.5 <= s.diameter <= 12.5
            assert 1e-2 <= s.ksat_measured <= 1e6

    def test_coverage_of_classes_and_patterns(self):
        # independent pass: brute-force class rules and explicit pattern predicates
        samples = generate_synthetic(SynthConfig(seed=42, count=10_000))
        classes = set()
        patterns = set()
        for s in samples:
            (cls,) = usda_matches(s.sand_pct, s.silt_pct, s.clay_pct)
            classes.add(cls)
            dg, sg = oracle_particle_stats(s.sand_pct, s.silt_pct, s.clay_pct)
            sym = {"Sa": s.sand_pct, "Si": s.silt_pct, "Cl": s.clay_pct, "dg": float(dg), "sg": float(sg),
                   "BD": s.bulk_density, "ID": s.diameter, "L": s.height}
            patterns.update(pid for pid, crit in REF_CRITERIA.items() if crit(sym))
        assert len(classes) == 12
        assert patterns == set(range(1, 15))

    def test_zero_fines_present(self):
        samples = generate_synthetic(SynthConfig(seed=42, count=10_000))
        k = sum(1 for s in samples if s.silt_pct == 0 or s.clay_pct == 0)
        assert 50 <= k <= 200

    @pytest.mark.parametrize("kwargs", [
        {"count": 0},
        {"bulk_density": (1.8, 1.0)},
        {"bulk_density": (1.0, 2.7)},
        {"height": (0.0, 5.0)},
        {"zero_fines_fraction": 1.5},
    ])
    def test_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            SynthConfig(**kwargs)
