import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence_spectra import spectra
from coherence_spectra.dynamics import JcConfig, ThreeLevelConfig
from coherence_spectra.errors import PhysicsError, ValidationError
from coherence_spectra.spectra import (
    CSV_HEADER,
    SpectrumRecord,
    SweepConfig,
    compute_point,
    default_sweep,
    envelope,
    local_maxima,
    local_minima,
    parse_csv,
    read_csv,
    records_to_csv,
    run_sweep,
    smooth3,
    summarize,
    write_csv,
)

finite = st.floats(allow_nan=False, allow_infinity=False)
records = st.builds(
    SpectrumRecord,
    finite, finite, finite, finite,
    st.one_of(st.none(), finite), st.one_of(st.none(), finite),
)


def small_sweep(**kw):
    base = dict(model=ThreeLevelConfig(), axis="omega", grid=(1.5, 2.5, 5), snapshot_time=5.0, envelope=(10.0, 0.5))
    base.update(kw)
    return SweepConfig(**base)


class TestSweepConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(grid=(0, 1, 1)),
            dict(grid=(1, 0, 5)),
            dict(envelope=(10.0, 0.0)),
            dict(envelope=(1.0, 2.0)),
            dict(envelope=(10.0, 0.005)),
            dict(axis="delta"),
            dict(axis="energy"),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            small_sweep(**kw)

    def test_axis_aliases(self):
        assert small_sweep(axis="photon_energy_omega").axis == "omega"
        cfg = SweepConfig(JcConfig(), "detuning_delta", (-1, 1, 3), 1.0)
        assert cfg.axis == "delta"
        assert cfg.model_at(0.25).omega == 1.25

    def test_json_round_trip(self):
        for cfg in (small_sweep(), default_sweep("jc", "dephasing")):
            assert SweepConfig.from_json(cfg.to_json()) == cfg

    def test_json_missing_key(self):
        obj = small_sweep().to_json()
        del obj["grid"]
        with pytest.raises(ValidationError):
            SweepConfig.from_json(obj)

    def test_defaults(self):
        jc = default_sweep("jc")
        assert jc.grid == (-1.0, 1.0, 101) and jc.snapshot_time == math.pi / 0.2
        tl = default_sweep("three-level", envelope=True)
        assert tl.grid == (0.5, 3.5, 301) and tl.envelope == (500.0, 0.5) and tl.snapshot_time == 25.0


class TestEnvelope:
    def test_no_coupling(self):
        p_min, s_max = envelope(ThreeLevelConfig(g01=0, g02=0, g12=0), 50.0, 0.5)
        assert abs(p_min - 1) < 1e-12 and s_max < 1e-12

    def test_resonant_jc(self):
        p_min, _ = envelope(JcConfig(g=0.1), 20.0, 0.01)
        assert p_min <= 1e-6

    def test_far_detuned(self):
        p_min, _ = envelope(ThreeLevelConfig(omega=10.0), 500.0, 0.5)
        assert p_min >= 0.99

    def test_jc_never_creates_superposition(self):
        _, s_max = envelope(JcConfig(omega=1.2, g=0.1), 200.0, 0.5)
        assert s_max <= 1e-10

    def test_bad_step(self):
        with pytest.raises(ValidationError):
            envelope(JcConfig(), 10.0, 0.015)


class TestCsv:
    def test_single_record(self, tmp_path):
        path = tmp_path / "one.csv"
        write_csv([SpectrumRecord(0.5, 0.25, 0.0, 1e-3)], path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert len(lines) == 2
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1].endswith(",,")

    def test_full_precision(self):
        text = records_to_csv([SpectrumRecord(0.1, 1 / 3, 0.0, 0.0)])
        assert "0.33333333333333331" in text

    @given(st.lists(records, min_size=1, max_size=5))
    @settings(max_examples=100)
    def test_round_trip(self, recs):
        back = parse_csv(records_to_csv(recs))
        for a, b in zip(back, recs):
            for name in CSV_HEADER:
                x, y = getattr(a, name), getattr(b, name)
                assert (x is None and y is None) or x == y

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            write_csv([], tmp_path / "x.csv")

    def test_bad_header(self):
        with pytest.raises(ValidationError):
            parse_csv("a,b\n1,2\n")

    def test_file_round_trip(self, tmp_path):
        recs = run_sweep(small_sweep())
        write_csv(recs, tmp_path / "s.csv")
        assert read_csv(tmp_path / "s.csv") == recs


class TestSweep:
    def test_deterministic(self):
        cfg = small_sweep()
        assert records_to_csv(run_sweep(cfg)) == records_to_csv(run_sweep(cfg))

    def test_order_independent(self):
        cfg = small_sweep()
        serial = run_sweep(cfg)
        backwards = [compute_point(cfg, i) for i in reversed(range(5))][::-1]
        assert backwards == serial

    def test_parallel_matches_serial(self):
        cfg = small_sweep()
        assert run_sweep(cfg, workers=2) == run_sweep(cfg)

    def test_point_index_reported(self, monkeypatch):
        def boom(tomo, validity_tol=1e-6):
            raise PhysicsError("bad")

        monkeypatch.setattr(spectra, "check_field_channel", boom)
        with pytest.raises(PhysicsError, match="grid point 3"):
            compute_point(small_sweep(), 3)

    @pytest.mark.slow
    def test_jc_pure(self, jc_sweeps):
        recs = jc_sweeps["none"]
        x = np.array([r.x for r in recs])
        p = np.array([r.p for r in recs])
        assert x[np.argmin(p)] == 0.0
        assert p.min() <= 1e-6
        assert max(r.excess_loss for r in recs) <= 1e-8
        assert max(r.sigma01_abs for r in recs) <= 1e-10

    @pytest.mark.slow
    def test_jc_dephasing(self, jc_sweeps):
        assert max(r.excess_loss for r in jc_sweeps["dephasing"]) > 0

    @pytest.mark.slow
    def test_three_level_line_count(self, three_level_envelope_sweep, tmp_path):
        write_csv(three_level_envelope_sweep, tmp_path / "tl.csv")
        assert len((tmp_path / "tl.csv").read_text().splitlines()) == 302

    @pytest.mark.slow
    def test_envelope_dominance(self, three_level_envelope_sweep):
        # snapshot t=25 is one of the envelope samples (multiple of 0.5)
        for r in three_level_envelope_sweep:
            assert r.sigma01_max_envelope >= r.sigma01_abs - 1e-12
            assert r.p_min_envelope <= r.p + 1e-12


class TestPeaks:
    def test_smooth3(self):
        assert np.allclose(smooth3([0, 3, 0, 3]), [1, 2])

    def test_local_extrema(self):
        x = np.linspace(0, 4 * np.pi, 401)
        y = np.sin(x)
        assert np.allclose(local_maxima(x, y), [np.pi / 2, 5 * np.pi / 2], atol=0.05)
        assert np.allclose(local_minima(x, y), [3 * np.pi / 2, 7 * np.pi / 2], atol=0.05)

    def test_plateau_is_not_a_peak(self):
        assert local_maxima(np.arange(7), [0, 1, 1, 1, 1, 1, 0]).size == 0

    def test_summary_line(self):
        s = summarize([SpectrumRecord(0, 0.5, 0.1, 0.2), SpectrumRecord(1, 0.25, 0.3, 0.0)])
        line = s.line(1.234)
        assert "points=2" in line and "min_p=2.500000e-01" in line
        assert "max_excess_loss=3.000000e-01" in line and "wall_time=1.23s" in line
