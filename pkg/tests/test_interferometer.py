import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence_spectra.channel import (
    KrausChannel,
    beam_splitter_params,
    from_loss_params,
    identity_channel,
    lpc,
    measure_and_prepare_channel,
    random_psi_perp,
    random_vacuum_preserving_channel,
)
from coherence_spectra.errors import NotVacuumPreservingError, ValidationError
from coherence_spectra.interferometer import (
    analytic_maximizer,
    chi_grid,
    closed_form_p_a,
    coherence_overlap,
    fringe,
    max_visibility_scan,
    random_unitary,
    simulate_mach_zehnder,
    splitter,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
KET1 = np.array([0, 1], dtype=complex)
ONE = np.eye(1, dtype=complex)


def bs_channel(theta):
    return from_loss_params(beam_splitter_params(theta))


class TestSimulation:
    def test_splitter_unitary(self):
        bs = splitter(3)
        assert np.abs(bs.conj().T @ bs - np.eye(9)).max() < 1e-15

    def test_identity_full_constructive(self, rng):
        for d in (1, 2, 3):
            psi = random_psi_perp(d, rng)
            assert abs(simulate_mach_zehnder(identity_channel(1 + d), psi, np.eye(d), 0.0) - 1) < 1e-12

    def test_beam_splitter_fringe(self):
        fr = fringe(bs_channel(np.pi / 4), KET1, ONE)
        assert abs(fr.offset - 0.375) < 1e-12
        assert abs(fr.visibility - np.sqrt(2) / 4) < 1e-12

    def test_measure_and_prepare_flat(self):
        p = [simulate_mach_zehnder(measure_and_prepare_channel(), KET1, ONE, c) for c in chi_grid(16)]
        assert np.abs(np.array(p) - 0.375).max() < 1e-12

    def test_visibility_is_half_peak_to_peak(self, rng):
        ch = random_vacuum_preserving_channel(2, 3, rng)
        psi = random_psi_perp(2, rng)
        u = random_unitary(2, rng)
        fr = fringe(ch, psi, u, n_chi=720)
        assert abs(fr.visibility - (fr.p_a.max() - fr.p_a.min()) / 2) < 1e-4
        assert abs(fr.p_a[np.argmax(np.cos(fr.chi - fr.best_phase))] - fr.p_a.max()) < 1e-4

    @given(seeds, st.integers(1, 3), st.integers(1, 4), st.floats(0, 2 * np.pi))
    @settings(max_examples=100)
    def test_closed_form(self, seed, d, anc, chi):
        r = np.random.default_rng(seed)
        ch = random_vacuum_preserving_channel(d, anc, r)
        psi, u = random_psi_perp(d, r), random_unitary(d, r)
        assert abs(simulate_mach_zehnder(ch, psi, u, chi) - closed_form_p_a(ch, psi, u, chi)) < 1e-10

    @given(seeds, st.integers(1, 3), st.integers(1, 4))
    @settings(max_examples=60)
    def test_overlap_bounded_by_preservation(self, seed, d, anc):
        r = np.random.default_rng(seed)
        ch = random_vacuum_preserving_channel(d, anc, r)
        psi = random_psi_perp(d, r)
        f = coherence_overlap(ch, psi, random_unitary(d, r))
        assert abs(f) <= lpc(ch, psi).preservation + 1e-12

    def test_rejects_non_vacuum_preserving(self):
        flip = KrausChannel(2, (np.array([[0, 1], [1, 0]], dtype=complex),))
        with pytest.raises(NotVacuumPreservingError):
            simulate_mach_zehnder(flip, KET1, ONE, 0.0)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError):
            simulate_mach_zehnder(identity_channel(2), KET1, 0.5 * ONE, 0.0)


class TestVisibility:
    def test_identity(self):
        best, _ = max_visibility_scan(identity_channel(2), KET1, n_u=4, n_chi=16)
        assert abs(best - 0.5) < 1e-12

    def test_beam_splitter_pi_3(self):
        best, _ = max_visibility_scan(bs_channel(np.pi / 3), KET1, n_u=4, n_chi=16)
        assert abs(best - 0.25) < 1e-12

    def test_measure_and_prepare(self):
        best, _ = max_visibility_scan(measure_and_prepare_channel(), KET1, n_u=4, n_chi=16)
        assert best < 1e-12

    def test_random_scan_single_mode(self):
        best, _ = max_visibility_scan(bs_channel(0.7), KET1, n_u=500, n_chi=8, include_analytic=False)
        assert abs(best - np.cos(0.7) / 2) < 1e-3

    @given(seeds, st.integers(1, 3), st.integers(1, 4))
    @settings(max_examples=40)
    def test_analytic_maximizer(self, seed, d, anc):
        r = np.random.default_rng(seed)
        ch = random_vacuum_preserving_channel(d, anc, r)
        psi = random_psi_perp(d, r)
        u = analytic_maximizer(ch, psi)
        assert np.abs(u.conj().T @ u - np.eye(d)).max() < 1e-10
        assert abs(fringe(ch, psi, u, 16).visibility - lpc(ch, psi).preservation / 2) < 1e-6

    def test_scan_never_exceeds_bound(self, rng):
        ch = random_vacuum_preserving_channel(3, 3, rng)
        psi = random_psi_perp(3, rng)
        best, _ = max_visibility_scan(ch, psi, n_u=50, n_chi=8, include_analytic=False)
        assert best <= lpc(ch, psi).preservation / 2 + 1e-12
