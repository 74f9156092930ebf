import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence_spectra.dynamics import (
    Dissipator,
    JcConfig,
    ThreeLevelConfig,
    _Integrator,
    evolve,
    evolve_exact,
    extract_field_channel,
    field_state,
    field_tomography,
    hermitian_basis,
    jc_hamiltonian,
    joint_initial_state,
    lindblad_rhs,
    liouvillian,
    model_from_json,
    model_to_json,
    photon_probability,
    rk4_step,
    three_level_hamiltonian,
)
from coherence_spectra.errors import DimensionError, PhysicsError, ValidationError
from coherence_spectra.operators import partial_trace

from conftest import rand_complex, rand_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)
G = 0.1
T_HALF = np.pi / (2 * G)
ONE_G = np.diag([0, 0, 1, 0]).astype(complex)  # |1g><1g|


def rabi_p(delta, g, t):
    w = np.sqrt(delta ** 2 + 4 * g ** 2)
    return 1 - (4 * g ** 2 / w ** 2) * np.sin(t * w / 2) ** 2


def atom_only(n_photon, op):
    return np.kron(np.eye(n_photon), op)


class TestHamiltonians:
    def test_jc_uncoupled(self):
        w, wa = 1.3, 0.7
        h = jc_hamiltonian(JcConfig(omega=w, omega_a=wa, g=0))
        expected = np.diag([-(w + wa) / 2, (-w + wa) / 2, (w - wa) / 2, (w + wa) / 2])
        assert np.abs(h - expected).max() < 1e-15

    def test_jc_coupling_and_hermiticity(self):
        h = jc_hamiltonian(JcConfig(omega=1.2, omega_a=0.9, g=0.3))
        assert h[1, 2] == 0.3 and h[2, 1] == 0.3
        assert np.array_equal(h, h.conj().T)
        w = np.linalg.eigvalsh(jc_hamiltonian(JcConfig(g=0.1)))
        assert abs(w[2] - w[1] - 0.2) < 1e-12

    def test_three_level_uncoupled(self):
        cfg = ThreeLevelConfig(omega=2.5, g01=0, g02=0, g12=0)
        h = three_level_hamiltonian(cfg)
        levels = np.array([5, 7, 8])
        expected = np.concatenate([-1.25 + levels, 1.25 + levels])
        assert np.abs(h - np.diag(expected)).max() < 1e-15

    def test_three_level_pattern(self):
        h = three_level_hamiltonian(ThreeLevelConfig())
        idx = lambda n, k: 3 * n + k  # noqa: E731
        assert h[idx(0, 1), idx(1, 0)] == 0.05
        assert h[idx(0, 2), idx(1, 0)] == 0.07
        assert h[idx(0, 2), idx(1, 1)] == 0.08
        assert np.array_equal(h, h.conj().T)
        off = h - np.diag(np.diag(h))
        assert np.count_nonzero(off) == 6

    def test_negative_coupling_rejected(self):
        with pytest.raises(ValidationError):
            JcConfig(g=-0.1)
        with pytest.raises(ValidationError):
            ThreeLevelConfig(g12=-1)

    def test_model_json(self):
        for m in (JcConfig(q=0.01, dissipator="dephasing"), ThreeLevelConfig(omega=1.5)):
            assert model_from_json(model_to_json(m)) == m
        assert isinstance(model_from_json({"omega0": 5, "integration": {"dt": 0.01}}), ThreeLevelConfig)
        with pytest.raises(ValidationError):
            model_from_json({"type": "jc", "bogus": 1})


class TestLindblad:
    def test_pure_commutator(self, rng):
        h = jc_hamiltonian(JcConfig())
        rho = rand_density(rng, 4)
        out = lindblad_rhs(h, 0.0, "none", rho)
        assert np.abs(out - (-1j) * (h @ rho - rho @ h)).max() < 1e-15
        assert abs(np.trace(out)) < 1e-15

    @pytest.mark.parametrize("diss", ["relaxation", "dephasing"])
    def test_traceless_hermitian(self, rng, diss):
        rho = rand_density(rng, 4)
        out = lindblad_rhs(jc_hamiltonian(JcConfig()), 0.3, diss, rho)
        assert abs(np.trace(out)) < 1e-12
        assert np.abs(out - out.conj().T).max() < 1e-12

    def test_relaxation_rate(self):
        q = 0.4
        rho = np.kron(np.eye(2) / 2, np.diag([0, 1]))
        out = lindblad_rhs(np.zeros((4, 4)), q, "relaxation", rho)
        p_e = atom_only(2, np.diag([0, 1]))
        assert abs(np.trace(p_e @ out).real - (-q * 1.0)) < 1e-15

    def test_dephasing_rate(self):
        q = 0.4
        rho = np.kron(np.diag([1, 0]), np.array([[0, 1], [0, 0]]))  # atomic |g><e|
        out = lindblad_rhs(np.zeros((4, 4)), q, "dephasing", rho)
        assert np.abs(out - (-q) * rho).max() < 1e-15

    @pytest.mark.parametrize("diss", ["relaxation", "dephasing"])
    def test_exponential_decay(self, diss):
        q, t = 0.2, 3.0
        if diss == "relaxation":
            rho0 = np.kron(np.eye(2) / 2, np.diag([0, 1]))
            obs = atom_only(2, np.diag([0, 1]))
        else:
            a = np.array([[0.5, 0.5], [0.5, 0.5]])
            rho0 = np.kron(np.eye(2) / 2, a)
            obs = atom_only(2, np.array([[0, 0], [2, 0]]))  # 2 <g|rho_atom|e>, equal to 1 at t=0
        res = evolve(np.zeros((4, 4)), q, diss, rho0, t)
        val = np.trace(obs @ res.states[-1]).real
        assert abs(val - np.exp(-q * t)) < 1e-9

    @given(seeds, st.sampled_from(list(Dissipator)))
    @settings(max_examples=30)
    def test_liouvillian_matches_rhs(self, seed, diss):
        r = np.random.default_rng(seed)
        a = rand_complex(r, (4, 4))
        h = a + a.conj().T
        rho = rand_complex(r, (4, 4))
        sup = liouvillian(h, 0.37, diss)
        lhs = (sup @ rho.reshape(-1)).reshape(4, 4)
        assert np.abs(lhs - lindblad_rhs(h, 0.37, diss, rho)).max() < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            lindblad_rhs(np.eye(4), 0.0, "none", np.eye(2))

    def test_rk4_step_exponential(self):
        y = rk4_step(lambda v: -v, np.array([1.0]), 0.1)
        assert abs(y[0] - np.exp(-0.1)) < 1e-6


class TestEvolve:
    def test_hamiltonian_zero(self, rng):
        rho = rand_density(rng, 4)
        res = evolve(np.zeros((4, 4)), 0.0, "none", rho, 10.0, record_every=None)
        assert np.abs(res.states[-1] - rho).max() < 1e-15

    def test_resonant_transfer(self):
        res = evolve(jc_hamiltonian(JcConfig(g=G)), 0.0, "none", ONE_G, T_HALF, record_every=None)
        final = res.states[-1]
        assert photon_probability(final, 2) < 1e-8
        assert np.abs(partial_trace(final, (2, 2), keep=[0]) - np.diag([1, 0])).max() < 1e-8
        assert res.times[-1] == T_HALF

    def test_rabi_grid(self):
        times = np.arange(0, 60.01, 2.5)
        for delta in np.linspace(-1, 1, 9):
            h = jc_hamiltonian(JcConfig(omega=1 + delta, omega_a=1, g=G))
            res = evolve(h, 0.0, "none", ONE_G, 60.0, record_every=250)
            p = [photon_probability(s, 2) for s in res.states]
            assert np.allclose(res.times, times)
            assert np.abs(np.array(p) - rabi_p(delta, G, times)).max() < 1e-6

    def test_matches_exact(self, rng):
        h = three_level_hamiltonian(ThreeLevelConfig(omega=1.7))
        rho = rand_density(rng, 6)
        res = evolve(h, 0.0, "none", rho, 40.0, record_every=100)
        exact = evolve_exact(h, rho, res.times)
        assert max(np.abs(a - b).max() for a, b in zip(res.states, exact)) < 1e-6

    @pytest.mark.parametrize("diss", ["none", "relaxation", "dephasing"])
    def test_long_run_invariants(self, diss):
        rho0 = np.kron(np.diag([0.3, 0.7]), np.diag([1, 0])).astype(complex)
        rho0[0, 2] = rho0[2, 0] = 0.4
        res = evolve(jc_hamiltonian(JcConfig(omega=1.2)), 0.01, diss, rho0, 500.0, record_every=500)
        assert res.trace_drift <= 1e-8
        for s in res.states:
            assert np.abs(s - s.conj().T).max() <= 1e-10
            assert np.linalg.eigvalsh(s).min() >= -1e-8

    def test_partial_final_step(self):
        res = evolve(np.zeros((2, 2)), 0.0, "none", np.eye(2) / 2, 0.125, dt=0.05, record_every=None)
        assert res.times == [0.0, 0.125]

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            evolve(np.zeros((2, 2)), 0.0, "none", [[1, 1], [0, 0]], 1.0)

    def test_trace_drift_aborts(self):
        integ = _Integrator(-np.eye(4, dtype=complex), 2, 0.01)
        with pytest.raises(PhysicsError):
            for _ in integ.run(np.eye(2).reshape(-1, 1) / 2, 1.0, None):
                pass

    def test_hermitian_basis_orthonormal(self):
        b = hermitian_basis(3)
        assert np.abs(b.conj().T @ b - np.eye(9)).max() < 1e-15


class TestFieldChannel:
    def test_resonant_full_transfer(self):
        p = extract_field_channel(JcConfig(g=G), T_HALF)
        assert abs(p.sigma00 - 1) < 1e-8
        assert abs(p.gamma) < 1e-7
        assert abs(p.sigma01) < 1e-10

    @pytest.mark.parametrize("delta,t", [(0.0, 3.0), (0.3, 11.0), (-0.8, 25.0), (0.05, 40.0)])
    def test_pure_jc_no_excess(self, delta, t):
        p = extract_field_channel(JcConfig(omega=1 + delta, g=G), t)
        assert abs(abs(p.gamma) ** 2 - (1 - p.sigma00)) < 1e-8
        assert abs(p.sigma01) <= 1e-10

    def test_relaxation_no_excess(self):
        for delta in np.linspace(-1, 1, 11):
            p = extract_field_channel(JcConfig(omega=1 + delta, g=G, q=0.01, dissipator="relaxation"), T_HALF)
            assert p.excess_coherence_loss <= 1e-8

    def test_dephasing_excess(self):
        p = extract_field_channel(JcConfig(g=G, q=0.01, dissipator="dephasing"), T_HALF)
        assert p.excess_coherence_loss > 1e-3

    def test_three_level_superposition(self):
        p = extract_field_channel(ThreeLevelConfig(omega=1.0), 25.0)
        # far above the ~1e-10 numerical floor of the two-level model
        assert abs(p.sigma01) > 1e-6

    @pytest.mark.parametrize(
        "model",
        [
            JcConfig(omega=1.3, q=0.02, dissipator="none"),
            JcConfig(omega=1.3, q=0.02, dissipator="relaxation"),
            JcConfig(omega=1.3, q=0.02, dissipator="dephasing"),
            ThreeLevelConfig(omega=2.1),
        ],
    )
    def test_vacuum_preserved(self, model):
        tomo = field_tomography(model, 17.0)
        assert abs(tomo.images[(0, 0)][0, 0] - 1) < 1e-8
        assert abs(tomo.p_direct - (1 - tomo.sigma[0, 0].real)) < 1e-10

    @pytest.mark.parametrize(
        "model", [JcConfig(omega=0.8, q=0.05, dissipator="dephasing"), ThreeLevelConfig(omega=1.1)]
    )
    def test_linearity(self, rng, model):
        t = 13.0
        tomo = field_tomography(model, t)
        rho = rand_density(rng, 2)
        predicted = sum(rho[i, j] * tomo.images[(i, j)] for i in range(2) for j in range(2))
        ad = model.atom_dim
        res = evolve(model.hamiltonian(), getattr(model, "q", 0.0), getattr(model, "dissipator", "none"),
                     joint_initial_state(rho, ad), t, record_every=None, atom_dim=ad)
        assert np.abs(field_state(res.states[-1], ad) - predicted).max() < 1e-10

    def test_three_level_invariant_subspace(self):
        model = ThreeLevelConfig(omega=2.0)
        rho0 = joint_initial_state(np.diag([0, 1]), 3)
        res = evolve(model.hamiltonian(), 0.0, "none", rho0, 200.0, record_every=500, atom_dim=3)
        for s in res.states:
            assert abs(s[0, 0]) + abs(s[5, 5]) <= 1e-10
