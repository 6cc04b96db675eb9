import numpy as np
import pytest

from dickesim.geomphase import (PhaseEvolutionError, berry_phase,
                                connection_matrix, evolve_phase_resolved)
from dickesim.model import (ModelParams, basis_quantum_numbers,
                            build_dicke_hamiltonian,
                            build_rotated_hamiltonian)
from dickesim.propagator import evolve_and_sample
from dickesim.spectra import full_diagonalization, ground_state


def params(**kw):
    base = dict(omega=1.0, omega0=1.0, coupling=0.9, delta_phi=1.0,
                j=1.0, n_max=5)
    base.update(kw)
    return ModelParams(**base)


def static_basis(p):
    return full_diagonalization(build_dicke_hamiltonian(p))


class TestConnectionMatrix:
    def test_zero_without_drive(self):
        p = params(delta_phi=0.0)
        a = connection_matrix(static_basis(p), p)
        assert np.max(np.abs(a)) == 0.0

    def test_hermitian(self):
        p = params()
        a = connection_matrix(static_basis(p), p)
        assert np.max(np.abs(a - a.conj().T)) < 1e-12

    def test_decoupled_product_basis(self):
        # without coupling the eigenbasis is the product basis and the
        # connection is diagonal with entries -delta_phi * m
        p = params(coupling=0.0, omega0=0.37)
        basis = static_basis(p)
        a = connection_matrix(basis, p)
        off = a - np.diag(np.diag(a))
        assert np.max(np.abs(off)) < 1e-12
        n, m = basis_quantum_numbers(p)
        energies = p.omega * n + 0.37 * m
        order = np.argsort(energies, kind="stable")
        assert np.allclose(np.diag(a), -p.delta_phi * m[order], atol=1e-12)


class TestBerryPhase:
    def test_zero_at_t0(self):
        p = params()
        assert berry_phase(static_basis(p), 0, 0.0, p) == 0.0

    def test_linear_in_time(self):
        p = params()
        basis = static_basis(p)
        g1 = berry_phase(basis, 2, 1.3, p)
        g2 = berry_phase(basis, 2, 2.6, p)
        assert g2 == pytest.approx(2 * g1, rel=1e-13)

    def test_decoupled_levels(self):
        p = params(coupling=0.0, omega0=0.37)
        basis = static_basis(p)
        n, m = basis_quantum_numbers(p)
        order = np.argsort(p.omega * n + 0.37 * m, kind="stable")
        t = 2.2
        for level in (0, 3, 7):
            expect = -m[order][level] * p.delta_phi * t
            assert berry_phase(basis, level, t, p) == pytest.approx(
                expect, abs=1e-12)


class TestEvolvePhaseResolved:
    def test_static_without_drive(self):
        p = params(delta_phi=0.0)
        basis = static_basis(p)
        rng = np.random.default_rng(0)
        chi0 = rng.standard_normal(p.dim) + 1j * rng.standard_normal(p.dim)
        chi0 /= np.linalg.norm(chi0)
        ts = evolve_phase_resolved(chi0, basis, p, 5.0, sample_dt=0.5,
                                   include_populations=True)
        pops0 = np.abs(chi0) ** 2
        for l in range(p.dim):
            assert np.max(np.abs(ts[f"pop_{l}"] - pops0[l])) < 1e-12

    def test_matches_direct_chebyshev(self):
        # same Schroedinger dynamics written in two different ways
        p = params(coupling=0.9)
        basis = static_basis(p)
        ts_g = evolve_phase_resolved(None, basis, p, p.t_phi,
                                     sample_dt=p.t_phi / 50,
                                     rtol=1e-11, atol=1e-12)
        gs = ground_state(build_dicke_hamiltonian(p))
        h_rot = build_rotated_hamiltonian(p)
        ts_q = evolve_and_sample(gs.vector.astype(complex), h_rot, p,
                                 p.t_phi, p.t_phi / 50, dt=p.t_phi / 1000)
        assert np.max(np.abs(ts_g["n_ph"] - ts_q["n_ph"])) < 1e-8

    def test_norm_conserved_ten_periods(self):
        p = params()
        ts = evolve_phase_resolved(None, static_basis(p), p, 10 * p.t_phi,
                                   sample_dt=p.t_phi / 10)
        assert np.max(np.abs(ts["norm"] - 1.0)) < 1e-8

    def test_csv_interface(self, tmp_path):
        p = params()
        ts = evolve_phase_resolved(None, static_basis(p), p, p.t_phi,
                                   sample_dt=p.t_phi / 10)
        assert ts.header() == "t,n_ph,norm"
        out = tmp_path / "phase.csv"
        ts.write_csv(out)
        assert out.read_text().splitlines()[0] == "t,n_ph,norm"

    def test_populations_column_dump(self):
        p = params(j=0.5, n_max=2)
        ts = evolve_phase_resolved(None, static_basis(p), p, 1.0,
                                   sample_dt=0.25, include_populations=True)
        assert f"pop_{p.dim - 1}" in ts
        total = sum(ts[f"pop_{l}"] for l in range(p.dim))
        assert np.max(np.abs(total - 1.0)) < 1e-10

    def test_dimension_cap(self):
        p = params(j=2.0, n_max=60)
        with pytest.raises(PhaseEvolutionError):
            evolve_phase_resolved(None, static_basis(p), p, 1.0,
                                  sample_dt=0.5, cap=100)

    def test_unnormalised_chi_rejected(self):
        p = params(j=0.5, n_max=2)
        bad = np.ones(p.dim, dtype=complex)
        with pytest.raises(ValueError):
            evolve_phase_resolved(bad, static_basis(p), p, 1.0, sample_dt=0.5)

    def test_ablation_changes_dynamics(self):
        # zeroed geometric phases give a genuinely different photon record
        p = params(coupling=0.9)
        basis = static_basis(p)
        on = evolve_phase_resolved(None, basis, p, p.t_phi,
                                   sample_dt=p.t_phi / 20)
        off = evolve_phase_resolved(None, basis, p, p.t_phi,
                                    sample_dt=p.t_phi / 20,
                                    zero_geometric=True)
        assert np.max(np.abs(on["n_ph"] - off["n_ph"])) > 1e-3
        assert on.meta["zero_geometric"] is False
        assert off.meta["zero_geometric"] is True
