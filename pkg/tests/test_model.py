import numpy as np
import pytest

from dickesim.model import (DimensionOverflowError, ModelParams,
                            basis_quantum_numbers, build_dicke_hamiltonian,
                            build_observable, build_parity,
                            build_rotated_hamiltonian, coherent_state,
                            flat_index, parity_signs, top_fock_layer_max)


def params(**kw):
    base = dict(omega=1.0, omega0=1.0, coupling=1.0, delta_phi=1.0,
                j=1.0, n_max=5)
    base.update(kw)
    return ModelParams(**base)


class TestModelParams:
    def test_derived_quantities(self):
        p = params(delta_phi=1.0)
        assert p.omega_rot == 2.0
        assert p.lambda_c0 == 0.5
        assert p.lambda_c == pytest.approx(1 / np.sqrt(2), abs=1e-15)
        assert p.dim == 18
        assert p.t_phi == pytest.approx(2 * np.pi)

    def test_half_integer_j(self):
        p = params(j=1.5)
        assert p.two_j == 3
        assert p.j == 1.5
        with pytest.raises(ValueError):
            params(j=0.3)
        with pytest.raises(ValueError):
            params(j=0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            params(omega=0.0)
        with pytest.raises(ValueError):
            params(omega0=-1.0)
        with pytest.raises(ValueError):
            params(coupling=-0.1)
        with pytest.raises(ValueError):
            params(n_max=-1)
        with pytest.raises(ValueError):
            params(omega0=1.0, delta_phi=-2.0)  # Omega < 0

    @pytest.mark.parametrize("dphi", [0.0, 0.3, 1.0, 2.5])
    def test_critical_coupling_ordering(self, dphi):
        p = params(delta_phi=dphi)
        assert p.lambda_c >= p.lambda_c0

    def test_paper_system_dimension(self):
        assert params(j=10, n_max=60).dim == 21 * 61 == 1281

    def test_dimension_cap(self):
        p = params(j=10, n_max=60)
        with pytest.raises(DimensionOverflowError):
            p.check_dimension(cap=1000)
        p.check_dimension()  # default cap passes


class TestBasis:
    def test_bijection(self):
        p = params(j=1.5, n_max=4)
        n, m = basis_quantum_numbers(p)
        assert n.size == p.dim
        seen = set()
        for i in range(p.dim):
            assert flat_index(p, int(n[i]), float(m[i])) == i
            seen.add((int(n[i]), float(m[i])))
        assert len(seen) == p.dim

    def test_flat_index_bounds(self):
        p = params(j=1, n_max=2)
        with pytest.raises(ValueError):
            flat_index(p, 3, 0.0)
        with pytest.raises(ValueError):
            flat_index(p, 0, 2.0)

    def test_parity_well_defined(self):
        p = params(j=1.5, n_max=3)
        n, m = basis_quantum_numbers(p)
        signs = parity_signs(p)
        expected = (-1.0) ** (n + np.rint(m + p.j).astype(int))
        assert np.array_equal(signs, expected)


class TestHamiltonians:
    def test_decoupled_spin_half(self):
        p = params(j=0.5, n_max=0, coupling=0.0, delta_phi=0.0)
        h = build_dicke_hamiltonian(p).toarray()
        assert np.allclose(np.diag(h), [-0.5, 0.5])
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0

    def test_decoupled_diagonal(self):
        p = params(coupling=0.0, delta_phi=0.0, omega0=0.7, omega=1.3)
        h = build_dicke_hamiltonian(p)
        n, m = basis_quantum_numbers(p)
        assert np.allclose(h.diagonal(), 1.3 * n + 0.7 * m)
        assert h.nnz == np.count_nonzero(1.3 * n + 0.7 * m)

    @pytest.mark.parametrize("kw", [
        dict(), dict(j=2.5, n_max=7, coupling=0.4),
        dict(j=10, n_max=60, coupling=1.3),
    ])
    def test_hermitian(self, kw):
        h = build_dicke_hamiltonian(params(**kw))
        assert abs(h - h.T).max() <= 1e-14
        assert np.all(h.data != 0.0)  # no explicit zeros stored

    def test_rotated_identity(self):
        # rotation only renormalises the level splitting
        p = params(omega0=0.8, delta_phi=0.7)
        h_rot = build_rotated_hamiltonian(p)
        h_equiv = build_dicke_hamiltonian(params(omega0=1.5, delta_phi=0.0))
        assert abs(h_rot - h_equiv).max() == 0.0

    def test_rotated_reduces_to_static(self):
        p = params(delta_phi=0.0)
        assert abs(build_rotated_hamiltonian(p)
                   - build_dicke_hamiltonian(p)).max() == 0.0

    def test_critical_coupling_at_unit_drive(self):
        p = params(omega=1.0, omega0=1.0, delta_phi=1.0)
        assert p.lambda_c == pytest.approx(0.7071067811865476, abs=1e-15)

    def test_matrix_elements(self):
        # coupling element between (n=0, m) and (n=1, m+-1)
        p = params(j=1, n_max=2, coupling=0.3, delta_phi=0.0)
        h = build_dicke_hamiltonian(p).toarray()
        i0 = flat_index(p, 0, -1.0)
        i1 = flat_index(p, 1, 0.0)
        # <1,0|H|0,-1> = (coupling/sqrt(2j)) * sqrt(1) * sqrt(j(j+1) - (-1)*0)
        expect = 0.3 / np.sqrt(2.0) * 1.0 * np.sqrt(2.0)
        assert h[i1, i0] == pytest.approx(expect, abs=1e-15)


class TestParity:
    def test_eigenvalues(self):
        p = params(j=1.5, n_max=2)
        sgn = parity_signs(p)
        assert sgn[flat_index(p, 0, -p.j)] == 1.0   # zero excitations
        assert sgn[flat_index(p, 1, -p.j)] == -1.0

    @pytest.mark.parametrize("builder", [build_dicke_hamiltonian,
                                         build_rotated_hamiltonian])
    def test_commutes_with_hamiltonian(self, builder):
        p = params(j=2, n_max=6, coupling=0.9)
        h = builder(p)
        pi = build_parity(p)
        assert abs(pi @ h - h @ pi).max() < 1e-13

    def test_block_structure(self):
        # no matrix element couples the even and odd sectors
        p = params(j=1.5, n_max=5, coupling=1.1)
        h = build_dicke_hamiltonian(p).tocoo()
        sgn = parity_signs(p)
        assert np.all(sgn[h.row] == sgn[h.col])


class TestObservables:
    def test_photon_number_diagonal(self):
        p = params(j=1, n_max=4)
        num = build_observable("photon_number", p)
        i = flat_index(p, 3, 0.0)
        assert num[i, i] == 3.0

    def test_excitation_counter_vacuum(self):
        p = params(j=1.5, n_max=3)
        nex = build_observable("N_ex", p)
        i = flat_index(p, 0, -p.j)
        assert abs(nex[i, i]) < 1e-15
        assert abs(nex - nex.T).max() == 0.0

    def test_jplus_highest_weight(self):
        p = params(j=1.5, n_max=2)
        jp = build_observable("Jplus", p)
        col = jp[:, flat_index(p, 1, p.j)].toarray()
        assert np.all(col == 0.0)

    def test_ladder_adjoints(self):
        p = params(j=2, n_max=4)
        assert abs(build_observable("Jplus", p)
                   - build_observable("Jminus", p).T).max() == 0.0
        a = build_observable("a", p)
        num = build_observable("photon_number", p)
        assert abs(a.T @ a - num).max() < 1e-13

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_observable("Jx", params())


class TestCoherentState:
    def test_vacuum(self):
        p = params(j=1.5, n_max=4)
        psi = coherent_state(p, 0.0, 0.0)
        i = flat_index(p, 0, -p.j)
        assert psi[i] == pytest.approx(1.0)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-14)

    def test_expectation_values(self):
        # coherent-state identities: <a> = alpha, <a^dag a> = |alpha|^2,
        # <Jz> = -j (1-|zeta|^2)/(1+|zeta|^2), <J+> = 2j zeta*/(1+|zeta|^2)
        p = params(j=2, n_max=40)
        alpha, zeta = 0.7 + 0.3j, 0.4 - 0.2j
        psi = coherent_state(p, alpha, zeta)
        a = build_observable("a", p)
        num = build_observable("photon_number", p)
        jz = build_observable("Jz", p)
        jp = build_observable("Jplus", p)
        z2 = abs(zeta) ** 2
        assert np.vdot(psi, a @ psi) == pytest.approx(alpha, abs=1e-10)
        assert np.vdot(psi, num @ psi) == pytest.approx(abs(alpha) ** 2, abs=1e-10)
        assert np.vdot(psi, jz @ psi) == pytest.approx(
            -p.j * (1 - z2) / (1 + z2), abs=1e-12)
        assert np.vdot(psi, jp @ psi) == pytest.approx(
            2 * p.j * np.conj(zeta) / (1 + z2), abs=1e-12)

    def test_large_amplitude_no_overflow(self):
        p = params(j=5, n_max=120)
        psi = coherent_state(p, 8.0, 0.5)
        assert np.isfinite(psi).all()
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)

    def test_top_layer_monitor(self):
        p = params(j=1, n_max=30)
        psi = coherent_state(p, 1.0, 0.2)
        assert top_fock_layer_max(p, psi) < 1e-15
        psi_top = np.zeros(p.dim, dtype=complex)
        psi_top[-1] = 1.0
        assert top_fock_layer_max(p, psi_top) == 1.0
