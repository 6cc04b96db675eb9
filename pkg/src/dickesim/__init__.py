"""Rotationally driven Dicke model: exact quantum dynamics at finite spin
via Chebyshev propagation, classical mean-field dynamics in the
thermodynamic limit, geometric-phase-resolved evolution, and the
dynamically generated darkness phenomenology."""

__version__ = "0.1.0"

from .meanfield import (FINE_TUNED_COUPLING, FINE_TUNED_PRESET,
                        ClassicalState, CoherentParams, LinearModes,
                        LinearSolution, classical_hamiltonian,
                        classical_potential, eom_rhs, fine_tuned_state,
                        integrate, lab_frame, linear_modes, linear_solution,
                        quench_initial_state, stationary_states)
from .model import (DIMENSION_CAP, DimensionOverflowError, ModelParams,
                    basis_quantum_numbers, build_dicke_hamiltonian,
                    build_observable, build_parity,
                    build_rotated_hamiltonian, coherent_state, flat_index,
                    parity_signs, top_fock_layer_max)
from .propagator import (ChebyshevPlan, PropagationError, QuantumState,
                         evolve_and_sample, make_plan, step, time_average)
from .spectra import (EigenDecomposition, GroundState, SpectralBounds,
                      extremal_eigenvalues, full_diagonalization,
                      ground_state)
from .geomphase import berry_phase, connection_matrix, evolve_phase_resolved
from .mexhat import (MexHatParams, average_rho_squared,
                     average_rho_squared_numeric, half_period,
                     integrate_mexhat, sweep_eps, turning_points)
from .specfun import bessel_j_array, elliptic_e, elliptic_ke
from .experiments import (CriticalLineFit, ScanResult, ScanSpec,
                          critical_line, dynamic_critical_estimate,
                          locate_darkness_minimum, potential_grid,
                          run_quench, scan)
from .timeseries import TimeSeries
