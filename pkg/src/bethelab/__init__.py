"""Desk-scale workbench for nested Bethe-ansatz identities on a lattice
two-component Bose gas and its one-component and spin-chain reductions.

Everything is checked numerically on truncated Fock spaces: structure
constants and their consistency relations, monodromy exchange relations,
Bethe vectors in algebraic / coordinate / composite form, on-shell
eigenvector certification, large-parameter expansions, and zero modes.
"""

from .asymptotics import (ExtractionRecord, LocalExtraction, SeriesTerm,
                          WindowedEstimate, WindowedModes, ZeroModes,
                          antimorphism_residual, block_sums,
                          default_sigma_schedule, local_operator_extraction,
                          series_term, vacuum_exchange_residual,
                          windowed_mode_vector, zero_modes_exact,
                          zero_modes_windowed)
from .bethe import (BetheParams, SpinAmplitudeMap, StateVector, bv_gl2,
                    bv_gl3, bv_tcbg, chi_wavefunction, lattice_coordinate_bv,
                    omega_coeffs, spin_amplitude_map)
from .composite import (PartialVacuumData, SplitSpec, bv_composite,
                        composite_residual, partitions, split_model,
                        split_monodromy)
from .errors import (CapacityError, CollisionError, DimensionMismatchError,
                     PoleError, SectorError, SingularJacobianError,
                     StructureError)
from .fock import LatticeParams
from .models import (ModelKind, PartialModel, VacuumData, make_model,
                     vacuum_phase)
from .opalg import (CONFIG, AlgebraConfig, AuxMatrix, FockBasis,
                    LocalOperator, SpinBasis, build_basis)
from .solver import (BetheSystem, BetheVariant, SolveConfig, SolveReport,
                     bethe_ratio, bethe_residual, certify_onshell,
                     dedupe_roots, solve_bethe)
from .structfun import (f_fun, g_fun, izergin_det, prod_f, prod_g, r_matrix,
                        rtt_residual, spectral_norm, unitarity_residual,
                        yang_baxter_residual)

__version__ = "0.1.0"

__all__ = [
    "AlgebraConfig", "AuxMatrix", "BetheParams", "BetheSystem",
    "BetheVariant", "CONFIG", "CapacityError", "CollisionError",
    "DimensionMismatchError", "ExtractionRecord", "FockBasis",
    "LatticeParams", "LocalExtraction", "LocalOperator", "ModelKind",
    "PartialModel", "PartialVacuumData", "PoleError", "SectorError",
    "SeriesTerm", "SingularJacobianError", "SolveConfig", "SolveReport",
    "SpinAmplitudeMap", "SpinBasis", "SplitSpec", "StateVector",
    "StructureError", "VacuumData", "WindowedEstimate", "WindowedModes",
    "ZeroModes", "antimorphism_residual", "bethe_ratio", "bethe_residual",
    "block_sums", "build_basis", "bv_composite", "bv_gl2", "bv_gl3",
    "bv_tcbg", "certify_onshell", "chi_wavefunction",
    "composite_residual", "dedupe_roots", "default_sigma_schedule",
    "f_fun", "g_fun", "izergin_det", "lattice_coordinate_bv",
    "local_operator_extraction", "make_model", "omega_coeffs",
    "partitions", "prod_f", "prod_g", "r_matrix", "rtt_residual",
    "series_term", "solve_bethe", "spectral_norm", "spin_amplitude_map",
    "split_model", "split_monodromy", "unitarity_residual",
    "vacuum_exchange_residual", "vacuum_phase", "windowed_mode_vector",
    "yang_baxter_residual", "zero_modes_exact", "zero_modes_windowed",
    "__version__",
]
