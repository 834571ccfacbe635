"""Complex-scaling resonances of 1D bosons and their complex entanglement.

The package computes resonance states of one- and two-particle systems by
rotating the Hamiltonian into the complex plane (x -> x*exp(i*theta)),
diagonalizing the resulting complex-symmetric matrices in a harmonic
oscillator / permanent basis, and analyzing two-boson resonances through the
Schmidt decomposition of their coefficient matrix: complex occupancies
lambda_n, complex von Neumann and linear entropies, and the exact
Tonks-Girardeau (g -> infinity) reference.
"""

from .basis     import BasisSpec, QuadratureRule, evaluate_ho, gauss_hermite, overlap_check
from .operators import (DiagnosticError, ModelParams, ScaledOperator,
                        build_one_particle, build_two_particle, delta_element,
                        kinetic_element, potential_element, two_particle_parts)
from .schmidt   import (CoefficientMatrix, ComplexEntropy, EntanglementSpectrum,
                        coefficient_matrix, complex_entropies, mean_value,
                        rdm_eigenvalues_direct, takagi_symmetric)
from .spectral  import (EigenPair, NoResonanceError, ResonanceState, ThetaScan,
                        eigendecompose, find_resonance, stabilized_resonances,
                        theta_scan)
from .tonks     import (ResonanceOrbital, TGReference, tg_coefficient_matrix,
                        tg_position, tg_reference)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec", "QuadratureRule", "evaluate_ho", "gauss_hermite", "overlap_check",
    "ModelParams", "ScaledOperator", "DiagnosticError",
    "kinetic_element", "potential_element", "delta_element",
    "build_one_particle", "build_two_particle", "two_particle_parts",
    "EigenPair", "ResonanceState", "ThetaScan", "NoResonanceError",
    "eigendecompose", "theta_scan", "find_resonance", "stabilized_resonances",
    "CoefficientMatrix", "EntanglementSpectrum", "ComplexEntropy",
    "coefficient_matrix", "takagi_symmetric", "rdm_eigenvalues_direct",
    "complex_entropies", "mean_value",
    "ResonanceOrbital", "TGReference",
    "tg_position", "tg_coefficient_matrix", "tg_reference",
    "__version__",
]
