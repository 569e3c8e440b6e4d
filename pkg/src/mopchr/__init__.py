"""Multiple orthogonal polynomials, nearest-neighbour recurrences and Christoffel transforms.

The public names below are re-exported from the submodules:

``numerics``
    scalar fields, :class:`Poly`, exact and float linear solves
``functionals``
    moment functionals, catalog families and systems
``recurrence``
    one-functional Jacobi data and one-step transforms
``lattice``
    the multi-index recurrence lattice, oracles, type I solves and kernels
``christoffel``
    Christoffel transforms of systems
``zeros``
    roots, interlacing and mesh checks
"""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .numerics import (COMPLEX, RATIONAL, REAL, Field, Poly, SingularMatrixError, coerce, eps_rel,
                       solve_linear)
from .functionals import (DomainError, FamilySpec, MomentFunctional, MopSystem, apply_polynomial,
                          family, finite_functional_from_roots, parse_family_shorthand,
                          random_weights, system_from_json)
from .recurrence import (Breakdown, JacobiData, QuasiDefiniteViolation, galant_one_step,
                         jacobi_from_moments, moments_from_jacobi, three_term_polys)
from .lattice import (BOUNDARY, BREAKDOWN, NORMAL, NnrrLattice, TypeIVector, cc_fill, cc_residuals,
                      cd_kernel, cd_residual, lattice_from_system, normality, oracle_a, oracle_b,
                      perfectness_scan, type1_residual, type1_solve, type2_coeffs, type2_oracle)
from .christoffel import (TransformSpec, augment_system, kernel_identities, repeated_transform,
                          transform_nnrr, transform_type1_det, transform_type1_onestep,
                          transform_type2_det, transform_type2_iterated, transform_type2_onestep,
                          typeICC_residual)
from .zeros import (NonConverged, RootSet, ToleranceAmbiguous, Verdict, interlace,
                    interlacing_suite, mesh, roots)

__all__ = [name for name in dir() if not name.startswith("_")]
