"""Contact pseudopotentials for anisotropic interactions between trapped particles."""

from .angular import clebsch_gordan, legendre, reduced_c, spherical_bessel, wigner3j
from .errors import DomainError
from .kmatrix import (
    KMatrix,
    RadialPotential,
    born_kmatrix,
    born_radial_integral,
    isotropic,
    scattering_lengths,
    validate,
)
from .matel import expectation, fd_oracle
from .operators import c_tensor_nabla, homogenized_legendre_dot, render, tensor_product
from .pseudopotential import (
    assemble_born,
    assemble_general,
    assemble_isotropic,
    coupling_T,
    kernel,
    truncated_dipolar,
)
from .states import HermiteGaussian3D
from .trap import TrapConfig, collision_momentum, multipolar_radius, validity_report

__version__ = "0.1.0"
