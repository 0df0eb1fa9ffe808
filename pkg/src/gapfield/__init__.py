"""Potential fields between two nearly touching circular inclusions.

Series Green's function for the two-disk conductivity transmission
problem, built from iterated inversion maps, together with the volume
potentials that represent the solution field, finite-difference
reference solvers, and a disk-preserving conformal reduction.

Modules
-------
geometry
    Disk configuration, inversion maps, fixed points, iterated maps.
greens
    Series Green's function, its script variant, and derivatives.
potentials
    Volume potentials and the representation of the solution field.
fdsolve
    Finite-difference transmission and gap-strip reference solvers.
conformal
    Reduction of unequal radii to the symmetric two-disk setup.
sweeps
    Parameter sweep drivers behind the command line interface.
"""

from .geometry import (
    Geometry,
    FixedPoints,
    Region,
    Frame,
    classify_region,
    phi1,
    phi2,
    fixed_points,
    psi_pow,
    psi_iterate,
    d_psi_pow,
    i_k,
    gap_points,
)
from .greens import (
    Conductivity,
    GreenParams,
    GreenValue,
    green,
    green_script,
    d_green,
)
from .potentials import (
    Quadrature,
    SourceData,
    PotentialValue,
    bump_source,
    mirrored_bump_source,
    h_pot,
    g_pot,
    u_rep,
    d_u_rep,
)
from . import errors

__version__ = "0.1.0"
