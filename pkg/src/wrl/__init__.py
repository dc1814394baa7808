"""Willmore surfaces on structured conformal grids: multivector algebra,
energies, conservation-law residues, potentials, elastica and Hopf tori,
Lorentz norms and hyperbolic collars."""

from .catalogue import MobiusMap, SurfaceSpec, apply_mobius, extract_annulus, realize
from .errors import CurlDefectError, DegenerateImmersionError, NumericalGuardError
from .immersion import ChartDomain, ImmersionGrid, build_frames, willmore_energy
from .multivec import MultiVector, SimpleUnitNormal
from .residues import ResidueSet, residue_c, residue_c0, residue_c1, residue_sweep, solve_potentials

__version__ = "0.1.0"

__all__ = [
    "ChartDomain",
    "CurlDefectError",
    "DegenerateImmersionError",
    "ImmersionGrid",
    "MobiusMap",
    "MultiVector",
    "NumericalGuardError",
    "ResidueSet",
    "SimpleUnitNormal",
    "SurfaceSpec",
    "apply_mobius",
    "build_frames",
    "extract_annulus",
    "realize",
    "residue_c",
    "residue_c0",
    "residue_c1",
    "residue_sweep",
    "solve_potentials",
    "willmore_energy",
]
