"""Exact construction and certification of flat cycles for quaternionic lattices."""

from .certify import Certificate, certify, intersection_matrix, orbit_translates, signed_count
from .exactreal import AlgebraicReal, Embedding, QuadElem, QuadField, TowerElem, algreal_compare
from .flats import ConfigSpec, Flat, build_configuration, flat_of_quat, flats_intersect
from .moebius import INF, Mat2R, OrientedGeodesic, act_boundary, axis, classify_jordan, fixed_points
from .quaternion import AlgebraDesc, GroupSpec, OrderSpec, QuatElem, enumerate_norm_one, tau

__all__ = [
    "AlgebraDesc", "AlgebraicReal", "Certificate", "ConfigSpec", "Embedding", "Flat", "GroupSpec",
    "INF", "Mat2R", "OrderSpec", "OrientedGeodesic", "QuadElem", "QuadField", "QuatElem", "TowerElem",
    "act_boundary", "algreal_compare", "axis", "build_configuration", "certify", "classify_jordan",
    "enumerate_norm_one", "fixed_points", "flat_of_quat", "flats_intersect", "intersection_matrix",
    "orbit_translates", "signed_count", "tau",
]
