"""aklab: numerical laboratory for pseudo-Kahler structures built from
hyperbolic affine spheres and holomorphic cubic differentials."""

__version__ = "0.1.0"
