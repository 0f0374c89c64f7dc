"""Scattering resonances and exceptional points of sound-hard obstacle arrays.

Submodules
----------
linalg     dense LU / SVD / eigen kernels with failure reporting
specfun    Bessel and Hankel functions of complex argument
geometry   circles, ellipses and disk grids
bie        Nystrom discretization of the boundary integral operators
nep        contour-integral nonlinear eigensolver
epfinder   exceptional-point search and diagnostics
mech       spring-mass models with known defective spectra
cli        the ``resonex`` command-line interface
"""

__version__ = "0.1.0"
