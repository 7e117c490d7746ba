"""Complex dimensions, fractal zeta functions and tube formulas.

Modules:
    expr       symbolic meromorphic expressions, residues, contour integrals
    strings    fractal strings, geometric zeta functions, exact tube volumes
    moran      Moran equations: real dimension, complex roots, lattice test
    spray      self-similar sprays, divisors and the example catalog
    tube       tube formulas from poles, measurability and fractality
    measure    raster tube volumes and content estimates
    spectral   frequency counting and the Riemann zeta function
    cli        the ``fractalzeta`` command
"""
__version__ = "0.1.0"
