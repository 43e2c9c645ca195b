"""Random-field Potts model toolkit on Z^2.

Greedy lattice animal optimization, quenched Gaussian fields, polygon
growth, heat-bath / ground-state Monte Carlo, and scaling-exponent fits.
"""

__version__ = "0.1.0"
