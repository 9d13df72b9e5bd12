"""SU(1,1) coherent-state superpositions: Wigner functions, sensitivity and sub-Planck scaling."""

__version__ = "0.1.0"
