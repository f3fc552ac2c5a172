"""Numerics for a coherently dressed electron: smeared mean fields, the photon
cloud, infrared-finite soft-photon spectra and indefinite-metric Fock checks."""

__version__ = "0.1.0"
