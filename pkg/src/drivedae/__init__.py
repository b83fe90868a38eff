"""Denoising driver assistance for simulated teleoperated off-road driving."""

__version__ = "0.1.0"
