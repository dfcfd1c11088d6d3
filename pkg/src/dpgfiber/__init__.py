"""Ultraweak DPG solver for time-harmonic Maxwell systems with Raman gain
in step-index fiber amplifiers."""

__version__ = "0.1.0"
