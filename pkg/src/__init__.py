"""
Floquet Emitter - modulated two-level emitter toolkit

Sideband scattering, photon correlations, pulsed single-photon generation,
Ramsey interference and inverse design of the modulation waveform.
"""

__version__ = '1.0.0'

__all__ = ['__version__']
