"""Missing-digit fractals: exact measures, Fourier l1 bounds, rational counting, approximation."""

__version__ = "0.1.0"
