"""Self-Kerr optomechanical nonlinearity under quantum Brownian motion."""

__version__ = "0.1.0"
