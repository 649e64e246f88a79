"""Autoencoder fraud detection with binary-bat feature selection."""

__version__ = "0.1.0"
