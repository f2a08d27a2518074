"""Multimodal latent-variable toolkit for corporate bankruptcy prediction.

The package trains a conditional multimodal model (cmmd) on accounting,
market, and disclosure-text data, evaluates it against from-scratch
baselines, and derives a market-wide uncertainty index from the learned
latent variances. Everything runs on numpy float64 with hand-written
gradients; see numcore for the engine and tests/ for the oracle suites.
"""

__version__ = "0.1.0"
