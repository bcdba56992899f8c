"""VC-bound modeling of double descent for random-feature and one-hidden-layer classifiers."""

__version__ = "0.1.0"
