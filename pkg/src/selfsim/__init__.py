"""Rigorous computations for affine embeddings between self-similar sets on the line."""

__version__ = "0.1.0"
