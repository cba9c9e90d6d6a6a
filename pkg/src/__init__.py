"""Sparse-coded Wasserstein autoencoders for implicit-feedback recommendation."""
