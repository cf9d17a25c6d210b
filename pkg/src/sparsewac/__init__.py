"""Sparsity-promoting wide-area control of power networks."""
