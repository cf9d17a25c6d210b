"""Random instances and brute-force oracles shared by the test modules."""

import numpy as np
import scipy.linalg as sla

from sparsewac.grid_model import CostSpec, LinearPlant, StateLabels

# Reference inter-area modes of the New England grid (eigenvalue, zeta, f Hz)
NE_MODES = [
    (complex(-0.6347, 3.7672), 0.16614, 0.59956),
    (complex(-0.7738, 6.7684), 0.11358, 1.0772),
    (complex(-1.1310, 5.7304), 0.19364, 0.91202),
    (complex(-1.1467, 5.9095), 0.19049, 0.94052),
    (complex(-1.5219, 5.8923), 0.25009, 0.93778),
]


def sig_digits_match(value, reference, digits=5):
    """Agreement to `digits` significant digits: relative error <= 5 * 10^-digits."""
    return abs(value - reference) <= 5 * 10.0 ** (-digits) * abs(reference)


def kron_lyapunov(A, W):
    """Solve ``A' P + P A = -W`` through the n^2 x n^2 vectorized system."""
    n = A.shape[0]
    I = np.eye(n)
    big = np.kron(I, A.T) + np.kron(A.T, I)
    return np.linalg.solve(big, -W.reshape(-1, order="F")).reshape(n, n, order="F")


def random_hurwitz(rng, n, margin=0.1):
    A = rng.normal(size=(n, n))
    shift = max(np.linalg.eigvals(A).real) + margin + rng.uniform(0, 1)
    return A - shift * np.eye(n)


def generic_labels(n, p):
    return StateLabels([], [], list(range(n)), [-1] * n, [0] * p)


def random_plant(rng, n=None, p=None, q=None, full_noise=False):
    """Random (A, B1, B2) with R = I and Q = C'C/n + 0.1 I."""
    n = int(rng.integers(2, 9)) if n is None else n
    p = int(rng.integers(1, n + 1)) if p is None else p
    if full_noise:
        q = n
    q = int(rng.integers(1, n + 1)) if q is None else q
    A = rng.normal(size=(n, n))
    B1 = rng.normal(size=(n, q))
    B2 = rng.normal(size=(n, p))
    C = rng.normal(size=(n, n))
    Q = C.T @ C / n + 0.1 * np.eye(n)
    plant = LinearPlant(A, B1, B2, generic_labels(n, p))
    return plant, CostSpec(Q, np.eye(p))


def expm_trajectory(Acl, x0, times):
    return np.array([sla.expm(Acl * t) @ x0 for t in times])
