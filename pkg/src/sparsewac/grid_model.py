"""Linearized swing-equation plants, coherency costs and PSS blocks.

State ordering is always ``[angles; frequencies; remaining]`` with one angle
and one frequency state per generator.  Generators, inputs and states are
indexed from zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "PowerNetwork",
    "StateLabels",
    "LinearPlant",
    "CoherencyPartition",
    "Aggregation",
    "CostSpec",
    "PssParams",
    "SisoBlock",
    "kron_reduce",
    "swing_laplacian",
    "linearize_swing",
    "aggregate_coherency",
    "build_cost_average",
    "build_cost_two_area",
    "realize_pss",
    "attach_pss",
]


class FloatingSubnetworkError(np.linalg.LinAlgError):
    pass


@dataclass
class PowerNetwork:
    """Generator data plus the full bus admittance matrix.

    `Y` is indexed by bus; ``generator_buses[i]`` is the bus of generator i.
    Every bus not listed there is eliminated by Kron reduction.
    """

    M: np.ndarray
    D: np.ndarray
    E: np.ndarray
    P: np.ndarray
    theta: np.ndarray
    Y: np.ndarray
    generator_buses: list = None
    names: list = None

    def __post_init__(self):
        for attr in ("M", "D", "E", "P", "theta"):
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=float).ravel())
        self.Y = np.asarray(self.Y, dtype=complex)
        ng = self.M.size
        if self.generator_buses is None:
            self.generator_buses = list(range(ng))
        self.generator_buses = [int(b) for b in self.generator_buses]
        if self.names is None:
            self.names = [str(i + 1) for i in range(ng)]
        self.validate()

    @property
    def n_gen(self):
        return self.M.size

    def validate(self):
        ng = self.n_gen
        if ng < 2:
            raise ValueError("a power network needs at least 2 generators")
        for attr in ("D", "E", "P", "theta"):
            if getattr(self, attr).size != ng:
                raise ValueError(f"{attr} has {getattr(self, attr).size} entries, expected {ng}")
        if len(self.names) != ng or len(self.generator_buses) != ng:
            raise ValueError("names/generator_buses must list every generator")
        for i in range(ng):
            if not self.M[i] > 0:
                raise ValueError(f"generator {self.names[i]}: inertia M must be > 0, got {self.M[i]}")
            if not self.D[i] >= 0:
                raise ValueError(f"generator {self.names[i]}: damping D must be >= 0, got {self.D[i]}")
            if not self.E[i] > 0:
                raise ValueError(f"generator {self.names[i]}: voltage E must be > 0, got {self.E[i]}")
        Y = self.Y
        if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
            raise ValueError(f"Y must be square, got shape {Y.shape}")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y has non-finite entries")
        if not np.allclose(Y, Y.T, rtol=0, atol=1e-10 * max(1.0, np.abs(Y).max())):
            raise ValueError("Y must be symmetric")
        if len(set(self.generator_buses)) != ng or max(self.generator_buses) >= Y.shape[0] \
                or min(self.generator_buses) < 0:
            raise ValueError("generator_buses must be distinct bus indices")


@dataclass
class StateLabels:
    """Index sets of a plant's state and input vectors.

    ``generator_of_state[k]`` is the generator owning state k, or -1 for a
    state that belongs to no generator.  ``generator_of_input[i]`` is the
    generator actuated by input i.
    """

    angle: list
    frequency: list
    remaining: list
    generator_of_state: list
    generator_of_input: list

    def __post_init__(self):
        for attr in ("angle", "frequency", "remaining", "generator_of_state",
                     "generator_of_input"):
            setattr(self, attr, [int(v) for v in getattr(self, attr)])

    @property
    def n_gen(self):
        return len(self.angle)

    def validate(self, n, p):
        if len(self.angle) != len(self.frequency):
            raise ValueError("angle and frequency index sets must have equal size")
        idx = self.angle + self.frequency + self.remaining
        if sorted(idx) != list(range(n)):
            raise ValueError("angle/frequency/remaining indices must partition the states")
        if len(self.generator_of_state) != n:
            raise ValueError(f"generator_of_state has {len(self.generator_of_state)} entries, expected {n}")
        if len(self.generator_of_input) != p:
            raise ValueError(f"generator_of_input has {len(self.generator_of_input)} entries, expected {p}")

    def to_dict(self):
        return {
            "angle": list(self.angle),
            "frequency": list(self.frequency),
            "remaining": list(self.remaining),
            "generator_of_state": list(self.generator_of_state),
            "generator_of_input": list(self.generator_of_input),
        }


@dataclass
class LinearPlant:
    """``x' = A x + B1 eta + B2 u`` with state labels."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    labels: StateLabels

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B1 = np.atleast_2d(np.asarray(self.B1, dtype=float))
        self.B2 = np.atleast_2d(np.asarray(self.B2, dtype=float))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.B1.shape[0] != n:
            raise ValueError(f"B1 has {self.B1.shape[0]} rows, expected {n}")
        if self.B2.shape[0] != n:
            raise ValueError(f"B2 has {self.B2.shape[0]} rows, expected {n}")
        for name in ("A", "B1", "B2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")
        self.labels.validate(n, self.B2.shape[1])

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.B2.shape[1]

    @property
    def q(self):
        return self.B1.shape[1]


@dataclass
class CoherencyPartition:
    """Disjoint generator areas; index lists are zero-based."""

    areas: list

    def __post_init__(self):
        self.areas = [[int(i) for i in a] for a in self.areas]
        for k, a in enumerate(self.areas):
            if not a:
                raise ValueError(f"area {k} is empty")
        flat = [i for a in self.areas for i in a]
        if len(flat) != len(set(flat)):
            raise ValueError("areas must be disjoint")

    def check_covers(self, n_gen):
        flat = sorted(i for a in self.areas for i in a)
        if flat != list(range(n_gen)):
            raise ValueError(f"partition must cover generators 0..{n_gen - 1} exactly")

    def mass_fractions(self, M):
        """Matrix T (areas x generators) with ``delta = T @ theta``."""
        M = np.asarray(M, dtype=float)
        self.check_covers(M.size)
        T = np.zeros((len(self.areas), M.size))
        for k, a in enumerate(self.areas):
            T[k, a] = M[a] / M[a].sum()
        return T


@dataclass
class Aggregation:
    T: np.ndarray            # areas x generators, delta = T theta
    state_map: np.ndarray    # areas x n, delta = state_map x
    M: np.ndarray
    D: np.ndarray
    L: np.ndarray


@dataclass
class CostSpec:
    Q: np.ndarray
    R: np.ndarray
    provenance: dict = field(default_factory=lambda: {"builder": "external"})

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        R = np.asarray(self.R, dtype=float)
        if R.ndim <= 1:
            R = np.diag(np.atleast_1d(R))
        self.R = R
        if self.Q.shape[0] != self.Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.all(np.isfinite(self.Q)) or not np.all(np.isfinite(self.R)):
            raise ValueError("cost matrices have non-finite entries")
        if not np.allclose(self.Q, self.Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(self.Q).max())):
            raise ValueError("Q must be symmetric")
        if np.count_nonzero(self.R - np.diag(np.diag(self.R))):
            raise ValueError("R must be diagonal")
        if not np.all(np.diag(self.R) > 0):
            raise ValueError("R diagonal entries must be > 0")
        if self.Q.size:
            lam_min = np.linalg.eigvalsh(self.Q).min()
            if lam_min < -1e-10 * max(1.0, np.linalg.norm(self.Q, 2)):
                raise ValueError(f"Q is not positive semidefinite (min eigenvalue {lam_min:.3e})")


@dataclass(frozen=True)
class PssParams:
    k: float
    Tw: float = 3.0
    Tn1: float = 0.1
    Td1: float = 0.01
    Tn2: float = 0.1
    Td2: float = 0.01

    def __post_init__(self):
        for name in ("Tw", "Tn1", "Td1", "Tn2", "Td2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"PSS time constant {name} must be > 0")
        if not self.k >= 0:
            raise ValueError("PSS gain must be >= 0")

    def transfer(self, s):
        """Direct rational evaluation of the PSS transfer function."""
        s = np.asarray(s, dtype=complex)
        return (self.k * (self.Tw * s) / (1 + self.Tw * s)
                * (1 + self.Tn1 * s) / (1 + self.Td1 * s)
                * (1 + self.Tn2 * s) / (1 + self.Td2 * s))


@dataclass
class SisoBlock:
    """State-space ``(A, B, C, D)`` of a single-input single-output block."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float

    def freq_response(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        n = self.A.shape[0]
        I = np.eye(n)
        out = np.array([(self.C @ np.linalg.solve(si * I - self.A, self.B)).item() + self.D
                        for si in s])
        return out

    @property
    def dc_gain(self):
        return float(self.D - (self.C @ np.linalg.solve(self.A, self.B)).item())


def kron_reduce(Y, keep):
    """Eliminate every bus not in `keep` by a Schur complement.

    Returns ``Y_kk - Y_ke Y_ee^{-1} Y_ek`` in the order given by `keep`.
    """
    Y = np.asarray(Y, dtype=complex)
    keep = [int(k) for k in keep]
    elim = [i for i in range(Y.shape[0]) if i not in set(keep)]
    Ykk = Y[np.ix_(keep, keep)]
    if not elim:
        return Ykk.copy()
    Yee = Y[np.ix_(elim, elim)]
    Yke = Y[np.ix_(keep, elim)]
    Yek = Y[np.ix_(elim, keep)]
    cond = np.linalg.cond(Yee)
    if not np.isfinite(cond) or cond > 1e14:
        raise FloatingSubnetworkError(
            f"floating load subnetwork: load-bus admittance block is singular (cond {cond:.3e})")
    Yred = Ykk - Yke @ np.linalg.solve(Yee, Yek)
    return 0.5 * (Yred + Yred.T)


def swing_laplacian(Yred, E, theta):
    """Linearized coupling matrix of the swing equations.

    ``L_ij = -|Y_ij| E_i E_j cos(theta_i - theta_j - phi_ij)`` off the
    diagonal with ``phi_ij = -arctan(Re Y_ij / Im Y_ij)``, and zero row sums.
    """
    Yred = np.asarray(Yred, dtype=complex)
    E = np.asarray(E, dtype=float)
    theta = np.asarray(theta, dtype=float)
    mag = np.abs(Yred)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = -np.arctan(Yred.real / Yred.imag)
    phi = np.where(mag > 0, np.nan_to_num(phi, nan=0.0), 0.0)
    dtheta = theta[:, None] - theta[None, :]
    L = -mag * np.outer(E, E) * np.cos(dtheta - phi)
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def linearize_swing(net, actuated=None, b1_policy="input"):
    """First-order linearization of the swing equations.

    Parameters
    ----------
    net : PowerNetwork
    actuated : sequence of int, optional
        Generators receiving a control input (default: all).  Input i adds
        power to generator ``actuated[i]``, so its B2 column is ``1/M`` in
        that generator's frequency row.
    b1_policy : {"input", "frequency"}
        ``"input"`` sets ``B1 = B2``; ``"frequency"`` injects unit noise
        into every frequency state.

    Returns
    -------
    LinearPlant
    """
    ng = net.n_gen
    Yred = kron_reduce(net.Y, net.generator_buses)
    L = swing_laplacian(Yred, net.E, net.theta)
    off = L - np.diag(np.diag(L))
    if np.any(off > 0):
        warnings.warn("swing coupling has negative line weights (large angle "
                      "differences); L is not a Laplacian", RuntimeWarning, stacklevel=2)
    Minv = 1.0 / net.M
    A = np.block([
        [np.zeros((ng, ng)), np.eye(ng)],
        [-Minv[:, None] * L, -np.diag(Minv * net.D)],
    ])
    if actuated is None:
        actuated = list(range(ng))
    actuated = [int(g) for g in actuated]
    if any(g < 0 or g >= ng for g in actuated):
        raise ValueError("actuated generator index out of range")
    B2 = np.zeros((2 * ng, len(actuated)))
    for i, g in enumerate(actuated):
        B2[ng + g, i] = Minv[g]
    if b1_policy == "input":
        B1 = B2.copy()
    elif b1_policy == "frequency":
        B1 = np.vstack([np.zeros((ng, ng)), np.eye(ng)])
    else:
        raise ValueError(f"unknown B1 policy {b1_policy!r}")
    labels = StateLabels(
        angle=list(range(ng)),
        frequency=list(range(ng, 2 * ng)),
        remaining=[],
        generator_of_state=list(range(ng)) * 2,
        generator_of_input=actuated,
    )
    return LinearPlant(A, B1, B2, labels)


def aggregate_coherency(plant, net, part):
    """Center-of-inertia aggregation of coherent areas.

    Returns an :class:`Aggregation` holding ``delta = T theta`` (and the same
    map lifted to the full state), together with the aggregated inertia,
    damping and Laplacian ``U^T M U``, ``U^T D U``, ``U^T L U`` where U is
    the area indicator matrix.
    """
    ng = net.n_gen
    if plant.labels.n_gen != ng:
        raise ValueError("plant and network disagree on the generator count")
    T = part.mass_fractions(net.M)
    U = np.zeros((ng, len(part.areas)))
    for k, a in enumerate(part.areas):
        U[a, k] = 1.0
    Yred = kron_reduce(net.Y, net.generator_buses)
    L = swing_laplacian(Yred, net.E, net.theta)
    state_map = np.zeros((len(part.areas), plant.n))
    state_map[:, plant.labels.angle] = T
    return Aggregation(
        T=T,
        state_map=state_map,
        M=U.T @ np.diag(net.M) @ U,
        D=U.T @ np.diag(net.D) @ U,
        L=U.T @ L @ U,
    )


def _cost_R(plant, r):
    r = np.broadcast_to(np.asarray(r, dtype=float), (plant.p,))
    return np.diag(r)


def build_cost_average(plant, ell, m, eps, r=1.0):
    """State cost ``1/2 th' L_unif th + 1/2 w' M_unif w + eps |th|^2``.

    ``L_unif = ell (I - 11'/n_g)`` and ``M_unif = m I``; states outside the
    angle and frequency blocks carry no weight.
    """
    if not ell > 0 or not m > 0 or not eps >= 0:
        raise ValueError("need ell > 0, m > 0, eps >= 0")
    lab = plant.labels
    ng = lab.n_gen
    L_unif = np.full((ng, ng), -ell / ng)
    np.fill_diagonal(L_unif, 0.0)
    np.fill_diagonal(L_unif, -L_unif.sum(axis=1))
    Q = np.zeros((plant.n, plant.n))
    Q[np.ix_(lab.angle, lab.angle)] = 0.5 * L_unif + eps * np.eye(ng)
    Q[np.ix_(lab.frequency, lab.frequency)] = 0.5 * m * np.eye(ng)
    prov = {"builder": "average", "ell": float(ell), "m": float(m), "eps": float(eps)}
    return CostSpec(Q, _cost_R(plant, r), prov)


def build_cost_two_area(plant, part, M, ell, m, eps, r=1.0):
    """State cost ``ell |d_a - d_b|^2 + m |d_a' - d_b'|^2 + eps |th|^2``.

    `M` holds the generator inertias used for the center-of-mass variables.
    """
    if len(part.areas) != 2:
        raise ValueError(f"two-area cost needs exactly 2 areas, got {len(part.areas)}")
    if not ell >= 0 or not m >= 0 or not eps >= 0:
        raise ValueError("need ell, m, eps >= 0")
    lab = plant.labels
    T = part.mass_fractions(M)
    c = T[0] - T[1]
    cc = np.outer(c, c)
    Q = np.zeros((plant.n, plant.n))
    Q[np.ix_(lab.angle, lab.angle)] = ell * cc + eps * np.eye(lab.n_gen)
    Q[np.ix_(lab.frequency, lab.frequency)] = m * cc
    prov = {"builder": "two_area", "ell": float(ell), "m": float(m), "eps": float(eps),
            "areas": [list(a) for a in part.areas]}
    return CostSpec(Q, _cost_R(plant, r), prov)


def _series(b1, b2):
    """Series connection: input -> b1 -> b2 -> output."""
    n1, n2 = b1.A.shape[0], b2.A.shape[0]
    A = np.block([[b1.A, np.zeros((n1, n2))], [b2.B @ b1.C, b2.A]])
    B = np.vstack([b1.B, b2.B * b1.D])
    C = np.hstack([b2.D * b1.C, b2.C])
    return SisoBlock(A, B, C, b2.D * b1.D)


def _first_order(a, b, c, d):
    return SisoBlock(np.array([[a]]), np.array([[b]]), np.array([[c]]), float(d))


def realize_pss(params):
    """Three-state realization of washout plus two lead/lag stages."""
    p = params
    # Tw s/(1+Tw s) = 1 - 1/(1+Tw s)
    washout = _first_order(-1 / p.Tw, 1.0, -p.k / p.Tw, p.k)
    # (1+Tn s)/(1+Td s) = Tn/Td + (1 - Tn/Td)/(1+Td s)
    ll1 = _first_order(-1 / p.Td1, 1.0, (1 - p.Tn1 / p.Td1) / p.Td1, p.Tn1 / p.Td1)
    ll2 = _first_order(-1 / p.Td2, 1.0, (1 - p.Tn2 / p.Td2) / p.Td2, p.Tn2 / p.Td2)
    return _series(_series(washout, ll1), ll2)


def attach_pss(plant, gen, params, sign=-1.0):
    """Close a local PSS loop around generator `gen`.

    The PSS measures the generator frequency and its output, multiplied by
    `sign`, is added to the generator's control input column of B2.  In the
    swing model an input is an accelerating power, so damping requires
    ``sign = -1``.  The three PSS states are appended to the remaining
    states; B1 and B2 gain zero rows.
    """
    lab = plant.labels
    cols = [i for i, g in enumerate(lab.generator_of_input) if g == gen]
    if not cols:
        raise ValueError(f"generator {gen} has no control input to carry the PSS signal")
    b = plant.B2[:, cols[0]]
    w = lab.frequency[gen]
    blk = realize_pss(params)
    n = plant.n
    nb = blk.A.shape[0]
    A = np.zeros((n + nb, n + nb))
    A[:n, :n] = plant.A + sign * blk.D * np.outer(b, np.eye(n)[w])
    A[:n, n:] = sign * np.outer(b, blk.C.ravel())
    A[n:, :n] = np.outer(blk.B.ravel(), np.eye(n)[w])
    A[n:, n:] = blk.A
    pad = np.zeros((nb, 1))
    labels = replace(
        lab,
        remaining=lab.remaining + list(range(n, n + nb)),
        generator_of_state=lab.generator_of_state + [gen] * nb,
    )
    return LinearPlant(
        A,
        np.vstack([plant.B1, np.repeat(pad, plant.q, axis=1)]),
        np.vstack([plant.B2, np.repeat(pad, plant.p, axis=1)]),
        labels,
    )
