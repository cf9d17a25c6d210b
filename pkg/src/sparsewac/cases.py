"""Small reference networks used by the tests, demos and the CLI."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .grid_model import CoherencyPartition, PowerNetwork

__all__ = ["line_admittance", "two_area_four_machine", "ring_network", "bundled_network_path"]

BUNDLED_NETWORK = "two_area_4machine.json"


def line_admittance(n_bus, lines, shunts=None):
    """Bus admittance matrix from ``(i, j, z)`` series impedances.

    `shunts` maps bus index to a shunt admittance.
    """
    Y = np.zeros((n_bus, n_bus), dtype=complex)
    for i, j, z in lines:
        y = 1.0 / z
        Y[i, i] += y
        Y[j, j] += y
        Y[i, j] -= y
        Y[j, i] -= y
    for b, y in (shunts or {}).items():
        Y[b, b] += y
    return Y


def two_area_four_machine():
    """Two areas of two machines each, joined by one weak tie line.

    Buses 0-3 hold generators 0-3; buses 4 and 5 are the area hubs.  Lines
    are purely inductive and the hub shunts purely capacitive, so all phase
    shifts vanish.  Area 1 exports power to area 2 at the operating point.
    Generator 3 carries no wide-area actuator.

    Returns
    -------
    net : PowerNetwork
    actuated : list of int
    partition : CoherencyPartition
    """
    lines = [
        (0, 4, 0.15j),
        (1, 4, 0.20j),
        (2, 5, 0.15j),
        (3, 5, 0.20j),
        (0, 1, 0.40j),
        (2, 3, 0.40j),
        (4, 5, 0.60j),
    ]
    Y = line_admittance(6, lines, shunts={4: 0.5j, 5: 0.5j})
    H = np.array([6.5, 6.5, 6.175, 6.175])
    # inertia time base puts the modes near 0.3 Hz (inter-area) and 0.9 Hz (local)
    M = 2 * H / (2 * np.pi * 6)
    D = np.array([0.2, 0.2, 0.18, 0.18])
    E = np.array([1.03, 1.01, 1.03, 1.01])
    theta = np.array([0.35, 0.27, -0.12, -0.20])
    net = PowerNetwork(M=M, D=D, E=E, P=np.zeros(4), theta=theta, Y=Y,
                       generator_buses=[0, 1, 2, 3], names=["G1", "G2", "G3", "G4"])
    net.P = _injections(net)
    return net, [0, 1, 2], CoherencyPartition([[0, 1], [2, 3]])


def ring_network(n=3, x=1.0, M=1.0, D=1.0):
    """n identical machines on a ring of identical inductive lines."""
    lines = [(i, (i + 1) % n, 1j * x) for i in range(n)]
    Y = line_admittance(n, lines)
    return PowerNetwork(M=np.full(n, M), D=np.full(n, D), E=np.ones(n), P=np.zeros(n),
                        theta=np.zeros(n), Y=Y)


def _injections(net):
    from .grid_model import kron_reduce

    Yred = kron_reduce(net.Y, net.generator_buses)
    mag = np.abs(Yred)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.nan_to_num(-np.arctan(Yred.real / Yred.imag))
    d = net.theta[:, None] - net.theta[None, :] - phi
    np.fill_diagonal(mag, 0.0)
    return (mag * np.outer(net.E, net.E) * np.sin(d)).sum(axis=1)


def bundled_network_path():
    """Path of the packaged network file for :func:`two_area_four_machine`."""
    return str(resources.files("sparsewac") / "data" / BUNDLED_NETWORK)
