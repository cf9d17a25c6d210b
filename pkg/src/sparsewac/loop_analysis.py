"""Closed-loop assessment: modes, disk margins, delays and simulation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from scipy import optimize, signal

from .grid_model import LinearPlant, SisoBlock
from .matrix_equations import spectrum
from .sparse_h2 import UnstableClosedLoopError, _gain_matrix, state_names

__all__ = [
    "Mode",
    "ModeReport",
    "MarginReport",
    "DelayMarginReport",
    "SimScenario",
    "Trajectory",
    "StepSizeError",
    "mode_report",
    "disk_margins",
    "disk_margin_formulas",
    "default_frequency_grid",
    "remote_loop",
    "delay_margin_single_channel",
    "scalar_loop_margins",
    "pade_block",
    "pade_absorb",
    "select_mode",
    "eigvec_initial_state",
    "simulate",
]


@dataclass
class Mode:
    eigenvalue: complex
    damping: float
    frequency: float          # Hz
    participation: np.ndarray


@dataclass
class ModeReport:
    modes: list

    def table(self):
        rows = []
        for m in self.modes:
            lam = m.eigenvalue
            rows.append((lam.real, abs(lam.imag), m.damping, m.frequency))
        return rows

    def dominant_states(self, k, top=3):
        p = self.modes[k].participation
        return list(np.argsort(p)[::-1][:top])


def _damping(lam):
    mag = abs(lam)
    if lam.imag == 0.0:
        return 0.0 if mag == 0 else (1.0 if lam.real < 0 else -1.0)
    return -lam.real / mag


def mode_report(A_cl):
    """Damping ratio, frequency and participation of every mode.

    One entry per complex-conjugate pair (the member with positive imaginary
    part) and per real eigenvalue, sorted by damping ratio ascending.
    Participation of state k in mode i is ``|v_ki w_ik|``, normalized to sum
    to one, with V the right and ``W = V^{-1}`` the left eigenvectors.
    """
    A_cl = np.atleast_2d(np.asarray(A_cl, dtype=float))
    lam, V = sla.eig(A_cl)
    try:
        W = np.linalg.inv(V)
        part = np.abs(V * W.T)
    except np.linalg.LinAlgError:
        part = np.abs(V) ** 2
    modes = []
    for i, l in enumerate(lam):
        if l.imag < 0:
            continue
        p = part[:, i]
        s = p.sum()
        modes.append(Mode(complex(l), _damping(l), abs(l.imag) / (2 * math.pi),
                          p / s if s > 0 else p))
    modes.sort(key=lambda m: (m.damping, -m.frequency))
    return ModeReport(modes)


# --- disk margins --------------------------------------------------------------------

@dataclass
class MarginReport:
    alpha: float
    omega_min: float
    phase_margin: float          # degrees
    gain_reduction: float
    gain_amplification: float
    omega: np.ndarray = field(repr=False, default=None)
    sigma_min: np.ndarray = field(repr=False, default=None)
    skipped: int = 0

    def lines(self):
        return [
            f"alpha\t{self.alpha:.12g}",
            f"omega_min_rad_s\t{self.omega_min:.12g}",
            f"phase_margin_deg\t{self.phase_margin:.12g}",
            f"gain_reduction_margin\t{self.gain_reduction:.12g}",
            f"gain_amplification_margin\t{self.gain_amplification:.12g}",
            f"grid_points\t{0 if self.omega is None else len(self.omega)}",
            f"skipped_points\t{self.skipped}",
        ]


def default_frequency_grid(n=400, lo=1e-3, hi=1e3):
    return np.logspace(np.log10(lo), np.log10(hi), n)


def disk_margin_formulas(alpha):
    """``(phase margin deg, gain reduction, gain amplification)`` from alpha."""
    alpha = float(alpha)
    pm = math.degrees(2 * math.asin(min(alpha / 2, 1.0)))
    gr = 1.0 / (1.0 + alpha)
    ga = 1.0 / (1.0 - alpha) if alpha < 1 else math.inf
    return pm, gr, ga


def _return_difference_smin(A, B2, K, w):
    n = A.shape[0]
    M = 1j * w * np.eye(n) - A
    if np.linalg.cond(M) > 1e14:
        return None
    L = K @ np.linalg.solve(M, B2)
    return float(np.linalg.svd(np.eye(K.shape[0]) + L, compute_uv=False).min())


def disk_margins(plant, K, omega=None, refine=True):
    """Multivariable margins from ``alpha = min_w sigma_min(I + L(iw))``.

    ``L(s) = K (sI - A)^{-1} B2`` is the loop broken at the plant input.
    The phase margin is ``2 arcsin(alpha/2)``, the gain margins
    ``1/(1+alpha)`` and ``1/(1-alpha)`` (infinite when alpha >= 1).
    The grid minimizer is refined by a bounded scalar search between its
    neighbours.
    """
    K = _gain_matrix(K)
    A, B2 = plant.A, plant.B2
    rep = spectrum(A - B2 @ K)
    if not rep.is_hurwitz:
        raise UnstableClosedLoopError(rep.max_real_part)
    omega = default_frequency_grid() if omega is None else np.asarray(omega, dtype=float)
    smin = np.full(omega.size, np.nan)
    for k, w in enumerate(omega):
        s = _return_difference_smin(A, B2, K, w)
        if s is not None:
            smin[k] = s
    skipped = int(np.isnan(smin).sum())
    if skipped:
        warnings.warn(f"{skipped} frequency points skipped: (iwI - A) singular",
                      RuntimeWarning, stacklevel=2)
    if skipped == omega.size:
        raise ValueError("no usable frequency points")
    k = int(np.nanargmin(smin))
    alpha, w_min = float(smin[k]), float(omega[k])
    if refine and omega.size > 2:
        lo = np.log10(omega[max(k - 1, 0)])
        hi = np.log10(omega[min(k + 1, omega.size - 1)])

        def f(lw):
            s = _return_difference_smin(A, B2, K, 10 ** lw)
            return np.inf if s is None else s

        res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10})
        if res.fun < alpha:
            alpha, w_min = float(res.fun), float(10 ** res.x)
    pm, gr, ga = disk_margin_formulas(alpha)
    return MarginReport(alpha, w_min, pm, gr, ga, omega, smin, skipped)


# --- single-channel loop and delay margin --------------------------------------------

@dataclass
class DelayMarginReport:
    phase_margin: float          # degrees, inf without crossover
    delay_margin: float          # seconds
    crossover: float             # rad/s, nan without crossover
    crossovers: list = field(default_factory=list)


def remote_loop(plant, K, channel):
    """Scalar loop through one gain entry with the rest of K closed.

    ``channel = (input i, state j)``.  All other feedback, including the
    generator-local part, is absorbed into the plant and the returned
    callable evaluates ``L(s) = k e_j' (sI - A_r)^{-1} b_i`` with
    ``k = K[i, j]`` and ``A_r = A - B2 (K - k e_i e_j')``.
    """
    K = _gain_matrix(K)
    i, j = (int(c) for c in channel)
    k = K[i, j]
    Kr = K.copy()
    Kr[i, j] = 0.0
    Ar = plant.A - plant.B2 @ Kr
    b = plant.B2[:, i]
    n = Ar.shape[0]

    def L(s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return np.array([k * np.linalg.solve(si * np.eye(n) - Ar, b)[j] for si in s])

    return L


def scalar_loop_margins(L, w_lo=1e-4, w_hi=1e4, n=4000):
    """Phase and delay margins of a scalar negative-feedback loop.

    Gain crossovers ``|L(iw)| = 1`` are bracketed on a log grid and refined
    with Brent's method.  The reported pair belongs to the crossover with
    the smallest delay margin ``PM / w_c``.
    """
    raw = L

    def L(s):
        return np.atleast_1d(np.asarray(raw(s), dtype=complex))

    w = np.logspace(np.log10(w_lo), np.log10(w_hi), n)
    mag = np.log(np.abs(L(1j * w)))
    crossings = []
    for k in np.flatnonzero(np.sign(mag[:-1]) != np.sign(mag[1:])):
        if mag[k] == 0.0:
            crossings.append(w[k])
            continue

        def f(lw):
            return float(np.log(np.abs(L(1j * 10 ** lw))[0]))

        lw = optimize.brentq(f, np.log10(w[k]), np.log10(w[k + 1]), xtol=1e-14, rtol=1e-15)
        crossings.append(10 ** lw)
    if not crossings:
        return DelayMarginReport(math.inf, math.inf, float("nan"), [])
    out = []
    for wc in crossings:
        ang = math.degrees(np.angle(L(1j * wc)[0]))
        pm = (180.0 + ang + 180.0) % 360.0 - 180.0
        if pm == -180.0:
            pm = 180.0
        dm = math.radians(pm) / wc if pm > 0 else 0.0
        out.append((wc, pm, dm))
    wc, pm, dm = min(out, key=lambda t: (t[2], t[1]))
    return DelayMarginReport(pm, dm, wc, out)


def delay_margin_single_channel(plant, K, channel, **grid):
    """Phase margin and tolerable delay of one feedback channel.

    See :func:`remote_loop` for how the channel is isolated and
    :func:`scalar_loop_margins` for the crossover search.
    """
    K = _gain_matrix(K)
    if not spectrum(plant.A - plant.B2 @ K).is_hurwitz:
        raise UnstableClosedLoopError(spectrum(plant.A - plant.B2 @ K).max_real_part)
    return scalar_loop_margins(remote_loop(plant, K, channel), **grid)


# --- Pade delays -------------------------------------------------------------------------

def _pade_coeffs(order):
    n = order
    return np.array([math.factorial(2 * n - k) * math.factorial(n)
                     / (math.factorial(2 * n) * math.factorial(k) * math.factorial(n - k))
                     for k in range(n + 1)])


def pade_block(delay, order=2):
    """State-space Pade(order, order) approximation of ``exp(-s delay)``."""
    if not delay > 0:
        raise ValueError("delay must be > 0")
    if order not in (1, 2, 3):
        raise ValueError("Pade order must be 1, 2 or 3")
    c = _pade_coeffs(order)
    k = np.arange(order + 1)
    num = (c * (-delay) ** k)[::-1]
    den = (c * delay ** k)[::-1]
    A, B, C, D = signal.tf2ss(num, den)
    return SisoBlock(np.atleast_2d(A), np.atleast_2d(B), np.atleast_2d(C), float(np.squeeze(D)))


def pade_absorb(plant, channel, delay, order=2):
    """Insert a Pade delay in front of input `channel` of the plant.

    The state grows by `order`; the new states are appended to the
    remaining states and attributed to the actuated generator.
    """
    i = int(channel)
    blk = pade_block(delay, order)
    n, nd = plant.n, order
    b = plant.B2[:, i]
    A = np.zeros((n + nd, n + nd))
    A[:n, :n] = plant.A
    A[:n, n:] = np.outer(b, blk.C.ravel())
    A[n:, n:] = blk.A
    B2 = np.vstack([plant.B2, np.zeros((nd, plant.p))])
    B2[:n, i] = b * blk.D
    B2[n:, i] = blk.B.ravel()
    B1 = np.vstack([plant.B1, np.zeros((nd, plant.q))])
    lab = plant.labels
    g = lab.generator_of_input[i]
    labels = replace(lab, remaining=lab.remaining + list(range(n, n + nd)),
                     generator_of_state=lab.generator_of_state + [g] * nd)
    return LinearPlant(A, B1, B2, labels)


# --- initial conditions and simulation --------------------------------------------------

def select_mode(A_cl, selector):
    """Eigenvalue and unit eigenvector picked by `selector`.

    An integer indexes :func:`mode_report` order (least damped first); a
    complex number picks the nearest eigenvalue.
    """
    A_cl = np.atleast_2d(np.asarray(A_cl, dtype=float))
    lam, V = sla.eig(A_cl)
    if isinstance(selector, (int, np.integer)):
        modes = mode_report(A_cl).modes
        if not -len(modes) <= selector < len(modes):
            raise IndexError(f"mode selector {selector} out of range ({len(modes)} modes)")
        target = modes[selector].eigenvalue
    else:
        target = complex(selector)
    i = int(np.argmin(np.abs(lam - target)))
    v = V[:, i] / np.linalg.norm(V[:, i])
    return complex(lam[i]), v


def eigvec_initial_state(A_cl, selector=0):
    """Real unit-norm state aligned with a mode shape.

    The eigenvector is rotated so its largest entry is real and positive,
    then its real part is renormalized.
    """
    _, v = select_mode(A_cl, selector)
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    x = v.real
    return x / np.linalg.norm(x)


class StepSizeError(ValueError):
    pass


@dataclass
class SimScenario:
    """Linear simulation setup.

    `delayed` lists ``(input, state, delay_seconds)`` feedback entries that
    are routed through a Pade block of order `pade_order` instead of acting
    instantly.  `noise_std` is the standard deviation of the white noise on
    each B1 column (scalar or per column).
    """

    horizon: float = 10.0
    step: float = 0.01
    x0: np.ndarray = None
    noise_std: object = 0.0
    delayed: list = field(default_factory=list)
    pade_order: int = 2
    seed: int = 0
    angle_reference: int = -1

    def __post_init__(self):
        if not self.step > 0 or not self.horizon > 0:
            raise ValueError("step and horizon must be > 0")
        if np.any(np.asarray(self.noise_std, dtype=float) < 0):
            raise ValueError("noise std must be >= 0")
        for ch in self.delayed:
            if len(ch) != 3 or not ch[2] >= 0:
                raise ValueError(f"bad delayed channel {ch!r}")


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray           # steps x states (plant states, then delay states)
    u: np.ndarray           # steps x inputs
    angle_diff: np.ndarray  # steps x (n_gen - 1)
    state_names: list
    angle_diff_names: list
    n_plant: int

    def header(self):
        return (["t"] + list(self.state_names) + [f"u{i + 1}" for i in range(self.u.shape[1])]
                + list(self.angle_diff_names))

    def rows(self):
        return np.hstack([self.t[:, None], self.x, self.u, self.angle_diff])


def _delayed_closed_loop(plant, K, scen):
    """Closed loop with delayed entries of K routed through Pade blocks.

    Returns ``(A_aug, B1_aug, U)`` with the input ``u = U @ x_aug``.
    """
    n, p = plant.n, plant.p
    Keff = K.copy()
    blocks = []
    for (i, j, T) in scen.delayed:
        i, j = int(i), int(j)
        k = K[i, j]
        Keff[i, j] = 0.0
        if T > 0:
            blocks.append((i, j, k, pade_block(T, scen.pade_order)))
        else:
            Keff[i, j] = k
    N = n + sum(b.A.shape[0] for *_, b in blocks)
    U = np.zeros((p, N))
    U[:, :n] = -Keff
    Aaug = np.zeros((N, N))
    Aaug[:n, :n] = plant.A
    off = n
    for i, j, k, b in blocks:
        nd = b.A.shape[0]
        sl = slice(off, off + nd)
        Aaug[sl, sl] = b.A
        Aaug[sl, j] += -k * b.B.ravel()
        U[i, sl] += b.C.ravel()
        U[i, j] += -k * b.D
        off += nd
    Aaug[:n, :] += plant.B2 @ U
    B1 = np.vstack([plant.B1, np.zeros((N - n, plant.q))])
    return Aaug, B1, U, len(blocks)


def simulate(plant, K, scenario):
    """Fixed-step RK4 simulation of ``x' = (A - B2 K) x + B1 eta``.

    The noise eta is zero-mean Gaussian with the configured standard
    deviation, held constant over each step and scaled by ``1/sqrt(step)``
    so its intensity does not depend on the step.  Results are
    reproducible for a given seed.
    """
    scen = scenario
    K = _gain_matrix(K)
    Acl, B1, U, nblk = _delayed_closed_loop(plant, K, scen)
    N = Acl.shape[0]
    h = scen.step
    rho = float(np.max(np.abs(np.linalg.eigvals(Acl)))) if N else 0.0
    if rho * h > 2.0:
        raise StepSizeError(f"step {h:g} too large: |lambda|max * step = {rho * h:.3g} > 2; "
                            f"use step <= {2.0 / rho:.3g}")
    steps = int(round(scen.horizon / h))
    x = np.zeros(N)
    if scen.x0 is not None:
        x0 = np.asarray(scen.x0, dtype=float).ravel()
        if x0.size not in (plant.n, N):
            raise ValueError(f"x0 has {x0.size} entries, expected {plant.n}")
        x[:x0.size] = x0
    std = np.broadcast_to(np.asarray(scen.noise_std, dtype=float), (plant.q,))
    rng = np.random.default_rng(scen.seed)
    X = np.empty((steps + 1, N))
    X[0] = x
    noisy = bool(np.any(std > 0))
    for k in range(steps):
        d = B1 @ (std * rng.standard_normal(plant.q) / math.sqrt(h)) if noisy else 0.0
        k1 = Acl @ x + d
        k2 = Acl @ (x + 0.5 * h * k1) + d
        k3 = Acl @ (x + 0.5 * h * k2) + d
        k4 = Acl @ (x + h * k3) + d
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        X[k + 1] = x
    t = h * np.arange(steps + 1)
    lab = plant.labels
    ng = lab.n_gen
    ref = scen.angle_reference % ng if ng else 0
    others = [g for g in range(ng) if g != ref]
    th = X[:, lab.angle]
    adiff = th[:, others] - th[:, [ref]] if ng else np.zeros((steps + 1, 0))
    names = state_names(lab) + [f"pade{b + 1}_{m + 1}" for b in range(nblk)
                                for m in range(scen.pade_order)]
    return Trajectory(t, X, X @ U.T, adiff, names[:N],
                      [f"theta{g + 1}-theta{ref + 1}" for g in others], plant.n)
