"""Sparsity-promoting H2 state feedback.

Minimizes ``J(K) + gamma * sum(W * |K|)`` where ``J(K) = trace(B1' P B1)``
and P is the observability Gramian of the closed loop ``A - B2 K`` weighted
by ``Q + K' R K``.  The problem is split by ADMM into a smooth H2 step on F
and a soft-thresholding step on G, with ``F = G`` enforced by the dual U.
A gamma sweep warm-starts each solve from the previous polished gain.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .matrix_equations import MatrixEquationError, solve_care, solve_lyapunov, spectrum

__all__ = [
    "UnstableClosedLoopError",
    "PolishingError",
    "FeedbackGain",
    "AdmmOptions",
    "AdmmDiagnostics",
    "NoiseModel",
    "SweepRecord",
    "SweepResult",
    "h2_cost",
    "h2_gradient",
    "shrink",
    "admm_solve",
    "reweighted_solve",
    "polish",
    "gamma_sweep",
    "default_gamma_schedule",
    "cardinality",
    "offblock_cardinality",
    "decompose_gain",
    "proportional_wac",
    "state_names",
    "render_pattern",
]

log = logging.getLogger(__name__)

CARD_TOL = 1e-8


class UnstableClosedLoopError(MatrixEquationError):
    def __init__(self, max_real_part):
        self.max_real_part = float(max_real_part)
        super().__init__(f"closed loop is not Hurwitz (max real part {self.max_real_part:.6g})")


class PolishingError(MatrixEquationError):
    pass


@dataclass
class FeedbackGain:
    """Gain K (p x n) with its structural pattern and l1 weights.

    Entries outside `pattern` are forced to exactly zero.
    """

    K: np.ndarray
    pattern: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self):
        self.K = np.atleast_2d(np.array(self.K, dtype=float))
        if self.pattern is None:
            self.pattern = self.K != 0
        self.pattern = np.asarray(self.pattern, dtype=bool)
        if self.pattern.shape != self.K.shape:
            raise ValueError("pattern shape does not match K")
        self.K[~self.pattern] = 0.0
        if self.weights is None:
            self.weights = np.ones_like(self.K)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != self.K.shape:
            raise ValueError("weights shape does not match K")
        if not np.all(self.weights > 0):
            raise ValueError("weights must be strictly positive")

    @property
    def card(self):
        return cardinality(self.K)


@dataclass
class AdmmOptions:
    """Tuning knobs for :func:`admm_solve` and friends.

    `fstep` selects the descent direction of the F-minimization:
    ``"anderson-moore"`` scales the gradient row-wise by
    ``(2 r_i X + rho I)^{-1}`` with X the closed-loop controllability
    Gramian; ``"gradient"`` is plain steepest descent with a
    Barzilai-Borwein trial step.  Both use Armijo backtracking that rejects
    destabilizing steps.
    """

    rho: float = 100.0
    primal_tol: float = 1e-4
    dual_tol: float = 1e-4
    max_iters: int = 100
    reweight_steps: int = 5
    reweight_eps: float = 1e-3
    fstep: str = "gradient"
    inner_tol: float = 1e-8
    inner_max_iters: int = 200
    armijo: float = 1e-4
    min_step: float = 1e-12
    polish_tol: float = 1e-6
    polish_max_iters: int = 5000
    hurwitz_tol: float = 0.0
    monotone_patterns: bool = True

    def __post_init__(self):
        for name in ("rho", "primal_tol", "dual_tol", "reweight_eps", "inner_tol", "polish_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.reweight_steps < 0:
            raise ValueError("reweight_steps must be >= 0")
        if self.fstep not in ("anderson-moore", "gradient"):
            raise ValueError(f"unknown fstep {self.fstep!r}")


@dataclass
class AdmmDiagnostics:
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    F: np.ndarray
    stabilizing: bool
    inner_iterations: int = 0


@dataclass
class NoiseModel:
    """Where the white noise eta enters: through B1 columns."""

    B1: np.ndarray
    interpretation: str = "input-channel noise"

    def __post_init__(self):
        self.B1 = np.atleast_2d(np.asarray(self.B1, dtype=float))
        if self.interpretation not in ("input-channel noise", "disturbance"):
            raise ValueError(f"unknown noise interpretation {self.interpretation!r}")

    @property
    def q(self):
        return self.B1.shape[1]


def _gain_matrix(K):
    if isinstance(K, FeedbackGain):
        return K.K
    return np.atleast_2d(np.asarray(K, dtype=float))


def cardinality(K, tol=CARD_TOL):
    return int(np.count_nonzero(np.abs(_gain_matrix(K)) > tol))


def _local_mask(labels, shape):
    gi = np.asarray(labels.generator_of_input)
    gs = np.asarray(labels.generator_of_state)
    if gi.size != shape[0] or gs.size != shape[1]:
        raise ValueError("labels do not match the gain dimensions")
    return (gi[:, None] == gs[None, :]) & (gs[None, :] >= 0)


def offblock_cardinality(K, labels, tol=CARD_TOL):
    """Nonzeros outside the generator-local blocks (communicated signals)."""
    K = _gain_matrix(K)
    return int(np.count_nonzero((np.abs(K) > tol) & ~_local_mask(labels, K.shape)))


# --- H2 objective ------------------------------------------------------------

class _H2:
    """H2 objective of one plant/cost pair, with the shared algebra cached."""

    def __init__(self, plant, cost, hurwitz_tol=0.0):
        self.A = plant.A
        self.B2 = plant.B2
        self.B1B1 = plant.B1 @ plant.B1.T
        self.B1 = plant.B1
        self.Q = cost.Q
        self.R = cost.R
        self.r = np.diag(cost.R).copy()
        self.hurwitz_tol = hurwitz_tol
        if self.Q.shape != self.A.shape or self.R.shape[0] != self.B2.shape[1]:
            raise ValueError("cost dimensions do not match the plant")

    def stable(self, K):
        return spectrum(self.A - self.B2 @ K, self.hurwitz_tol).is_hurwitz

    def cost(self, K, check=True):
        Acl = self.A - self.B2 @ K
        if check:
            rep = spectrum(Acl, self.hurwitz_tol)
            if not rep.is_hurwitz:
                raise UnstableClosedLoopError(rep.max_real_part)
        P = solve_lyapunov(Acl, self.Q + K.T @ self.R @ K, check_stability=False)
        return float(np.trace(self.B1.T @ P @ self.B1)), P

    def cost_grad(self, K, check=True):
        J, P = self.cost(K, check)
        Acl = self.A - self.B2 @ K
        X = solve_lyapunov(Acl.T, self.B1B1, check_stability=False)
        G = 2.0 * (self.R @ K - self.B2.T @ P) @ X
        return J, G, X

    def try_cost(self, K):
        """Cost, or None when K is not stabilizing."""
        if not self.stable(K):
            return None
        try:
            return self.cost(K, check=False)[0]
        except MatrixEquationError:
            return None


def h2_cost(plant, cost, K, hurwitz_tol=0.0):
    """``trace(B1' P B1)`` for the closed loop ``A - B2 K``."""
    return _H2(plant, cost, hurwitz_tol).cost(_gain_matrix(K))[0]


def h2_gradient(plant, cost, K, hurwitz_tol=0.0):
    """Gradient ``2 (R K - B2' P) X`` of the H2 cost with respect to K."""
    return _H2(plant, cost, hurwitz_tol).cost_grad(_gain_matrix(K))[1]


def shrink(V, tau):
    """Entrywise soft threshold ``sign(V) max(|V| - tau, 0)``.

    This is the proximal operator of ``sum(tau * |G|)``.
    """
    V = np.asarray(V, dtype=float)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), V.shape)
    if np.any(tau < 0):
        raise ValueError("thresholds must be nonnegative")
    return np.sign(V) * np.maximum(np.abs(V) - tau, 0.0)


# --- descent machinery ---------------------------------------------------------

def _precondition(G, X, r, rho, mask=None):
    """Row-wise ``G_i (2 r_i X + rho I)^{-1}``, restricted to `mask` if given."""
    p, n = G.shape
    D = np.zeros_like(G)
    scale = max(1.0, np.trace(X) / n)
    for i in range(p):
        idx = np.arange(n) if mask is None else np.flatnonzero(mask[i])
        if idx.size == 0:
            continue
        H = 2.0 * r[i] * X[np.ix_(idx, idx)] + rho * np.eye(idx.size)
        if rho == 0.0:
            H += 1e-12 * scale * np.eye(idx.size)
        try:
            c = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            D[i, idx] = G[i, idx]
            continue
        y = np.linalg.solve(c, G[i, idx])
        D[i, idx] = np.linalg.solve(c.T, y)
    return D


def _line_search(phi, K, fK, g, D, opts):
    """Armijo backtracking from a unit step; None if no acceptable step."""
    slope = float(np.sum(g * D))
    if not slope < 0:
        return None
    t = 1.0
    floor = 1e-15 * max(1.0, float(np.max(np.abs(K))))
    while t >= opts.min_step:
        if t * float(np.max(np.abs(D))) <= floor:
            return None
        Kn = K + t * D
        fn = phi(Kn)
        # strict decrease: at rounding level the Armijo test alone accepts null steps
        if fn is not None and fn < fK and fn <= fK + opts.armijo * t * slope:
            return Kn, fn
        t *= 0.5
    return None


def _fstep(h2, F, V, opts):
    """Minimize ``J(F) + rho/2 |F - V|^2`` starting from stabilizing F."""
    rho = opts.rho

    def phi(K):
        J = h2.try_cost(K)
        return None if J is None else J + 0.5 * rho * np.sum((K - V) ** 2)

    J, g, X = h2.cost_grad(F)
    f = J + 0.5 * rho * np.sum((F - V) ** 2)
    prev = None
    it = 0
    for it in range(1, opts.inner_max_iters + 1):
        gphi = g + rho * (F - V)
        if np.linalg.norm(gphi) <= opts.inner_tol:
            break
        if opts.fstep == "anderson-moore":
            D = -_precondition(gphi, X, h2.r, rho)
        else:
            step = 1.0 / rho
            if prev is not None:
                s, y = F - prev[0], gphi - prev[1]
                sy = float(np.sum(s * y))
                if sy > 0:
                    step = sy / float(np.sum(y * y))
            D = -step * gphi
        res = _line_search(phi, F, f, gphi, D, opts)
        if res is None:
            break
        prev = (F, gphi)
        F, f = res
        J, g, X = h2.cost_grad(F, check=False)
    return F, it


def admm_solve(plant, cost, gamma, W=None, K_init=None, opts=None):
    """ADMM for the weighted-l1 regularized H2 problem at fixed gamma.

    Parameters
    ----------
    plant : LinearPlant
    cost : CostSpec
    gamma : float
        Sparsity weight, >= 0.
    W : (p, n) array_like, optional
        Positive l1 weights, default all ones.
    K_init : array_like or FeedbackGain, optional
        Stabilizing starting gain; defaults to the centralized optimum.
    opts : AdmmOptions, optional

    Returns
    -------
    gain : FeedbackGain
        The exactly sparse G iterate and its pattern.
    diag : AdmmDiagnostics
        ``diag.F`` is the last (stabilizing) F iterate.  When the iteration
        limit is hit, ``diag.converged`` is False and the result is still
        returned.
    """
    opts = opts or AdmmOptions()
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    h2 = _H2(plant, cost, opts.hurwitz_tol)
    shape = (plant.p, plant.n)
    W = np.ones(shape) if W is None else np.broadcast_to(np.asarray(W, dtype=float), shape)
    if not np.all(W > 0):
        raise ValueError("weights must be strictly positive")
    if K_init is None:
        K_init = solve_care(plant.A, plant.B2, cost.Q, cost.R)[1]
    F = _gain_matrix(K_init).copy()
    if F.shape != shape:
        raise ValueError(f"K_init has shape {F.shape}, expected {shape}")
    if not h2.stable(F):
        raise UnstableClosedLoopError(spectrum(plant.A - plant.B2 @ F).max_real_part)

    tau = gamma * W / opts.rho
    G = F.copy()
    U = np.zeros(shape)
    r = s = np.inf
    converged = False
    inner = 0
    it = 0
    for it in range(1, opts.max_iters + 1):
        F, k = _fstep(h2, F, G - U, opts)
        inner += k
        G_prev = G
        G = shrink(F + U, tau)
        U = U + F - G
        r = float(np.linalg.norm(F - G))
        s = float(opts.rho * np.linalg.norm(G - G_prev))
        if r <= opts.primal_tol and s <= opts.dual_tol:
            converged = True
            break
    if not converged:
        log.info("ADMM hit max_iters=%d (gamma=%g, primal %.2e, dual %.2e)",
                 opts.max_iters, gamma, r, s)
    stabilizing = h2.stable(G)
    gain = FeedbackGain(G, pattern=G != 0, weights=np.array(W))
    diag = AdmmDiagnostics(it, converged and stabilizing, r, s, F, stabilizing, inner)
    return gain, diag


def reweighted_solve(plant, cost, gamma, opts=None, K_init=None):
    """ADMM with iterative reweighting ``w_ij = 1 / (|K_ij| + eps)``.

    Starts from all-ones weights; after each ADMM solve the weights are
    recomputed from the new gain, ``opts.reweight_steps`` times, each solve
    warm-started from the previous F iterate.  The returned gain carries the
    weights computed from its own entries.  With zero reweight steps this is
    exactly :func:`admm_solve`.

    Returns
    -------
    gain : FeedbackGain
    diags : list of AdmmDiagnostics
        One per ADMM solve.
    """
    opts = opts or AdmmOptions()
    gain, diag = admm_solve(plant, cost, gamma, None, K_init, opts)
    diags = [diag]
    for _ in range(opts.reweight_steps):
        W = 1.0 / (np.abs(gain.K) + opts.reweight_eps)
        gain, diag = admm_solve(plant, cost, gamma, W, diag.F, opts)
        diags.append(diag)
    if opts.reweight_steps:
        gain = FeedbackGain(gain.K, gain.pattern, 1.0 / (np.abs(gain.K) + opts.reweight_eps))
    return gain, diags


def polish(plant, cost, pattern, K_init, opts=None, return_info=False):
    """Minimize J(K) over gains with the given sparsity pattern.

    Projected descent: the gradient is masked to the pattern and scaled
    row-wise by the inverse of the pattern block of the controllability
    Gramian, then an Armijo step that keeps ``A - B2 K`` Hurwitz is taken.
    Stops when the masked gradient's max-norm is below ``opts.polish_tol``.

    Raises
    ------
    PolishingError
        If K_init (masked to the pattern) is not stabilizing.
    """
    opts = opts or AdmmOptions()
    h2 = _H2(plant, cost, opts.hurwitz_tol)
    mask = np.asarray(pattern, dtype=bool)
    K = _gain_matrix(K_init).copy()
    if mask.shape != K.shape:
        raise ValueError("pattern shape does not match K_init")
    K[~mask] = 0.0
    if not h2.stable(K):
        raise PolishingError("polishing stalled unstable: initial gain is not stabilizing")

    def phi(Kn):
        return h2.try_cost(Kn)

    J, g, X = h2.cost_grad(K)
    g = np.where(mask, g, 0.0)
    converged = False
    it = 0
    history = [J]
    for it in range(1, opts.polish_max_iters + 1):
        if np.max(np.abs(g), initial=0.0) <= opts.polish_tol:
            converged = True
            break
        D = -_precondition(g, X, h2.r, 0.0, mask)
        res = _line_search(phi, K, J, g, D, opts)
        if res is None:
            res = _line_search(phi, K, J, g, -g, opts)
        if res is None:
            break
        K, J = res
        J, g, X = h2.cost_grad(K, check=False)
        g = np.where(mask, g, 0.0)
        history.append(J)
    gain = FeedbackGain(K, pattern=mask)
    if return_info:
        return gain, {"J": J, "iterations": it, "converged": converged,
                      "grad_max": float(np.max(np.abs(g), initial=0.0)), "history": history}
    return gain


# --- gamma homotopy ----------------------------------------------------------------

def default_gamma_schedule():
    """40 logarithmically spaced values in [1e-4, 1]."""
    return np.logspace(-4, 0, 40)


@dataclass
class SweepRecord:
    gamma: float
    gain: FeedbackGain
    J: float
    card: int
    card_offblock: int
    degradation: float
    iterations: int
    converged: bool
    ok: bool = True
    J_admm: float = float("nan")
    message: str = ""


@dataclass
class SweepResult:
    """Per-gamma outcomes of a homotopy sweep, ordered by gamma."""

    records: list
    J0: float
    K0: np.ndarray
    reweighting: str = "inside each gamma step"
    meta: dict = field(default_factory=dict)

    @property
    def gammas(self):
        return np.array([r.gamma for r in self.records])

    @property
    def costs(self):
        return np.array([r.J for r in self.records])

    @property
    def cards(self):
        return np.array([r.card for r in self.records])

    @property
    def degradations(self):
        return np.array([r.degradation for r in self.records])


def gamma_sweep(plant, cost, gammas=None, opts=None, labels=None):
    """Warm-started homotopy over an increasing gamma schedule.

    The centralized optimum from the Riccati equation anchors the sweep.
    At every gamma > 0 a reweighted ADMM solve identifies a pattern, which
    is then polished.  The polished gain warm-starts the next gamma.  With
    ``opts.monotone_patterns`` each pattern is intersected with the
    previous one, so patterns only shrink along the sweep.  A failure at
    one gamma is recorded and the sweep continues from the last good gain.
    """
    opts = opts or AdmmOptions()
    gammas = default_gamma_schedule() if gammas is None else np.asarray(gammas, dtype=float).ravel()
    if gammas.size == 0 or np.any(gammas < 0) or np.any(np.diff(gammas) <= 0):
        raise ValueError("gamma schedule must be nonempty, nonnegative and strictly increasing")
    labels = labels or plant.labels
    h2 = _H2(plant, cost, opts.hurwitz_tol)
    _, K0 = solve_care(plant.A, plant.B2, cost.Q, cost.R)
    J0 = h2.cost(K0)[0]

    def record(gamma, gain, J, iters, conv, ok=True, J_admm=float("nan"), msg=""):
        return SweepRecord(
            gamma=float(gamma), gain=gain, J=float(J), card=gain.card,
            card_offblock=offblock_cardinality(gain.K, labels),
            degradation=float((J - J0) / J0), iterations=int(iters), converged=bool(conv),
            ok=ok, J_admm=float(J_admm), message=msg)

    records = []
    prev = FeedbackGain(K0, pattern=np.ones_like(K0, dtype=bool))
    prev_J = J0
    for gamma in gammas:
        if gamma == 0:
            records.append(record(0.0, prev, J0, 0, True))
            continue
        try:
            admm_gain, diags = reweighted_solve(plant, cost, gamma, opts, K_init=prev.K)
            iters = sum(d.iterations for d in diags)
            admm_conv = all(d.converged for d in diags)
            pattern = admm_gain.pattern.copy()
            if opts.monotone_patterns:
                pattern &= prev.pattern
            J_admm = h2.try_cost(admm_gain.K)
            # start polishing from the better of the ADMM gain and the masked warm start
            starts = []
            for cand in (np.where(pattern, admm_gain.K, 0.0), np.where(pattern, prev.K, 0.0)):
                Jc = h2.try_cost(cand)
                if Jc is not None:
                    starts.append((Jc, cand))
            if not starts:
                raise PolishingError("polishing stalled unstable: no stabilizing gain "
                                     "in the identified pattern")
            start = min(starts, key=lambda t: t[0])[1]
            gain, info = polish(plant, cost, pattern, start, opts, return_info=True)
            gain.weights = admm_gain.weights
            rec = record(gamma, gain, info["J"], iters, admm_conv and info["converged"],
                         J_admm=J_admm if J_admm is not None else float("nan"))
            if rec.J < prev_J * (1 - 1e-8):
                rec.message = "polished cost decreased along the sweep"
                log.warning("gamma=%g: polished cost %.12g below previous %.12g",
                            gamma, rec.J, prev_J)
            records.append(rec)
            prev, prev_J = gain, rec.J
        except (MatrixEquationError, np.linalg.LinAlgError) as exc:
            log.warning("gamma=%g failed: %s", gamma, exc)
            records.append(record(gamma, prev, prev_J, 0, False, ok=False, msg=str(exc)))
    return SweepResult(records=records, J0=J0, K0=K0)


# --- gain structure --------------------------------------------------------------

def decompose_gain(K, labels):
    """Split K into generator-local and remote parts, ``K = K_loc + K_rem``."""
    K = _gain_matrix(K)
    if any(g < 0 for g in labels.generator_of_state):
        bad = [k for k, g in enumerate(labels.generator_of_state) if g < 0]
        raise ValueError(f"states {bad} are not assigned to a generator")
    mask = _local_mask(labels, K.shape)
    K_loc = np.where(mask, K, 0.0)
    K_rem = np.where(mask, 0.0, K)
    return K_loc, K_rem


def proportional_wac(K, labels, channel):
    """Relative-angle law ``u_i = k (theta_j - theta_i)``.

    Parameters
    ----------
    K : array_like or FeedbackGain
    labels : StateLabels
    channel : (int, int)
        ``(measured generator j, actuated generator i)``.

    Returns
    -------
    (p, n) ndarray
        Coefficients of the law ``u = L x``: the input of generator i holds
        ``+k`` at theta_j and ``-k`` at theta_i with ``k = K[i, theta_j]``;
        all other rows are zero.  Use ``-L`` as a gain for ``u = -K x``.
    """
    K = _gain_matrix(K)
    j, i = (int(c) for c in channel)
    if i == j:
        raise ValueError("degenerate channel: measured and actuated generator coincide")
    rows = [r for r, g in enumerate(labels.generator_of_input) if g == i]
    if not rows:
        raise ValueError(f"generator {i} has no control input")
    row = rows[0]
    k = K[row, labels.angle[j]]
    if abs(k) <= CARD_TOL:
        raise ValueError(f"channel theta_{j} -> input of generator {i} is zero in K")
    Lw = np.zeros_like(K)
    Lw[row, labels.angle[j]] = k
    Lw[row, labels.angle[i]] = -k
    return Lw


def state_names(labels):
    names = {}
    for g, k in enumerate(labels.angle):
        names[k] = f"theta{g + 1}"
    for g, k in enumerate(labels.frequency):
        names[k] = f"omega{g + 1}"
    for c, k in enumerate(labels.remaining):
        g = labels.generator_of_state[k]
        names[k] = f"x{k + 1}" if g < 0 else f"x{k + 1}(g{g + 1})"
    return [names[k] for k in range(len(names))]


def render_pattern(K, labels, tol=CARD_TOL):
    """Text grid of the gain's nonzeros, rows = inputs, columns = states.

    Columns are grouped by generator and the groups separated by ``|``;
    a nonzero is ``x``, a zero ``.``.  Each group owned by the generator of
    the row is local feedback; nonzeros elsewhere are listed as remote
    links below the grid.
    """
    K = _gain_matrix(K)
    gs = labels.generator_of_state
    gens = sorted({g for g in gs if g >= 0})
    groups = [[k for k in range(len(gs)) if gs[k] == g] for g in gens]
    orphans = [k for k in range(len(gs)) if gs[k] < 0]
    if orphans:
        groups.append(orphans)
    names = state_names(labels)
    nz = np.abs(K) > tol
    local = _local_mask(labels, K.shape)
    glabels = [str(g + 1) for g in gens] + (["-"] if orphans else [])
    head = "|".join(f"{lab:<{len(grp)}}"[:len(grp)] for lab, grp in zip(glabels, groups))
    lines = ["inputs x states (columns grouped by generator)", "        " + head]
    for i in range(K.shape[0]):
        cells = "|".join("".join("x" if nz[i, k] else "." for k in grp) for grp in groups)
        lines.append(f"u{i + 1:<3}g{labels.generator_of_input[i] + 1:<3}{cells}")
    remote = [(i, k) for i in range(K.shape[0]) for k in range(K.shape[1])
              if nz[i, k] and not local[i, k]]
    lines.append(f"local nonzeros: {int(np.count_nonzero(nz & local))}")
    lines.append(f"remote links: {len(remote)}")
    for i, k in remote:
        lines.append(f"  remote: gen {labels.generator_of_input[i] + 1} <- {names[k]} "
                     f"(K[{i + 1},{k + 1}] = {K[i, k]:.6g})")
    return "\n".join(lines) + "\n"
