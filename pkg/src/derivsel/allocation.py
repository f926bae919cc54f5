"""Optimal exposure target, allocation solves, and the l1-minimal LP.

The exposure target eta* = (Phi Phi^T)^{-1} Lambda / gamma is the loading
of wealth on the two Brownian risks that maximizes CRRA expected utility;
any composition whose sensitivity matrix Sigma satisfies Sigma^T pi = eta*
attains it.  The LP route verifies that allowing more than two options
never lowers the minimal l1 exposure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InfeasibleMarketError, ParameterError, SingularCompositionError
from .market import MarketParams

# Compositions with condition number above this are treated as the
# incomplete-market boundary.
CONDITION_LIMIT = 1e8

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ExposureTarget:
    """Optimal loadings on the two Brownian risks."""

    eta: tuple[float, float]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.eta)


@dataclass(frozen=True)
class UtilitySummary:
    """Value function level plus its certainty-equivalent benchmarks."""

    value: float
    cer_star: float
    cer_incomplete: float


@dataclass(frozen=True)
class AllocationResult:
    """Weights on the composition, their l1 norm, and diagnostics."""

    pi: np.ndarray
    cash: float
    l1: float
    cond: float
    best_pair_l1: float | None = None
    best_pair: tuple[int, int] | None = None

    def csv_row(self, spec1: str, spec2: str) -> str:
        """Row in the export layout spec1,spec2,pi1,pi2,cash,l1,cond."""
        return (f'"{spec1}","{spec2}",{self.pi[0]:.17g},{self.pi[1]:.17g},'
                f"{self.cash:.17g},{self.l1:.17g},{self.cond:.17g}")


def merton_eta(params: MarketParams) -> ExposureTarget:
    """Closed-form optimal exposure pair (no iteration)."""
    rho, gamma = params.rho, params.gamma
    l1_, l2_ = params.lam
    denom = (1.0 - rho * rho) * gamma
    return ExposureTarget(eta=((l1_ - rho * l2_) / denom,
                               (l2_ - rho * l1_) / denom))


def risk_premium_quadratic(params: MarketParams) -> float:
    """Lambda^T (Phi Phi^T)^{-1} Lambda, the squared market price of risk."""
    rho = params.rho
    l1_, l2_ = params.lam
    return (l1_ * l1_ - 2.0 * rho * l1_ * l2_ + l2_ * l2_) / (1.0 - rho * rho)


def value_function(params: MarketParams, t: float, wealth: float) -> UtilitySummary:
    """CRRA value function at (t, W) plus the CER benchmarks.

    cer_star is the continuously rebalanced optimum r + q/(2 gamma); the
    incomplete benchmark zeroes the second risk's exposure (only the first
    Brownian motion hedged), giving r + lambda1^2 / (2 gamma).
    """
    if wealth <= 0:
        raise ParameterError("wealth must be positive")
    if not 0.0 <= t <= params.horizon:
        raise ParameterError("t must lie in [0, horizon]")
    gamma = params.gamma
    cer_star = params.r + risk_premium_quadratic(params) / (2.0 * gamma)
    cer_incomplete = params.r + params.lam[0] ** 2 / (2.0 * gamma)
    growth = (1.0 - gamma) * cer_star * (params.horizon - t)
    value = wealth ** (1.0 - gamma) / (1.0 - gamma) * math.exp(growth)
    return UtilitySummary(value=value, cer_star=cer_star,
                          cer_incomplete=cer_incomplete)


def _as_matrix(sigma) -> np.ndarray:
    matrix = getattr(sigma, "matrix", sigma)
    return np.asarray(matrix, dtype=float)


def solve_allocation(sigma, eta: ExposureTarget) -> AllocationResult:
    """Solve Sigma^T pi = eta for the unique two-option allocation."""
    matrix = _as_matrix(sigma)
    if matrix.shape != (2, 2):
        raise ParameterError("solve_allocation expects a 2x2 sensitivity matrix")
    cond = float(np.linalg.cond(matrix))
    if not math.isfinite(cond) or cond > CONDITION_LIMIT:
        worst = min(((abs(matrix[i, i]), i) for i in (0, 1)))
        raise SingularCompositionError(
            f"sensitivity matrix is near-singular (cond = {cond:.3e}); "
            f"smallest diagonal entry f({worst[1] + 1}{worst[1] + 1}) = "
            f"{matrix[worst[1], worst[1]]:.3e}")
    a, b = matrix[0]
    c, d = matrix[1]
    det = a * d - b * c
    e1, e2 = eta.eta
    pi = np.array([(d * e1 - c * e2) / det, (a * e2 - b * e1) / det])
    return AllocationResult(pi=pi, cash=float(1.0 - pi.sum()),
                            l1=float(np.abs(pi).sum()), cond=cond)


def triangular_allocation(f11: float, f21: float, f22: float,
                          eta: ExposureTarget) -> AllocationResult:
    """Allocation for a (one-asset, multi-asset) composition.

    pi2 = eta2 / f22 hedges the second risk alone; pi1 absorbs the
    remainder of the first risk net of the multi-asset option's loading.
    With f21 = 0 this degenerates to the per-asset division.
    """
    if abs(f11) < 1e-300 or abs(f22) < 1e-300:
        raise SingularCompositionError("zero diagonal sensitivity")
    e1, e2 = eta.eta
    pi2 = e2 / f22
    pi1 = (e1 - f21 / f22 * e2) / f11
    pi = np.array([pi1, pi2])
    matrix = np.array([[f11, 0.0], [f21, f22]])
    return AllocationResult(pi=pi, cash=float(1.0 - pi.sum()),
                            l1=float(np.abs(pi).sum()),
                            cond=float(np.linalg.cond(matrix)))


# ---------------------------------------------------------------------------
# Dense two-phase simplex for the split l1 formulation
# ---------------------------------------------------------------------------

def _dense_simplex(c: np.ndarray, A: np.ndarray, b: np.ndarray,
                   tol: float = 1e-11, max_iter: int = 10_000):
    """Minimize c.x subject to A x = b, x >= 0 (tiny dense problems).

    Two-phase tableau simplex with Bland's rule, so it terminates on
    degenerate vertices.  Returns (x, objective); the solution is a basic
    feasible point, hence has at most rank(A) nonzero entries.
    """
    m, n = A.shape
    A = A.astype(float).copy()
    b = b.astype(float).copy()
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    tableau = np.zeros((m, n + m + 1))
    tableau[:, :n] = A
    tableau[:, n:n + m] = np.eye(m)
    tableau[:, -1] = b
    basis = list(range(n, n + m))

    def pivot(row: int, col: int) -> None:
        tableau[row] /= tableau[row, col]
        for i in range(m):
            if i != row and tableau[i, col] != 0.0:
                tableau[i] -= tableau[i, col] * tableau[row]
        basis[row] = col

    def optimize(cost: np.ndarray, n_enterable: int) -> None:
        for _ in range(max_iter):
            reduced = cost[:n_enterable] - cost[basis] @ tableau[:, :n_enterable]
            entering = np.flatnonzero(reduced < -tol)
            if entering.size == 0:
                return
            col = int(entering[0])  # Bland: lowest eligible index
            column = tableau[:, col]
            best_row, best_key = -1, None
            for i in range(m):
                if column[i] > tol:
                    key = (tableau[i, -1] / column[i], basis[i])
                    if best_key is None or key < best_key:
                        best_row, best_key = i, key
            if best_row < 0:
                raise InfeasibleMarketError("l1 objective unbounded below")
            pivot(best_row, col)
        raise InfeasibleMarketError("simplex failed to converge")

    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    optimize(phase1_cost, n + m)
    if float(phase1_cost[basis] @ tableau[:, -1]) > 1e-8:
        raise InfeasibleMarketError("exposure target is unreachable (rank < 2)")
    for i in range(m):
        if basis[i] >= n:  # drive zero-valued artificials out of the basis
            cols = np.flatnonzero(np.abs(tableau[i, :n]) > tol)
            if cols.size:
                pivot(i, int(cols[0]))

    phase2_cost = np.concatenate([c, np.zeros(m)])
    optimize(phase2_cost, n)

    x = np.zeros(n)
    for i, col in enumerate(basis):
        if col < n:
            x[col] = tableau[i, -1]
    return x, float(c @ x)


def best_pair_allocation(sigma_n: np.ndarray, eta: ExposureTarget):
    """Exhaustively solve every 2-column subproblem; return (l1, pair, pi).

    Independent oracle for the LP route: each candidate pair is solved
    exactly and the smallest l1 wins.
    """
    sigma_n = np.asarray(sigma_n, dtype=float)
    n = sigma_n.shape[0]
    best = (math.inf, None, None)
    for i, j in combinations(range(n), 2):
        sub = sigma_n[[i, j], :]
        det = sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
        if abs(det) < 1e-12 * max(1.0, float(np.abs(sub).max()) ** 2):
            continue
        pi = np.linalg.solve(sub.T, eta.as_array())
        l1 = float(np.abs(pi).sum())
        if l1 < best[0]:
            best = (l1, (i, j), pi)
    if best[1] is None:
        raise InfeasibleMarketError("no nonsingular option pair spans the market")
    return best


def l1_min_lp(sigma_n: np.ndarray, eta: ExposureTarget,
              cross_check: bool | None = None) -> AllocationResult:
    """Minimal-l1 allocation over n >= 2 options via the split LP.

    The weights are split as pi = alpha - beta with alpha, beta >= 0 and
    sum(alpha + beta) minimized subject to Sigma^T pi = eta; a vertex of
    this LP has at most two nonzero weights.  For n <= 8 (or when
    requested) the optimum is certified against exhaustive pair
    enumeration.
    """
    sigma_n = np.asarray(sigma_n, dtype=float)
    if sigma_n.ndim != 2 or sigma_n.shape[1] != 2 or sigma_n.shape[0] < 2:
        raise ParameterError("need an n x 2 sensitivity matrix with n >= 2")
    n = sigma_n.shape[0]
    singular_values = np.linalg.svd(sigma_n, compute_uv=False)
    if singular_values[1] <= 1e-10 * singular_values[0]:
        raise InfeasibleMarketError(
            "sensitivity matrix has rank < 2; the market cannot be completed")

    A = np.hstack([sigma_n.T, -sigma_n.T])
    delta, l1 = _dense_simplex(np.ones(2 * n), A, eta.as_array())
    pi = delta[:n] - delta[n:]

    if cross_check is None:
        cross_check = n <= 8
    best_l1, best_pair, _ = (best_pair_allocation(sigma_n, eta)
                             if cross_check else (None, None, None))
    cond = float(singular_values[0] / singular_values[1])
    return AllocationResult(pi=pi, cash=float(1.0 - pi.sum()), l1=float(l1),
                            cond=cond, best_pair_l1=best_l1,
                            best_pair=best_pair)
