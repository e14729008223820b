"""Dense LP container, a two-phase revised simplex, and degeneracy diagnostics.

Problems are always of the form::

    min  c^T x
    s.t. G x <= h          (x free)

Equalities are written as a pair of opposite rows; :func:`logical_constraints`
recovers the pairing so degeneracy counting treats a pair as one constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleLP, UnboundedLP

FEAS_TOL = 1e-8
ACT_TOL = 1e-7
_PIVOT_TOL = 1e-11
_MAX_ITER = 10_000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class DenseLP:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float).reshape(-1)
        m, n = G.shape
        if m < 1 or n < 1:
            raise ValueError("G must have at least one row and one column")
        if c.shape != (n,):
            raise ValueError(f"c must have length {n}, got {c.shape}")
        if h.shape != (m,):
            raise ValueError(f"h must have length {m}, got {h.shape}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(G)) and np.all(np.isfinite(h))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)

    @property
    def n_vars(self) -> int:
        return self.G.shape[1]

    @property
    def n_rows(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: str
    x_star: np.ndarray | None = None
    objective: float = float("nan")
    active: tuple[int, ...] = ()
    dual: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def require_optimal(self) -> "LpSolution":
        if self.status == INFEASIBLE:
            raise InfeasibleLP("LP has no feasible point")
        if self.status == UNBOUNDED:
            raise UnboundedLP("LP objective is unbounded below")
        return self


@dataclass(frozen=True)
class DegeneracyReport:
    """Nondegeneracy diagnostics at an optimum.

    ``primal_detail`` lists the active rows when more logical constraints are
    tight than there are variables. ``dual_detail`` lists active rows whose
    multiplier vanishes; ``free_dims`` counts directions left unpinned by the
    active rows (a flat optimal face even with no zero multiplier).
    """

    primal_detail: tuple[int, ...] = ()
    dual_detail: tuple[int, ...] = ()
    free_dims: int = 0

    @property
    def primal_degenerate(self) -> bool:
        return len(self.primal_detail) > 0

    @property
    def dual_degenerate(self) -> bool:
        return len(self.dual_detail) > 0 or self.free_dims > 0

    @property
    def degenerate(self) -> bool:
        return self.primal_degenerate or self.dual_degenerate

    def describe(self) -> str:
        parts = []
        if self.primal_degenerate:
            parts.append(f"primal degenerate, active rows {list(self.primal_detail)}")
        if self.dual_detail:
            parts.append(f"dual degenerate, zero multipliers on rows {list(self.dual_detail)}")
        if self.free_dims:
            parts.append(f"dual degenerate, {self.free_dims} free direction(s)")
        return "; ".join(parts) or "nondegenerate"


def _run_simplex(A, b, cost, basis, n_allowed):
    """Bland-rule revised simplex on ``min cost^T u, A u = b, u >= 0``.

    Only columns ``< n_allowed`` may enter. Returns (status, basis, x_B).
    """
    m = A.shape[0]
    opt_tol = 1e-10 * (1.0 + np.max(np.abs(cost)))
    for _ in range(_MAX_ITER):
        B = A[:, basis]
        xB = np.linalg.solve(B, b)
        pi = np.linalg.solve(B.T, cost[basis])
        reduced = cost[:n_allowed] - A[:, :n_allowed].T @ pi
        reduced[[j for j in basis if j < n_allowed]] = 0.0
        entering = np.flatnonzero(reduced < -opt_tol)
        if entering.size == 0:
            return OPTIMAL, basis, xB
        q = int(entering[0])
        d = np.linalg.solve(B, A[:, q])
        rows = np.flatnonzero(d > _PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED, basis, xB
        ratios = np.maximum(xB[rows], 0.0) / d[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + best)]
        r = min(ties, key=lambda i: basis[i])
        basis = list(basis)
        basis[r] = q
    raise RuntimeError(f"simplex exceeded {_MAX_ITER} iterations (m={m})")


def solve(lp: DenseLP) -> LpSolution:
    """Solve ``lp`` exactly to an optimal basis.

    Free variables are split as x = x+ - x-, every row receives a slack, and
    rows with negative right-hand side get an artificial for phase one. Pivoting
    follows Bland's rule, so identical inputs give bit-identical outputs.
    """
    G, h, c = lp.G, lp.h, lp.c
    m, n = G.shape
    sign = np.where(h < 0, -1.0, 1.0)
    A = np.hstack([G, -G, np.eye(m)]) * sign[:, None]
    b = h * sign
    n_struct = 2 * n + m
    art_rows = np.flatnonzero(sign < 0)
    n_art = art_rows.size

    A1 = np.hstack([A, np.zeros((m, n_art))])
    for k, r in enumerate(art_rows):
        A1[r, n_struct + k] = 1.0
    basis = []
    art_of_row = {int(r): n_struct + k for k, r in enumerate(art_rows)}
    for r in range(m):
        basis.append(art_of_row.get(r, 2 * n + r))

    keep_rows = np.arange(m)
    if n_art:
        cost1 = np.zeros(n_struct + n_art)
        cost1[n_struct:] = 1.0
        status, basis, xB = _run_simplex(A1, b, cost1, basis, n_struct + n_art)
        infeas = float(cost1[basis] @ xB)
        if infeas > FEAS_TOL * (1.0 + np.max(np.abs(b))):
            return LpSolution(status=INFEASIBLE)
        # drive zero-level artificials out of the basis
        drop = []
        for pos, var in enumerate(list(basis)):
            if var < n_struct:
                continue
            Bm = A1[:, basis]
            row = np.linalg.solve(Bm, A1[:, :n_struct])[pos]
            candidates = [j for j in np.flatnonzero(np.abs(row) > 1e-9) if j not in basis]
            if candidates:
                basis[pos] = int(candidates[0])
            else:
                drop.append(pos)
        if drop:
            keep = [i for i in range(m) if i not in drop]
            keep_rows = keep_rows[keep]
            A1 = A1[keep]
            b = b[keep]
            basis = [v for i, v in enumerate(basis) if i not in drop]
    A2 = A1[:, :n_struct]
    cost2 = np.concatenate([c, -c, np.zeros(m)])
    status, basis, xB = _run_simplex(A2, b, cost2, basis, n_struct)
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED)

    u = np.zeros(n_struct)
    u[basis] = xB
    x = u[:n] - u[n : 2 * n]
    pi_kept = np.linalg.solve(A2[:, basis].T, cost2[basis])
    pi = np.zeros(m)
    pi[keep_rows] = pi_kept
    dual = np.maximum(-sign * pi, 0.0)
    # a basic slack means the row's multiplier is zero; drop solve round-off
    basic_slack = [v - 2 * n for v in basis if 2 * n <= v < n_struct]
    dual[basic_slack] = 0.0
    return LpSolution(
        status=OPTIMAL,
        x_star=x,
        objective=float(c @ x),
        active=active_set(lp, x),
        dual=dual,
    )


def active_set(lp: DenseLP, x, tol_act: float = ACT_TOL) -> tuple[int, ...]:
    """Indices of rows tight at ``x`` (accepts an :class:`LpSolution` too)."""
    if isinstance(x, LpSolution):
        x = x.x_star
    resid = np.abs(lp.G @ np.asarray(x, dtype=float) - lp.h)
    return tuple(int(j) for j in np.flatnonzero(resid <= tol_act * (1.0 + np.abs(lp.h))))


def pair_rows(G, R) -> list[tuple[int, ...]]:
    """Group rows of ``G`` with right-hand-side data ``R`` into logical constraints.

    Rows j, k with G_k = -G_j and R_k = -R_j form an equality pair; every
    other row is its own group. Groups are ordered by their first row.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    R = np.asarray(R, dtype=float).reshape(G.shape[0], -1)
    M = np.hstack([G, R])
    scale = 1.0 + np.abs(M).max(axis=1)
    partner = {}
    for j in range(M.shape[0]):
        if j in partner:
            continue
        for k in range(j + 1, M.shape[0]):
            if k not in partner and np.allclose(M[k], -M[j], rtol=0.0, atol=1e-12 * scale[j]):
                partner[j], partner[k] = k, j
                break
    groups = []
    for j in range(M.shape[0]):
        if j not in partner:
            groups.append((j,))
        elif partner[j] > j:
            groups.append((j, partner[j]))
    return groups


def logical_constraints(lp: DenseLP) -> list[tuple[int, ...]]:
    """Group rows into logical constraints; opposite row pairs form one equality."""
    return pair_rows(lp.G, lp.h)


def check_nondegenerate(lp: DenseLP, sol: LpSolution, tol_act: float = ACT_TOL, groups=None) -> DegeneracyReport:
    """Diagnose primal and dual degeneracy of an optimal solution.

    ``groups`` overrides the row pairing found by :func:`logical_constraints`.
    """
    if not sol.optimal:
        raise ValueError("degeneracy is only defined at an optimum")
    active = set(active_set(lp, sol.x_star, tol_act))
    if groups is None:
        groups = logical_constraints(lp)
    groups = [g for g in groups if all(r in active for r in g)]
    n = lp.n_vars

    primal = tuple(sorted(r for g in groups for r in g)) if len(groups) > n else ()

    mult_tol = 1e-9 * (1.0 + np.max(np.abs(lp.c)))
    zero = []
    for g in groups:
        strength = sol.dual[g[0]] if len(g) == 1 else abs(sol.dual[g[0]] - sol.dual[g[1]])
        if strength <= mult_tol:
            zero.extend(g)
    if groups:
        rank = np.linalg.matrix_rank(lp.G[[g[0] for g in groups]], tol=1e-10)
    else:
        rank = 0
    return DegeneracyReport(primal_detail=primal, dual_detail=tuple(sorted(zero)), free_dims=int(max(n - rank, 0)))


def dual_objective(lp: DenseLP, sol: LpSolution) -> float:
    """Lagrange dual value -h^T lambda; equals the primal optimum by strong duality."""
    return float(-lp.h @ sol.dual)


def solve_strict(lp: DenseLP) -> LpSolution:
    """:func:`solve`, raising on infeasible or unbounded status."""
    return solve(lp).require_optimal()


def chebyshev_radius(A, b, r_max: float) -> tuple[float, np.ndarray | None]:
    """Largest ball ``{theta + r u : |u| <= 1}`` inside ``A theta <= b``.

    Returns (radius, center); radius is -inf when the set is empty.
    Rows with zero norm act as plain feasibility conditions.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    d = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    G = np.vstack([np.hstack([A, norms[:, None]]), np.r_[np.zeros(d), 1.0][None, :]])
    h = np.r_[b, r_max]
    # r >= -1 keeps the program bounded and lets empty sets show up as r < 0
    G = np.vstack([G, np.r_[np.zeros(d), -1.0][None, :]])
    h = np.r_[h, 1.0]
    cost = np.r_[np.zeros(d), -1.0]
    sol = solve(DenseLP(cost, G, h))
    if not sol.optimal:
        return float("-inf"), None
    return float(sol.x_star[-1]), sol.x_star[:d]


def rhs_sensitivity(lp: DenseLP, sol: LpSolution, dh, groups=None) -> float:
    """Directional derivative of the optimal cost along an RHS direction ``dh``.

    Solves the square active system ``G_J dx = dh_J`` and returns ``c^T dx``.
    Only valid at a nondegenerate optimum, where J is square and invertible.
    """
    if groups is None:
        groups = logical_constraints(lp)
    active = set(sol.active)
    reps = [g[0] for g in groups if all(r in active for r in g)]
    GJ = lp.G[reps]
    if GJ.shape[0] != GJ.shape[1]:
        raise ValueError(f"active system is {GJ.shape}, not square")
    dx = np.linalg.solve(GJ, np.asarray(dh, dtype=float)[reps])
    return float(lp.c @ dx)
