"""Mixed-strategy saddle points of two-person zero-sum matrix games, by simplex.

The row player (defender) pays the column player (attacker) the matrix entry.
Both linear programs are solved with one dense-tableau primal simplex run on
the classical normalization: the matrix is mapped affinely onto [1, 2], the
defender's program becomes max 1'x s.t. L'x <= 1, x >= 0 (slack basis is
feasible, so no phase one), and the attacker's strategy is recovered from the
dual multipliers of the optimal tableau. Bland's rule guarantees termination.

The affine canonicalization has a useful side effect: adding a constant to
every entry, or scaling by a power of two, leaves the internal tableau
bit-identical, so the returned strategies are bit-identical as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
CLEANUP_TOL = 1e-9
GAP_TOL = 1e-6
MAX_PIVOTS = 20000


class LpError(RuntimeError):
    """Simplex failed to converge or the solution violates the duality gap bound."""


@dataclass(frozen=True)
class MixedStrategy:
    """Probability distribution over pure strategies."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1:
            raise ValueError("probs must be a vector")
        if np.any(p < -1e-12):
            raise ValueError("probs must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probs must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_raw(cls, raw: np.ndarray) -> "MixedStrategy":
        """Clamp entries below the cleanup tolerance to zero and renormalize."""
        p = np.array(raw, dtype=float)
        p[np.abs(p) < CLEANUP_TOL] = 0.0
        p = np.maximum(p, 0.0)
        return cls(p / p.sum())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.probs)[0])


@dataclass(frozen=True)
class GameSolution:
    """Saddle point in mixed strategies with both players' security levels.

    value_upper is the defender's loss ceiling max_j (L' x*)_j and value_lower
    the attacker's gain floor min_i (L y*)_i; they coincide at the optimum up
    to solver tolerance.
    """

    defender: MixedStrategy
    attacker: MixedStrategy
    value: float
    value_upper: float
    value_lower: float
    pure_saddle: tuple[int, int] | None = None

    @property
    def duality_gap(self) -> float:
        return self.value_upper - self.value_lower


def _as_matrix(L) -> np.ndarray:
    mat = np.asarray(getattr(L, "L", L), dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError("payoff matrix must be a nonempty 2-D array")
    if not np.all(np.isfinite(mat)):
        raise ValueError("payoff matrix must be finite")
    return mat


def find_pure_saddle(L) -> tuple[int, int] | None:
    """First (row-major) pure strategy pair that is a saddle point, if any.

    An entry qualifies when it is the maximum of its row and the minimum of
    its column, i.e. neither player gains by a unilateral deviation.
    """
    mat = _as_matrix(L)
    row_max = mat.max(axis=1)
    col_min = mat.min(axis=0)
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            if mat[i, j] >= row_max[i] and mat[i, j] <= col_min[j]:
                return i, j
    return None


def _simplex_max(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maximize c'x subject to A x <= b (b >= 0), x >= 0.

    Dense tableau, slack starting basis, Bland's anti-cycling rule. Returns
    (x, dual multipliers of the <= constraints).
    """
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    for _ in range(MAX_PIVOTS):
        enter = -1
        for j in range(n + m):  # Bland: lowest eligible index enters
            if T[m, j] < -PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            x = np.zeros(n + m)
            for r, var in enumerate(basis):
                x[var] = T[r, -1]
            return x[:n], T[m, n:n + m].copy()
        leave = -1
        best = np.inf
        tie = 1e-12
        for r in range(m):  # ratio test; ties go to the lowest basis variable
            a = T[r, enter]
            if a > PIVOT_TOL:
                ratio = T[r, -1] / a
                if ratio < best - tie or (
                    abs(ratio - best) <= tie and (leave < 0 or basis[r] < basis[leave])
                ):
                    best = ratio
                    leave = r
        if leave < 0:
            raise LpError("LP is unbounded")
        piv_row = T[leave, :] / T[leave, enter]
        T -= np.outer(T[:, enter], piv_row)
        T[leave, :] = piv_row
        basis[leave] = enter
    raise LpError("LP did not converge")


def _solve_canonical(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve the game after mapping entries affinely onto [1, 2].

    Returns (defender probs, attacker probs, game value in original units).
    For a constant matrix every strategy pair is optimal; the first pure
    strategies are returned.
    """
    m, n = mat.shape
    lo = float(mat.min())
    hi = float(mat.max())
    span = hi - lo
    if span == 0.0:
        x = np.zeros(m)
        x[0] = 1.0
        y = np.zeros(n)
        y[0] = 1.0
        return x, y, lo
    pos = 1.0 + (mat - lo) / span  # entries in [1, 2] => value is positive
    # Defender: min of b_u with L'x <= b_u 1 becomes, after x~ = x / b_u,
    # max 1'x~ subject to pos' x~ <= 1. The attacker's program is its dual.
    x_raw, y_raw = _simplex_max(pos.T, np.ones(n), np.ones(m))
    sx = x_raw.sum()
    sy = y_raw.sum()
    if sx <= 0 or sy <= 0:
        raise LpError("degenerate game normalization")
    value = float(span * (1.0 / sx - 1.0) + lo)
    return x_raw / sx, y_raw / sy, value


def solve_defender_lp(L) -> tuple[MixedStrategy, float]:
    """Optimal defender mix x* and its loss ceiling b_u = max_j (L' x*)_j."""
    mat = _as_matrix(L)
    x_raw, _, _ = _solve_canonical(mat)
    x = MixedStrategy.from_raw(x_raw)
    return x, float((mat.T @ x.probs).max())


def solve_attacker_lp(L) -> tuple[MixedStrategy, float]:
    """Optimal attacker mix y* and its gain floor b_l = min_i (L y*)_i.

    Recovered from the dual multipliers of the defender's optimal tableau.
    """
    mat = _as_matrix(L)
    _, y_raw, _ = _solve_canonical(mat)
    y = MixedStrategy.from_raw(y_raw)
    return y, float((mat @ y.probs).min())


def solve_game(L) -> GameSolution:
    """Solve both sides, check strong duality, and report any pure saddle."""
    mat = _as_matrix(L)
    x_raw, y_raw, value = _solve_canonical(mat)
    defender = MixedStrategy.from_raw(x_raw)
    attacker = MixedStrategy.from_raw(y_raw)
    b_u = float((mat.T @ defender.probs).max())
    b_l = float((mat @ attacker.probs).min())
    if abs(b_u - b_l) > GAP_TOL * max(1.0, abs(b_u)):
        raise LpError(f"duality gap {b_u - b_l:.3e} exceeds tolerance")
    return GameSolution(
        defender=defender,
        attacker=attacker,
        value=value,
        value_upper=b_u,
        value_lower=b_l,
        pure_saddle=find_pure_saddle(mat),
    )


def solution_report(sol: GameSolution, labels: list[str] | None = None) -> str:
    """Key-value text report of a game solution."""
    dn = len(sol.defender.probs)
    an = len(sol.attacker.probs)
    row_labels = labels if labels is not None and len(labels) == dn else [str(i + 1) for i in range(dn)]
    col_labels = labels if labels is not None and len(labels) == an else [str(j + 1) for j in range(an)]
    lines = [
        f"value: {sol.value!r}",
        f"loss_ceiling: {sol.value_upper!r}",
        f"gain_floor: {sol.value_lower!r}",
        f"duality_gap: {sol.duality_gap!r}",
        f"pure_saddle: {sol.pure_saddle if sol.pure_saddle is not None else 'none'}",
    ]
    for lbl, p in zip(row_labels, sol.defender.probs):
        lines.append(f"defender[{lbl}]: {p!r}")
    for lbl, p in zip(col_labels, sol.attacker.probs):
        lines.append(f"attacker[{lbl}]: {p!r}")
    return "\n".join(lines) + "\n"


def solution_csv(sol: GameSolution, labels: list[str]) -> str:
    """CSV with KF and Attacker probability rows plus value and duality gap."""
    if len(labels) != len(sol.defender.probs) or len(labels) != len(sol.attacker.probs):
        raise ValueError("labels must match the strategy dimensions")
    lines = ["player," + ",".join(labels)]
    lines.append("KF," + ",".join(repr(float(p)) for p in sol.defender.probs))
    lines.append("Attacker," + ",".join(repr(float(p)) for p in sol.attacker.probs))
    lines.append(f"value,{sol.value!r}")
    lines.append(f"duality_gap,{sol.duality_gap!r}")
    return "\n".join(lines) + "\n"
