"""Cross interpolation: maxvol pivoting, matrix cross, and TT-cross.

TT-cross builds a tensor-train approximation of a black-box function from
``O(d * n * D^2)`` oracle calls, alternating left-to-right and right-to-left
sweeps of maxvol-selected interpolation sets.  Index sets are nested: every
left set extends a member of the previous left set by one coordinate, and
symmetrically for right sets, which is what makes the assembled cores a
consistent interpolation of the sampled entries.

All pivot searches and solves run on an orthonormalized column basis (QR of
each sampled unfolding).  The interpolation operator ``M(:,J) M(I,J)^{-1}``
is mathematically unchanged, but the pivot blocks that actually get
inverted stay well conditioned even when the target function has rapidly
decaying singular values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    MaxvolIterationError,
    OracleBudgetError,
    SingularMatrixError,
)
from .tensor_train import TensorTrain, tt_rand_sample_diff

__all__ = ["CrossConfig", "CrossReport", "maxvol", "matrix_cross", "tt_cross"]

# Condition estimate above which a pivot-block inversion is refused.
COND_LIMIT = 1e12
# Relative rank tolerance for maxvol's input check (pivoted QR diagonal).
RANK_TOL = 1e-12


@dataclass(frozen=True)
class CrossConfig:
    """Controls for one TT-cross run.

    ``bond_dim`` is the fixed target rank of every internal bond (no rank
    adaptivity; growing the rank per sweep reportedly does not help).
    Convergence is declared when the sampled one-norm difference against
    the oracle drops to ``eps_tol``.
    """

    bond_dim: int
    eps_tol: float = 0.005
    max_sweeps: int = 4
    n_conv_samples: int = 50_000
    seed: int = 0
    maxvol_slack: float = 0.01
    oracle_call_budget: int | None = None

    def __post_init__(self):
        if self.bond_dim < 1:
            raise ValueError("bond_dim must be >= 1")
        if self.eps_tol <= 0:
            raise ValueError("eps_tol must be > 0")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.n_conv_samples < 1:
            raise ValueError("n_conv_samples must be >= 1")
        if self.maxvol_slack < 0:
            raise ValueError("maxvol_slack must be >= 0")
        if self.oracle_call_budget is not None and self.oracle_call_budget < 1:
            raise ValueError("oracle_call_budget must be >= 1 when set")


@dataclass
class CrossReport:
    """Outcome record of a TT-cross run.

    ``oracle_calls`` counts every construction call, including entries
    sampled more than once; calls spent on the sampled convergence check
    are tallied separately in ``conv_check_calls`` and excluded from
    ``compression_ratio = oracle_calls / prod(shape)``.
    """

    converged: bool
    sweeps_used: int
    oracle_calls: int
    conv_check_calls: int
    final_diff: float
    compression_ratio: float
    left_sets: list = field(default=None, repr=False, compare=False)
    right_sets: list = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {
            "converged": self.converged,
            "sweeps_used": self.sweeps_used,
            "oracle_calls": self.oracle_calls,
            "conv_check_calls": self.conv_check_calls,
            "final_diff": self.final_diff,
            "compression_ratio": self.compression_ratio,
        }


def _column_basis(mat, rank_tol):
    """Orthonormal column basis via pivoted QR, with a rank check.

    ``rank_tol`` is relative to the leading pivot; pass 0 to only reject
    exactly degenerate input.
    """
    q, r, _ = scipy.linalg.qr(mat, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    lead = diag.max(initial=0.0)
    if lead == 0.0:
        raise SingularMatrixError(f"matrix of shape {mat.shape} is zero")
    if diag.min() < rank_tol * lead:
        raise SingularMatrixError(
            f"matrix of shape {mat.shape} is numerically rank deficient "
            f"(pivot ratio {diag.min() / lead:.2e})"
        )
    return q


def _swap_to_dominance(q, sel, slack, max_iters):
    """Single-row swaps until every entry of ``Q @ Q[sel]^{-1}`` is small."""
    n = q.shape[0]
    sel = np.asarray(sel, dtype=np.int64).copy()
    b = np.linalg.solve(q[sel].T, q.T).T
    limit = max_iters if max_iters is not None else 10 * n
    for it in range(limit):
        i, j = np.unravel_index(np.argmax(np.abs(b)), b.shape)
        pivot = b[i, j]
        if abs(pivot) <= 1.0 + slack:
            return np.sort(sel)
        # swap row sel[j] -> i; rank-1 update of B = Q @ Q[sel]^{-1}
        b += np.outer(b[:, j], b[sel[j], :] - b[i, :]) / pivot
        sel[j] = i
        if (it + 1) % 64 == 0:
            # refresh to keep rank-1 update drift in check
            b = np.linalg.solve(q[sel].T, q.T).T
    raise MaxvolIterationError(f"maxvol did not settle within {limit} row swaps")


# Pairwise refinement is quadratic in both extents; worth it only when small.
_PAIR_REFINE_ROWS = 96
_PAIR_REFINE_COLS = 8


def _pairwise_refine(q, sel, slack, max_iters):
    """Deepen the local search with strictly improving two-row exchanges.

    The volume gain of replacing rows ``sel[j1], sel[j2]`` by ``i1, i2`` is
    the modulus of the 2x2 minor of ``B = Q @ Q[sel]^{-1}``; any exchange
    above 1 strictly increases the volume.  Dominance is restored after
    every exchange, so the returned selection satisfies the usual maxvol
    property as well.
    """
    n = q.shape[0]
    limit = max_iters if max_iters is not None else 10 * n
    for _ in range(limit):
        sel = _swap_to_dominance(q, sel, slack, max_iters)
        b = np.linalg.solve(q[sel].T, q.T).T
        minors = np.abs(
            np.einsum("ij,kl->ikjl", b, b) - np.einsum("il,kj->ikjl", b, b)
        )
        i1, i2, j1, j2 = np.unravel_index(np.argmax(minors), minors.shape)
        if minors[i1, i2, j1, j2] <= 1.0 + 1e-9:
            return sel
        sel = sel.copy()
        sel[j1], sel[j2] = i1, i2
    raise MaxvolIterationError(f"maxvol refinement did not settle within {limit} rounds")


def _dominant_rows(q, slack, max_iters):
    """maxvol row selection on an orthonormal basis ``q`` (n x r, n >= r).

    Runs the swap iteration from two pivoted-factorization starts (greedy
    row-pivoted QR and partial-pivoted LU) and keeps the larger volume;
    single-swap iterations are local searches, and the second basin is
    cheap insurance.  Small inputs get a pairwise-exchange refinement on
    top, which removes most of the remaining gap to the global optimum.
    """
    n, r = q.shape
    if n == r:
        return np.arange(r, dtype=np.int64)
    _, _, piv = scipy.linalg.qr(q.conj().T, mode="economic", pivoting=True)
    starts = [np.sort(piv[:r].astype(np.int64))]
    p, _, _ = scipy.linalg.lu(q, p_indices=True)
    lu_start = np.sort(np.argsort(p)[:r].astype(np.int64))
    if not np.array_equal(lu_start, starts[0]):
        starts.append(lu_start)

    best_sel, best_vol, error = None, -math.inf, None
    for start in starts:
        try:
            sel = _swap_to_dominance(q, start, slack, max_iters)
        except MaxvolIterationError as exc:
            error = exc
            continue
        vol = np.linalg.slogdet(q[sel])[1]
        if vol > best_vol:
            best_sel, best_vol = sel, vol
    if best_sel is None:
        raise error
    if n <= _PAIR_REFINE_ROWS and r <= _PAIR_REFINE_COLS:
        best_sel = _pairwise_refine(q, best_sel, slack, max_iters)
    return best_sel


def maxvol(mat, slack=0.01, max_iters=None, rank_tol=RANK_TOL):
    """Rows whose square submatrix has quasi-maximal volume.

    Starting from pivoted-factorization rows, swaps one row at a time while
    some entry of ``B = mat @ mat[I]^{-1}`` exceeds ``1 + slack`` in
    modulus; each accepted swap strictly increases ``|det mat[I]|``, so the
    loop terminates.  Returns the sorted row indices.

    Raises
    ------
    SingularMatrixError
        If ``mat`` is numerically rank deficient.
    MaxvolIterationError
        If the swaps do not settle within ``10 * n`` iterations.
    """
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2:
        raise ValueError("maxvol expects a matrix")
    n, r = mat.shape
    if n < r:
        raise ValueError(f"need at least as many rows as columns, got {mat.shape}")
    q = _column_basis(mat, rank_tol)
    return _dominant_rows(q, slack, max_iters)


def matrix_cross(m_oracle, n, m, r, seed, slack=0.01, max_iters=10):
    """Alternating maxvol search for cross rows and columns of a matrix.

    ``m_oracle(i, j)`` must evaluate entries under numpy broadcasting.
    Starts from a random column set, then alternates: maxvol on the sampled
    column block updates the rows, maxvol on the row block updates the
    columns, until the sets stabilize or ``max_iters`` passes are done.
    Returns the final ``(rows, cols)`` index arrays.
    """
    if r > min(n, m):
        raise ValueError(f"rank {r} exceeds matrix extent {(n, m)}")
    rng = np.random.default_rng(seed)
    cols = np.sort(rng.choice(m, size=r, replace=False)).astype(np.int64)
    rows = None
    all_rows = np.arange(n, dtype=np.int64)
    all_cols = np.arange(m, dtype=np.int64)
    for _ in range(max_iters):
        try:
            col_block = np.asarray(
                m_oracle(all_rows[:, None], cols[None, :]), dtype=np.complex128
            )
            new_rows = maxvol(col_block, slack)
            row_block = np.asarray(
                m_oracle(new_rows[:, None], all_cols[None, :]), dtype=np.complex128
            )
            new_cols = maxvol(row_block.T, slack)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"singular pivot block at rank {r}; try a smaller rank ({exc})"
            ) from exc
        if (
            rows is not None
            and np.array_equal(new_rows, rows)
            and np.array_equal(new_cols, cols)
        ):
            break
        rows, cols = new_rows, new_cols
    return rows, cols


class _CallCounter:
    """Wraps the oracle to count calls and enforce the optional budget."""

    def __init__(self, oracle, budget):
        self.oracle = oracle
        self.budget = budget
        self.construction = 0
        self.convergence = 0

    def __call__(self, idx, kind="construction"):
        count = len(idx)
        total = self.construction + self.convergence + count
        if self.budget is not None and total > self.budget:
            raise OracleBudgetError(
                f"oracle budget {self.budget} exceeded (would reach {total})"
            )
        if kind == "construction":
            self.construction += count
        else:
            self.convergence += count
        return np.asarray(self.oracle(idx), dtype=np.complex128)


def _init_right_sets(shape, rank_at, rng):
    """Nested random right index sets, drawn without replacement per bond."""
    d = len(shape)
    right = [None] * (d + 1)
    right[d] = [()]
    for k in range(d - 1, 0, -1):
        tail = right[k + 1]
        candidates = [(s,) + suffix for s in range(shape[k]) for suffix in tail]
        want = min(rank_at(k), len(candidates))
        pick = rng.choice(len(candidates), size=want, replace=False)
        right[k] = [candidates[t] for t in np.sort(pick)]
    return right


def _block(counter, left, axis_size, right, axis_first):
    """Sample the unfolding block for one bond as a (rows, cols) matrix.

    Rows run over ``left x axis`` when ``axis_first`` is False (used while
    sweeping left to right), columns over ``axis x right`` when True (right
    to left).
    """
    if axis_first:
        row_tuples = left
        col_tuples = [(s,) + suffix for s in range(axis_size) for suffix in right]
    else:
        row_tuples = [prefix + (s,) for prefix in left for s in range(axis_size)]
        col_tuples = right
    n_rows, n_cols = len(row_tuples), len(col_tuples)
    lw = len(row_tuples[0])
    rw = len(col_tuples[0])
    rows_arr = np.asarray(row_tuples, dtype=np.int64).reshape(n_rows, lw)
    cols_arr = np.asarray(col_tuples, dtype=np.int64).reshape(n_cols, rw)
    idx = np.empty((n_rows * n_cols, lw + rw), dtype=np.int64)
    idx[:, :lw] = np.repeat(rows_arr, n_cols, axis=0)
    idx[:, lw:] = np.tile(cols_arr, (n_rows, 1))
    vals = counter(idx)
    return vals.reshape(n_rows, n_cols), row_tuples, col_tuples


def _interp_core(block, cfg, bond):
    """maxvol pivots and interpolation factor ``B`` for one bond block.

    ``B = Q @ Q[sel]^{-1}`` equals ``block @ block[sel]^{-1}`` whenever the
    block has full column rank, has identity rows at ``sel``, and keeps the
    inverted pivot block well conditioned.
    """
    try:
        q = _column_basis(block, rank_tol=0.0)
        sel = _dominant_rows(q, cfg.maxvol_slack, max_iters=None)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"singular cross block at bond {bond}: {exc}", bond=bond
        ) from exc
    pivot = q[sel]
    if np.linalg.cond(pivot) > COND_LIMIT:
        raise SingularMatrixError(
            f"pivot block at bond {bond} has condition above {COND_LIMIT:.0e}",
            bond=bond,
        )
    return sel, np.linalg.solve(pivot.T, q.T).T


def tt_cross(oracle, shape, cfg):
    """Tensor-train approximation of a black-box oracle at fixed rank.

    Alternates left-to-right and right-to-left sweeps (starting left) over
    the bonds.  Each bond samples the unfolding at the current nested index
    sets, updates one set by maxvol, and assembles the adjacent core from
    the cross formula.  After every directional pass the train is complete,
    and the sampled one-norm difference (``cfg.n_conv_samples`` points at
    ``cfg.seed``) decides convergence.

    Returns the train and a :class:`CrossReport`; non-convergence is
    reported, not raised.
    """
    shape = tuple(int(n) for n in shape)
    if len(shape) < 1 or min(shape) < 1:
        raise ValueError(f"invalid shape {shape}")
    d = len(shape)
    counter = _CallCounter(oracle, cfg.oracle_call_budget)
    total_entries = math.prod(shape)

    if d == 1:
        # a single-site train stores the full vector exactly
        idx = np.arange(shape[0], dtype=np.int64)[:, None]
        values = counter(idx)
        tt = TensorTrain([values.reshape(1, shape[0], 1)])
        diff = tt_rand_sample_diff(
            tt, lambda i: counter(i, kind="convergence"), cfg.n_conv_samples, cfg.seed
        )
        return tt, CrossReport(
            converged=diff <= cfg.eps_tol,
            sweeps_used=1,
            oracle_calls=counter.construction,
            conv_check_calls=counter.convergence,
            final_diff=diff,
            compression_ratio=counter.construction / total_entries,
            left_sets=[[()], None],
            right_sets=[None, [()]],
        )

    def rank_at(k):
        prefix = math.prod(shape[:k])
        suffix = math.prod(shape[k:])
        return min(cfg.bond_dim, prefix, suffix)

    rng = np.random.default_rng(cfg.seed)
    right = _init_right_sets(shape, rank_at, rng)
    left = [None] * (d + 1)
    left[0] = [()]
    cores = [None] * d

    diff = math.inf
    sweeps = 0
    converged = False
    while sweeps < cfg.max_sweeps and not converged:
        if sweeps % 2 == 0:  # left to right
            for k in range(1, d):
                block, row_tuples, _ = _block(
                    counter, left[k - 1], shape[k - 1], right[k], axis_first=False
                )
                sel, factor = _interp_core(block, cfg, bond=k)
                left[k] = [row_tuples[t] for t in sel]
                cores[k - 1] = factor.reshape(
                    len(left[k - 1]), shape[k - 1], len(right[k])
                )
            block, _, _ = _block(counter, left[d - 1], shape[d - 1], [()], False)
            cores[d - 1] = block.reshape(len(left[d - 1]), shape[d - 1], 1)
        else:  # right to left
            for k in range(d - 1, 0, -1):
                block, _, col_tuples = _block(
                    counter, left[k], shape[k], right[k + 1], axis_first=True
                )
                sel, factor = _interp_core(block.T, cfg, bond=k)
                right[k] = [col_tuples[t] for t in sel]
                cores[k] = factor.T.reshape(
                    len(left[k]), shape[k], len(right[k + 1])
                )
            block, _, _ = _block(counter, [()], shape[0], right[1], True)
            cores[0] = block.reshape(1, shape[0], len(right[1]))

        tt = TensorTrain(cores)
        sweeps += 1
        diff = tt_rand_sample_diff(
            tt, lambda i: counter(i, kind="convergence"), cfg.n_conv_samples, cfg.seed
        )
        converged = diff <= cfg.eps_tol

    return tt, CrossReport(
        converged=converged,
        sweeps_used=sweeps,
        oracle_calls=counter.construction,
        conv_check_calls=counter.convergence,
        final_diff=diff,
        compression_ratio=counter.construction / total_entries,
        left_sets=list(left),
        right_sets=list(right),
    )
