"""Infeasible-start primal-dual interior-point core for real symmetric
cone programs (PSD matrix blocks plus one nonnegative-orthant block).

Solves    minimize    sum_b <C_b, X_b> + c . u
          subject to  sum_b <A_ib, X_b> + a_i . u = b_i,   i = 1..m,
                      X_b symmetric PSD,   u >= 0,

using Nesterov-Todd scaled search directions with a Mehrotra-style
adaptive centering parameter.  Per-block constraint coefficients are kept
split by structure (diagonal vs dense), so the Schur complement assembles
in O(n^3) per iteration on the diagonal-dominated problems this package
generates, while arbitrary dense constraints remain supported.

Everything is dense float64 linear algebra and fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class SdpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERS = "max_iters"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class BlockRows:
    """Constraint coefficients on one PSD block, split by structure.

    ``diag_idx[i]`` is the constraint-row index whose coefficient on this
    block is ``diag(diag_vecs[i])``; ``dense_idx[j]`` the row whose
    coefficient is the full symmetric matrix ``dense_mats[j]``.
    """

    diag_idx: np.ndarray    # (kd,) int
    diag_vecs: np.ndarray   # (kd, n)
    dense_idx: np.ndarray   # (ke,) int
    dense_mats: np.ndarray  # (ke, n, n) symmetric


@dataclass
class ConicProblem:
    dims: list[int]                # PSD block sizes
    lp_dim: int                    # nonnegative-orthant size
    block_rows: list[BlockRows]    # per PSD block
    lp_mat: np.ndarray             # (m, lp_dim)
    b: np.ndarray                  # (m,)
    c_blocks: list[np.ndarray]     # objective, symmetric per block
    c_lp: np.ndarray               # (lp_dim,)

    @property
    def num_rows(self) -> int:
        return self.b.shape[0]


@dataclass
class ConicResult:
    status: SdpStatus
    x_blocks: list[np.ndarray]
    x_lp: np.ndarray
    y: np.ndarray
    z_blocks: list[np.ndarray]
    z_lp: np.ndarray
    iterations: int
    gap: float              # complementarity <x, z>, nonnegative
    rel_gap: float
    rel_primal: float
    rel_dual: float
    primal_objective: float
    dual_objective: float


def _sym(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


def _eigh_pd(mat: np.ndarray, floor: float = 1e-300):
    """Eigendecomposition of a matrix expected to be positive definite.

    Returns (eigenvalues, eigenvectors, ok); ok is False when the smallest
    eigenvalue is nonpositive beyond roundoff repair.
    """
    vals, vecs = np.linalg.eigh(mat)
    if vals[0] <= 0.0:
        scale = max(abs(vals[-1]), 1.0)
        if vals[0] < -1e-11 * scale:
            return vals, vecs, False
        vals = np.maximum(vals, 1e-14 * scale)
    vals = np.maximum(vals, floor)
    return vals, vecs, True


class _Operator:
    """Constraint operator A and its adjoint, plus Schur assembly."""

    def __init__(self, prob: ConicProblem):
        self.prob = prob
        self.m = prob.num_rows

    def apply(self, x_blocks, x_lp) -> np.ndarray:
        """A(x): one value per constraint row."""
        if self.prob.lp_dim:
            out = self.prob.lp_mat @ x_lp
        else:
            out = np.zeros(self.m)
        for rows, X in zip(self.prob.block_rows, x_blocks):
            if rows.diag_idx.size:
                out[rows.diag_idx] += rows.diag_vecs @ np.diagonal(X)
            if rows.dense_idx.size:
                out[rows.dense_idx] += np.tensordot(rows.dense_mats, X, axes=2)
        return out

    def adjoint(self, y: np.ndarray):
        """A^T(y): a symmetric matrix per block plus the LP part."""
        blocks = []
        for rows, n in zip(self.prob.block_rows, self.prob.dims):
            acc = np.zeros((n, n))
            if rows.diag_idx.size:
                np.fill_diagonal(acc, rows.diag_vecs.T @ y[rows.diag_idx])
            if rows.dense_idx.size:
                acc += np.tensordot(y[rows.dense_idx], rows.dense_mats, axes=(0, 0))
            blocks.append(acc)
        lp = self.prob.lp_mat.T @ y if self.prob.lp_dim else np.zeros(0)
        return blocks, lp

    def schur(self, w_blocks, w2_lp):
        """M with M[i, j] = sum_b tr(A_ib W_b A_jb W_b) + a_i . (w2 * a_j).

        Also returns, per block, the W-scaled dense coefficient matrices
        (reused when building right-hand sides is not needed, but cheap to
        keep for clarity).
        """
        m = self.m
        M = np.zeros((m, m))
        if self.prob.lp_dim:
            scaled = self.prob.lp_mat * w2_lp[None, :]
            M += scaled @ self.prob.lp_mat.T
        for rows, W in zip(self.prob.block_rows, w_blocks):
            kd, ke = rows.diag_idx.size, rows.dense_idx.size
            if kd:
                W2 = W * W
                M[np.ix_(rows.diag_idx, rows.diag_idx)] += \
                    rows.diag_vecs @ W2 @ rows.diag_vecs.T
            if ke:
                S = W @ rows.dense_mats @ W          # (ke, n, n) batched
                M[np.ix_(rows.dense_idx, rows.dense_idx)] += \
                    np.tensordot(rows.dense_mats, S, axes=([1, 2], [1, 2]))
                if kd:
                    diag_s = np.diagonal(S, axis1=1, axis2=2)   # (ke, n)
                    cross = rows.diag_vecs @ diag_s.T           # (kd, ke)
                    M[np.ix_(rows.diag_idx, rows.dense_idx)] += cross
                    M[np.ix_(rows.dense_idx, rows.diag_idx)] += cross.T
        return _sym(M)


def _nt_scaling(X, Z):
    """NT scaling W (W Z W = X) plus factors reused for steps.

    Returns (W, Zinv, Xinv_half, Zinv_half, ok).
    """
    lx, Qx, okx = _eigh_pd(X)
    lz, Qz, okz = _eigh_pd(Z)
    if not (okx and okz):
        return None, None, None, None, False
    sx = np.sqrt(lx)
    Xh = (Qx * sx) @ Qx.T
    Xih = (Qx / sx) @ Qx.T
    lt, Qt, okt = _eigh_pd(_sym(Xh @ Z @ Xh))
    if not okt:
        return None, None, None, None, False
    Tis = (Qt / np.sqrt(lt)) @ Qt.T
    W = _sym(Xh @ Tis @ Xh)
    Zinv = (Qz / lz) @ Qz.T
    Zih = (Qz / np.sqrt(lz)) @ Qz.T
    return W, Zinv, Xih, Zih, True


def _max_step_blocks(cur_inv_half, deltas, lp_cur, lp_delta):
    """Largest step keeping every cone iterate in the (closed) cone."""
    alpha = np.inf
    for Mih, D in zip(cur_inv_half, deltas):
        lmin = np.linalg.eigvalsh(_sym(Mih @ D @ Mih))[0]
        if lmin < 0.0:
            alpha = min(alpha, 1.0 / (-lmin))
    if lp_cur.size:
        neg = lp_delta < 0.0
        if np.any(neg):
            alpha = min(alpha, np.min(-lp_cur[neg] / lp_delta[neg]))
    return alpha


def solve_conic(prob: ConicProblem, *, gap_tol: float = 1e-7,
                feas_tol: float = 1e-8, max_iters: int = 200,
                stall_iters: int = 20, step_frac: float = 0.98) -> ConicResult:
    """Run the interior-point iteration on a conic problem in standard form."""
    dims, L = prob.dims, prob.lp_dim
    if prob.num_rows == 0:
        raise ValueError("at least one constraint row is required")
    op = _Operator(prob)
    m = prob.num_rows
    nu = float(sum(dims) + L)

    norm_b = max(1.0, float(np.max(np.abs(prob.b))) if m else 1.0)
    norm_c = max([1.0] + [float(np.max(np.abs(C))) for C in prob.c_blocks]
                 + ([float(np.max(np.abs(prob.c_lp)))] if L else []))

    scale = max(1.0, np.sqrt(norm_b))
    X = [scale * np.eye(n) for n in dims]
    Z = [max(1.0, np.sqrt(norm_c)) * np.eye(n) for n in dims]
    x_lp = scale * np.ones(L)
    z_lp = max(1.0, np.sqrt(norm_c)) * np.ones(L)
    y = np.zeros(m)

    def inner(xb, xl, zb, zl):
        tot = sum(float(np.tensordot(a, c, axes=2)) for a, c in zip(xb, zb))
        return tot + float(xl @ zl)

    best_merit = np.inf
    stall = 0
    status = SdpStatus.MAX_ITERS
    it = 0
    rel_p = rel_d = rel_gap = np.inf
    gap = pobj = dobj = np.nan

    for it in range(1, max_iters + 1):
        gap = inner(X, x_lp, Z, z_lp)
        mu = gap / nu
        ax = op.apply(X, x_lp)
        rp = prob.b - ax
        aty_blocks, aty_lp = op.adjoint(y)
        Rd = [C - AT - Zb for C, AT, Zb in zip(prob.c_blocks, aty_blocks, Z)]
        rd_lp = prob.c_lp - aty_lp - z_lp

        pobj = sum(float(np.tensordot(C, Xb, axes=2))
                   for C, Xb in zip(prob.c_blocks, X)) + float(prob.c_lp @ x_lp)
        dobj = float(prob.b @ y)
        rel_gap = gap / (1.0 + abs(pobj) + abs(dobj))
        rel_p = float(np.max(np.abs(rp))) / (1.0 + norm_b)
        rel_d = max([float(np.max(np.abs(R))) for R in Rd]
                    + ([float(np.max(np.abs(rd_lp)))] if L else [0.0])) / (1.0 + norm_c)

        if not np.isfinite(rel_gap + rel_p + rel_d):
            status = SdpStatus.NUMERICAL_FAILURE
            break
        if rel_p <= feas_tol and rel_d <= feas_tol and rel_gap <= gap_tol:
            status = SdpStatus.OPTIMAL
            break

        # Infeasible problems show up as a diverging dual ray: y grows
        # without bound while b.y stays positive.
        ynorm = float(np.max(np.abs(y))) if m else 0.0
        if ynorm > 1e8 * norm_b and dobj > 1e-6 * ynorm:
            status = SdpStatus.INFEASIBLE
            break

        merit = rel_gap + rel_p + rel_d
        if merit < best_merit * (1.0 - 1e-4):
            best_merit = merit
            stall = 0
        else:
            stall += 1
        if stall >= stall_iters:
            if rel_p > 1e3 * feas_tol or (dobj > 0 and ynorm > 1e4 * norm_b):
                status = SdpStatus.INFEASIBLE
            else:
                status = SdpStatus.MAX_ITERS
            break

        scal = [_nt_scaling(Xb, Zb) for Xb, Zb in zip(X, Z)]
        if not all(s[-1] for s in scal):
            status = SdpStatus.NUMERICAL_FAILURE
            break
        Ws = [s[0] for s in scal]
        Zinvs = [s[1] for s in scal]
        Xihs = [s[2] for s in scal]
        Zihs = [s[3] for s in scal]
        w2_lp = x_lp / z_lp if L else np.zeros(0)

        try:
            M = op.schur(Ws, w2_lp)
            jitter = 0.0
            for _ in range(3):
                try:
                    Lc = np.linalg.cholesky(
                        M + jitter * np.eye(m) if jitter else M)
                    break
                except np.linalg.LinAlgError:
                    jitter = max(10.0 * jitter, 1e-13 * float(np.trace(M)) / m)
            else:
                status = SdpStatus.NUMERICAL_FAILURE
                break
        except FloatingPointError:
            status = SdpStatus.NUMERICAL_FAILURE
            break

        def solve_m(rhs):
            return np.linalg.solve(Lc.T, np.linalg.solve(Lc, rhs))

        W_Rd_W = [_sym(W @ R @ W) for W, R in zip(Ws, Rd)]
        w2_rd_lp = w2_lp * rd_lp if L else np.zeros(0)

        def direction(sigmu):
            targets = [sigmu * Zi - Xb - WRW
                       for Zi, Xb, WRW in zip(Zinvs, X, W_Rd_W)]
            t_lp = (sigmu / z_lp - x_lp - w2_rd_lp) if L else np.zeros(0)
            rhs = rp - op.apply(targets, t_lp)
            dy = solve_m(rhs)
            atdy_blocks, atdy_lp = op.adjoint(dy)
            dZ = [R - AT for R, AT in zip(Rd, atdy_blocks)]
            dz = rd_lp - atdy_lp if L else np.zeros(0)
            dX = [_sym(T + W @ AT @ W)
                  for T, W, AT in zip(targets, Ws, atdy_blocks)]
            dx = t_lp + w2_lp * atdy_lp if L else np.zeros(0)
            return dX, dx, dy, dZ, dz

        dXa, dxa, dya, dZa, dza = direction(0.0)
        a_p = min(1.0, _max_step_blocks(Xihs, dXa, x_lp, dxa))
        a_d = min(1.0, _max_step_blocks(Zihs, dZa, z_lp, dza))
        mu_aff = max(0.0, inner(
            [Xb + a_p * D for Xb, D in zip(X, dXa)], x_lp + a_p * dxa,
            [Zb + a_d * D for Zb, D in zip(Z, dZa)], z_lp + a_d * dza) / nu)
        sigma = min(1.0, max(1e-8, (mu_aff / mu) ** 3))

        dX, dx, dy, dZ, dz = direction(sigma * mu)
        a_p = min(1.0, step_frac * _max_step_blocks(Xihs, dX, x_lp, dx))
        a_d = min(1.0, step_frac * _max_step_blocks(Zihs, dZ, z_lp, dz))
        if min(a_p, a_d) <= 1e-10:
            stall += 5   # no progress possible; fast-track the stall exit
            continue

        X = [_sym(Xb + a_p * D) for Xb, D in zip(X, dX)]
        x_lp = x_lp + a_p * dx
        y = y + a_d * dy
        Z = [_sym(Zb + a_d * D) for Zb, D in zip(Z, dZ)]
        z_lp = z_lp + a_d * dz
        if not all(np.all(np.isfinite(Xb)) for Xb in X) or not np.all(np.isfinite(y)):
            status = SdpStatus.NUMERICAL_FAILURE
            break

    return ConicResult(
        status=status, x_blocks=X, x_lp=x_lp, y=y, z_blocks=Z, z_lp=z_lp,
        iterations=it, gap=max(gap, 0.0), rel_gap=rel_gap,
        rel_primal=rel_p, rel_dual=rel_d,
        primal_objective=pobj, dual_objective=dobj)
