"""Small dense solver for complex Hermitian semidefinite programs.

A :class:`HermitianSdp` has Hermitian PSD matrix blocks, box-bounded real
scalar variables, a real-linear objective (sense: maximize), and linear
equality / greater-or-equal constraints whose coefficients are one
Hermitian matrix per block plus a real vector on the scalars:

    maximize    sum_b tr(C_b X_b) + c . s
    subject to  sum_b tr(A_ib X_b) + a_i . s  =  r_i     (equalities)
                sum_b tr(A_jb X_b) + a_j . s  >= r_j     (inequalities)
                X_b Hermitian PSD,   lo <= s <= hi.

Solving embeds each complex block into a real symmetric block twice the
size, folds inequalities and scalar bounds into a nonnegative slack block,
and runs the interior-point core in :mod:`star_secrecy._ipm`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ._ipm import BlockRows, ConicProblem, SdpStatus, solve_conic

HERMITIAN_TOL = 1e-12

__all__ = [
    "HermitianSdp", "RealSdp", "SdpSettings", "SdpSolution", "SdpStatus",
    "embed_complex", "solve",
]


@dataclass
class SdpSettings:
    """Solver tolerances and iteration caps."""

    gap_tol: float = 1e-7       # normalized duality gap at Optimal
    feas_tol: float = 1e-8      # normalized primal/dual residuals at Optimal
    eig_tol: float = 1e-8       # PSD slack allowed on returned blocks
    max_iters: int = 200
    stall_iters: int = 20       # diverging-merit window before Infeasible
    step_frac: float = 0.98


def _check_hermitian(mat: np.ndarray, dim: int, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (dim, dim):
        raise ValueError(f"{what}: expected shape {(dim, dim)}, got {mat.shape}")
    if not np.all(np.isfinite(mat.view(float))):
        raise ValueError(f"{what}: non-finite entries")
    if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
        raise ValueError(f"{what}: matrix is not Hermitian within {HERMITIAN_TOL}")
    return 0.5 * (mat + mat.conj().T)


@dataclass
class _LinearTerm:
    """One objective/constraint row: per-block matrices plus scalar part."""

    blocks: dict[int, np.ndarray]
    scalars: np.ndarray | None
    rhs: float = 0.0


class HermitianSdp:
    """Problem container; build with  add_eq / add_ineq / set_objective."""

    def __init__(self, block_dims: list[int], num_scalars: int = 0,
                 scalar_lower=0.0, scalar_upper=1.0):
        self.block_dims = [int(n) for n in block_dims]
        if any(n < 1 for n in self.block_dims):
            raise ValueError("block dimensions must be positive")
        self.num_scalars = int(num_scalars)
        self.scalar_lower = np.broadcast_to(
            np.asarray(scalar_lower, float), (self.num_scalars,)).copy()
        self.scalar_upper = np.broadcast_to(
            np.asarray(scalar_upper, float), (self.num_scalars,)).copy()
        if np.any(self.scalar_upper < self.scalar_lower):
            raise ValueError("scalar bounds need lower <= upper")
        if not np.all(np.isfinite(self.scalar_lower)) \
                or not np.all(np.isfinite(self.scalar_upper)):
            raise ValueError("scalar bounds must be finite")
        self.objective = _LinearTerm({}, None)
        self.eq: list[_LinearTerm] = []
        self.ineq: list[_LinearTerm] = []

    def _term(self, blocks, scalars, rhs) -> _LinearTerm:
        checked = {}
        for idx, mat in (blocks or {}).items():
            dim = self.block_dims[idx]
            checked[idx] = _check_hermitian(mat, dim, f"coefficient on block {idx}")
        vec = None
        if scalars is not None:
            vec = np.asarray(scalars, dtype=float)
            if vec.shape != (self.num_scalars,):
                raise ValueError("scalar coefficient vector has wrong length")
        if not np.isfinite(rhs):
            raise ValueError("rhs must be finite")
        return _LinearTerm(checked, vec, float(rhs))

    def set_objective(self, blocks=None, scalars=None) -> None:
        """Maximize sum_b tr(blocks[b] X_b) + scalars . s."""
        self.objective = self._term(blocks, scalars, 0.0)

    def add_eq(self, rhs: float, blocks=None, scalars=None) -> None:
        self.eq.append(self._term(blocks, scalars, rhs))

    def add_ineq(self, rhs: float, blocks=None, scalars=None) -> None:
        """Add  sum_b tr(blocks[b] X_b) + scalars . s >= rhs."""
        self.ineq.append(self._term(blocks, scalars, rhs))

    # -- evaluation helpers (used for honest residual reporting) ----------

    def term_value(self, term: _LinearTerm, block_values, scalar_values) -> float:
        val = 0.0
        for idx, mat in term.blocks.items():
            val += float(np.tensordot(mat.conj(), block_values[idx], axes=2).real)
        if term.scalars is not None and self.num_scalars:
            val += float(term.scalars @ scalar_values)
        return val

    def objective_value(self, block_values, scalar_values) -> float:
        return self.term_value(self.objective, block_values, scalar_values)

    def residuals(self, block_values, scalar_values) -> tuple[float, float]:
        """(max equality residual, max inequality violation), normalized
        by 1 + |rhs| per row."""
        eq_res = 0.0
        for term in self.eq:
            v = self.term_value(term, block_values, scalar_values)
            eq_res = max(eq_res, abs(v - term.rhs) / (1.0 + abs(term.rhs)))
        ineq_res = 0.0
        for term in self.ineq:
            v = self.term_value(term, block_values, scalar_values)
            ineq_res = max(ineq_res, max(term.rhs - v, 0.0) / (1.0 + abs(term.rhs)))
        return eq_res, ineq_res

    def dump(self, stream=None) -> str:
        """Write the instance as plain text (for offline cross-checking)."""
        out = stream or io.StringIO()
        out.write("hermitian-sdp v1\n")
        out.write(f"blocks {' '.join(str(n) for n in self.block_dims)}\n")
        out.write(f"scalars {self.num_scalars}\n")
        for i in range(self.num_scalars):
            out.write(f"bound {i} {float(self.scalar_lower[i])!r} "
                      f"{float(self.scalar_upper[i])!r}\n")

        def write_term(kind: str, term: _LinearTerm) -> None:
            out.write(f"{kind} rhs {float(term.rhs)!r}\n")
            for idx in sorted(term.blocks):
                mat = term.blocks[idx]
                for r, c in zip(*np.nonzero(mat)):
                    if c < r:
                        continue
                    out.write(f"  mat {idx} {r} {c} {float(mat[r, c].real)!r} "
                              f"{float(mat[r, c].imag)!r}\n")
            if term.scalars is not None:
                for i in np.nonzero(term.scalars)[0]:
                    out.write(f"  sca {i} {float(term.scalars[i])!r}\n")

        write_term("objective", self.objective)
        for term in self.eq:
            write_term("eq", term)
        for term in self.ineq:
            write_term("ineq", term)
        return out.getvalue() if stream is None else ""


@dataclass
class SdpSolution:
    block_values: list[np.ndarray]   # Hermitian, PSD within eig_tol
    scalar_values: np.ndarray
    objective_value: float
    dual_objective: float            # upper bounds objective_value at Optimal
    duality_gap: float               # normalized complementarity gap
    residual_primal: float           # normalized max constraint residual
    residual_dual: float             # normalized dual residual (embedded scale)
    status: SdpStatus
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is SdpStatus.OPTIMAL


# -- complex -> real embedding ------------------------------------------------

def _embed_matrix(mat: np.ndarray) -> np.ndarray:
    """T(A)/2 with T(A) = [[Re A, -Im A], [Im A, Re A]].

    The half keeps inner products exact: <T(A)/2, T(X)> = tr(A X) for
    Hermitian A, X, so objective and constraint values carry over with no
    extra factors.
    """
    re, im = mat.real, mat.imag
    return 0.5 * np.block([[re, -im], [im, re]])


def _embed_diag(diag: np.ndarray) -> np.ndarray:
    return 0.5 * np.concatenate([diag, diag])


def _recover_block(real_block: np.ndarray) -> np.ndarray:
    """Inverse of the variable embedding X -> T(X), averaging both copies."""
    n = real_block.shape[0] // 2
    re = 0.5 * (real_block[:n, :n] + real_block[n:, n:])
    im = 0.5 * (real_block[n:, :n] - real_block[:n, n:])
    x = re + 1j * im
    return 0.5 * (x + x.conj().T)


@dataclass
class RealSdp:
    """Real symmetric image of a :class:`HermitianSdp` (same optimum)."""

    block_dims: list[int]
    scalar_lower: np.ndarray
    scalar_upper: np.ndarray
    objective: _LinearTerm
    eq: list[_LinearTerm]
    ineq: list[_LinearTerm]


def embed_complex(problem: HermitianSdp) -> RealSdp:
    """Map a Hermitian SDP to an equivalent real symmetric SDP.

    Each Hermitian variable block X of size n becomes the real symmetric
    2n-block T(X) = [[Re X, -Im X], [Im X, Re X]]; every coefficient
    matrix A becomes T(A)/2, which preserves all objective and constraint
    values exactly.  A Hermitian PSD X maps to a PSD T(X) whose spectrum
    is that of X with doubled multiplicities.  The Hermitian solution is
    recovered by averaging the two real copies.
    """

    def embed_term(term: _LinearTerm) -> _LinearTerm:
        return _LinearTerm({i: _embed_matrix(mat) for i, mat in term.blocks.items()},
                           None if term.scalars is None else term.scalars.copy(),
                           term.rhs)

    return RealSdp(
        block_dims=[2 * n for n in problem.block_dims],
        scalar_lower=problem.scalar_lower.copy(),
        scalar_upper=problem.scalar_upper.copy(),
        objective=embed_term(problem.objective),
        eq=[embed_term(t) for t in problem.eq],
        ineq=[embed_term(t) for t in problem.ineq],
    )


# -- standard-form conversion -------------------------------------------------

def _is_diag(mat: np.ndarray) -> bool:
    return np.count_nonzero(mat - np.diag(np.diagonal(mat))) == 0


def _to_conic(problem: HermitianSdp) -> tuple[ConicProblem, dict]:
    """Fold scalars and inequalities into a slack block; embed blocks.

    Scalars become s = lo + u with the pair rows u + w = hi - lo; each
    inequality gets one slack.  Sense flips to minimization.  Scalars with
    hi == lo are substituted out as constants.
    """
    nblocks = len(problem.block_dims)
    lo, hi = problem.scalar_lower, problem.scalar_upper
    span = hi - lo
    free = np.nonzero(span > 0)[0]          # scalars that stay variables
    p = free.size
    n_ineq = len(problem.ineq)
    lp_dim = 2 * p + n_ineq
    rows = problem.eq + problem.ineq
    m = len(rows) + p
    b = np.zeros(m)
    lp_mat = np.zeros((m, lp_dim))

    per_block = [{"di": [], "dv": [], "ei": [], "em": []} for _ in range(nblocks)]

    def add_row(i: int, term: _LinearTerm) -> None:
        rhs = term.rhs
        if term.scalars is not None:
            rhs -= float(term.scalars @ lo)             # shift to u = s - lo
            if p:
                lp_mat[i, :p] = term.scalars[free]
        b[i] = rhs
        for idx, mat in term.blocks.items():
            tgt = per_block[idx]
            if _is_diag(mat):
                tgt["di"].append(i)
                tgt["dv"].append(_embed_diag(np.diagonal(mat).real))
            else:
                tgt["ei"].append(i)
                tgt["em"].append(_embed_matrix(mat))

    for i, term in enumerate(rows):
        add_row(i, term)
    for j, term in enumerate(problem.ineq):
        lp_mat[len(problem.eq) + j, 2 * p + j] = -1.0   # tr(...) - t = rhs
    for k, si in enumerate(free):                       # u + w = hi - lo
        i = len(rows) + k
        lp_mat[i, k] = 1.0
        lp_mat[i, p + k] = 1.0
        b[i] = span[si]

    block_rows = []
    for n, tgt in zip(problem.block_dims, per_block):
        block_rows.append(BlockRows(
            diag_idx=np.asarray(tgt["di"], dtype=int),
            diag_vecs=(np.asarray(tgt["dv"], dtype=float)
                       if tgt["dv"] else np.zeros((0, 2 * n))),
            dense_idx=np.asarray(tgt["ei"], dtype=int),
            dense_mats=(np.asarray(tgt["em"], dtype=float)
                        if tgt["em"] else np.zeros((0, 2 * n, 2 * n))),
        ))

    c_blocks = []
    for idx, n in enumerate(problem.block_dims):
        mat = problem.objective.blocks.get(idx)
        c_blocks.append(-_embed_matrix(mat) if mat is not None
                        else np.zeros((2 * n, 2 * n)))
    c_lp = np.zeros(lp_dim)
    if problem.objective.scalars is not None and p:
        c_lp[:p] = -problem.objective.scalars[free]

    conic = ConicProblem(
        dims=[2 * n for n in problem.block_dims], lp_dim=lp_dim,
        block_rows=block_rows, lp_mat=lp_mat, b=b,
        c_blocks=c_blocks, c_lp=c_lp)
    meta = {"free": free, "p": p}
    return conic, meta


def solve(problem: HermitianSdp, settings: SdpSettings | None = None) -> SdpSolution:
    """Solve the Hermitian SDP; see :class:`SdpSettings` for tolerances.

    On Optimal the returned blocks are Hermitian, PSD within ``eig_tol``,
    and satisfy every constraint within ``feas_tol`` (normalized); the
    normalized duality gap is at most ``gap_tol``.  Deterministic for a
    fixed problem and settings.
    """
    settings = settings or SdpSettings()
    conic, meta = _to_conic(problem)
    res = solve_conic(conic, gap_tol=settings.gap_tol,
                      feas_tol=settings.feas_tol,
                      max_iters=settings.max_iters,
                      stall_iters=settings.stall_iters,
                      step_frac=settings.step_frac)

    blocks = [_recover_block(Xb) for Xb in res.x_blocks]
    scalars = problem.scalar_lower.copy()
    if meta["p"]:
        scalars[meta["free"]] += res.x_lp[:meta["p"]]
    obj = problem.objective_value(blocks, scalars)
    eq_res, ineq_res = problem.residuals(blocks, scalars)
    # conic core minimizes the negated objective with lower-bound shifts
    # folded into the rhs, so its dual flips sign and shifts back
    shift = 0.0
    if problem.objective.scalars is not None and problem.num_scalars:
        shift = float(problem.objective.scalars @ problem.scalar_lower)
    return SdpSolution(
        block_values=blocks,
        scalar_values=scalars,
        objective_value=obj,
        dual_objective=-res.dual_objective + shift,
        duality_gap=max(res.rel_gap, 0.0),
        residual_primal=max(eq_res, ineq_res),
        residual_dual=res.rel_dual,
        status=res.status,
        iterations=res.iterations,
    )
