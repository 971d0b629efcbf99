"""Random Hermitian SDP instances with a KKT-certified optimum.

Construction: draw a strictly complementary primal-dual pair (X*, Z*) with
complementary eigenspaces, random multipliers for equalities, active
inequalities and active scalar bounds, then back out the objective from
stationarity.  The planted point is then a global optimum of the convex
problem, with known objective value.
"""

import numpy as np

from star_secrecy.sdp import HermitianSdp


def rand_hermitian(rng, n):
    mat = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (mat + mat.conj().T)


def planted_instance(rng, dims, num_scalars=0, n_eq=5, n_ineq=2):
    """Returns (problem, optimal_value, planted_blocks, planted_scalars)."""
    prob = HermitianSdp(dims, num_scalars=num_scalars,
                        scalar_lower=0.0, scalar_upper=1.0)
    xs, zs = [], []
    for n in dims:
        basis = np.linalg.qr(rng.standard_normal((n, n))
                             + 1j * rng.standard_normal((n, n)))[0]
        rank = max(1, n // 2)
        lam_x = np.zeros(n)
        lam_x[:rank] = rng.uniform(0.5, 1.5, rank)
        lam_z = np.zeros(n)
        lam_z[rank:] = rng.uniform(0.5, 1.5, n - rank)
        xs.append((basis * lam_x) @ basis.conj().T)
        zs.append((basis * lam_z) @ basis.conj().T)

    s = rng.uniform(0.2, 0.8, num_scalars)
    mu_lo = np.zeros(num_scalars)
    mu_hi = np.zeros(num_scalars)
    for i in range(num_scalars):
        mode = rng.integers(3)
        if mode == 1:
            s[i], mu_lo[i] = 0.0, rng.uniform(0.5, 1.5)
        elif mode == 2:
            s[i], mu_hi[i] = 1.0, rng.uniform(0.5, 1.5)

    def row_value(mats, vec):
        val = sum(float(np.vdot(mats[b], xs[b]).real) for b in range(len(dims)))
        if num_scalars:
            val += float(vec @ s)
        return val

    eq_rows, ineq_rows = [], []
    y = rng.standard_normal(n_eq)
    u = np.zeros(n_ineq)
    for _ in range(n_eq):
        mats = {b: rand_hermitian(rng, n) for b, n in enumerate(dims)}
        vec = rng.standard_normal(num_scalars)
        eq_rows.append((mats, vec, row_value(mats, vec)))
    for j in range(n_ineq):
        mats = {b: rand_hermitian(rng, n) for b, n in enumerate(dims)}
        vec = rng.standard_normal(num_scalars)
        val = row_value(mats, vec)
        if rng.random() < 0.5:
            u[j] = rng.uniform(0.5, 1.5)      # active, positive multiplier
            ineq_rows.append((mats, vec, val))
        else:
            ineq_rows.append((mats, vec, val - rng.uniform(0.5, 1.5)))

    c_blocks = []
    for b, n in enumerate(dims):
        mat = -zs[b] + sum(y[j] * eq_rows[j][0][b] for j in range(n_eq))
        mat -= sum(u[j] * ineq_rows[j][0][b] for j in range(n_ineq))
        c_blocks.append(mat)
    c_vec = None
    if num_scalars:
        c_vec = (sum(y[j] * eq_rows[j][1] for j in range(n_eq))
                 - sum(u[j] * ineq_rows[j][1] for j in range(n_ineq))
                 - mu_lo + mu_hi)

    prob.set_objective(blocks=dict(enumerate(c_blocks)), scalars=c_vec)
    for mats, vec, rhs in eq_rows:
        prob.add_eq(rhs, blocks=mats, scalars=vec if num_scalars else None)
    for mats, vec, rhs in ineq_rows:
        prob.add_ineq(rhs, blocks=mats, scalars=vec if num_scalars else None)

    opt = sum(float(np.vdot(c_blocks[b], xs[b]).real) for b in range(len(dims)))
    if num_scalars:
        opt += float(c_vec @ s)
    return prob, float(opt), xs, s
