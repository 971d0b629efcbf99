import numpy as np
import pytest

from star_secrecy.sdp import (HermitianSdp, SdpSettings, SdpStatus,
                              embed_complex, solve, _embed_matrix)
from planted import planted_instance, rand_hermitian


def diag_problem(n, objective):
    prob = HermitianSdp([n])
    prob.set_objective(blocks={0: objective})
    for i in range(n):
        basis = np.zeros((n, n), dtype=complex)
        basis[i, i] = 1.0
        prob.add_eq(1.0, blocks={0: basis})
    return prob


class TestEmbedding:
    def test_scalar_block_structure(self):
        prob = HermitianSdp([1])
        prob.set_objective(blocks={0: np.array([[2.0]], dtype=complex)})
        prob.add_eq(3.0, blocks={0: np.array([[1.0]], dtype=complex)})
        real = embed_complex(prob)
        assert real.block_dims == [2]
        # coefficient T(A)/2 keeps <T(A)/2, T(X)> = tr(A X)
        assert np.allclose(real.eq[0].blocks[0], 0.5 * np.eye(2))
        assert np.allclose(real.objective.blocks[0], np.eye(2))

    def test_identity_trace_preserved(self):
        n = 4
        embedded = _embed_matrix(np.eye(n, dtype=complex))
        target = np.eye(2 * n)
        # <T(I)/2, T(I)> = tr(I I) = n
        assert np.tensordot(embedded, target, axes=2) == pytest.approx(n)

    def test_psd_with_doubled_multiplicities(self):
        rng = np.random.default_rng(0)
        herm = rand_hermitian(rng, 3)
        herm = herm @ herm.conj().T          # PSD
        embedded = 2.0 * _embed_matrix(herm)  # T(X) itself
        evs = np.linalg.eigvalsh(embedded)
        expect = np.sort(np.repeat(np.linalg.eigvalsh(herm), 2))
        assert np.allclose(evs, expect, atol=1e-10)
        assert evs[0] >= -1e-10

    def test_non_hermitian_rejected(self):
        prob = HermitianSdp([2])
        bad = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            prob.add_eq(0.0, blocks={0: bad})


class TestAnalyticFixtures:
    def test_offdiagonal_ones(self):
        # unit diagonal bounds the off-diagonal by PSD, so the optimum is
        # the all-ones matrix with objective 2
        c = np.array([[0, 1], [1, 0]], dtype=complex)
        sol = solve(diag_problem(2, c))
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)
        assert np.allclose(sol.block_values[0],
                           np.ones((2, 2)), atol=1e-5)

    def test_trace_objective_fixed_by_diagonal(self):
        for n in (2, 5, 9):
            sol = solve(diag_problem(n, np.eye(n, dtype=complex)))
            assert sol.objective_value == pytest.approx(n, abs=1e-6)

    def test_complex_offdiagonal(self):
        c = np.array([[0, 1j], [-1j, 0]])
        sol = solve(diag_problem(2, c))
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)
        assert sol.block_values[0][0, 1] == pytest.approx(1j, abs=1e-5)

    def test_scalar_box_and_inequality(self):
        prob = HermitianSdp([1], num_scalars=2, scalar_lower=[0.3, 0.0],
                            scalar_upper=[1.0, 2.0])
        prob.set_objective(blocks={0: -np.eye(1, dtype=complex)},
                           scalars=np.array([-1.0, 1.0]))
        prob.add_eq(1.0, blocks={0: np.eye(1, dtype=complex)})
        prob.add_ineq(0.5, scalars=np.array([0.0, 1.0]))
        sol = solve(prob)
        assert sol.objective_value == pytest.approx(0.7, abs=1e-6)
        assert sol.scalar_values == pytest.approx([0.3, 2.0], abs=1e-6)


class TestPlantedInstances:
    @pytest.mark.parametrize("seed", range(8))
    def test_known_optimum_recovered(self, seed):
        rng = np.random.default_rng(seed)
        dims = [int(rng.integers(2, 14))]
        if seed % 2:
            dims.append(int(rng.integers(2, 8)))
        prob, opt, _, _ = planted_instance(
            rng, dims, num_scalars=int(rng.integers(0, 5)),
            n_eq=int(rng.integers(3, 8)), n_ineq=int(rng.integers(0, 4)))
        sol = solve(prob)
        assert sol.status is SdpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(opt, abs=1e-6 * (1 + abs(opt)))
        assert sol.duality_gap <= 1e-7
        assert sol.residual_primal <= 1e-7

    def test_solution_certificates(self):
        rng = np.random.default_rng(123)
        prob, opt, _, _ = planted_instance(rng, [6, 4], num_scalars=3)
        sol = solve(prob)
        # blocks Hermitian and PSD within the advertised slacks
        for blk in sol.block_values:
            assert np.max(np.abs(blk - blk.conj().T)) <= 1e-10
            assert np.linalg.eigvalsh(blk)[0] >= -1e-8
        # weak duality at the reported solution
        assert sol.objective_value <= sol.dual_objective + 1e-6 * (1 + abs(opt))
        # scalar bounds honored to solver feasibility precision
        assert np.all(sol.scalar_values >= -1e-7)
        assert np.all(sol.scalar_values <= 1.0 + 1e-7)


class TestSolverBehavior:
    def test_determinism(self):
        rng = np.random.default_rng(5)
        prob, _, _, _ = planted_instance(rng, [5], num_scalars=2)
        a = solve(prob)
        b = solve(prob)
        assert a.objective_value == b.objective_value
        assert a.iterations == b.iterations
        assert np.array_equal(a.block_values[0], b.block_values[0])

    def test_infeasible_detected(self):
        # diag(X) = 1 forces tr(X) = 3, which contradicts tr(X) >= 10
        prob = diag_problem(3, np.eye(3, dtype=complex))
        prob.add_ineq(10.0, blocks={0: np.eye(3, dtype=complex)})
        sol = solve(prob)
        assert sol.status is SdpStatus.INFEASIBLE

    def test_iteration_cap_respected(self):
        prob = diag_problem(3, np.eye(3, dtype=complex))
        sol = solve(prob, SdpSettings(max_iters=2))
        assert sol.status is not SdpStatus.OPTIMAL
        assert sol.iterations <= 2

    def test_dump_roundtrippable_text(self):
        prob = HermitianSdp([2], num_scalars=1)
        prob.set_objective(blocks={0: np.array([[0, 1j], [-1j, 0]])},
                           scalars=np.array([0.5]))
        prob.add_eq(1.0, blocks={0: np.eye(2, dtype=complex)})
        prob.add_ineq(0.25, scalars=np.array([1.0]))
        text = prob.dump()
        assert text.startswith("hermitian-sdp v1")
        assert "blocks 2" in text and "scalars 1" in text
        assert "eq rhs 1.0" in text and "ineq rhs 0.25" in text
        # the complex objective entry appears with its imaginary part
        assert "mat 0 0 1 0.0 1.0" in text
