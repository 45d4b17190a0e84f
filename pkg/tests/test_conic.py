"""Conic-solver checks against analytic optima and algebraic identities.

Micro problems have closed-form solutions (identity optima, determinant
conditions, eigenvalue maxima), so the solver is tested end to end
without trusting its own residual bookkeeping; certification is then
stress-tested by perturbing solutions.
"""

import math

import numpy as np
import pytest

from nfisac.conic import (
    ConicProgram,
    ProgramBuilder,
    certify,
    certify_vectors,
    dump_program,
    hmat,
    hvec,
    lift_hermitian,
    smat,
    solve,
    svec,
)

TOL = 1e-7


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


class TestScalarizations:
    def test_svec_round_trip_and_isometry(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(5, 5))
        sym = 0.5 * (a + a.T)
        vec = svec(sym)
        assert vec.size == 15
        np.testing.assert_allclose(smat(vec, 5), sym, atol=1e-15)
        b = rng.normal(size=(5, 5))
        sym_b = 0.5 * (b + b.T)
        assert svec(sym) @ svec(sym_b) == pytest.approx(np.sum(sym * sym_b), rel=1e-12)

    def test_hvec_round_trip_and_isometry(self):
        rng = np.random.default_rng(1)
        h1 = random_hermitian(rng, 4)
        h2 = random_hermitian(rng, 4)
        vec = hvec(h1)
        assert vec.size == 16
        np.testing.assert_allclose(hmat(vec, 4), h1, atol=1e-15)
        inner = float(np.real(np.trace(h1 @ h2)))
        assert hvec(h1) @ hvec(h2) == pytest.approx(inner, rel=1e-12)

    def test_lift_doubles_spectrum_and_scales_inner_products(self):
        rng = np.random.default_rng(2)
        h1 = random_hermitian(rng, 3)
        h2 = random_hermitian(rng, 3)
        lifted = lift_hermitian(h1)
        np.testing.assert_allclose(lifted, lifted.T, atol=1e-15)
        eigs_h = np.linalg.eigvalsh(h1)
        eigs_l = np.linalg.eigvalsh(lifted)
        np.testing.assert_allclose(eigs_l, np.sort(np.repeat(eigs_h, 2)), atol=1e-12)
        lhs = np.sum(lift_hermitian(h1) * lift_hermitian(h2))
        rhs = 2.0 * float(np.real(np.trace(h1 @ h2)))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def build_min_trace_above_identity():
    # minimize tr(X) s.t. X - Z = I (entrywise), X, Z psd -> X = I, value 2.
    builder = ProgramBuilder()
    x = builder.add_block("psd", 2, "x")
    z = builder.add_block("psd", 2, "z")
    eye = np.eye(2)
    for i in range(2):
        for j in range(i, 2):
            terms = builder.entry(x, i, j) + [
                (idx, -coeff) for idx, coeff in builder.entry(z, i, j)
            ]
            builder.add_equality(*zip(*terms), rhs=eye[i, j])
    idx, coeffs = builder.trace_entries(x, np.eye(2))
    builder.add_objective(idx, coeffs)
    return builder.build(), x


class TestMicroPrograms:
    def test_min_trace_above_identity(self):
        program, x_block = build_min_trace_above_identity()
        sol = solve(program, tol=TOL)
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)
        np.testing.assert_allclose(
            program.value(x_block, sol.primal), np.eye(2), atol=1e-5
        )

    def test_max_offdiagonal_of_unit_diagonal(self):
        # maximize t s.t. [[1, t], [t, 1]] psd -> t = 1.
        builder = ProgramBuilder()
        p = builder.add_block("psd", 2, "p")
        for i in range(2):
            builder.add_equality(*zip(*builder.entry(p, i, i)), rhs=1.0)
        (idx, coeff), = builder.entry(p, 0, 1)
        builder.add_objective([idx], [-coeff])  # maximize the entry
        sol = solve(builder.build(), tol=TOL)
        assert sol.status == "optimal"
        matrix = builder.build().value(p, sol.primal)
        assert matrix[0, 1] == pytest.approx(1.0, abs=1e-6)

    def test_scalar_lp(self):
        # min x s.t. x >= 3 -> 3, via a free variable and a slack.
        builder = ProgramBuilder()
        x = builder.add_block("free", 1, "x")
        s = builder.add_block("nonnegative", 1, "slack")
        builder.add_equality([x.offset, s.offset], [1.0, -1.0], rhs=3.0)
        builder.add_objective([x.offset], [1.0])
        sol = solve(builder.build(), tol=TOL)
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(3.0, abs=1e-7)
        assert sol.primal[x.offset] == pytest.approx(3.0, abs=1e-7)

    def test_hermitian_identity_bound(self):
        # minimize tr(H) s.t. H - Z = I on complex matrices -> H = I, value 2.
        builder = ProgramBuilder()
        h = builder.add_block("psd_hermitian", 2, "h")
        z = builder.add_block("psd_hermitian", 2, "z")
        eye = np.eye(2)
        for i in range(2):
            for j in range(i, 2):
                terms = builder.entry(h, i, j) + [
                    (idx, -c) for idx, c in builder.entry(z, i, j)
                ]
                builder.add_equality(*zip(*terms), rhs=eye[i, j])
                if i < j:
                    terms = builder.entry_imag(h, i, j) + [
                        (idx, -c) for idx, c in builder.entry_imag(z, i, j)
                    ]
                    builder.add_equality(*zip(*terms), rhs=0.0)
        idx, coeffs = builder.trace_entries(h, np.eye(2))
        builder.add_objective(idx, coeffs)
        program = builder.build()
        sol = solve(program, tol=TOL)
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)
        np.testing.assert_allclose(program.value(h, sol.primal), np.eye(2), atol=1e-5)

    def test_hermitian_eigenvalue_maximization(self):
        # maximize Re tr(C H) s.t. tr(H) = 1, H psd -> largest eigenvalue of C,
        # attained at the top eigenvector's outer product (complex-valued).
        rng = np.random.default_rng(3)
        c_matrix = random_hermitian(rng, 4)
        builder = ProgramBuilder()
        h = builder.add_block("psd_hermitian", 4, "h")
        idx, coeffs = builder.trace_entries(h, np.eye(4))
        builder.add_equality(idx, coeffs, rhs=1.0)
        idx, coeffs = builder.trace_entries(h, c_matrix)
        builder.add_objective(idx, -coeffs)
        program = builder.build()
        sol = solve(program, tol=TOL)
        assert sol.status == "optimal"
        eigs, vecs = np.linalg.eigh(c_matrix)
        assert -sol.objective_value == pytest.approx(eigs[-1], abs=1e-6)
        top = vecs[:, -1]
        h_opt = program.value(h, sol.primal)
        np.testing.assert_allclose(h_opt, np.outer(top, top.conj()), atol=1e-5)
        assert np.abs(h_opt.imag).max() > 1e-3  # genuinely complex optimum


class TestSolverContracts:
    def test_weak_duality_on_micro_programs(self):
        program, _ = build_min_trace_above_identity()
        sol = solve(program, tol=TOL)
        dual_obj = sol.residuals.dual_objective_value
        assert dual_obj <= sol.objective_value + TOL

    def test_objective_scale_invariance_of_argmin(self):
        program, x_block = build_min_trace_above_identity()
        base = solve(program, tol=TOL)
        scaled_program = ConicProgram(
            objective=5.0 * program.objective,
            eq_matrix=program.eq_matrix,
            eq_rhs=program.eq_rhs,
            blocks=program.blocks,
        )
        scaled = solve(scaled_program, tol=TOL)
        np.testing.assert_allclose(
            program.value(x_block, base.primal),
            scaled_program.value(x_block, scaled.primal),
            atol=1e-5,
        )

    def test_psd_blocks_of_optimum_are_psd(self):
        program, _ = build_min_trace_above_identity()
        sol = solve(program, tol=TOL)
        assert sol.residuals.min_cone_eigenvalue >= -TOL

    def test_infeasible_lp_detected(self):
        # x >= 3 and x <= 2 simultaneously.
        builder = ProgramBuilder()
        x = builder.add_block("free", 1, "x")
        s1 = builder.add_block("nonnegative", 1, "s1")
        s2 = builder.add_block("nonnegative", 1, "s2")
        builder.add_equality([x.offset, s1.offset], [1.0, -1.0], rhs=3.0)
        builder.add_equality([x.offset, s2.offset], [1.0, 1.0], rhs=2.0)
        builder.add_objective([x.offset], [1.0])
        sol = solve(builder.build(), tol=TOL)
        assert sol.status == "infeasible"
        assert "certificate" in sol.message

    def test_unbounded_detected(self):
        builder = ProgramBuilder()
        x = builder.add_block("nonnegative", 1, "x")
        builder.add_objective([x.offset], [-1.0])
        sol = solve(builder.build(), tol=TOL)
        assert sol.status == "unbounded"

    def test_determinism(self):
        program, _ = build_min_trace_above_identity()
        a = solve(program, tol=TOL)
        b = solve(program, tol=TOL)
        np.testing.assert_array_equal(a.primal, b.primal)
        assert a.objective_value == b.objective_value

    def test_unconstrained_program_rejected(self):
        builder = ProgramBuilder()
        builder.add_block("free", 2, "x")
        builder.add_objective([0], [1.0])
        with pytest.raises(ValueError, match="no constraints"):
            solve(builder.build())


class TestCertification:
    def test_optimal_solution_certifies_within_tol(self):
        program, _ = build_min_trace_above_identity()
        sol = solve(program, tol=TOL)
        report = certify(program, sol)
        assert report.within(TOL)
        assert report.objective_value == pytest.approx(
            float(program.objective @ sol.primal), abs=1e-12
        )

    def test_perturbed_primal_fails_certification(self):
        program, _ = build_min_trace_above_identity()
        sol = solve(program, tol=TOL)
        bumped = sol.primal.copy()
        bumped[0] += 1e-3
        report = certify_vectors(program, bumped, sol.dual)
        assert report.primal > TOL

    def test_status_optimal_implies_residuals_within_tol(self):
        program, _ = build_min_trace_above_identity()
        sol = solve(program, tol=TOL)
        assert sol.status == "optimal"
        assert sol.residuals.within(TOL)


class TestProgramValidation:
    def test_block_offsets_must_be_contiguous(self):
        import scipy.sparse

        from nfisac.conic import ConeBlock

        with pytest.raises(ValueError, match="offset"):
            ConicProgram(
                objective=np.zeros(3),
                eq_matrix=scipy.sparse.csc_matrix((1, 3)),
                eq_rhs=np.zeros(1),
                blocks=(ConeBlock("free", 2, 1),),
            )

    def test_dimension_mismatch_rejected(self):
        import scipy.sparse

        from nfisac.conic import ConeBlock

        with pytest.raises(ValueError, match="objective"):
            ConicProgram(
                objective=np.zeros(4),
                eq_matrix=scipy.sparse.csc_matrix((1, 3)),
                eq_rhs=np.zeros(1),
                blocks=(ConeBlock("free", 3, 0),),
            )


class TestDump:
    def test_dump_layout_round_trips_key_numbers(self, tmp_path):
        program, _ = build_min_trace_above_identity()
        path = tmp_path / "program.txt"
        dump_program(program, str(path))
        text = path.read_text().splitlines()
        assert text[0] == "conic-program v1"
        assert f"variables={program.n_variables}" in text[1]
        assert f"equalities={program.n_equalities}" in text[1]
        kinds = [line.split()[1] for line in text if line.startswith("block ")]
        assert kinds == ["psd", "psd"]
        nnz_line = next(line for line in text if line.startswith("equality-matrix"))
        assert int(nnz_line.split("nnz=")[1]) == program.eq_matrix.nnz
