#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <splitamg/ilu0.hpp>
#include <splitamg/krylov.hpp>
#include <splitamg/model_problems.hpp>
#include <splitamg/sparse.hpp>
#include <splitamg/spectral.hpp>

#include "oracles.hpp"

using namespace splitamg;

namespace {

void expect_csr_invariants(const CsrMatrix& a) {
    const auto ptr = a.row_offsets();
    ASSERT_EQ(ptr.size(), a.rows() + 1);
    EXPECT_EQ(ptr.front(), 0u);
    EXPECT_EQ(ptr.back(), a.nnz());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        EXPECT_LE(ptr[i], ptr[i + 1]);
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
            EXPECT_LT(a.col(k), a.cols());
            if (k + 1 < a.row_end(i)) {
                EXPECT_LT(a.col(k), a.col(k + 1));
            }
        }
    }
}

} // namespace

TEST(CsrMatrix, TripletsMergeDuplicatesAndSortColumns) {
    auto a = CsrMatrix::from_triplets(3, 3, {{2, 1, 1.0}, {0, 2, 4.0}, {2, 1, 2.0}, {0, 0, 1.0}, {1, 1, 5.0}});
    expect_csr_invariants(a);
    EXPECT_EQ(a.nnz(), 4u);
    EXPECT_DOUBLE_EQ(a.at(2, 1), 3.0);
    EXPECT_DOUBLE_EQ(a.at(0, 2), 4.0);
    EXPECT_DOUBLE_EQ(a.at(1, 0), 0.0);
}

TEST(CsrMatrix, RejectsMalformedInput) {
    EXPECT_THROW(CsrMatrix(2, 2, {0, 2, 1}, {0, 1}, {1, 1}), dimension_error);
    EXPECT_THROW(CsrMatrix(2, 2, {0, 2, 2}, {1, 0}, {1, 1}), dimension_error);
    EXPECT_THROW(CsrMatrix(2, 2, {0, 1, 2}, {0, 2}, {1, 1}), dimension_error);
    EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), dimension_error);
}

TEST(SplitHs, IdentityHasNoSkewPart) {
    const auto sp = split_hs(CsrMatrix::identity(3));
    EXPECT_EQ(oracle::dense(sp.h), Eigen::MatrixXd::Identity(3, 3));
    EXPECT_EQ(max_abs(sp.s), 0.0);
}

TEST(SplitHs, TwoByTwoUpperTriangular) {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 0, 2;
    const auto sp = split_hs(oracle::sparse(a));
    Eigen::MatrixXd h(2, 2), s(2, 2);
    h << 2, 0.5, 0.5, 2;
    s << 0, 0.5, -0.5, 0;
    EXPECT_EQ(oracle::dense(sp.h), h);
    EXPECT_EQ(oracle::dense(sp.s), s);
    // Both parts live on the symmetrized pattern.
    EXPECT_EQ(sp.h.nnz(), 4u);
    EXPECT_EQ(sp.s.nnz(), 4u);
}

TEST(SplitHs, NonSquareRejected) {
    EXPECT_THROW(split_hs(CsrMatrix::from_triplets(2, 3, {{0, 0, 1.0}})), dimension_error);
}

TEST(SplitHs, ReconstructsAssembledConvectionDiffusion) {
    const auto sys = assemble(ProblemSpec::convdiff(), 4);
    const auto sp = split_hs(sys.matrix);
    const auto back = linear_combination(1.0, sp.h, 1.0, sp.s);
    const Eigen::MatrixXd diff = oracle::dense(back) - oracle::dense(sys.matrix);
    EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SplitHs, PropertyOnRandomMatrices) {
    std::mt19937_64 rng(11);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 15;
        const auto a = oracle::sparse(oracle::random_matrix(rng, n, n, 0.4));
        const auto sp = split_hs(a);
        expect_csr_invariants(sp.h);
        expect_csr_invariants(sp.s);
        const Eigen::MatrixXd h = oracle::dense(sp.h), s = oracle::dense(sp.s), ad = oracle::dense(a);
        EXPECT_EQ(h, h.transpose());
        EXPECT_EQ(s, -s.transpose());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) EXPECT_LE(std::abs(h(i, j) + s(i, j) - ad(i, j)), 4 * eps * std::abs(ad(i, j)));
    }
}

TEST(Spmv, Identity) {
    EXPECT_EQ(spmv(CsrMatrix::identity(3), Vector{1, 2, 3}), (Vector{1, 2, 3}));
}

TEST(Spmv, TridiagonalStencil) {
    EXPECT_EQ(spmv(oracle::tridiag(3), Vector{1, 1, 1}), (Vector{1, 0, 1}));
}

TEST(Spmv, MatchesDenseProduct) {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd d = oracle::random_matrix(rng, 20, 20, 0.3);
    const Vector x = oracle::random_vector(rng, 20);
    const Vector y = spmv(oracle::sparse(d), x);
    EXPECT_LE(oracle::max_diff(y, oracle::vec(Eigen::VectorXd(d * oracle::vec(x)))), 1e-13);
    const Vector yt = spmv_transpose(oracle::sparse(d), x);
    EXPECT_LE(oracle::max_diff(yt, oracle::vec(Eigen::VectorXd(d.transpose() * oracle::vec(x)))), 1e-13);
}

TEST(Spmv, LengthMismatchThrows) {
    EXPECT_THROW(spmv(CsrMatrix::identity(3), Vector{1, 2}), dimension_error);
}

TEST(Pcg, IdentityConvergesInOneIteration) {
    const Vector b{3, -1, 2, 7};
    const auto res = pcg_solve(CsrMatrix::identity(4), b);
    EXPECT_EQ(res.stats.iterations, 1u);
    EXPECT_LE(oracle::max_diff(res.x, b), 1e-15);
}

TEST(Pcg, Diagonal) {
    auto m = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 2.0}, {2, 2, 4.0}});
    const auto res = pcg_solve(m, Vector{1, 2, 4});
    EXPECT_LE(oracle::max_diff(res.x, Vector{1, 1, 1}), 1e-12);
}

TEST(Pcg, TridiagonalMatchesDirectElimination) {
    const auto m = oracle::tridiag(5);
    const Vector b{1, 0, 0, 0, 0};
    const auto res = pcg_solve(m, b);
    const Eigen::VectorXd x = oracle::dense(m).partialPivLu().solve(oracle::vec(b));
    EXPECT_LE(oracle::max_diff(res.x, oracle::vec(x)), 1e-10);
}

TEST(Pcg, ZeroRhsReturnsZero) {
    const auto res = pcg_solve(oracle::tridiag(4), Vector(4, 0.0));
    EXPECT_EQ(res.stats.iterations, 0u);
    EXPECT_EQ(res.x, Vector(4, 0.0));
}

TEST(Pcg, IterationCapRaisesWithBestIterate) {
    KrylovConfig cfg;
    cfg.max_iters = 2;
    const auto m = oracle::laplacian_2d(6);
    try {
        pcg_solve(m, Vector(36, 1.0), cfg);
        FAIL() << "expected convergence_error";
    } catch (const convergence_error& e) {
        EXPECT_EQ(e.iterations(), 2u);
        EXPECT_EQ(e.best_iterate().size(), 36u);
        EXPECT_NEAR(e.residual(), norm2(residual(m, e.best_iterate(), Vector(36, 1.0))), 1e-12);
    }
}

TEST(Pcg, IndefiniteMatrixBreaksDown) {
    auto m = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
    EXPECT_THROW(pcg_solve(m, Vector{1, 1}), breakdown_error);
}

TEST(Pcg, ReportedResidualIsTrueResidualWithinTarget) {
    std::mt19937_64 rng(5);
    for (int n : {4, 9, 16}) {
        const auto m = oracle::sparse(oracle::random_spd(rng, n, 0.1));
        const Vector b = oracle::random_vector(rng, n);
        const auto res = pcg_solve(m, b);
        const double true_res = norm2(residual(m, res.x, b));
        EXPECT_NEAR(res.stats.residual_norm, true_res, 1e-14);
        EXPECT_LE(true_res, res.stats.target);
    }
}

TEST(Pcgne, IdentityReturnsRhs) {
    const Vector b{1, 2, 3};
    EXPECT_LE(oracle::max_diff(pcgne_solve(CsrMatrix::identity(3), b).x, b), 1e-14);
}

TEST(Pcgne, ShiftedRotation) {
    auto m = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, -1.0}, {1, 1, 1.0}});
    EXPECT_LE(oracle::max_diff(pcgne_solve(m, Vector{1, 0}).x, Vector{0.5, 0.5}), 1e-12);
}

TEST(Pcgne, ShiftedRandomSkewMatchesDenseSolve) {
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd m = 0.5 * Eigen::MatrixXd::Identity(8, 8) + oracle::random_skew(rng, 8);
    const Vector b = oracle::random_vector(rng, 8);
    const auto res = pcgne_solve(oracle::sparse(m), b);
    EXPECT_LE(oracle::max_diff(res.x, oracle::vec(Eigen::VectorXd(m.partialPivLu().solve(oracle::vec(b))))), 1e-9);
}

TEST(Pcgne, RandomNonsingularMatchesDenseSolve) {
    std::mt19937_64 rng(21);
    KrylovConfig cfg;
    cfg.rel_tol = 1e-14;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 15;
        Eigen::MatrixXd m = oracle::random_matrix(rng, n, n);
        m += 2.0 * Eigen::MatrixXd::Identity(n, n);
        const Vector b = oracle::random_vector(rng, n);
        const auto res = pcgne_solve(oracle::sparse(m), b, cfg);
        const Eigen::VectorXd x = m.partialPivLu().solve(oracle::vec(b));
        EXPECT_LE(oracle::max_diff(res.x, oracle::vec(x)), 1e-8) << "trial " << trial;
        EXPECT_LE(norm2(residual(oracle::sparse(m), res.x, b)), res.stats.target);
    }
}

TEST(Pcgne, IluRightPreconditioningSolvesSameSystem) {
    const auto sys = assemble(ProblemSpec::convdiff(), 8);
    KrylovConfig plain, pre;
    pre.ilu = std::make_shared<const Ilu0>(sys.matrix);
    const auto a = pcgne_solve(sys.matrix, sys.rhs, plain);
    const auto b = pcgne_solve(sys.matrix, sys.rhs, pre);
    EXPECT_EQ(pre.preconditioner(), PreconditionerKind::ilu0);
    EXPECT_LE(oracle::max_diff(a.x, b.x), 1e-8);
    EXPECT_LT(b.stats.iterations, a.stats.iterations);
}

TEST(Ilu0, DiagonalIsExactScaling) {
    auto a = CsrMatrix::from_triplets(3, 3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, 8.0}});
    const Ilu0 f(a);
    EXPECT_EQ(oracle::dense(f.lower()), Eigen::MatrixXd::Identity(3, 3));
    EXPECT_EQ(oracle::dense(f.upper()), oracle::dense(a));
    EXPECT_EQ(f.apply(Vector{2, 4, 8}), (Vector{1, 1, 1}));
}

TEST(Ilu0, LowerTriangularNeedsNoFill) {
    Eigen::MatrixXd a(3, 3);
    a << 2, 0, 0, 1, 4, 0, -3, 2, 5;
    const Ilu0 f(oracle::sparse(a));
    const Eigen::MatrixXd d = a.diagonal().asDiagonal();
    EXPECT_LE((oracle::dense(f.upper()) - d).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((oracle::dense(f.lower()) - a * d.inverse()).cwiseAbs().maxCoeff(), 1e-15);
    const Vector z{1, -2, 3};
    EXPECT_LE(oracle::max_diff(f.apply(spmv(oracle::sparse(a), z)), z), 1e-14);
}

TEST(Ilu0, LaplacianPreconditionedErrorOperatorContracts) {
    const auto a = oracle::laplacian_2d(4);
    const Ilu0 f(a);
    // Dense oracle for I - (LU)⁻¹ A.
    const Eigen::MatrixXd lu = oracle::dense(f.lower()) * oracle::dense(f.upper());
    const Eigen::MatrixXd ad = oracle::dense(a);
    EXPECT_GT((lu - ad).cwiseAbs().maxCoeff(), 1e-3); // incomplete, not exact
    const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(16, 16) - lu.partialPivLu().solve(ad);
    const double rho = e.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_LT(rho, 1.0);
    // apply() agrees with the dense factor solve.
    std::mt19937_64 rng(1);
    const Vector r = oracle::random_vector(rng, 16);
    EXPECT_LE(oracle::max_diff(f.apply(r), oracle::vec(Eigen::VectorXd(lu.partialPivLu().solve(oracle::vec(r))))),
              1e-12);
    EXPECT_LE(oracle::max_diff(f.apply_transpose(r),
                               oracle::vec(Eigen::VectorXd(lu.transpose().partialPivLu().solve(oracle::vec(r))))),
              1e-12);
}

TEST(Ilu0, ZeroPivotReportsRow) {
    auto a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    try {
        Ilu0 f(a);
        FAIL() << "expected pivot_error";
    } catch (const pivot_error& e) {
        EXPECT_EQ(e.row(), 1u);
    }
    EXPECT_THROW(Ilu0(CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 1, 1.0}})), pivot_error);
}

TEST(ExtremeEigs, Diagonal) {
    const auto est = extreme_eigs(CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 4.0}}), 1e-10);
    EXPECT_NEAR(est.lambda_min, 1.0, 1e-8);
    EXPECT_NEAR(est.lambda_max, 4.0, 1e-8);
}

TEST(ExtremeEigs, Identity) {
    const auto est = extreme_eigs(CsrMatrix::identity(5), 1e-10);
    EXPECT_NEAR(est.lambda_min, 1.0, 1e-12);
    EXPECT_NEAR(est.lambda_max, 1.0, 1e-12);
}

TEST(ExtremeEigs, TridiagonalAnalyticFormula) {
    const std::size_t n = 10;
    const auto est = extreme_eigs(oracle::tridiag(n), 1e-10);
    const double h = std::numbers::pi / (n + 1);
    EXPECT_NEAR(est.lambda_min, 2 - 2 * std::cos(h), 1e-6);
    EXPECT_NEAR(est.lambda_max, 2 - 2 * std::cos(n * h), 1e-6);
}

TEST(ExtremeEigs, RayleighQuotientsOfProbesLieInsideRange) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + trial;
        const auto h = oracle::sparse(oracle::random_spd(rng, n, 0.2));
        const auto est = extreme_eigs(h, 1e-10);
        EXPECT_GT(est.lambda_min, 0.0);
        for (int p = 0; p < 20; ++p) {
            const Vector v = oracle::random_vector(rng, n);
            const double rq = dot(v, spmv(h, v)) / dot(v, v);
            EXPECT_GE(rq, est.lambda_min - 1e-7);
            EXPECT_LE(rq, est.lambda_max + 1e-7);
        }
    }
}

TEST(ExtremeEigs, CapRaisesWithBestEstimates) {
    SpectralConfig cfg{1e-14, 3};
    try {
        extreme_eigs(oracle::laplacian_2d(10), cfg);
        FAIL() << "expected convergence_error";
    } catch (const convergence_error& e) {
        ASSERT_EQ(e.best_iterate().size(), 2u);
        EXPECT_LE(e.best_iterate()[0], e.best_iterate()[1]);
    }
}

TEST(MatrixMarket, RoundTrip) {
    std::mt19937_64 rng(2);
    const auto a = oracle::sparse(oracle::random_matrix(rng, 7, 7, 0.4));
    std::stringstream ss;
    write_matrix_market(ss, a);
    EXPECT_EQ(ss.str().rfind("%%MatrixMarket matrix coordinate real general\n", 0), 0u);
    const auto b = read_matrix_market(ss);
    EXPECT_EQ(oracle::dense(a), oracle::dense(b));
}

TEST(MatrixMarket, SymmetricFilesAreExpanded) {
    std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n");
    const auto a = read_matrix_market(in);
    EXPECT_DOUBLE_EQ(a.at(0, 1), -1.0);
    EXPECT_DOUBLE_EQ(a.at(1, 0), -1.0);
}
