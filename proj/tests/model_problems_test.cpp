#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <splitamg/model_problems.hpp>

#include "oracles.hpp"

using namespace splitamg;

namespace {

Vector dense_solve(const AssembledSystem& sys) {
    return oracle::vec(Eigen::VectorXd(oracle::dense(sys.matrix).partialPivLu().solve(oracle::vec(sys.rhs))));
}

ProblemSpec on_unit_square(ProblemSpec p) {
    p.domain = {0, 1, 0, 1};
    return p;
}

} // namespace

TEST(Assemble, PoissonSingleNode) {
    const auto sys = assemble(ProblemSpec::poisson(), 2);
    ASSERT_EQ(sys.matrix.rows(), 1u);
    EXPECT_GT(sys.matrix.at(0, 0), 0.0);
    const double u = sys.rhs[0] / sys.matrix.at(0, 0);
    const double exact = sys.exact(0.0, 0.5);
    EXPECT_NEAR(sys.node_coords[0][0], 0.0, 1e-15);
    EXPECT_NEAR(sys.node_coords[0][1], 0.5, 1e-15);
    // Two cells per direction: the one-dof value is already within a modest fraction of u.
    EXPECT_LT(std::abs(u - exact), 0.5 * std::abs(exact));
}

TEST(Assemble, RejectsTooCoarseMesh) {
    EXPECT_THROW(assemble(ProblemSpec::poisson(), 1), config_error);
}

TEST(Assemble, DimensionIsInteriorNodeCount) {
    for (std::size_t n : {3u, 5u, 8u}) EXPECT_EQ(assemble(ProblemSpec::reaction(), n).matrix.rows(), (n - 1) * (n - 1));
}

TEST(Assemble, ZeroReactionEqualsPoissonOnSameDomain) {
    const auto a = assemble(ProblemSpec::reaction(0.0), 8);
    const auto b = assemble(on_unit_square(ProblemSpec::poisson()), 8);
    const Eigen::MatrixXd d = oracle::dense(a.matrix) - oracle::dense(b.matrix);
    EXPECT_LE(d.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assemble, ConvectionProducesSkewPartOnlyWithVelocity) {
    auto spec = ProblemSpec::convdiff(0.01, 0.0);
    const auto with_b = split_hs(assemble(spec, 8).matrix);
    EXPECT_GT(max_abs(with_b.s), 1e-3);
    spec.speed = 0.0;
    const auto without_b = split_hs(assemble(spec, 8).matrix);
    EXPECT_LE(max_abs(without_b.s), 1e-15);
    // The symmetric part does not depend on the velocity.
    const Eigen::MatrixXd dh = oracle::dense(with_b.h) - oracle::dense(without_b.h);
    EXPECT_LE(dh.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assemble, SymmetricKindsHaveNegligibleSkewPart) {
    for (const auto& spec : {ProblemSpec::poisson(), ProblemSpec::reaction()}) {
        const auto sys = assemble(spec, 12);
        EXPECT_LE(symmetry_defect(sys.matrix), 1e-14);
        EXPECT_LT(max_abs(split_hs(sys.matrix).s), 1e-14);
    }
}

TEST(Assemble, PositiveDiagonalAndConnectedRows) {
    for (auto kind : {ProblemKind::poisson, ProblemKind::reaction, ProblemKind::convdiff}) {
        const auto sys = assemble(ProblemSpec::of_kind(kind), 9);
        for (std::size_t i = 0; i < sys.matrix.rows(); ++i) {
            EXPECT_GT(sys.matrix.diagonal(i), 0.0);
            std::size_t neighbours = 0;
            for (std::size_t k = sys.matrix.row_begin(i); k < sys.matrix.row_end(i); ++k)
                if (sys.matrix.col(k) != i && sys.matrix.value(k) != 0.0) ++neighbours;
            EXPECT_GE(neighbours, 2u);
        }
    }
}

TEST(Assemble, StiffnessRowsAwayFromBoundarySumToZero) {
    const std::size_t n = 10, m = n - 1;
    const auto sys = assemble(ProblemSpec::poisson(), n);
    for (std::size_t j = 1; j + 1 < m; ++j)
        for (std::size_t i = 1; i + 1 < m; ++i) {
            const std::size_t row = j * m + i;
            double sum = 0;
            for (std::size_t k = sys.matrix.row_begin(row); k < sys.matrix.row_end(row); ++k) sum += sys.matrix.value(k);
            EXPECT_NEAR(sum, 0.0, 1e-13);
        }
}

TEST(Assemble, ConvectionRowsSumToZeroInTheInterior) {
    // Diffusion and convection both annihilate constants.
    const std::size_t n = 10, m = n - 1;
    const auto sys = assemble(ProblemSpec::convdiff(0.01, 0.7), n);
    for (std::size_t j = 1; j + 1 < m; ++j)
        for (std::size_t i = 1; i + 1 < m; ++i) {
            const std::size_t row = j * m + i;
            double sum = 0;
            for (std::size_t k = sys.matrix.row_begin(row); k < sys.matrix.row_end(row); ++k) sum += sys.matrix.value(k);
            EXPECT_NEAR(sum, 0.0, 1e-13);
        }
}

TEST(Assemble, MassMatrixIsConsistent) {
    // Interior row of k * (consistent P1 mass): diagonal k*h²/2, six neighbours k*h²/12 each.
    const double k = 0.2;
    const std::size_t n = 8, m = n - 1;
    const auto stiff = assemble(ProblemSpec::reaction(0.0), n);
    const auto full = assemble(ProblemSpec::reaction(k), n);
    const double h2 = 1.0 / (n * n);
    const std::size_t row = 3 * m + 3;
    EXPECT_NEAR(full.matrix.at(row, row) - stiff.matrix.at(row, row), k * h2 / 2, 1e-15);
    EXPECT_NEAR(full.matrix.at(row, row + 1) - stiff.matrix.at(row, row + 1), k * h2 / 12, 1e-15);
    EXPECT_NEAR(full.matrix.at(row, row + m + 1) - stiff.matrix.at(row, row + m + 1), k * h2 / 12, 1e-15);
    EXPECT_EQ(full.matrix.find(row, row + m - 1), CsrMatrix::npos);
}

TEST(DiscretizationError, ExactNodalValuesGiveZero) {
    const auto sys = assemble(ProblemSpec::reaction(), 6);
    const auto err = discretization_error(sys, sys.exact_nodal());
    EXPECT_EQ(err.l2, 0.0);
    EXPECT_EQ(err.max, 0.0);
}

TEST(DiscretizationError, ZeroVectorGivesMaxOfExact) {
    const auto sys = assemble(ProblemSpec::poisson(), 6);
    const auto u = sys.exact_nodal();
    double peak = 0;
    for (double v : u) peak = std::max(peak, std::abs(v));
    EXPECT_DOUBLE_EQ(discretization_error(sys, Vector(u.size(), 0.0)).max, peak);
    EXPECT_THROW(discretization_error(sys, Vector(3, 0.0)), dimension_error);
}

class SecondOrder : public ::testing::TestWithParam<ProblemKind> {};

TEST_P(SecondOrder, HalvingMeshDividesL2ErrorByAboutFour) {
    const auto spec = ProblemSpec::of_kind(GetParam());
    const auto coarse = assemble(spec, 16), fine = assemble(spec, 32);
    const double e16 = discretization_error(coarse, dense_solve(coarse)).l2;
    const double e32 = discretization_error(fine, dense_solve(fine)).l2;
    const double ratio = e16 / e32;
    EXPECT_GE(ratio, 3.0);
    EXPECT_LE(ratio, 5.0);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, SecondOrder,
                         ::testing::Values(ProblemKind::poisson, ProblemKind::reaction, ProblemKind::convdiff),
                         [](const auto& info) { return to_string(info.param); });

TEST(ProblemJson, RoundTrip) {
    const auto spec = ProblemSpec::convdiff(0.01, 0.3);
    const auto back = problem_from_json(problem_json(spec));
    EXPECT_EQ(back.kind, ProblemKind::convdiff);
    EXPECT_DOUBLE_EQ(back.epsilon, 0.01);
    EXPECT_DOUBLE_EQ(back.phi, 0.3);
    const auto sidecar = system_json(assemble(ProblemSpec::poisson(), 4));
    EXPECT_EQ(sidecar.at("kind"), "poisson");
    EXPECT_EQ(sidecar.at("n"), 4);
    EXPECT_NEAR(sidecar.at("domain")[0].get<double>(), -std::numbers::pi / 6, 1e-15);
}

TEST(ProblemSpec, Validation) {
    auto p = ProblemSpec::convdiff(0.0);
    EXPECT_THROW(assemble(p, 4), config_error);
    EXPECT_THROW(parse_problem_kind("heat"), config_error);
    auto r = ProblemSpec::reaction(-1);
    EXPECT_THROW(r.validate(), config_error);
}
