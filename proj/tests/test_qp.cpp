#include "doctest.h"

#include "fsmpc/qp.hpp"
#include "qp_oracle.hpp"

#include <random>

using namespace fsmpc;

namespace {

QPProblem scalar_problem(double p, double q) {
    QPProblem prob;
    prob.P = Mat::Constant(1, 1, p);
    prob.q = Vec::Constant(1, q);
    prob.G = Mat(0, 1);
    prob.h = Vec(0);
    prob.A_eq = Mat(0, 1);
    prob.b_eq = Vec(0);
    return prob;
}

QPProblem random_feasible_qp(std::mt19937_64& rng, int n, int m) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    QPProblem prob;
    Mat M = Mat::NullaryExpr(n, n, [&] { return nd(rng); });
    prob.P = M.transpose() * M + 0.1 * Mat::Identity(n, n);
    prob.q = Vec::NullaryExpr(n, [&] { return 3.0 * nd(rng); });
    prob.G = Mat::NullaryExpr(m, n, [&] { return nd(rng); });
    const Vec z0 = Vec::NullaryExpr(n, [&] { return nd(rng); });
    prob.h = prob.G * z0 + Vec::NullaryExpr(m, [&] { return ud(rng) < 0.3 ? 0.0 : ud(rng); });
    prob.A_eq = Mat(0, n);
    prob.b_eq = Vec(0);
    return prob;
}

} // namespace

TEST_CASE("single active lower bound") {
    auto prob = scalar_problem(1.0, 0.0);
    prob.G = Mat::Constant(1, 1, -1.0); // -z <= -1
    prob.h = Vec::Constant(1, -1.0);
    const auto sol = solve_qp(prob);
    REQUIRE(sol.status == QPStatus::Optimal);
    CHECK(sol.z(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.lambda(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unconstrained strictly convex QP matches linear solve") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 8;
        Mat M = Mat::NullaryExpr(n, n, [&] { return nd(rng); });
        QPProblem prob;
        prob.P = M.transpose() * M + Mat::Identity(n, n);
        prob.q = Vec::NullaryExpr(n, [&] { return nd(rng); });
        prob.G = Mat(0, n);
        prob.h = Vec(0);
        prob.A_eq = Mat(0, n);
        prob.b_eq = Vec(0);
        const auto sol = solve_qp(prob);
        REQUIRE(sol.status == QPStatus::Optimal);
        const Vec direct = prob.P.ldlt().solve(-prob.q);
        CHECK((sol.z - direct).lpNorm<Eigen::Infinity>() < 1e-7);
    }
}

TEST_CASE("contradictory bounds are infeasible with a certificate") {
    auto prob = scalar_problem(1.0, 0.0);
    prob.G = Mat(2, 1);
    prob.G << 1.0, -1.0; // z <= -1, -z <= -1
    prob.h = Vec(2);
    prob.h << -1.0, -1.0;
    const auto sol = solve_qp(prob);
    REQUIRE(sol.status == QPStatus::Infeasible);
    REQUIRE(sol.certificate.size() == 2);
    // Farkas: G'y = 0, h'y < 0, y >= 0.
    CHECK(std::abs((prob.G.transpose() * sol.certificate)(0)) < 1e-10);
    CHECK(prob.h.dot(sol.certificate) < 0.0);
    CHECK((sol.certificate.array() >= 0.0).all());
}

TEST_CASE("equality constraints and duals") {
    QPProblem prob;
    prob.P = Mat::Identity(2, 2);
    prob.q = Vec::Zero(2);
    prob.G = Mat(0, 2);
    prob.h = Vec(0);
    prob.A_eq = Mat(1, 2);
    prob.A_eq << 1.0, 1.0;
    prob.b_eq = Vec::Constant(1, 2.0);
    const auto sol = solve_qp(prob);
    REQUIRE(sol.status == QPStatus::Optimal);
    CHECK(sol.z(0) == doctest::Approx(1.0));
    CHECK(sol.z(1) == doctest::Approx(1.0));
    CHECK(sol.nu(0) == doctest::Approx(-1.0));
}

TEST_CASE("LP optimum at a vertex and unbounded LP") {
    Mat G(4, 2);
    G << 1, 0, -1, 0, 0, 1, 0, -1;
    Vec h(4);
    h << 1, 1, 2, 2;
    Vec c(2);
    c << -1.0, -1.0;
    auto sol = solve_lp(c, G, h);
    REQUIRE(sol.status == QPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-3.0).epsilon(1e-10));

    Mat G2 = G.topRows(2);
    Vec h2 = h.head(2);
    sol = solve_lp(c, G2, h2);
    CHECK(sol.status == QPStatus::Unbounded);
}

TEST_CASE("random QPs agree with the active-set enumeration oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 6;
        const int m = 1 + trial % 9;
        const auto prob = random_feasible_qp(rng, n, m);
        const auto sol = solve_qp(prob);
        REQUIRE(sol.status == QPStatus::Optimal);
        const auto ref = oracle::qp_active_set_enum(prob.P, prob.q, prob.G, prob.h);
        REQUIRE(ref.has_value());
        const double f_ref = 0.5 * ref->dot(prob.P * *ref) + prob.q.dot(*ref);
        CHECK(std::abs(sol.objective - f_ref) <= 1e-6 * std::max(1.0, std::abs(f_ref)));
        CHECK((sol.lambda.array() >= 0.0).all());
        CHECK(sol.residuals.gap <= 1e-8);
    }
}

TEST_CASE("minimizer is invariant to cost scaling") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto prob = random_feasible_qp(rng, 4, 6);
        const auto a = solve_qp(prob);
        prob.P *= 7.5;
        prob.q *= 7.5;
        const auto b = solve_qp(prob);
        REQUIRE(a.status == QPStatus::Optimal);
        REQUIRE(b.status == QPStatus::Optimal);
        CHECK((a.z - b.z).lpNorm<Eigen::Infinity>() < 1e-7);
    }
}

TEST_CASE("solver is deterministic") {
    std::mt19937_64 rng(5);
    const auto prob = random_feasible_qp(rng, 8, 12);
    const auto a = solve_qp(prob);
    const auto b = solve_qp(prob);
    CHECK(a.z == b.z);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("malformed problems are rejected") {
    auto prob = scalar_problem(1.0, 0.0);
    prob.h = Vec::Zero(3);
    CHECK_THROWS_AS(solve_qp(prob), DimensionMismatch);
    QPProblem asym;
    asym.P = Mat(2, 2);
    asym.P << 1, 0.5, 0, 1;
    asym.q = Vec::Zero(2);
    asym.G = Mat(0, 2);
    asym.h = Vec(0);
    asym.A_eq = Mat(0, 2);
    asym.b_eq = Vec(0);
    CHECK_THROWS_AS(solve_qp(asym), Error);
}
