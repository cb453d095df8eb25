#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rsma/conic.hpp"
#include "rsma/socp.hpp"

using namespace rsma;

TEST_CASE("lp: min x subject to x >= 1") {
    ConicProgram prog;
    const VarRef x = prog.add_var("x");
    prog.minimize(LinExpr::var(x));
    prog.add_ge(LinExpr::var(x) - LinExpr::of(1.0), "floor");
    const ConicSolution sol = solve(prog);
    REQUIRE(sol.status == ConicStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.value(x) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mrt-style min-norm beamformer") {
    // min ||p|| s.t. Re{h^H p} >= 1, Im{h^H p} = 0, h = [1, 0]
    ConicProgram prog;
    const VarRef p = prog.add_var("p", 4);
    const VarRef t = prog.add_var("t");
    cvec h(2);
    h << std::complex<double>(1, 0), std::complex<double>(0, 0);
    const CExpr hp = channel_dot(h, p);
    prog.add_ge(hp.re - LinExpr::of(1.0), "gain");
    prog.add_eq(hp.im, "rotation");
    std::vector<LinExpr> entries;
    for (int i = 0; i < 4; ++i) entries.push_back(LinExpr::var(p, i));
    prog.add_soc(entries, LinExpr::var(t), "norm");
    prog.minimize(LinExpr::var(t));
    const ConicSolution sol = solve(prog);
    REQUIRE(sol.status == ConicStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.value(p, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(sol.value(p, 2)) < 1e-6);
}

TEST_CASE("min-power for a target gain matches the closed form") {
    // min ||p_k||^2 s.t. |h_k^H p_k|^2 >= g has value g / ||h_k||^2
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        const int M = 2 + static_cast<int>(rng() % 3);
        cvec h(M);
        for (int m = 0; m < M; ++m) h(m) = {gauss(rng), gauss(rng)};
        const double g = 0.1 + std::abs(gauss(rng));

        ConicProgram prog;
        const VarRef p = prog.add_var("p", 2 * M);
        const VarRef q = prog.add_var("q");
        const CExpr hp = channel_dot(h, p);
        prog.add_ge(hp.re - LinExpr::of(std::sqrt(g)), "gain");
        prog.add_eq(hp.im, "rotation");
        std::vector<LinExpr> entries;
        for (int i = 0; i < 2 * M; ++i) entries.push_back(LinExpr::var(p, i));
        prog.add_rsoc(LinExpr::var(q), LinExpr::of(1.0), entries, "power");
        prog.minimize(LinExpr::var(q));
        const ConicSolution sol = solve(prog);
        REQUIRE(sol.status == ConicStatus::Optimal);
        CHECK(sol.objective ==
              doctest::Approx(g / h.squaredNorm()).epsilon(1e-8));
    }
}

TEST_CASE("infeasible program is certified") {
    ConicProgram prog;
    const VarRef x = prog.add_var("x");
    prog.minimize(LinExpr::var(x));
    prog.add_ge(LinExpr::var(x) - LinExpr::of(1.0), "ge");
    prog.add_le(LinExpr::var(x) + LinExpr::of(1.0), "le");
    const ConicSolution sol = solve(prog);
    CHECK(sol.status == ConicStatus::Infeasible);
}

TEST_CASE("unbounded program is certified") {
    ConicProgram prog;
    const VarRef x = prog.add_var("x");
    prog.minimize(-LinExpr::var(x));
    prog.add_ge(LinExpr::var(x), "ge");
    const ConicSolution sol = solve(prog);
    CHECK(sol.status == ConicStatus::Unbounded);
}

TEST_CASE("random socps: strong duality holds at the solution") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 5);
        SocpData P;
        P.c.resize(n);
        for (int i = 0; i < n; ++i) P.c(i) = gauss(rng);
        P.A.resize(0, n);
        P.b.resize(0);
        const int l = 2 + static_cast<int>(rng() % 3);
        const int q = 3;
        P.cones.nonneg = l;
        P.cones.soc = {q, n + 1};
        const int m = l + q + n + 1;
        P.G = Eigen::MatrixXd::Zero(m, n);
        P.h = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < l + q; ++i)
            for (int j = 0; j < n; ++j) P.G(i, j) = gauss(rng);
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) x0(i) = gauss(rng);
        Eigen::VectorXd s0(l + q);
        for (int i = 0; i < l; ++i) s0(i) = 0.5 + std::abs(gauss(rng));
        for (int r = 1; r < q; ++r) s0(l + r) = gauss(rng);
        s0(l) = s0.segment(l + 1, q - 1).norm() + 1.0;
        P.h.head(l + q) = P.G.topRows(l + q) * x0 + s0;
        P.h(l + q) = 50.0;  // ball ||x|| <= 50 keeps it bounded
        for (int j = 0; j < n; ++j) P.G(l + q + 1 + j, j) = -1.0;

        const SocpSolution sol = solve_socp(P);
        REQUIRE(sol.status == SocpStatus::Optimal);
        const double dual = -P.h.dot(sol.z);
        CHECK(std::abs(sol.objective - dual) <=
              1e-6 * (1.0 + std::abs(sol.objective)));
        CHECK(sol.pres < 1e-7);
        CHECK(sol.dres < 1e-7);
    }
}
