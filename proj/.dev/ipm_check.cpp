// Dev-only scratch: random SOCP instances printed for cross-checking.
#include <cstdio>
#include <random>

#include "rsma/socp.hpp"

using namespace rsma;

int main(int argc, char** argv) {
    const int num = argc > 1 ? std::atoi(argv[1]) : 20;
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;

    int solved = 0, infeas = 0, unbnd = 0, fail = 0;
    for (int inst = 0; inst < num; ++inst) {
        const int n = 6 + static_cast<int>(rng() % 8);
        const int p = static_cast<int>(rng() % 3);
        const int l = 2 + static_cast<int>(rng() % 5);
        const int nsoc = 1 + static_cast<int>(rng() % 3);

        SocpData P;
        P.cones.nonneg = l;
        int m = l;
        for (int i = 0; i < nsoc; ++i) {
            const int q = 2 + static_cast<int>(rng() % 4);
            P.cones.soc.push_back(q);
            m += q;
        }
        P.c.resize(n);
        for (int i = 0; i < n; ++i) P.c(i) = gauss(rng);
        P.A.resize(p, n);
        P.G.resize(m, n);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n; ++j) P.A(i, j) = gauss(rng);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) P.G(i, j) = gauss(rng);
        // make it feasible by construction: pick x0, s0 interior
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) x0(i) = gauss(rng);
        Eigen::VectorXd s0(m);
        for (int i = 0; i < l; ++i) s0(i) = 0.5 + std::abs(gauss(rng));
        int off = l;
        for (int q : P.cones.soc) {
            for (int r = 1; r < q; ++r) s0(off + r) = gauss(rng);
            s0(off) = s0.segment(off + 1, q - 1).norm() + 0.5 + std::abs(gauss(rng));
            off += q;
        }
        P.b = P.A * x0;
        P.h = P.G * x0 + s0;
        // bound the feasible set so the problem has a finite optimum:
        // append a big-ball SOC  ||x|| <= R
        const int q = n + 1;
        P.cones.soc.push_back(q);
        P.G.conservativeResize(m + q, n);
        P.h.conservativeResize(m + q);
        P.G.row(m).setZero();
        P.h(m) = 100.0;
        for (int j = 0; j < n; ++j) {
            P.G.row(m + 1 + j).setZero();
            P.G(m + 1 + j, j) = -1.0;
            P.h(m + 1 + j) = 0.0;
        }

        const SocpSolution sol = solve_socp(P);
        const char* st = "?";
        switch (sol.status) {
            case SocpStatus::Optimal: st = "optimal"; ++solved; break;
            case SocpStatus::Infeasible: st = "infeasible"; ++infeas; break;
            case SocpStatus::Unbounded: st = "unbounded"; ++unbnd; break;
            case SocpStatus::NumericalFailure: st = "failure"; ++fail; break;
        }
        std::printf("inst %d status=%s obj=%.12g iters=%d pres=%.2e dres=%.2e gap=%.2e\n",
                    inst, st, sol.objective, sol.iterations, sol.pres, sol.dres,
                    sol.gap);
        // dump for cvxpy cross-check
        char fname[64];
        std::snprintf(fname, sizeof fname, "/tmp/socp_%03d.txt", inst);
        FILE* f = std::fopen(fname, "w");
        std::fprintf(f, "%d %d %d %d %zu\n", n, p, m + q, l, P.cones.soc.size());
        for (int qq : P.cones.soc) std::fprintf(f, "%d ", qq);
        std::fprintf(f, "\n");
        auto dump_vec = [&](const Eigen::VectorXd& v) {
            for (int i = 0; i < v.size(); ++i) std::fprintf(f, "%.17g ", v(i));
            std::fprintf(f, "\n");
        };
        auto dump_mat = [&](const Eigen::MatrixXd& M_) {
            for (int i = 0; i < M_.rows(); ++i)
                for (int j = 0; j < M_.cols(); ++j) std::fprintf(f, "%.17g ", M_(i, j));
            std::fprintf(f, "\n");
        };
        dump_vec(P.c);
        dump_mat(P.A);
        dump_vec(P.b);
        dump_mat(P.G);
        dump_vec(P.h);
        std::fprintf(f, "%.17g\n", sol.objective);
        std::fprintf(f, "%d\n", static_cast<int>(sol.status));
        std::fclose(f);
    }
    std::printf("solved=%d infeas=%d unbounded=%d fail=%d\n", solved, infeas, unbnd, fail);
    return fail > 0 ? 1 : 0;
}
