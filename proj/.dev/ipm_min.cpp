#include <cstdio>

#include "rsma/socp.hpp"

using namespace rsma;

int main() {
    // min x s.t. x >= 1  → G = [-1], h = [-1], s = -1 + x >= 0
    SocpData P;
    P.c.resize(1);
    P.c << 1.0;
    P.A.resize(0, 1);
    P.b.resize(0);
    P.G.resize(1, 1);
    P.G << -1.0;
    P.h.resize(1);
    P.h << -1.0;
    P.cones.nonneg = 1;
    SocpSettings st;
    st.equilibrate = false;
    SocpSolution sol = solve_socp(P, st);
    std::printf("LP: status=%d obj=%.10g x=%.10g iters=%d pres=%.2e dres=%.2e gap=%.2e\n",
                (int)sol.status, sol.objective, sol.x(0), sol.iterations, sol.pres,
                sol.dres, sol.gap);

    // min -x1-x2 s.t. ||(x1,x2)|| <= 1 → optimum -sqrt(2)
    SocpData Q;
    Q.c.resize(2);
    Q.c << -1.0, -1.0;
    Q.A.resize(0, 2);
    Q.b.resize(0);
    Q.G.resize(3, 2);
    Q.G << 0, 0, -1, 0, 0, -1;
    Q.h.resize(3);
    Q.h << 1, 0, 0;
    Q.cones.soc.push_back(3);
    SocpSolution sol2 = solve_socp(Q, st);
    std::printf("SOC: status=%d obj=%.10g (expect %.10g) iters=%d pres=%.2e dres=%.2e gap=%.2e\n",
                (int)sol2.status, sol2.objective, -std::sqrt(2.0), sol2.iterations,
                sol2.pres, sol2.dres, sol2.gap);
    return 0;
}
