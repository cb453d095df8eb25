#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rsma {

/// Composite cone: nonnegative orthant followed by second-order cones.
/// Order within s/z vectors: [nonneg block | soc block 0 | soc block 1 | ...].
struct ConeSpec {
    int nonneg = 0;               // dimension of the R+ block
    std::vector<int> soc;         // dimension of each SOC block (>= 2)

    int dim() const {
        int m = nonneg;
        for (int q : soc) m += q;
        return m;
    }
    int degree() const { return nonneg + static_cast<int>(soc.size()); }
};

/// Cone program in standard form:
///   minimize    c'x
///   subject to  A x = b
///               G x + s = h,   s in K
struct SocpData {
    Eigen::VectorXd c;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    ConeSpec cones;
};

enum class SocpStatus {
    Optimal,
    Infeasible,        // primal infeasible, dual certificate (y, z) returned
    Unbounded,         // dual infeasible, primal ray x returned
    NumericalFailure,
};

struct SocpSolution {
    SocpStatus status = SocpStatus::NumericalFailure;
    Eigen::VectorXd x, y, z, s;
    double objective = 0.0;       // c'x at the returned point
    double pres = 0.0;            // relative primal residual (original data)
    double dres = 0.0;            // relative dual residual
    double gap = 0.0;             // absolute complementarity gap s'z / tau^2
    double relgap = 0.0;
    int iterations = 0;
};

struct SocpSettings {
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    // Acceptance thresholds when the tight tolerances stall.
    double feastol_inacc = 1e-6;
    double abstol_inacc = 5e-6;
    int max_iters = 100;
    bool equilibrate = true;
    double static_reg = 1e-10;    // KKT regularization
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
SocpSolution solve_socp(const SocpData& prob, const SocpSettings& settings = {});

}  // namespace rsma
