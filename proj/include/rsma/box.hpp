#pragma once

#include <Eigen/Dense>

namespace rsma {

/// Rectangle over the nonconvex search variables (gamma_p, s, alpha).
/// Users whose private stream the scheme pins to zero carry a degenerate
/// [0, 0] gamma range; schemes without a common stream drop the s and alpha
/// dimensions (has_common = false, alpha arrays empty).
struct Box {
    Eigen::VectorXd gamma_lo, gamma_hi;  // size K
    double s_lo = 0.0, s_hi = 0.0;
    Eigen::VectorXd alpha_lo, alpha_hi;  // size K-1 (users 2..K), radians
    bool has_common = true;

    int users() const { return static_cast<int>(gamma_lo.size()); }
    bool valid() const {
        if ((gamma_lo.array() > gamma_hi.array()).any()) return false;
        if (gamma_lo.size() && gamma_lo.minCoeff() < 0.0) return false;
        if (has_common && (s_lo > s_hi || s_lo < 0.0)) return false;
        if (alpha_lo.size()) {
            if ((alpha_lo.array() > alpha_hi.array()).any()) return false;
            if (alpha_lo.minCoeff() < 0.0) return false;
            if (alpha_hi.maxCoeff() > 2.0 * M_PI + 1e-12) return false;
        }
        return true;
    }
};

}  // namespace rsma
