#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsma/box.hpp"
#include "rsma/model.hpp"
#include "rsma/socp.hpp"

namespace rsma {

struct VarRef {
    int offset = -1;
    int size = 0;
    bool valid() const { return offset >= 0; }
};

/// Sparse affine expression a'x + k over a program's variables.
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    static LinExpr of(double c) {
        LinExpr e;
        e.constant = c;
        return e;
    }
    static LinExpr var(VarRef v, int i = 0, double coeff = 1.0) {
        LinExpr e;
        e.terms.emplace_back(v.offset + i, coeff);
        return e;
    }
    LinExpr& add(VarRef v, int i, double coeff) {
        terms.emplace_back(v.offset + i, coeff);
        return *this;
    }
    LinExpr& operator+=(const LinExpr& o) {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        constant += o.constant;
        return *this;
    }
    LinExpr& operator-=(const LinExpr& o) {
        for (auto [i, c] : o.terms) terms.emplace_back(i, -c);
        constant -= o.constant;
        return *this;
    }
    LinExpr& operator*=(double f) {
        for (auto& [i, c] : terms) c *= f;
        constant *= f;
        return *this;
    }
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(double f, LinExpr a) { return a *= f; }
    friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
};

/// Re/Im pair of a complex-valued affine expression. All complex-to-real
/// lifting goes through here so constraint builders never hand-roll it.
struct CExpr {
    LinExpr re, im;
};

/// Inner product h^H p for a complex channel h against a precoder variable
/// block stored as interleaved (re, im) pairs.
CExpr channel_dot(const cvec& h, VarRef p);

/// Solver-agnostic second-order-cone program: named variables, a linear
/// objective, and tagged constraint blocks.
class ConicProgram {
  public:
    struct VarBlock {
        std::string name;
        int offset = 0;
        int size = 0;
    };
    struct EqCon {
        LinExpr expr;  // expr == 0
        std::string tag;
    };
    struct IneqCon {
        LinExpr expr;  // expr <= 0
        std::string tag;
    };
    struct SocCon {
        std::vector<LinExpr> norm;  // ||norm|| <= bound
        LinExpr bound;
        std::string tag;
    };
    struct RsocCon {
        LinExpr u, v;               // u*v >= ||w||^2, u,v >= 0
        std::vector<LinExpr> w;
        std::string tag;
    };

    VarRef add_var(const std::string& name, int size = 1);
    void minimize(LinExpr objective) { objective_ = std::move(objective); }
    void add_eq(LinExpr e, std::string tag);
    void add_le(LinExpr e, std::string tag);                  // e <= 0
    void add_ge(LinExpr e, std::string tag);                  // e >= 0
    void add_soc(std::vector<LinExpr> norm, LinExpr bound, std::string tag);
    void add_rsoc(LinExpr u, LinExpr v, std::vector<LinExpr> w, std::string tag);

    int num_vars() const { return n_; }
    const std::vector<VarBlock>& var_blocks() const { return vars_; }
    const LinExpr& objective() const { return objective_; }

    SocpData compile() const;
    std::string dump() const;

    const std::vector<EqCon>& eqs() const { return eqs_; }
    const std::vector<IneqCon>& ineqs() const { return ineqs_; }
    const std::vector<SocCon>& socs() const { return socs_; }
    const std::vector<RsocCon>& rsocs() const { return rsocs_; }

  private:
    int n_ = 0;
    std::vector<VarBlock> vars_;
    LinExpr objective_;
    std::vector<EqCon> eqs_;
    std::vector<IneqCon> ineqs_;
    std::vector<SocCon> socs_;
    std::vector<RsocCon> rsocs_;
};

enum class ConicStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct ConicSolution {
    ConicStatus status = ConicStatus::NumericalFailure;
    double objective = 0.0;       // primal objective (includes constant)
    double dual_objective = 0.0;  // certified lower bound when Optimal
    Eigen::VectorXd x;
    double pres = 0.0, dres = 0.0, gap = 0.0;
    int iterations = 0;

    double value(VarRef v, int i = 0) const { return x(v.offset + i); }
    Eigen::VectorXd values(VarRef v) const { return x.segment(v.offset, v.size); }
    std::complex<double> cvalue(VarRef v, int i = 0) const {
        return {x(v.offset + 2 * i), x(v.offset + 2 * i + 1)};
    }
};

/// Status Optimal guarantees residuals (checked against the original program
/// data) at or below solver_tol; Infeasible is solver-certified.
ConicSolution solve(const ConicProgram& prog, double solver_tol = 1e-8);

/// Three half-space cuts replacing the circle set on a phase arc
/// [alpha_lo, alpha_hi] of width at most pi.
struct EnvelopeCut {
    int k = 0;
    double sin_lo = 0, cos_lo = 1, sin_hi = 0, cos_hi = 1;
    double a = 1, b = 0;  // chord coefficients
};

/// Returns nullopt (trivial relaxation, no cut) when the arc exceeds pi.
std::optional<EnvelopeCut> envelope_cuts(double alpha_lo, double alpha_hi, int k);

/// Handles to the variables of a built subproblem that later stages read.
struct SubproblemRefs {
    VarRef t;
    VarRef p_common;                 // invalid when the scheme has none
    std::vector<VarRef> p_private;   // invalid entries for pinned users
    std::vector<VarRef> common_rate; // invalid entries for pinned users
    std::vector<VarRef> gamma_log;   // gamma'_k, invalid for pinned users
    VarRef s_log;                    // s'
    std::vector<VarRef> d;           // k = 2..K (index k-1; [0] unused)
    std::vector<VarRef> e;           // complex, k = 2..K
};

struct BuiltProgram {
    ConicProgram program;
    SubproblemRefs refs;
};

/// Bounding SOCP over a box: SOC constraints at the box lower corner,
/// envelope cuts on arcs of width <= pi, rate-substituted QoS rows, the
/// delta-level epigraph, and the power budget.
BuiltProgram build_bounding_socp(const Box& box, double delta,
                                 const ProblemSpec& prob);

/// Feasibility-style evaluation at a fixed point (gamma_p, s, alpha): the
/// arcs collapse to rays and the rate constants are frozen.
struct XPoint {
    Eigen::VectorXd gamma_p;  // size K (zeros at pinned users)
    double s = 0.0;
    Eigen::VectorXd alpha;    // size K-1
};

BuiltProgram build_gtilde_program(const XPoint& x, double delta,
                                  const ProblemSpec& prob);

/// Common-rate reallocation LP around fixed precoders and SINRs.
BuiltProgram build_common_rate_lp(const Eigen::VectorXd& gamma_star,
                                  double s_star, const PrecoderSet& precoders,
                                  double delta, const ProblemSpec& prob);

constexpr double kDefaultSolverTol = 1e-8;

}  // namespace rsma
