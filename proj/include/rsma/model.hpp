#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsma {

using cvec = Eigen::VectorXcd;

inline double rate_of(double sinr) { return std::log2(1.0 + sinr); }
inline double sinr_of(double rate) { return std::exp2(rate) - 1.0; }

/// Downlink channels h_1..h_K, already divided by the noise standard
/// deviation so unit-noise SINR formulas apply.
struct ChannelSet {
    int K = 0;
    int M = 0;
    std::vector<cvec> h;
    std::uint64_t seed = 0;
    std::string meta;

    void validate() const;
    double norm_sq(int k) const { return h[k].squaredNorm(); }
    double max_norm_sq() const;
    double min_norm_sq() const;
};

struct PrecoderSet {
    cvec common;              // p_c, length M (zero when the scheme has none)
    std::vector<cvec> priv;   // p_1..p_K

    double total_power() const;
    static PrecoderSet zeros(int K, int M);
};

enum class SchemeKind { RSMA, MULP, NOMA2 };

struct SchemeConfig {
    SchemeKind kind = SchemeKind::RSMA;
    // {strong, weak} user indices; unset means both orders are solved and
    // the better objective kept.
    std::optional<std::array<int, 2>> noma_order;
};

enum class ObjectiveKind { WSR, EE };

struct ProblemSpec {
    ChannelSet channels;
    Eigen::VectorXd u;            // per-user weights, u != 0
    Eigen::VectorXd r_threshold;  // QoS floor [bits/cu]
    double power = 1.0;           // P, linear and noise-normalized
    double mu = 0.0;              // amplifier inefficiency
    double p_circuit = 1.0;       // static circuit power P_c > 0
    SchemeConfig scheme;
    ObjectiveKind objective = ObjectiveKind::WSR;

    int K() const { return channels.K; }
    int M() const { return channels.M; }

    // WSR fixes mu = 0, P_c = 1; EE fixes u = 1.
    static ProblemSpec wsr(ChannelSet ch, Eigen::VectorXd u,
                           Eigen::VectorXd r_th, double P,
                           SchemeConfig scheme = {});
    static ProblemSpec ee(ChannelSet ch, Eigen::VectorXd r_th, double P,
                          double mu, double p_circuit,
                          SchemeConfig scheme = {});
};

/// Which variables the scheme pins to zero.
struct SchemePlan {
    bool has_common = true;
    std::vector<bool> private_active;     // p_k free?
    std::vector<bool> common_rate_pinned; // C_k = 0?

    static SchemePlan of(const ProblemSpec& prob);
};

struct Violation {
    std::string constraint;
    double magnitude = 0.0;
};

struct SolutionReport {
    PrecoderSet precoders;
    Eigen::VectorXd common_rate;    // C_k [bits/cu]
    Eigen::VectorXd gamma_common;   // achieved SINR of the common stream
    Eigen::VectorXd gamma_private;
    Eigen::VectorXd rates;          // R_k = C_k + log2(1+gamma_private_k)
    double objective = 0.0;
    bool feasible = false;
    std::vector<Violation> violations;

    double sum_common_rate() const { return common_rate.sum(); }
};

struct Sinrs {
    Eigen::VectorXd common;  // gamma_{c,k}
    Eigen::VectorXd priv;    // gamma_{p,k}
};

Sinrs compute_sinrs(const ChannelSet& ch, const PrecoderSet& p);

/// Combined objective: WSR returns sum u_k (C_k + log2(1+gamma_k)); EE the
/// ratio against mu*power + P_c.
double objective_value(const ProblemSpec& prob, const PrecoderSet& p,
                       const Eigen::VectorXd& C,
                       const Eigen::VectorXd& gamma_p);

/// Recomputes SINRs from the precoders and validates every constraint plus
/// the scheme restrictions; infeasibility is data, not an error.
SolutionReport check_feasibility(const ProblemSpec& prob, const PrecoderSet& p,
                                 const Eigen::VectorXd& C,
                                 double feas_tol = 1e-6);

/// Validates and attaches a scheme to the problem (NOMA2 needs K = 2).
ProblemSpec apply_scheme(const SchemeConfig& scheme, ProblemSpec prob);

/// Fully resolved single-order problem instances to solve: one element for
/// RSMA/MULP or NOMA2 with a fixed order, two (both decode orders, the
/// descending-norm order first) when a NOMA2 order is not set.
std::vector<ProblemSpec> scheme_variants(const ProblemSpec& prob);

constexpr double kDefaultFeasTol = 1e-6;

}  // namespace rsma
