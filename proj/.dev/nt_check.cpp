// Verify NT scaling identities on random cone points by duplicating the
// internal formulas (compile socp.cpp with RSMA_SOCP_EXPOSE_INTERNALS).
#define RSMA_SOCP_EXPOSE_INTERNALS 1
#include "../src/socp.cpp"

#include <cstdio>
#include <random>

using namespace rsma;

int main() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    ConeSpec K;
    K.nonneg = 3;
    K.soc = {4, 3};
    const int m = K.dim();

    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd s(m), z(m);
        for (int i = 0; i < K.nonneg; ++i) {
            s(i) = 0.3 + std::abs(gauss(rng));
            z(i) = 0.3 + std::abs(gauss(rng));
        }
        int off = K.nonneg;
        for (int q : K.soc) {
            for (int r = 1; r < q; ++r) {
                s(off + r) = gauss(rng);
                z(off + r) = gauss(rng);
            }
            s(off) = s.segment(off + 1, q - 1).norm() + 0.2 + std::abs(gauss(rng));
            z(off) = z.segment(off + 1, q - 1).norm() + 0.2 + std::abs(gauss(rng));
            off += q;
        }
        const NtScaling W = compute_scaling(K, s, z);
        const Eigen::VectorXd Wz = apply_W(K, W, z);
        const Eigen::VectorXd Wis = apply_Winv(K, W, s);
        std::printf("trial %d: |Wz-lambda|=%.3e |W^-1 s-lambda|=%.3e", trial,
                    (Wz - W.lambda).norm(), (Wis - W.lambda).norm());
        // W2 consistency
        const Eigen::MatrixXd W2 = form_W2(K, W);
        const Eigen::VectorXd W2z = apply_W(K, W, apply_W(K, W, z));
        std::printf(" |W2*z - W(Wz)|=%.3e", (W2 * z - W2z).norm());
        // jsolve(lambda, lambda o lambda) == lambda
        const Eigen::VectorXd ll = jprod(K, W.lambda, W.lambda);
        const Eigen::VectorXd back = jsolve(K, W.lambda, ll);
        std::printf(" |jsolve - lambda|=%.3e\n", (back - W.lambda).norm());
    }
    return 0;
}
