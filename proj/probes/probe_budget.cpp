#include <cstdio>
#include <vector>

#include "mlft/budget.hpp"
#include "mlft/rng.hpp"

using namespace mlft;

// analytic d ghat / d M_l from the suffix expansion
static std::vector<double> ghat_grad(const EstimatorModel& model, const std::vector<double>& m) {
    const std::vector<double> w = detail::suffix_weights(model);
    const int L = model.L;
    std::vector<double> grad(L, 0.0);
    for (int k = 1; k <= L; ++k) {
        double q = 1.0;
        for (int l = k; l <= L; ++l) q /= std::sqrt(m[l - 1]);
        for (int l = k; l <= L; ++l) grad[l - 1] -= 0.5 * w[k - 1] * q / m[l - 1];
    }
    return grad;
}

int main() {
    Rng rng(2024);
    double worst_kkt = 0.0, worst_gap = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        EstimatorModel mod;
        mod.kind = EstimatorModel::Kind::mlft_apost;
        mod.L = 2;
        mod.a = {0.2 + rng.uniform(), 0.2 + rng.uniform()};
        mod.b = {0.2 + rng.uniform()};
        mod.t = {1.0, 2.0 + 14.0 * rng.uniform()};
        const double T = 256.0 + 256.0 * rng.uniform();
        BudgetSolution sol = optimize_mlft(mod, T);
        std::vector<double> g = ghat_grad(mod, sol.m_continuous);
        double lam0 = -g[0] / mod.t[0], lam1 = -g[1] / mod.t[1];
        double kkt = std::abs(lam0 - lam1) / std::max(lam0, lam1);
        BudgetSolution bf = optimize_bruteforce(mod, T);
        double gap = sol.ghat_rounded / bf.ghat_rounded - 1.0;
        if (kkt > worst_kkt) worst_kkt = kkt;
        if (gap > worst_gap) worst_gap = gap;
        if (rep < 3)
            std::printf("L2 rep%d T=%.0f cont=(%.3f,%.3f) round=(%ld,%ld) kkt=%.2e gap=%.2e it=%ld\n",
                        rep, T, sol.m_continuous[0], sol.m_continuous[1], sol.m_rounded[0],
                        sol.m_rounded[1], kkt, gap, sol.iterations);
    }
    std::printf("L2 worst kkt=%.3e worst gap=%.3e\n", worst_kkt, worst_gap);

    double w3 = 0.0, g3 = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
        EstimatorModel mod;
        mod.kind = EstimatorModel::Kind::mlft_apost;
        mod.L = 3;
        mod.a = {0.2 + rng.uniform(), 0.2 + rng.uniform(), 0.2 + rng.uniform()};
        mod.b = {0.2 + rng.uniform(), 0.2 + rng.uniform()};
        mod.t = {1.0, 4.0, 16.0};
        const double T = 600.0;
        BudgetSolution sol = optimize_mlft(mod, T);
        std::vector<double> g = ghat_grad(mod, sol.m_continuous);
        double lmin = 1e300, lmax = 0.0;
        for (int l = 0; l < 3; ++l) {
            double lam = -g[l] / mod.t[l];
            lmin = std::min(lmin, lam);
            lmax = std::max(lmax, lam);
        }
        double kkt = (lmax - lmin) / lmax;
        BudgetSolution bf = optimize_bruteforce(mod, T);
        double gap = sol.ghat_rounded / bf.ghat_rounded - 1.0;
        if (kkt > w3) w3 = kkt;
        if (gap > g3) g3 = gap;
        std::printf("L3 rep%d round=(%ld,%ld,%ld) bf=(%ld,%ld,%ld) kkt=%.2e gap=%.2e\n", rep,
                    sol.m_rounded[0], sol.m_rounded[1], sol.m_rounded[2], bf.m_rounded[0],
                    bf.m_rounded[1], bf.m_rounded[2], kkt, gap);
    }
    std::printf("L3 worst kkt=%.3e worst gap=%.3e\n", w3, g3);

    // ml2mc closed-form example
    EstimatorModel mc;
    mc.kind = EstimatorModel::Kind::ml2mc_apost;
    mc.L = 2;
    mc.a = {1.0, 1.0};
    mc.t = {1.0, 64.0};
    BudgetSolution s = optimize_ml2mc(mc, 128.0);
    std::printf("ml2mc cont=(%.12g,%.12g) round=(%ld,%ld) ghat_c=%.12g mult=%.12g\n",
                s.m_continuous[0], s.m_continuous[1], s.m_rounded[0], s.m_rounded[1],
                s.ghat_continuous, s.multiplier);
    // apriori path through optimize_mlft
    EstimatorModel ap;
    ap.kind = EstimatorModel::Kind::mlft_apriori;
    ap.L = 2;
    ap.R = 0.7;
    ap.c = {1.1, 0.6};
    ap.d = {0.9};
    ap.t = {1.0, 8.0};
    BudgetSolution sa = optimize_mlft(ap, 512.0);
    std::vector<double> gg = ghat_grad(ap, sa.m_continuous);
    std::printf("apriori round=(%ld,%ld) kkt=%.2e\n", sa.m_rounded[0], sa.m_rounded[1],
                std::abs(-gg[0] / ap.t[0] + gg[1] / ap.t[1]) / (-gg[0] / ap.t[0]));
    return 0;
}
