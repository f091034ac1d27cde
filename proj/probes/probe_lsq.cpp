#include <cstdio>
#include <vector>

#include "mlft/estimate.hpp"

using namespace mlft;

static TrialRecord make_trial(const EstimatorModel& truth, std::vector<double> m) {
    TrialRecord tr;
    tr.m = m;
    const int L = truth.L;
    for (int l = 1; l <= L; ++l) {
        EstimatorModel prefix = truth;
        prefix.L = l;
        std::vector<double> mm(m.begin(), m.begin() + l);
        tr.g.push_back(eval_ghat(prefix, mm));
    }
    for (int l = 2; l <= L; ++l) tr.gap.push_back(0.1 * l);
    return tr;
}

int main() {
    {
        EstimatorModel truth;
        truth.kind = EstimatorModel::Kind::mlft_apost;
        truth.L = 2;
        truth.a = {1.5, 0.7};
        truth.b = {0.4};
        std::vector<std::vector<double>> ms = {{4, 4},   {16, 4},  {4, 16},
                                               {64, 16}, {16, 64}, {100, 100}};
        std::vector<TrialRecord> trials;
        for (auto& m : ms) trials.push_back(make_trial(truth, m));
        EstimatorModel fit = fit_least_squares(trials, truth.kind, 0);
        std::printf("mlft_apost J=%.3e conv=%d a=(%.6g,%.6g) b=%.6g\n", fit.fit_residual,
                    (int)fit.converged, fit.a[0], fit.a[1], fit.b[0]);
        std::vector<double> probe = {36, 9};
        std::printf("  pred %.12g truth %.12g\n", eval_ghat(fit, probe), eval_ghat(truth, probe));
        // duplicates
        std::vector<TrialRecord> dup = trials;
        dup.insert(dup.end(), trials.begin(), trials.end());
        EstimatorModel fit2 = fit_least_squares(dup, truth.kind, 0);
        std::printf("  dup J=%.3e pred %.12g\n", fit2.fit_residual, eval_ghat(fit2, probe));
    }
    {
        EstimatorModel truth;
        truth.kind = EstimatorModel::Kind::ml2mc_apost;
        truth.L = 2;
        truth.a = {1.0, 0.25};
        std::vector<std::vector<double>> ms = {{4, 4}, {25, 4}, {4, 25}, {100, 25}};
        std::vector<TrialRecord> trials;
        for (auto& m : ms) trials.push_back(make_trial(truth, m));
        EstimatorModel fit = fit_least_squares(trials, truth.kind, 0);
        std::printf("ml2mc J=%.3e conv=%d a=(%.6g,%.6g)\n", fit.fit_residual, (int)fit.converged,
                    fit.a[0], fit.a[1]);
    }
    {
        EstimatorModel truth;
        truth.kind = EstimatorModel::Kind::mlft_apriori;
        truth.L = 2;
        truth.R = 0.8;
        truth.c = {1.2, 0.9};
        truth.d = {0.5};
        std::vector<std::vector<double>> ms = {{4, 4},   {16, 4},  {4, 16},
                                               {64, 16}, {16, 64}, {100, 100}};
        std::vector<TrialRecord> trials;
        for (auto& m : ms) trials.push_back(make_trial(truth, m));
        EstimatorModel fit = fit_least_squares(trials, truth.kind, 0);
        std::vector<double> probe = {36, 9};
        std::printf("apriori J=%.3e conv=%d pred %.12g truth %.12g\n", fit.fit_residual,
                    (int)fit.converged, eval_ghat(fit, probe), eval_ghat(truth, probe));
    }
    return 0;
}
