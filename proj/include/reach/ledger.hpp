#pragma once

#include <vector>

namespace reach {

/// Split of the user bound eps_max = eps_H_max + eps_P_max + eps_S_max.
struct ErrorBudget {
    double eps_H_max = 0.0;
    double eps_P_max = 0.0;
    double eps_S_max = 0.0;

    double total() const { return eps_H_max + eps_P_max + eps_S_max; }
};

/// Parameters and tracked errors of one accepted step.
struct StepRecord {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double dt = 0.0;
    int eta = 0;
    double rho = 0.0;  // order of the accumulated input solution after reduction
    double eps_H = 0.0;
    double eps_P = 0.0;
    double eps_S = 0.0;
    double admissible_P = 0.0;
    double admissible_S = 0.0;
    int retries = 0;  // (dt, eta) candidates evaluated
};

/// Running record of the accumulated errors. eps_H is per step and is not
/// accumulated.
struct ErrorLedger {
    double eps_P_acc = 0.0;
    double eps_S_acc = 0.0;
    std::vector<StepRecord> steps;

    double max_eps_H() const {
        double m = 0.0;
        for (const auto& s : steps) m = s.eps_H > m ? s.eps_H : m;
        return m;
    }
};

}  // namespace reach
