#pragma once

#include <map>
#include <string>
#include <vector>

#include "biaslab/config.hpp"

namespace biaslab {

// Per-loan profit at a given PD realization:
//   PD * A * (1+i) * (1-LGD) + (1-PD) * A * (1+i) - A.
double per_loan_profit(double pd, double principal, double interest, double lgd);

struct ProfitRow {
  std::string method;
  double lgd = 0.0;
  double profit = 0.0;                 // average profit per loan
  double incremental_vs_baseline = 0.0;
  double expected_margin = 0.0;        // incremental / mean principal
};

// Monte-Carlo business impact: per LGD, draws (A, i) from zero-truncated
// Gaussians (shared across methods so differences are PD-driven) and
// averages the per-loan profit over each method's ABR estimates.
std::vector<ProfitRow> business_impact(
    const std::map<std::string, std::vector<double>>& abr_estimates, const std::string& baseline,
    const LoanEconomics& econ, RngSeed seed);

struct PolicyRow {
  std::string strategy;
  double lgd = 0.0;
  double chosen_rate = 0.0;
  double estimated_profit = 0.0;  // volume-scaled, at the chosen rate
  double realized_profit = 0.0;   // from the truth table, at the chosen rate
  bool tie = false;
};

// Acceptance-rate policy: per strategy and LGD, picks the rate maximizing
// estimated volume-scaled profit (ties resolve to the lower rate) and
// prices the choice with the truth table.
std::vector<PolicyRow> policy_selection(
    const std::map<std::string, std::map<double, std::vector<double>>>& abr_by_rate,
    const LoanEconomics& econ, const std::map<double, std::vector<double>>& truth_abr_by_rate,
    RngSeed seed);

void write_profit_csv(const std::vector<ProfitRow>& rows, const std::string& path);
void write_policy_csv(const std::vector<PolicyRow>& rows, const std::string& path);

}  // namespace biaslab
