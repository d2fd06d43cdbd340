#include "biaslab/impact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "biaslab/common.hpp"

namespace biaslab {

double per_loan_profit(double pd, double principal, double interest, double lgd) {
  const double revenue = principal * (1.0 + interest);
  return pd * revenue * (1.0 - lgd) + (1.0 - pd) * revenue - principal;
}

namespace {

struct Draw {
  double principal, interest;
};

// Zero-truncated Gaussian draws of (principal, interest), redrawn while
// non-positive.
std::vector<Draw> economics_draws(const LoanEconomics& econ, Rng& rng) {
  std::vector<Draw> out(econ.n_draws);
  for (auto& d : out) {
    do {
      d.principal = rng.normal(econ.principal_mean, econ.principal_sd);
    } while (d.principal <= 0.0);
    do {
      d.interest = rng.normal(econ.interest_mean, econ.interest_sd);
    } while (d.interest <= 0.0);
  }
  return out;
}

double mean_profit(std::span<const double> pd_estimates, const std::vector<Draw>& draws,
                   double lgd) {
  double total = 0;
  for (const auto& d : draws) {
    double s = 0;
    for (double pd : pd_estimates) s += per_loan_profit(pd, d.principal, d.interest, lgd);
    total += s / static_cast<double>(pd_estimates.size());
  }
  return total / static_cast<double>(draws.size());
}

}  // namespace

std::vector<ProfitRow> business_impact(
    const std::map<std::string, std::vector<double>>& abr_estimates, const std::string& baseline,
    const LoanEconomics& econ, RngSeed seed) {
  econ.validate();
  if (abr_estimates.empty()) throw ConfigError("business_impact: no ABR estimates");
  if (!abr_estimates.count(baseline))
    throw ConfigError("business_impact: baseline method '" + baseline + "' missing");
  for (const auto& [method, pds] : abr_estimates) {
    if (pds.empty()) throw ConfigError("business_impact: empty estimates for '" + method + "'");
    for (double p : pds)
      if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError("business_impact: ABR estimate outside [0,1] for '" + method + "'");
  }

  Rng rng(seed);
  std::vector<ProfitRow> rows;
  for (double lgd : econ.lgd_grid) {
    // One draw set per LGD, shared across methods.
    Rng draw_rng = rng.child(static_cast<std::uint64_t>(std::llround(lgd * 1e6)) + 1);
    const auto draws = economics_draws(econ, draw_rng);
    double mean_principal = 0;
    for (const auto& d : draws) mean_principal += d.principal;
    mean_principal /= static_cast<double>(draws.size());

    const double base_profit = mean_profit(abr_estimates.at(baseline), draws, lgd);
    for (const auto& [method, pds] : abr_estimates) {
      ProfitRow r;
      r.method = method;
      r.lgd = lgd;
      r.profit = mean_profit(pds, draws, lgd);
      r.incremental_vs_baseline = r.profit - base_profit;
      r.expected_margin = r.incremental_vs_baseline / mean_principal;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<PolicyRow> policy_selection(
    const std::map<std::string, std::map<double, std::vector<double>>>& abr_by_rate,
    const LoanEconomics& econ, const std::map<double, std::vector<double>>& truth_abr_by_rate,
    RngSeed seed) {
  econ.validate();
  if (abr_by_rate.empty()) throw ConfigError("policy_selection: no strategies");
  for (const auto& [strategy, table] : abr_by_rate)
    for (double rate : econ.acceptance_grid)
      if (!table.count(rate))
        throw ConfigError("policy_selection: strategy '" + strategy +
                          "' lacks rate " + format_double(rate));
  for (double rate : econ.acceptance_grid)
    if (!truth_abr_by_rate.count(rate))
      throw ConfigError("policy_selection: truth table lacks rate " + format_double(rate));

  Rng rng(seed);
  std::vector<PolicyRow> rows;
  for (double lgd : econ.lgd_grid) {
    Rng draw_rng = rng.child(static_cast<std::uint64_t>(std::llround(lgd * 1e6)) + 1);
    const auto draws = economics_draws(econ, draw_rng);

    for (const auto& [strategy, table] : abr_by_rate) {
      PolicyRow r;
      r.strategy = strategy;
      r.lgd = lgd;
      double best = -std::numeric_limits<double>::infinity();
      bool tie = false;
      for (double rate : econ.acceptance_grid) {
        // Volume-scaled: per-loan profit times accepted share of the
        // population, so the rate choice is nontrivial.
        const double total = rate * mean_profit(table.at(rate), draws, lgd);
        if (total > best + 1e-12) {
          best = total;
          r.chosen_rate = rate;
          tie = false;
        } else if (std::abs(total - best) <= 1e-12) {
          tie = true;  // keep the lower rate already chosen
        }
      }
      r.estimated_profit = best;
      r.tie = tie;
      r.realized_profit =
          r.chosen_rate * mean_profit(truth_abr_by_rate.at(r.chosen_rate), draws, lgd);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void write_profit_csv(const std::vector<ProfitRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_profit_csv: cannot open '" + path + "'");
  out << "method,lgd,profit,incremental_vs_baseline,expected_margin\n";
  for (const auto& r : rows)
    out << r.method << ',' << format_double(r.lgd) << ',' << format_double(r.profit) << ','
        << format_double(r.incremental_vs_baseline) << ',' << format_double(r.expected_margin)
        << '\n';
}

void write_policy_csv(const std::vector<PolicyRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_policy_csv: cannot open '" + path + "'");
  out << "strategy,lgd,chosen_rate,estimated_profit,realized_profit,tie\n";
  for (const auto& r : rows)
    out << r.strategy << ',' << format_double(r.lgd) << ',' << format_double(r.chosen_rate) << ','
        << format_double(r.estimated_profit) << ',' << format_double(r.realized_profit) << ','
        << (r.tie ? 1 : 0) << '\n';
}

}  // namespace biaslab
