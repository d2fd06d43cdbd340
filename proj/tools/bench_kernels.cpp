// Compares the OpenMP kernels against their serial references: same inputs,
// wall time per kernel, and a check that the results agree bit for bit.
//
//   bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "biaslab/basl.hpp"
#include "biaslab/bayes.hpp"
#include "biaslab/iforest.hpp"
#include "biaslab/mmd.hpp"
#include "biaslab/parallel.hpp"
#include "biaslab/synth.hpp"

using namespace biaslab;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-22s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms, equal ? "results equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  const int threads = par::max_threads();
  std::printf("bench_kernels: %d thread(s), %d repeat(s)\n\n", threads, repeats);

  const MixtureSpec mix = default_mixture();
  const Dataset a = sample_applicants(mix, 1200, {11, 1});
  const Dataset b = sample_applicants(mix, 1200, {11, 2});

  {
    double v_serial = 0, v_parallel = 0;
    const double t_serial = time_ms([&] { v_serial = mmd_serial(a, b); }, repeats);
    par::set_max_threads(threads);
    const double t_parallel = time_ms([&] { v_parallel = mmd(a, b); }, repeats);
    report("mmd", t_serial, t_parallel, v_serial == v_parallel);
  }

  {
    const Dataset train = sample_applicants(mix, 20000, {11, 3});
    FitOptions opts;
    opts.gbt = {60, 3, 0.1, 1.0, 0.8};
    opts.seed = {11, 4};
    Scorecard m_serial, m_parallel;
    par::set_max_threads(1);
    const double t_serial = time_ms([&] { m_serial = fit_gbt(train, opts); }, repeats);
    par::set_max_threads(threads);
    const double t_parallel = time_ms([&] { m_parallel = fit_gbt(train, opts); }, repeats);
    const auto p1 = predict_proba(m_serial, a);
    const auto p2 = predict_proba(m_parallel, a);
    report("gbt fit", t_serial, t_parallel, p1 == p2);
  }

  {
    const Dataset train = sample_applicants(mix, 8000, {11, 5});
    std::vector<double> s_serial, s_parallel;
    par::set_max_threads(1);
    const double t_serial = time_ms(
        [&] { s_serial = novelty_scores(fit_isolation_forest(train, 100, 256, {11, 6}), a); },
        repeats);
    par::set_max_threads(threads);
    const double t_parallel = time_ms(
        [&] { s_parallel = novelty_scores(fit_isolation_forest(train, 100, 256, {11, 6}), a); },
        repeats);
    report("isolation forest", t_serial, t_parallel, s_serial == s_parallel);
  }

  {
    Dataset accepts = sample_applicants(mix, 1500, {11, 7});
    Dataset rejects = sample_applicants(mix, 1500, {11, 8}).without_labels();
    FitOptions opts;
    opts.gbt = {60, 3, 0.1, 1.0, 1.0};
    opts.seed = {11, 9};
    const Scorecard f = fit_gbt(accepts, opts);
    const Prior prior = build_prior(rejects, f);
    BayesConfig bc;
    bc.j_max = 400;
    bc.epsilon = 1e-9;  // force the full budget so the timing is stable
    bc.seed = {11, 10};
    double v_serial = 0, v_parallel = 0;
    par::set_max_threads(1);
    const double t_serial = time_ms(
        [&] {
          v_serial =
              bayesian_metric(f, accepts, rejects, prior, MetricSpec::abr(), bc).value;
        },
        repeats);
    par::set_max_threads(threads);
    const double t_parallel = time_ms(
        [&] {
          v_parallel =
              bayesian_metric(f, accepts, rejects, prior, MetricSpec::abr(), bc).value;
        },
        repeats);
    report("bayesian metric", t_serial, t_parallel, v_serial == v_parallel);
  }

  par::set_max_threads(threads);
  return 0;
}
