#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halosim/report.hpp"

namespace halosim {

struct BoundInputs {
  double f0_minus_fstar = 0.0;  // F(theta_0) - F(theta*)
  double eta0 = 0.0;            // largest learning rate
  double eta_min = 0.0;         // smallest learning rate
  long steps = 1;               // horizon T
  double beta_g = 0.5;
  double beta_l = 0.9;
  double smoothness = 1.0;      // L
  double grad_bound = 0.0;      // G
  double sigma2 = 0.0;          // LPS-to-GPS heterogeneity variance
  double dg2 = 0.0;             // squared global staleness bound
  double dl2 = 0.0;             // squared local staleness bound

  void validate() const;
};

// Convergence-rate right-hand side:
//   4(F0-F*)/(eta_min T) (1 + 1/(1-beta_g))
// + (eta0/eta_min)(1/beta_g^3)(3 + 12 L eta0 + 6 L eta0/(1-beta_g)^2)
//   * (G sigma^2/((1-beta_l)(1-beta_g)) + L^2 Dg^2 + L^2 Dl^2)
// With squared_variant the G sigma^2 denominator uses (1-beta_g^2), the
// form appearing in the derivation's intermediate steps.
double theorem_bound(const BoundInputs& b, bool squared_variant = false);

// 1/(x^3 (1-x)^3): the global-momentum trade-off, minimized at x = 1/2.
double beta_g_tradeoff(double x);

// First simulated time (resp. sample count) at which the full-objective
// loss reaches `target`, linearly interpolated between samples. Empty when
// the run diverged or never reached the target.
std::optional<double> time_to_loss(const RunReport& report, double target);
std::optional<double> samples_to_loss(const RunReport& report, double target);

struct SweepRow {
  std::string value;
  double final_loss = 0.0;
  std::optional<double> time_to_loss_s;
  std::optional<double> samples_to_loss;
  bool diverged = false;
};

struct SweepSummary {
  std::string axis;
  std::vector<SweepRow> rows;
  int argmin = -1;  // row with the best final loss; -1 if all diverged
};

SweepSummary summarize_sweep(const std::string& axis,
                             const std::vector<std::string>& values,
                             const std::vector<RunReport>& reports,
                             double target_loss);

// CSV with the fixed header axis,value,final_loss,time_to_loss,
// tokens_to_loss,diverged. Unreached targets serialize as empty fields.
void write_sweep_csv(const std::string& path, const SweepSummary& summary);

}  // namespace halosim
