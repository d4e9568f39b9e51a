#include "halosim/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "halosim/common.hpp"

namespace halosim {

void BoundInputs::validate() const {
  if (!(f0_minus_fstar >= 0.0))
    fail(Errc::invalid_argument, "bound: f0_minus_fstar must be >= 0");
  if (!(eta_min > 0.0)) fail(Errc::invalid_argument, "bound: eta_min must be > 0");
  if (!(eta0 >= eta_min))
    fail(Errc::invalid_argument, "bound: eta0 must be >= eta_min");
  if (steps < 1) fail(Errc::invalid_argument, "bound: steps must be >= 1");
  if (!(beta_g > 0.0 && beta_g < 1.0))
    fail(Errc::invalid_argument, "bound: beta_g must be strictly inside (0,1)");
  if (!(beta_l > 0.0 && beta_l < 1.0))
    fail(Errc::invalid_argument, "bound: beta_l must be strictly inside (0,1)");
  if (!(smoothness > 0.0))
    fail(Errc::invalid_argument, "bound: smoothness must be > 0");
  if (!(grad_bound >= 0.0))
    fail(Errc::invalid_argument, "bound: grad_bound must be >= 0");
  if (!(sigma2 >= 0.0) || !(dg2 >= 0.0) || !(dl2 >= 0.0))
    fail(Errc::invalid_argument, "bound: variances must be >= 0");
}

double theorem_bound(const BoundInputs& b, bool squared_variant) {
  b.validate();
  const double one_minus_bg = 1.0 - b.beta_g;
  const double term1 = 4.0 * b.f0_minus_fstar /
                       (b.eta_min * static_cast<double>(b.steps)) *
                       (1.0 + 1.0 / one_minus_bg);
  const double prefac = (b.eta0 / b.eta_min) *
                        (1.0 / (b.beta_g * b.beta_g * b.beta_g)) *
                        (3.0 + 12.0 * b.smoothness * b.eta0 +
                         6.0 * b.smoothness * b.eta0 /
                             (one_minus_bg * one_minus_bg));
  const double bg_den =
      squared_variant ? 1.0 - b.beta_g * b.beta_g : one_minus_bg;
  const double noise = b.grad_bound * b.sigma2 / ((1.0 - b.beta_l) * bg_den) +
                       b.smoothness * b.smoothness * b.dg2 +
                       b.smoothness * b.smoothness * b.dl2;
  return term1 + prefac * noise;
}

double beta_g_tradeoff(double x) {
  if (!(x > 0.0 && x < 1.0))
    fail(Errc::invalid_argument, "beta_g_tradeoff: x must be inside (0,1)");
  const double a = x * x * x;
  const double c = (1.0 - x) * (1.0 - x) * (1.0 - x);
  return 1.0 / (a * c);
}

namespace {

std::optional<double> crossing(const std::vector<LossSample>& losses,
                               double target, bool on_samples) {
  if (losses.empty()) return std::nullopt;
  auto axis = [&](const LossSample& s) { return on_samples ? s.samples : s.t; };
  if (losses.front().loss <= target) return axis(losses.front());
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if (losses[i].loss <= target) {
      const double l0 = losses[i - 1].loss;
      const double l1 = losses[i].loss;
      const double x0 = axis(losses[i - 1]);
      const double x1 = axis(losses[i]);
      if (l0 == l1) return x1;
      const double frac = (l0 - target) / (l0 - l1);
      return x0 + frac * (x1 - x0);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> time_to_loss(const RunReport& report, double target) {
  if (report.diverged) return std::nullopt;
  return crossing(report.losses, target, false);
}

std::optional<double> samples_to_loss(const RunReport& report, double target) {
  if (report.diverged) return std::nullopt;
  return crossing(report.losses, target, true);
}

SweepSummary summarize_sweep(const std::string& axis,
                             const std::vector<std::string>& values,
                             const std::vector<RunReport>& reports,
                             double target_loss) {
  if (values.size() != reports.size())
    fail(Errc::invalid_argument, "sweep: values/reports size mismatch");
  SweepSummary s;
  s.axis = axis;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    row.final_loss = reports[i].final_loss;
    row.diverged = reports[i].diverged;
    row.time_to_loss_s = time_to_loss(reports[i], target_loss);
    row.samples_to_loss = samples_to_loss(reports[i], target_loss);
    s.rows.push_back(std::move(row));
    if (!reports[i].diverged &&
        (s.argmin < 0 ||
         reports[i].final_loss <
             s.rows[static_cast<std::size_t>(s.argmin)].final_loss))
      s.argmin = static_cast<int>(i);
  }
  return s;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", *v);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_sweep_csv(const std::string& path, const SweepSummary& summary) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) fail(Errc::io, "sweep csv: cannot open " + tmp);
    os << "axis,value,final_loss,time_to_loss,tokens_to_loss,diverged\n";
    for (const SweepRow& r : summary.rows) {
      os << summary.axis << ',' << r.value << ',' << fmt(r.final_loss) << ','
         << fmt_opt(r.time_to_loss_s) << ',' << fmt_opt(r.samples_to_loss)
         << ',' << (r.diverged ? 1 : 0) << '\n';
    }
    if (!os) fail(Errc::io, "sweep csv: write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(Errc::io, "sweep csv: rename failed for " + path);
}

}  // namespace halosim
