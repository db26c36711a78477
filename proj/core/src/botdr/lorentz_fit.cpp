#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fibersense/botdr/botdr.hpp"

namespace fibersense::botdr {

namespace {

constexpr int kMaxIterations = 100;

struct Model {
  // Frequencies in MHz relative to the first scan point keep the normal
  // equations well conditioned.
  std::span<const double> x;
  std::span<const double> y;

  // Parameters: amplitude, center, half width at half maximum.
  double cost(const Eigen::Vector3d& p) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - p[1];
      const double r = y[k] - p[0] * p[2] * p[2] / (d * d + p[2] * p[2]);
      s += r * r;
    }
    return s;
  }

  void linearize(const Eigen::Vector3d& p, Eigen::Matrix3d& jtj, Eigen::Vector3d& jtr) const {
    jtj.setZero();
    jtr.setZero();
    const double a = p[0], c = p[1], h = p[2];
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - c;
      const double den = d * d + h * h;
      const double q = h * h / den;
      const Eigen::Vector3d g(q, 2.0 * a * h * h * d / (den * den), 2.0 * a * h * d * d / (den * den));
      const double r = y[k] - a * q;
      jtj.noalias() += g * g.transpose();
      jtr.noalias() += g * r;
    }
  }
};

struct LmResult {
  Eigen::Vector3d p;
  bool converged = false;
};

LmResult levenberg_marquardt(const Model& m, Eigen::Vector3d p) {
  double lambda = 1e-3;
  double cost = m.cost(p);
  Eigen::Matrix3d jtj;
  Eigen::Vector3d jtr;
  for (int it = 0; it < kMaxIterations; ++it) {
    m.linearize(p, jtj, jtr);
    bool improved = false;
    while (!improved) {
      Eigen::Matrix3d a = jtj;
      for (int i = 0; i < 3; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const Eigen::Vector3d step = a.ldlt().solve(jtr);
      if (!step.allFinite()) return {p, false};
      const Eigen::Vector3d trial = p + step;
      const double trial_cost = m.cost(trial);
      if (trial_cost <= cost) {
        const double gain = cost - trial_cost;
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        const bool small_step = std::abs(step[1]) < 1e-9 && std::abs(step[2]) < 1e-9 &&
                                std::abs(step[0]) < 1e-12 * std::max(1.0, std::abs(p[0]));
        if (small_step || gain <= 1e-15 * std::max(cost, 1e-300)) return {p, true};
      } else {
        lambda *= 10.0;
        // No descent direction left at any damping: a minimum has been reached.
        if (lambda > 1e12) return {p, true};
      }
    }
  }
  return {p, false};
}

// Least-squares parabola through up to five points around the maximum.
PeakFit quadratic_fit(std::span<const double> x, std::span<const double> y, std::size_t imax) {
  PeakFit f;
  f.method = FitMethod::quadratic;
  const std::size_t n = x.size();
  const std::size_t lo = imax >= 2 ? std::min(imax - 2, n - 5) : 0;
  Eigen::Matrix<double, 5, 3> a;
  Eigen::Matrix<double, 5, 1> b;
  const double x0 = x[imax];
  for (std::size_t k = 0; k < 5; ++k) {
    const double u = x[lo + k] - x0;
    a(static_cast<Eigen::Index>(k), 0) = 1.0;
    a(static_cast<Eigen::Index>(k), 1) = u;
    a(static_cast<Eigen::Index>(k), 2) = u * u;
    b(static_cast<Eigen::Index>(k)) = y[lo + k];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  if (!(c[2] < 0.0)) return f;
  const double u = -c[1] / (2.0 * c[2]);
  f.center_hz = x0 + u;
  f.amplitude = c[0] + c[1] * u + c[2] * u * u;
  f.linewidth_hz = f.amplitude > 0.0 ? 2.0 * std::sqrt(f.amplitude / (-2.0 * c[2])) : 0.0;
  f.quality = (a * c - b).norm() / std::max(b.norm(), 1e-300);
  f.valid = true;
  return f;
}

}  // namespace

PeakFit fit_peak(std::span<const double> freq_hz, std::span<const double> power) {
  PeakFit fail;
  const std::size_t n = freq_hz.size();
  if (n < 5 || power.size() != n) return fail;
  const auto [mn, mx] = std::minmax_element(power.begin(), power.end());
  if (!(*mx - *mn > 1e-12 * std::max(1.0, std::abs(*mx)))) return fail;
  const auto imax = static_cast<std::size_t>(mx - power.begin());

  const double f0 = freq_hz[0];
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = (freq_hz[k] - f0) * 1e-6;
  const double lo = x.front();
  const double hi = x.back();

  // Initial half width from the points above half maximum.
  const double half = *mn + 0.5 * (*mx - *mn);
  std::size_t above = 0;
  for (double v : power) above += v >= half ? 1 : 0;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  const double h0 = std::clamp(0.5 * static_cast<double>(above) * step, step, hi - lo);

  PeakFit f;
  const Model model{x, power};
  const LmResult lm = levenberg_marquardt(model, Eigen::Vector3d(*mx, x[imax], h0));
  if (lm.converged && lm.p[0] > 0.0 && std::abs(lm.p[2]) > 0.0) {
    f.method = FitMethod::lorentzian;
    f.amplitude = lm.p[0];
    f.center_hz = f0 + lm.p[1] * 1e6;
    f.linewidth_hz = 2.0 * std::abs(lm.p[2]) * 1e6;
    double ynorm = 0.0;
    for (double v : power) ynorm += v * v;
    f.quality = std::sqrt(model.cost(lm.p) / std::max(ynorm, 1e-300));
    f.valid = true;
  } else {
    f = quadratic_fit(x, power, imax);
    if (!f.valid) return f;
    f.center_hz = f0 + f.center_hz * 1e6;
    f.linewidth_hz *= 1e6;
  }
  if (!(f.center_hz >= freq_hz.front() && f.center_hz <= freq_hz.back())) f.valid = false;
  return f;
}

}  // namespace fibersense::botdr
