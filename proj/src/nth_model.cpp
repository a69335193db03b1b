#include "mlo/nth_model.hpp"

#include "mlo/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace mlo {
namespace {

// sum over v in [0, B) of |u - v|
double abs_sum(long u, long B) {
  if (u < B)
    return 0.5 * static_cast<double>(u) * (u + 1) + 0.5 * static_cast<double>(B - u) * (B - u - 1);
  return static_cast<double>(B) * u - 0.5 * static_cast<double>(B) * (B - 1);
}

// E|U - V|, U ~ U[0, A), V ~ U[0, B)
double mean_abs_diff(long A, long B) {
  double s = 0.0;
  for (long u = 0; u < A; ++u) s += abs_sum(u, B);
  return s / (static_cast<double>(A) * B);
}

} // namespace

double expected_counter_gap(const BackoffParams& backoff, double p) {
  backoff.validate();
  if (!(p >= 0.0 && p < 1.0)) throw ModelError("n_th: p must be in [0, 1)");
  const int m = backoff.m;
  std::vector<double> pi(m + 1);
  double pw = 1.0;
  for (int i = 0; i < m; ++i, pw *= p) pi[i] = pw;
  pi[m] = pw / (1.0 - p);
  double norm = 0.0;
  for (double v : pi) norm += v;
  for (double& v : pi) v /= norm;

  double gap = 0.0;
  for (int i = 0; i <= m; ++i) {
    if (pi[i] == 0.0) continue;
    for (int j = 0; j <= m; ++j) {
      if (pi[j] == 0.0) continue;
      gap += pi[i] * pi[j] * mean_abs_diff(backoff.window(i), backoff.window(j));
    }
  }
  return gap;
}

NthModel NthModel::constant(double c) {
  if (!(c >= 0.0)) throw ModelError("n_th constant must be >= 0");
  NthModel n;
  n.mode_ = Mode::constant;
  n.a_ = c;
  n.label_ = fmt::format("constant({})", c);
  return n;
}

NthModel NthModel::affine(double a, double b) {
  if (!(a >= 0.0 && a + b >= 0.0)) throw ModelError("n_th affine model must be >= 0 on [0, 1)");
  NthModel n;
  n.mode_ = Mode::affine;
  n.a_ = a;
  n.b_ = b;
  n.label_ = fmt::format("affine({}, {})", a, b);
  return n;
}

NthModel NthModel::table(std::vector<double> values, double step) {
  if (values.empty() || !(step > 0.0)) throw ModelError("n_th table needs values and step > 0");
  if (std::any_of(values.begin(), values.end(), [](double v) { return !(v >= 0.0); }))
    throw ModelError("n_th table values must be >= 0");
  NthModel n;
  n.mode_ = Mode::table;
  n.values_ = std::move(values);
  n.step_ = step;
  n.label_ = fmt::format("table({} pts, step {})", n.values_.size(), step);
  return n;
}

NthModel NthModel::enumerated(const BackoffParams& backoff) {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = expected_counter_gap(backoff, i * 0.01);
  NthModel n = table(std::move(v), 0.01);
  n.label_ = fmt::format("enumerated(w0={}, m={})", backoff.w0, backoff.m);
  return n;
}

double NthModel::operator()(double p) const {
  switch (mode_) {
  case Mode::constant:
    return a_;
  case Mode::affine:
    return std::max(0.0, a_ + b_ * p);
  case Mode::table: {
    if (p <= 0.0) return values_.front();
    const double x = p / step_;
    const auto i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= values_.size()) return values_.back();
    const double t = x - static_cast<double>(i);
    return (1.0 - t) * values_[i] + t * values_[i + 1];
  }
  }
  return 0.0;
}

std::string NthModel::describe() const { return label_; }

} // namespace mlo
