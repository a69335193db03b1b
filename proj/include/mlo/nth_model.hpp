#pragma once

#include "mlo/params.hpp"

#include <string>
#include <vector>

namespace mlo {

/// Average gap between the two backoff counters of an MLD, as a function of
/// the collision probability.
class NthModel {
public:
  enum class Mode { constant, affine, table };

  static NthModel constant(double c);
  static NthModel affine(double a, double b);
  /// Grid p = 0, step, 2*step, ... with linear interpolation; p beyond the
  /// last node uses the last value.
  static NthModel table(std::vector<double> values, double step);
  /// Exact E|U1 - U2| for two independent links, each with stage I drawn from
  /// the stationary stage law (proportional to s_i(p)) and U uniform on
  /// [0, W_I - 1]. Tabulated on p = 0..0.99 in steps of 0.01.
  static NthModel enumerated(const BackoffParams& backoff);

  double operator()(double p) const;
  Mode mode() const { return mode_; }
  std::string describe() const;

private:
  Mode mode_ = Mode::constant;
  double a_ = 0, b_ = 0;
  double step_ = 0.01;
  std::vector<double> values_;
  std::string label_;
};

/// Single enumeration point used to fill the default table.
double expected_counter_gap(const BackoffParams& backoff, double p);

} // namespace mlo
