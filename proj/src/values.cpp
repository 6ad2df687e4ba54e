#include "catrl/values.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace catrl {

ValueFn operator+(const ValueFn& a, const ValueFn& b) {
  assert(a.v_.size() == b.v_.size());
  ValueFn out = a;
  for (std::size_t i = 0; i < out.v_.size(); ++i) out.v_[i] += b.v_[i];
  return out;
}

ValueFn operator-(const ValueFn& a, const ValueFn& b) {
  assert(a.v_.size() == b.v_.size());
  ValueFn out = a;
  for (std::size_t i = 0; i < out.v_.size(); ++i) out.v_[i] -= b.v_[i];
  return out;
}

ValueFn operator*(double w, const ValueFn& a) {
  ValueFn out = a;
  for (double& x : out.v_) x *= w;
  return out;
}

double sup_norm(const ValueFn& v) {
  double m = 0.0;
  for (double x : v.values()) m = std::max(m, std::abs(x));
  return m;
}

double sup_distance(const ValueFn& a, const ValueFn& b) { return sup_norm(a - b); }

QTable operator+(const QTable& a, const QTable& b) {
  assert(a.q_.size() == b.q_.size());
  QTable out = a;
  for (std::size_t i = 0; i < out.q_.size(); ++i) out.q_[i] += b.q_[i];
  return out;
}

QTable operator*(double w, const QTable& a) {
  QTable out = a;
  for (double& x : out.q_) x *= w;
  return out;
}

double max_abs_difference(const QTable& a, const QTable& b) {
  assert(a.data().size() == b.data().size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

}  // namespace catrl
