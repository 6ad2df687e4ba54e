#pragma once

// Finite-support probability distributions: the probability monad used by
// every stochastic part of the library (transitions, policies, optic forward
// passes, environment resets).

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "catrl/errors.hpp"
#include "catrl/rng.hpp"

namespace catrl {

// The monoidal unit: a one-element set.
struct Unit {
  friend constexpr bool operator==(Unit, Unit) { return true; }
};

// Weights of a valid distribution must sum to 1 within this tolerance.
inline constexpr double kNormalizationTolerance = 1e-9;

// Convex spaces (Eilenberg-Moore algebras of the distribution monad) in scope
// are the reals and real vectors; a convex combination is Σ wᵢ·xᵢ.
template <class T>
concept Convex = std::copyable<T> && requires(const T& a, const T& b, double w) {
  { w * a } -> std::convertible_to<T>;
  { a + b } -> std::convertible_to<T>;
};

// Whether equal values of T can be detected and merged. Pairs are checked
// componentwise because std::pair declares operator== unconditionally.
template <class T>
struct Mergeable : std::bool_constant<std::equality_comparable<T>> {};
template <class A, class B>
struct Mergeable<std::pair<A, B>>
    : std::bool_constant<Mergeable<A>::value && Mergeable<B>::value> {};

template <class T>
struct Atom {
  T value;
  double weight;
};

template <class T>
class FiniteDist {
 public:
  using value_type = T;

  // Merges equal values (first-occurrence order; values without equality
  // stay separate atoms), drops zero weights and
  // checks normalization. Throws DomainError on negative weights, an empty
  // support, or a total weight away from 1.
  explicit FiniteDist(std::vector<Atom<T>> atoms) {
    atoms_.reserve(atoms.size());
    double total = 0.0;
    for (auto& atom : atoms) {
      if (!(atom.weight >= 0.0) || !std::isfinite(atom.weight)) {
        throw DomainError("FiniteDist: weights must be finite and >= 0");
      }
      total += atom.weight;
      if (atom.weight == 0.0) continue;
      add(std::move(atom.value), atom.weight);
    }
    if (atoms_.empty()) throw DomainError("FiniteDist: empty support");
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw DomainError("FiniteDist: weights sum to " + std::to_string(total));
    }
  }

  static FiniteDist dirac(T x) { return FiniteDist({{std::move(x), 1.0}}); }

  static FiniteDist uniform(std::vector<T> xs) {
    if (xs.empty()) throw DomainError("FiniteDist::uniform: empty support");
    const double w = 1.0 / static_cast<double>(xs.size());
    std::vector<Atom<T>> atoms;
    atoms.reserve(xs.size());
    for (auto& x : xs) atoms.push_back({std::move(x), w});
    return FiniteDist(std::move(atoms));
  }

  const std::vector<Atom<T>>& support() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

  // Probability of x; zero outside the support.
  double weight_of(const T& x) const {
    for (const auto& atom : atoms_) {
      if (atom.value == x) return atom.weight;
    }
    return 0.0;
  }

  bool contains(const T& x) const {
    for (const auto& atom : atoms_) {
      if (atom.value == x) return true;
    }
    return false;
  }

  // Equal as measures: same support and weights, order ignored.
  friend bool operator==(const FiniteDist& a, const FiniteDist& b) {
    if (a.size() != b.size()) return false;
    for (const auto& atom : a.atoms_) {
      if (!b.contains(atom.value) || b.weight_of(atom.value) != atom.weight) {
        return false;
      }
    }
    return true;
  }

 private:
  void add(T&& x, double w) {
    if constexpr (Mergeable<T>::value) {
      for (auto& atom : atoms_) {
        if (atom.value == x) {
          atom.weight += w;
          return;
        }
      }
    }
    atoms_.push_back({std::move(x), w});
  }

  std::vector<Atom<T>> atoms_;
};

template <class T>
FiniteDist<T> dirac(T x) {
  return FiniteDist<T>::dirac(std::move(x));
}

// Kleisli extension: weights of equal results are summed.
template <class T, class K>
auto bind(const FiniteDist<T>& d, K&& k) {
  using U = typename std::decay_t<std::invoke_result_t<K&, const T&>>::value_type;
  std::vector<Atom<U>> atoms;
  for (const auto& outer : d) {
    const FiniteDist<U> inner = k(outer.value);
    for (const auto& atom : inner) {
      atoms.push_back({atom.value, outer.weight * atom.weight});
    }
  }
  return FiniteDist<U>(std::move(atoms));
}

template <class T, class F>
auto pushforward(const FiniteDist<T>& d, F&& f) {
  using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
  std::vector<Atom<U>> atoms;
  atoms.reserve(d.size());
  for (const auto& atom : d) atoms.push_back({f(atom.value), atom.weight});
  return FiniteDist<U>(std::move(atoms));
}

inline double expectation(const FiniteDist<double>& d) {
  double sum = 0.0;
  for (const auto& atom : d) sum += atom.weight * atom.value;
  return sum;
}

// 𝔼[f(x)] for f valued in a convex space, summed in support order.
template <class T, class F>
  requires Convex<std::decay_t<std::invoke_result_t<F&, const T&>>>
auto expect(const FiniteDist<T>& d, F&& f) {
  using V = std::decay_t<std::invoke_result_t<F&, const T&>>;
  auto it = d.begin();
  V acc = it->weight * f(it->value);
  for (++it; it != d.end(); ++it) acc = acc + it->weight * f(it->value);
  return acc;
}

template <Convex V>
V convex_combination(const std::vector<Atom<V>>& terms) {
  if (terms.empty()) throw DomainError("convex_combination: no terms");
  V acc = terms.front().weight * terms.front().value;
  for (std::size_t i = 1; i < terms.size(); ++i) {
    acc = acc + terms[i].weight * terms[i].value;
  }
  return acc;
}

// Inverse CDF over the canonical support order at uniform u in [0, 1).
template <class T>
const T& sample_at(const FiniteDist<T>& d, double u) {
  double cumulative = 0.0;
  for (const auto& atom : d) {
    cumulative += atom.weight;
    if (u < cumulative) return atom.value;
  }
  return d.support().back().value;
}

// Consumes exactly one uniform from rng.
template <class T>
std::pair<T, RngState> sample(const FiniteDist<T>& d, RngState rng) {
  const auto [u, next] = rng.next_uniform();
  return {sample_at(d, u), next};
}

// Conditional distributions of a joint, indexed by the marginal's support.
template <class M, class T>
class Conditional {
 public:
  explicit Conditional(std::vector<std::pair<M, FiniteDist<T>>> table)
      : table_(std::move(table)) {}

  const FiniteDist<T>& operator()(const M& m) const {
    for (const auto& [key, dist] : table_) {
      if (key == m) return dist;
    }
    throw DomainError("conditional queried outside the marginal support");
  }

 private:
  std::vector<std::pair<M, FiniteDist<T>>> table_;
};

template <class M, class T>
struct Disintegration {
  FiniteDist<M> marginal;
  Conditional<M, T> conditional;
};

template <class M, class T>
Disintegration<M, T> marginal_and_condition(const FiniteDist<std::pair<M, T>>& d) {
  std::vector<M> keys;
  std::vector<double> mass;
  std::vector<std::vector<Atom<T>>> rows;
  for (const auto& atom : d) {
    const auto& [m, x] = atom.value;
    std::size_t i = 0;
    while (i < keys.size() && !(keys[i] == m)) ++i;
    if (i == keys.size()) {
      keys.push_back(m);
      mass.push_back(0.0);
      rows.emplace_back();
    }
    mass[i] += atom.weight;
    rows[i].push_back({x, atom.weight});
  }
  std::vector<Atom<M>> marginal;
  std::vector<std::pair<M, FiniteDist<T>>> table;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    marginal.push_back({keys[i], mass[i]});
    for (auto& atom : rows[i]) atom.weight /= mass[i];
    table.emplace_back(keys[i], FiniteDist<T>(std::move(rows[i])));
  }
  return {FiniteDist<M>(std::move(marginal)),
          Conditional<M, T>(std::move(table))};
}

// Same support, weights within tol, order ignored.
template <class T>
bool approx_equal(const FiniteDist<T>& a, const FiniteDist<T>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& atom : a) {
    if (!b.contains(atom.value)) return false;
    if (std::abs(b.weight_of(atom.value) - atom.weight) > tol) return false;
  }
  return true;
}

}  // namespace catrl
