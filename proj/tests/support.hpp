#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "tradeoff/market.hpp"

namespace testing {

using tradeoff::Index;
using tradeoff::Market;
using tradeoff::Matrix;
using tradeoff::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// Two-state market: payoffs {0.5, 1 + alpha} with probabilities {0.45, 0.55}, R = 1, price 1.
inline Market f1(double alpha = 1.0) {
  Matrix payoffs(2, 1);
  payoffs << 0.5, 1.0 + alpha;
  return Market(1.0, Vector::Ones(1), payoffs, vec({0.45, 0.55}));
}

/// Sigma = diag(1, 4), E[S1] = (1, 2), prices (1, 1), R = 1.
inline Market f2() {
  Matrix payoffs(4, 2);
  payoffs << 2, 4,
             2, 0,
             0, 4,
             0, 0;
  return Market(1.0, Vector::Ones(2), payoffs, Vector::Constant(4, 0.25));
}

inline Market dominating() {
  Matrix payoffs(2, 1);
  payoffs << 1.0, 3.0;
  return Market(1.0, Vector::Ones(1), payoffs, vec({0.5, 0.5}));
}

/// Fair game: every asset's expected payoff equals R times its price, and no combination
/// of the two assets is riskless.
inline Market fair_game() {
  Matrix payoffs(3, 2);
  payoffs << 0.5, 1.0,
             1.5, 0.5,
             1.0, 1.5;
  return Market(1.0, Vector::Ones(2), payoffs, Vector::Constant(3, 1.0 / 3.0));
}

/// Random market with positive payoffs; not necessarily free of pathologies.
inline Market random_market(std::mt19937_64& rng, Index states, Index assets) {
  std::uniform_real_distribution<double> payoff(0.2, 3.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::uniform_real_distribution<double> price(0.5, 1.5);
  std::uniform_real_distribution<double> rate(0.95, 1.1);
  Matrix s1(states, assets);
  for (Index i = 0; i < states; ++i) {
    for (Index j = 0; j < assets; ++j) s1(i, j) = payoff(rng);
  }
  Vector p(states);
  for (Index i = 0; i < states; ++i) p(i) = weight(rng);
  p /= p.sum();
  Vector s0(assets);
  for (Index j = 0; j < assets; ++j) s0(j) = price(rng);
  return Market(rate(rng), s0, s1, p);
}

/// Random all-clear market: prices are set from a strictly positive pricing kernel, so there
/// is no arbitrage, and states >= assets + 1 with generic payoffs gives full rank.
inline Market random_clear_market(std::mt19937_64& rng, Index states, Index assets) {
  if (states <= assets) throw std::invalid_argument("an all-clear market needs more states than assets");
  std::uniform_real_distribution<double> payoff(0.2, 3.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::uniform_real_distribution<double> rate(0.97, 1.08);
  std::uniform_real_distribution<double> tilt(0.6, 1.4);
  for (;;) {
    Matrix s1(states, assets);
    for (Index i = 0; i < states; ++i) {
      for (Index j = 0; j < assets; ++j) s1(i, j) = payoff(rng);
    }
    Vector p(states);
    for (Index i = 0; i < states; ++i) p(i) = weight(rng);
    p /= p.sum();
    Vector q(states);
    for (Index i = 0; i < states; ++i) q(i) = p(i) * tilt(rng);
    q /= q.sum();
    const double R = rate(rng);
    const Vector s0 = s1.transpose() * q / R;
    Market m(R, s0, s1, p);
    if (tradeoff::detect_nontrivial_riskless(m).all_clear()) return m;
  }
}

/// Golden-section maximization of a unimodal function on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace testing
