// Copyright 2026 The Rumax Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rumax/errors.hpp"

namespace rumax {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

enum class UtilityDomain { Positive, Real };

// Concave non-decreasing utilities. The catalog covers the analytic shapes
// the solvers and reports need; arbitrary concave piecewise-linear functions
// are first-class because the exact optimizer works on them.
//
// Domain-positive specs value x < 0 at -infinity and x = 0 at the right
// limit (upper semicontinuity). No normalisation such as U(0) = 0 is baked
// in; the solvers are invariant to additive shifts and tests pin that down.
class UtilitySpec {
 public:
  enum class Kind { CappedSqrt, Log, Power, NegExp, LinearCap, PiecewiseLinear };

  static UtilitySpec capped_sqrt(double cap) {
    UtilitySpec u(Kind::CappedSqrt, UtilityDomain::Positive);
    u.a_ = cap;
    if (!(cap > 0)) throw BadUtilitySpec("capped_sqrt needs cap > 0");
    return u;
  }
  static UtilitySpec log_utility() { return UtilitySpec(Kind::Log, UtilityDomain::Positive); }
  static UtilitySpec power(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadUtilitySpec("power needs alpha in (0,1)");
    UtilitySpec u(Kind::Power, UtilityDomain::Positive);
    u.a_ = alpha;
    return u;
  }
  static UtilitySpec neg_exp(double rate) {
    if (!(rate > 0.0)) throw BadUtilitySpec("neg_exp needs rate > 0");
    UtilitySpec u(Kind::NegExp, UtilityDomain::Real);
    u.a_ = rate;
    return u;
  }
  static UtilitySpec linear_cap(double slope, double cap) {
    if (!(slope > 0.0)) throw BadUtilitySpec("linear_cap needs slope > 0");
    UtilitySpec u(Kind::LinearCap, UtilityDomain::Real);
    u.a_ = slope;
    u.b_ = cap;
    return u;
  }
  // Breakpoints (x_i, y_i), strictly increasing in x, concave and
  // non-decreasing; extended beyond the ends with the boundary slopes.
  static UtilitySpec piecewise_linear(std::vector<std::pair<double, double>> pts,
                                      UtilityDomain domain = UtilityDomain::Real) {
    if (pts.size() < 2) throw BadUtilitySpec("piecewise_linear needs >= 2 points");
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i].first > pts[i - 1].first))
        throw BadUtilitySpec("piecewise_linear x must be strictly increasing");
    double prev_slope = kPosInf;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      double s = (pts[i].second - pts[i - 1].second) / (pts[i].first - pts[i - 1].first);
      if (s < -1e-12) throw BadUtilitySpec("piecewise_linear must be non-decreasing");
      if (s > prev_slope + 1e-12) throw BadUtilitySpec("piecewise_linear must be concave");
      prev_slope = s;
    }
    UtilitySpec u(Kind::PiecewiseLinear, domain);
    u.pts_ = std::move(pts);
    return u;
  }

  Kind kind() const { return kind_; }
  UtilityDomain domain() const { return domain_; }
  const std::vector<std::pair<double, double>>& breakpoints() const { return pts_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }

  // U(x); -infinity is an ordinary value outside the domain.
  double operator()(double x) const {
    if (domain_ == UtilityDomain::Positive && x < 0.0) return kNegInf;
    switch (kind_) {
      case Kind::CappedSqrt:
        return std::min(std::sqrt(std::max(x, 0.0)), a_);
      case Kind::Log:
        return x > 0.0 ? std::log(x) : kNegInf;  // right limit at 0 is -inf
      case Kind::Power:
        return std::pow(std::max(x, 0.0), a_);
      case Kind::NegExp:
        return -std::exp(-a_ * x);
      case Kind::LinearCap:
        return std::min(a_ * x, b_);
      case Kind::PiecewiseLinear:
        return pl_value(x);
    }
    return kNegInf;
  }

  // A supergradient (canonically the right derivative, which settles ties
  // at kinks deterministically). Only defined on the interior of the domain.
  double supergradient(double x) const {
    if (domain_ == UtilityDomain::Positive && !(x > 0.0))
      throw OutsideDomain("supergradient at x = " + std::to_string(x));
    switch (kind_) {
      case Kind::CappedSqrt:
        return std::sqrt(x) >= a_ ? 0.0 : 0.5 / std::sqrt(x);
      case Kind::Log:
        return 1.0 / x;
      case Kind::Power:
        return a_ * std::pow(x, a_ - 1.0);
      case Kind::NegExp:
        return a_ * std::exp(-a_ * x);
      case Kind::LinearCap:
        return a_ * x >= b_ ? 0.0 : a_;
      case Kind::PiecewiseLinear:
        return pl_right_slope(x);
    }
    return 0.0;
  }

  // Whether U(+infinity) is finite.
  bool bounded_above() const {
    switch (kind_) {
      case Kind::CappedSqrt:
      case Kind::NegExp:
      case Kind::LinearCap:
        return true;
      case Kind::Log:
      case Kind::Power:
        return false;
      case Kind::PiecewiseLinear:
        return last_slope() <= 0.0;
    }
    return false;
  }

  double upper_bound() const {  // sup U, +inf when unbounded
    switch (kind_) {
      case Kind::CappedSqrt:
        return a_;
      case Kind::NegExp:
        return 0.0;
      case Kind::LinearCap:
        return b_;
      case Kind::PiecewiseLinear:
        return bounded_above() ? pts_.back().second : kPosInf;
      default:
        return kPosInf;
    }
  }

  double first_slope() const {
    return (pts_[1].second - pts_[0].second) / (pts_[1].first - pts_[0].first);
  }
  double last_slope() const {
    std::size_t n = pts_.size();
    return (pts_[n - 1].second - pts_[n - 2].second) /
           (pts_[n - 1].first - pts_[n - 2].first);
  }

 private:
  UtilitySpec(Kind kind, UtilityDomain domain) : kind_(kind), domain_(domain) {}

  double pl_value(double x) const {
    if (x <= pts_.front().first)
      return pts_.front().second + first_slope() * (x - pts_.front().first);
    if (x >= pts_.back().first)
      return pts_.back().second + last_slope() * (x - pts_.back().first);
    auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    double s = (hi.second - lo.second) / (hi.first - lo.first);
    return lo.second + s * (x - lo.first);
  }

  double pl_right_slope(double x) const {
    if (x < pts_.front().first) return first_slope();
    if (x >= pts_.back().first) return last_slope();
    auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return (hi.second - lo.second) / (hi.first - lo.first);
  }

  Kind kind_;
  UtilityDomain domain_;
  double a_ = 0.0, b_ = 0.0;
  std::vector<std::pair<double, double>> pts_;
};

// Checks U(x) <= C (x^alpha + 1) on the grid and against the analytic
// asymptote of the catalog kinds.
inline bool check_growth(const UtilitySpec& u, double C, double alpha,
                         const std::vector<double>& grid) {
  if (!(C > 0.0) || alpha < 0.0 || alpha >= 1.0) return false;
  for (double x : grid) {
    if (x < 0.0) continue;
    double ux = u(x);
    if (ux > C * (std::pow(x, alpha) + 1.0) + 1e-12) return false;
  }
  switch (u.kind()) {
    case UtilitySpec::Kind::CappedSqrt:
    case UtilitySpec::Kind::LinearCap:
    case UtilitySpec::Kind::NegExp:
      // bounded above: for alpha > 0 the bound eventually dominates, for
      // alpha = 0 it must clear the supremum
      return alpha > 0.0 || u.upper_bound() <= 2.0 * C + 1e-12;
    case UtilitySpec::Kind::Log:
      return alpha > 0.0;
    case UtilitySpec::Kind::Power:
      return u.param_a() < alpha || (u.param_a() == alpha && C >= 1.0 - 1e-12);
    case UtilitySpec::Kind::PiecewiseLinear:
      if (u.last_slope() > 1e-15) return false;  // linear tail beats any sublinear bound
      return alpha > 0.0 || u.upper_bound() <= 2.0 * C + 1e-12;
  }
  return false;
}

// Analytic (C, alpha) witnesses per catalog kind, when one exists.
inline std::optional<std::pair<double, double>> growth_certificate(const UtilitySpec& u) {
  switch (u.kind()) {
    case UtilitySpec::Kind::CappedSqrt:
    case UtilitySpec::Kind::LinearCap:
    case UtilitySpec::Kind::NegExp:
    case UtilitySpec::Kind::PiecewiseLinear: {
      if (!u.bounded_above()) return std::nullopt;
      double c = std::max(u.upper_bound() / 2.0, 0.5);
      return std::make_pair(c, 0.0);
    }
    case UtilitySpec::Kind::Log:
      return std::make_pair(2.0, 0.5);
    case UtilitySpec::Kind::Power:
      return std::make_pair(1.0, u.param_a());
  }
  return std::nullopt;
}

struct PlApproximation {
  UtilitySpec pl;
  double max_gap = 0.0;  // max of U - PL over a 10x refined grid of the points
};

// Chord interpolation of U through the given points. Concavity makes it an
// under-approximation on [points.front(), points.back()].
inline PlApproximation pl_under_approximation(const UtilitySpec& u,
                                              const std::vector<double>& points) {
  if (points.size() < 2) throw BadUtilitySpec("need at least 2 interpolation points");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(points.size());
  for (double x : points) {
    double ux = u(x);
    if (!std::isfinite(ux)) throw PointsOutsideDomain("U(" + std::to_string(x) + ") not finite");
    if (!pts.empty() && !(x > pts.back().first))
      throw BadUtilitySpec("interpolation points must be strictly increasing");
    pts.emplace_back(x, ux);
  }
  PlApproximation out{UtilitySpec::piecewise_linear(pts, u.domain()), 0.0};
  if (u.kind() == UtilitySpec::Kind::PiecewiseLinear) {
    // Interpolating a PL function reproduces it between points only if the
    // points include its kinks; measure the gap the same way regardless.
  }
  const int refine = 10;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    for (int k = 0; k <= refine; ++k) {
      double x = pts[i].first + (pts[i + 1].first - pts[i].first) * k / refine;
      double gap = u(x) - out.pl(x);
      if (std::isfinite(gap)) out.max_gap = std::max(out.max_gap, gap);
    }
  }
  return out;
}

// Parses the CLI utility grammar:
//   capped_sqrt:cap=2 | log | power:alpha=0.5 | neg_exp:rate=1
//   linear_cap:slope=1,cap=1 | pl:0:0,1:1,4:2,5.5:2
inline UtilitySpec parse_utility(const std::string& text) {
  auto bad = [&](const std::string& why) { return BadUtilitySpec(text + " (" + why + ")"); };
  std::string head = text, rest;
  if (auto pos = text.find(':'); pos != std::string::npos) {
    head = text.substr(0, pos);
    rest = text.substr(pos + 1);
  }
  auto parse_kv = [&](const std::string& s) {
    std::vector<std::pair<std::string, double>> kv;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw bad("expected key=value");
      kv.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    }
    return kv;
  };
  auto find = [&](const std::vector<std::pair<std::string, double>>& kv, const std::string& k) {
    for (const auto& [key, v] : kv)
      if (key == k) return v;
    throw bad("missing parameter " + k);
  };

  if (head == "log") return UtilitySpec::log_utility();
  if (head == "capped_sqrt") return UtilitySpec::capped_sqrt(find(parse_kv(rest), "cap"));
  if (head == "power") return UtilitySpec::power(find(parse_kv(rest), "alpha"));
  if (head == "neg_exp") return UtilitySpec::neg_exp(find(parse_kv(rest), "rate"));
  if (head == "linear_cap") {
    auto kv = parse_kv(rest);
    return UtilitySpec::linear_cap(find(kv, "slope"), find(kv, "cap"));
  }
  if (head == "pl") {
    // pairs x:y separated by commas
    std::vector<std::pair<double, double>> pts;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto colon = item.find(':');
      if (colon == std::string::npos) throw bad("expected x:y pairs");
      pts.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    }
    return UtilitySpec::piecewise_linear(std::move(pts));
  }
  throw bad("unknown utility kind");
}

}  // namespace rumax
