#include "rcrs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rcrs/numerics.hpp"

namespace rcrs {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

constexpr double kSmallY = 1e-6;
constexpr double kSlackTolerance = 1e-9;

}  // namespace

double phi(double y, OddGirth g) {
  if (g.is_infinite()) return 0.0;
  const int k = g.value() - 1;
  return std::pow(y, k) / factorial(k);
}

double gamma_upper_int(int s, double z) {
  if (s < 1) throw std::invalid_argument("gamma_upper_int: s must be >= 1");
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < s; ++k) {
    term *= z / k;
    sum += term;
  }
  return factorial(s - 1) * std::exp(-z) * sum;
}

double c_vertex(double y, OddGirth g) {
  if (y <= 0.0) return 1.0;
  // Removable singularity at 0; the ODE forces c'(0) = -1.
  if (y < kSmallY) return 1.0 - y;
  const double base = -std::expm1(-2.0 * y) / (2.0 * y);
  if (g.is_infinite()) return base;
  const int gv = g.value();
  const double diff = gamma_upper_int(gv, -2.0 * y) - gamma_upper_int(gv, 0.0);
  return base - std::exp(-2.0 * y) * diff / (std::ldexp(1.0, gv - 1) * y * factorial(gv - 1));
}

double c_edge(double y, EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kRank1:
      return std::exp(-y);
    case EdgeKind::kEdgeGeneral:
      return std::exp(-2.0 * y);
    case EdgeKind::kEdgeTree:
      return 1.0 / ((1.0 + y) * (1.0 + y));
  }
  return 0.0;
}

double alpha_closed_form(OddGirth g) {
  const double e2 = std::exp(-2.0);
  if (g.is_infinite()) return 0.5 * (1.0 + e2);
  const int gv = g.value();
  const double diff = gamma_upper_int(gv, -2.0) - gamma_upper_int(gv, 0.0);
  return 0.5 + 0.5 * e2 - (2.0 / gv - diff * e2 / std::ldexp(1.0, gv - 1)) / factorial(gv - 1);
}

double alpha_numeric(OddGirth g, double tol) {
  return adaptive_simpson([g](double y) { return 2.0 * c_vertex(y, g) * y; }, 0.0, 1.0, tol);
}

SelectionFunction SelectionFunction::vertex(OddGirth g) {
  SelectionFunction f;
  f.kind_ = SelectionKind::kVertex;
  f.girth_ = g;
  f.floor_ = c_vertex(1.0, g);
  f.target_ = alpha_closed_form(g);
  return f;
}

SelectionFunction SelectionFunction::edge(EdgeKind kind) {
  SelectionFunction f;
  f.edge_kind_ = kind;
  f.floor_ = c_edge(1.0, kind);
  switch (kind) {
    case EdgeKind::kRank1:
      f.kind_ = SelectionKind::kRank1;
      f.target_ = 1.0 - std::exp(-1.0);
      break;
    case EdgeKind::kEdgeGeneral:
      f.kind_ = SelectionKind::kEdgeGeneral;
      f.target_ = 0.5 * (1.0 - std::exp(-2.0));
      break;
    case EdgeKind::kEdgeTree:
      f.kind_ = SelectionKind::kEdgeTree;
      f.target_ = 0.5;
      break;
  }
  return f;
}

SelectionFunction SelectionFunction::custom(std::vector<std::pair<double, double>> knots, double floor) {
  if (knots.size() < 2) throw std::invalid_argument("custom selection function needs >= 2 knots");
  if (knots.front().first != 0.0 || knots.back().first != 1.0) {
    throw std::invalid_argument("custom selection function knots must span [0,1]");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
      throw std::invalid_argument("custom selection function knots must be strictly increasing in y");
    }
    if (!(knots[i].second >= 0.0 && knots[i].second <= 1.0)) {
      throw std::invalid_argument("custom selection function values must lie in [0,1]");
    }
  }
  if (!(floor > 0.0)) throw std::invalid_argument("custom selection function needs a floor C > 0");
  SelectionFunction f;
  f.kind_ = SelectionKind::kCustom;
  f.knots_ = std::move(knots);
  f.floor_ = floor;
  // 2∫ c(y) y dy exactly for the piecewise-linear interpolant.
  double acc = 0.0;
  for (std::size_t i = 1; i < f.knots_.size(); ++i) {
    const auto [y0, c0] = f.knots_[i - 1];
    const auto [y1, c1] = f.knots_[i];
    const double b = (c1 - c0) / (y1 - y0);
    const double a = c0 - b * y0;
    acc += a * (y1 * y1 - y0 * y0) + 2.0 * b * (y1 * y1 * y1 - y0 * y0 * y0) / 3.0;
  }
  f.target_ = acc;
  return f;
}

double SelectionFunction::operator()(double y) const {
  switch (kind_) {
    case SelectionKind::kVertex:
      return c_vertex(y, girth_);
    case SelectionKind::kRank1:
    case SelectionKind::kEdgeGeneral:
    case SelectionKind::kEdgeTree:
      return c_edge(y, edge_kind_);
    case SelectionKind::kCustom: {
      if (y <= 0.0) return knots_.front().second;
      if (y >= 1.0) return knots_.back().second;
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), y,
                                       [](double v, const auto& k) { return v < k.first; });
      const auto& [y1, c1] = *it;
      const auto& [y0, c0] = *(it - 1);
      return c0 + (c1 - c0) * (y - y0) / (y1 - y0);
    }
  }
  return 0.0;
}

bool SelectionFunction::is_edge_kind() const {
  return kind_ == SelectionKind::kRank1 || kind_ == SelectionKind::kEdgeGeneral ||
         kind_ == SelectionKind::kEdgeTree;
}

std::string SelectionFunction::name() const {
  switch (kind_) {
    case SelectionKind::kVertex:
      return "vertex(g=" + girth_.to_string() + ")";
    case SelectionKind::kRank1:
      return "rank1";
    case SelectionKind::kEdgeGeneral:
      return "edge_general";
    case SelectionKind::kEdgeTree:
      return "edge_tree";
    case SelectionKind::kCustom:
      return "custom";
  }
  return "?";
}

SelectionVerification verify_selection_conditions(const SelectionFunction& c, OddGirth g, int grid_size,
                                                  double tol) {
  if (grid_size < 2) throw std::invalid_argument("verify_selection_conditions: grid_size must be >= 2");
  SelectionVerification r;
  r.min_slack = std::numeric_limits<double>::infinity();
  auto integrand = [&](double y) { return 2.0 * (c(y) * y + phi(y, g)); };
  double integral = 0.0;
  double prev_t = 0.0;
  double prev_c = c(0.0);
  const double piece_tol = tol / grid_size;
  for (int i = 1; i <= grid_size; ++i) {
    const double t = static_cast<double>(i) / grid_size;
    integral += adaptive_simpson(integrand, prev_t, t, piece_tol);
    const double ct = c(t);
    if (ct > prev_c + 1e-15) {
      r.monotone_ok = false;
      r.violations.push_back({t, "monotone", prev_c - ct});
    }
    if (ct < c.floor() - 1e-15) {
      r.floor_ok = false;
      r.violations.push_back({t, "floor", ct - c.floor()});
    }
    const double slack = 1.0 - integral / t - ct;
    r.min_slack = std::min(r.min_slack, slack);
    r.max_abs_slack = std::max(r.max_abs_slack, std::fabs(slack));
    if (slack < -kSlackTolerance) {
      r.inequality_ok = false;
      r.violations.push_back({t, "inequality", slack});
    }
    prev_t = t;
    prev_c = ct;
  }
  return r;
}

}  // namespace rcrs
