#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rcrs/odd_girth.hpp"

namespace rcrs {

// φ_g(y) = y^{g-1}/(g-1)!, and 0 for infinite g.
double phi(double y, OddGirth g);

// Γ(s,z) = (s-1)! e^{-z} Σ_{k<s} z^k/k! for integer s >= 1.
double gamma_upper_int(int s, double z);

// Vertex-arrival selection function for odd girth g, with c(0) = 1.
double c_vertex(double y, OddGirth g);

enum class EdgeKind { kRank1, kEdgeGeneral, kEdgeTree };

// e^{-y}, e^{-2y} or 1/(1+y)^2.
double c_edge(double y, EdgeKind kind);

// α_g in closed form; (1+e^{-2})/2 for infinite g.
double alpha_closed_form(OddGirth g);

// 2∫₀¹ c_vertex(y,g)·y dy by adaptive Simpson; throws QuadratureError.
double alpha_numeric(OddGirth g, double tol = 1e-10);

enum class SelectionKind { kVertex, kRank1, kEdgeGeneral, kEdgeTree, kCustom };

class SelectionFunction {
 public:
  static SelectionFunction vertex(OddGirth g);
  static SelectionFunction edge(EdgeKind kind);
  // Knots (y, c) with y strictly increasing from 0 to 1 and c in [0,1];
  // linear interpolation between knots. floor is the user-supplied C > 0.
  static SelectionFunction custom(std::vector<std::pair<double, double>> knots, double floor);

  double operator()(double y) const;

  SelectionKind kind() const { return kind_; }
  OddGirth girth() const { return girth_; }
  double floor() const { return floor_; }
  // Guarantee the function realizes when selection is exact: 2∫c(y)y dy for
  // vertex arrivals (and custom tables), ∫c(y)dy for the edge kinds.
  double target_integral() const { return target_; }
  bool is_edge_kind() const;
  std::string name() const;

 private:
  SelectionKind kind_ = SelectionKind::kVertex;
  OddGirth girth_ = OddGirth::infinite();
  EdgeKind edge_kind_ = EdgeKind::kRank1;
  std::vector<std::pair<double, double>> knots_;
  double floor_ = 0.0;
  double target_ = 0.0;
};

struct ConditionViolation {
  double t;
  std::string condition;  // "monotone", "floor" or "inequality"
  double slack;           // negative when violated
};

struct SelectionVerification {
  bool monotone_ok = true;
  bool floor_ok = true;
  bool inequality_ok = true;
  double min_slack = 0.0;      // min over grid of RHS - c(t)
  double max_abs_slack = 0.0;  // equality gap for the closed form
  std::vector<ConditionViolation> violations;

  bool ok() const { return monotone_ok && floor_ok && inequality_ok; }
};

// Checks on the grid t_i = i/grid_size, i = 1..grid_size: c non-increasing,
// c(t) >= C and c(t) <= 1 - (1/t)∫₀ᵗ 2(c(y)y + φ_g(y))dy.
SelectionVerification verify_selection_conditions(const SelectionFunction& c, OddGirth g,
                                                   int grid_size, double tol = 1e-10);

}  // namespace rcrs
