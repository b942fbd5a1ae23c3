#pragma once

#include <optional>

#include <Eigen/Dense>

#include "coxthin/common.hpp"

namespace coxthin {

// Axis-aligned rectangle in R^d, d in {1,2}. All processes in this library
// live on such a domain; volume and uniform sampling are exact.
class Domain {
 public:
  Domain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  static Domain unit_interval() { return Domain(evec({0.0}), evec({1.0})); }
  static Domain unit_square() {
    return Domain(evec({0.0, 0.0}), evec({1.0, 1.0}));
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  double volume() const;
  double diameter() const { return (upper_ - lower_).norm(); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  bool contains(const Eigen::VectorXd& point) const;

 private:
  static Eigen::VectorXd evec(std::initializer_list<double> xs);
  Eigen::VectorXd lower_, upper_;
};

// Finite unordered set of locations, stored row-per-point. Construction
// rejects bit-identical duplicates (ties carry no mass; set semantics are
// assumed downstream) but does not itself check a domain -- operations that
// need one take it explicitly.
class PointPattern {
 public:
  PointPattern() : points_(0, 0) {}
  explicit PointPattern(Eigen::MatrixXd points);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  bool empty() const { return size() == 0; }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(int i) const { return points_.row(i).transpose(); }

 private:
  Eigen::MatrixXd points_;
};

// Locations with optional uniform-time stamps, optional real-vector GP marks
// (one row per point) and optional colour labels in {0..K}. Optional fields
// are present-or-absent for the whole pattern, never per point.
class MarkedPattern {
 public:
  MarkedPattern() : locations_(0, 0) {}
  MarkedPattern(Eigen::MatrixXd locations,
                std::optional<Eigen::VectorXd> times = std::nullopt,
                std::optional<Eigen::MatrixXd> gp_marks = std::nullopt,
                std::optional<Eigen::VectorXi> colours = std::nullopt);

  int size() const { return static_cast<int>(locations_.rows()); }
  int dim() const { return static_cast<int>(locations_.cols()); }
  bool empty() const { return size() == 0; }

  const Eigen::MatrixXd& locations() const { return locations_; }
  Eigen::VectorXd location(int i) const {
    return locations_.row(i).transpose();
  }

  bool has_times() const { return times_.has_value(); }
  bool has_gp_marks() const { return gp_marks_.has_value(); }
  bool has_colours() const { return colours_.has_value(); }

  const Eigen::VectorXd& times() const;
  const Eigen::MatrixXd& gp_marks() const;
  const Eigen::VectorXi& colours() const;

  PointPattern to_point_pattern() const { return PointPattern(locations_); }

 private:
  Eigen::MatrixXd locations_;
  std::optional<Eigen::VectorXd> times_;
  std::optional<Eigen::MatrixXd> gp_marks_;
  std::optional<Eigen::VectorXi> colours_;
};

// log(n!) via lgamma.
double log_factorial(int n);

// log of the multinomial coefficient (sum(parts); parts...).
double log_multinomial_coeff(const std::vector<int>& parts);

}  // namespace coxthin
