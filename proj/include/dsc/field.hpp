#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dsc/error.hpp"

namespace dsc {

// Dense grid x window matrix of reals. Used for coverage counts N_{g,t},
// joint sensing weights, and (g,t) distributions alike.
class Field {
 public:
  Field() = default;
  Field(int grids, int windows, double init = 0.0)
      : grids_(grids), windows_(windows),
        v_(static_cast<std::size_t>(grids) * windows, init) {
    if (grids < 0 || windows < 0) throw InputError("field dimensions must be nonnegative");
  }

  int grids() const { return grids_; }
  int windows() const { return windows_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(int g, int t) { return v_[static_cast<std::size_t>(g) * windows_ + t]; }
  double operator()(int g, int t) const { return v_[static_cast<std::size_t>(g) * windows_ + t]; }

  double& flat(std::size_t i) { return v_[i]; }
  double flat(std::size_t i) const { return v_[i]; }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  bool same_shape(const Field& o) const { return grids_ == o.grids_ && windows_ == o.windows_; }

  Field& operator+=(const Field& o) {
    require_same_shape(o, "operator+=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }

  Field& operator-=(const Field& o) {
    require_same_shape(o, "operator-=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }

  double sum() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s;
  }

  double max_value() const {
    double m = v_.empty() ? 0.0 : v_[0];
    for (double x : v_) m = x > m ? x : m;
    return m;
  }

  void fill(double x) { v_.assign(v_.size(), x); }

  void require_same_shape(const Field& o, const std::string& where) const {
    if (!same_shape(o))
      throw InputError("field shape mismatch in " + where + ": " + std::to_string(grids_) + "x" +
                       std::to_string(windows_) + " vs " + std::to_string(o.grids_) + "x" +
                       std::to_string(o.windows_));
  }

  // All entries finite and >= 0 (coverage invariant).
  void require_nonnegative(const std::string& what) const;

 private:
  int grids_ = 0;
  int windows_ = 0;
  std::vector<double> v_;
};

// Exponent of the sensing utility xi(N) = N^beta plus the smoothing term
// used only inside solver gradients.
struct UtilityParams {
  double beta = 0.2;
  double epsilon_smooth = 1e-8;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0))
      throw InputError("utility exponent beta must lie in (0,1), got " + std::to_string(beta));
    if (epsilon_smooth < 0.0) throw InputError("epsilon_smooth must be >= 0");
  }
};

// Normalized spatial weights w_g and temporal weights mu_t.
struct SensingWeights {
  std::vector<double> spatial;
  std::vector<double> temporal;

  int grids() const { return static_cast<int>(spatial.size()); }
  int windows() const { return static_cast<int>(temporal.size()); }

  double joint_at(int g, int t) const { return spatial[g] * temporal[t]; }

  // Outer-product weight field pi_{g,t} = w_g * mu_t.
  Field joint() const {
    Field f(grids(), windows());
    for (int g = 0; g < grids(); ++g)
      for (int t = 0; t < windows(); ++t) f(g, t) = spatial[g] * temporal[t];
    return f;
  }

  void validate() const;

  // Renormalizes both vectors to sum 1. Sets *warned when an input sum was
  // off by more than 1e-6 (callers surface that to the user).
  static SensingWeights normalized(std::vector<double> spatial, std::vector<double> temporal,
                                   bool* warned = nullptr);

  static SensingWeights uniform(int grids, int windows) {
    return {std::vector<double>(grids, 1.0 / grids), std::vector<double>(windows, 1.0 / windows)};
  }
};

// Per-vehicle instrumentation costs over the project period plus the budget.
struct CostStructure {
  double taxi = 52000.0;   // CNY per instrumented taxi, three-year project
  double bus = 50000.0;    // per instrumented bus
  double dv = 300000.0;    // per dedicated vehicle
  double budget = 0.0;

  void validate() const {
    if (taxi <= 0.0 || bus <= 0.0 || dv <= 0.0)
      throw InputError("unit costs must be positive");
    if (budget < 0.0) throw InputError("budget must be nonnegative");
  }
};

}  // namespace dsc
