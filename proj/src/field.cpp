#include "dsc/field.hpp"

#include <cmath>

namespace dsc {

void Field::require_nonnegative(const std::string& what) const {
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i]) || v_[i] < 0.0)
      throw InputError(what + " must be finite and nonnegative (cell " + std::to_string(i) + ")");
  }
}

void SensingWeights::validate() const {
  if (spatial.empty() || temporal.empty()) throw InputError("sensing weights must be non-empty");
  double ws = 0.0, ms = 0.0;
  for (double w : spatial) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("spatial weights must be nonnegative");
    ws += w;
  }
  for (double m : temporal) {
    if (!std::isfinite(m) || m < 0.0) throw InputError("temporal weights must be nonnegative");
    ms += m;
  }
  if (std::abs(ws - 1.0) > 1e-9)
    throw InputError("spatial weights must sum to 1 (got " + std::to_string(ws) + ")");
  if (std::abs(ms - 1.0) > 1e-9)
    throw InputError("temporal weights must sum to 1 (got " + std::to_string(ms) + ")");
}

SensingWeights SensingWeights::normalized(std::vector<double> spatial, std::vector<double> temporal,
                                          bool* warned) {
  if (warned) *warned = false;
  auto norm = [&](std::vector<double>& v, const char* what) {
    double s = 0.0;
    for (double x : v) {
      if (!std::isfinite(x) || x < 0.0)
        throw InputError(std::string(what) + " weights must be nonnegative and finite");
      s += x;
    }
    if (s <= 0.0) throw InputError(std::string(what) + " weights sum to zero");
    if (std::abs(s - 1.0) > 1e-6 && warned) *warned = true;
    for (double& x : v) x /= s;
  };
  norm(spatial, "spatial");
  norm(temporal, "temporal");
  SensingWeights w{std::move(spatial), std::move(temporal)};
  return w;
}

}  // namespace dsc
