#include "singhom/outcome.hpp"

#include <limits>

namespace singhom {

double ExperimentOutcome::get(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

bool ExperimentOutcome::has(const std::string& key) const {
  for (const auto& kv : metrics)
    if (kv.first == key) return true;
  return false;
}

}  // namespace singhom
