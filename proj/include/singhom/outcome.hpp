#pragma once

#include <string>
#include <utility>
#include <vector>

namespace singhom {

// Result of one experiment. `pass` is decided from `metrics` against the
// tolerances declared by the experiment; nothing else feeds into it.
struct ExperimentOutcome {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> artifacts;
  std::vector<std::string> notes;

  void set(const std::string& key, double value) {
    for (auto& [k, v] : metrics)
      if (k == key) {
        v = value;
        return;
      }
    metrics.emplace_back(key, value);
  }
  // NaN if absent.
  double get(const std::string& key) const;
  bool has(const std::string& key) const;
};

}  // namespace singhom
