#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mftb/sphere.hpp"

namespace mftb::verify {

struct PropertyResult {
  std::string name;
  long long trials = 0;
  long long failures = 0;
  std::uint64_t first_failure_seed = 0;  // reproducing seed of the first miss
  std::string detail;                    // filled on failure

  bool passed() const { return failures == 0; }
};

using FuseFn = std::function<sphere::UnitVector(const sphere::UnitVector&,
                                                const sphere::UnitVector&)>;

struct Options {
  long long trials = 10000;
  std::uint64_t seed = 0;
  /// Test hook: replaces the fusion map inside the sphere properties so the
  /// harness itself can be checked against a broken implementation.
  FuseFn fuse_override;
};

/// Known suites: sphere, drift, bounds, grad, all.
bool is_known_suite(const std::string& suite);

/// Runs the randomized property checks of one suite (or all of them) and
/// returns one result per property.
std::vector<PropertyResult> run_suite(const std::string& suite,
                                      const Options& options);

}  // namespace mftb::verify
