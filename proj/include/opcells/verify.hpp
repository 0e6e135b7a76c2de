#pragma once

// Invariant suites shared by `opcells verify`: each check yields a named
// pass/fail line with a short detail string.

#include "flow.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace opcells {

struct CheckLine {
  std::string suite, name;
  bool ok = true;
  std::string detail;
};

struct FlowSampleStats {
  int k = 0;
  int samples = 0;
  int traced = 0;
  int boundary = 0;   // BoundaryProximity after retries
  int failures = 0;   // other numerical errors
  int invalid = 0;    // structural invariant violations or cells outside the enumeration
  std::vector<std::string> first_problems;
};

/** Random configurations for one k. Points are standard normal, weights
 *  uniform or drawn from 0.2 + |N(0,1)| and normalized. */
Configuration random_configuration(int k, std::uint64_t seed, bool uniform_weights = false);

/** Traces `samples` random configurations on `jobs` threads; results do not
 *  depend on the number of threads. check_members compares against the
 *  enumeration (k <= 5). */
FlowSampleStats flow_sample(int k, int samples, std::uint64_t seed, const FlowTolerances& tol, int jobs,
                            bool check_members);

std::vector<CheckLine> suite_signs(int kmax);
std::vector<CheckLine> suite_counts(int kmax);
std::vector<CheckLine> suite_homology(int kmax);
std::vector<CheckLine> suite_flow(int kmax, int samples, std::uint64_t seed, const FlowTolerances& tol, int jobs);

/** Coefficients of prod_{j=1}^{k-1} (1 + j t). */
std::vector<std::size_t> poincare_coefficients(int k);

}  // namespace opcells
