#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "resid/model.hpp"

namespace resid {

enum class EstimateStatus { interior, boundary_low, boundary_high, undefined };

const char* to_string(EstimateStatus s);

struct SolverConfig {
  double epsilon = 1e-9;      // bracket inset: solve over [epsilon, 1-epsilon]
  double tolerance = 1e-10;   // stop when the bracket is this narrow
  int max_iterations = 200;

  void validate() const;  // throws std::invalid_argument
};

struct Estimate {
  std::optional<double> p_hat;
  EstimateStatus status = EstimateStatus::undefined;
  int iterations = 0;
  double bracket_width = 0.0;
};

// Bisection on a strictly decreasing score over [epsilon, 1-epsilon].
// score(1-eps) >= 0 pins the maximizer to the upper bracket (boundary_high),
// score(eps) <= 0 to the lower (boundary_low); a sign change is bisected to
// the configured bracket width. Throws SolverError if the iteration cap is
// hit first.
Estimate maximize_by_score(const std::function<double(double)>& score_fn,
                           const SolverConfig& config);

// MLE of p for the homogeneous model. m = 0 means the MLE does not exist and
// the status is undefined.
Estimate estimate_mle(const SufficientStats& stats, const ModelParams& params,
                      const SolverConfig& config = {});

Estimate estimate_mle(const PerLineStats& stats, const ModelParams& params,
                      const SolverConfig& config = {});

Estimate estimate_mle(const PerClassStats& stats, const ModelParams& params,
                      const SolverConfig& config = {});

// Per-chunk unreliability p_hat * alpha^d, d the chunk's debug count. Under
// the per_class variant the alpha of the chunk's class is used; class labels
// are looked up in class_labels (chunk id -> label).
std::map<std::string, double> chunk_unreliability(
    double p_hat, const std::map<std::string, std::uint32_t>& debug_counts,
    const ModelParams& params,
    const std::map<std::string, std::string>& class_labels = {});

}  // namespace resid
