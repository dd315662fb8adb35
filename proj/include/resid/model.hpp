#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace resid {

enum class Variant { homogeneous, per_line, per_class };

const char* to_string(Variant v);
Variant variant_from_string(std::string_view s);

// Model parameters. alpha is the debugging inefficiency factor: after a
// chunk has been debugged d times, its residual bugginess is p * alpha^d.
struct ModelParams {
  double alpha = 0.9;
  Variant variant = Variant::homogeneous;
  std::map<std::string, double> class_alphas;  // per_class only

  // alpha for a chunk of the given class; falls back to the global alpha.
  double alpha_for(const std::string& class_label) const;
  void validate() const;  // throws std::invalid_argument
};

// The statistics the likelihood depends on: m bug observations and, for each
// debug count i, the number n_i of perfect chunk-traversals recorded at that
// count. n is sparse; zero entries are never stored.
struct SufficientStats {
  std::uint64_t m = 0;
  std::map<std::uint32_t, std::uint64_t> n;

  void add_success(std::uint32_t debug_count, std::uint64_t times = 1);
  std::uint32_t k() const;            // max i with n_i > 0, or 0
  std::uint64_t traversals() const;   // sum of n_i
  bool empty() const { return m == 0 && n.empty(); }

  bool operator==(const SufficientStats&) const = default;
};

// Per-line variant data: one (debug count, line count) entry per perfect
// chunk-traversal.
struct PerLineSuccess {
  std::uint32_t debug_count = 0;
  std::uint32_t line_count = 1;

  bool operator==(const PerLineSuccess&) const = default;
};

struct PerLineStats {
  std::uint64_t m = 0;
  std::vector<PerLineSuccess> successes;

  bool operator==(const PerLineStats&) const = default;
};

// Per-class variant data: one SufficientStats per chunk class, all sharing a
// single p but each evaluated with its class alpha.
using PerClassStats = std::map<std::string, SufficientStats>;

enum class MleDiagnosis { interior_guaranteed, boundary_high, undefined, undetermined };

const char* to_string(MleDiagnosis d);

// l(p) = m log p + sum_i n_i log(1 - p alpha^i), additive constant omitted.
// p must be finite and strictly inside (0,1); throws std::domain_error.
double log_likelihood(const SufficientStats& stats, const ModelParams& params, double p);

// l'(p) = m/p - sum_i n_i alpha^i / (1 - p alpha^i). Strictly decreasing on
// (0,1) for nonempty data.
double score(const SufficientStats& stats, const ModelParams& params, double p);

// Per-line likelihood: m log p + sum over successes of
// log(1 - (1 - (1-p)^K) alpha^i). Reduces to log_likelihood when every K=1.
double per_line_log_likelihood(const PerLineStats& stats, const ModelParams& params, double p);
double per_line_score(const PerLineStats& stats, const ModelParams& params, double p);

// Per-class likelihood: sum of homogeneous terms, one per class, each with
// its own alpha, sharing one p.
double per_class_log_likelihood(const PerClassStats& stats, const ModelParams& params, double p);
double per_class_score(const PerClassStats& stats, const ModelParams& params, double p);

// Existence diagnostics for the MLE of p:
//   undefined            m = 0 (necessary condition fails)
//   interior_guaranteed  m > 0 and some n_i > alpha^-i - 1
//   boundary_high        m > 0 and l'(1 - epsilon) >= 0
//   undetermined         anything else; the solver decides numerically
MleDiagnosis mle_diagnosis(const SufficientStats& stats, const ModelParams& params,
                           double epsilon = 1e-9);

// alpha^i by repeated multiplication; exact for i = 0.
double power_int(double base, std::uint32_t exponent);

}  // namespace resid
