#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace fieldctr {

struct MetricsReport {
  double auc = 0.0;
  double logloss = 0.0;
  std::optional<double> relaimpr_pct;
  std::size_t n_eval = 0;

  std::string to_json() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

// Probability that a random positive outranks a random negative, ties
// counted half. O(n log n) rank-sum form; throws on single-class input.
double auc(std::span<const std::uint8_t> labels, std::span<const double> scores);

// Mean negative log likelihood with probabilities clamped to
// [eps, 1 - eps]. Throws on empty input.
double logloss(std::span<const std::uint8_t> labels,
               std::span<const double> probabilities, double clamp_eps = 1e-7);

// Relative AUC improvement over a base model, in percent.
// Requires base_auc > 0.5.
double relaimpr(double measured_auc, double base_auc);

MetricsReport evaluate_scores(std::span<const std::uint8_t> labels,
                              std::span<const double> probabilities,
                              std::optional<double> base_auc = std::nullopt);

}  // namespace fieldctr
