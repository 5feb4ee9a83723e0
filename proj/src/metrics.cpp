#include "fieldctr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "fieldctr/error.hpp"
#include "fieldctr/num_format.hpp"

namespace fieldctr {

double auc(std::span<const std::uint8_t> labels,
           std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw Error("auc: labels and scores differ in length");
  }
  const std::size_t n = labels.size();
  std::size_t positives = 0;
  for (std::uint8_t y : labels) positives += y;
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error("auc: needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Rank-sum with average ranks over tied score runs; equals pair counting
  // with half credit for ties.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

double logloss(std::span<const std::uint8_t> labels,
               std::span<const double> probabilities, double clamp_eps) {
  if (labels.empty()) throw Error("logloss: empty input");
  if (labels.size() != probabilities.size()) {
    throw Error("logloss: labels and probabilities differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p =
        std::clamp(probabilities[i], clamp_eps, 1.0 - clamp_eps);
    sum += labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(labels.size());
}

double relaimpr(double measured_auc, double base_auc) {
  if (!(base_auc > 0.5)) {
    throw Error("relaimpr: base AUC must exceed 0.5");
  }
  return ((measured_auc - 0.5) / (base_auc - 0.5) - 1.0) * 100.0;
}

MetricsReport evaluate_scores(std::span<const std::uint8_t> labels,
                              std::span<const double> probabilities,
                              std::optional<double> base_auc) {
  MetricsReport report;
  report.auc = auc(labels, probabilities);
  report.logloss = logloss(labels, probabilities);
  report.n_eval = labels.size();
  if (base_auc) report.relaimpr_pct = relaimpr(report.auc, *base_auc);
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["auc"] = auc;
  j["logloss"] = logloss;
  if (relaimpr_pct) j["relaimpr_pct"] = *relaimpr_pct;
  j["n_eval"] = n_eval;
  return j.dump();
}

std::string MetricsReport::csv_header() {
  return "auc,logloss,relaimpr_pct,n_eval";
}

std::string MetricsReport::to_csv_row() const {
  std::ostringstream out;
  out << format_compact(auc) << ',' << format_compact(logloss) << ',';
  if (relaimpr_pct) out << format_compact(*relaimpr_pct);
  out << ',' << n_eval;
  return out.str();
}

}  // namespace fieldctr
