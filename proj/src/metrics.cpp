#include "malmixer/metrics.hpp"

namespace malmixer {

MetricsReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& truths,
                              int num_families) {
  if (preds.size() != truths.size()) throw Error("compute_metrics: length mismatch");
  if (num_families < 1) throw Error("compute_metrics: need at least one family");
  std::vector<long> tp(static_cast<std::size_t>(num_families), 0);
  std::vector<long> fp(static_cast<std::size_t>(num_families), 0);
  std::vector<long> fn(static_cast<std::size_t>(num_families), 0);
  std::vector<long> support(static_cast<std::size_t>(num_families), 0);
  long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], t = truths[i];
    if (p < 0 || p >= num_families || t < 0 || t >= num_families)
      throw Error("compute_metrics: id out of range at position " + std::to_string(i));
    ++support[static_cast<std::size_t>(t)];
    if (p == t) {
      ++correct;
      ++tp[static_cast<std::size_t>(t)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(t)];
    }
  }

  MetricsReport rep;
  rep.per_family.resize(static_cast<std::size_t>(num_families));
  for (int f = 0; f < num_families; ++f) {
    auto& m = rep.per_family[static_cast<std::size_t>(f)];
    const auto idx = static_cast<std::size_t>(f);
    m.support = support[idx];
    const long p_den = tp[idx] + fp[idx];
    const long r_den = tp[idx] + fn[idx];
    m.precision = p_den == 0 ? 0.0 : static_cast<double>(tp[idx]) / static_cast<double>(p_den);
    m.recall = r_den == 0 ? 0.0 : static_cast<double>(tp[idx]) / static_cast<double>(r_den);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    rep.precision_macro += m.precision;
    rep.recall_macro += m.recall;
    rep.f1_macro += m.f1;
  }
  rep.precision_macro /= num_families;
  rep.recall_macro /= num_families;
  rep.f1_macro /= num_families;
  rep.accuracy = preds.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(preds.size());
  return rep;
}

json MetricsReport::to_json() const {
  json fam = json::array();
  for (const auto& m : per_family)
    fam.push_back({{"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"support", m.support}});
  return json{{"accuracy", accuracy},
              {"precision_macro", precision_macro},
              {"recall_macro", recall_macro},
              {"f1_macro", f1_macro},
              {"per_family", std::move(fam)}};
}

}  // namespace malmixer
