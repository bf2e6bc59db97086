#include "facesim/corpus.hpp"

namespace facesim {

Datasets build_datasets(std::span<const TripletSample> samples) {
  Datasets out;
  for (const auto& s : samples) {
    if (!s.admitted()) continue;
    out.d1.push_back(s.triplet_id);
    if (s.consistent) out.d2.push_back(s.triplet_id);
  }
  if (out.d1.empty()) out.warnings.emplace_back("no admitted triplets: D1 is empty");
  if (out.d2.empty()) out.warnings.emplace_back("no consistent triplets: D2 is empty");
  return out;
}

}  // namespace facesim
