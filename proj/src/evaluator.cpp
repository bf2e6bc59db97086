#include "facesim/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "facesim/csv.hpp"
#include "facesim/error.hpp"
#include "facesim/trainer.hpp"

namespace facesim {

TripletEvaluation eval_triplets(const ProjectionModel& model,
                                std::span<const TripletSample> samples,
                                const EmbeddingTable& table) {
  std::vector<const TripletSample*> kept;
  TripletEvaluation out;
  for (const auto& s : samples) {
    if (s.admitted() && s.consistent) {
      kept.push_back(&s);
    } else {
      ++out.n_excluded;
    }
  }
  if (kept.empty()) throw EvaluationError("no consistent samples to evaluate");
  std::sort(kept.begin(), kept.end(),
            [](const TripletSample* a, const TripletSample* b) { return a->triplet_id < b->triplet_id; });

  out.records.reserve(kept.size());
  for (const TripletSample* s : kept) {
    const EmbeddingRecord& ref = table.at(s->ref_id);
    PairRecord r;
    r.triplet_id = s->triplet_id;
    r.sim_pair_score = similarity_score(model, ref, table.at(s->positive_id()));
    r.dissim_pair_score = similarity_score(model, ref, table.at(s->negative_id()));
    r.correct = r.sim_pair_score > r.dissim_pair_score;
    if (r.correct) ++out.n_correct;
    out.records.push_back(std::move(r));
  }
  out.accuracy = static_cast<double>(out.n_correct) / static_cast<double>(out.records.size());
  return out;
}

double triplet_accuracy(const ProjectionModel& model, std::span<const TripletVectors> triplets) {
  if (triplets.empty()) throw EvaluationError("no triplets to evaluate");
  std::size_t correct = 0;
  for (const auto& t : triplets) {
    const Vector a = project(model, t.anchor);
    if (cosine(a, project(model, t.positive)) > cosine(a, project(model, t.negative))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(triplets.size());
}

void write_scatter(std::ostream& out, std::span<const PairRecord> records) {
  out << "triplet_id,x,y,correct\n";
  for (const auto& r : records) {
    out << r.triplet_id << ',' << csv::format_double(r.sim_pair_score) << ','
        << csv::format_double(r.dissim_pair_score) << ',' << (r.correct ? 1 : 0) << '\n';
  }
}

void export_scatter(const std::filesystem::path& path, std::span<const PairRecord> records) {
  if (records.empty()) throw EvaluationError("no pair records to export");
  std::ofstream out;
  csv::open_for_write(out, path);
  write_scatter(out, records);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

double round3(double value) noexcept { return std::round(value * 1000.0) / 1000.0; }

}  // namespace facesim
