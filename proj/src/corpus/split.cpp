#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "facesim/corpus.hpp"
#include "facesim/error.hpp"
#include "facesim/rng.hpp"

namespace facesim {

std::string_view to_string(EvalMode v) noexcept {
  switch (v) {
    case EvalMode::i:
      return "i";
    case EvalMode::ii:
      return "ii";
    case EvalMode::iii:
      return "iii";
  }
  return "?";
}

std::optional<EvalMode> parse_eval_mode(std::string_view text) noexcept {
  if (text == "i") return EvalMode::i;
  if (text == "ii") return EvalMode::ii;
  if (text == "iii") return EvalMode::iii;
  return std::nullopt;
}

void SplitRatios::validate() const {
  if (!(train > 0.0) || !(test > 0.0) || !(val >= 0.0)) {
    throw ValidationError("split ratios need train > 0, test > 0 and val >= 0");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
}

const DatasetPartition& SplitResult::dataset(std::string_view name) const {
  if (name == "D1") return d1;
  if (name == "D2") return d2;
  throw UsageError("unknown dataset '" + std::string(name) + "' (expected D1 or D2)");
}

TripletIdentities triplet_identities(const TripletSample& sample, const EmbeddingTable& table) {
  const EmbeddingRecord* refs[3] = {&table.at(sample.ref_id), &table.at(sample.option_a_id),
                                    &table.at(sample.option_b_id)};
  TripletIdentities out;
  out.triplet_id = sample.triplet_id;
  for (const EmbeddingRecord* r : refs) {
    if (r->role != Role::swapped || !r->target_id) {
      throw IntegrityError("triplet '" + sample.triplet_id + "' references '" + r->image_id +
                           "', which is not a swapped record");
    }
    if (r->identity_id.empty()) {
      throw IntegrityError("record '" + r->image_id + "' has no identity_id");
    }
    if (out.target_id.empty()) {
      out.target_id = *r->target_id;
    } else if (out.target_id != *r->target_id) {
      throw IntegrityError("triplet '" + sample.triplet_id + "' mixes targets '" + out.target_id +
                           "' and '" + *r->target_id + "'");
    }
    out.sources.push_back(r->identity_id);
  }
  std::sort(out.sources.begin(), out.sources.end());
  out.sources.erase(std::unique(out.sources.begin(), out.sources.end()), out.sources.end());
  return out;
}

namespace {

enum class Slot { train, test, dropped };

// Index-encoded view of the admitted samples.
struct Graph {
  std::vector<std::string> ids;
  std::vector<bool> consistent;
  std::vector<std::size_t> target;
  std::vector<std::vector<std::size_t>> sources;
  std::vector<std::vector<std::size_t>> by_source;  // source -> triplets
  std::size_t n_targets = 0;
  std::size_t n_sources = 0;
};

Graph build_graph(std::span<const TripletSample> samples, const EmbeddingTable& table) {
  std::vector<TripletIdentities> idents;
  std::vector<bool> consistent;
  for (const auto& s : samples) {
    if (!s.admitted()) continue;
    idents.push_back(triplet_identities(s, table));
    consistent.push_back(s.consistent);
  }
  std::map<std::string, std::size_t> targets;
  std::map<std::string, std::size_t> sources;
  for (const auto& t : idents) {
    targets.emplace(t.target_id, 0);
    for (const auto& s : t.sources) sources.emplace(s, 0);
  }
  std::size_t k = 0;
  for (auto& [_, v] : targets) v = k++;
  k = 0;
  for (auto& [_, v] : sources) v = k++;

  Graph g;
  g.n_targets = targets.size();
  g.n_sources = sources.size();
  g.consistent = std::move(consistent);
  g.by_source.resize(g.n_sources);
  for (std::size_t i = 0; i < idents.size(); ++i) {
    g.ids.push_back(idents[i].triplet_id);
    g.target.push_back(targets.at(idents[i].target_id));
    std::vector<std::size_t> src;
    for (const auto& s : idents[i].sources) {
      src.push_back(sources.at(s));
      g.by_source[src.back()].push_back(i);
    }
    g.sources.push_back(std::move(src));
  }
  return g;
}

std::vector<Slot> derive(const Graph& g, EvalMode mode, const std::vector<bool>& held) {
  const std::size_t n = g.ids.size();
  std::vector<Slot> slot(n, Slot::train);
  if (mode == EvalMode::ii) {
    for (std::size_t t = 0; t < n; ++t) slot[t] = held[g.target[t]] ? Slot::test : Slot::train;
    return slot;
  }
  if (mode == EvalMode::i) {
    std::vector<bool> test_source(g.n_sources, false);
    for (std::size_t t = 0; t < n; ++t) {
      if (!held[g.target[t]]) continue;
      slot[t] = Slot::test;
      for (auto s : g.sources[t]) test_source[s] = true;
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (slot[t] == Slot::test) continue;
      const bool touches = std::any_of(g.sources[t].begin(), g.sources[t].end(),
                                       [&](std::size_t s) { return test_source[s]; });
      slot[t] = touches ? Slot::dropped : Slot::train;
    }
    return slot;
  }
  for (std::size_t t = 0; t < n; ++t) {
    const auto n_held = static_cast<std::size_t>(std::count_if(
        g.sources[t].begin(), g.sources[t].end(), [&](std::size_t s) { return held[s]; }));
    slot[t] = n_held == 0 ? Slot::train : n_held == g.sources[t].size() ? Slot::test : Slot::dropped;
  }
  return slot;
}

// Counts of `train` triplets per source (mode ii) or per target (mode iii),
// and which of those keys the test side depends on. With consistent_only the
// same bookkeeping runs over the D2 subset.
struct Coverage {
  std::vector<std::size_t> train_count;
  std::vector<bool> required;
};

Coverage coverage(const Graph& g, EvalMode mode, const std::vector<Slot>& slot,
                  bool consistent_only) {
  Coverage c;
  const bool by_target = mode == EvalMode::iii;
  const std::size_t keys = by_target ? g.n_targets : g.n_sources;
  c.train_count.assign(keys, 0);
  c.required.assign(keys, false);
  for (std::size_t t = 0; t < slot.size(); ++t) {
    if (slot[t] == Slot::dropped) continue;
    if (consistent_only && !g.consistent[t]) continue;
    auto mark = [&](std::size_t key) {
      if (slot[t] == Slot::train) ++c.train_count[key];
      if (slot[t] == Slot::test) c.required[key] = true;
    };
    if (by_target) {
      mark(g.target[t]);
    } else {
      for (auto s : g.sources[t]) mark(s);
    }
  }
  return c;
}

bool covered(const Coverage& c) {
  for (std::size_t k = 0; k < c.required.size(); ++k) {
    if (c.required[k] && c.train_count[k] == 0) return false;
  }
  return true;
}

bool feasible(const Graph& g, EvalMode mode, const std::vector<Slot>& slot) {
  if (std::none_of(slot.begin(), slot.end(), [](Slot s) { return s == Slot::train; })) {
    return false;
  }
  if (mode == EvalMode::i) return true;
  return covered(coverage(g, mode, slot, false)) && covered(coverage(g, mode, slot, true));
}

std::size_t count(const std::vector<Slot>& slot, Slot which) {
  return static_cast<std::size_t>(std::count(slot.begin(), slot.end(), which));
}

// Next source to hold out in mode iii: prefer one that shares a triplet with
// an already-held source so held-out triplets complete quickly.
std::size_t next_source(const Graph& g, const std::vector<std::size_t>& order,
                        const std::vector<bool>& held, const std::vector<bool>& tried) {
  std::vector<bool> frontier(g.n_sources, false);
  for (std::size_t s = 0; s < g.n_sources; ++s) {
    if (!held[s]) continue;
    for (auto t : g.by_source[s]) {
      for (auto other : g.sources[t]) frontier[other] = true;
    }
  }
  std::size_t fallback = order.size();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t s = order[k];
    if (held[s] || tried[s]) continue;
    if (frontier[s]) return k;
    if (fallback == order.size()) fallback = k;
  }
  return fallback;
}

std::string binding_constraint(EvalMode mode) {
  switch (mode) {
    case EvalMode::i:
      return "mode i: no held-out target set leaves a training triplet that shares neither a "
             "target nor a source identity with it";
    case EvalMode::ii:
      return "mode ii: no target can be held out while every source identity of its triplets "
             "still appears in training";
    case EvalMode::iii:
      return "mode iii: no source identity set can be held out while every target of the "
             "held-out triplets still appears in training";
  }
  return "";
}

}  // namespace

SplitResult split_eval(std::span<const TripletSample> samples, const EmbeddingTable& table,
                       EvalMode mode, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  const Graph g = build_graph(samples, table);
  const std::size_t n = g.ids.size();
  if (n < 2) {
    throw InfeasibleSplitError("mode " + std::string(to_string(mode)) +
                               ": need at least 2 admitted triplets, have " + std::to_string(n));
  }
  if (g.n_targets < 2) {
    throw InfeasibleSplitError(
        "mode " + std::string(to_string(mode)) +
        ": corpus has a single target; held-out and training targets cannot be distinguished");
  }

  const auto test_goal = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratios.test * n)));
  const auto val_goal = static_cast<std::size_t>(std::llround(ratios.val * n));

  Rng rng(seed);
  const std::size_t n_units = mode == EvalMode::iii ? g.n_sources : g.n_targets;
  std::vector<std::size_t> order(n_units);
  for (std::size_t u = 0; u < n_units; ++u) order[u] = u;
  rng.shuffle(std::span(order));

  std::vector<bool> held(n_units, false);
  std::vector<bool> tried(n_units, false);
  std::vector<Slot> slot(n, Slot::train);
  for (std::size_t step = 0; step < n_units && count(slot, Slot::test) < test_goal; ++step) {
    std::size_t k = step;
    if (mode == EvalMode::iii) {
      k = next_source(g, order, held, tried);
      if (k == order.size()) break;
    }
    const std::size_t unit = order[k];
    tried[unit] = true;
    held[unit] = true;
    auto candidate = derive(g, mode, held);
    if (feasible(g, mode, candidate)) {
      slot = std::move(candidate);
    } else {
      held[unit] = false;
    }
  }
  if (count(slot, Slot::test) == 0) throw InfeasibleSplitError(binding_constraint(mode));

  // Carve validation out of the training pool without breaking coverage.
  std::vector<std::size_t> pool;
  for (std::size_t t = 0; t < n; ++t) {
    if (slot[t] == Slot::train) pool.push_back(t);
  }
  rng.shuffle(std::span(pool));
  Coverage cov = coverage(g, mode, slot, false);
  Coverage cov_d2 = coverage(g, mode, slot, true);
  std::size_t train_left = pool.size();
  std::vector<bool> is_val(n, false);
  std::size_t n_val = 0;
  for (std::size_t t : pool) {
    if (n_val >= val_goal || train_left <= 1) break;
    std::vector<std::size_t> keys;
    if (mode == EvalMode::ii) keys = g.sources[t];
    if (mode == EvalMode::iii) keys = {g.target[t]};
    const bool breaks = std::any_of(keys.begin(), keys.end(), [&](std::size_t key) {
      return (cov.required[key] && cov.train_count[key] == 1) ||
             (g.consistent[t] && cov_d2.required[key] && cov_d2.train_count[key] == 1);
    });
    if (breaks) continue;
    for (auto key : keys) {
      --cov.train_count[key];
      if (g.consistent[t]) --cov_d2.train_count[key];
    }
    is_val[t] = true;
    ++n_val;
    --train_left;
  }

  SplitResult out;
  out.mode = mode;
  out.seed = seed;
  out.ratios = ratios;
  out.d1.name = "D1";
  out.d2.name = "D2";
  out.d1.mode = out.d2.mode = mode;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<std::string>* d1_list = nullptr;
    std::vector<std::string>* d2_list = nullptr;
    if (slot[t] == Slot::dropped) {
      out.unassigned.push_back(g.ids[t]);
      continue;
    }
    if (slot[t] == Slot::test) {
      d1_list = &out.d1.test;
      d2_list = &out.d2.test;
    } else if (is_val[t]) {
      d1_list = &out.d1.val;
      d2_list = &out.d2.val;
    } else {
      d1_list = &out.d1.train;
      d2_list = &out.d2.train;
    }
    d1_list->push_back(g.ids[t]);
    if (g.consistent[t]) d2_list->push_back(g.ids[t]);
  }
  for (auto* list : {&out.d1.train, &out.d1.val, &out.d1.test, &out.d2.train, &out.d2.val,
                     &out.d2.test, &out.unassigned}) {
    std::sort(list->begin(), list->end());
  }
  return out;
}

}  // namespace facesim
