#include <algorithm>
#include <iterator>
#include <map>

#include "facesim/corpus.hpp"

namespace facesim {
namespace {

using IdSet = std::set<std::string>;

IdSet as_set(const std::vector<std::string>& v) { return IdSet(v.begin(), v.end()); }

IdSet intersect(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

IdSet minus(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

std::string preview(const IdSet& s) {
  std::string out;
  std::size_t k = 0;
  for (const auto& id : s) {
    if (k++ == 3) {
      out += ", ...";
      break;
    }
    out += (out.empty() ? "" : ", ") + id;
  }
  return "{" + out + "}";
}

struct SideIdentities {
  IdSet targets;
  IdSet sources;
};

}  // namespace

AuditReport audit_split(const SplitResult& split, std::span<const TripletSample> samples,
                        const EmbeddingTable& table) {
  AuditReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  std::map<std::string, const TripletSample*> by_id;
  for (const auto& s : samples) by_id.emplace(s.triplet_id, &s);

  auto sides_of = [&](const std::vector<std::string>& ids, const std::string& label) {
    SideIdentities side;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        fail(label + " lists unknown triplet '" + id + "'");
        continue;
      }
      if (!it->second->admitted()) fail(label + " lists rejected triplet '" + id + "'");
      for (const std::string* image :
           {&it->second->ref_id, &it->second->option_a_id, &it->second->option_b_id}) {
        const EmbeddingRecord* rec = table.find(*image);
        if (rec == nullptr) {
          fail(label + " triplet '" + id + "' references unknown image '" + *image + "'");
          continue;
        }
        side.sources.insert(rec->identity_id);
        if (rec->target_id) side.targets.insert(*rec->target_id);
      }
    }
    return side;
  };

  for (const DatasetPartition* p : {&split.d1, &split.d2}) {
    const IdSet train = as_set(p->train), val = as_set(p->val), test = as_set(p->test);
    if (train.size() != p->train.size() || val.size() != p->val.size() ||
        test.size() != p->test.size()) {
      fail(p->name + ": a split lists a triplet twice");
    }
    if (!intersect(train, val).empty()) fail(p->name + ": train and val overlap");
    if (!intersect(train, test).empty()) fail(p->name + ": train and test overlap");
    if (!intersect(val, test).empty()) fail(p->name + ": val and test overlap");
    if (p->mode != split.mode) fail(p->name + ": mode differs from split mode");
  }

  for (auto [d2_list, d1_list, label] :
       {std::tuple{&split.d2.train, &split.d1.train, "train"},
        std::tuple{&split.d2.val, &split.d1.val, "val"},
        std::tuple{&split.d2.test, &split.d1.test, "test"}}) {
    const IdSet extra = minus(as_set(*d2_list), as_set(*d1_list));
    if (!extra.empty()) fail(std::string("D2 ") + label + " not within D1: " + preview(extra));
    for (const auto& id : *d2_list) {
      auto it = by_id.find(id);
      if (it != by_id.end() && !it->second->consistent) {
        fail("D2 " + std::string(label) + " holds inconsistent triplet '" + id + "'");
      }
    }
  }

  for (const DatasetPartition* p : {&split.d1, &split.d2}) {
    if (p->test.empty() || p->train.empty()) continue;
    const SideIdentities train = sides_of(p->train, p->name + " train");
    const SideIdentities test = sides_of(p->test, p->name + " test");
    const IdSet shared_targets = intersect(train.targets, test.targets);
    const IdSet shared_sources = intersect(train.sources, test.sources);
    const std::string tag = p->name + " mode " + std::string(to_string(split.mode)) + ": ";
    switch (split.mode) {
      case EvalMode::i:
        if (!shared_targets.empty()) fail(tag + "test shares targets " + preview(shared_targets));
        if (!shared_sources.empty()) fail(tag + "test shares sources " + preview(shared_sources));
        break;
      case EvalMode::ii: {
        if (!shared_targets.empty()) fail(tag + "test shares targets " + preview(shared_targets));
        const IdSet unseen = minus(test.sources, train.sources);
        if (!unseen.empty()) fail(tag + "test sources absent from train " + preview(unseen));
        break;
      }
      case EvalMode::iii: {
        if (!shared_sources.empty()) fail(tag + "test shares sources " + preview(shared_sources));
        const IdSet unseen = minus(test.targets, train.targets);
        if (!unseen.empty()) fail(tag + "test targets absent from train " + preview(unseen));
        break;
      }
    }
  }
  return report;
}

}  // namespace facesim
