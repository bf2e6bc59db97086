#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "facesim/attributes.hpp"
#include "facesim/corpus.hpp"
#include "facesim/csv.hpp"
#include "facesim/error.hpp"
#include "facesim/evaluator.hpp"
#include "facesim/metric.hpp"
#include "facesim/rng.hpp"
#include "facesim/selector.hpp"
#include "facesim/simd/kernels.hpp"
#include "facesim/synth.hpp"
#include "facesim/trainer.hpp"

namespace facesim::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kReportFormat = "facesim-report/1";

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Summary {
  double mean = 0.0;
  double sd = NAN;
};

Summary mean_sd(std::span<const double> xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

json option_value(const CLI::Option& opt) {
  if (opt.count() == 0) {
    const std::string d = opt.get_default_str();
    return d.empty() ? json(nullptr) : json(d);
  }
  const auto& r = opt.results();
  if (r.size() == 1) return r.front();
  return json(r);
}

struct Globals {
  std::string kernel = "auto";
};

// Every report carries the exact options it was produced with.
json report_base(const CLI::App& sub, const Globals& g) {
  json options = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    options[name] = option_value(*opt);
  }
  json rc;
  rc["subcommand"] = sub.get_name();
  rc["seed"] = options.contains("seed") ? options["seed"] : json(nullptr);
  rc["repeats"] = options.contains("repeats") ? options["repeats"] : json("1");
  rc["options"] = std::move(options);
  rc["kernel_requested"] = g.kernel;
  rc["kernel"] = std::string(simd::to_string(simd::active().isa));
  json r;
  r["format"] = kReportFormat;
  r["version"] = FACESIM_VERSION;
  r["run_config"] = std::move(rc);
  return r;
}

void emit(const json& report, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << report.dump(2) << '\n';
    return;
  }
  std::ofstream f;
  csv::open_for_write(f, path);
  f << report.dump(2) << '\n';
  if (!f) throw IoError("failed writing " + path);
}

fs::path repeat_path(const fs::path& p, std::size_t k, std::size_t n) {
  if (n == 1) return p;
  fs::path q = p;
  q.replace_filename(p.stem().string() + ".r" + std::to_string(k) + p.extension().string());
  return q;
}

std::vector<TripletSample> subset(std::span<const TripletSample> samples,
                                  std::span<const std::string> ids) {
  std::map<std::string_view, const TripletSample*> by_id;
  for (const auto& s : samples) by_id.emplace(s.triplet_id, &s);
  std::vector<TripletSample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw IntegrityError("partition names unknown triplet '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

std::vector<TripletSample> consistent_only(std::vector<TripletSample> samples) {
  std::erase_if(samples, [](const TripletSample& s) { return !(s.admitted() && s.consistent); });
  return samples;
}

const std::vector<std::string>& partition_part(const DatasetPartition& p, const std::string& part) {
  if (part == "train") return p.train;
  if (part == "val") return p.val;
  return p.test;
}

ProjectionModel model_or_identity(const std::string& path, std::size_t dim) {
  if (path.empty()) return ProjectionModel::identity(dim);
  ProjectionModel m = load_model(path);
  if (m.dim() != dim) {
    throw FormatError(path + ": model dimension " + std::to_string(m.dim()) +
                      " does not match embedding dimension " + std::to_string(dim));
  }
  return m;
}

CiOptions ci_options(const std::string& ci) {
  return {ci == "student-t" ? CiStatistic::student_t : CiStatistic::normal};
}

template <class E, class F>
E enum_flag(const std::string& text, F parse, const char* what) {
  auto v = parse(text);
  if (!v) throw UsageError(std::string("unknown ") + what + " '" + text + "'");
  return *v;
}

// ---- ingest

struct IngestArgs {
  std::string embeddings, out, report;
};

int do_ingest(const IngestArgs& a, const json& base, std::ostream& out) {
  const EmbeddingTable table = load_embeddings(a.embeddings);
  if (!a.out.empty()) save_embeddings(a.out, table);
  std::map<std::string, std::size_t> roles, genders, ages;
  for (const auto& r : table) {
    ++roles[std::string(to_string(r.role))];
    ++genders[std::string(to_string(r.gender))];
    ++ages[std::string(to_string(r.age_group))];
  }
  json rep = base;
  rep["records"] = table.size();
  rep["dim"] = table.dim();
  rep["roles"] = roles;
  rep["gender"] = genders;
  rep["age_group"] = ages;
  emit(rep, a.report, out);
  return 0;
}

// ---- validate

struct ValidateArgs {
  std::string annotations, manifest, out, report;
  std::size_t min_votes = 3;
};

int do_validate(const ValidateArgs& a, const json& base, std::ostream& out) {
  const auto raw = load_annotations(a.annotations);
  const auto manifest = load_manifest(a.manifest);
  const auto valid = validate_annotators(raw);
  const auto samples = aggregate_triplets(raw, valid, manifest, {a.min_votes});
  save_triplets(a.out, samples);

  std::set<std::string> all;
  for (const auto& r : raw) all.insert(r.annotator_id);
  std::vector<std::string> invalid;
  std::set_difference(all.begin(), all.end(), valid.begin(), valid.end(),
                      std::back_inserter(invalid));
  std::size_t admitted = 0, consistent = 0, few = 0, tied = 0;
  for (const auto& s : samples) {
    if (s.admitted()) ++admitted;
    if (s.admitted() && s.consistent) ++consistent;
    if (s.rejection == Rejection::too_few_votes) ++few;
    if (s.rejection == Rejection::tied) ++tied;
  }
  const Datasets ds = build_datasets(samples);

  json rep = base;
  rep["annotators"] = {{"total", all.size()},
                       {"valid", std::vector<std::string>(valid.begin(), valid.end())},
                       {"invalid", invalid}};
  rep["samples"] = {{"total", samples.size()},
                    {"admitted", admitted},
                    {"consistent", consistent},
                    {"rejected_too_few_votes", few},
                    {"rejected_tied", tied}};
  rep["datasets"] = {{"D1", ds.d1.size()}, {"D2", ds.d2.size()}};
  rep["warnings"] = ds.warnings;
  emit(rep, a.report, out);
  return 0;
}

// ---- split

struct SplitArgs {
  std::string triplets, embeddings, mode, out, report;
  std::vector<double> ratios{0.7, 0.1, 0.2};
  std::uint64_t seed = 0;
};

json partition_sizes(const DatasetPartition& p) {
  return {{"train", p.train.size()}, {"val", p.val.size()}, {"test", p.test.size()}};
}

int do_split(const SplitArgs& a, const json& base, std::ostream& out) {
  const auto samples = load_triplets(a.triplets);
  const auto table = load_embeddings(a.embeddings);
  const EvalMode mode = enum_flag<EvalMode>(a.mode, parse_eval_mode, "split mode");
  const SplitRatios ratios{a.ratios[0], a.ratios[1], a.ratios[2]};
  const SplitResult split = split_eval(samples, table, mode, ratios, a.seed);
  const AuditReport audit = audit_split(split, samples, table);
  if (!audit.ok()) throw IntegrityError("split failed its audit: " + audit.violations.front());
  save_partition(a.out, split);

  json rep = base;
  rep["mode"] = std::string(to_string(mode));
  rep["D1"] = partition_sizes(split.d1);
  rep["D2"] = partition_sizes(split.d2);
  rep["unassigned"] = split.unassigned.size();
  rep["audit"] = {{"ok", audit.ok()}, {"violations", audit.violations}};
  emit(rep, a.report, out);
  return 0;
}

// ---- train

struct TrainArgs {
  std::string triplets, embeddings, partition, dataset = "D2", init, out, history, report;
  TrainConfig config;
  bool no_shuffle = false;
  std::size_t repeats = 3;
};

int do_train(const TrainArgs& a, const json& base, std::ostream& out) {
  if (a.repeats == 0) throw UsageError("--repeats must be at least 1");
  const auto samples = load_triplets(a.triplets);
  const auto table = load_embeddings(a.embeddings);
  const ProjectionModel initial = model_or_identity(a.init, table.dim());

  std::vector<TripletSample> train_samples, val_samples;
  if (!a.partition.empty()) {
    const SplitResult split = load_partition(a.partition);
    const DatasetPartition& p = split.dataset(a.dataset);
    train_samples = subset(samples, p.train);
    val_samples = consistent_only(subset(samples, p.val));
  } else {
    const Datasets ds = build_datasets(samples);
    train_samples = subset(samples, a.dataset == "D1" ? ds.d1 : ds.d2);
  }
  if (train_samples.empty()) throw ValidationError("dataset " + a.dataset + " has no training samples");
  const auto train_set = resolve_triplets(train_samples, table);
  const auto val_set = resolve_triplets(val_samples, table);

  json runs = json::array();
  for (std::size_t k = 0; k < a.repeats; ++k) {
    TrainConfig cfg = a.config;
    cfg.shuffle = !a.no_shuffle;
    cfg.seed = a.config.seed + k;
    const TrainResult result = train(initial, train_set, val_set, cfg);
    const fs::path model_path = repeat_path(a.out, k, a.repeats);
    save_model(model_path, result.model);
    json run;
    run["seed"] = cfg.seed;
    run["model"] = model_path.string();
    if (!a.history.empty()) {
      const fs::path hp = repeat_path(a.history, k, a.repeats);
      save_history_csv(hp, result.history);
      run["history"] = hp.string();
    }
    run["epochs"] = result.history.epochs();
    run["final_mean_loss"] = number(result.history.mean_loss.back());
    run["final_val_accuracy"] = number(result.history.val_accuracy.back());
    runs.push_back(std::move(run));
  }
  json rep = base;
  rep["dataset"] = a.dataset;
  rep["n_train"] = train_set.size();
  rep["n_val"] = val_set.size();
  rep["runs"] = std::move(runs);
  emit(rep, a.report, out);
  return 0;
}

// ---- eval-triplets

struct EvalTripletsArgs {
  std::vector<std::string> models;
  std::string triplets, embeddings, partition, dataset = "D2", part, report, scatter;
};

int do_eval_triplets(const EvalTripletsArgs& a, const json& base, std::ostream& out) {
  const auto samples = load_triplets(a.triplets);
  const auto table = load_embeddings(a.embeddings);
  std::vector<TripletSample> selected;
  std::string part = a.part;
  if (!a.partition.empty()) {
    if (part.empty()) part = "test";
    const SplitResult split = load_partition(a.partition);
    const DatasetPartition& p = split.dataset(a.dataset);
    if (part == "all") {
      for (const auto* ids : {&p.train, &p.val, &p.test}) {
        auto s = subset(samples, *ids);
        selected.insert(selected.end(), s.begin(), s.end());
      }
    } else {
      selected = subset(samples, partition_part(p, part));
    }
  } else {
    if (!part.empty() && part != "all") throw UsageError("--part " + part + " needs --partition");
    part = "all";
    selected = samples;
  }

  std::vector<std::string> models = a.models;
  if (models.empty()) models.push_back("");
  json evals = json::array();
  std::vector<double> accs;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const ProjectionModel model = model_or_identity(models[k], table.dim());
    const TripletEvaluation ev = eval_triplets(model, selected, table);
    json e;
    e["model"] = models[k].empty() ? json("identity") : json(models[k]);
    e["accuracy"] = round3(ev.accuracy);
    e["accuracy_exact"] = ev.accuracy;
    e["n_records"] = ev.records.size();
    e["n_correct"] = ev.n_correct;
    e["n_excluded"] = ev.n_excluded;
    if (!a.scatter.empty()) {
      const fs::path sp = repeat_path(a.scatter, k, models.size());
      export_scatter(sp, ev.records);
      e["scatter"] = sp.string();
    }
    accs.push_back(ev.accuracy);
    evals.push_back(std::move(e));
  }
  const Summary s = mean_sd(accs);
  json rep = base;
  rep["part"] = part;
  rep["n_selected"] = selected.size();
  rep["evaluations"] = std::move(evals);
  rep["accuracy_mean"] = round3(s.mean);
  rep["accuracy_sd"] = std::isfinite(s.sd) ? json(round3(s.sd)) : json(nullptr);
  emit(rep, a.report, out);
  return 0;
}

// ---- eval-attributes

struct EvalAttributesArgs {
  std::string model, candidates, queries, task = "four-way", ci = "normal", report, distances,
      outcomes;
  std::size_t per_group = 0;
  std::uint64_t seed = 0;
};

GroupSampling sampling(std::size_t per_group, std::uint64_t seed) {
  GroupSampling s;
  if (per_group > 0) s.per_intersection = per_group;
  s.seed = seed;
  return s;
}

int do_eval_attributes(const EvalAttributesArgs& a, const json& base, std::ostream& out) {
  const auto candidates = load_embeddings(a.candidates);
  const auto queries = load_embeddings(a.queries);
  if (candidates.dim() != queries.dim()) throw FormatError("candidate and query dimensions differ");
  const ProjectionModel model = model_or_identity(a.model, candidates.dim());
  const ClassificationTask task = enum_flag<ClassificationTask>(a.task, parse_task, "task");
  const CiOptions ci = ci_options(a.ci);
  const auto groups = build_groups(candidates.records(), sampling(a.per_group, a.seed));
  const ClassificationReport cr =
      evaluate_classification(model, queries.records(), groups, task, ci);

  json rows = json::array();
  for (const auto& m : cr.per_category) {
    rows.push_back({{"category", std::string(to_string(m.category))},
                    {"support", m.support},
                    {"predicted", m.predicted},
                    {"true_positive", m.true_positive},
                    {"precision", round3(m.precision)},
                    {"recall", round3(m.recall)},
                    {"accuracy", round3(m.accuracy)},
                    {"auc", std::isfinite(m.auc) ? json(round3(m.auc)) : json(nullptr)}});
  }
  json sizes = json::object();
  for (const auto& g : groups) sizes[std::string(to_string(g.name))] = g.members.size();
  std::vector<std::string> cats;
  for (GroupName g : cr.categories) cats.emplace_back(to_string(g));

  json rep = base;
  rep["task"] = std::string(to_string(task));
  rep["n_queries"] = cr.n_queries;
  rep["accuracy"] = round3(cr.accuracy);
  rep["categories"] = cats;
  rep["confusion"] = cr.confusion;
  rep["rows"] = std::move(rows);
  rep["group_sizes"] = std::move(sizes);

  if (!a.outcomes.empty()) {
    std::ofstream f;
    csv::open_for_write(f, a.outcomes);
    f << "query_id,truth,predicted";
    for (const auto& c : cats) f << ",upper_" << c;
    f << '\n';
    for (const auto& o : cr.outcomes) {
      f << o.query_id << ',' << to_string(o.truth) << ',' << to_string(o.predicted);
      for (const auto& d : o.distances) f << ',' << csv::format_double(d.upper);
      f << '\n';
    }
    if (!f) throw IoError("failed writing " + a.outcomes);
    rep["outcomes"] = a.outcomes;
  }
  if (!a.distances.empty()) {
    std::ofstream f;
    csv::open_for_write(f, a.distances);
    f << "query_id,truth,group,distance\n";
    for (const auto& q : queries) {
      const auto truth = task_label(task, q);
      for (GroupName gname : cr.categories) {
        for (double d : member_distances(model, q, find_group(groups, gname))) {
          f << q.image_id << ',' << (truth ? to_string(*truth) : "unknown") << ','
            << to_string(gname) << ',' << csv::format_double(d) << '\n';
        }
      }
    }
    if (!f) throw IoError("failed writing " + a.distances);
    rep["distances"] = a.distances;
  }
  emit(rep, a.report, out);
  return 0;
}

// ---- select

struct SelectArgs {
  std::string model, candidates, queries, group_mode = "intersection", ci = "normal", report,
      ranking;
  std::vector<std::string> query_ids;
  std::size_t k = 5, per_group = 0;
  std::uint64_t seed = 0;
};

int do_select(const SelectArgs& a, const json& base, std::ostream& out) {
  const auto candidates = load_embeddings(a.candidates);
  const auto queries = load_embeddings(a.queries);
  if (candidates.dim() != queries.dim()) throw FormatError("candidate and query dimensions differ");
  const ProjectionModel model = model_or_identity(a.model, candidates.dim());
  const GroupMode mode = enum_flag<GroupMode>(a.group_mode, parse_group_mode, "group mode");
  const auto groups = build_groups(candidates.records(), sampling(a.per_group, a.seed));

  std::vector<const EmbeddingRecord*> picked;
  if (a.query_ids.empty()) {
    for (const auto& q : queries) picked.push_back(&q);
  } else {
    for (const auto& id : a.query_ids) picked.push_back(&queries.at(id));
  }

  std::ofstream rank_out;
  if (!a.ranking.empty()) {
    csv::open_for_write(rank_out, a.ranking);
    rank_out << "query_id,group,rank,image_id,similarity,recommended\n";
  }
  json recs = json::array();
  for (const EmbeddingRecord* q : picked) {
    std::vector<RankedCandidate> full;
    const Recommendation rec = recommend(model, *q, groups, a.k, mode, ci_options(a.ci), full);
    json cands = json::array();
    for (const auto& c : rec.candidates) {
      cands.push_back({{"image_id", c.image_id}, {"similarity", c.similarity}, {"rank", c.rank}});
    }
    recs.push_back({{"query_id", rec.query_id},
                    {"selected_group", std::string(to_string(rec.selected_group))},
                    {"k", rec.k},
                    {"group_size", full.size()},
                    {"candidates", std::move(cands)}});
    if (rank_out.is_open()) {
      const std::size_t cut = full.size() - rec.candidates.size();
      for (const auto& c : full) {
        rank_out << rec.query_id << ',' << to_string(rec.selected_group) << ',' << c.rank << ','
                 << c.image_id << ',' << csv::format_double(c.similarity) << ','
                 << (c.rank > cut ? 1 : 0) << '\n';
      }
    }
  }
  if (rank_out.is_open() && !rank_out) throw IoError("failed writing " + a.ranking);
  json rep = base;
  rep["group_mode"] = std::string(to_string(mode));
  rep["recommendations"] = std::move(recs);
  emit(rep, a.report, out);
  return 0;
}

// ---- gradcheck

struct GradcheckArgs {
  std::size_t dim = 16, probes = 100, batch_size = 4, entries = 0;
  double margin = 0.1, step = 1e-5, floor = 1e-3, tolerance = 1e-4;
  std::uint64_t seed = 0;
  std::string triplets, embeddings, model, report;
};

int do_gradcheck(const GradcheckArgs& a, const json& base, std::ostream& out, std::ostream& err) {
  if (a.probes == 0 || a.batch_size == 0) throw UsageError("--probes and --batch-size must be positive");
  const bool from_data = !a.triplets.empty() || !a.embeddings.empty();
  if (from_data && (a.triplets.empty() || a.embeddings.empty())) {
    throw UsageError("--triplets and --embeddings go together");
  }
  Rng rng(a.seed);
  std::vector<TripletVectors> pool;
  ProjectionModel data_model;
  if (from_data) {
    auto samples = load_triplets(a.triplets);
    std::erase_if(samples, [](const TripletSample& s) { return !s.admitted(); });
    const auto table = load_embeddings(a.embeddings);
    pool = resolve_triplets(samples, table);
    if (pool.empty()) throw ValidationError("no admitted triplets to probe");
    data_model = model_or_identity(a.model, table.dim());
  }

  GradientCheckOptions opt;
  opt.step = a.step;
  opt.magnitude_floor = a.floor;
  opt.max_entries = a.entries;
  json probes = json::array();
  double worst = 0.0;
  std::size_t worst_probe = 0, total_active = 0, total_entries = 0;
  for (std::size_t p = 0; p < a.probes; ++p) {
    opt.seed = rng.next();
    GradientCheckResult r;
    std::size_t active = 0;
    if (from_data) {
      std::vector<TripletVectors> batch;
      for (std::size_t i = 0; i < a.batch_size; ++i) batch.push_back(pool[rng.uniform_index(pool.size())]);
      active = batch_loss_and_gradient(data_model, batch, a.margin).active;
      r = gradient_check(data_model, batch, a.margin, opt);
    } else {
      const GradientProbe probe = synth_gradient_probe(a.dim, a.batch_size, a.margin, rng.next());
      active = probe.batch.size();
      r = gradient_check(probe.model, probe.batch, a.margin, opt);
    }
    total_active += active;
    total_entries += r.entries_checked;
    if (r.max_relative_error > worst || p == 0) {
      worst = r.max_relative_error;
      worst_probe = p;
    }
    probes.push_back({{"probe", p},
                      {"active", active},
                      {"max_relative_error", r.max_relative_error},
                      {"worst_entry", {r.worst_row, r.worst_col}},
                      {"analytic", r.analytic},
                      {"numeric", r.numeric}});
  }
  const bool pass = worst <= a.tolerance;
  json rep = base;
  rep["source"] = from_data ? "data" : "synthetic";
  rep["max_relative_error"] = worst;
  rep["worst_probe"] = worst_probe;
  rep["tolerance"] = a.tolerance;
  rep["pass"] = pass;
  rep["active_hinges"] = total_active;
  rep["entries_checked"] = total_entries;
  rep["probes"] = std::move(probes);
  emit(rep, a.report, out);
  if (!pass) {
    err << "facesim: gradient check failed: max relative error " << worst << " exceeds "
        << a.tolerance << " (probe " << worst_probe << ")\n";
    return 1;
  }
  return 0;
}

// ---- synth

struct SynthArgs {
  std::string preset, out, report;
  PlantedConfig planted;
  ClusteredConfig clustered;
  std::uint64_t seed = 7;
  std::size_t dim = 32;
};

int do_synth(const SynthArgs& a, const json& base, std::ostream& out) {
  json rep = base;
  rep["preset"] = a.preset;
  rep["out"] = a.out;
  if (a.preset == "planted") {
    PlantedConfig cfg = a.planted;
    cfg.seed = a.seed;
    cfg.dim = a.dim;
    const PlantedCorpus corpus = synth_planted(cfg);
    save_planted(a.out, corpus);
    const auto valid = validate_annotators(corpus.annotations);
    const auto samples = aggregate_triplets(corpus.annotations, valid, corpus.manifest);
    const auto heldout = subset(samples, corpus.partition.d1.test);
    rep["records"] = corpus.embeddings.size();
    rep["triplets"] = corpus.manifest.size();
    rep["flipped"] = corpus.flipped.size();
    rep["D1"] = partition_sizes(corpus.partition.d1);
    rep["D2"] = partition_sizes(corpus.partition.d2);
    const ProjectionModel identity = ProjectionModel::identity(cfg.dim);
    rep["identity_heldout_accuracy"] = eval_triplets(identity, heldout, corpus.embeddings).accuracy;
    rep["oracle_heldout_accuracy"] =
        eval_triplets(ProjectionModel{corpus.hidden_metric}, heldout, corpus.embeddings).accuracy;
  } else {
    ClusteredConfig cfg = a.clustered;
    cfg.seed = a.seed;
    cfg.dim = a.dim;
    const ClusteredCorpus corpus = synth_clustered(cfg);
    save_clustered(a.out, corpus);
    rep["candidates"] = corpus.candidates.size();
    rep["queries"] = corpus.queries.size();
  }
  emit(rep, a.report, out);
  return 0;
}

// ---- wiring

void add_config_flags(CLI::App* sub, TrainConfig& c) {
  sub->add_option("--lr", c.learning_rate, "Learning rate");
  sub->add_option("--momentum", c.momentum, "SGD momentum");
  sub->add_option("--weight-decay", c.weight_decay, "Coupled L2 weight decay");
  sub->add_option("--batch-size", c.batch_size, "Mini-batch size (last partial batch kept)");
  sub->add_option("--margin", c.margin, "Triplet margin");
  sub->add_option("--epochs", c.epochs, "Training epochs");
  sub->add_option("--seed", c.seed, "Seed of the first run; run k uses seed + k");
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perceptual face-similarity metric learning and face-swap source selection",
               "facesim"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", FACESIM_VERSION);
  app.require_subcommand(1);

  Globals g;
  app.add_option("--kernel", g.kernel, "Kernel variant: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Validate an embedding table and summarize it");
  s_ingest->add_option("--embeddings", ingest.embeddings, "Embedding CSV")->required();
  s_ingest->add_option("--out", ingest.out, "Write the table back in canonical form");
  s_ingest->add_option("--report", ingest.report, "JSON report path (stdout if omitted)");

  ValidateArgs validate;
  auto* s_validate = app.add_subcommand(
      "validate", "Screen annotators on dummy samples and aggregate votes per triplet");
  s_validate->add_option("--annotations", validate.annotations, "Raw annotation CSV")
      ->required();
  s_validate->add_option("--manifest", validate.manifest, "Triplet manifest CSV")
      ->required();
  s_validate->add_option("--min-votes", validate.min_votes, "Valid votes needed to admit a triplet");
  s_validate->add_option("--out", validate.out, "Aggregated triplet CSV")->required();
  s_validate->add_option("--report", validate.report, "JSON report path (stdout if omitted)");

  SplitArgs split;
  auto* s_split = app.add_subcommand("split", "Split admitted triplets by source/target knowledge");
  s_split->add_option("--triplets", split.triplets, "Aggregated triplet CSV")->required();
  s_split->add_option("--embeddings", split.embeddings, "Embedding CSV")->required();
  s_split->add_option("--mode", split.mode, "i, ii or iii")
      ->required()->check(CLI::IsMember({"i", "ii", "iii"}));
  s_split->add_option("--ratios", split.ratios, "Train, val and test fractions")->expected(3);
  s_split->add_option("--seed", split.seed, "Shuffle seed");
  s_split->add_option("--out", split.out, "Partition JSON")->required();
  s_split->add_option("--report", split.report, "JSON report path (stdout if omitted)");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Fit a projection with the triplet loss");
  s_train->add_option("--triplets", tr.triplets, "Aggregated triplet CSV")->required();
  s_train->add_option("--embeddings", tr.embeddings, "Embedding CSV")->required();
  s_train->add_option("--partition", tr.partition, "Partition JSON; trains on its train part")
      ;
  s_train->add_option("--dataset", tr.dataset, "D1 (all admitted) or D2 (consistent only)")
      ->check(CLI::IsMember({"D1", "D2"}));
  s_train->add_option("--init", tr.init, "Initial model JSON (identity if omitted)");
  s_train->add_option("--out", tr.out, "Model JSON; repeats insert .rK before the extension")
      ->required();
  s_train->add_option("--history", tr.history, "Per-epoch history CSV");
  add_config_flags(s_train, tr.config);
  s_train->add_flag("--no-shuffle", tr.no_shuffle, "Keep input order in every epoch");
  s_train->add_option("--repeats", tr.repeats, "Independent runs with consecutive seeds");
  s_train->add_option("--report", tr.report, "JSON report path (stdout if omitted)");

  EvalTripletsArgs et;
  auto* s_et = app.add_subcommand("eval-triplets", "Similar/dissimilar pair accuracy");
  s_et->add_option("--model", et.models, "Model JSON, repeatable (identity if omitted)")
      ;
  s_et->add_option("--triplets", et.triplets, "Aggregated triplet CSV")->required();
  s_et->add_option("--embeddings", et.embeddings, "Embedding CSV")->required();
  s_et->add_option("--partition", et.partition, "Partition JSON");
  s_et->add_option("--dataset", et.dataset, "D1 or D2")->check(CLI::IsMember({"D1", "D2"}));
  s_et->add_option("--part", et.part, "train, val, test or all (test by default with a partition)")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  s_et->add_option("--scatter", et.scatter, "Scatter CSV; one per model (.rK) when repeated");
  s_et->add_option("--report", et.report, "JSON report path (stdout if omitted)");

  EvalAttributesArgs ea;
  auto* s_ea = app.add_subcommand("eval-attributes", "Attribute-group classification metrics");
  s_ea->add_option("--model", ea.model, "Model JSON (identity if omitted)");
  s_ea->add_option("--candidates", ea.candidates, "Attribute-labeled candidate table")
      ->required();
  s_ea->add_option("--queries", ea.queries, "Labeled query table")->required();
  s_ea->add_option("--task", ea.task, "gender, age or four-way")
      ->check(CLI::IsMember({"gender", "age", "four-way"}));
  s_ea->add_option("--per-group", ea.per_group, "Members sampled per intersection group (0 = all)");
  s_ea->add_option("--seed", ea.seed, "Group sampling seed");
  s_ea->add_option("--ci", ea.ci, "normal or student-t")->check(CLI::IsMember({"normal", "student-t"}));
  s_ea->add_option("--distances", ea.distances, "Per-member distance CSV");
  s_ea->add_option("--outcomes", ea.outcomes, "Per-query outcome CSV");
  s_ea->add_option("--report", ea.report, "JSON report path (stdout if omitted)");

  SelectArgs sel;
  auto* s_sel = app.add_subcommand("select", "Recommend dissimilar same-attribute swap sources");
  s_sel->add_option("--model", sel.model, "Model JSON (identity if omitted)");
  s_sel->add_option("--candidates", sel.candidates, "Attribute-labeled candidate table")
      ->required();
  s_sel->add_option("--queries", sel.queries, "Query table (one or more rows)")
      ->required();
  s_sel->add_option("--query-id", sel.query_ids, "Restrict to these queries, repeatable");
  s_sel->add_option("-k,--k", sel.k, "Candidates to recommend");
  s_sel->add_option("--group-mode", sel.group_mode, "intersection or all")
      ->check(CLI::IsMember({"intersection", "all"}));
  s_sel->add_option("--per-group", sel.per_group, "Members sampled per intersection group (0 = all)");
  s_sel->add_option("--seed", sel.seed, "Group sampling seed");
  s_sel->add_option("--ci", sel.ci, "normal or student-t")->check(CLI::IsMember({"normal", "student-t"}));
  s_sel->add_option("--ranking", sel.ranking, "Full ranking CSV");
  s_sel->add_option("--report", sel.report, "JSON report path (stdout if omitted)");

  GradcheckArgs gc;
  auto* s_gc = app.add_subcommand("gradcheck", "Analytic gradient versus central differences");
  s_gc->add_option("--dim", gc.dim, "Dimension of synthetic probes");
  s_gc->add_option("--probes", gc.probes, "Number of probes");
  s_gc->add_option("--batch-size", gc.batch_size, "Triplets per probe");
  s_gc->add_option("--margin", gc.margin, "Triplet margin");
  s_gc->add_option("--step", gc.step, "Finite-difference step");
  s_gc->add_option("--floor", gc.floor, "Relative-error denominator floor");
  s_gc->add_option("--entries", gc.entries, "Weight entries sampled per probe (0 = all)");
  s_gc->add_option("--tolerance", gc.tolerance, "Largest acceptable relative error");
  s_gc->add_option("--seed", gc.seed, "Probe seed");
  s_gc->add_option("--triplets", gc.triplets, "Probe real triplets instead");
  s_gc->add_option("--embeddings", gc.embeddings, "Embeddings for --triplets");
  s_gc->add_option("--model", gc.model, "Model for --triplets (identity if omitted)");
  s_gc->add_option("--report", gc.report, "JSON report path (stdout if omitted)");

  SynthArgs sy;
  auto* s_sy = app.add_subcommand("synth", "Write a seeded synthetic corpus");
  s_sy->add_option("--preset", sy.preset, "planted or clustered-attributes")
      ->required()->check(CLI::IsMember({"planted", "clustered-attributes"}));
  s_sy->add_option("--seed", sy.seed, "Generator seed");
  s_sy->add_option("--out", sy.out, "Output directory")->required();
  s_sy->add_option("--dim", sy.dim, "Embedding dimension");
  s_sy->add_option("--n-train", sy.planted.n_train, "planted: training triplets");
  s_sy->add_option("--n-val", sy.planted.n_val, "planted: validation triplets");
  s_sy->add_option("--n-heldout", sy.planted.n_heldout, "planted: held-out triplets");
  s_sy->add_option("--flip-fraction", sy.planted.flip_fraction, "planted: label-noise fraction");
  s_sy->add_option("--min-gap", sy.planted.min_gap, "planted: minimum hidden-metric cosine gap");
  s_sy->add_option("--candidates-per-cluster", sy.clustered.candidates_per_cluster,
                   "clustered-attributes: candidates per cluster");
  s_sy->add_option("--queries", sy.clustered.queries, "clustered-attributes: query count");
  s_sy->add_option("--separation", sy.clustered.separation, "clustered-attributes: mean norm");
  s_sy->add_option("--noise", sy.clustered.noise, "clustered-attributes: per-component SD");
  s_sy->add_option("--report", sy.report, "JSON report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  if (g.kernel == "auto") {
    simd::reset_isa();
  } else {
    simd::Isa isa{};
    simd::parse_isa(g.kernel, isa);
    if (!simd::isa_supported(isa)) throw UsageError("kernel '" + g.kernel + "' is not available here");
    simd::force_isa(isa);
  }

  if (s_ingest->parsed()) return do_ingest(ingest, report_base(*s_ingest, g), out);
  if (s_validate->parsed()) return do_validate(validate, report_base(*s_validate, g), out);
  if (s_split->parsed()) return do_split(split, report_base(*s_split, g), out);
  if (s_train->parsed()) return do_train(tr, report_base(*s_train, g), out);
  if (s_et->parsed()) return do_eval_triplets(et, report_base(*s_et, g), out);
  if (s_ea->parsed()) return do_eval_attributes(ea, report_base(*s_ea, g), out);
  if (s_sel->parsed()) return do_select(sel, report_base(*s_sel, g), out);
  if (s_gc->parsed()) return do_gradcheck(gc, report_base(*s_gc, g), out, err);
  return do_synth(sy, report_base(*s_sy, g), out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const Error& e) {
    err << "facesim: " << e.kind() << " error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "facesim: internal error: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace facesim::cli
