#include "facesim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "facesim/csv.hpp"
#include "facesim/error.hpp"
#include "facesim/evaluator.hpp"
#include "facesim/rng.hpp"
#include "facesim/simd/kernels.hpp"

namespace facesim {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ValidationError("weight_decay must be non-negative");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw ValidationError("margin must be non-negative");
}

std::vector<TripletVectors> resolve_triplets(std::span<const TripletSample> samples,
                                             const EmbeddingTable& table) {
  std::vector<TripletVectors> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.admitted()) {
      throw IntegrityError("triplet '" + s.triplet_id + "' was rejected and cannot be used");
    }
    // Look everything up first: a throw inside the aggregate initializer
    // leaks the members already built on some GCC versions.
    const auto& anchor = table.at(s.ref_id);
    const auto& positive = table.at(s.positive_id());
    const auto& negative = table.at(s.negative_id());
    out.push_back(TripletVectors{s.triplet_id, anchor.vector, positive.vector, negative.vector});
  }
  return out;
}

double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin) {
  const double hinge = cosine(anchor, negative) - cosine(anchor, positive) + margin;
  return std::max(0.0, hinge);
}

namespace {

struct CosineParts {
  double value;
  double inv_norm_u;
  double inv_norm_v;
};

CosineParts cosine_parts(std::span<const double> u, std::span<const double> v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (!(nu > 0.0) || !(nv > 0.0)) throw DegenerateVectorError("projected triplet vector is zero");
  return {std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0), 1.0 / nu, 1.0 / nv};
}

// grad += weight * d cos(u, v) / du  =  weight * (v / (|u||v|) - cos * u / |u|^2)
void add_cosine_grad(std::span<double> grad, double weight, const CosineParts& c,
                     std::span<const double> u, std::span<const double> v) {
  axpy(weight * c.inv_norm_u * c.inv_norm_v, v, grad);
  axpy(-weight * c.value * c.inv_norm_u * c.inv_norm_u, u, grad);
}

void check_dims(const ProjectionModel& model, const TripletVectors& t) {
  const std::size_t d = model.dim();
  if (t.anchor.size() != d || t.positive.size() != d || t.negative.size() != d) {
    throw FormatError("triplet '" + t.triplet_id + "' does not match model dimension " +
                      std::to_string(d));
  }
}

LossAndGradient accumulate(const ProjectionModel& model,
                           std::span<const TripletVectors* const> batch, double margin) {
  if (batch.empty()) throw ValidationError("empty batch");
  const std::size_t d = model.dim();
  LossAndGradient out;
  out.gradient = Matrix::zeros(d, d);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Vector a(d), p(d), n(d), ga(d), gp(d), gn(d);
  double total = 0.0;
  for (const TripletVectors* tp : batch) {
    const TripletVectors& t = *tp;
    check_dims(model, t);
    gemv(model.weight(), t.anchor, a);
    gemv(model.weight(), t.positive, p);
    gemv(model.weight(), t.negative, n);
    const CosineParts an = cosine_parts(a, n);
    const CosineParts ap = cosine_parts(a, p);
    const double hinge = an.value - ap.value + margin;
    if (!(hinge > 0.0)) continue;
    total += hinge;
    ++out.active;

    std::fill(ga.begin(), ga.end(), 0.0);
    std::fill(gp.begin(), gp.end(), 0.0);
    std::fill(gn.begin(), gn.end(), 0.0);
    add_cosine_grad(ga, scale, an, a, n);
    add_cosine_grad(ga, -scale, ap, a, p);
    add_cosine_grad(gn, scale, {an.value, an.inv_norm_v, an.inv_norm_u}, n, a);
    add_cosine_grad(gp, -scale, {ap.value, ap.inv_norm_v, ap.inv_norm_u}, p, a);
    // dL/dW = sum over projected vectors y = W x of (dL/dy) x^T
    rank1_update(out.gradient, ga, t.anchor);
    rank1_update(out.gradient, gp, t.positive);
    rank1_update(out.gradient, gn, t.negative);
  }
  out.loss = total * scale;
  return out;
}

}  // namespace

LossAndGradient batch_loss_and_gradient(const ProjectionModel& model,
                                        std::span<const TripletVectors> batch, double margin) {
  std::vector<const TripletVectors*> refs;
  refs.reserve(batch.size());
  for (const auto& t : batch) refs.push_back(&t);
  return accumulate(model, refs, margin);
}

double batch_loss(const ProjectionModel& model, std::span<const TripletVectors> batch,
                  double margin) {
  if (batch.empty()) throw ValidationError("empty batch");
  const std::size_t d = model.dim();
  Vector a(d), p(d), n(d);
  double total = 0.0;
  for (const auto& t : batch) {
    check_dims(model, t);
    gemv(model.weight(), t.anchor, a);
    gemv(model.weight(), t.positive, p);
    gemv(model.weight(), t.negative, n);
    total += triplet_loss(a, p, n, margin);
  }
  return total / static_cast<double>(batch.size());
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,mean_loss,val_accuracy,active_fraction\n";
  for (std::size_t e = 0; e < history.epochs(); ++e) {
    out << (e + 1) << ',' << csv::format_double(history.mean_loss[e]) << ',';
    if (!std::isnan(history.val_accuracy[e])) out << csv::format_double(history.val_accuracy[e]);
    out << ',' << csv::format_double(history.active_fraction[e]) << '\n';
  }
}

void save_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out;
  csv::open_for_write(out, path);
  write_history_csv(out, history);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TrainResult train(const ProjectionModel& initial, std::span<const TripletVectors> train_set,
                  std::span<const TripletVectors> val, const TrainConfig& config) {
  config.validate();
  if (config.epochs > 0 && train_set.empty()) throw ValidationError("training set is empty");
  for (const auto& t : train_set) check_dims(initial, t);

  Matrix weight = initial.weight();
  Matrix velocity = Matrix::zeros(weight.rows(), weight.cols());
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);
  const auto& kernels = simd::active();

  TrainHistory history;
  std::vector<const TripletVectors*> batch;
  batch.reserve(config.batch_size);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t active = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&train_set[order[k]]);

      const ProjectionModel current{weight};
      LossAndGradient lg = accumulate(current, batch, config.margin);
      if (!std::isfinite(lg.loss)) {
        throw DivergenceError(epoch + 1, batch_index + 1, "loss is not finite");
      }
      loss_sum += lg.loss * static_cast<double>(batch.size());
      active += lg.active;
      kernels.momentum_step(weight.values().data(), velocity.values().data(),
                            lg.gradient.values().data(), weight.size(), config.learning_rate,
                            config.momentum, config.weight_decay);
      if (!weight.all_finite()) {
        throw DivergenceError(epoch + 1, batch_index + 1, "weights are not finite");
      }
    }
    const double n = static_cast<double>(train_set.size());
    history.mean_loss.push_back(loss_sum / n);
    history.active_fraction.push_back(static_cast<double>(active) / n);
    history.val_accuracy.push_back(
        val.empty() ? std::nan("") : triplet_accuracy(ProjectionModel{weight}, val));
  }
  return TrainResult{ProjectionModel{std::move(weight)}, std::move(history)};
}

GradientCheckResult gradient_check(const ProjectionModel& model,
                                   std::span<const TripletVectors> batch, double margin,
                                   const GradientCheckOptions& options) {
  if (!(options.step > 0.0)) throw ValidationError("gradient check step must be positive");
  const LossAndGradient analytic = batch_loss_and_gradient(model, batch, margin);
  const std::size_t d = model.dim();

  std::vector<std::size_t> entries(d * d);
  for (std::size_t k = 0; k < entries.size(); ++k) entries[k] = k;
  if (options.max_entries > 0 && options.max_entries < entries.size()) {
    Rng rng(options.seed);
    rng.shuffle(std::span(entries));
    entries.resize(options.max_entries);
    std::sort(entries.begin(), entries.end());
  }

  GradientCheckResult result;
  Matrix probe = model.weight();
  for (std::size_t k : entries) {
    const std::size_t r = k / d;
    const std::size_t c = k % d;
    const double original = probe(r, c);
    probe(r, c) = original + options.step;
    const double up = batch_loss(ProjectionModel{probe}, batch, margin);
    probe(r, c) = original - options.step;
    const double down = batch_loss(ProjectionModel{probe}, batch, margin);
    probe(r, c) = original;

    const double numeric = (up - down) / (2.0 * options.step);
    const double exact = analytic.gradient(r, c);
    const double denom =
        std::max({std::abs(exact), std::abs(numeric), options.magnitude_floor});
    const double err = std::abs(exact - numeric) / denom;
    if (err > result.max_relative_error || result.entries_checked == 0) {
      result.max_relative_error = err;
      result.worst_row = r;
      result.worst_col = c;
      result.analytic = exact;
      result.numeric = numeric;
    }
    ++result.entries_checked;
  }
  return result;
}

}  // namespace facesim
