#include "liveguard/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace liveguard {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidConfig("train.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidConfig("train.momentum must be in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw InvalidConfig("train.weight_decay must be >= 0");
  if (batch_size < 2) throw InvalidConfig("train.batch_size must be >= 2");
  if (network.feature_dim == 0) throw InvalidConfig("train.network.feature_dim must be > 0");
  loss.validate();
}

PrototypeShape TrainConfig::resolve_shape() const {
  switch (prototype_shape) {
    case PrototypeShapeMode::Full: return PrototypeShape::Full;
    case PrototypeShapeMode::Diagonal: return PrototypeShape::Diagonal;
    case PrototypeShapeMode::Auto:
    default:
      return network.feature_dim > 32 ? PrototypeShape::Diagonal : PrototypeShape::Full;
  }
}

std::string grouping_to_string(GroupingMode mode) {
  switch (mode) {
    case GroupingMode::OneClass: return "one-class";
    case GroupingMode::Binary: return "binary";
    case GroupingMode::DomainBased: return "domain-based";
    case GroupingMode::AttackBased: return "attack-based";
  }
  return "attack-based";
}

GroupingMode grouping_from_string(const std::string& text) {
  if (text == "one-class") return GroupingMode::OneClass;
  if (text == "binary") return GroupingMode::Binary;
  if (text == "domain-based") return GroupingMode::DomainBased;
  if (text == "attack-based") return GroupingMode::AttackBased;
  throw InvalidConfig("unknown grouping mode '" + text + "'");
}

CategoryLayout build_category_layout(const Dataset& data, GroupingMode grouping) {
  if (data.samples.empty()) throw EmptyDataset("build_category_layout: no samples");

  CategoryLayout layout;
  layout.assignment.resize(data.samples.size());

  switch (grouping) {
    case GroupingMode::OneClass: {
      layout.categories.push_back({CategoryKind::Live, "all", 0});
      std::fill(layout.assignment.begin(), layout.assignment.end(), std::size_t{0});
      break;
    }
    case GroupingMode::Binary: {
      layout.categories.push_back({CategoryKind::Live, "live", 0});
      layout.categories.push_back({CategoryKind::Attack, "spoof", 1});
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        layout.assignment[i] = is_live_label(data.samples[i].label) ? 0 : 1;
      }
      break;
    }
    case GroupingMode::DomainBased: {
      std::set<std::string> domains;
      for (const auto& s : data.samples) {
        if (!is_live_label(s.label)) domains.insert(s.domain);
      }
      layout.categories.push_back({CategoryKind::Live, "live", 0});
      std::map<std::string, std::size_t> index;
      for (const auto& d : domains) {
        index[d] = layout.categories.size();
        layout.categories.push_back({CategoryKind::Attack, d, layout.categories.size()});
      }
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const auto& s = data.samples[i];
        layout.assignment[i] = is_live_label(s.label) ? 0 : index.at(s.domain);
      }
      break;
    }
    case GroupingMode::AttackBased: {
      std::set<std::string> attacks;
      for (const auto& s : data.samples) {
        if (!is_live_label(s.label)) attacks.insert(attack_name(s.label));
      }
      layout.categories.push_back({CategoryKind::Live, "live", 0});
      std::map<std::string, std::size_t> index;
      for (const auto& a : attacks) {
        index[a] = layout.categories.size();
        layout.categories.push_back({CategoryKind::Attack, a, layout.categories.size()});
      }
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const auto& s = data.samples[i];
        layout.assignment[i] = is_live_label(s.label) ? 0 : index.at(attack_name(s.label));
      }
      break;
    }
  }
  return layout;
}

PrototypeSet build_prototype_set(const CategoryLayout& layout, std::size_t dim,
                                 PrototypeShape shape) {
  if (layout.categories.empty()) throw EmptyDataset("build_prototype_set: no categories");
  PrototypeSet set;
  set.dim = dim;
  for (const auto& cat : layout.categories) {
    set.prototypes.push_back(GaussianPrototype::make(cat, dim, shape));
  }
  return set;
}

void init_prototypes(PrototypeSet& set, const MlpParams& model, const Dataset& data,
                     const CategoryLayout& layout, std::size_t warmup_epochs) {
  const std::size_t n_cats = set.prototypes.size();
  std::vector<std::size_t> counts(n_cats, 0);
  for (std::size_t a : layout.assignment) ++counts[a];
  for (std::size_t c = 0; c < n_cats; ++c) {
    if (counts[c] == 0) {
      throw EmptyCategory("init_prototypes: category '" +
                          set.prototypes[c].category.name + "' has no samples");
    }
  }

  const std::size_t passes = std::max<std::size_t>(warmup_epochs, 1);
  std::vector<Vector> sums(n_cats, Vector(set.dim, 0.0));
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const Vector z = features(model, data.samples[i].x);
      axpy(1.0, z, sums[layout.assignment[i]]);
    }
  }

  for (std::size_t c = 0; c < n_cats; ++c) {
    auto& proto = set.prototypes[c];
    proto.mean = scaled(sums[c], 1.0 / static_cast<double>(counts[c]));
    proto.factor_params = Matrix(set.dim, set.dim);  // log-diag 0 => Σ⁻¹ = I
    proto.project_params();
  }
}

ModelGrads zero_grads_like(const MlpParams& model, const PrototypeSet& set) {
  ModelGrads g;
  g.layers.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    g.layers[i].d_weight = Matrix(model.layers[i].weight.rows, model.layers[i].weight.cols);
    g.layers[i].d_bias = Vector(model.layers[i].bias.size(), 0.0);
  }
  g.head.d_weight = Matrix(model.head.weight.rows, model.head.weight.cols);
  g.head.d_bias = Vector(model.head.bias.size(), 0.0);
  g.prototypes.resize(set.prototypes.size());
  for (std::size_t i = 0; i < set.prototypes.size(); ++i) {
    g.prototypes[i].d_mean = Vector(set.dim, 0.0);
    g.prototypes[i].d_factor_params = Matrix(set.dim, set.dim);
  }
  return g;
}

BatchResult compute_batch(const MlpParams& model, const PrototypeSet& set,
                          const Dataset& data, const CategoryLayout& layout,
                          std::span<const std::size_t> batch, const LossConfig& loss) {
  if (batch.empty()) throw EmptyBatch("compute_batch: empty batch");

  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<ForwardTrace> traces;
  traces.reserve(batch.size());
  std::vector<Vector> zs;
  zs.reserve(batch.size());
  std::vector<std::size_t> cats;
  cats.reserve(batch.size());
  for (std::size_t idx : batch) {
    traces.push_back(forward(model, data.samples[idx].x));
    zs.push_back(traces.back().z);
    cats.push_back(layout.assignment[idx]);
  }

  BatchResult result;
  result.grads = zero_grads_like(model, set);

  std::vector<Vector> ce_dlogits(batch.size());
  double ce_sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const bool live = is_live_label(data.samples[batch[i]].label);
    auto ce = cross_entropy(traces[i].logits, live);
    ce_sum += ce.loss;
    ce_dlogits[i] = std::move(ce.d_logits);
  }
  result.ce = ce_sum * inv_b;

  TripletResult trip = md_triplet(set, zs, cats, loss);
  result.triplet = trip.loss;
  result.total = total_loss(result.ce, result.triplet, loss);

  // Backprop each sample in batch order: CE cotangent scaled to the batch
  // mean, triplet cotangent scaled by lambda.
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Vector d_logits = scaled(ce_dlogits[i], inv_b);
    const Vector d_z = scaled(trip.d_features[i], loss.lambda);
    const MlpGrads g = backward(model, traces[i], d_logits, d_z);
    for (std::size_t li = 0; li < g.layers.size(); ++li) {
      auto& acc = result.grads.layers[li];
      for (std::size_t k = 0; k < acc.d_weight.data.size(); ++k) {
        acc.d_weight.data[k] += g.layers[li].d_weight.data[k];
      }
      for (std::size_t k = 0; k < acc.d_bias.size(); ++k) {
        acc.d_bias[k] += g.layers[li].d_bias[k];
      }
    }
    for (std::size_t k = 0; k < result.grads.head.d_weight.data.size(); ++k) {
      result.grads.head.d_weight.data[k] += g.head.d_weight.data[k];
    }
    for (std::size_t k = 0; k < result.grads.head.d_bias.size(); ++k) {
      result.grads.head.d_bias[k] += g.head.d_bias[k];
    }
  }

  for (std::size_t p = 0; p < trip.d_prototypes.size(); ++p) {
    auto& acc = result.grads.prototypes[p];
    axpy(loss.lambda, trip.d_prototypes[p].d_mean, acc.d_mean);
    for (std::size_t k = 0; k < acc.d_factor_params.data.size(); ++k) {
      acc.d_factor_params.data[k] += loss.lambda * trip.d_prototypes[p].d_factor_params.data[k];
    }
  }
  return result;
}

namespace {

bool grads_finite(const ModelGrads& g) {
  for (const auto& l : g.layers) {
    if (!all_finite(l.d_weight) || !all_finite(l.d_bias)) return false;
  }
  if (!all_finite(g.head.d_weight) || !all_finite(g.head.d_bias)) return false;
  for (const auto& p : g.prototypes) {
    if (!all_finite(p.d_mean) || !all_finite(p.d_factor_params)) return false;
  }
  return true;
}

void check_grad_shapes(const MlpParams& model, const PrototypeSet& set,
                       const ModelGrads& grads, const ModelGrads& velocity) {
  auto layer_ok = [](const DenseLayer& l, const LayerGrads& g) {
    return g.d_weight.same_shape(l.weight) && g.d_bias.size() == l.bias.size();
  };
  if (grads.layers.size() != model.layers.size() ||
      velocity.layers.size() != model.layers.size() ||
      grads.prototypes.size() != set.prototypes.size() ||
      velocity.prototypes.size() != set.prototypes.size()) {
    throw ShapeMismatch("sgd_step: gradient structure does not match model");
  }
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (!layer_ok(model.layers[i], grads.layers[i]) ||
        !layer_ok(model.layers[i], velocity.layers[i])) {
      throw ShapeMismatch("sgd_step: layer " + std::to_string(i) + " shape mismatch");
    }
  }
  if (!layer_ok(model.head, grads.head) || !layer_ok(model.head, velocity.head)) {
    throw ShapeMismatch("sgd_step: head shape mismatch");
  }
  for (std::size_t i = 0; i < set.prototypes.size(); ++i) {
    if (grads.prototypes[i].d_mean.size() != set.dim ||
        !grads.prototypes[i].d_factor_params.same_shape(set.prototypes[i].factor_params)) {
      throw ShapeMismatch("sgd_step: prototype " + std::to_string(i) + " shape mismatch");
    }
  }
}

// v <- momentum·v + g + wd·θ; θ <- θ − lr·v, over one flat array.
void update_array(std::vector<double>& theta, const std::vector<double>& grad,
                  std::vector<double>& velocity, double lr, double momentum, double wd) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i] + wd * theta[i];
    theta[i] -= lr * velocity[i];
  }
}

}  // namespace

void sgd_step(MlpParams& model, PrototypeSet& set, const ModelGrads& grads,
              ModelGrads& velocity, const TrainConfig& cfg) {
  check_grad_shapes(model, set, grads, velocity);
  if (!grads_finite(grads)) {
    throw NonFiniteGradient("sgd_step: gradient contains NaN or Inf");
  }

  const double lr = cfg.learning_rate;
  const double mom = cfg.momentum;
  // Weight decay touches network weight matrices only.
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    update_array(model.layers[i].weight.data, grads.layers[i].d_weight.data,
                 velocity.layers[i].d_weight.data, lr, mom, cfg.weight_decay);
    update_array(model.layers[i].bias, grads.layers[i].d_bias,
                 velocity.layers[i].d_bias, lr, mom, 0.0);
  }
  update_array(model.head.weight.data, grads.head.d_weight.data,
               velocity.head.d_weight.data, lr, mom, cfg.weight_decay);
  update_array(model.head.bias, grads.head.d_bias, velocity.head.d_bias, lr, mom, 0.0);

  for (std::size_t p = 0; p < set.prototypes.size(); ++p) {
    auto& proto = set.prototypes[p];
    update_array(proto.mean, grads.prototypes[p].d_mean,
                 velocity.prototypes[p].d_mean, lr, mom, 0.0);
    update_array(proto.factor_params.data, grads.prototypes[p].d_factor_params.data,
                 velocity.prototypes[p].d_factor_params.data, lr, mom, 0.0);
    proto.project_params();
  }
}

std::vector<std::vector<std::size_t>> make_batches(const CategoryLayout& layout,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   std::size_t epoch) {
  const std::size_t n_cats = layout.categories.size();
  if (batch_size < 2 * n_cats) {
    throw InvalidConfig("make_batches: batch_size " + std::to_string(batch_size) +
                        " cannot hold 2 samples of each of " + std::to_string(n_cats) +
                        " categories");
  }

  std::vector<std::vector<std::size_t>> by_cat(n_cats);
  for (std::size_t i = 0; i < layout.assignment.size(); ++i) {
    by_cat[layout.assignment[i]].push_back(i);
  }
  const std::size_t total = layout.assignment.size();
  for (std::size_t c = 0; c < n_cats; ++c) {
    if (by_cat[c].size() < 2) {
      throw CategoryTooSmall("make_batches: category '" + layout.categories[c].name +
                             "' has fewer than 2 samples");
    }
  }

  // Per-batch quota per category: 2 guaranteed slots, the rest distributed
  // proportionally to category frequency by largest remainder (ties toward
  // the lower index).
  std::vector<std::size_t> quota(n_cats, 2);
  std::size_t extra = batch_size - 2 * n_cats;
  std::vector<double> share(n_cats);
  for (std::size_t c = 0; c < n_cats; ++c) {
    share[c] = static_cast<double>(extra) * static_cast<double>(by_cat[c].size()) /
               static_cast<double>(total);
    const auto base = static_cast<std::size_t>(std::floor(share[c]));
    quota[c] += base;
    extra -= base;
    share[c] -= static_cast<double>(base);
  }
  while (extra > 0) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_cats; ++c) {
      if (share[c] > share[best]) best = c;
    }
    quota[best] += 1;
    share[best] = -1.0;
    --extra;
  }

  std::size_t n_batches = std::numeric_limits<std::size_t>::max();
  for (std::size_t c = 0; c < n_cats; ++c) {
    n_batches = std::min(n_batches, by_cat[c].size() / quota[c]);
  }
  if (n_batches == 0) {
    throw CategoryTooSmall("make_batches: no category can fill its per-batch quota");
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x9e3779b9u};
  std::mt19937_64 rng(seq);
  for (auto& indices : by_cat) std::shuffle(indices.begin(), indices.end(), rng);

  std::vector<std::vector<std::size_t>> batches(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    batches[b].reserve(batch_size);
    for (std::size_t c = 0; c < n_cats; ++c) {
      for (std::size_t k = 0; k < quota[c]; ++k) {
        batches[b].push_back(by_cat[c][b * quota[c] + k]);
      }
    }
  }
  return batches;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.samples.empty()) throw EmptyDataset("train: dataset is empty");

  const CategoryLayout layout = build_category_layout(data, cfg.grouping);
  if (cfg.batch_size < 2 * layout.categories.size()) {
    throw InvalidConfig("train: batch_size must be at least twice the category count (" +
                        std::to_string(layout.categories.size()) + ")");
  }

  std::mt19937_64 rng(cfg.seed);
  MlpParams model = init_mlp(data.d_in, cfg.network, rng);

  PrototypeSet set =
      build_prototype_set(layout, cfg.network.feature_dim, cfg.resolve_shape());
  init_prototypes(set, model, data, layout, cfg.warmup_epochs_for_means);

  ModelGrads velocity = zero_grads_like(model, set);
  std::vector<EpochStats> history;
  history.reserve(cfg.epochs);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches = make_batches(layout, cfg.batch_size, cfg.seed, epoch);
    double ce_sum = 0.0;
    double trip_sum = 0.0;
    double total_sum = 0.0;
    for (const auto& batch : batches) {
      const BatchResult res = compute_batch(model, set, data, layout, batch, cfg.loss);
      sgd_step(model, set, res.grads, velocity, cfg);
      ce_sum += res.ce;
      trip_sum += res.triplet;
      total_sum += res.total;
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    history.push_back({epoch, ce_sum * inv, trip_sum * inv, total_sum * inv});
  }

  TrainResult result;
  result.checkpoint.format_version = kCheckpointFormatVersion;
  result.checkpoint.config = cfg;
  result.checkpoint.model = std::move(model);
  result.checkpoint.prototypes = std::move(set);
  result.checkpoint.epochs_completed = cfg.epochs;
  std::ostringstream state;
  state << rng;
  result.checkpoint.rng_state = state.str();
  result.history = std::move(history);
  return result;
}

}  // namespace liveguard
