// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "grasp/errors.hpp"
#include "grasp/parallel.hpp"

namespace grasp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void add_scaled(ModelParams& acc, const ModelParams& g, double scale) {
  auto dst = acc.tensors();
  auto src = g.tensors();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    for (std::size_t i = 0; i < dst[k].values.size(); ++i) dst[k].values[i] += scale * src[k].values[i];
  }
}

std::vector<int> all_indices(const Dataset& dataset, std::span<const int> indices) {
  if (!indices.empty()) return {indices.begin(), indices.end()};
  std::vector<int> out(dataset.graphs.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::string to_string(DecayMode mode) { return mode == DecayMode::Decoupled ? "decoupled" : "coupled"; }

DecayMode parse_decay_mode(const std::string& text) {
  if (text == "decoupled") return DecayMode::Decoupled;
  if (text == "coupled") return DecayMode::Coupled;
  throw ConfigError("unknown decay mode '" + text + "' (expected decoupled|coupled)");
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string to_string(ClassWeightMode mode) {
  switch (mode) {
    case ClassWeightMode::InverseFrequency: return "inverse-frequency";
    case ClassWeightMode::Uniform: return "uniform";
    case ClassWeightMode::Explicit: return "explicit";
  }
  return "?";
}

ClassWeightMode parse_class_weight_mode(std::string_view text) {
  if (text == "inverse-frequency") return ClassWeightMode::InverseFrequency;
  if (text == "uniform") return ClassWeightMode::Uniform;
  if (text == "explicit") return ClassWeightMode::Explicit;
  throw ConfigError("unknown class weight mode '" + std::string(text) +
                    "' (expected inverse-frequency|uniform|explicit)");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (class_weights == ClassWeightMode::Explicit) {
    if (explicit_weights.empty()) throw ConfigError("explicit class weights requested but none given");
    for (double w : explicit_weights) {
      if (!(w > 0.0)) throw ConfigError("class weights must be strictly positive");
    }
  }
  ModelShape probe;
  probe.input_dim = 1;
  probe.gcn_widths = gcn_widths;
  probe.hidden = classifier_hidden;
  probe.validate();
}

ModelShape TrainConfig::shape(int input_dim, int classes) const {
  ModelShape s;
  s.input_dim = input_dim;
  s.gcn_widths = gcn_widths;
  s.hidden = classifier_hidden;
  s.classes = classes;
  s.validate();
  return s;
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["learning_rate"] = learning_rate;
  j["weight_decay"] = weight_decay;
  j["decay_mode"] = to_string(decay_mode);
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["epsilon"] = epsilon;
  j["epochs"] = epochs;
  j["folds"] = folds;
  j["seeds"] = seeds;
  j["fold_seed"] = fold_seed;
  j["class_weights"] = to_string(class_weights);
  j["explicit_weights"] = explicit_weights;
  j["batch"] = batch;
  j["gcn_widths"] = gcn_widths;
  j["classifier_hidden"] = classifier_hidden;
  j["f1"] = f1_average == F1Average::Macro ? "macro" : "weighted";
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "learning_rate", "weight_decay", "decay_mode", "beta1", "beta2", "epsilon", "epochs",
      "folds", "seeds", "fold_seed", "class_weights", "explicit_weights", "batch", "gcn_widths",
      "classifier_hidden", "f1", "jobs"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("train config: unknown key '" + it.key() + "'");
  }
  TrainConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    if (j.contains("decay_mode")) c.decay_mode = parse_decay_mode(j.at("decay_mode").get<std::string>());
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.epochs = j.value("epochs", c.epochs);
    c.folds = j.value("folds", c.folds);
    c.seeds = j.value("seeds", c.seeds);
    c.fold_seed = j.value("fold_seed", c.fold_seed);
    if (j.contains("class_weights")) {
      c.class_weights = parse_class_weight_mode(j.at("class_weights").get<std::string>());
    }
    c.explicit_weights = j.value("explicit_weights", c.explicit_weights);
    c.batch = j.value("batch", c.batch);
    c.gcn_widths = j.value("gcn_widths", c.gcn_widths);
    c.classifier_hidden = j.value("classifier_hidden", c.classifier_hidden);
    if (j.contains("f1")) {
      const auto f1 = j.at("f1").get<std::string>();
      if (f1 == "macro") c.f1_average = F1Average::Macro;
      else if (f1 == "weighted") c.f1_average = F1Average::Weighted;
      else throw ConfigError("unknown f1 average '" + f1 + "'");
    }
    c.jobs = j.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Class weights and folds

std::vector<double> make_class_weights(std::span<const int> labels, int classes, ClassWeightMode mode,
                                       std::span<const double> explicit_weights) {
  if (classes < 1) throw ConfigError("class count must be positive");
  switch (mode) {
    case ClassWeightMode::Uniform:
      return std::vector<double>(static_cast<std::size_t>(classes), 1.0);
    case ClassWeightMode::Explicit: {
      if (explicit_weights.size() != static_cast<std::size_t>(classes)) {
        throw ConfigError("expected " + std::to_string(classes) + " explicit class weights, got " +
                          std::to_string(explicit_weights.size()));
      }
      for (double w : explicit_weights) {
        if (!(w > 0.0)) throw ConfigError("class weights must be strictly positive");
      }
      return {explicit_weights.begin(), explicit_weights.end()};
    }
    case ClassWeightMode::InverseFrequency:
      break;
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= classes) throw ValidationError("label " + std::to_string(y) + " out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto n = static_cast<double>(labels.size());
  std::vector<double> w(static_cast<std::size_t>(classes));
  double mean = 0.0;
  for (int c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw ConfigError("class " + std::to_string(c) + " has no training samples");
    }
    w[static_cast<std::size_t>(c)] = n / (classes * static_cast<double>(counts[static_cast<std::size_t>(c)]));
    mean += w[static_cast<std::size_t>(c)];
  }
  mean /= classes;
  for (double& v : w) v /= mean;
  return w;
}

std::vector<int> FoldAssignment::test_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold_of_slide.size(); ++i) {
    if (fold_of_slide[i] == fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldAssignment::train_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold_of_slide.size(); ++i) {
    if (fold_of_slide[i] != fold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldAssignment::fold_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold_of_slide) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment group_kfold(std::span<const SlideKey> slides, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  std::vector<std::string> groups;
  std::map<std::string, std::vector<int>> members;
  for (std::size_t i = 0; i < slides.size(); ++i) {
    auto& list = members[slides[i].group_id];
    if (list.empty()) groups.push_back(slides[i].group_id);
    list.push_back(static_cast<int>(i));
  }
  if (static_cast<std::size_t>(k) > groups.size()) {
    throw ConfigError("cannot split " + std::to_string(groups.size()) + " groups into " +
                      std::to_string(k) + " folds");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);
  std::stable_sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
    return members[a].size() > members[b].size();
  });

  FoldAssignment out;
  out.k = k;
  out.fold_of_slide.assign(slides.size(), -1);
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  for (const auto& g : groups) {
    const auto fold = static_cast<int>(std::min_element(load.begin(), load.end()) - load.begin());
    for (int i : members[g]) out.fold_of_slide[static_cast<std::size_t>(i)] = fold;
    load[static_cast<std::size_t>(fold)] += members[g].size();
    out.fold_of_group[g] = fold;
  }
  return out;
}

FoldAssignment group_kfold(const Dataset& dataset, int k, std::uint64_t seed) {
  std::vector<SlideKey> keys;
  keys.reserve(dataset.graphs.size());
  for (const auto& g : dataset.graphs) keys.push_back({g.slide_id, g.group_id, g.label});
  return group_kfold(keys, k, seed);
}

// ---------------------------------------------------------------------------
// Optimizer

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(shape);
  std::mt19937_64 rng(seed);
  auto glorot = [&](DenseLayer& layer) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = dist(rng);
  };
  for (auto& layer : p.gcn) glorot(layer);
  glorot(p.hidden);
  glorot(p.output);
  return p;
}

AdamW::AdamW(const ModelParams& like, const TrainConfig& config)
    : config_(config), m_(ModelParams::zeros(like.shape)), v_(ModelParams::zeros(like.shape)) {}

void AdamW::step(ModelParams& params, const ModelParams& grads) {
  ++t_;
  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const bool decoupled = config_.decay_mode == DecayMode::Decoupled;

  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool decay = p[k].is_weight && wd > 0.0;
    for (std::size_t i = 0; i < p[k].values.size(); ++i) {
      double grad = g[k].values[i];
      double& w = p[k].values[i];
      if (decay && !decoupled) grad += wd * w;
      double& mi = m[k].values[i];
      double& vi = v[k].values[i];
      mi = b1 * mi + (1.0 - b1) * grad;
      vi = b2 * vi + (1.0 - b2) * grad * grad;
      if (decay && decoupled) w *= 1.0 - lr * wd;
      w -= lr * (mi / bc1) / (std::sqrt(vi / bc2) + config_.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(const Dataset& dataset, std::span<const int> indices, const TrainConfig& config,
                  std::uint64_t seed) {
  config.validate();
  if (dataset.graphs.empty()) throw ConfigError("cannot train on an empty dataset");
  std::vector<int> order = all_indices(dataset, indices);
  if (order.empty()) throw ConfigError("cannot train on an empty index set");

  std::vector<int> labels;
  for (int i : order) labels.push_back(dataset.graphs.at(static_cast<std::size_t>(i)).label);
  const auto weights = make_class_weights(labels, dataset.classes(), config.class_weights, config.explicit_weights);

  TrainResult result{init_params(config.shape(dataset.dim(), dataset.classes()), seed), {}};
  ModelParams& params = result.params;
  AdamW optimizer(params, config);

  // Slot of each dataset index inside `losses`, so epoch sums run in a fixed order.
  std::vector<std::pair<int, std::size_t>> slots;
  for (std::size_t s = 0; s < order.size(); ++s) slots.emplace_back(order[s], s);
  std::vector<double> losses(order.size(), 0.0);

  std::mt19937_64 shuffle_rng(seed ^ 0x9e3779b97f4a7c15ull);
  ModelParams accum = ModelParams::zeros(params.shape);
  const auto batch = static_cast<std::size_t>(config.batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(slots.begin(), slots.end(), shuffle_rng);
    for (std::size_t start = 0; start < slots.size(); start += batch) {
      const std::size_t end = std::min(slots.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& t : accum.tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
      for (std::size_t s = start; s < end; ++s) {
        const auto& graph = dataset.graphs[static_cast<std::size_t>(slots[s].first)];
        const ForwardTrace trace = forward(graph, params);
        Gradients g = backward(trace, graph, params, graph.label,
                               weights[static_cast<std::size_t>(graph.label)], false);
        losses[slots[s].second] = g.loss;
        if (!std::isfinite(g.loss)) throw TrainingError(epoch, "loss is not finite");
        if (end - start == 1) {
          optimizer.step(params, g.params);
        } else {
          add_scaled(accum, g.params, scale);
        }
      }
      if (end - start > 1) optimizer.step(params, accum);
    }
    double total = 0.0;
    for (double l : losses) total += l;
    const double mean = total / static_cast<double>(losses.size());
    if (!std::isfinite(mean) || !params.all_finite()) throw TrainingError(epoch, "training diverged");
    result.loss_curve.push_back(mean);
  }
  return result;
}

Evaluation evaluate(const ModelParams& params, const Dataset& dataset, std::span<const int> indices) {
  const auto start = Clock::now();
  Evaluation ev;
  ev.confusion = ConfusionMatrix(dataset.classes());
  for (int i : all_indices(dataset, indices)) {
    const auto& graph = dataset.graphs.at(static_cast<std::size_t>(i));
    const ForwardTrace trace = forward(graph, params);
    const int pred = argmax_predict(std::span<const double>(trace.probs.data(), static_cast<std::size_t>(trace.probs.size())));
    ev.predictions.push_back(pred);
    ev.confusion.add(graph.label, pred);
  }
  ev.balanced_accuracy = balanced_accuracy_present(ev.confusion);
  ev.f1 = f1_score(ev.confusion, F1Average::Macro);
  ev.seconds = seconds_since(start);
  return ev;
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<double> EvalReport::balanced_accuracies() const {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.balanced_accuracy);
  return out;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["balanced_accuracy"] = {{"mean", balanced_accuracy.mean}, {"std", balanced_accuracy.std}};
  j["f1"] = {{"mean", f1.mean}, {"std", f1.std}};
  nlohmann::ordered_json fj;
  fj["k"] = folds.k;
  fj["sizes"] = folds.fold_sizes();
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [g, f] : folds.fold_of_group) groups[g] = f;
  fj["groups"] = groups;
  j["folds"] = fj;
  auto runs_json = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json rj;
    rj["seed"] = r.seed;
    rj["fold"] = r.fold;
    rj["train_size"] = r.train_size;
    rj["test_size"] = r.test_size;
    rj["balanced_accuracy"] = r.balanced_accuracy;
    rj["f1"] = r.f1;
    rj["confusion"] = r.confusion.to_json();
    rj["final_train_loss"] = r.loss_curve.empty() ? 0.0 : r.loss_curve.back();
    runs_json.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs_json);
  return j;
}

nlohmann::ordered_json EvalReport::timing_json() const {
  auto arr = nlohmann::ordered_json::array();
  double train_total = 0.0;
  double eval_total = 0.0;
  std::int64_t evaluated = 0;
  for (const auto& r : runs) {
    arr.push_back({{"seed", r.seed}, {"fold", r.fold}, {"train_seconds", r.train_seconds},
                   {"eval_seconds", r.eval_seconds}});
    train_total += r.train_seconds;
    eval_total += r.eval_seconds;
    evaluated += r.test_size;
  }
  nlohmann::ordered_json j;
  j["train_seconds_total"] = train_total;
  j["eval_seconds_total"] = eval_total;
  j["inference_seconds_per_slide"] = evaluated > 0 ? eval_total / static_cast<double>(evaluated) : 0.0;
  j["runs"] = std::move(arr);
  return j;
}

std::string EvalReport::loss_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "seed,fold,epoch,loss\n";
  for (const auto& r : runs) {
    for (std::size_t e = 0; e < r.loss_curve.size(); ++e) {
      out << r.seed << ',' << r.fold << ',' << e << ',' << r.loss_curve[e] << '\n';
    }
  }
  return out.str();
}

EvalReport cross_validate(const Dataset& dataset, const TrainConfig& config) {
  return cross_validate(dataset, config, nullptr);
}

EvalReport cross_validate(const Dataset& dataset, const TrainConfig& config, std::vector<ModelParams>* models) {
  config.validate();
  EvalReport report;
  report.folds = group_kfold(dataset, config.folds, config.fold_seed);
  const std::size_t cells = config.seeds.size() * static_cast<std::size_t>(config.folds);
  report.runs.resize(cells);
  if (models) models->assign(cells, ModelParams{});

  parallel_for(cells, config.jobs, [&](std::size_t cell) {
    const auto seed = config.seeds[cell / static_cast<std::size_t>(config.folds)];
    const int fold = static_cast<int>(cell % static_cast<std::size_t>(config.folds));
    const auto train_idx = report.folds.train_indices(fold);
    const auto test_idx = report.folds.test_indices(fold);

    const auto start = Clock::now();
    TrainResult trained = train(dataset, train_idx, config, seed);
    const double train_seconds = seconds_since(start);
    Evaluation ev = evaluate(trained.params, dataset, test_idx);

    RunReport& run = report.runs[cell];
    run.seed = seed;
    run.fold = fold;
    run.train_size = static_cast<int>(train_idx.size());
    run.test_size = static_cast<int>(test_idx.size());
    run.balanced_accuracy = ev.balanced_accuracy;
    run.f1 = f1_score(ev.confusion, config.f1_average);
    run.confusion = std::move(ev.confusion);
    run.loss_curve = std::move(trained.loss_curve);
    run.train_seconds = train_seconds;
    run.eval_seconds = ev.seconds;
    if (models) (*models)[cell] = std::move(trained.params);
  });

  const auto bacc = report.balanced_accuracies();
  std::vector<double> f1s;
  for (const auto& r : report.runs) f1s.push_back(r.f1);
  report.balanced_accuracy = summarize(bacc);
  report.f1 = summarize(f1s);
  return report;
}

}  // namespace grasp
