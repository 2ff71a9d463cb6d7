// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// grasp: command-line driver.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.
// Every subcommand writes run.json into --out with the resolved settings.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "grasp/ablation.hpp"
#include "grasp/checkpoint.hpp"
#include "grasp/consultation.hpp"
#include "grasp/convergence.hpp"
#include "grasp/data_io.hpp"
#include "grasp/errors.hpp"
#include "grasp/runtime.hpp"
#include "grasp/trainer.hpp"

#ifndef GRASP_VERSION
#define GRASP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace grasp;

namespace {

// ---------------------------------------------------------------------------
// small helpers

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("not a non-negative integer: '" + std::string(s) + "'");
  return v;
}

// "0,1,2", "0..9" or a mix such as "0..4,10".
std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& items) {
  std::vector<std::uint64_t> out;
  for (const auto& item : items) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_u64(item));
      continue;
    }
    const auto lo = parse_u64(std::string_view(item).substr(0, dots));
    const auto hi = parse_u64(std::string_view(item).substr(dots + 2));
    if (hi < lo || hi - lo > 100000) throw ConfigError("bad seed range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory " + out.string());
  const auto probe = out / ".grasp_write_probe";
  {
    std::ofstream t(probe);
    if (!t) throw ConfigError("output directory not writable: " + out.string());
  }
  fs::remove(probe);
}

// ---------------------------------------------------------------------------
// shared option groups

struct GraphFlags {
  std::string triplet = "chain";
  bool self_loops = false;
  std::string norm = "exact";
  std::string mask = "all";

  void add(CLI::App* app, bool with_mask = true) {
    app->add_option("--triplet", triplet, "Triplet links: chain or triangle")->check(CLI::IsMember({"chain", "triangle"}));
    app->add_flag("--self-loops", self_loops, "Add a self-loop to every node");
    app->add_option("--norm", norm, "Edge normalization: exact or uniform")->check(CLI::IsMember({"exact", "uniform"}));
    if (with_mask) app->add_option("--mask", mask, "Magnifications kept, e.g. all, M2, M1+M3");
  }

  GraphOptions resolve() const {
    GraphOptions o;
    o.triplet = triplet == "triangle" ? TripletLink::Triangle : TripletLink::Chain;
    o.self_loops = self_loops;
    o.norm = norm == "uniform" ? NormMode::Uniform : NormMode::Exact;
    o.mask = MagnificationMask::parse(mask);
    return o;
  }

  json to_json() const {
    return {{"triplet", triplet}, {"self_loops", self_loops}, {"norm", norm}, {"mask", mask}};
  }
};

struct TrainFlags {
  std::string config_path;
  std::vector<std::string> seeds;
  std::optional<double> lr, weight_decay;
  std::optional<std::string> decay, class_weights, f1;
  std::optional<int> epochs, folds, batch, hidden;
  std::optional<std::uint64_t> fold_seed;
  std::vector<int> widths;
  std::vector<double> explicit_weights;
  int jobs = 1;

  void add(CLI::App* app, bool multi_seed) {
    app->add_option("--config", config_path, "JSON training config; flags override its keys");
    if (multi_seed) {
      app->add_option("--seeds", seeds, "Training seeds, e.g. 0..9 or 0,3,7")->required()->delimiter(',');
    } else {
      app->add_option("--seed", seeds, "Training seed")->required()->expected(1);
    }
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--weight-decay", weight_decay, "Weight decay");
    app->add_option("--decay", decay, "decoupled or coupled")->check(CLI::IsMember({"decoupled", "coupled"}));
    app->add_option("--epochs", epochs, "Epochs");
    app->add_option("--batch", batch, "Graphs per optimizer step");
    app->add_option("--class-weights", class_weights, "inverse-frequency, uniform or explicit");
    app->add_option("--explicit-weights", explicit_weights, "Per-class weights for --class-weights explicit")->delimiter(',');
    app->add_option("--widths", widths, "Graph layer widths, e.g. 256,256,128")->delimiter(',');
    app->add_option("--hidden", hidden, "Classifier hidden width");
    app->add_option("--f1", f1, "macro or weighted")->check(CLI::IsMember({"macro", "weighted"}));
    if (multi_seed) {
      app->add_option("--folds", folds, "Cross-validation folds");
      app->add_option("--fold-seed", fold_seed, "Seed of the group fold assignment");
    }
    app->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  TrainConfig resolve() const {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      require_file(config_path, "config");
      j = nlohmann::json::parse(read_json_file(config_path).dump());
      if (!j.is_object()) throw ConfigError("config must be a JSON object");
    }
    if (lr) j["learning_rate"] = *lr;
    if (weight_decay) j["weight_decay"] = *weight_decay;
    if (decay) j["decay_mode"] = *decay;
    if (epochs) j["epochs"] = *epochs;
    if (batch) j["batch"] = *batch;
    if (class_weights) j["class_weights"] = *class_weights;
    if (!explicit_weights.empty()) j["explicit_weights"] = explicit_weights;
    if (!widths.empty()) j["gcn_widths"] = widths;
    if (hidden) j["classifier_hidden"] = *hidden;
    if (f1) j["f1"] = *f1;
    if (folds) j["folds"] = *folds;
    if (fold_seed) j["fold_seed"] = *fold_seed;
    j["seeds"] = parse_seed_list(seeds);
    j["jobs"] = jobs;
    TrainConfig c = TrainConfig::from_json(j);
    c.validate();
    return c;
  }
};

Dataset load_dataset(const fs::path& manifest_path, const GraphOptions& opts) {
  require_file(manifest_path, "manifest");
  const Manifest man = load_manifest(manifest_path);
  return make_dataset(man.load_all(), man.labels(), opts);
}

json run_record(const std::string& sub, const std::vector<std::string>& argv) {
  json j;
  j["tool"] = "grasp";
  j["version"] = GRASP_VERSION;
  j["subcommand"] = sub;
  j["argv"] = argv;
  return j;
}

json eval_json(const Evaluation& ev, const Dataset& ds, std::span<const int> indices) {
  json j;
  j["classes"] = ds.class_names;
  j["balanced_accuracy"] = ev.balanced_accuracy;
  j["f1"] = ev.f1;
  j["confusion"] = ev.confusion.to_json();
  json preds = json::array();
  for (std::size_t i = 0; i < ev.predictions.size(); ++i) {
    const auto& g = ds.graphs[static_cast<std::size_t>(indices.empty() ? static_cast<int>(i) : indices[i])];
    preds.push_back({{"slide_id", g.slide_id}, {"label", g.label}, {"predicted", ev.predictions[i]}});
  }
  j["predictions"] = std::move(preds);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Multi-magnification graph classifier for slide embedding pyramids"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GRASP_VERSION);
  std::string out_dir = "grasp-out";
  const std::vector<std::string> args(argv, argv + argc);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted-signal dataset");
  std::string spec_path;
  std::optional<std::uint64_t> synth_seed, shuffle_seed;
  synth->add_option("--spec", spec_path, "SynthSpec JSON");
  synth->add_option("--seed", synth_seed, "Overrides the spec seed");
  synth->add_option("--shuffle-labels", shuffle_seed, "Permute labels with this seed (null control)");
  synth->add_option("--out", out_dir, "Output directory");

  // build-graph
  auto* bg = app.add_subcommand("build-graph", "Build the graph of one pyramid and report its structure");
  std::string pyramid_path;
  bool write_edges = false;
  GraphFlags bg_graph;
  bg->add_option("--pyramid", pyramid_path, ".gpyr file")->required();
  bg->add_flag("--edges", write_edges, "Also write edges.csv");
  bg_graph.add(bg);
  bg->add_option("--out", out_dir, "Output directory");

  // train
  auto* tr = app.add_subcommand("train", "Train one model on every slide of a manifest");
  std::string manifest_path;
  TrainFlags tr_flags;
  GraphFlags tr_graph;
  tr->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  tr_flags.add(tr, false);
  tr_graph.add(tr);
  tr->add_option("--out", out_dir, "Output directory");

  // cv
  auto* cv = app.add_subcommand("cv", "Group k-fold cross-validation over seeds");
  TrainFlags cv_flags;
  GraphFlags cv_graph;
  cv->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  cv_flags.add(cv, true);
  cv_graph.add(cv);
  cv->add_option("--out", out_dir, "Output directory");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  std::string model_path;
  GraphFlags ev_graph;
  ev->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  ev->add_option("--model", model_path, "Checkpoint (.grsp)")->required();
  ev_graph.add(ev);
  ev->add_option("--out", out_dir, "Output directory");

  // monte-carlo
  auto* mc = app.add_subcommand("monte-carlo", "Graph-size Monte Carlo test");
  TrainFlags mc_flags;
  GraphFlags mc_graph;
  MonteCarloPlan plan;
  std::vector<int> mc_counts;
  std::optional<int> mc_step, mc_min, mc_max;
  mc->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  mc->add_option("--counts", mc_counts, "Triplets dropped per slide, e.g. 50,150,250,350")->delimiter(',');
  mc->add_flag("--full-grid", plan.full_grid, "Every count from --min-count to --max-count by --step");
  mc->add_option("--step", mc_step, "Grid step");
  mc->add_option("--min-count", mc_min, "Smallest count of the grid");
  mc->add_option("--max-count", mc_max, "Largest count of the grid");
  mc->add_option("--repetitions", plan.repetitions, "Independent drop draws");
  mc->add_option("--drop-seed", plan.seed, "Seed of the drop sampling");
  mc_flags.add(mc, true);
  mc_graph.add(mc, false);
  mc->add_option("--out", out_dir, "Output directory");

  // mag-ablation
  auto* ma = app.add_subcommand("mag-ablation", "Train and evaluate on magnification subsets");
  TrainFlags ma_flags;
  GraphFlags ma_graph;
  std::vector<std::string> mask_names{"M1", "M2", "M3", "M1+M2", "M1+M3", "M2+M3"};
  ma->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  ma->add_option("--masks", mask_names, "Masks to test")->delimiter(',');
  ma_flags.add(ma, true);
  ma_graph.add(ma, false);
  ma->add_option("--out", out_dir, "Output directory");

  // consult
  auto* co = app.add_subcommand("consult", "Per-slide magnification consultation of a trained model");
  double tau = kDefaultConsultTau;
  bool with_occlusion = false;
  int co_jobs = 1;
  GraphFlags co_graph;
  co->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  co->add_option("--model", model_path, "Checkpoint (.grsp)")->required();
  co->add_option("--tau", tau, "Share threshold in (0, 0.5]");
  co->add_flag("--occlusion", with_occlusion, "Also evaluate with each magnification zeroed");
  co->add_option("--jobs", co_jobs, "Worker threads")->check(CLI::PositiveNumber);
  co_graph.add(co, false);
  co->add_option("--out", out_dir, "Output directory");

  // convergence
  auto* cg = app.add_subcommand("convergence", "Within-magnification spread versus m");
  ConvergenceConfig conv;
  std::vector<std::string> conv_seeds;
  GraphFlags cg_graph;
  cg->add_option("--m-list", conv.m_list, "Triplet counts")->delimiter(',');
  cg->add_option("--seeds", conv_seeds, "Seeds, e.g. 0..19")->required()->delimiter(',');
  cg->add_option("--d", conv.d, "Input dimension");
  cg->add_option("--weight-scale", conv.weight_scale, "Frobenius norm of every tensor");
  cg->add_option("--widths", conv.gcn_widths, "Graph layer widths")->delimiter(',');
  cg->add_option("--jobs", conv.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cg_graph.add(cg, false);
  cg->add_option("--out", out_dir, "Output directory");

  // params-count
  auto* pc = app.add_subcommand("params-count", "Print the trainable parameter count");
  ModelShape pc_shape;
  pc->add_option("--d", pc_shape.input_dim, "Input dimension");
  pc->add_option("--classes", pc_shape.classes, "Number of classes");
  pc->add_option("--widths", pc_shape.gcn_widths, "Graph layer widths")->delimiter(',');
  pc->add_option("--hidden", pc_shape.hidden, "Classifier hidden width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json run = run_record(app.get_subcommands().front()->get_name(), args);
    const fs::path out(out_dir);

    if (*pc) {
      pc_shape.validate();
      std::cout << pc_shape.count() << "\n";
      return 0;
    }

    if (*synth) {
      SynthSpec spec;
      if (!spec_path.empty()) {
        require_file(spec_path, "spec");
        spec = SynthSpec::from_json(nlohmann::json::parse(read_json_file(spec_path).dump()));
      }
      if (synth_seed) spec.seed = *synth_seed;
      spec.validate();
      prepare_out(out);
      auto pyrs = generate_synthetic(spec);
      if (shuffle_seed) shuffle_labels(pyrs, *shuffle_seed);
      std::vector<ManifestRow> rows;
      for (const auto& p : pyrs) {
        const std::string file = p.slide_id + ".gpyr";
        write_pyramid(out / file, p);
        rows.push_back({p.slide_id, file, synth_class_name(p.label), p.group_id});
      }
      write_manifest(out / "manifest.csv", rows);
      run["spec"] = spec.to_json();
      run["shuffle_labels_seed"] = shuffle_seed ? json(*shuffle_seed) : json(nullptr);
      run["slides"] = pyrs.size();
      write_json(out / "run.json", run);
      std::cout << "wrote " << pyrs.size() << " slides to " << out.string() << "\n";
      return 0;
    }

    if (*bg) {
      require_file(pyramid_path, "pyramid");
      const GraphOptions opts = bg_graph.resolve();
      prepare_out(out);
      const PyramidGraph g = build_graph(read_pyramid(pyramid_path), opts);
      json info;
      info["slide_id"] = g.slide_id;
      info["group_id"] = g.group_id;
      info["label"] = g.label;
      info["m"] = g.m();
      info["d"] = g.d();
      info["nodes"] = g.num_nodes();
      info["edges"] = g.topology.num_edges();
      json degrees;
      for (auto mag : opts.mask.kept()) degrees[std::string(magnification_name(mag))] = g.topology.block_degree(mag);
      info["degrees"] = degrees;
      info["diameter"] = g.topology.diameter();
      write_json(out / "graph.json", info);
      if (write_edges) {
        std::ostringstream csv;
        csv << "a,b\n";
        for (auto [a, b] : explicit_edges(g)) csv << a << ',' << b << '\n';
        write_text(out / "edges.csv", csv.str());
      }
      run["pyramid"] = pyramid_path;
      run["graph"] = bg_graph.to_json();
      write_json(out / "run.json", run);
      std::cout << info.dump(2) << "\n";
      return 0;
    }

    if (*tr) {
      const TrainConfig config = tr_flags.resolve();
      const GraphOptions opts = tr_graph.resolve();
      require_file(manifest_path, "manifest");
      prepare_out(out);
      const Dataset ds = load_dataset(manifest_path, opts);
      const auto seed = config.seeds.front();
      const TrainResult result = train(ds, config, seed);
      json meta;
      meta["classes"] = ds.class_names;
      meta["seed"] = seed;
      meta["config"] = config.to_json();
      meta["graph"] = tr_graph.to_json();
      save_checkpoint(out / "model.grsp", result.params, meta);
      std::ostringstream csv;
      csv.precision(17);
      csv << "epoch,loss\n";
      for (std::size_t e = 0; e < result.loss_curve.size(); ++e) csv << e << ',' << result.loss_curve[e] << '\n';
      write_text(out / "loss.csv", csv.str());
      run["manifest"] = manifest_path;
      run["config"] = config.to_json();
      run["graph"] = tr_graph.to_json();
      write_json(out / "run.json", run);
      std::cout << "final loss " << result.loss_curve.back() << "\n";
      return 0;
    }

    if (*cv) {
      const TrainConfig config = cv_flags.resolve();
      const GraphOptions opts = cv_graph.resolve();
      require_file(manifest_path, "manifest");
      prepare_out(out);
      const Dataset ds = load_dataset(manifest_path, opts);
      const EvalReport report = cross_validate(ds, config);
      json rep = report.to_json();
      rep["classes"] = ds.class_names;
      write_json(out / "eval_report.json", rep);
      write_json(out / "timing.json", report.timing_json());
      write_text(out / "loss.csv", report.loss_csv());
      run["manifest"] = manifest_path;
      run["config"] = config.to_json();
      run["graph"] = cv_graph.to_json();
      write_json(out / "run.json", run);
      std::cout << "balanced accuracy " << report.balanced_accuracy.mean << " +- " << report.balanced_accuracy.std
                << ", f1 " << report.f1.mean << " +- " << report.f1.std << "\n";
      return 0;
    }

    if (*ev) {
      const GraphOptions opts = ev_graph.resolve();
      require_file(manifest_path, "manifest");
      require_file(model_path, "model");
      prepare_out(out);
      const ModelParams params = load_checkpoint(model_path);
      const Dataset ds = load_dataset(manifest_path, opts);
      const Evaluation e = evaluate(params, ds);
      write_json(out / "eval.json", eval_json(e, ds, {}));
      run["manifest"] = manifest_path;
      run["model"] = model_path;
      run["graph"] = ev_graph.to_json();
      write_json(out / "run.json", run);
      std::cout << "balanced accuracy " << e.balanced_accuracy << ", f1 " << e.f1 << "\n";
      return 0;
    }

    if (*mc) {
      const TrainConfig config = mc_flags.resolve();
      GraphOptions opts = mc_graph.resolve();
      if (!mc_counts.empty()) plan.counts = mc_counts;
      if (mc_step) plan.step = *mc_step;
      if (mc_min) plan.min_count = *mc_min;
      if (mc_max) plan.max_count = *mc_max;
      require_file(manifest_path, "manifest");
      const Manifest man = load_manifest(manifest_path);
      const auto pyrs = man.load_all();
      if (pyrs.empty()) throw ConfigError("manifest is empty");
      plan.base_m = pyrs.front().m();
      plan.validate();
      prepare_out(out);
      const Dataset ds = make_dataset(pyrs, man.labels(), opts);
      const auto rows = monte_carlo_test(ds, plan, config);
      write_text(out / "monte_carlo.csv", monte_carlo_csv(rows));
      json table = json::array();
      for (const auto& r : rows) {
        table.push_back({{"count", r.count},
                         {"nodes", r.nodes},
                         {"balanced_accuracy", {{"mean", r.balanced_accuracy.mean}, {"std", r.balanced_accuracy.std}}},
                         {"f1", {{"mean", r.f1.mean}, {"std", r.f1.std}}},
                         {"runs", r.run_balanced_accuracies}});
      }
      write_json(out / "monte_carlo.json", table);
      run["manifest"] = manifest_path;
      run["config"] = config.to_json();
      run["graph"] = mc_graph.to_json();
      run["plan"] = {{"base_m", plan.base_m},          {"counts", plan.resolved_counts()},
                     {"repetitions", plan.repetitions}, {"drop_seed", plan.seed},
                     {"full_grid", plan.full_grid}};
      write_json(out / "run.json", run);
      std::cout << monte_carlo_csv(rows);
      return 0;
    }

    if (*ma) {
      const TrainConfig config = ma_flags.resolve();
      const GraphOptions opts = ma_graph.resolve();
      std::vector<MagnificationMask> masks;
      for (const auto& n : mask_names) masks.push_back(MagnificationMask::parse(n));
      require_file(manifest_path, "manifest");
      prepare_out(out);
      const Dataset ds = load_dataset(manifest_path, opts);
      const auto reports = magnification_test(ds, masks, config);
      write_text(out / "magnification.csv", magnification_csv(reports));
      json all = json::array();
      for (const auto& r : reports) all.push_back({{"mask", r.mask.name()}, {"report", r.report.to_json()}});
      write_json(out / "magnification.json", all);
      run["manifest"] = manifest_path;
      run["config"] = config.to_json();
      run["graph"] = ma_graph.to_json();
      run["masks"] = mask_names;
      write_json(out / "run.json", run);
      std::cout << magnification_csv(reports);
      return 0;
    }

    if (*co) {
      const GraphOptions opts = co_graph.resolve();
      if (!(tau > 0.0 && tau <= 0.5)) throw ConfigError("--tau must be in (0, 0.5]");
      require_file(manifest_path, "manifest");
      require_file(model_path, "model");
      prepare_out(out);
      const ModelParams params = load_checkpoint(model_path);
      const Dataset ds = load_dataset(manifest_path, opts);
      const auto records = consult_all(ds, params, {}, tau, co_jobs);
      int degenerate = 0;
      for (const auto& r : records) degenerate += r.degenerate;
      if (degenerate > 0) std::cerr << "warning: " << degenerate << " slide(s) had zero input gradient\n";
      write_text(out / "consultation.csv", consultation_csv(records));
      write_json(out / "consultation_histogram.json", consultation_histogram(records, ds.class_names).to_json());
      if (with_occlusion) {
        json occ;
        occ["none"] = evaluate(params, ds).balanced_accuracy;
        for (auto mag : kMagnifications)
          occ[std::string(magnification_name(mag))] = occlusion_evaluation(params, ds, mag).balanced_accuracy;
        write_json(out / "occlusion.json", occ);
      }
      run["manifest"] = manifest_path;
      run["model"] = model_path;
      run["tau"] = tau;
      run["graph"] = co_graph.to_json();
      write_json(out / "run.json", run);
      std::cout << consultation_histogram(records, ds.class_names).to_json().dump(2) << "\n";
      return 0;
    }

    if (*cg) {
      conv.seeds = parse_seed_list(conv_seeds);
      conv.graph = cg_graph.resolve();
      prepare_out(out);
      const auto report = convergence_sweep(conv);
      write_text(out / "convergence.csv", report.to_csv());
      json summary;
      summary["m_list"] = report.m_list;
      summary["weight_scale"] = report.weight_scale;
      for (auto mag : kMagnifications) {
        const auto k = static_cast<std::size_t>(mag);
        summary[std::string(magnification_name(mag))] = {{"median_spread", report.median_spread[k]},
                                                         {"spearman_trend", report.trend[k]}};
      }
      write_json(out / "convergence.json", summary);
      run["m_list"] = conv.m_list;
      run["seeds"] = conv.seeds;
      run["d"] = conv.d;
      run["weight_scale"] = conv.weight_scale;
      run["gcn_widths"] = conv.gcn_widths;
      run["graph"] = cg_graph.to_json();
      write_json(out / "run.json", run);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
