/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/cli/commands.h"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <numeric>
#include <nlohmann/json.hpp>

#include "qgda/binary_io.h"
#include "qgda/cov/patches.h"
#include "qgda/da/obs.h"
#include "qgda/harness/experiment.h"
#include "qgda/harness/report.h"
#include "qgda/harness/skill.h"
#include "qgda/model/snapshot_io.h"
#include "qgda/rng.h"
#include "qgda/unet/checkpoint.h"
#include "qgda/unet/predict.h"
#include "qgda/unet/train.h"

#ifndef QGDA_VERSION
#define QGDA_VERSION "0.0.0"
#endif

namespace qgda::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json read_json(const fs::path& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw IoError(IoError::Code::Format, path.string() + ": not a valid manifest (" + e.what() + ")");
  }
}

json config_json(const ConfigValues& values) {
  json out = json::object();
  for (const auto& [key, value] : values) {
    const auto dot = key.find('.');
    out[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  return out;
}

/// manifest.json in the output directory, one entry per command.
class Manifest {
 public:
  Manifest(const fs::path& dir, std::string command) : path_(dir / "manifest.json"), command_(std::move(command)) {
    if (fs::exists(path_)) doc_ = read_json(path_);
    if (!doc_.is_object()) doc_ = json::object();
  }

  void begin(const RunConfig& cfg, const Seeds& seeds, const json& inputs, const json& outputs) {
    doc_["tool"] = "qgda";
    doc_["version"] = QGDA_VERSION;
    doc_["experiment"] = cfg.name;
    json& e = doc_["commands"][command_];
    e = json::object();
    e["status"] = "running";
    e["seeds"] = {{"root", seeds.root},       {"truth", seeds.truth},     {"obs", seeds.obs},
                  {"da", seeds.da},           {"control", seeds.control}, {"train", seeds.train}};
    e["inputs"] = inputs;
    e["outputs"] = outputs;
    e["config"] = config_json(cfg.values);
    e["config_text"] = to_text(cfg.values);
    save();
  }

  json& entry() { return doc_["commands"][command_]; }

  void finish() {
    entry()["status"] = "complete";
    save();
  }

  void fail(const std::string& message) {
    if (!doc_.contains("commands") || !doc_["commands"].contains(command_)) return;
    entry()["status"] = "failed";
    entry()["error"] = message;
    save();
  }

 private:
  void save() const {
    const fs::path tmp = path_.string() + ".tmp";
    io::write_text(tmp, doc_.dump(2) + "\n");
    fs::rename(tmp, path_);
  }

  fs::path path_;
  std::string command_;
  json doc_;
};

void require_artifact(const fs::path& path, const std::string& what, const std::string& producer) {
  if (path.empty() || !fs::exists(path)) {
    throw IoError(IoError::Code::Open, "missing upstream artifact: " + what + " expected at '" + path.string() +
                                           "' (written by `qgda " + producer + "`)");
  }
}

model::GridSpec da_grid(const RunConfig& cfg) { return model::GridSpec::create(cfg.da_n, cfg.length); }

harness::Truth load_truth(const RunConfig& cfg) {
  require_artifact(cfg.truth_path, "truth trajectory", "truth");
  return harness::truth_from_trajectory(model::read_trajectory(cfg.truth_path));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Context {
  const Invocation& inv;
  const RunConfig& cfg;
  Seeds seeds;
  Manifest& manifest;
  std::ostream& log;
  fs::path out(const std::string& name) const { return inv.out / name; }
};

void cmd_truth(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path out = ctx.out("truth.qgtr");
  ctx.manifest.begin(cfg, ctx.seeds, json::object(), {{"truth", out.string()}});
  auto tc = cfg.truth;
  tc.seed = ctx.seeds.truth;
  ctx.log << "truth: " << tc.n << "-point grid, " << tc.days << " days after " << tc.prespin_years << " + "
          << tc.spinup_years << " years of spin-up\n";
  const auto truth = harness::make_truth(tc, cfg.physics);
  model::write_trajectory(out, truth.daily);
  ctx.log << "wrote " << out.string() << "\n";
}

void cmd_observe(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path out = ctx.out("obs.qgob");
  ctx.manifest.begin(cfg, ctx.seeds, {{"truth", cfg.truth_path.string()}}, {{"obs", out.string()}});
  const auto truth = load_truth(cfg);
  const auto obs = harness::make_observations(truth, cfg.obs, cfg.da.cycle_days, cfg.cycles, cfg.start_day,
                                              ctx.seeds.obs);
  da::write_observations(out, obs);
  ctx.log << "wrote " << obs.size() << " observation batches to " << out.string() << "\n";
}

void cmd_da_run(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const bool ensemble = !cfg.control && cfg.da.method != da::Method::ThreeDVar;
  const bool needs_b = !cfg.control && (cfg.da.method == da::Method::ThreeDVar || cfg.da.method == da::Method::En3DVar);
  const bool unetkf = !cfg.control && cfg.da.method == da::Method::UNetKF;
  if (cfg.extract_stride > 0 && !ensemble) {
    throw ConfigError("experiment.extract_stride: sample extraction needs an ensemble method");
  }
  if (cfg.save_forecasts && cfg.control) throw ConfigError("experiment.save_forecasts: control runs have no ensemble");

  json inputs = {{"truth", cfg.truth_path.string()}};
  if (!cfg.control) inputs["obs"] = cfg.obs_path.string();
  if (unetkf) inputs["network"] = cfg.da.network;
  json outputs = {{"metrics", ctx.out("metrics.csv").string()}};
  if (needs_b) outputs["background"] = ctx.out("background.qgcb").string();
  if (cfg.extract_stride > 0) outputs["dataset"] = ctx.out("dataset.qgpd").string();
  if (cfg.save_forecasts) outputs["forecasts"] = ctx.out("forecasts").string();
  ctx.manifest.begin(cfg, ctx.seeds, inputs, outputs);

  const auto truth = load_truth(cfg);
  std::vector<da::ObsBatch> obs;
  if (!cfg.control) {
    require_artifact(cfg.obs_path, "observations", "observe");
    obs = da::read_observations(cfg.obs_path);
  }

  harness::ExperimentConfig ec;
  ec.name = cfg.name;
  ec.da = cfg.da;
  ec.da.seed = ctx.seeds.da;
  ec.control = cfg.control;
  ec.grid = da_grid(cfg);
  ec.model = harness::params_for_grid(cfg.physics, cfg.da_n);
  ec.start_day = cfg.start_day;
  ec.cycles = cfg.cycles;
  ec.init = cfg.init;
  ec.threads = cfg.threads;
  ec.extract_stride = cfg.extract_stride;

  harness::ExperimentInputs in;
  in.truth = &truth;
  in.obs = obs;

  cov::ClimatologicalB b;
  if (needs_b) {
    ctx.log << "background: " << cfg.background.years << "-year control run\n";
    b = harness::control_background(ec.grid, ec.model, cfg.background, cfg.init, ctx.seeds.control);
    cov::write_climatological_b(ctx.out("background.qgcb"), b);
    in.background = &b;
  }

  std::unique_ptr<da::PatchPredictor> predictor;
  if (unetkf) {
    require_artifact(cfg.da.network, "network checkpoint", "train");
    auto ckpt = unet::read_checkpoint(cfg.da.network);
    if (ckpt.grid_n == cfg.da_n) {
      predictor = std::make_unique<unet::UNetPredictor>(std::move(ckpt));
    } else if (cfg.transfer) {
      ctx.log << "transfer: " << ckpt.grid_n << "-point network on the " << cfg.da_n << "-point grid\n";
      predictor = std::make_unique<unet::TransferPredictor>(std::move(ckpt), ec.grid, cfg.transfer_regrid);
    } else {
      throw ConfigError("da.network: checkpoint was trained on a " + std::to_string(ckpt.grid_n) +
                        "-point grid but grid.da_n is " + std::to_string(cfg.da_n) + "; set da.transfer = true");
    }
    in.predictor = predictor.get();
  }

  cov::PatchDataset dataset;
  dataset.P = cfg.patch;
  if (cfg.extract_stride > 0) in.dataset = &dataset;

  if (cfg.save_forecasts) {
    const fs::path dir = ctx.out("forecasts");
    fs::create_directories(dir);
    in.on_forecast = [&, dir](int c, const da::Ensemble& ens) {
      std::vector<model::Snapshot> snaps(ens.size());
      const double t = (cfg.start_day + c * cfg.da.cycle_days) * harness::kDay;
      for (int i = 0; i < ens.size(); ++i) snaps[i] = model::Snapshot{cfg.da_n, 2, t, ens.member(i)};
      char name[32];
      std::snprintf(name, sizeof name, "cycle_%04d.qgtr", c);
      model::write_trajectory(dir / name, snaps);
    };
  }

  ctx.log << "da-run: " << (cfg.control ? std::string("control") : std::string(da::to_string(cfg.da.method)))
          << " N=" << cfg.da.members << ", " << cfg.cycles << " cycles from day " << cfg.start_day << "\n";
  const auto rec = harness::run_experiment(ec, in);
  io::write_text(ctx.out("metrics.csv"), harness::metrics_csv(rec));
  if (cfg.extract_stride > 0) cov::write_patch_dataset(ctx.out("dataset.qgpd"), dataset);

  json summary = {{"name", rec.name},       {"method", rec.method}, {"members", rec.members},
                  {"alpha", rec.alpha},     {"radius_m", rec.radius_m}, {"grid_n", rec.grid_n}};
  for (int l = 0; l < 2; ++l) {
    const auto& r = rec.rmse[l];
    const double mean = r.empty() ? 0.0 : std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    summary[l == 0 ? "mean_rmse_upper" : "mean_rmse_lower"] = mean;
  }
  if (cfg.extract_stride > 0) summary["samples"] = dataset.size();
  ctx.manifest.entry()["record"] = summary;
  ctx.log << "mean RMSE upper " << fmt(summary["mean_rmse_upper"]) << ", lower " << fmt(summary["mean_rmse_lower"])
          << "\n";
}

int cycle_from_name(const fs::path& file, int fallback) {
  const std::string stem = file.stem().string();
  const auto pos = stem.find_last_not_of("0123456789");
  const std::string digits = stem.substr(pos == std::string::npos ? 0 : pos + 1);
  return digits.empty() ? fallback : std::stoi(digits);
}

void cmd_extract(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path out = ctx.out("dataset.qgpd");
  ctx.manifest.begin(cfg, ctx.seeds, {{"forecasts", cfg.forecasts_path.string()}}, {{"dataset", out.string()}});
  require_artifact(cfg.forecasts_path, "stored forecast ensembles", "da-run with experiment.save_forecasts = true");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cfg.forecasts_path)) {
    if (e.is_regular_file() && e.path().extension() == ".qgtr") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw IoError(IoError::Code::Open, "missing upstream artifact: no .qgtr ensembles in '" +
                                           cfg.forecasts_path.string() + "'");
  }
  cov::PatchDataset data;
  data.P = cfg.patch;
  for (std::size_t k = 0; k < files.size(); ++k) {
    auto snaps = model::read_trajectory(files[k]);
    if (snaps.size() < 2) throw ConfigError(files[k].string() + ": need at least 2 members");
    const auto grid = model::GridSpec::create(snaps.front().n, cfg.length);
    std::vector<std::vector<double>> members;
    for (auto& s : snaps) {
      if (s.n != grid.n) throw IoError(IoError::Code::Format, files[k].string() + ": members differ in grid size");
      members.push_back(std::move(s.q));
    }
    const int cycle = cycle_from_name(files[k], static_cast<int>(k));
    const cov::EnsemblePerturbations pert(members);
    const auto centers = harness::extraction_centers(grid.n, cfg.extract_stride, cycle);
    cov::extract_patch_samples(grid, pert, static_cast<std::uint64_t>(cycle), centers, data);
  }
  cov::write_patch_dataset(out, data);
  ctx.manifest.entry()["record"] = {{"samples", data.size()}, {"ensembles", files.size()}};
  ctx.log << "wrote " << data.size() << " samples from " << files.size() << " ensembles to " << out.string() << "\n";
}

void cmd_train(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path ckpt_path = ctx.out("unet.unwt"), history_path = ctx.out("loss_history.csv");
  ctx.manifest.begin(cfg, ctx.seeds, {{"dataset", cfg.dataset.string()}},
                     {{"checkpoint", ckpt_path.string()}, {"loss_history", history_path.string()}});
  require_artifact(cfg.dataset, "patch dataset", "da-run or extract");
  const auto data = cov::read_patch_dataset(cfg.dataset);
  if (data.P != cfg.patch) {
    throw ConfigError("unet.patch: dataset holds " + std::to_string(data.P) + "-point patches, configured " +
                      std::to_string(cfg.patch));
  }
  auto tc = cfg.train;
  tc.seed = ctx.seeds.train;
  ctx.log << "train: " << data.size() << " samples, width " << cfg.net.width << ", " << tc.epochs << " epochs\n";
  const auto result = unet::train(data, cfg.net, tc, cfg.da_n, [&](const unet::EpochRecord& e) {
    ctx.log << "epoch " << e.epoch << " train " << fmt(e.train_rmse) << " val " << fmt(e.val_rmse) << "\n";
  });
  std::string history = "epoch,train_rmse,val_rmse\n";
  for (const auto& e : result.history) {
    char line[96];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", e.epoch, e.train_rmse, e.val_rmse);
    history += line;
  }
  unet::write_checkpoint(ckpt_path, result.best);
  io::write_text(history_path, history);
  ctx.manifest.entry()["record"] = {
      {"best_epoch", result.best_epoch}, {"best_val_rmse", result.best_val_rmse}, {"steps", result.steps}};
  ctx.log << "best epoch " << result.best_epoch << ", validation RMSE " << fmt(result.best_val_rmse) << "\n";
}

void cmd_eval_cov(Context& ctx) {
  const auto& cfg = ctx.cfg;
  static constexpr const char* kNames[] = {"upper", "cross", "lower"};
  json inputs = {{"network", cfg.da.network}, {"reference", cfg.reference_path.string()}};
  if (!cfg.climatology_path.empty()) inputs["climatology"] = cfg.climatology_path.string();
  json outputs = json::object();
  for (const char* n : kNames) outputs[std::string("skill_") + n] = ctx.out(std::string("skill_") + n + ".csv").string();
  ctx.manifest.begin(cfg, ctx.seeds, inputs, outputs);

  require_artifact(cfg.da.network, "network checkpoint", "train");
  require_artifact(cfg.reference_path, "reference patch dataset", "da-run or extract");
  const auto ckpt = unet::read_checkpoint(cfg.da.network);
  const auto ref = cov::read_patch_dataset(cfg.reference_path);
  if (ref.P != ckpt.patch) {
    throw ConfigError("experiment.reference: dataset holds " + std::to_string(ref.P) +
                      "-point patches, the network predicts " + std::to_string(ckpt.patch));
  }
  if (ref.size() == 0) throw ConfigError("experiment.reference: dataset is empty");
  std::vector<float> clim;
  if (cfg.climatology_path.empty()) {
    clim = harness::mean_patch(ref);
  } else {
    require_artifact(cfg.climatology_path, "climatology patch dataset", "da-run or extract");
    const auto c = cov::read_patch_dataset(cfg.climatology_path);
    if (c.P != ref.P) throw ConfigError("experiment.climatology: patch size differs from the reference");
    clim = harness::mean_patch(c);
  }
  const unet::UNetPredictor predictor(ckpt);
  std::vector<float> pred(ref.output.size());
  predictor.predict_windows(ref.input, static_cast<int>(ref.size()), pred);
  const auto map = harness::cov_skill_ratio(pred, ref.output, clim, ref.P);
  json center = json::object();
  for (int ch = 0; ch < 3; ++ch) {
    io::write_text(ctx.out(std::string("skill_") + kNames[ch] + ".csv"), harness::skill_csv(map, ch));
    center[kNames[ch]] = map.at(ch, 0, 0);
    ctx.log << "center ratio " << kNames[ch] << " " << fmt(map.at(ch, 0, 0)) << "\n";
  }
  ctx.manifest.entry()["record"] = {{"samples", ref.size()}, {"center_ratio", center}};
}

void cmd_report(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path out = ctx.out("report.csv");
  std::vector<fs::path> dirs;
  for (const auto& item : split_list(cfg.runs)) {
    fs::path p(item);
    if (p.is_relative()) p = ctx.inv.out / p;
    dirs.push_back(fs::absolute(p).lexically_normal());
  }
  json inputs = json::array();
  for (const auto& d : dirs) inputs.push_back(d.string());
  ctx.manifest.begin(cfg, ctx.seeds, {{"runs", inputs}}, {{"report", out.string()}});

  std::vector<harness::ExperimentRecord> runs;
  for (const auto& d : dirs) {
    const fs::path mpath = d / "manifest.json", metrics = d / "metrics.csv";
    require_artifact(mpath, "run manifest", "da-run");
    require_artifact(metrics, "run metrics", "da-run");
    const json m = read_json(mpath);
    if (!m.contains("commands") || !m["commands"].contains("da-run") || !m["commands"]["da-run"].contains("record")) {
      throw IoError(IoError::Code::Format, mpath.string() + ": no completed da-run record");
    }
    const json& r = m["commands"]["da-run"]["record"];
    auto rec = harness::parse_metrics_csv(io::read_text(metrics), metrics.string());
    rec.name = r.at("name").get<std::string>();
    rec.method = r.at("method").get<std::string>();
    rec.members = r.at("members").get<int>();
    rec.alpha = r.at("alpha").get<double>();
    rec.radius_m = r.at("radius_m").get<double>();
    rec.grid_n = r.at("grid_n").get<int>();
    runs.push_back(std::move(rec));
  }
  const std::string csv = harness::report_csv(runs);
  io::write_text(out, csv);
  ctx.log << csv;
}

}  // namespace

Seeds Seeds::derive(std::uint64_t root) {
  return {root,
          derive_seed(root, "truth"),
          derive_seed(root, "obs"),
          derive_seed(root, "da"),
          derive_seed(root, "control"),
          derive_seed(root, "train")};
}

RunConfig load_config(const Invocation& inv) {
  if (inv.config && inv.manifest) throw ConfigError("--config and --manifest are mutually exclusive");
  ConfigValues values;
  if (inv.manifest) {
    require_artifact(*inv.manifest, "manifest", inv.command);
    const json m = read_json(*inv.manifest);
    const json* entry = nullptr;
    if (m.contains("commands") && m["commands"].contains(inv.command)) entry = &m["commands"][inv.command];
    if (!entry || !entry->contains("config_text")) {
      throw ConfigError(inv.manifest->string() + ": no recorded configuration for command '" + inv.command + "'");
    }
    values = parse_config((*entry)["config_text"].get<std::string>());
  } else if (inv.config) {
    require_artifact(*inv.config, "configuration file", "(none: user supplied)");
    values = parse_config(io::read_text(*inv.config));
  } else {
    values = default_values();
  }
  for (const auto& [key, text] : inv.overrides) apply_override(values, key, text);
  if (inv.seed) apply_override(values, "experiment.seed", std::to_string(*inv.seed));
  if (inv.threads) apply_override(values, "experiment.threads", std::to_string(*inv.threads));
  return resolve(std::move(values), inv.out);
}

void dispatch(const Invocation& inv, std::ostream& log) {
  using Fn = void (*)(Context&);
  static const std::pair<const char*, Fn> table[] = {{"truth", cmd_truth},       {"observe", cmd_observe},
                                                     {"da-run", cmd_da_run},     {"extract", cmd_extract},
                                                     {"train", cmd_train},       {"eval-cov", cmd_eval_cov},
                                                     {"report", cmd_report}};
  Fn fn = nullptr;
  for (const auto& [name, f] : table) {
    if (inv.command == name) fn = f;
  }
  if (!fn) throw ConfigError("unknown command '" + inv.command + "'");

  Invocation abs = inv;
  abs.out = fs::absolute(inv.out).lexically_normal();
  const RunConfig cfg = load_config(abs);
  fs::create_directories(abs.out);
  io::write_text(abs.out / "resolved.cfg", to_text(cfg.values));
  Manifest manifest(abs.out, inv.command);
  Context ctx{abs, cfg, Seeds::derive(cfg.seed), manifest, log};
  try {
    fn(ctx);
  } catch (const std::exception& e) {
    manifest.fail(e.what());
    throw;
  }
  manifest.finish();
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Numerical:
      return 2;
    case ErrorKind::Io:
      return 3;
  }
  return 1;
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
  try {
    dispatch(inv, log);
    return 0;
  } catch (const Error& e) {
    err << "qgda " << inv.command << ": error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "qgda " << inv.command << ": error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace qgda::cli
