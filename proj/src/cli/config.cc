/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/cli/config.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "qgda/error.h"

namespace qgda::cli {
namespace {

enum class Kind { Int, U64, Real, Bool, Text, Choice, Path };

struct Key {
  std::string_view section;
  std::string_view name;
  Kind kind;
  std::string_view fallback;
  std::string_view choices = {};  ///< space-separated, Choice only
};

constexpr std::array<std::string_view, 7> kSections{"model", "grid", "obs", "da", "unet", "train", "experiment"};

// clang-format off
const std::vector<Key>& schema() {
  static const std::vector<Key> keys{
      {"model", "delta", Kind::Real, "0.05"},
      {"model", "u1", Kind::Real, "0.025"},
      {"model", "u2", Kind::Real, "0"},
      {"model", "beta", Kind::Real, "5e-12"},
      {"model", "rek", Kind::Real, "3.5e-08"},
      {"model", "rd", Kind::Real, "15000"},
      {"model", "dt", Kind::Real, "7200"},
      {"model", "nonlinear", Kind::Bool, "true"},
      {"model", "filter", Kind::Bool, "true"},
      {"grid", "truth_n", Kind::Int, "128"},
      {"grid", "da_n", Kind::Int, "32"},
      {"grid", "length_km", Kind::Real, "1000"},
      {"obs", "count", Kind::Int, "50"},
      {"obs", "error_sd_upper", Kind::Real, "1e-05"},
      {"obs", "error_sd_lower", Kind::Real, "5e-07"},
      {"da", "method", Kind::Choice, "3dvar", "control 3dvar en3dvar enkf unetkf"},
      {"da", "ensemble_size", Kind::Int, "1"},
      {"da", "relaxation", Kind::Real, "0.55"},
      {"da", "radius_km", Kind::Real, "100"},
      {"da", "cycle_days", Kind::Int, "10"},
      {"da", "network", Kind::Path, "unet.unwt"},
      {"da", "transfer", Kind::Bool, "false"},
      {"da", "transfer_regrid", Kind::Choice, "bilinear", "bilinear cubic area"},
      {"unet", "width", Kind::Int, "16"},
      {"unet", "depth", Kind::Int, "2"},
      {"unet", "kernel", Kind::Int, "2"},
      {"unet", "patch", Kind::Int, "16"},
      {"train", "learning_rate", Kind::Real, "0.002"},
      {"train", "epochs", Kind::Int, "30"},
      {"train", "batch_size", Kind::Int, "64"},
      {"train", "train_fraction", Kind::Real, "0.8"},
      {"train", "patience", Kind::Int, "0"},
      {"train", "dataset", Kind::Path, "dataset.qgpd"},
      {"experiment", "name", Kind::Text, "qgl-3dvar"},
      {"experiment", "seed", Kind::U64, "1"},
      {"experiment", "threads", Kind::Int, "1"},
      {"experiment", "truth_days", Kind::Int, "730"},
      {"experiment", "spinup_years", Kind::Real, "2"},
      {"experiment", "prespin_years", Kind::Real, "10"},
      {"experiment", "prespin_n", Kind::Int, "32"},
      {"experiment", "start_day", Kind::Int, "370"},
      {"experiment", "cycles", Kind::Int, "36"},
      {"experiment", "init_spinup_years", Kind::Real, "6"},
      {"experiment", "member_spacing_days", Kind::Real, "30"},
      {"experiment", "background_years", Kind::Real, "20"},
      {"experiment", "background_spacing_days", Kind::Real, "10"},
      {"experiment", "background_window_days", Kind::Real, "60"},
      {"experiment", "extract_stride", Kind::Int, "0"},
      {"experiment", "save_forecasts", Kind::Bool, "false"},
      {"experiment", "truth", Kind::Path, "truth.qgtr"},
      {"experiment", "obs", Kind::Path, "obs.qgob"},
      {"experiment", "forecasts", Kind::Path, "forecasts"},
      {"experiment", "reference", Kind::Path, "reference.qgpd"},
      {"experiment", "climatology", Kind::Path, ""},
      {"experiment", "runs", Kind::Text, ""},
  };
  return keys;
}
// clang-format on

std::string full_name(const Key& k) { return std::string(k.section) + "." + std::string(k.name); }

const Key* find_key(std::string_view full) {
  for (const auto& k : schema()) {
    if (full == full_name(k)) return &k;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

[[noreturn]] void mismatch(const std::string& key, std::string_view text, std::string_view expected) {
  throw ConfigError(key + ": expected " + std::string(expected) + ", got '" + std::string(text) + "'");
}

/// Checks the value against the key's type and returns its canonical text.
std::string canonical(const Key& k, std::string_view raw) {
  const std::string key = full_name(k);
  std::string_view text = trim(raw);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
  const char* b = text.data();
  const char* e = b + text.size();
  switch (k.kind) {
    case Kind::Int: {
      long long v = 0;
      const auto r = std::from_chars(b, e, v);
      if (text.empty() || r.ec != std::errc() || r.ptr != e || v < std::numeric_limits<int>::min() ||
          v > std::numeric_limits<int>::max()) {
        mismatch(key, text, "an integer");
      }
      return std::to_string(v);
    }
    case Kind::U64: {
      std::uint64_t v = 0;
      const auto r = std::from_chars(b, e, v);
      if (text.empty() || r.ec != std::errc() || r.ptr != e) mismatch(key, text, "an unsigned 64-bit integer");
      return std::to_string(v);
    }
    case Kind::Real: {
      double v = 0.0;
      const auto r = std::from_chars(b, e, v);
      if (text.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) mismatch(key, text, "a finite number");
      return format_real(v);
    }
    case Kind::Bool:
      if (text == "true" || text == "false") return std::string(text);
      mismatch(key, text, "true or false");
    case Kind::Choice: {
      std::istringstream in{std::string(k.choices)};
      std::string c;
      while (in >> c) {
        if (c == text) return c;
      }
      mismatch(key, text, "one of: " + std::string(k.choices));
    }
    case Kind::Text:
    case Kind::Path:
      return std::string(text);
  }
  return std::string(text);
}

class Reader {
 public:
  explicit Reader(const ConfigValues& v) : v_(v) {}
  const std::string& text(const std::string& key) const { return v_.at(key); }
  int integer(const std::string& key) const { return std::stoi(text(key)); }
  std::uint64_t u64(const std::string& key) const { return std::stoull(text(key)); }
  double real(const std::string& key) const {
    double x = 0.0;
    const auto& s = text(key);
    std::from_chars(s.data(), s.data() + s.size(), x);
    return x;
  }
  bool flag(const std::string& key) const { return text(key) == "true"; }

 private:
  const ConfigValues& v_;
};

void require(bool ok, const std::string& key, const std::string& constraint) {
  if (!ok) throw ConfigError(key + ": " + constraint);
}

/// Runs a module-level validation, attributing its failure to `key`.
template <class F>
void check(const std::string& key, F&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::filesystem::path absolute_path(const std::string& text, const std::filesystem::path& base) {
  if (text.empty()) return {};
  std::filesystem::path p(text);
  if (p.is_relative()) p = base / p;
  return std::filesystem::absolute(p).lexically_normal();
}

}  // namespace

ConfigValues default_values() {
  ConfigValues v;
  for (const auto& k : schema()) v[full_name(k)] = std::string(k.fallback);
  return v;
}

void apply_override(ConfigValues& values, const std::string& key, const std::string& text) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown configuration key '" + key + "'");
  values[key] = canonical(*k, text);
}

ConfigValues parse_config(std::string_view text) {
  ConfigValues values = default_values();
  std::map<std::string, int> seen;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        throw ConfigError(where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string name(trim(line.substr(0, eq)));
    const std::string key = section.empty() || name.find('.') != std::string::npos ? name : section + "." + name;
    if (name.empty()) throw ConfigError(where + ": missing key");
    if (!find_key(key)) throw ConfigError(where + ": unknown configuration key '" + key + "'");
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      throw ConfigError(where + ": " + key + " already set on line " + std::to_string(it->second));
    }
    apply_override(values, key, std::string(line.substr(eq + 1)));
  }
  return values;
}

std::string to_text(const ConfigValues& values) {
  std::string out;
  std::string_view section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      if (!out.empty()) out += '\n';
      out += "[" + std::string(k.section) + "]\n";
      section = k.section;
    }
    const auto it = values.find(full_name(k));
    out += std::string(k.name) + " = " + (it == values.end() ? std::string(k.fallback) : it->second) + "\n";
  }
  return out;
}

RunConfig resolve(ConfigValues values, const std::filesystem::path& base) {
  for (const auto& k : schema()) {
    const auto key = full_name(k);
    if (!values.count(key)) values[key] = std::string(k.fallback);
    if (k.kind == Kind::Path) values[key] = absolute_path(values[key], base).string();
  }
  for (const auto& [key, _] : values) {
    if (!find_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
  }
  const Reader r(values);
  RunConfig c;

  auto& p = c.physics;
  p.delta = r.real("model.delta");
  p.u1 = r.real("model.u1");
  p.u2 = r.real("model.u2");
  p.beta = r.real("model.beta");
  p.rek = r.real("model.rek");
  p.rd = r.real("model.rd");
  p.dt = r.real("model.dt");
  p.nonlinear = r.flag("model.nonlinear");
  p.filter = r.flag("model.filter");
  check("model", [&] { p.validate(); });

  c.truth_n = r.integer("grid.truth_n");
  c.da_n = r.integer("grid.da_n");
  c.length = r.real("grid.length_km") * 1e3;
  check("grid.truth_n", [&] { model::GridSpec::create(c.truth_n, c.length); });
  check("grid.da_n", [&] { model::GridSpec::create(c.da_n, c.length); });
  require(c.truth_n >= c.da_n, "grid.truth_n", "the truth grid must be at least as fine as the DA grid");
  require(c.truth_n % c.da_n == 0, "grid.truth_n", "must be a multiple of grid.da_n");
  check("grid.da_n", [&] { harness::params_for_grid(p, c.da_n).validate(); });

  c.obs.count = r.integer("obs.count");
  c.obs.error_sd = {r.real("obs.error_sd_upper"), r.real("obs.error_sd_lower")};
  check("obs", [&] { c.obs.validate(); });

  const std::string method = r.text("da.method");
  c.control = method == "control";
  if (!c.control) c.da.method = da::parse_method(method);
  c.da.members = r.integer("da.ensemble_size");
  c.da.alpha = r.real("da.relaxation");
  c.da.radius_m = r.real("da.radius_km") * 1e3;
  c.da.cycle_days = r.integer("da.cycle_days");
  c.da.network = r.text("da.network");
  c.transfer = r.flag("da.transfer");
  c.transfer_regrid = model::parse_regrid_method(r.text("da.transfer_regrid"));
  if (!c.control) {
    const bool single = c.da.method == da::Method::ThreeDVar;
    if (single) {
      require(c.da.members == 1, "da.ensemble_size", "3dvar runs a single state (N = 1)");
    } else {
      require(c.da.members >= 2, "da.ensemble_size", method + " requires N >= 2 members");
    }
    require(c.da.alpha >= 0.0 && c.da.alpha <= 1.0, "da.relaxation", "must lie in [0, 1]");
    require(c.da.radius_m > 0.0, "da.radius_km", "must be > 0");
    require(c.da.method != da::Method::UNetKF || !c.da.network.empty(), "da.network", "unetkf needs a checkpoint");
    check("da", [&] { c.da.validate(); });
  }
  require(c.da.cycle_days >= 1, "da.cycle_days", "must be >= 1");

  c.net.width = r.integer("unet.width");
  c.net.depth = r.integer("unet.depth");
  c.net.kernel = r.integer("unet.kernel");
  c.patch = r.integer("unet.patch");
  check("unet", [&] { c.net.validate(); });
  require(c.patch >= 2 && c.patch % 2 == 0 && c.patch <= c.da_n, "unet.patch", "must be even and at most grid.da_n");
  check("unet.patch", [&] { c.net.check_input(c.patch); });

  c.train.learning_rate = r.real("train.learning_rate");
  c.train.epochs = r.integer("train.epochs");
  c.train.batch_size = r.integer("train.batch_size");
  c.train.train_fraction = r.real("train.train_fraction");
  c.train.patience = r.integer("train.patience");
  check("train", [&] { c.train.validate(); });
  c.dataset = r.text("train.dataset");

  c.name = r.text("experiment.name");
  require(!c.name.empty(), "experiment.name", "must not be empty");
  c.seed = r.u64("experiment.seed");
  c.threads = r.integer("experiment.threads");
  require(c.threads >= 1, "experiment.threads", "must be >= 1");
  c.truth.n = c.truth_n;
  c.truth.length = c.length;
  c.truth.days = r.integer("experiment.truth_days");
  c.truth.spinup_years = r.real("experiment.spinup_years");
  c.truth.prespin_years = r.real("experiment.prespin_years");
  c.truth.prespin_n = r.integer("experiment.prespin_n");
  check("experiment", [&] { c.truth.validate(); });
  c.start_day = r.integer("experiment.start_day");
  c.cycles = r.integer("experiment.cycles");
  require(c.start_day >= 0, "experiment.start_day", "must be >= 0");
  require(c.cycles >= 0, "experiment.cycles", "must be >= 0");
  c.init.spinup_years = r.real("experiment.init_spinup_years");
  c.init.member_spacing_days = r.real("experiment.member_spacing_days");
  require(c.init.spinup_years >= 0.0, "experiment.init_spinup_years", "must be >= 0");
  require(c.init.member_spacing_days > 0.0, "experiment.member_spacing_days", "must be > 0");
  c.background.years = r.real("experiment.background_years");
  c.background.spacing_days = r.real("experiment.background_spacing_days");
  c.background.window_days = r.real("experiment.background_window_days");
  c.background.P = c.patch;
  require(c.background.years > 0.0, "experiment.background_years", "must be > 0");
  require(c.background.spacing_days > 0.0, "experiment.background_spacing_days", "must be > 0");
  require(c.background.window_days > 0.0, "experiment.background_window_days", "must be > 0");
  c.extract_stride = r.integer("experiment.extract_stride");
  require(c.extract_stride >= 0, "experiment.extract_stride", "must be >= 0");
  c.save_forecasts = r.flag("experiment.save_forecasts");
  c.truth_path = r.text("experiment.truth");
  c.obs_path = r.text("experiment.obs");
  c.forecasts_path = r.text("experiment.forecasts");
  c.reference_path = r.text("experiment.reference");
  c.climatology_path = r.text("experiment.climatology");
  c.runs = r.text("experiment.runs");
  c.values = std::move(values);
  return c;
}

}  // namespace qgda::cli
