/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qgda/error.h"
#include "qgda/harness/report.h"
#include "qgda/harness/stats.h"

namespace qgda::harness {

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string metrics_csv(const ExperimentRecord& rec) {
  std::string out = "cycle_time,layer,rmse,spread\n";
  for (std::size_t k = 0; k < rec.day.size(); ++k)
    for (int l = 0; l < 2; ++l) {
      out += num(rec.day[k]) + "," + std::to_string(l + 1) + "," + num(rec.rmse[l][k]) + "," + num(rec.spread[l][k]) +
             "\n";
    }
  return out;
}

ExperimentRecord parse_metrics_csv(std::string_view text, const std::string& what) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "cycle_time,layer,rmse,spread") {
    throw IoError(IoError::Code::Format, what + ": missing metrics header");
  }
  ExperimentRecord rec;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double v[4];
    std::size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t end = f < 3 ? line.find(',', pos) : line.size();
      if (end == std::string::npos) throw IoError(IoError::Code::Format, what + ": short row " + std::to_string(row));
      const std::string field = line.substr(pos, end - pos);
      char* stop = nullptr;
      v[f] = std::strtod(field.c_str(), &stop);
      if (field.empty() || *stop != '\0') {
        throw IoError(IoError::Code::Format, what + ": bad number '" + field + "' on row " + std::to_string(row));
      }
      pos = end + 1;
    }
    const int layer = static_cast<int>(v[1]);
    if (layer != 1 && layer != 2) throw IoError(IoError::Code::Format, what + ": bad layer on row " + std::to_string(row));
    if (layer == 1) rec.day.push_back(v[0]);
    rec.rmse[layer - 1].push_back(v[2]);
    rec.spread[layer - 1].push_back(v[3]);
  }
  if (rec.rmse[0].size() != rec.day.size() || rec.rmse[1].size() != rec.day.size()) {
    throw IoError(IoError::Code::Format, what + ": layers have different series lengths");
  }
  return rec;
}

std::string report_csv(std::span<const ExperimentRecord> runs) {
  std::string out =
      "experiment,method,N,relaxation,radius_km,rmse_upper,rmse_lower,diff_upper,diff_lower,t_upper,t_lower,"
      "significant_upper,significant_lower\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    out += run.name + "," + run.method + "," + std::to_string(run.members) + "," + num(run.alpha) + "," +
           num(run.radius_m / 1000.0) + "," + num(mean_of(run.rmse[0])) + "," + num(mean_of(run.rmse[1]));
    if (r == 0) {
      out += ",,,,,,\n";
      continue;
    }
    std::string diff, t, sig;
    for (int l = 0; l < 2; ++l) {
      const auto res = ttest_95(run.rmse[l], runs[0].rmse[l], 1.0);
      diff += "," + num(res.mean_diff);
      t += "," + num(res.t);
      sig += std::string(",") + (res.significant ? "1" : "0");
    }
    out += diff + t + sig + "\n";
  }
  return out;
}

std::string skill_csv(const SkillRatioMap& map, int channel) {
  std::string out;
  const int P = map.P;
  for (int y = 0; y < P; ++y) {
    for (int x = 0; x < P; ++x) {
      const double v = map.ratio[(channel * P + y) * P + x];
      out += (x ? "," : "") + (std::isnan(v) ? std::string("NA") : num(v));
    }
    out += "\n";
  }
  return out;
}

}  // namespace qgda::harness
