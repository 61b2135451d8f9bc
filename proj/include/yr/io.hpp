#pragma once

#include "yr/averaging.hpp"
#include "yr/conditions.hpp"
#include "yr/paths.hpp"
#include "yr/stats.hpp"
#include "yr/yde.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace yr {

using Json = nlohmann::json;

std::string sha256_hex(const std::string &bytes);

/// Git revision and compiler captured at configure time.
std::string build_stamp();

struct Check
{
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// report.json: config echo, build stamp, timing, checks, flags, results, and a
/// SHA-256 manifest of every file written through write_file. Keys are sorted.
class RunReport
{
public:
  RunReport(std::string command, std::filesystem::path out_dir, Json config);

  void add_check(std::string name, bool pass, double value, double threshold, std::string detail = {});
  void add_flag(const std::string &flag);
  Json &results() { return results_; }

  /// Writes out_dir/name and records its hash.
  void write_file(const std::string &name, const std::string &content);

  bool all_pass() const;
  const std::vector<Check> &checks() const { return checks_; }
  Json to_json(bool with_timing = true) const;
  /// Writes out_dir/report.json.
  void finish();

private:
  std::string command_;
  std::filesystem::path out_dir_;
  Json config_;
  Json results_ = Json::object();
  std::vector<Check> checks_;
  std::vector<std::string> flags_;
  std::vector<std::pair<std::string, std::string>> manifest_; ///< (name, sha256)
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------

struct PlotSeries
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line plot with markers; non-positive points are skipped.
std::string svg_loglog(const std::string &title, const std::string &xlabel, const std::string &ylabel,
                       const std::vector<PlotSeries> &series);

// ---------------------------------------------------------------------------

/// Header `t,x,a_1,...` (d = 1) or `t,x_1,...,x_d,a_1,...`; one row per (time node, space node).
void write_field_csv(std::ostream &os, const AveragedField &a);
Json field_sidecar(const AveragedField &a, const Json &provenance);

std::string path_csv(const SampledPath &p);
std::string flow_csv(const FlowMap &f);

Json to_json(const LinearFit &f);
Json to_json(const FieldHolderEstimate &e);
Json to_json(const MomentExponent &m);
Json to_json(const ConditionReport &r);
Json to_json(const UniquenessProbe &p);
Json to_json(const TimeGrid &g);
Json to_json(const SpaceGrid &g);

} // namespace yr
