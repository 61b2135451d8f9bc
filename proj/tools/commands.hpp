#pragma once

#include "yr/io.hpp"

#include <set>
#include <string>

namespace yr::cli {

/// Effective configuration: JSON file, then flag overrides. Every key read is
/// recorded with its value (defaults included) so the report echoes the full run.
class Config
{
public:
  explicit Config(Json raw) : raw_(std::move(raw)) {}

  template <class T> T get(const std::string &key, T fallback) {
    T v = raw_.contains(key) ? raw_.at(key).get<T>() : fallback;
    echo_[key] = v;
    return v;
  }
  Json get_json(const std::string &key, Json fallback);
  bool has(const std::string &key) const { return raw_.contains(key); }

  /// Throws on keys nobody asked for.
  void reject_unknown() const;
  const Json &echo() const { return echo_; }

private:
  Json raw_;
  Json echo_ = Json::object();
};

/// Returns the exit code: 0 all checks pass, 2 some check failed.
using Command = int (*)(Config &, const std::string &out_dir);

int cmd_fbm(Config &cfg, const std::string &out);
int cmd_average(Config &cfg, const std::string &out);
int cmd_gamma(Config &cfg, const std::string &out);
int cmd_solve(Config &cfg, const std::string &out);
int cmd_flow(Config &cfg, const std::string &out);
int cmd_check_conditions(Config &cfg, const std::string &out);
int cmd_demo_nonuniqueness(Config &cfg, const std::string &out);
int cmd_demo_regularization(Config &cfg, const std::string &out);
int cmd_scaling_study(Config &cfg, const std::string &out);

} // namespace yr::cli
