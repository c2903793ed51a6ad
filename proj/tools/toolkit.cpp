/// Command-line driver: one subcommand per task, JSON config with dotted
/// --set overrides.
///
///   toolkit <task> --config path.json [--set k=v ...] [--out dir]
///           [--threads n] [--seed s]

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zms/experiment.hpp"
#include "zms/version.hpp"

namespace {

// Apply "a.b.c=value" into the config object; the value is parsed as JSON
// when possible and falls back to a string.
void apply_set(zms::json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw zms::schema_error("--set expects key=value, got '" + kv + "'");
  const std::string path = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  zms::json value;
  try {
    value = zms::json::parse(raw);
  } catch (const zms::json::exception&) {
    value = raw;
  }
  zms::json* node = &cfg;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (key.empty()) throw zms::schema_error("--set: empty key in " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zms: ground states of the zero-mass scalar field equation "
               "and their interaction asymptotics"};
  app.set_version_flag("--version", zms::version);
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::vector<std::string> sets;
  int threads = -1;
  long long seed = -1;

  zms::Task chosen = zms::Task::GroundState;
  for (zms::Task t : {zms::Task::GroundState, zms::Task::Audit,
                      zms::Task::EpsilonScan, zms::Task::Landscape,
                      zms::Task::VerifyLemmas, zms::Task::Sobolev,
                      zms::Task::CvEstimate}) {
    auto* sub = app.add_subcommand(zms::to_string(t));
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", sets, "override config entries, key.path=value");
    sub->add_option("--out", out_override, "output directory");
    sub->add_option("--threads", threads, "parallelism hint");
    sub->add_option("--seed", seed, "RNG seed for Monte Carlo methods");
    sub->callback([&chosen, t] { chosen = t; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    zms::json raw = zms::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw zms::schema_error("cannot open config " + config_path);
      try {
        in >> raw;
      } catch (const zms::json::exception& e) {
        throw zms::schema_error(std::string("JSON parse failure: ") + e.what());
      }
    }
    for (const auto& kv : sets) apply_set(raw, kv);
    if (!out_override.empty()) raw["out"] = out_override;
    if (threads >= 0) raw["threads"] = threads;
    if (seed >= 0) raw["seed"] = seed;
    return zms::run_from_json(std::move(raw), chosen);
  } catch (const std::invalid_argument& e) {
    // Config rejection before any artifact is written.
    std::fprintf(stderr,
                 "{\"exit_code\":2,\"kind\":\"schema\",\"message\":\"%s\"}\n",
                 e.what());
    return 2;
  }
}
