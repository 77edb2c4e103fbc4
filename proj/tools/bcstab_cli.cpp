// bcstab_cli: command-line front end for the stability-region toolkit.
//
//   bcstab_cli probs --gamma1 1.2 --gamma2 0.7 --policy adaptive
//   bcstab_cli boundary --config run.cfg --format json --out results
//   bcstab_cli verify --ci --horizon 1000000
//   bcstab_cli recipe fig7
//
// Exit codes: 0 success, 1 invalid input, 2 verify tolerance breached (--ci).

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcstab/experiment.h"
#include "bcstab/report_io.h"

namespace {

using namespace bcstab;

// Flags that map one-to-one onto spec keys.
const char* const kValueKeys[] = {
    "gamma1", "gamma2",   "d1",     "d2",        "alpha",     "p1",
    "p2",     "p-total",  "scheme", "policy",    "variants",  "tasks",
    "sweep",  "from",     "to",     "steps",     "horizon",   "seed",
    "mode",   "dominant", "lambda1", "lambda2",  "drift-eps", "q-cap-fraction",
    "points", "splits",   "tolerance", "format", "out",       "strong-user"};

struct CommandFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config;
  bool ci = false;
  std::string recipe;
};

void add_spec_flags(CLI::App& cmd, CommandFlags& flags) {
  cmd.add_option("--config", flags.config, "key = value file; flags override it");
  for (const char* key : kValueKeys) {
    flags.options[key] = cmd.add_option(std::string("--") + key, flags.values[key]);
  }
}

KeyValues collect(const CommandFlags& flags) {
  KeyValues kv;
  if (!flags.config.empty()) kv = read_key_values(flags.config);
  for (const auto& [key, opt] : flags.options) {
    if (opt->count() > 0) kv[key] = flags.values.at(key);
  }
  return kv;
}

void print_summary(const SweepResult& result) {
  for (const ResultRow& row : result.rows) {
    std::cout << to_string(row.task) << ' ' << to_string(row.variant);
    if (row.parameter != "none") {
      std::cout << ' ' << row.parameter << '=' << format_double(row.value);
    }
    if (const auto* p = std::get_if<SuccessProfile>(&row.payload)) {
      std::printf(" p_1_1=%.4f p_2_2=%.4f p_1_12=%.4f p_2_12=%.4f", p->p_1_1, p->p_2_2,
                  p->p_1_12, p->p_2_12);
    } else if (const auto* a = std::get_if<AggregatePayload>(&row.payload)) {
      std::printf(" stable=%.4f (%s) saturated=%.4f", a->stable.value,
                  std::string(to_string(a->stable.corner)).c_str(), a->saturated);
    } else if (const auto* v = std::get_if<VerifyPayload>(&row.payload)) {
      std::printf(" max_delta=%.4f", v->max_delta());
    } else if (const auto* s = std::get_if<SimulatePayload>(&row.payload)) {
      std::cout << " verdicts=" << to_string(s->outcome.queue[0].verdict) << ','
                << to_string(s->outcome.queue[1].verdict);
    }
    std::cout << '\n';
  }
}

int execute(ExperimentSpec spec, bool ci) {
  std::vector<std::filesystem::path> written;
  const SweepResult result = run(spec, &written);
  print_summary(result);
  for (const auto& path : written) std::cout << "wrote " << path.string() << '\n';
  int code = 0;
  for (const ResultRow& row : result.rows) {
    const auto* v = std::get_if<VerifyPayload>(&row.payload);
    if (v && v->max_delta() > spec.verify_tolerance) {
      std::cerr << "verify: " << to_string(row.variant) << " max delta "
                << format_double(v->max_delta()) << " exceeds tolerance "
                << format_double(spec.verify_tolerance) << '\n';
      if (ci) code = 2;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable-throughput region toolkit for the two-user broadcast channel"};
  app.require_subcommand(1);

  const std::pair<const char*, const char*> task_commands[] = {
      {"probs", "success probabilities"},
      {"region", "stability region half-planes and convexity"},
      {"boundary", "sampled region frontier"},
      {"closure", "union of regions over power splits"},
      {"aggregate", "maximum aggregate stable and saturated throughput"},
      {"simulate", "queue simulation at fixed arrival rates"},
      {"verify", "simulated boundary along 8 rays against the analytic one"}};

  std::map<std::string, CommandFlags> flags;
  std::map<std::string, CLI::App*> commands;
  for (const auto& [name, help] : task_commands) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_spec_flags(*cmd, flags[name]);
    if (std::string(name) == "verify") {
      cmd->add_flag("--ci", flags[name].ci, "exit 2 when a delta exceeds the tolerance");
    }
    commands[name] = cmd;
  }
  CLI::App* recipe = app.add_subcommand("recipe", "canonical figure data (fig3..fig8)");
  recipe->add_option("name", flags["recipe"].recipe)->required();
  add_spec_flags(*recipe, flags["recipe"]);
  recipe->add_flag("--ci", flags["recipe"].ci, "exit 2 when a verify delta exceeds tolerance");
  commands["recipe"] = recipe;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    for (auto& [name, cmd] : commands) {
      if (!cmd->parsed()) continue;
      const CommandFlags& f = flags.at(name);
      KeyValues kv = collect(f);
      ExperimentSpec spec;
      if (name == "recipe") {
        spec = fig_recipe(f.recipe);
      } else {
        kv["tasks"] = name;
      }
      apply_key_values(spec, kv);
      return execute(spec, f.ci);
    }
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
