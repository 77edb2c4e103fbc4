#include "bcstab/experiment.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bcstab/counter_rng.h"
#include "bcstab/report_io.h"

namespace bcstab {

namespace {

using nlohmann::json;

constexpr Task kAllTasks[] = {Task::kProbs,     Task::kRegion,   Task::kBoundary,
                              Task::kClosure,   Task::kAggregate, Task::kSimulate,
                              Task::kVerify};

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::string normalize_key(std::string_view key) {
  std::string out = trim(key);
  for (char& c : out) {
    if (c == '_') c = '-';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const std::string item = trim(text.substr(start, end - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

double number_for(const std::string& key, const std::string& text) {
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) throw SpecError(key, "must be finite");
    return v;
  } catch (const FormatError&) {
    throw SpecError(key, "expected a number, got '" + text + "'");
  }
}

std::uint64_t count_for(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw SpecError(key, "expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

int small_count_for(const std::string& key, const std::string& text) {
  const std::uint64_t v = count_for(key, text);
  if (v > 10'000'000) throw SpecError(key, "too large");
  return static_cast<int>(v);
}

// Rethrows module-level argument errors under the spec key that caused them.
template <typename F>
auto as_spec_error(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw SpecError(key, e.what());
  }
}

json config_json(const SystemConfig& c) {
  return json{{"gamma1", c.gamma1},
              {"gamma2", c.gamma2},
              {"d1", c.d1},
              {"d2", c.d2},
              {"alpha", c.alpha},
              {"p1", c.p1},
              {"p2", c.p2},
              {"p_total", c.p_total},
              {"scheme", to_string(c.scheme)},
              {"policy", to_string(c.power_policy)},
              {"strong_user", static_cast<int>(c.strong_user)}};
}

json sim_json(const SimSettings& s) {
  return json{{"horizon", s.horizon},
              {"seed", s.seed},
              {"mode", to_string(s.mode)},
              {"dominant", to_string(s.dominant)},
              {"lambda1", s.rates.lambda1},
              {"lambda2", s.rates.lambda2},
              {"drift_eps", s.drift_eps},
              {"q_cap_fraction", s.q_cap_fraction}};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Settings that influence one task's payload, beyond the point config.
json task_settings(const ExperimentSpec& spec, Task task) {
  switch (task) {
    case Task::kProbs:
    case Task::kRegion:
    case Task::kAggregate:
      return json::object();
    case Task::kBoundary:
      return json{{"points", spec.boundary_points}};
    case Task::kClosure:
      return json{{"splits", spec.closure_splits}, {"points", spec.boundary_points}};
    case Task::kSimulate:
      return sim_json(spec.sim);
    case Task::kVerify: {
      json j = sim_json(spec.sim);
      j.erase("lambda1");
      j.erase("lambda2");
      j.erase("dominant");
      return j;
    }
  }
  return json::object();
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

VerifyPayload verify_payload(const SystemConfig& cfg, const SimSettings& sim) {
  const StabilityRegion region = build_region(success_profile(cfg));
  const auto dirs = verify_directions();
  VerifyPayload out;
  out.rays.resize(dirs.size());
  ScanOptions options;
  options.mode = sim.mode;
  options.drift_eps = sim.drift_eps;
  options.q_cap_fraction = sim.q_cap_fraction;
  parallel_for(dirs.size(), [&](std::size_t k) {
    const auto [u1, u2] = dirs[k];
    VerifyRay& ray = out.rays[k];
    ray.u1 = u1;
    ray.u2 = u2;
    const double t = ray_exit(region, u1, u2).value_or(0.0);
    ray.analytic = {t * u1, t * u2};
    ray.empirical = boundary_scan(cfg, u1, u2, sim.horizon, derive_seed(sim.seed, k), options);
    ray.delta = std::max(std::abs(ray.analytic.lambda1 - ray.empirical.point.lambda1),
                         std::abs(ray.analytic.lambda2 - ray.empirical.point.lambda2));
  });
  return out;
}

Payload compute(const ExperimentSpec& spec, Task task, const SystemConfig& cfg) {
  switch (task) {
    case Task::kProbs:
      return success_profile(cfg);
    case Task::kRegion: {
      RegionPayload p;
      p.region = build_region(success_profile(cfg));
      if (p.region.profile.p_1_1 > 0.0 && p.region.profile.p_2_2 > 0.0) {
        p.convex = is_convex(p.region.profile);
      }
      return p;
    }
    case Task::kBoundary:
      return BoundaryPayload{
          boundary(build_region(success_profile(cfg)), spec.boundary_points)};
    case Task::kClosure: {
      const auto entries = closure(cfg, spec.closure_splits);
      ClosurePayload p;
      p.splits.reserve(entries.size());
      for (const auto& e : entries) p.splits.push_back({e.p1, e.region.profile});
      p.envelope = closure_envelope(entries, spec.boundary_points);
      return p;
    }
    case Task::kAggregate: {
      const SuccessProfile profile = success_profile(cfg);
      return AggregatePayload{max_aggregate(profile), saturated_aggregate(profile)};
    }
    case Task::kSimulate: {
      SimConfig sim;
      sim.system = cfg;
      sim.rates = spec.sim.rates;
      sim.horizon = spec.sim.horizon;
      sim.seed = spec.sim.seed;
      sim.dominant = spec.sim.dominant;
      sim.mode = spec.sim.mode;
      sim.drift_eps = spec.sim.drift_eps;
      sim.q_cap_fraction = spec.sim.q_cap_fraction;
      return SimulatePayload{sim.rates, sim.dominant, sim.mode, sim.horizon, simulate(sim)};
    }
    case Task::kVerify:
      return verify_payload(cfg, spec.sim);
  }
  throw std::logic_error("unhandled task");
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kProbs:
      return "probs";
    case Task::kRegion:
      return "region";
    case Task::kBoundary:
      return "boundary";
    case Task::kClosure:
      return "closure";
    case Task::kAggregate:
      return "aggregate";
    case Task::kSimulate:
      return "simulate";
    case Task::kVerify:
      return "verify";
  }
  return "?";
}

Task parse_task(std::string_view text) {
  for (Task t : kAllTasks) {
    if (to_string(t) == text) return t;
  }
  throw InvalidArgument("tasks", "unknown task '" + std::string(text) + "'");
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw InvalidArgument("format", "expected csv|json, got '" + std::string(text) + "'");
}

std::string to_string(const Variant& variant) {
  return std::string(to_string(variant.scheme)) + "-" +
         std::string(to_string(variant.policy));
}

Variant parse_variant(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw InvalidArgument("variants", "expected <scheme>-<policy>, got '" +
                                          std::string(text) + "'");
  }
  try {
    return {parse_scheme(text.substr(0, dash)), parse_policy(text.substr(dash + 1))};
  } catch (const InvalidArgument&) {
    throw InvalidArgument("variants", "unknown variant '" + std::string(text) + "'");
  }
}

std::vector<double> Sweep::values() const {
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    out[k] = k + 1 == steps ? to : from + (to - from) * k / (steps - 1);
  }
  return out;
}

std::vector<Variant> ExperimentSpec::effective_variants() const {
  if (!variants.empty()) return variants;
  return {Variant{base.scheme, base.power_policy}};
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = normalize_key(line.substr(0, eq));
    if (key.empty()) throw SpecError("line " + std::to_string(line_no), "empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw SpecError(key, "duplicate key");
    }
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("config", "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_key_values(text.str());
}

void apply_key_values(ExperimentSpec& spec, const KeyValues& values) {
  std::optional<Sweep> sweep = spec.sweep;
  const auto sweep_field = [&]() -> Sweep& {
    if (!sweep) sweep = Sweep{"p1", 0.0, spec.base.p_total, 2};
    return *sweep;
  };
  bool p1_given = false;
  bool p2_given = false;
  for (const auto& [raw_key, value] : values) {
    const std::string key = normalize_key(raw_key);
    SystemConfig& b = spec.base;
    if (key == "gamma1") {
      b.gamma1 = number_for(key, value);
    } else if (key == "gamma2") {
      b.gamma2 = number_for(key, value);
    } else if (key == "d1") {
      b.d1 = number_for(key, value);
    } else if (key == "d2") {
      b.d2 = number_for(key, value);
    } else if (key == "alpha") {
      b.alpha = number_for(key, value);
    } else if (key == "p1") {
      b.p1 = number_for(key, value);
      p1_given = true;
    } else if (key == "p2") {
      b.p2 = number_for(key, value);
      p2_given = true;
    } else if (key == "p-total") {
      b.p_total = number_for(key, value);
    } else if (key == "scheme") {
      b.scheme = as_spec_error(key, [&] { return parse_scheme(value); });
    } else if (key == "policy") {
      b.power_policy = as_spec_error(key, [&] { return parse_policy(value); });
    } else if (key == "strong-user") {
      const auto u = count_for(key, value);
      if (u != 1 && u != 2) throw SpecError(key, "expected 1 or 2");
      b.strong_user = u == 1 ? User::k1 : User::k2;
    } else if (key == "variants") {
      spec.variants.clear();
      for (const auto& item : split_list(value)) {
        if (item == "all") {
          for (Scheme s : {Scheme::kTin, Scheme::kSd}) {
            for (PowerPolicy p : {PowerPolicy::kFixed, PowerPolicy::kQueueAdaptive}) {
              spec.variants.push_back({s, p});
            }
          }
        } else {
          spec.variants.push_back(as_spec_error(key, [&] { return parse_variant(item); }));
        }
      }
    } else if (key == "tasks") {
      spec.tasks.clear();
      for (const auto& item : split_list(value)) {
        spec.tasks.push_back(as_spec_error(key, [&] { return parse_task(item); }));
      }
    } else if (key == "sweep") {
      if (value == "none") {
        sweep.reset();
      } else {
        sweep_field().parameter = value;
      }
    } else if (key == "sweep-from" || key == "from") {
      sweep_field().from = number_for(key, value);
    } else if (key == "sweep-to" || key == "to") {
      sweep_field().to = number_for(key, value);
    } else if (key == "steps") {
      sweep_field().steps = small_count_for(key, value);
    } else if (key == "horizon") {
      spec.sim.horizon = count_for(key, value);
    } else if (key == "seed") {
      spec.sim.seed = count_for(key, value);
    } else if (key == "mode") {
      spec.sim.mode = as_spec_error(key, [&] { return parse_mode(value); });
    } else if (key == "dominant") {
      spec.sim.dominant = as_spec_error(key, [&] { return parse_dominant(value); });
    } else if (key == "lambda1") {
      spec.sim.rates.lambda1 = number_for(key, value);
    } else if (key == "lambda2") {
      spec.sim.rates.lambda2 = number_for(key, value);
    } else if (key == "drift-eps") {
      spec.sim.drift_eps = number_for(key, value);
    } else if (key == "q-cap-fraction") {
      spec.sim.q_cap_fraction = number_for(key, value);
    } else if (key == "points") {
      spec.boundary_points = small_count_for(key, value);
    } else if (key == "splits") {
      spec.closure_splits = small_count_for(key, value);
    } else if (key == "tolerance") {
      spec.verify_tolerance = number_for(key, value);
    } else if (key == "format") {
      spec.format = as_spec_error(key, [&] { return parse_format(value); });
    } else if (key == "out") {
      if (value.empty()) throw SpecError(key, "must not be empty");
      spec.out_dir = value;
    } else {
      throw SpecError(key, "unknown key");
    }
  }
  // p2 follows the budget unless given explicitly.
  if (p2_given && !p1_given) {
    spec.base.p1 = spec.base.p_total - spec.base.p2;
  } else if (!p2_given) {
    spec.base.p2 = spec.base.p_total - spec.base.p1;
  }
  spec.sweep = sweep;
  validate(spec);
}

ExperimentSpec spec_from_key_values(const KeyValues& values) {
  ExperimentSpec spec;
  spec.tasks = {Task::kProbs};
  apply_key_values(spec, values);
  return spec;
}

void validate(const ExperimentSpec& spec) {
  try {
    validate(spec.base);
  } catch (const InvalidArgument& e) {
    throw SpecError(normalize_key(e.field()), e.what());
  }
  if (spec.tasks.empty()) throw SpecError("tasks", "at least one task is required");
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.tasks[i] == spec.tasks[j]) throw SpecError("tasks", "duplicate task");
    }
  }
  for (std::size_t i = 0; i < spec.variants.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.variants[i] == spec.variants[j]) {
        throw SpecError("variants", "duplicate variant");
      }
    }
  }
  if (spec.sweep) {
    const Sweep& s = *spec.sweep;
    if (s.parameter != "p1" && s.parameter != "gamma1" && s.parameter != "gamma2") {
      throw SpecError("sweep", "expected p1|gamma1|gamma2, got '" + s.parameter + "'");
    }
    if (!std::isfinite(s.from)) throw SpecError("sweep-from", "must be finite");
    if (!std::isfinite(s.to)) throw SpecError("sweep-to", "must be finite");
    if (s.steps < 2) throw SpecError("steps", "must be at least 2");
    for (double v : s.values()) {
      for (const Variant& variant : spec.effective_variants()) {
        try {
          validate(point_config(spec, v, variant));
        } catch (const InvalidArgument& e) {
          throw SpecError(v == s.from ? "sweep-from" : "sweep-to", e.what());
        }
      }
    }
  }
  for (const Variant& variant : spec.effective_variants()) {
    SystemConfig cfg = spec.base;
    cfg.scheme = variant.scheme;
    cfg.power_policy = variant.policy;
    try {
      validate(cfg);
    } catch (const InvalidArgument& e) {
      throw SpecError(spec.variants.empty() ? normalize_key(e.field()) : "variants", e.what());
    }
  }
  if (spec.boundary_points < 2) throw SpecError("points", "must be at least 2");
  if (spec.closure_splits < 2) throw SpecError("splits", "must be at least 2");
  if (!(spec.verify_tolerance > 0.0) || !std::isfinite(spec.verify_tolerance)) {
    throw SpecError("tolerance", "must be finite and positive");
  }
  const SimSettings& sim = spec.sim;
  const auto needs_sim = [&](Task t) { return t == Task::kSimulate || t == Task::kVerify; };
  if (std::any_of(spec.tasks.begin(), spec.tasks.end(), needs_sim) &&
      sim.horizon < kMinVerdictHorizon) {
    throw SpecError("horizon", "need at least " + std::to_string(kMinVerdictHorizon) +
                                   " slots for a stability verdict");
  }
  for (const auto& [key, v] : {std::pair{"lambda1", sim.rates.lambda1},
                               std::pair{"lambda2", sim.rates.lambda2}}) {
    if (!(v >= 0.0 && v <= 1.0)) throw SpecError(key, "must lie in [0, 1]");
  }
  if (!(sim.drift_eps >= 0.0)) throw SpecError("drift-eps", "must be nonnegative");
  if (!(sim.q_cap_fraction > 0.0)) throw SpecError("q-cap-fraction", "must be positive");
  if (spec.out_dir.empty()) throw SpecError("out", "must not be empty");
}

std::string spec_hash(const ExperimentSpec& spec) {
  json j{{"base", config_json(spec.base)}, {"sim", sim_json(spec.sim)}};
  if (spec.sweep) {
    j["sweep"] = json{{"parameter", spec.sweep->parameter},
                      {"from", spec.sweep->from},
                      {"to", spec.sweep->to},
                      {"steps", spec.sweep->steps}};
  }
  json variants = json::array();
  for (const auto& v : spec.effective_variants()) variants.push_back(to_string(v));
  j["variants"] = variants;
  json tasks = json::array();
  for (Task t : spec.tasks) tasks.push_back(to_string(t));
  j["tasks"] = tasks;
  j["points"] = spec.boundary_points;
  j["splits"] = spec.closure_splits;
  return fnv1a_hex(j.dump());
}

double VerifyPayload::max_delta() const {
  double m = 0.0;
  for (const auto& r : rays) m = std::max(m, r.delta);
  return m;
}

std::vector<std::pair<double, double>> verify_directions() {
  std::vector<std::pair<double, double>> dirs;
  for (int k = 0; k < 8; ++k) {
    const double theta = k * std::numbers::pi / 14.0;
    // Exact axes rather than cos(pi/2) ~ 6e-17.
    dirs.push_back(k == 0   ? std::pair{1.0, 0.0}
                   : k == 7 ? std::pair{0.0, 1.0}
                            : std::pair{std::cos(theta), std::sin(theta)});
  }
  return dirs;
}

SystemConfig point_config(const ExperimentSpec& spec, double value, const Variant& variant) {
  SystemConfig cfg = spec.base;
  cfg.scheme = variant.scheme;
  cfg.power_policy = variant.policy;
  if (spec.sweep) {
    const std::string& p = spec.sweep->parameter;
    if (p == "p1") {
      cfg = cfg.with_split(value);
    } else if (p == "gamma1") {
      cfg.gamma1 = value;
    } else if (p == "gamma2") {
      cfg.gamma2 = value;
    }
  }
  return cfg;
}

SweepResult evaluate(const ExperimentSpec& spec) {
  validate(spec);
  const std::vector<double> values = spec.sweep ? spec.sweep->values() : std::vector{0.0};
  const std::vector<Variant> variants = spec.effective_variants();
  const std::string parameter = spec.sweep ? spec.sweep->parameter : "none";

  SweepResult result;
  result.spec_hash = spec_hash(spec);
  for (Task task : spec.tasks) {
    for (double v : values) {
      for (const Variant& variant : variants) {
        ResultRow row;
        row.task = task;
        row.parameter = parameter;
        row.value = v;
        row.variant = variant;
        const SystemConfig cfg = point_config(spec, v, variant);
        row.config_hash = fnv1a_hex(
            json{{"config", config_json(cfg)},
                 {"task", to_string(task)},
                 {"settings", task_settings(spec, task)}}
                .dump());
        row.seed = spec.sim.seed;
        result.rows.push_back(std::move(row));
      }
    }
  }
  parallel_for(result.rows.size(), [&](std::size_t i) {
    ResultRow& row = result.rows[i];
    row.payload = compute(spec, row.task, point_config(spec, row.value, row.variant));
  });
  return result;
}

SweepResult run(const ExperimentSpec& spec, std::vector<std::filesystem::path>* written) {
  SweepResult result = evaluate(spec);
  std::filesystem::create_directories(spec.out_dir);
  for (Task task : spec.tasks) {
    const auto path = write_result(result, task, spec.format, spec.out_dir);
    if (written) written->push_back(path);
  }
  return result;
}

ExperimentSpec fig_recipe(std::string_view name) {
  ExperimentSpec spec;
  spec.variants = {{Scheme::kTin, PowerPolicy::kFixed},
                   {Scheme::kTin, PowerPolicy::kQueueAdaptive},
                   {Scheme::kSd, PowerPolicy::kFixed},
                   {Scheme::kSd, PowerPolicy::kQueueAdaptive}};
  const bool hard = name == "fig4" || name == "fig6" || name == "fig8";
  spec.base.gamma1 = hard ? 1.2 : 0.5;
  spec.base.gamma2 = hard ? 0.7 : 0.4;
  if (name == "fig3" || name == "fig4") {
    spec.tasks = {Task::kBoundary};
  } else if (name == "fig5" || name == "fig6") {
    spec.tasks = {Task::kClosure};
  } else if (name == "fig7" || name == "fig8") {
    spec.tasks = {Task::kAggregate};
    spec.sweep = Sweep{"p1", 0.0, 200.0, 101};
    spec.variants = {{Scheme::kSd, PowerPolicy::kQueueAdaptive},
                     {Scheme::kTin, PowerPolicy::kQueueAdaptive}};
  } else {
    throw InvalidArgument("recipe", "expected fig3..fig8, got '" + std::string(name) + "'");
  }
  spec.out_dir = "out/" + std::string(name);
  return spec;
}

}  // namespace bcstab
