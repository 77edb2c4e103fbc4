#include "bcstab/report_io.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace bcstab {

namespace {

using nlohmann::json;
using Line = std::vector<std::string>;

const std::vector<std::string> kProvenance = {"spec_hash", "task",        "row", "parameter",
                                              "value",     "variant",     "config_hash",
                                              "seed"};

const std::vector<std::string> kProfileCols = {"p_1_1", "p_2_2", "p_1_12", "p_2_12"};
const std::vector<std::string> kQueueCols = {
    "final_length",  "mean_length",     "drift",           "solo_attempts", "solo_successes",
    "joint_attempts", "joint_successes", "empty_fraction", "verdict"};

std::vector<std::string> payload_columns(Task task) {
  const auto cat = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  switch (task) {
    case Task::kProbs:
      return kProfileCols;
    case Task::kRegion:
      return cat(kProfileCols, {"convex", "label", "a1", "a2", "b", "axis", "bound"});
    case Task::kBoundary:
      return {"index", "lambda1", "lambda2"};
    case Task::kClosure:
      return cat(cat({"kind", "index", "p1"}, kProfileCols), {"lambda1", "lambda2"});
    case Task::kAggregate:
      return {"stable", "corner", "saturated"};
    case Task::kSimulate:
      return cat({"lambda1", "lambda2", "dominant", "mode", "horizon", "queue"}, kQueueCols);
    case Task::kVerify:
      return {"index",           "u1",       "u2",         "analytic_lambda1",
              "analytic_lambda2", "empirical_lambda1", "empirical_lambda2", "t_stable",
              "t_unstable",      "status",   "delta"};
  }
  return {};
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("bad integer '" + std::string(text) + "'");
  }
  return v;
}

Line profile_cells(const SuccessProfile& p) {
  return {format_double(p.p_1_1), format_double(p.p_2_2), format_double(p.p_1_12),
          format_double(p.p_2_12)};
}

std::string_view label_name(SubRegionLabel label) {
  return label == SubRegionLabel::kR1 ? "R1" : "R2";
}

SubRegionLabel parse_label(std::string_view text) {
  if (text == "R1") return SubRegionLabel::kR1;
  if (text == "R2") return SubRegionLabel::kR2;
  throw FormatError("bad sub-region label '" + std::string(text) + "'");
}

Line queue_cells(const QueueStats& q) {
  return {u64(q.final_length),
          format_double(q.mean_length),
          format_double(q.drift),
          u64(q.service.solo_attempts),
          u64(q.service.solo_successes),
          u64(q.service.joint_attempts),
          u64(q.service.joint_successes),
          format_double(q.empty_fraction),
          std::string(to_string(q.verdict))};
}

std::vector<Line> payload_lines(const Payload& payload) {
  std::vector<Line> lines;
  const auto join = [](Line a, const Line& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  if (const auto* p = std::get_if<SuccessProfile>(&payload)) {
    lines.push_back(profile_cells(*p));
  } else if (const auto* r = std::get_if<RegionPayload>(&payload)) {
    for (const SubRegion* s : {&r->region.sub1, &r->region.sub2}) {
      const std::string convex = r->convex ? (*r->convex ? "true" : "false") : "";
      lines.push_back(join(profile_cells(r->region.profile),
                           {convex, std::string(label_name(s->label)),
                            format_double(s->slope.a1), format_double(s->slope.a2),
                            format_double(s->slope.b), std::to_string(s->box.axis),
                            format_double(s->box.bound)}));
    }
  } else if (const auto* b = std::get_if<BoundaryPayload>(&payload)) {
    for (std::size_t i = 0; i < b->points.size(); ++i) {
      lines.push_back({u64(i), format_double(b->points[i].lambda1),
                       format_double(b->points[i].lambda2)});
    }
    if (lines.empty()) lines.push_back({"", "", ""});
  } else if (const auto* c = std::get_if<ClosurePayload>(&payload)) {
    for (std::size_t i = 0; i < c->splits.size(); ++i) {
      lines.push_back(join({"split", u64(i), format_double(c->splits[i].p1)},
                           join(profile_cells(c->splits[i].profile), {"", ""})));
    }
    for (std::size_t i = 0; i < c->envelope.size(); ++i) {
      lines.push_back({"envelope", u64(i), "", "", "", "", "",
                       format_double(c->envelope[i].lambda1),
                       format_double(c->envelope[i].lambda2)});
    }
  } else if (const auto* a = std::get_if<AggregatePayload>(&payload)) {
    lines.push_back({format_double(a->stable.value), std::string(to_string(a->stable.corner)),
                     format_double(a->saturated)});
  } else if (const auto* s = std::get_if<SimulatePayload>(&payload)) {
    for (int q = 0; q < 2; ++q) {
      lines.push_back(join({format_double(s->rates.lambda1), format_double(s->rates.lambda2),
                            std::string(to_string(s->dominant)),
                            std::string(to_string(s->mode)), u64(s->horizon),
                            std::to_string(q + 1)},
                           queue_cells(s->outcome.queue[q])));
    }
  } else if (const auto* v = std::get_if<VerifyPayload>(&payload)) {
    for (std::size_t i = 0; i < v->rays.size(); ++i) {
      const VerifyRay& r = v->rays[i];
      lines.push_back({u64(i), format_double(r.u1), format_double(r.u2),
                       format_double(r.analytic.lambda1), format_double(r.analytic.lambda2),
                       format_double(r.empirical.point.lambda1),
                       format_double(r.empirical.point.lambda2),
                       format_double(r.empirical.t_stable),
                       format_double(r.empirical.t_unstable),
                       std::string(to_string(r.empirical.status)), format_double(r.delta)});
    }
  }
  return lines;
}

using Record = std::map<std::string, std::string>;

const std::string& cell(const Record& rec, const std::string& key) {
  const auto it = rec.find(key);
  if (it == rec.end()) throw FormatError("missing column '" + key + "'");
  return it->second;
}

double num(const Record& rec, const std::string& key) { return parse_double(cell(rec, key)); }

SuccessProfile profile_from(const Record& rec) {
  return {num(rec, "p_1_1"), num(rec, "p_2_2"), num(rec, "p_1_12"), num(rec, "p_2_12")};
}

QueueStats queue_from(const Record& rec) {
  QueueStats q;
  q.final_length = parse_u64(cell(rec, "final_length"));
  q.mean_length = num(rec, "mean_length");
  q.drift = num(rec, "drift");
  q.service.solo_attempts = parse_u64(cell(rec, "solo_attempts"));
  q.service.solo_successes = parse_u64(cell(rec, "solo_successes"));
  q.service.joint_attempts = parse_u64(cell(rec, "joint_attempts"));
  q.service.joint_successes = parse_u64(cell(rec, "joint_successes"));
  q.empty_fraction = num(rec, "empty_fraction");
  q.verdict = parse_verdict(cell(rec, "verdict"));
  return q;
}

Payload payload_from(Task task, const std::vector<Record>& recs) {
  switch (task) {
    case Task::kProbs:
      return profile_from(recs.at(0));
    case Task::kRegion: {
      if (recs.size() != 2) throw FormatError("region rows need two lines");
      RegionPayload p;
      p.region.profile = profile_from(recs[0]);
      const std::string& convex = cell(recs[0], "convex");
      if (!convex.empty()) p.convex = convex == "true";
      for (int i = 0; i < 2; ++i) {
        SubRegion& s = i == 0 ? p.region.sub1 : p.region.sub2;
        s.label = parse_label(cell(recs[i], "label"));
        s.slope = {num(recs[i], "a1"), num(recs[i], "a2"), num(recs[i], "b")};
        s.box = {static_cast<int>(parse_u64(cell(recs[i], "axis"))), num(recs[i], "bound")};
      }
      return p;
    }
    case Task::kBoundary: {
      BoundaryPayload p;
      for (const auto& r : recs) {
        if (cell(r, "index").empty()) continue;
        p.points.push_back({num(r, "lambda1"), num(r, "lambda2")});
      }
      return p;
    }
    case Task::kClosure: {
      ClosurePayload p;
      for (const auto& r : recs) {
        if (cell(r, "kind") == "split") {
          p.splits.push_back({num(r, "p1"), profile_from(r)});
        } else if (cell(r, "kind") == "envelope") {
          p.envelope.push_back({num(r, "lambda1"), num(r, "lambda2")});
        } else {
          throw FormatError("bad closure kind '" + cell(r, "kind") + "'");
        }
      }
      return p;
    }
    case Task::kAggregate: {
      const Record& r = recs.at(0);
      return AggregatePayload{{num(r, "stable"), parse_corner(cell(r, "corner"))},
                              num(r, "saturated")};
    }
    case Task::kSimulate: {
      if (recs.size() != 2) throw FormatError("simulate rows need two lines");
      const Record& r = recs[0];
      SimulatePayload p;
      p.rates = {num(r, "lambda1"), num(r, "lambda2")};
      p.dominant = parse_dominant(cell(r, "dominant"));
      p.mode = parse_mode(cell(r, "mode"));
      p.horizon = parse_u64(cell(r, "horizon"));
      for (int q = 0; q < 2; ++q) p.outcome.queue[q] = queue_from(recs[q]);
      return p;
    }
    case Task::kVerify: {
      VerifyPayload p;
      for (const auto& r : recs) {
        VerifyRay ray;
        ray.u1 = num(r, "u1");
        ray.u2 = num(r, "u2");
        ray.analytic = {num(r, "analytic_lambda1"), num(r, "analytic_lambda2")};
        ray.empirical.point = {num(r, "empirical_lambda1"), num(r, "empirical_lambda2")};
        ray.empirical.t_stable = num(r, "t_stable");
        ray.empirical.t_unstable = num(r, "t_unstable");
        ray.empirical.status = parse_scan_status(cell(r, "status"));
        ray.delta = num(r, "delta");
        p.rays.push_back(ray);
      }
      return p;
    }
  }
  throw FormatError("unhandled task");
}

// JSON view of one payload. Cells are kept as strings for doubles so that
// both formats share one exact number representation.
json payload_json(Task task, const Payload& payload) {
  const auto cols = payload_columns(task);
  json lines = json::array();
  for (const Line& line : payload_lines(payload)) {
    json obj = json::object();
    for (std::size_t i = 0; i < cols.size(); ++i) obj[cols[i]] = line[i];
    lines.push_back(std::move(obj));
  }
  return lines;
}

std::string format_csv(const SweepResult& result, Task task) {
  std::ostringstream out;
  auto header = kProvenance;
  const auto cols = payload_columns(task);
  header.insert(header.end(), cols.begin(), cols.end());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::size_t row_index = 0;
  for (const ResultRow& row : result.rows) {
    if (row.task != task) continue;
    const Line prov = {result.spec_hash,
                       std::string(to_string(task)),
                       u64(row_index++),
                       row.parameter,
                       format_double(row.value),
                       to_string(row.variant),
                       row.config_hash,
                       u64(row.seed)};
    for (const Line& line : payload_lines(row.payload)) {
      Line all = prov;
      all.insert(all.end(), line.begin(), line.end());
      for (std::size_t i = 0; i < all.size(); ++i) out << (i ? "," : "") << all[i];
      out << '\n';
    }
  }
  return out.str();
}

std::string format_json(const SweepResult& result, Task task) {
  json rows = json::array();
  for (const ResultRow& row : result.rows) {
    if (row.task != task) continue;
    rows.push_back(json{{"parameter", row.parameter},
                        {"value", format_double(row.value)},
                        {"variant", to_string(row.variant)},
                        {"config_hash", row.config_hash},
                        {"seed", row.seed},
                        {"payload", payload_json(task, row.payload)}});
  }
  json doc{{"spec_hash", result.spec_hash}, {"task", to_string(task)}, {"rows", rows}};
  return doc.dump(1) + "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

ResultRow row_from(const Record& rec, Task task) {
  ResultRow row;
  row.task = task;
  row.parameter = cell(rec, "parameter");
  row.value = num(rec, "value");
  row.variant = parse_variant(cell(rec, "variant"));
  row.config_hash = cell(rec, "config_hash");
  row.seed = parse_u64(cell(rec, "seed"));
  return row;
}

SweepResult parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty file");
  const auto header = split_csv_line(line);
  SweepResult result;
  std::vector<std::pair<ResultRow, std::vector<Record>>> groups;
  std::string current_row;
  Task task = Task::kProbs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw FormatError("column count mismatch: " + line);
    Record rec;
    for (std::size_t i = 0; i < header.size(); ++i) rec[header[i]] = cells[i];
    result.spec_hash = cell(rec, "spec_hash");
    task = parse_task(cell(rec, "task"));
    if (groups.empty() || cell(rec, "row") != current_row) {
      current_row = cell(rec, "row");
      groups.emplace_back(row_from(rec, task), std::vector<Record>{});
    }
    groups.back().second.push_back(std::move(rec));
  }
  for (auto& [row, recs] : groups) {
    row.payload = payload_from(row.task, recs);
    result.rows.push_back(std::move(row));
  }
  return result;
}

SweepResult parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(e.what());
  }
  try {
    SweepResult result;
    result.spec_hash = doc.at("spec_hash").get<std::string>();
    const Task task = parse_task(doc.at("task").get<std::string>());
    for (const json& j : doc.at("rows")) {
      Record rec{{"parameter", j.at("parameter").get<std::string>()},
                 {"value", j.at("value").get<std::string>()},
                 {"variant", j.at("variant").get<std::string>()},
                 {"config_hash", j.at("config_hash").get<std::string>()},
                 {"seed", std::to_string(j.at("seed").get<std::uint64_t>())}};
      ResultRow row = row_from(rec, task);
      std::vector<Record> recs;
      for (const json& line : j.at("payload")) {
        Record r;
        for (const auto& [k, v] : line.items()) r[k] = v.get<std::string>();
        recs.push_back(std::move(r));
      }
      row.payload = payload_from(task, recs);
      result.rows.push_back(std::move(row));
    }
    return result;
  } catch (const json::exception& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw FormatError("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("bad number '" + std::string(text) + "'");
  }
  return v;
}

std::string result_file_name(const std::string& spec_hash, Task task, OutputFormat format) {
  return std::string(to_string(task)) + "_" + spec_hash + "." + std::string(to_string(format));
}

std::string format_result(const SweepResult& result, Task task, OutputFormat format) {
  return format == OutputFormat::kCsv ? format_csv(result, task) : format_json(result, task);
}

SweepResult parse_result(std::string_view text, OutputFormat format) {
  try {
    return format == OutputFormat::kCsv ? parse_csv(text) : parse_json(text);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  } catch (const std::out_of_range& e) {
    throw FormatError(e.what());
  }
}

std::filesystem::path write_result(const SweepResult& result, Task task, OutputFormat format,
                                   const std::filesystem::path& dir) {
  const std::filesystem::path target = dir / result_file_name(result.spec_hash, task, format);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + tmp.string() + "' for writing");
    out << format_result(result, task, format);
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw FormatError("write to '" + tmp.string() + "' failed");
    }
  }
  std::filesystem::rename(tmp, target);
  return target;
}

SweepResult read_result_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto ext = path.extension().string();
  if (ext == ".csv") return parse_result(text.str(), OutputFormat::kCsv);
  if (ext == ".json") return parse_result(text.str(), OutputFormat::kJson);
  throw FormatError("unknown extension '" + ext + "'");
}

SweepResult rows_of(const SweepResult& result, Task task) {
  SweepResult out;
  out.spec_hash = result.spec_hash;
  for (const auto& row : result.rows) {
    if (row.task == task) out.rows.push_back(row);
  }
  return out;
}

}  // namespace bcstab
