#include "aoisched/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

namespace aoisched {

namespace {

using nlohmann::json;

void append_double(fmt::memory_buffer& buf, double x) {
  if (!std::isfinite(x)) throw FormatError(fmt::format("cannot serialize non-finite value {}", x));
  fmt::format_to(std::back_inserter(buf), "{:.17g}", x);
}

void append_optional(fmt::memory_buffer& buf, const std::optional<double>& x) {
  if (x)
    append_double(buf, *x);
  else
    fmt::format_to(std::back_inserter(buf), "null");
}

struct RawEntry {
  int delta, d, l;
  double value;
  int action;
};

template <typename T>
T require(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key))
    throw FormatError(fmt::format("{}: missing field '{}'", where, key));
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: field '{}' has the wrong type ({})", where, key, e.what()));
  }
}

std::optional<double> optional_number(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) throw FormatError(fmt::format("{}: missing field '{}'", where, key));
  const json& x = obj.at(key);
  if (x.is_null()) return std::nullopt;
  if (!x.is_number()) throw FormatError(fmt::format("{}: field '{}' must be a number or null", where, key));
  return x.get<double>();
}

}  // namespace

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

PolicyDocument make_policy_document(const SolveResult& result, const SolveParams& sp) {
  PolicyDocument doc;
  doc.solve.mode = sp.alpha ? "discounted" : "average";
  doc.solve.alpha = sp.alpha;
  doc.solve.tol = sp.tol;
  doc.solve.iterations = result.report.iterations;
  doc.solve.average_cost = result.report.average_cost;
  doc.solve.converged = result.report.converged;
  doc.values = result.values;
  doc.policy = result.policy;
  return doc;
}

std::string write_policy_document(const PolicyDocument& doc) {
  const ModelParams& m = doc.model();
  if (!(doc.policy.params() == m)) throw FormatError("value table and policy disagree on the model");
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "{{\n  \"schema_version\": \"{}\",\n", doc.schema_version);
  fmt::format_to(out, "  \"model\": {{\"k\": {}, \"p\": ", m.k);
  append_double(buf, m.p);
  fmt::format_to(out, ", \"delta_max\": {}}},\n", m.delta_max);
  fmt::format_to(out, "  \"solve\": {{\"mode\": \"{}\", \"alpha\": ", doc.solve.mode);
  append_optional(buf, doc.solve.alpha);
  fmt::format_to(out, ", \"tol\": ");
  append_double(buf, doc.solve.tol);
  fmt::format_to(out, ", \"iterations\": {}, \"average_cost\": ", doc.solve.iterations);
  append_optional(buf, doc.solve.average_cost);
  fmt::format_to(out, ", \"converged\": {}}},\n  \"entries\": [", doc.solve.converged);

  bool first = true;
  doc.values.space().for_each([&](const State& s, std::size_t i) {
    fmt::format_to(out, "{}\n    {{\"delta\": {}, \"d\": {}, \"l\": {}, \"value\": ", first ? "" : ",",
                   s.delta, s.d, s.l);
    append_double(buf, doc.values[i]);
    fmt::format_to(out, ", \"action\": {}}}", to_int(doc.policy[i]));
    first = false;
  });
  fmt::format_to(out, "\n  ]\n}}\n");
  return fmt::to_string(buf);
}

PolicyDocument read_policy_document(std::string_view text) {
  std::vector<RawEntry> raw;
  std::string entry_error;

  // Entries are pulled out of the parse as they complete so that large
  // documents never materialize as a DOM.
  json::parser_callback_t on_event = [&](int depth, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::object_end && depth == 2) {
      if (entry_error.empty()) {
        try {
          raw.push_back(RawEntry{require<int>(parsed, "delta", "entry"), require<int>(parsed, "d", "entry"),
                                 require<int>(parsed, "l", "entry"), require<double>(parsed, "value", "entry"),
                                 require<int>(parsed, "action", "entry")});
        } catch (const FormatError& e) {
          entry_error = e.what();
        }
      }
      return false;
    }
    return true;
  };

  json root;
  try {
    root = json::parse(text.begin(), text.end(), on_event);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("policy document is not valid JSON: {}", e.what()));
  }
  if (!entry_error.empty()) throw FormatError(entry_error);
  if (!root.is_object()) throw FormatError("policy document must be a JSON object");

  PolicyDocument doc;
  doc.schema_version = require<std::string>(root, "schema_version", "document");
  if (doc.schema_version != kPolicySchemaVersion)
    throw FormatError(fmt::format("unsupported schema_version '{}' (expected '{}')", doc.schema_version,
                                  kPolicySchemaVersion));

  const json& model = root.contains("model") ? root.at("model") : json();
  ModelParams m{require<int>(model, "k", "model"), require<double>(model, "p", "model"),
                require<int>(model, "delta_max", "model")};
  try {
    m.validate();
  } catch (const ValidityError& e) {
    throw FormatError(fmt::format("model: {}", e.what()));
  }

  const json& solve = root.contains("solve") ? root.at("solve") : json();
  doc.solve.mode = require<std::string>(solve, "mode", "solve");
  if (doc.solve.mode != "average" && doc.solve.mode != "discounted")
    throw FormatError(fmt::format("solve: unknown mode '{}'", doc.solve.mode));
  doc.solve.alpha = optional_number(solve, "alpha", "solve");
  doc.solve.tol = require<double>(solve, "tol", "solve");
  doc.solve.iterations = require<int>(solve, "iterations", "solve");
  doc.solve.average_cost = optional_number(solve, "average_cost", "solve");
  doc.solve.converged = require<bool>(solve, "converged", "solve");

  if (!root.contains("entries") || !root.at("entries").is_array())
    throw FormatError("document: missing 'entries' array");

  auto space = std::make_shared<const StateSpace>(m);
  doc.values = ValueTable(space, 0.0);
  doc.policy = Policy(space);
  std::vector<std::uint8_t> seen(space->size(), 0);
  for (const RawEntry& e : raw) {
    const State s{e.delta, e.d, e.l};
    if (!is_valid(s, m)) throw FormatError(fmt::format("entry for invalid state {}", to_string(s)));
    const std::size_t i = space->index(s);
    if (seen[i]) throw FormatError(fmt::format("duplicate entry for state {}", to_string(s)));
    if (!std::isfinite(e.value)) throw FormatError(fmt::format("non-finite value at {}", to_string(s)));
    if (e.action != 0 && e.action != 1)
      throw FormatError(fmt::format("action at {} must be 0 or 1, got {}", to_string(s), e.action));
    seen[i] = 1;
    doc.values[i] = e.value;
    doc.policy[i] = static_cast<Action>(e.action);
  }
  if (raw.size() != space->size())
    throw FormatError(fmt::format("entries cover {} of {} states", raw.size(), space->size()));
  return doc;
}

PolicyDocument load_policy_document(const std::filesystem::path& path) {
  return read_policy_document(read_file(path));
}

void save_policy_document(const PolicyDocument& doc, const std::filesystem::path& path) {
  write_file_atomic(path, write_policy_document(doc));
}

std::string write_experiment_csv(const std::vector<ExperimentRow>& rows) {
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "k,p,delta_max,policy,avg_exact,avg_sim,stderr,gap\n");
  for (const ExperimentRow& r : rows) {
    fmt::format_to(out, "{},{},{},{},{},{},{},{}\n", r.k, format_double(r.p), r.delta_max, r.policy_name,
                   format_double(r.avg_aoi_exact), format_double(r.avg_aoi_sim),
                   format_double(r.sim_stderr), format_double(r.gap));
  }
  return fmt::to_string(buf);
}

std::string write_thresholds_csv(const ThresholdTable& t, std::optional<int> delta0) {
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "delta0,d,tau\n");
  t.for_each([&](int d0, int d, int tau) {
    if (!delta0 || *delta0 == d0) fmt::format_to(out, "{},{},{}\n", d0, d, tau);
  });
  return fmt::to_string(buf);
}

ThresholdTable read_thresholds_csv(std::string_view text, int k, int delta_max) {
  ThresholdTable table(k, delta_max);
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "delta0,d,tau")
    throw FormatError("threshold CSV must start with the header 'delta0,d,tau'");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int delta0 = 0, d = 0, tau = 0;
    char c1 = 0, c2 = 0;
    std::istringstream fields(line);
    if (!(fields >> delta0 >> c1 >> d >> c2 >> tau) || c1 != ',' || c2 != ',')
      throw FormatError(fmt::format("threshold CSV line {}: cannot parse '{}'", line_no, line));
    try {
      table.set(delta0, d, tau);
    } catch (const Error& e) {
      throw FormatError(fmt::format("threshold CSV line {}: {}", line_no, e.what()));
    }
  }
  return table;
}

std::string write_trace_csv(const std::vector<TrajectoryPoint>& points) {
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "t,delta,d,l,action,outcome\n");
  for (const TrajectoryPoint& pt : points)
    fmt::format_to(out, "{},{},{},{},{},{}\n", pt.t, pt.state.delta, pt.state.d, pt.state.l,
                   to_int(pt.action), to_string(pt.outcome));
  return fmt::to_string(buf);
}

std::filesystem::path resolve_output_path(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  if (const char* dir = std::getenv("AOISCHED_OUTPUT_DIR"); dir && *dir)
    return std::filesystem::path(dir) / path;
  return path;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path target = std::filesystem::absolute(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += fmt::format(".tmp.{}", static_cast<unsigned long>(std::hash<std::string>{}(target.string()) & 0xffffff));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(fmt::format("cannot open {} for writing", tmp.string()));
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error(fmt::format("failed writing {}", tmp.string()));
  }
  std::filesystem::rename(tmp, target);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace aoisched
