#pragma once

// File formats: the JSON policy/value document and the CSV experiment,
// threshold and trace tables. Doubles are written with 17 significant digits
// so documents round-trip byte for byte.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoisched/sim.hpp"
#include "aoisched/solver.hpp"

namespace aoisched {

/// Malformed or incompatible input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kPolicySchemaVersion = "aoisched.policy/1";

struct SolveEcho {
  std::string mode = "average";  ///< "average" or "discounted"
  std::optional<double> alpha;
  double tol = 1e-9;
  int iterations = 0;
  std::optional<double> average_cost;
  bool converged = false;
};

struct PolicyDocument {
  std::string schema_version = kPolicySchemaVersion;
  SolveEcho solve;
  ValueTable values;
  Policy policy;

  const ModelParams& model() const { return values.params(); }
};

PolicyDocument make_policy_document(const SolveResult& result, const SolveParams& sp);

std::string format_double(double x);

std::string write_policy_document(const PolicyDocument& doc);
PolicyDocument read_policy_document(std::string_view text);

PolicyDocument load_policy_document(const std::filesystem::path& path);
void save_policy_document(const PolicyDocument& doc, const std::filesystem::path& path);

/// One line of the optimal-vs-persistent comparison.
struct ExperimentRow {
  int k = 0;
  double p = 0.0;
  int delta_max = 0;
  std::string policy_name;
  double avg_aoi_exact = 0.0;
  double avg_aoi_sim = 0.0;
  double sim_stderr = 0.0;
  double gap = 0.0;  ///< persistent minus optimal exact average AoI
  int iterations = 0;
};

std::string write_experiment_csv(const std::vector<ExperimentRow>& rows);

/// delta0,d,tau. With `delta0` set only that diagonal is written.
std::string write_thresholds_csv(const ThresholdTable& t, std::optional<int> delta0 = std::nullopt);
ThresholdTable read_thresholds_csv(std::string_view text, int k, int delta_max);

std::string write_trace_csv(const std::vector<TrajectoryPoint>& points);

/// Relative paths resolve against $AOISCHED_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace aoisched
