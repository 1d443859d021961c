// cli_io.hpp — configuration parsing, result serialization, the command
// pipelines behind the CLI subcommands, and the bundled invariant-suite
// runner. File schemas are strict (closed): unknown keys and version
// mismatches are errors, and every violation is reported, not just the first.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "synchrotherm/bath.hpp"
#include "synchrotherm/blockade.hpp"
#include "synchrotherm/models.hpp"
#include "synchrotherm/rate_graph.hpp"

namespace synchrotherm::cli {

inline constexpr int kSchemaVersion = 1;

struct GenericModelConfig {
    HermitianOperator h_a;
    HermitianOperator h_b;
    HermitianOperator v_ab;
    std::vector<HermitianOperator> a_ops;
};

using ModelConfig = std::variant<models::NDModelSpec, models::DispersiveSpec, GenericModelConfig>;

struct InitialStateSpec {
    enum class Kind { Ground, Uniform, Level, Custom };
    Kind kind = Kind::Ground;
    int level = 0;       // for Kind::Level
    RealVector custom;   // for Kind::Custom
};

struct RunConfig {
    enum class Command { Analyze, Evolve, FcTable, Blockade, Validate };
    Command command = Command::Validate;

    std::optional<ModelConfig> model;
    std::optional<bath::BathSpec> bath_spec;
    InitialStateSpec initial;

    std::string output_path;     // empty: stdout
    std::string edges_csv_path;  // analyze: optional CSV of edges
    std::string summary_path;    // blockade: optional JSON slope summary

    std::vector<double> times;  // evolve: explicit sample times...
    double t_max = 0.0;         // ...or a linspace via t_max/samples
    int samples = 0;

    double alpha = 0.0;  // fc-table
    int n_max = 0;

    blockade::BlockadeConfig blockade_config;
};

// --- strict JSON parsing -----------------------------------------------------

// Each parser appends human-readable violations ("bath.coupling: must be > 0")
// and returns nothing if any were found.
std::optional<bath::BathSpec> parse_bath_json(const nlohmann::json& j,
                                              std::vector<std::string>& violations);
std::optional<ModelConfig> parse_model_json(const nlohmann::json& j,
                                            std::vector<std::string>& violations);
std::optional<RealVector> parse_initial_json(const nlohmann::json& j,
                                             std::vector<std::string>& violations);

// "ground", "uniform", "level:K", or a path to an initial-state JSON file.
InitialStateSpec parse_initial_spec(const std::string& text);

// Builds a RunConfig from command-line style inputs, reading the referenced
// files; throws ValidationError listing every schema violation found.
RunConfig parse_config(const std::vector<std::string>& args);

// --- pipelines ----------------------------------------------------------------

// A model compiled to its level structure and rate graph.
struct BuiltModel {
    rates::RateMatrix rm;
    std::vector<LevelLabel> labels;  // empty for generic models
};

BuiltModel build_model(const ModelConfig& model, const bath::BathSpec& bath_spec);

RealVector realize_initial(const InitialStateSpec& spec, int n_levels);

// Runs a parsed config end to end; writes outputs atomically. Returns 0 on
// success. Validation failures and numerical failures surface as exceptions;
// the CLI maps them to exit codes 2 and 3.
int run(const RunConfig& config);

// Invariant suite behind the `validate` subcommand; prints one PASS/FAIL line
// per check and returns true when everything passed.
bool run_validate_suite(std::ostream& out);

// --- serialization helpers ----------------------------------------------------

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

// Writes via a temp file plus rename, so failures leave no partial output.
void write_atomic(const std::string& path, const std::string& contents);

nlohmann::json analyze_report_json(const BuiltModel& built,
                                   const rates::ConnectivityReport& report,
                                   const rates::SteadyStatePrediction& prediction,
                                   const rates::StationarityReport& stationarity);

// Re-parses an emitted analyze report, throwing ValidationError on schema
// violations (the round-trip contract).
void check_analyze_report_schema(const nlohmann::json& j);

}  // namespace synchrotherm::cli
