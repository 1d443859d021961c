#include "synchrotherm/cli_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "synchrotherm/dynamics.hpp"

namespace synchrotherm::cli {

namespace {

using nlohmann::json;

// ---- strict-schema helpers ----------------------------------------------------

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed,
                std::vector<std::string>& violations) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            violations.push_back(path + ": unknown key '" + key + "'");
        }
    }
}

void check_version(const json& j, const std::string& path,
                   std::vector<std::string>& violations) {
    if (!j.contains("schema_version")) return;
    if (!j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion) {
        std::ostringstream msg;
        msg << path << ".schema_version: expected " << kSchemaVersion << ", got "
            << j["schema_version"].dump();
        violations.push_back(msg.str());
    }
}

std::optional<double> get_number(const json& j, const std::string& path, const char* key,
                                 std::vector<std::string>& violations, bool required = true) {
    if (!j.contains(key)) {
        if (required) violations.push_back(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!j[key].is_number()) {
        violations.push_back(path + "." + key + ": must be a number");
        return std::nullopt;
    }
    return j[key].get<double>();
}

std::optional<int> get_integer(const json& j, const std::string& path, const char* key,
                               std::vector<std::string>& violations, bool required = true) {
    if (!j.contains(key)) {
        if (required) violations.push_back(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!j[key].is_number_integer()) {
        violations.push_back(path + "." + key + ": must be an integer");
        return std::nullopt;
    }
    return j[key].get<int>();
}

std::optional<RealVector> get_real_vector(const json& j, const std::string& path,
                                          const char* key,
                                          std::vector<std::string>& violations) {
    if (!j.contains(key)) {
        violations.push_back(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!j[key].is_array() || j[key].empty()) {
        violations.push_back(path + "." + key + ": must be a nonempty array of numbers");
        return std::nullopt;
    }
    RealVector v(j[key].size());
    for (std::size_t i = 0; i < j[key].size(); ++i) {
        if (!j[key][i].is_number()) {
            std::ostringstream msg;
            msg << path << "." << key << "[" << i << "]: must be a number";
            violations.push_back(msg.str());
            return std::nullopt;
        }
        v(static_cast<Eigen::Index>(i)) = j[key][i].get<double>();
    }
    return v;
}

// Matrices travel as {"dim": d, "entries": [[re, im] x d*d]} row-major.
std::optional<HermitianOperator> parse_matrix_json(const json& j, const std::string& path,
                                                   std::vector<std::string>& violations) {
    if (!j.is_object()) {
        violations.push_back(path + ": must be a matrix object {dim, entries}");
        return std::nullopt;
    }
    check_keys(j, path, {"dim", "entries"}, violations);
    const auto dim = get_integer(j, path, "dim", violations);
    if (!dim || *dim < 1) {
        if (dim) violations.push_back(path + ".dim: must be >= 1");
        return std::nullopt;
    }
    if (!j.contains("entries") || !j["entries"].is_array() ||
        j["entries"].size() != static_cast<std::size_t>(*dim) * *dim) {
        std::ostringstream msg;
        msg << path << ".entries: must hold exactly dim^2 = " << *dim * *dim
            << " [re, im] pairs";
        violations.push_back(msg.str());
        return std::nullopt;
    }
    ComplexMatrix m(*dim, *dim);
    for (int i = 0; i < *dim; ++i) {
        for (int k = 0; k < *dim; ++k) {
            const auto& cell = j["entries"][static_cast<std::size_t>(i) * *dim + k];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number()) {
                std::ostringstream msg;
                msg << path << ".entries[" << i * *dim + k << "]: must be a [re, im] pair";
                violations.push_back(msg.str());
                return std::nullopt;
            }
            m(i, k) = Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    try {
        return HermitianOperator(std::move(m));
    } catch (const ValidationError& err) {
        violations.push_back(path + ": " + err.what());
        return std::nullopt;
    }
}

json load_json_file(const std::string& path, const std::string& what,
                    std::vector<std::string>& violations) {
    std::ifstream in(path);
    if (!in) {
        violations.push_back(what + ": file '" + path + "' does not exist or is unreadable");
        return json();
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        violations.push_back(what + ": '" + path + "' is not valid JSON: " + err.what());
        return json();
    }
}

[[noreturn]] void throw_violations(const std::vector<std::string>& violations) {
    std::ostringstream msg;
    msg << violations.size() << " config violation(s):";
    for (const auto& v : violations) msg << "\n  - " << v;
    throw ValidationError(msg.str());
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what,
                                      std::vector<std::string>& violations) {
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            violations.push_back(what + ": '" + item + "' is not a number");
        }
    }
    return out;
}

}  // namespace

// ---- schema parsers -------------------------------------------------------------

std::optional<bath::BathSpec> parse_bath_json(const json& j,
                                              std::vector<std::string>& violations) {
    const std::size_t before = violations.size();
    if (!j.is_object()) {
        violations.push_back("bath: must be an object");
        return std::nullopt;
    }
    check_keys(j, "bath", {"schema_version", "family", "coupling", "cutoff", "beta"},
               violations);
    check_version(j, "bath", violations);

    bath::BathSpec spec;
    if (!j.contains("family") || !j["family"].is_string()) {
        violations.push_back("bath.family: must be 'ohmic_exp_cutoff' or 'flat'");
    } else if (j["family"] == "ohmic_exp_cutoff") {
        spec.family = bath::Family::OhmicExpCutoff;
    } else if (j["family"] == "flat") {
        spec.family = bath::Family::Flat;
    } else {
        violations.push_back("bath.family: unknown family " + j["family"].dump());
    }

    if (const auto coupling = get_number(j, "bath", "coupling", violations)) {
        if (*coupling > 0.0) {
            spec.coupling = *coupling;
        } else {
            violations.push_back("bath.coupling: must be > 0");
        }
    }

    // The cutoff is ignored by the flat family and may be omitted there.
    const bool cutoff_required = spec.family == bath::Family::OhmicExpCutoff;
    if (const auto cutoff = get_number(j, "bath", "cutoff", violations, cutoff_required)) {
        if (*cutoff > 0.0) {
            spec.cutoff = *cutoff;
        } else {
            violations.push_back("bath.cutoff: must be > 0");
        }
    }

    if (!j.contains("beta")) {
        violations.push_back("bath.beta: missing");
    } else if (j["beta"].is_string()) {
        if (j["beta"] == "inf") {
            spec.beta = std::numeric_limits<double>::infinity();
        } else {
            violations.push_back("bath.beta: must be a positive number or \"inf\"");
        }
    } else if (j["beta"].is_number()) {
        spec.beta = j["beta"].get<double>();
        if (!(spec.beta > 0.0)) violations.push_back("bath.beta: must be > 0");
    } else {
        violations.push_back("bath.beta: must be a positive number or \"inf\"");
    }

    if (violations.size() != before) return std::nullopt;
    return spec;
}

std::optional<ModelConfig> parse_model_json(const json& j,
                                            std::vector<std::string>& violations) {
    const std::size_t before = violations.size();
    if (!j.is_object()) {
        violations.push_back("model: must be an object");
        return std::nullopt;
    }
    if (!j.contains("kind") || !j["kind"].is_string()) {
        violations.push_back("model.kind: must be 'nd', 'dispersive', or 'generic'");
        return std::nullopt;
    }
    check_version(j, "model", violations);
    const std::string kind = j["kind"].get<std::string>();

    if (kind == "nd") {
        check_keys(j, "model",
                   {"schema_version", "kind", "level_energies", "osc_freqs", "couplings",
                    "n_max", "leakage_tol", "energy_cap"},
                   violations);
        models::NDModelSpec spec;
        const auto energies = get_real_vector(j, "model", "level_energies", violations);
        const auto freqs = get_real_vector(j, "model", "osc_freqs", violations);
        const auto flat = get_real_vector(j, "model", "couplings", violations);
        const auto n_max = get_integer(j, "model", "n_max", violations);
        if (energies) spec.level_energies = *energies;
        if (freqs) {
            spec.osc_freqs = *freqs;
            for (Eigen::Index i = 0; i < freqs->size(); ++i) {
                if (!((*freqs)(i) > 0.0)) {
                    std::ostringstream msg;
                    msg << "model.osc_freqs[" << i << "]: must be > 0, got " << (*freqs)(i);
                    violations.push_back(msg.str());
                }
            }
        }
        if (energies && freqs && flat) {
            if (flat->size() != energies->size() * freqs->size()) {
                std::ostringstream msg;
                msg << "model.couplings: expected row-major " << energies->size() << "x"
                    << freqs->size() << " = " << energies->size() * freqs->size()
                    << " entries, got " << flat->size();
                violations.push_back(msg.str());
            } else {
                spec.couplings = RealMatrix(energies->size(), freqs->size());
                for (Eigen::Index p = 0; p < energies->size(); ++p) {
                    for (Eigen::Index i = 0; i < freqs->size(); ++i) {
                        spec.couplings(p, i) = (*flat)(p * freqs->size() + i);
                    }
                }
            }
        }
        if (n_max) {
            if (*n_max >= 1) {
                spec.trunc.n_max = *n_max;
            } else {
                violations.push_back("model.n_max: must be >= 1");
            }
        }
        if (const auto tol = get_number(j, "model", "leakage_tol", violations, false)) {
            if (*tol > 0.0 && *tol < 1.0) {
                spec.trunc.leakage_tol = *tol;
            } else {
                violations.push_back("model.leakage_tol: must lie in (0, 1)");
            }
        }
        if (const auto cap = get_number(j, "model", "energy_cap", violations, false)) {
            spec.energy_cap = *cap;
        }
        if (energies && energies->size() < 2) {
            violations.push_back("model.level_energies: need at least 2 levels");
        }
        if (violations.size() != before) return std::nullopt;
        return ModelConfig{std::move(spec)};
    }

    if (kind == "dispersive") {
        check_keys(j, "model",
                   {"schema_version", "kind", "qubit_gap", "resonator_freq",
                    "dispersive_shift", "n_max", "leakage_tol"},
                   violations);
        models::DispersiveSpec spec;
        if (const auto gap = get_number(j, "model", "qubit_gap", violations)) {
            spec.qubit_gap = *gap;
        }
        if (const auto freq = get_number(j, "model", "resonator_freq", violations)) {
            if (*freq > 0.0) {
                spec.resonator_freq = *freq;
            } else {
                violations.push_back("model.resonator_freq: must be > 0");
            }
        }
        if (const auto shift = get_number(j, "model", "dispersive_shift", violations)) {
            spec.dispersive_shift = *shift;
        }
        if (const auto n_max = get_integer(j, "model", "n_max", violations)) {
            if (*n_max >= 1) {
                spec.trunc.n_max = *n_max;
            } else {
                violations.push_back("model.n_max: must be >= 1");
            }
        }
        if (const auto tol = get_number(j, "model", "leakage_tol", violations, false)) {
            if (*tol > 0.0 && *tol < 1.0) {
                spec.trunc.leakage_tol = *tol;
            } else {
                violations.push_back("model.leakage_tol: must lie in (0, 1)");
            }
        }
        if (violations.size() != before) return std::nullopt;
        return ModelConfig{std::move(spec)};
    }

    if (kind == "generic") {
        check_keys(j, "model", {"schema_version", "kind", "h_a", "h_b", "v_ab", "a_ops"},
                   violations);
        const auto require_matrix =
            [&](const char* key) -> std::optional<HermitianOperator> {
            if (!j.contains(key)) {
                violations.push_back(std::string("model.") + key + ": missing");
                return std::nullopt;
            }
            return parse_matrix_json(j[key], std::string("model.") + key, violations);
        };
        auto h_a = require_matrix("h_a");
        auto h_b = require_matrix("h_b");
        auto v_ab = require_matrix("v_ab");
        std::vector<HermitianOperator> a_ops;
        if (!j.contains("a_ops") || !j["a_ops"].is_array()) {
            violations.push_back("model.a_ops: must be an array of matrices");
        } else {
            for (std::size_t i = 0; i < j["a_ops"].size(); ++i) {
                std::ostringstream path;
                path << "model.a_ops[" << i << "]";
                if (auto op = parse_matrix_json(j["a_ops"][i], path.str(), violations)) {
                    a_ops.push_back(std::move(*op));
                }
            }
        }
        if (violations.size() != before) return std::nullopt;
        return ModelConfig{GenericModelConfig{std::move(*h_a), std::move(*h_b),
                                              std::move(*v_ab), std::move(a_ops)}};
    }

    violations.push_back("model.kind: unknown kind '" + kind + "'");
    return std::nullopt;
}

std::optional<RealVector> parse_initial_json(const json& j,
                                             std::vector<std::string>& violations) {
    const std::size_t before = violations.size();
    if (!j.is_object()) {
        violations.push_back("initial: must be an object");
        return std::nullopt;
    }
    check_keys(j, "initial", {"schema_version", "populations"}, violations);
    check_version(j, "initial", violations);
    const auto populations = get_real_vector(j, "initial", "populations", violations);
    if (violations.size() != before) return std::nullopt;
    return populations;
}

InitialStateSpec parse_initial_spec(const std::string& text) {
    InitialStateSpec spec;
    if (text.empty() || text == "ground") {
        spec.kind = InitialStateSpec::Kind::Ground;
        return spec;
    }
    if (text == "uniform") {
        spec.kind = InitialStateSpec::Kind::Uniform;
        return spec;
    }
    if (text.rfind("level:", 0) == 0) {
        spec.kind = InitialStateSpec::Kind::Level;
        try {
            spec.level = std::stoi(text.substr(6));
        } catch (const std::exception&) {
            throw ValidationError("initial: malformed level index in '" + text + "'");
        }
        if (spec.level < 0) throw ValidationError("initial: level index must be >= 0");
        return spec;
    }
    // Anything else is a path to an initial-state JSON file.
    std::vector<std::string> violations;
    const json j = load_json_file(text, "initial", violations);
    if (violations.empty()) {
        if (const auto populations = parse_initial_json(j, violations)) {
            spec.kind = InitialStateSpec::Kind::Custom;
            spec.custom = *populations;
            return spec;
        }
    }
    throw_violations(violations);
}

// ---- model compilation -----------------------------------------------------------

BuiltModel build_model(const ModelConfig& model, const bath::BathSpec& bath_spec) {
    if (const auto* nd = std::get_if<models::NDModelSpec>(&model)) {
        const auto eig = models::build_nd_model(*nd);
        auto rm = rates::build_rate_matrix(eig, models::effective_couplings(eig), bath_spec);
        std::vector<LevelLabel> labels;
        labels.reserve(eig.levels().size());
        for (const auto& level : eig.levels()) labels.push_back({level.p, level.n});
        return {std::move(rm), std::move(labels)};
    }
    if (const auto* dispersive = std::get_if<models::DispersiveSpec>(&model)) {
        const auto built = models::build_dispersive(*dispersive);
        auto rm = rates::build_rate_matrix(built, bath_spec);
        return {std::move(rm), built.basis.labels};
    }
    const auto& generic = std::get<GenericModelConfig>(model);
    auto [h_s, promoted] = models::build_generic_composite(generic.h_a, generic.h_b,
                                                           generic.v_ab, generic.a_ops);
    const auto basis = eigendecompose(h_s);
    std::vector<CouplingChannel> channels;
    channels.reserve(promoted.size());
    for (const auto& op : promoted) channels.push_back(make_channel(op, basis));
    auto rm = rates::build_rate_matrix(basis, channels, bath_spec);
    return {std::move(rm), {}};
}

RealVector realize_initial(const InitialStateSpec& spec, int n_levels) {
    RealVector initial = RealVector::Zero(n_levels);
    switch (spec.kind) {
        case InitialStateSpec::Kind::Ground:
            initial(0) = 1.0;  // levels are sorted ascending in energy
            break;
        case InitialStateSpec::Kind::Uniform:
            initial.setConstant(1.0 / n_levels);
            break;
        case InitialStateSpec::Kind::Level:
            if (spec.level >= n_levels) {
                std::ostringstream msg;
                msg << "initial: level " << spec.level << " out of range (n_levels = "
                    << n_levels << ")";
                throw ValidationError(msg.str());
            }
            initial(spec.level) = 1.0;
            break;
        case InitialStateSpec::Kind::Custom:
            if (spec.custom.size() != n_levels) {
                std::ostringstream msg;
                msg << "initial: populations length " << spec.custom.size()
                    << " does not match n_levels = " << n_levels;
                throw ValidationError(msg.str());
            }
            initial = spec.custom;
            break;
    }
    PopulationVector check;
    check.values = initial;
    check.validate();
    return initial;
}

// ---- serialization -----------------------------------------------------------------

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void write_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot open '" + temp.string() + "' for writing");
        }
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(temp, ec);
            throw ValidationError("write to '" + temp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp, ec);
        throw ValidationError("cannot move output into place at '" + path + "'");
    }
}

namespace {

void emit(const std::string& path, const std::string& contents) {
    if (path.empty()) {
        std::cout << contents;
    } else {
        write_atomic(path, contents);
    }
}

json labels_to_json(const std::vector<LevelLabel>& labels) {
    json out = json::array();
    for (const auto& label : labels) {
        out.push_back(json{{"p", label.p}, {"n", label.n}});
    }
    return out;
}

}  // namespace

json analyze_report_json(const BuiltModel& built, const rates::ConnectivityReport& report,
                         const rates::SteadyStatePrediction& prediction,
                         const rates::StationarityReport& stationarity) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = prediction.kind == rates::SteadyStatePrediction::Kind::Canonical
                    ? "canonical"
                    : "mixture";
    j["n_levels"] = built.rm.n_levels();
    j["energies"] = std::vector<double>(built.rm.energies().begin(),
                                        built.rm.energies().end());
    j["components"] = report.components;
    j["component_weights"] = prediction.component_weights;
    j["populations"] =
        std::vector<double>(prediction.populations.begin(), prediction.populations.end());
    j["residual"] = stationarity.residual;
    j["residual_bound"] = stationarity.bound;
    j["accepted"] = stationarity.accepted;
    j["edge_threshold"] = built.rm.edge_threshold();
    j["gap_tol"] = built.rm.gap_tol();
    json degenerate = json::array();
    for (const auto& d : built.rm.degenerate_pairs()) degenerate.push_back({d.i, d.j});
    j["degenerate_pairs"] = std::move(degenerate);
    j["degenerate_links"] = report.degenerate_links;
    if (!report.warning.empty()) j["warning"] = report.warning;
    if (!built.labels.empty()) j["labels"] = labels_to_json(built.labels);
    return j;
}

void check_analyze_report_schema(const json& j) {
    std::vector<std::string> violations;
    check_keys(j, "report",
               {"schema_version", "kind", "n_levels", "energies", "components",
                "component_weights", "populations", "residual", "residual_bound", "accepted",
                "edge_threshold", "gap_tol", "degenerate_pairs", "degenerate_links",
                "warning", "labels"},
               violations);
    check_version(j, "report", violations);
    for (const char* key : {"schema_version", "kind", "n_levels", "energies", "components",
                            "component_weights", "populations", "residual", "residual_bound",
                            "accepted", "edge_threshold", "gap_tol", "degenerate_pairs",
                            "degenerate_links"}) {
        if (!j.contains(key)) violations.push_back(std::string("report.") + key + ": missing");
    }
    if (violations.empty()) {
        if (!j["kind"].is_string() ||
            (j["kind"] != "canonical" && j["kind"] != "mixture")) {
            violations.push_back("report.kind: must be 'canonical' or 'mixture'");
        }
        if (!j["populations"].is_array() ||
            j["populations"].size() != j["n_levels"].get<std::size_t>()) {
            violations.push_back("report.populations: length must equal n_levels");
        }
        if (!j["components"].is_array() || j["components"].empty()) {
            violations.push_back("report.components: must be a nonempty partition");
        }
    }
    if (!violations.empty()) throw_violations(violations);
}

// ---- pipelines ------------------------------------------------------------------------

namespace {

int run_analyze(const RunConfig& config) {
    const auto built = build_model(*config.model, *config.bath_spec);
    const auto report = rates::connectivity(built.rm);
    PopulationVector initial;
    initial.values = realize_initial(config.initial, built.rm.n_levels());
    const auto prediction = rates::predict_steady_state(built.rm, report, initial);
    const auto stationarity = rates::verify_stationarity(built.rm, prediction.populations);
    if (!stationarity.accepted) {
        throw NumericalError("steady-state prediction failed the stationarity bound");
    }
    if (!std::isinf(built.rm.beta())) {
        dyn::verify_prediction_consistency(built.rm, prediction, initial);
    }

    const json report_json = analyze_report_json(built, report, prediction, stationarity);
    check_analyze_report_schema(report_json);
    emit(config.output_path, report_json.dump(2) + "\n");

    if (!config.edges_csv_path.empty()) {
        std::ostringstream csv;
        csv << "i,f,delta,rate\n";
        for (const auto& e : built.rm.edges()) {
            csv << e.from << ',' << e.to << ','
                << format_double(built.rm.energies()(e.to) - built.rm.energies()(e.from))
                << ',' << format_double(e.rate) << '\n';
        }
        write_atomic(config.edges_csv_path, csv.str());
    }
    return 0;
}

int run_evolve(const RunConfig& config) {
    const auto built = build_model(*config.model, *config.bath_spec);
    const auto report = rates::connectivity(built.rm);
    PopulationVector initial;
    initial.values = realize_initial(config.initial, built.rm.n_levels());
    const auto prediction = rates::predict_steady_state(built.rm, report, initial);

    std::vector<double> times = config.times;
    if (times.empty()) {
        times.reserve(config.samples);
        for (int i = 1; i <= config.samples; ++i) {
            times.push_back(config.t_max * i / config.samples);
        }
    }

    dyn::EvolveOptions options;
    options.target = prediction.populations;
    const auto trajectory = dyn::evolve(built.rm, initial, times, options);

    std::ostringstream csv;
    csv << "time";
    for (int k = 0; k < built.rm.n_levels(); ++k) csv << ",P_" << k;
    csv << ",tv_distance\n";
    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
        csv << format_double(trajectory.samples[i].time);
        for (int k = 0; k < built.rm.n_levels(); ++k) {
            csv << ',' << format_double(trajectory.samples[i].values(k));
        }
        csv << ',' << format_double(trajectory.convergence[i]) << '\n';
    }
    emit(config.output_path, csv.str());
    return 0;
}

int run_fc_table(const RunConfig& config) {
    const fock::FockTruncation trunc{config.n_max, 1e-6};
    const auto table = fock::displacement_matrix(config.alpha, trunc);
    std::ostringstream csv;
    csv << "m,n,value\n";
    for (int m = 0; m <= config.n_max; ++m) {
        for (int n = 0; n <= config.n_max; ++n) {
            csv << m << ',' << n << ',' << format_double(table.value(m, n)) << '\n';
        }
    }
    emit(config.output_path, csv.str());
    return 0;
}

int run_blockade_command(const RunConfig& config) {
    const auto run = blockade::run_blockade(config.blockade_config);

    std::ostringstream csv;
    csv << "group,M,log_factor\n";
    for (std::size_t g = 0; g < run.groups.size(); ++g) {
        for (std::size_t k = 0; k < run.config.m_values.size(); ++k) {
            csv << g << ',' << run.config.m_values[k] << ','
                << format_double(run.groups[g].log_factors[k]) << '\n';
        }
    }
    emit(config.output_path, csv.str());

    if (!config.summary_path.empty()) {
        json summary;
        summary["schema_version"] = kSchemaVersion;
        summary["seed"] = run.config.seed;
        summary["range_lo"] = run.config.range_lo;
        summary["range_hi"] = run.config.range_hi;
        summary["sampling"] =
            run.config.sampling == blockade::BlockadeConfig::Sampling::Nested ? "nested"
                                                                              : "redraw";
        json groups = json::array();
        for (std::size_t g = 0; g < run.groups.size(); ++g) {
            const auto fit =
                blockade::fit_log_slope(run.config.m_values, run.groups[g].log_factors);
            groups.push_back(json{{"group", g},
                                  {"slope", fit.slope},
                                  {"intercept", fit.intercept},
                                  {"r_squared", fit.r_squared}});
        }
        summary["groups"] = std::move(groups);
        write_atomic(config.summary_path, summary.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int run(const RunConfig& config) {
    switch (config.command) {
        case RunConfig::Command::Analyze:
            return run_analyze(config);
        case RunConfig::Command::Evolve:
            return run_evolve(config);
        case RunConfig::Command::FcTable:
            return run_fc_table(config);
        case RunConfig::Command::Blockade:
            return run_blockade_command(config);
        case RunConfig::Command::Validate:
            return run_validate_suite(std::cout) ? 0 : 1;
    }
    return 2;
}

// ---- command line ----------------------------------------------------------------------

RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"synchro-thermalization analysis of composite open quantum systems",
                 "synchrotherm"};
    app.require_subcommand(1);

    RunConfig config;
    std::string model_path, bath_path, initial_text, times_text, range_text;
    int m_max = 10;
    bool redraw = false;

    auto add_model_bath = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_path, "model JSON file")->required();
        cmd->add_option("--bath", bath_path, "bath JSON file")->required();
        cmd->add_option("--initial", initial_text,
                        "ground | uniform | level:K | initial-state JSON file");
        cmd->add_option("--output", config.output_path, "output path (default stdout)");
    };

    auto* analyze = app.add_subcommand("analyze", "classify connectivity, predict steady state");
    add_model_bath(analyze);
    analyze->add_option("--edges-csv", config.edges_csv_path, "also write the rate edges CSV");

    auto* evolve = app.add_subcommand("evolve", "integrate the Pauli master equation");
    add_model_bath(evolve);
    auto* times_opt = evolve->add_option("--times", times_text, "comma-separated sample times");
    auto* tmax_opt = evolve->add_option("--t-max", config.t_max, "end time for a linspace");
    evolve->add_option("--samples", config.samples, "sample count for the linspace")
        ->default_val(50);
    times_opt->excludes(tmax_opt);
    tmax_opt->excludes(times_opt);

    auto* fc = app.add_subcommand("fc-table", "displacement-matrix CSV");
    fc->add_option("--alpha", config.alpha, "displacement")->required();
    fc->add_option("--n-max", config.n_max, "highest Fock level")->required();
    fc->add_option("--output", config.output_path, "output path (default stdout)");

    auto* blockade_cmd = app.add_subcommand("blockade", "multi-Franck-Condon decay experiment");
    blockade_cmd->add_option("--groups", config.blockade_config.n_groups, "sample groups")
        ->default_val(6);
    blockade_cmd->add_option("--m-max", m_max, "largest oscillator count M")->default_val(10);
    blockade_cmd->add_option("--range", range_text, "draw range as lo,hi")->default_val("-4,4");
    blockade_cmd->add_option("--seed", config.blockade_config.seed, "RNG seed")->default_val(0);
    blockade_cmd->add_flag("--redraw", redraw, "redraw displacements for every M");
    blockade_cmd->add_option("--output", config.output_path, "CSV path (default stdout)");
    blockade_cmd->add_option("--summary", config.summary_path, "slope-fit JSON path");

    app.add_subcommand("validate", "run the bundled invariant suite");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& err) {
        throw ValidationError(err.what());
    }

    std::vector<std::string> violations;
    const auto load_model_bath = [&] {
        const json model_json = load_json_file(model_path, "model", violations);
        const json bath_json = load_json_file(bath_path, "bath", violations);
        if (violations.empty()) {
            config.model = parse_model_json(model_json, violations);
            config.bath_spec = parse_bath_json(bath_json, violations);
        }
        if (!initial_text.empty()) config.initial = parse_initial_spec(initial_text);
    };

    if (analyze->parsed()) {
        config.command = RunConfig::Command::Analyze;
        load_model_bath();
    } else if (evolve->parsed()) {
        config.command = RunConfig::Command::Evolve;
        load_model_bath();
        if (!times_text.empty()) {
            config.times = parse_double_list(times_text, "evolve.times", violations);
            for (std::size_t i = 0; i < config.times.size(); ++i) {
                if (config.times[i] < 0.0 ||
                    (i > 0 && config.times[i] <= config.times[i - 1])) {
                    violations.push_back("evolve.times: must be nonnegative and ascending");
                    break;
                }
            }
        } else if (tmax_opt->count() > 0) {
            if (!(config.t_max > 0.0)) violations.push_back("evolve.t-max: must be > 0");
            if (config.samples < 1) violations.push_back("evolve.samples: must be >= 1");
        } else {
            violations.push_back("evolve: provide either --times or --t-max");
        }
    } else if (fc->parsed()) {
        config.command = RunConfig::Command::FcTable;
        if (config.n_max < 1) violations.push_back("fc-table.n-max: must be >= 1");
    } else if (blockade_cmd->parsed()) {
        config.command = RunConfig::Command::Blockade;
        const auto range = parse_double_list(range_text, "blockade.range", violations);
        if (range.size() == 2) {
            config.blockade_config.range_lo = range[0];
            config.blockade_config.range_hi = range[1];
        } else {
            violations.push_back("blockade.range: expected exactly 'lo,hi'");
        }
        if (m_max < 1) violations.push_back("blockade.m-max: must be >= 1");
        config.blockade_config.m_values.clear();
        for (int m = 1; m <= m_max; ++m) config.blockade_config.m_values.push_back(m);
        if (redraw) {
            config.blockade_config.sampling = blockade::BlockadeConfig::Sampling::Redraw;
        }
        if (violations.empty()) config.blockade_config.validate();
    } else {
        config.command = RunConfig::Command::Validate;
    }

    if (!violations.empty()) throw_violations(violations);
    return config;
}

}  // namespace synchrotherm::cli
