#pragma once

// Batch experiments: key=value configuration, sweeps over the engines, and
// CSV / JSON emission. The `simulate` tool is a thin shell over this header.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sectorsim/avalanche.hpp"
#include "sectorsim/core.hpp"
#include "sectorsim/measurement.hpp"
#include "sectorsim/sector.hpp"

namespace sectorsim {

class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int guard = 3;
inline constexpr int disagreement = 4;
inline constexpr int io = 5;
}  // namespace exit_code

inline constexpr double kEngineTol = 1e-10;

enum class ExperimentKind { avalanche_sweep, measurement_sweep, sector_commutator, qnd_demo, oracle_check, scales };
enum class EngineMode { dense, structured, both };
enum class OutputFormat { csv, json };

inline ExperimentKind parse_kind(const std::string& s) {
    static const std::map<std::string, ExperimentKind> kinds = {
        {"avalanche-sweep", ExperimentKind::avalanche_sweep},
        {"measurement-sweep", ExperimentKind::measurement_sweep},
        {"sector-commutator", ExperimentKind::sector_commutator},
        {"qnd-demo", ExperimentKind::qnd_demo},
        {"oracle-check", ExperimentKind::oracle_check},
        {"scales", ExperimentKind::scales},
    };
    auto it = kinds.find(s);
    if (it == kinds.end()) {
        throw ConfigError("unknown experiment kind '" + s + "'");
    }
    return it->second;
}

inline OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError("format must be csv or json, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Configuration

class ExperimentConfig {
  public:
    enum class KeyType { real, count, text };

    static const std::map<std::string, std::pair<KeyType, std::string>>& schema() {
        // key -> (type, default). An empty default means "not set".
        static const std::map<std::string, std::pair<KeyType, std::string>> keys = {
            {"eta_re", {KeyType::real, "0.6"}},
            {"eta_im", {KeyType::real, "0"}},
            {"delta_re", {KeyType::real, "1"}},
            {"delta_im", {KeyType::real, "0"}},
            {"h_re", {KeyType::real, "1"}},
            {"h_im", {KeyType::real, "0"}},
            {"v_re", {KeyType::real, "0"}},
            {"v_im", {KeyType::real, "0"}},
            {"A", {KeyType::count, "8"}},
            {"A_H", {KeyType::count, "4"}},
            {"A_V", {KeyType::count, "4"}},
            {"n_max", {KeyType::count, "2"}},
            {"N", {KeyType::count, "5"}},
            {"theta", {KeyType::real, "0.78539816339744828"}},
            {"engine", {KeyType::text, "structured"}},
            {"reference", {KeyType::text, ""}},
            {"seed", {KeyType::count, "1"}},
            {"samples", {KeyType::count, "100000"}},
            {"U", {KeyType::real, "2"}},
            {"Delta", {KeyType::real, "0.5"}},
            {"a", {KeyType::real, "1e-6"}},
            {"output_path", {KeyType::text, ""}},
            {"format", {KeyType::text, "csv"}},
        };
        return keys;
    }

    explicit ExperimentConfig(ExperimentKind kind) : kind_(kind) {
        for (const auto& [key, spec] : schema()) {
            values_[key] = spec.second;
        }
    }

    ExperimentKind kind() const { return kind_; }

    void set(const std::string& key, const std::string& value) {
        auto it = schema().find(key);
        if (it == schema().end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        check_type(key, it->second.first, value);
        values_[key] = value;
    }

    /// "key=value" as given on the command line.
    void set_assignment(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key=value, got '" + assignment + "'");
        }
        set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    }

    /// Key=value lines; '#' starts a comment.
    void merge_text(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            try {
                set_assignment(line);
            } catch (const ConfigError& e) {
                throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    void merge_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot read config file '" + path + "'");
        }
        std::stringstream buf;
        buf << in.rdbuf();
        merge_text(buf.str());
    }

    const std::string& raw(const std::string& key) const { return values_.at(key); }

    double real(const std::string& key) const { return std::stod(values_.at(key)); }
    std::uint64_t count(const std::string& key) const { return std::stoull(values_.at(key)); }

    Amplitude complex(const std::string& stem) const { return {real(stem + "_re"), real(stem + "_im")}; }

    EngineMode engine() const {
        const std::string& e = raw("engine");
        if (e == "dense") return EngineMode::dense;
        if (e == "structured") return EngineMode::structured;
        if (e == "both") return EngineMode::both;
        throw ConfigError("engine must be dense, structured or both");
    }

    /// Avalanche sweeps default to the no-avalanche reference, everything
    /// else to the ground reference.
    Reference reference() const {
        const std::string& r = raw("reference");
        if (r.empty()) {
            return kind_ == ExperimentKind::avalanche_sweep ? Reference::no_avalanche : Reference::ground;
        }
        if (r == "ground") return Reference::ground;
        if (r == "no_avalanche") return Reference::no_avalanche;
        throw ConfigError("reference must be ground or no_avalanche");
    }

    OutputFormat format() const { return parse_format(raw("format")); }

    AvalancheParams avalanche_params() const {
        return AvalancheParams{static_cast<std::size_t>(count("A")), complex("eta"),
                               static_cast<unsigned>(count("n_max"))};
    }

    MeasurementSetup measurement_setup() const {
        MeasurementSetup s;
        s.pol = PhotonPolarisation{complex("h"), complex("v")};
        s.delta = complex("delta");
        s.eta = complex("eta");
        s.dopants_h = static_cast<std::size_t>(count("A_H"));
        s.dopants_v = static_cast<std::size_t>(count("A_V"));
        s.n_max = static_cast<unsigned>(count("n_max"));
        return s;
    }

    /// Re-checks every module invariant the chosen experiment relies on.
    void validate() const {
        try {
            (void)engine();
            (void)reference();
            (void)format();
            if (count("n_max") > 62) {
                throw ConfigError("n_max must be <= 62");
            }
            switch (kind_) {
                case ExperimentKind::avalanche_sweep:
                    sectorsim::validate(avalanche_params());
                    break;
                case ExperimentKind::measurement_sweep:
                    sectorsim::validate(measurement_setup());
                    break;
                case ExperimentKind::sector_commutator:
                    if (count("N") == 0) {
                        throw ConfigError("N must be >= 1");
                    }
                    break;
                case ExperimentKind::qnd_demo:
                    sectorsim::validate(PhotonPolarisation{complex("h"), complex("v")});
                    break;
                case ExperimentKind::scales:
                    (void)physical_scales(real("U"), real("Delta"), real("a"), static_cast<double>(count("A")));
                    break;
                case ExperimentKind::oracle_check:
                    break;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }

    /// Effective experiment parameters, typed, for the JSON echo block.
    /// Where and how the output is written is not echoed.
    nlohmann::ordered_json echo() const {
        nlohmann::ordered_json j;
        for (const auto& [key, spec] : schema()) {
            if (key == "output_path" || key == "format") {
                continue;
            }
            const std::string& v = values_.at(key);
            if (key == "reference") {
                j[key] = reference() == Reference::ground ? "ground" : "no_avalanche";
            } else if (v.empty()) {
                j[key] = nullptr;
            } else if (spec.first == KeyType::real) {
                j[key] = std::stod(v);
            } else if (spec.first == KeyType::count) {
                j[key] = std::stoull(v);
            } else {
                j[key] = v;
            }
        }
        return j;
    }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) {
            return {};
        }
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static void check_type(const std::string& key, KeyType type, const std::string& value) {
        if (type == KeyType::text) {
            return;
        }
        std::size_t used = 0;
        bool ok = !value.empty();
        try {
            if (ok && type == KeyType::real) {
                const double d = std::stod(value, &used);
                ok = std::isfinite(d);
            } else if (ok) {
                ok = value.find_first_not_of("0123456789") == std::string::npos;
                if (ok) {
                    (void)std::stoull(value, &used);
                }
            }
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok || used != value.size()) {
            throw ConfigError("bad value '" + value + "' for key '" + key + "'");
        }
    }

    ExperimentKind kind_;
    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Result tables

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct RunResult {
    ResultTable table;
    double max_disagreement = 0.0;
    bool disagreement_failed = false;
};

inline Cell optional_cell(const std::optional<double>& v) {
    return v ? Cell(*v) : Cell(std::monostate{});
}

namespace detail {

inline Amplitude avalanche_overlap_dense(const AvalancheParams& p, unsigned n, Reference ref) {
    const DenseState phi = dense_avalanche(p, n);
    const DenseState r = ref == Reference::ground ? ground_register(p.dopants) : no_avalanche_register(p.dopants);
    return inner_product(r, phi);
}

inline Amplitude avalanche_overlap_structured(const AvalancheParams& p, unsigned n, Reference ref) {
    return ref == Reference::ground ? overlap_ground(p, n) : overlap_no_avalanche(p, n);
}

inline RunResult run_avalanche_sweep(const ExperimentConfig& cfg) {
    const AvalancheParams p = cfg.avalanche_params();
    const Reference ref = cfg.reference();
    const EngineMode mode = cfg.engine();
    RunResult out;
    out.table.columns = {"n", "M", "overlap_re", "overlap_im", "overlap_abs"};
    if (mode == EngineMode::both) {
        out.table.columns.insert(out.table.columns.end(),
                                 {"structured_overlap_re", "structured_overlap_im", "structured_overlap_abs",
                                  "disagreement"});
    }
    for (unsigned n = 0; n <= p.n_max; ++n) {
        const Amplitude primary = mode == EngineMode::structured ? avalanche_overlap_structured(p, n, ref)
                                                                 : avalanche_overlap_dense(p, n, ref);
        std::vector<Cell> row = {std::int64_t(n), std::int64_t(1) << n, primary.real(), primary.imag(),
                                 std::abs(primary)};
        if (mode == EngineMode::both) {
            const Amplitude s = avalanche_overlap_structured(p, n, ref);
            const double diff = std::abs(s - primary);
            out.max_disagreement = std::max(out.max_disagreement, diff);
            row.insert(row.end(), {s.real(), s.imag(), std::abs(s), diff});
        }
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

inline RunResult run_measurement_sweep(const ExperimentConfig& cfg) {
    const MeasurementSetup s = cfg.measurement_setup();
    const Reference ref = cfg.reference();
    const EngineMode mode = cfg.engine();
    RunResult out;
    out.table.columns = {"n", "M", "overlap_abs", "expectation_direct", "expectation_formula", "limit", "abs_diff"};
    if (mode == EngineMode::both) {
        out.table.columns.insert(out.table.columns.end(),
                                 {"structured_overlap_abs", "structured_expectation_formula", "disagreement"});
    }
    for (unsigned n = 0; n <= s.n_max; ++n) {
        const Engine primary_engine = mode == EngineMode::structured ? Engine::structured : Engine::dense;
        const MeasurementRecord r = sector_parameter_expectation(s, n, ref, primary_engine);
        std::optional<double> abs_diff;
        if (r.expectation_direct) {
            abs_diff = std::abs(*r.expectation_direct - r.expectation_formula);
        }
        std::vector<Cell> row = {std::int64_t(n),
                                 static_cast<std::int64_t>(r.electrons),
                                 r.overlap_abs(),
                                 optional_cell(r.expectation_direct),
                                 r.expectation_formula,
                                 r.limit,
                                 optional_cell(abs_diff)};
        if (mode == EngineMode::both) {
            const MeasurementRecord st = sector_parameter_expectation(s, n, ref, Engine::structured);
            double diff = std::max({std::abs(st.overlap_h - r.overlap_h), std::abs(st.overlap_v - r.overlap_v),
                                    std::abs(st.expectation_formula - r.expectation_formula)});
            // The direct sandwich is the ground-reference quantity; under the
            // no-avalanche reference the gap is the reported storyline difference.
            if (ref == Reference::ground && abs_diff) {
                diff = std::max(diff, *abs_diff);
            }
            out.max_disagreement = std::max(out.max_disagreement, diff);
            row.insert(row.end(), {st.overlap_abs(), st.expectation_formula, diff});
        }
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

inline RunResult run_sector_commutator(const ExperimentConfig& cfg) {
    const double theta = cfg.real("theta");
    const SiteVector phi = {1.0, 0.0};
    const SiteVector chi = {std::cos(theta), std::sin(theta)};
    const EngineMode mode = cfg.engine();
    const auto n_top = static_cast<std::size_t>(cfg.count("N"));
    RunResult out;
    out.table.columns = {"N", "analytic_norm", "dense_norm"};
    if (mode == EngineMode::both) {
        out.table.columns.push_back("disagreement");
    }
    for (std::size_t n = 1; n <= n_top; ++n) {
        const auto a = ElementaryFamily::uniform(n, phi);
        const auto b = ElementaryFamily::uniform(n, chi);
        const double analytic = commutator_norm_analytic(a, b);
        std::optional<double> dense;
        if (mode != EngineMode::structured) {
            dense = commutator_norm_dense(a, b);
        }
        std::vector<Cell> row = {static_cast<std::int64_t>(n), analytic, optional_cell(dense)};
        if (mode == EngineMode::both) {
            const double diff = std::abs(analytic - *dense);
            out.max_disagreement = std::max(out.max_disagreement, diff);
            row.push_back(diff);
        }
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

inline RunResult run_qnd_demo(const ExperimentConfig& cfg) {
    const PhotonPolarisation pol{cfg.complex("h"), cfg.complex("v")};
    const QndOutcome outcome = qnd_outcome(pol);
    const std::uint64_t draws = cfg.count("samples");
    const QndCounts counts = sample_qnd(pol, cfg.count("seed"), draws);
    const double total = draws == 0 ? 1.0 : static_cast<double>(draws);
    RunResult out;
    out.table.columns = {"outcome", "probability", "count", "frequency"};
    out.table.rows.push_back({std::string("H"), outcome.p_h, static_cast<std::int64_t>(counts.h),
                              static_cast<double>(counts.h) / total});
    out.table.rows.push_back({std::string("V"), outcome.p_v, static_cast<std::int64_t>(counts.v),
                              static_cast<double>(counts.v) / total});
    return out;
}

inline RunResult run_scales(const ExperimentConfig& cfg) {
    const ScaleReport r =
        physical_scales(cfg.real("U"), cfg.real("Delta"), cfg.real("a"), static_cast<double>(cfg.count("A")));
    RunResult out;
    out.table.columns = {"l_over_a", "mean_free_path", "g", "M", "W_m"};
    out.table.rows.push_back({r.l_over_a, r.mean_free_path, r.generations, r.electrons, r.work});
    return out;
}

/// Engine cross-checks over a fixed small grid.
inline RunResult run_oracle_check() {
    const std::vector<Amplitude> etas = {0.0, 0.3, 0.6, Amplitude(0.6, 0.64) / std::abs(Amplitude(0.6, 0.64)),
                                         Amplitude(0.6, 0.64), 1.0};
    std::vector<std::pair<std::string, double>> checks;

    // Structured amplitudes against the dense state, every basis state.
    double amp_diff = 0.0;
    double overlap_diff = 0.0;
    for (std::size_t dopants : {1, 2, 4, 6, 8}) {
        for (const Amplitude eta : etas) {
            for (unsigned n = 0; (std::size_t{1} << n) <= dopants && n <= 3; ++n) {
                const AvalancheParams p{dopants, eta, n};
                const DenseState dense = dense_avalanche(p, n);
                const StructuredAvalancheState st(p, n);
                for (std::size_t f = 0; f < dense.size(); ++f) {
                    amp_diff = std::max(amp_diff, std::abs(dense[f] - st.amplitude(dense.sites().labels(f))));
                }
                overlap_diff = std::max(overlap_diff, std::abs(inner_product(no_avalanche_register(dopants), dense) -
                                                               overlap_no_avalanche(p, n)));
                overlap_diff = std::max(overlap_diff,
                                        std::abs(inner_product(ground_register(dopants), dense) - overlap_ground(p, n)));
            }
        }
    }
    checks.emplace_back("avalanche_amplitudes", amp_diff);
    checks.emplace_back("avalanche_overlaps", overlap_diff);

    // Measurement: branch assembly vs global gates, sandwich vs formula.
    double evolve_diff = 0.0;
    double expectation_diff = 0.0;
    const std::vector<std::pair<Amplitude, Amplitude>> pols = {
        {1.0, 0.0}, {std::sqrt(0.5), std::sqrt(0.5)}, {std::sqrt(0.7), Amplitude(0.0, std::sqrt(0.3))}};
    for (const auto& [h, v] : pols) {
        for (const Amplitude delta : {Amplitude(0.5), Amplitude(1.0)}) {
            for (const Amplitude eta : {Amplitude(0.3), Amplitude(0.6, 0.2)}) {
                MeasurementSetup s{{h, v}, delta, eta, 4, 4, 2};
                for (unsigned n = 0; n <= 2; ++n) {
                    const DenseState a = evolve(s, n);
                    const DenseState b = evolve_global(s, n);
                    for (std::size_t f = 0; f < a.size(); ++f) {
                        evolve_diff = std::max(evolve_diff, std::abs(a[f] - b[f]));
                    }
                    const auto rec = sector_parameter_expectation(s, n, Reference::ground, Engine::dense);
                    expectation_diff =
                        std::max(expectation_diff, std::abs(*rec.expectation_direct - rec.expectation_formula));
                }
            }
        }
    }
    checks.emplace_back("measurement_evolution", evolve_diff);
    checks.emplace_back("measurement_expectation", expectation_diff);

    // Sector parameter: exact action and commutator against dense operators.
    double sector_diff = 0.0;
    double commutator_diff = 0.0;
    const SiteVector zero = {1.0, 0.0};
    const SiteVector plus = {std::sqrt(0.5), std::sqrt(0.5)};
    const SiteVector tilted = {std::cos(0.3), Amplitude(0.0, std::sin(0.3))};
    for (std::size_t n = 1; n <= 5; ++n) {
        const auto fam = ElementaryFamily::uniform(n, zero);
        std::vector<std::pair<std::size_t, SiteVector>> repl;
        for (std::size_t k = 0; k < n; k += 2) {
            repl.emplace_back(k, k % 4 == 0 ? plus : tilted);
        }
        const auto psi = ProductState::modify(fam, repl);
        const DenseOperator x = dense_sector_operator(fam);
        const DenseState dpsi = psi.dense();
        const DenseState act = sector_apply(fam, psi).dense();
        Amplitude expect = 0.0;
        for (std::size_t r = 0; r < dpsi.size(); ++r) {
            Amplitude acc = 0.0;
            for (std::size_t c = 0; c < dpsi.size(); ++c) {
                acc += x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * dpsi[c];
            }
            sector_diff = std::max(sector_diff, std::abs(acc - act[r]));
            expect += std::conj(dpsi[r]) * acc;
        }
        sector_diff = std::max(sector_diff, std::abs(expect.real() - sector_expectation(fam, psi)));
        const auto other = ElementaryFamily::uniform(n, tilted);
        commutator_diff = std::max(
            commutator_diff, std::abs(commutator_norm_analytic(fam, other) - commutator_norm_dense(fam, other)));
    }
    checks.emplace_back("sector_action", sector_diff);
    checks.emplace_back("sector_commutator", commutator_diff);

    RunResult out;
    out.table.columns = {"check", "max_abs_diff", "tolerance", "pass"};
    for (const auto& [name, diff] : checks) {
        const bool pass = diff <= kEngineTol;
        out.max_disagreement = std::max(out.max_disagreement, diff);
        out.table.rows.push_back({name, diff, kEngineTol, std::int64_t(pass ? 1 : 0)});
    }
    return out;
}

}  // namespace detail

/// Runs one experiment. Library errors propagate; a `both`-mode or
/// oracle-check disagreement above 1e-10 is reported via `disagreement_failed`.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    RunResult out;
    switch (cfg.kind()) {
        case ExperimentKind::avalanche_sweep:
            out = detail::run_avalanche_sweep(cfg);
            break;
        case ExperimentKind::measurement_sweep:
            out = detail::run_measurement_sweep(cfg);
            break;
        case ExperimentKind::sector_commutator:
            out = detail::run_sector_commutator(cfg);
            break;
        case ExperimentKind::qnd_demo:
            out = detail::run_qnd_demo(cfg);
            break;
        case ExperimentKind::oracle_check:
            out = detail::run_oracle_check();
            break;
        case ExperimentKind::scales:
            out = detail::run_scales(cfg);
            break;
    }
    out.disagreement_failed = out.max_disagreement > kEngineTol;
    return out;
}

// ---------------------------------------------------------------------------
// Emission

/// %.17g: enough digits to reload every double bit-exactly.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string to_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out += (c ? "," : "") + table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::visit(
                [&out](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::monostate>) {
                        out += "nan";
                    } else if constexpr (std::is_same_v<T, std::int64_t>) {
                        out += std::to_string(v);
                    } else if constexpr (std::is_same_v<T, double>) {
                        out += format_double(v);
                    } else {
                        out += v;
                    }
                },
                row[c]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json to_json(const ResultTable& table, const nlohmann::ordered_json& config_echo) {
    nlohmann::ordered_json doc;
    doc["config"] = config_echo;
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json rec;
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::monostate>) {
                        rec[table.columns[c]] = nullptr;
                    } else {
                        rec[table.columns[c]] = v;
                    }
                },
                row[c]);
        }
        doc["records"].push_back(std::move(rec));
    }
    return doc;
}

inline std::string render(const ResultTable& table, OutputFormat format, const nlohmann::ordered_json& config_echo) {
    if (table.rows.empty()) {
        throw Error("no records to emit");
    }
    if (format == OutputFormat::csv) {
        return to_csv(table);
    }
    return to_json(table, config_echo).dump(2) + "\n";
}

inline void emit(const ResultTable& table, OutputFormat format, const std::string& path,
                 const nlohmann::ordered_json& config_echo = nlohmann::ordered_json::object()) {
    const std::string text = render(table, format, config_echo);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

}  // namespace sectorsim
