// simulate <kind> --config <path> [--set key=value ...] --out <path> --format csv|json

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "sectorsim/experiment.hpp"

namespace {

void apply_guard_override() {
    const char* env = std::getenv("SECTORSIM_DIM_GUARD");
    if (env == nullptr || *env == '\0') {
        return;
    }
    const std::string value(env);
    if (value.find_first_not_of("0123456789") != std::string::npos) {
        throw sectorsim::ConfigError("SECTORSIM_DIM_GUARD must be a positive integer");
    }
    const auto guard = std::stoull(value);
    if (guard == 0) {
        throw sectorsim::ConfigError("SECTORSIM_DIM_GUARD must be a positive integer");
    }
    sectorsim::set_dimension_guard(guard);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Avalanche-photodiode measurement simulator"};
    std::string kind;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::string format;
    app.add_option("kind", kind,
                   "avalanche-sweep | measurement-sweep | sector-commutator | qnd-demo | oracle-check | scales")
        ->required();
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--set", overrides, "override a config key (key=value); repeatable");
    app.add_option("--out", out_path, "output file (default: output_path key, else stdout)");
    app.add_option("--format", format, "csv or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : sectorsim::exit_code::config;
    }

    using namespace sectorsim;
    try {
        apply_guard_override();
        ExperimentConfig cfg(parse_kind(kind));
        if (!config_path.empty()) {
            cfg.merge_file(config_path);
        }
        for (const auto& kv : overrides) {
            cfg.set_assignment(kv);
        }
        if (!out_path.empty()) {
            cfg.set("output_path", out_path);
        }
        if (!format.empty()) {
            cfg.set("format", format);
        }
        cfg.validate();

        const RunResult result = run_experiment(cfg);
        const std::string& path = cfg.raw("output_path");
        if (path.empty()) {
            std::cout << render(result.table, cfg.format(), cfg.echo());
        } else {
            emit(result.table, cfg.format(), path, cfg.echo());
        }
        if (result.disagreement_failed) {
            std::cerr << "engine disagreement " << format_double(result.max_disagreement) << " exceeds "
                      << format_double(kEngineTol) << "\n";
            return exit_code::disagreement;
        }
        return exit_code::ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const DimensionLimitError& e) {
        std::cerr << "dimension guard: " << e.what() << "\n";
        return exit_code::guard;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    }
}
