#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "sectorsim/experiment.hpp"

using namespace sectorsim;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sectorsim_experiment_test";
    fs::create_directories(dir);
    return dir / name;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SIMULATE_BIN) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsOverridesAndUnknownKeys) {
    ExperimentConfig cfg(ExperimentKind::measurement_sweep);
    cfg.merge_text("# comment\n eta_re = 0.3 \nA_H=8\n\nA_V=8 # trailing\n");
    EXPECT_DOUBLE_EQ(cfg.real("eta_re"), 0.3);
    EXPECT_EQ(cfg.count("A_H"), 8u);
    cfg.set_assignment("eta_re=0.5");
    EXPECT_DOUBLE_EQ(cfg.real("eta_re"), 0.5);
    EXPECT_THROW(cfg.set("bogus", "1"), ConfigError);
    EXPECT_THROW(cfg.merge_text("eta_re\n"), ConfigError);
    EXPECT_THROW(cfg.set("A", "-3"), ConfigError);
    EXPECT_THROW(cfg.set("eta_re", "abc"), ConfigError);
    EXPECT_THROW(parse_kind("nope"), ConfigError);
}

TEST(Config, ReferenceDefaultsPerKind) {
    EXPECT_EQ(ExperimentConfig(ExperimentKind::avalanche_sweep).reference(), Reference::no_avalanche);
    EXPECT_EQ(ExperimentConfig(ExperimentKind::measurement_sweep).reference(), Reference::ground);
    ExperimentConfig cfg(ExperimentKind::avalanche_sweep);
    cfg.set("reference", "ground");
    EXPECT_EQ(cfg.reference(), Reference::ground);
}

TEST(Config, EchoShowsResolvedReference) {
    const auto echo = ExperimentConfig(ExperimentKind::avalanche_sweep).echo();
    EXPECT_EQ(echo.at("reference"), "no_avalanche");
    EXPECT_FALSE(echo.contains("output_path"));
    EXPECT_FALSE(echo.contains("format"));
}

TEST(Config, ValidationReappliesModuleInvariants) {
    ExperimentConfig cfg(ExperimentKind::measurement_sweep);
    cfg.set("h_re", "0.9");
    EXPECT_THROW(cfg.validate(), ConfigError);
    ExperimentConfig av(ExperimentKind::avalanche_sweep);
    av.set("A", "3");
    av.set("n_max", "2");
    EXPECT_THROW(av.validate(), ConfigError);
    av.set("A", "4");
    av.set("eta_re", "1.2");
    EXPECT_THROW(av.validate(), ConfigError);
}

TEST(AvalancheSweep, StructuredOverlapColumn) {
    ExperimentConfig cfg(ExperimentKind::avalanche_sweep);
    cfg.set("eta_re", "0.6");
    cfg.set("n_max", "5");
    cfg.set("A", "32");
    cfg.set("engine", "structured");
    const RunResult r = run_experiment(cfg);
    const std::vector<std::string> header = {"n", "M", "overlap_re", "overlap_im", "overlap_abs"};
    EXPECT_EQ(r.table.columns, header);
    ASSERT_EQ(r.table.rows.size(), 6u);
    const double expected[] = {1, 0.8, 0.64, 0.512, 0.4096, 0.32768};
    for (std::size_t n = 0; n < 6; ++n) {
        EXPECT_NEAR(std::get<double>(r.table.rows[n][4]), expected[n], 1e-15);
        EXPECT_EQ(std::get<std::int64_t>(r.table.rows[n][1]), std::int64_t{1} << n);
    }
}

TEST(AvalancheSweep, BothModeIsSupersetOfDense) {
    ExperimentConfig dense(ExperimentKind::avalanche_sweep);
    dense.set("A", "8");
    dense.set("n_max", "3");
    dense.set("eta_im", "0.2");
    dense.set("engine", "dense");
    ExperimentConfig both = dense;
    both.set("engine", "both");
    const RunResult d = run_experiment(dense);
    const RunResult b = run_experiment(both);
    EXPECT_FALSE(b.disagreement_failed);
    ASSERT_EQ(b.table.columns.back(), "disagreement");
    for (std::size_t r = 0; r < d.table.rows.size(); ++r) {
        for (std::size_t c = 0; c < d.table.columns.size(); ++c) {
            EXPECT_EQ(b.table.columns[c], d.table.columns[c]);
            EXPECT_EQ(b.table.rows[r][c], d.table.rows[r][c]);
        }
    }
}

TEST(MeasurementSweep, CertainHIsConstantPlusOne) {
    ExperimentConfig cfg(ExperimentKind::measurement_sweep);
    cfg.set("delta_re", "1");
    cfg.set("h_re", "1");
    cfg.set("v_re", "0");
    cfg.set("engine", "both");
    const RunResult r = run_experiment(cfg);
    EXPECT_FALSE(r.disagreement_failed);
    for (const auto& row : r.table.rows) {
        EXPECT_NEAR(std::get<double>(row[3]), 1.0, 1e-14);
        EXPECT_EQ(std::get<double>(row[4]), 1.0);
        EXPECT_EQ(std::get<double>(row[5]), 1.0);
    }
}

TEST(MeasurementSweep, StructuredOnlyLeavesDirectEmpty) {
    ExperimentConfig cfg(ExperimentKind::measurement_sweep);
    cfg.set("A_H", "1073741824");
    cfg.set("A_V", "1073741824");
    cfg.set("n_max", "30");
    cfg.set("reference", "no_avalanche");
    const RunResult r = run_experiment(cfg);
    ASSERT_EQ(r.table.rows.size(), 31u);
    EXPECT_TRUE(std::holds_alternative<std::monostate>(r.table.rows[30][3]));
    EXPECT_NEAR(std::get<double>(r.table.rows[30][4]), 1.0, 1e-11);
}

TEST(MeasurementSweep, DenseBeyondGuardThrows) {
    ScopedDimensionGuard guard(512);
    ExperimentConfig cfg(ExperimentKind::measurement_sweep);
    cfg.set("engine", "dense");
    EXPECT_THROW(run_experiment(cfg), DimensionLimitError);
}

TEST(SectorCommutator, RowsScaleAsOneOverN) {
    ExperimentConfig cfg(ExperimentKind::sector_commutator);
    cfg.set("N", "5");
    cfg.set("engine", "both");
    const RunResult r = run_experiment(cfg);
    EXPECT_EQ(r.table.columns, (std::vector<std::string>{"N", "analytic_norm", "dense_norm", "disagreement"}));
    for (const auto& row : r.table.rows) {
        const double n = static_cast<double>(std::get<std::int64_t>(row[0]));
        EXPECT_NEAR(std::get<double>(row[1]) * n, 0.5, 1e-15);
        EXPECT_NEAR(std::get<double>(row[2]) * n, 0.5, 1e-12);
    }
}

TEST(OracleCheck, DefaultGridPasses) {
    const RunResult r = run_experiment(ExperimentConfig(ExperimentKind::oracle_check));
    EXPECT_FALSE(r.disagreement_failed) << r.max_disagreement;
    for (const auto& row : r.table.rows) EXPECT_EQ(std::get<std::int64_t>(row[3]), 1);
}

TEST(Emit, CsvHeaderAndRow) {
    ResultTable t{{"n", "M", "overlap_re", "overlap_im", "overlap_abs"}, {{std::int64_t(0), std::int64_t(1), 1.0, 0.0, 1.0}}};
    EXPECT_EQ(to_csv(t), "n,M,overlap_re,overlap_im,overlap_abs\n0,1,1,0,1\n");
    EXPECT_THROW(render(ResultTable{{"n"}, {}}, OutputFormat::csv, {}), Error);
}

TEST(Emit, SeventeenDigitsRoundTripBitExactly) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double x = u(rng) * std::pow(10.0, (k % 40) - 20);
        const double back = std::strtod(format_double(x).c_str(), nullptr);
        ASSERT_EQ(std::memcmp(&x, &back, sizeof x), 0) << format_double(x);
    }
}

TEST(Emit, JsonRoundTripsRecords) {
    ExperimentConfig cfg(ExperimentKind::measurement_sweep);
    cfg.set("h_re", "0.83666002653407556");
    cfg.set("v_im", "0.54772255750516607");
    cfg.set("delta_re", "0.5");
    cfg.set("eta_im", "0.3");
    cfg.set("engine", "both");
    const RunResult r = run_experiment(cfg);
    const fs::path path = scratch("roundtrip.json");
    emit(r.table, OutputFormat::json, path.string(), cfg.echo());
    const auto doc = nlohmann::json::parse(read_file(path));
    EXPECT_EQ(doc["config"]["engine"], "both");
    EXPECT_EQ(doc["config"]["A_H"], 4);
    ASSERT_EQ(doc["records"].size(), r.table.rows.size());
    for (std::size_t row = 0; row < r.table.rows.size(); ++row) {
        for (std::size_t c = 0; c < r.table.columns.size(); ++c) {
            const auto& cell = r.table.rows[row][c];
            const auto& j = doc["records"][row][r.table.columns[c]];
            if (const double* d = std::get_if<double>(&cell)) {
                EXPECT_EQ(j.get<double>(), *d);
            } else if (const auto* i = std::get_if<std::int64_t>(&cell)) {
                EXPECT_EQ(j.get<std::int64_t>(), *i);
            }
        }
    }
}

TEST(Emit, UnwritablePath) {
    ResultTable t{{"n"}, {{std::int64_t(0)}}};
    EXPECT_THROW(emit(t, OutputFormat::csv, "/nonexistent-dir/x.csv"), IoError);
}

TEST(Cli, ExitCodes) {
    const fs::path out = scratch("cli.csv");
    EXPECT_EQ(run_cli("avalanche-sweep --set n_max=5 --set A=32 --out " + out.string()), 0);
    const auto rows = parse_csv(read_file(out));
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "M", "overlap_re", "overlap_im", "overlap_abs"}));
    EXPECT_EQ(std::strtod(rows[4][4].c_str(), nullptr), 0.8 * 0.8 * 0.8);

    EXPECT_EQ(run_cli("avalanche-sweep --set bogus=1 --out " + out.string()), 2);
    EXPECT_EQ(run_cli("no-such-kind --out " + out.string()), 2);
    EXPECT_EQ(run_cli("avalanche-sweep --config /nonexistent.cfg --out " + out.string()), 2);
    EXPECT_EQ(run_cli("measurement-sweep --set engine=dense --set A_H=16 --set A_V=16 --out " + out.string()), 3);
    EXPECT_EQ(run_cli("avalanche-sweep --out /nonexistent-dir/out.csv"), 5);
    EXPECT_EQ(run_cli("oracle-check --out " + out.string()), 0);
}

TEST(Cli, GuardEnvironmentOverride) {
    const fs::path out = scratch("guard.csv");
    EXPECT_EQ(run_cli("avalanche-sweep --set engine=dense --set A=8 --out " + out.string()), 0);
    EXPECT_EQ(run_cli("avalanche-sweep --set engine=dense --set A=8 --out " + out.string()), 0);
    const std::string cmd = "SECTORSIM_DIM_GUARD=64 " + std::string(SIMULATE_BIN) +
                            " avalanche-sweep --set engine=dense --set A=8 --out " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    EXPECT_EQ(WEXITSTATUS(status), 3);
}

TEST(Cli, ShippedConfigsAreDeterministic) {
    for (const auto& entry : fs::directory_iterator(CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        const std::string kind = entry.path().stem().string();
        for (const std::string fmt : {"csv", "json"}) {
            const fs::path a = scratch(kind + "_a." + fmt);
            const fs::path b = scratch(kind + "_b." + fmt);
            const std::string args = kind + " --config " + entry.path().string() + " --format " + fmt + " --out ";
            ASSERT_EQ(run_cli(args + a.string()), 0) << kind;
            ASSERT_EQ(run_cli(args + b.string()), 0) << kind;
            EXPECT_EQ(read_file(a), read_file(b)) << kind;
        }
    }
}
