#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "simsearch/cli.hpp"
#include "simsearch/errors.hpp"

using namespace simsearch;
using namespace simsearch::cli;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("simsearch_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& contents) const {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << contents;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static Json ok(const RunConfig& c) {
        const RunResult r = run(c);
        EXPECT_EQ(r.status, 0) << r.diagnostic;
        return r.status == 0 ? Json::parse(r.report) : Json();
    }

    std::string random_vectors(const std::string& name, std::size_t n, std::size_t dim, std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::ostringstream ss;
        ss.precision(17);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dim; ++j) ss << (j ? "," : "") << u(rng);
            ss << "\n";
        }
        return file(name, ss.str());
    }

    fs::path dir_;
};

}  // namespace

TEST(CliNames, RoundTrip) {
    for (auto c : {Command::ingest, Command::build_index, Command::query, Command::prefilter_run,
                   Command::concentration, Command::cover, Command::colour_experiment}) {
        EXPECT_EQ(parse_command(to_string(c)), c);
    }
    for (auto f : {InputFormat::vectors, InputFormat::strings, InputFormat::histograms}) {
        EXPECT_EQ(parse_format(to_string(f)), f);
    }
    EXPECT_THROW(parse_command("search"), InvalidArgument);
    EXPECT_THROW(parse_format("csv"), InvalidArgument);
}

TEST_F(CliTest, IngestThreeRowFile) {
    const Dataset d = ingest(file("a.csv", "1,2\n3,4\n5,6\n"), InputFormat::vectors);
    ASSERT_EQ(d.points.size(), 3u);
    EXPECT_EQ(d.points[0].coords(), (Coords{1, 2}));
    EXPECT_EQ(d.points[2].coords(), (Coords{5, 6}));
}

TEST_F(CliTest, IngestDelimitersAndBlankLines) {
    const Dataset d = ingest(file("a.txt", "1 2\n\n3;4\r\n# note\n5\t6\n"), InputFormat::vectors);
    ASSERT_EQ(d.points.size(), 3u);
    EXPECT_EQ(d.points[1].coords(), (Coords{3, 4}));
}

TEST_F(CliTest, IngestEmptyFileFails) {
    EXPECT_THROW(ingest(file("e.csv", ""), InputFormat::vectors), InvalidArgument);
    EXPECT_THROW(ingest(path("missing.csv"), InputFormat::vectors), InvalidArgument);
}

TEST_F(CliTest, IngestMalformedRowNamesRowAndColumn) {
    try {
        ingest(file("b.csv", "1,2\n3,4\n5,oops\n"), InputFormat::vectors);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_EQ(e.column(), 2u);
    }
    EXPECT_THROW(ingest(file("c.csv", "1,2\n3,\n"), InputFormat::vectors), ParseError);
    EXPECT_THROW(ingest(file("d.csv", "1,nan\n"), InputFormat::vectors), ParseError);
}

TEST_F(CliTest, IngestInconsistentArity) {
    try {
        ingest(file("b.csv", "1,2\n3,4,5\n"), InputFormat::vectors);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
    }
}

TEST_F(CliTest, IngestStringsAndHistograms) {
    const Dataset s = ingest(file("s.txt", "abc\nab\n\n"), InputFormat::strings);
    ASSERT_EQ(s.points.size(), 3u);
    EXPECT_EQ(s.points[2].symbols(), "");

    const std::string good = "lattice:0.5 0.5 0.5 0 0 0 0\nlattice:0.5 0 0 0 0 0 1\n";
    const Dataset h = ingest(file("h.txt", good), InputFormat::histograms);
    EXPECT_EQ(h.points.size(), 2u);
    EXPECT_EQ(h.ground_id, "lattice:0.5");
    EXPECT_THROW(ingest(file("bad.txt", "lattice:0.5 0.5 0.4 0 0 0 0\n"), InputFormat::histograms), Error);
}

TEST_F(CliTest, ResolveMeasureChecksCompatibility) {
    const Dataset v = ingest(file("a.csv", "1,2\n3,4\n"), InputFormat::vectors);
    EXPECT_EQ(resolve_measure("euclidean", "identity", v)(v.points[0], v.points[1]), std::sqrt(8.0));
    EXPECT_EQ(resolve_measure("l1", "identity", v)(v.points[0], v.points[1]), 4.0);
    EXPECT_THROW(resolve_measure("edit", "identity", v), DomainError);
    EXPECT_THROW(resolve_measure("cosine", "identity", v), InvalidArgument);
    EXPECT_DOUBLE_EQ(resolve_measure("euclidean", "cap:1", v)(v.points[0], v.points[1]), 1.0);

    const Dataset s = ingest(file("s.txt", "abba\nbaba\n"), InputFormat::strings);
    EXPECT_EQ(resolve_measure("hamming:ab", "identity", s)(s.points[0], s.points[1]), 2.0);
    EXPECT_THROW(resolve_measure("hamming:xy", "identity", s), DomainError);

    const Dataset h = ingest(file("h.txt", "lattice:0.5 1 0 0 0 0 0\nlattice:0.5 0 0 1 0 0 0\n"),
                             InputFormat::histograms);
    EXPECT_NEAR(resolve_measure("kantorovich", "identity", h)(h.points[0], h.points[1]), 1.0, 1e-12);
    const Dataset wrong = ingest(file("w.txt", "lattice:0.5 1 0 0\n"), InputFormat::histograms);
    EXPECT_THROW(resolve_measure("kantorovich", "identity", wrong), DomainError);
}

TEST_F(CliTest, QueryMatchesLinearScan) {
    RunConfig c;
    c.command = Command::query;
    c.input = file("a.csv", "0,0\n0.3,0\n1,1\n");
    c.epsilon = 0.5;
    const Json r = ok(c);
    const auto& qs = r["results"]["queries"];
    ASSERT_EQ(qs.size(), 3u);
    const Dataset d = ingest(c.input, InputFormat::vectors);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(qs[i]["range"]["ids"].get<std::vector<std::size_t>>(),
                  oracle::scan_range(euclidean(2), d.points, d.points[i], 0.5));
    }
    EXPECT_EQ(qs[0]["range"]["ids"].get<std::vector<std::size_t>>(), (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(r["results"]["totals"]["linear_scan_agrees"].get<bool>());
}

TEST_F(CliTest, QueryFileAndKnnAgainstOracle) {
    RunConfig c;
    c.command = Command::query;
    c.input = random_vectors("d.csv", 300, 4, 1);
    c.queries = random_vectors("q.csv", 20, 4, 2);
    c.k = 5;
    c.epsilon = 0.8;
    const Json r = ok(c);
    const Dataset d = ingest(c.input, InputFormat::vectors);
    const Dataset q = ingest(c.queries, InputFormat::vectors);
    const auto& qs = r["results"]["queries"];
    ASSERT_EQ(qs.size(), 20u);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
        const auto want = oracle::scan_knn(euclidean(4), d.points, q.points[i], 5);
        const auto& got = qs[i]["knn"]["neighbours"];
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t j = 0; j < want.size(); ++j) {
            EXPECT_EQ(got[j]["id"].get<std::size_t>(), want[j].first);
            EXPECT_EQ(got[j]["distance"].get<double>(), want[j].second);
        }
        EXPECT_EQ(qs[i]["range"]["ids"].get<std::vector<std::size_t>>(),
                  oracle::scan_range(euclidean(4), d.points, q.points[i], 0.8));
    }
    c.queries = file("bad.csv", "1,2\n");
    EXPECT_NE(run(c).status, 0);
}

TEST_F(CliTest, PersistedIndexGivesIdenticalResultsAndStats) {
    RunConfig b;
    b.command = Command::build_index;
    b.input = random_vectors("d.csv", 400, 3, 5);
    b.index = path("d.idx");
    b.leaf_capacity = 4;
    b.branching = 3;
    ok(b);
    ASSERT_TRUE(fs::exists(b.index));

    RunConfig q = b;
    q.command = Command::query;
    q.epsilon = 0.4;
    q.k = 3;
    const Json loaded = ok(q);
    q.index.clear();
    const Json built = ok(q);
    EXPECT_EQ(loaded["results"]["index_source"], "loaded");
    EXPECT_EQ(built["results"]["index_source"], "built");
    EXPECT_EQ(loaded["results"]["queries"], built["results"]["queries"]);
    EXPECT_EQ(loaded["results"]["totals"], built["results"]["totals"]);
    EXPECT_EQ(loaded["results"]["tree"], built["results"]["tree"]);
}

TEST_F(CliTest, IndexForOtherDatasetIsRejected) {
    RunConfig b;
    b.command = Command::build_index;
    b.input = random_vectors("d.csv", 50, 3, 5);
    b.index = path("d.idx");
    ok(b);
    RunConfig q;
    q.command = Command::query;
    q.input = random_vectors("e.csv", 60, 3, 6);
    q.index = b.index;
    q.epsilon = 0.1;
    const RunResult r = run(q);
    EXPECT_EQ(r.status, 1);
    EXPECT_FALSE(r.diagnostic.empty());
}

TEST_F(CliTest, InputsAreNeverModified) {
    const std::string in = random_vectors("d.csv", 50, 2, 3);
    const std::string before = slurp(in);
    RunConfig b;
    b.command = Command::build_index;
    b.input = in;
    b.index = in;
    EXPECT_EQ(run(b).status, 1);
    RunConfig c;
    c.command = Command::ingest;
    c.input = in;
    c.output = in;
    EXPECT_EQ(run(c).status, 1);
    EXPECT_EQ(slurp(in), before);
}

TEST_F(CliTest, ValidationFailuresAreDiagnosed) {
    RunConfig c;
    c.command = Command::query;
    c.input = file("a.csv", "1,2\n");
    RunResult r = run(c);  // neither ε nor k
    EXPECT_EQ(r.status, 1);
    EXPECT_TRUE(r.report.empty());
    c.epsilon = 1.0;
    c.format = InputFormat::vectors;
    c.measure = "edit";
    EXPECT_EQ(run(c).status, 1);
    c.measure = "euclidean";
    c.branching = 1;
    EXPECT_EQ(run(c).status, 1);

    RunConfig col;
    col.command = Command::colour_experiment;
    col.spacing = 0.3;
    EXPECT_EQ(run(col).status, 1);
}

TEST_F(CliTest, PrefilterRunReportsRecords) {
    RunConfig c;
    c.command = Command::prefilter_run;
    c.dimension = 20;
    c.samples = 500;
    c.coords = {1};
    c.epsilon = 0.5;
    c.k = 10;
    c.seed = 4;
    const Json r = ok(c)["results"];
    ASSERT_EQ(r["records"].size(), 10u);
    std::size_t false_hits = 0;
    for (const auto& rec : r["records"]) {
        EXPECT_EQ(rec["epsilon"].get<double>(), 0.5);
        EXPECT_LE(rec["false_hits"].get<std::size_t>(), rec["candidates"].get<std::size_t>());
        false_hits += rec["false_hits"].get<std::size_t>();
    }
    EXPECT_GT(false_hits, 0u);
    EXPECT_LE(r["audit"]["worst_excess"].get<double>(), 0.0);

    c.coords = {0};
    EXPECT_EQ(run(c).status, 1);
}

TEST_F(CliTest, ConcentrationReportFields) {
    RunConfig c;
    c.command = Command::concentration;
    c.measure = "hamming";
    c.dimension = 4;
    const Json r = ok(c)["results"];
    EXPECT_EQ(r["method"], "exact-enumeration");
    for (const char* key : {"method", "seed", "grid", "values", "sample_sizes"}) EXPECT_TRUE(r.contains(key)) << key;
    const auto grid = r["grid"].get<std::vector<double>>();
    const auto values = r["values"].get<std::vector<double>>();
    ASSERT_EQ(grid.size(), values.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] > 4.0) {
            EXPECT_EQ(values[i], 0.0);
        }
        if (i > 0) {
            EXPECT_LE(values[i], values[i - 1]);
        }
    }

    c.method = "isoperimetric";
    c.epsilon = 2.0;
    EXPECT_NEAR(ok(c)["results"]["values"][0].get<double>(), 1.0 - 14.0 / 16.0, 1e-12);
    c.method = "volume";
    EXPECT_EQ(run(c).status, 1);
}

TEST_F(CliTest, CoverReport) {
    RunConfig c;
    c.command = Command::cover;
    c.input = file("a.csv", "0\n1\n2\n3\n4\n");
    c.epsilon = 1.5;
    c.method = "exact";
    const Json r = ok(c)["results"];
    EXPECT_EQ(r["n"], 2);
    EXPECT_EQ(r["method"], "exact-small");
    EXPECT_DOUBLE_EQ(r["entropy"].get<double>(), 1.0);
}

TEST_F(CliTest, ColourExperimentIsByteIdentical) {
    RunConfig c;
    c.command = Command::colour_experiment;
    c.k = 10000;
    c.epsilon = 0.1;
    c.seed = 7;
    c.samples = 500;
    const RunResult a = run(c), b = run(c);
    ASSERT_EQ(a.status, 0) << a.diagnostic;
    EXPECT_EQ(a.report, b.report);
    const Json r = Json::parse(a.report)["results"];
    EXPECT_GE(r["measured_mass"].get<double>(), 0.999);
    EXPECT_LE(r["ball_area_ratio"].get<double>(), 0.073);
}

TEST_F(CliTest, ReplayFromEmbeddedConfigIsByteIdentical) {
    const std::string data = random_vectors("d.csv", 120, 3, 9);
    std::vector<RunConfig> configs;
    RunConfig c;
    c.command = Command::ingest;
    c.input = data;
    configs.push_back(c);
    c.command = Command::query;
    c.epsilon = 0.5;
    c.k = 2;
    c.seed = 3;
    configs.push_back(c);
    c.command = Command::prefilter_run;
    c.coords = {2, 3};
    c.k = 5;
    configs.push_back(c);
    c.coords.clear();
    c.transform = "log1p";
    configs.push_back(c);
    c = RunConfig{};
    c.command = Command::concentration;
    c.dimension = 3;
    c.samples = 128;
    c.method = "lipschitz";
    c.seed = 11;
    configs.push_back(c);
    c = RunConfig{};
    c.command = Command::cover;
    c.input = data;
    c.epsilon = 0.7;
    configs.push_back(c);
    c = RunConfig{};
    c.command = Command::colour_experiment;
    c.k = 100;
    c.samples = 200;
    c.spacing = 0.25;
    c.epsilon = 0.05;
    configs.push_back(c);

    for (const auto& cfg : configs) {
        const RunResult first = run(cfg);
        ASSERT_EQ(first.status, 0) << to_string(cfg.command) << ": " << first.diagnostic;
        const RunConfig again = config_from_report(first.report);
        EXPECT_EQ(config_json(again), config_json(cfg));
        EXPECT_EQ(run(again).report, first.report) << to_string(cfg.command);
    }
}

TEST_F(CliTest, TimingIsOptIn) {
    RunConfig c;
    c.command = Command::ingest;
    c.input = file("a.csv", "1\n");
    EXPECT_FALSE(ok(c).contains("timing"));
    c.timing = true;
    const Json r = ok(c);
    ASSERT_TRUE(r.contains("timing"));
    EXPECT_GE(r["timing"]["wall_seconds"].get<double>(), 0.0);
}

TEST(CliConfig, MalformedReportsAreRejected) {
    EXPECT_THROW(config_from_report("not json"), InvalidArgument);
    EXPECT_THROW(config_from_report("{}"), InvalidArgument);
    EXPECT_THROW(config_from_report(R"({"config": {"command": "ingest"}})"), InvalidArgument);
}
