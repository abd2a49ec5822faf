#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "simsearch/cli.hpp"
#include "simsearch/errors.hpp"

namespace cli = simsearch::cli;

namespace {

constexpr int kUsageError = 2;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Similarity search over dissimilarity spaces"};
    app.set_version_flag("--version", "simsearch 1.0");

    std::string command, format, replay;
    cli::RunConfig c;
    std::optional<double> epsilon;
    std::optional<std::size_t> k, samples, dimension;

    app.add_option("--command", command,
                   "ingest | build-index | query | prefilter-run | concentration | cover | colour-experiment");
    app.add_option("--input", c.input, "Data file");
    app.add_option("--output", c.output, "Report path (default: stdout)");
    app.add_option("--format", format, "vectors-delimited | strings-lines | histograms (default follows --measure)");
    app.add_option("--measure", c.measure, "euclidean | l1 | hamming[:alphabet] | edit[:alphabet] | kantorovich | quadratic")
        ->capture_default_str();
    app.add_option("--transform", c.transform, "identity | power:p | log1p | bounded | cap:c")->capture_default_str();
    app.add_option("--epsilon", epsilon, "Range radius / concentration or cover scale");
    app.add_option("--k", k, "Neighbours for query; query count for prefilter-run; pixels for colour-experiment");
    app.add_option("--seed", c.seed, "Root seed")->capture_default_str();
    app.add_option("--spacing", c.spacing, "Colour lattice spacing (1/spacing must be an integer)")->capture_default_str();
    app.add_option("--samples", samples, "Sample count");
    app.add_option("--leaf-capacity", c.leaf_capacity, "Index leaf capacity")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--branching", c.branching, "Index branching factor")->capture_default_str()->check(CLI::Range(2, 1 << 16));
    app.add_option("--coords", c.coords, "1-based coordinates kept by the projection approximation")->delimiter(',');
    app.add_option("--index", c.index, "Index file written by build-index, read by query");
    app.add_option("--queries", c.queries, "Query points for query (default: the dataset itself)");
    app.add_option("--method", c.method, "concentration: exact | isoperimetric | ball | lipschitz; cover: greedy | exact");
    app.add_option("--dimension", dimension, "Synthetic cube dimension when no --input is given");
    app.add_flag("--timing", c.timing, "Embed wall-clock timing in the report");
    app.add_option("--replay", replay, "Re-run the configuration embedded in a previous report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        if (!replay.empty()) {
            const auto text = read_file(replay);
            if (!text) throw simsearch::InvalidArgument("cannot open report '" + replay + "'");
            const std::string output = c.output;
            c = cli::config_from_report(*text);
            c.output = output;
        } else {
            if (command.empty()) throw simsearch::InvalidArgument("--command is required");
            c.command = cli::parse_command(command);
            if (!format.empty()) c.format = cli::parse_format(format);
            c.epsilon = epsilon;
            c.k = k;
            c.samples = samples;
            c.dimension = dimension;
        }
    } catch (const simsearch::Error& e) {
        std::cerr << "simsearch: " << e.what() << "\n";
        return kUsageError;
    }

    const cli::RunResult r = cli::run(c);
    if (r.status != 0) {
        std::cerr << "simsearch: " << r.diagnostic << "\n";
        return r.status;
    }
    if (c.output.empty()) {
        std::cout << r.report;
    } else {
        std::ofstream out(c.output, std::ios::binary);
        out << r.report;
        if (!out) {
            std::cerr << "simsearch: cannot write report to '" << c.output << "'\n";
            return 1;
        }
    }
    return 0;
}
