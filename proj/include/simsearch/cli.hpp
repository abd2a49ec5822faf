#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simsearch/metric.hpp"

namespace simsearch::cli {

enum class Command { ingest, build_index, query, prefilter_run, concentration, cover, colour_experiment };
enum class InputFormat { vectors, strings, histograms };

const char* to_string(Command c);
const char* to_string(InputFormat f);
/// Throws InvalidArgument for an unknown name.
Command parse_command(const std::string& name);
InputFormat parse_format(const std::string& name);

struct RunConfig {
    Command command = Command::ingest;
    std::string input;
    std::string output;   // report path; empty writes to stdout. Not part of the embedded config.
    std::optional<InputFormat> format;  // default follows the measure
    std::string measure = "euclidean";
    std::string transform = "identity";
    std::optional<double> epsilon;
    std::optional<std::size_t> k;
    std::uint64_t seed = 0;
    double spacing = 0.1;
    std::optional<std::size_t> samples;
    std::size_t leaf_capacity = 8;
    std::size_t branching = 2;
    std::vector<std::size_t> coords;  // 1-based projection coordinates
    std::string index;                // index file for build-index / query
    std::string queries;              // query file for query
    std::string method;               // concentration or cover method
    std::optional<std::size_t> dimension;
    bool timing = false;
};

/// A parsed input file.
struct Dataset {
    InputFormat format = InputFormat::vectors;
    std::vector<Point> points;
    std::string ground_id;  // histograms only
};

/// Reads `path` in the given format. Throws ParseError naming row and column for a
/// malformed row or inconsistent arity, InvalidArgument for an empty file.
Dataset ingest(const std::string& path, InputFormat format);

/// Builds the measure named by `spec` ("euclidean", "l1", "hamming[:alphabet]",
/// "edit[:alphabet]", "kantorovich", "quadratic") for the dataset, then applies `transform`.
DissimilarityMeasure resolve_measure(const std::string& spec, const std::string& transform, const Dataset& data);

struct RunResult {
    int status = 0;          // 0 on success
    std::string report;      // JSON report text (empty on failure)
    std::string diagnostic;  // message on failure
};

/// Executes one command. Never throws for library errors: they become a nonzero
/// status and a diagnostic.
RunResult run(const RunConfig& config);

/// The resolved configuration as embedded in reports, and back.
std::string config_json(const RunConfig& config);
RunConfig config_from_report(const std::string& report_text);

}  // namespace simsearch::cli
