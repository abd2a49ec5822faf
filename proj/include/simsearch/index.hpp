#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "simsearch/metric.hpp"
#include "simsearch/random.hpp"

namespace simsearch {

using QuerySampler = std::function<Point(Rng&)>;

/// A similarity workload: query domain and measure, a query distribution given
/// as a seeded sampler, and the finite dataset.
struct Workload {
    DissimilarityMeasure measure;
    std::vector<Point> dataset;
    QuerySampler sampler;  // optional

    /// Throws InvalidArgument for an empty dataset and DomainError for a point
    /// that does not fit the measure.
    void validate() const;
    Point sample_query(Rng& rng) const;
};

Workload make_workload(DissimilarityMeasure measure, std::vector<Point> dataset, QuerySampler sampler = {});

/// Bounds a <= f(x) <= b for the 1-Lipschitz function f = ρ(v, ·) over a node's block.
struct NodeCertificate {
    std::size_t vantage;  // dataset id of v
    double lower;
    double upper;
};

struct IndexNode {
    std::vector<std::size_t> block;  // ascending dataset ids
    std::optional<NodeCertificate> certificate;  // every node except the root
    std::optional<std::size_t> vantage;          // internal nodes: v whose distance certifies the children
    std::vector<std::size_t> children;
    std::optional<std::size_t> parent;

    bool is_leaf() const noexcept { return children.empty(); }
};

enum class VantagePolicy { max_spread, random, first };

struct BuildConfig {
    std::size_t leaf_capacity = 8;
    std::size_t branching = 2;
    VantagePolicy policy = VantagePolicy::max_spread;
    std::uint64_t seed = 0;
    std::size_t validation_sample = 24;  // points checked against the metric axioms before building
};

/// Hierarchical tree index: the root block is the whole dataset and the children
/// of every node partition its block. Immutable once built.
class IndexTree {
public:
    const std::vector<IndexNode>& nodes() const noexcept { return nodes_; }
    const IndexNode& node(std::size_t id) const { return nodes_.at(id); }
    const Workload& workload() const noexcept { return *workload_; }
    const BuildConfig& config() const noexcept { return config_; }
    std::size_t height() const;

private:
    friend IndexTree build_vp_tree(const Workload&, const BuildConfig&);
    friend IndexTree load_index(std::istream&, const Workload&);

    std::shared_ptr<const Workload> workload_;
    BuildConfig config_;
    std::vector<IndexNode> nodes_;
};

/// Builds a vantage-point tree. Throws NonMetricError (with a witness) when the
/// measure fails the triangle inequality on a sample of the dataset.
IndexTree build_vp_tree(const Workload& workload, const BuildConfig& config = {});

struct QueryStats {
    std::size_t nodes_visited = 0;
    std::size_t nodes_pruned = 0;
    std::size_t distance_evaluations = 0;

    QueryStats& operator+=(const QueryStats& other) noexcept;
};

struct RangeResult {
    std::vector<std::size_t> ids;    // ascending
    std::vector<double> distances;   // ρ(x, centre), aligned with ids
    QueryStats stats;
    std::vector<std::size_t> pruned;  // tree nodes whose subtree was cut off
};

/// All x in X with ρ(x, centre) < epsilon.
RangeResult range_query(const IndexTree& tree, const Point& centre, double epsilon);

/// Exhaustive evaluation of the same query.
RangeResult linear_range_scan(const Workload& workload, const Point& centre, double epsilon);

struct Neighbour {
    std::size_t id;
    double distance;

    friend bool operator==(const Neighbour&, const Neighbour&) = default;
};

struct KnnResult {
    std::vector<Neighbour> neighbours;  // by (distance, id)
    QueryStats stats;
    std::size_t range_queries = 0;
};

/// The k points of X \ {centre} closest to centre, ties broken by ascending id,
/// found by a doubling-then-shrinking schedule of range queries.
KnnResult knn_query(const IndexTree& tree, const Point& centre, std::size_t k, std::uint64_t seed = 0);

/// min over a in block of ρ(x, a).
double exact_set_distance(std::span<const std::size_t> block, const Point& x, const Workload& workload);

/// Structured-text dump of the tree; bounds are written in shortest round-trip form.
void save_index(std::ostream& out, const IndexTree& tree);
/// Reads a dump written by save_index and attaches it to `workload`, which must
/// carry the same measure and dataset size.
IndexTree load_index(std::istream& in, const Workload& workload);

}  // namespace simsearch
