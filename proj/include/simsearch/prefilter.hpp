#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simsearch/index.hpp"
#include "simsearch/metric.hpp"

namespace simsearch {

/// A cheaper measure d standing in for ρ, with the radius modulus
/// δ(ε) = slope·ε + intercept such that ρ(x,y) < ε implies d(x,y) < δ(ε).
struct ApproxMeasure {
    DissimilarityMeasure d;
    double slope = 1.0;
    double intercept = 0.0;
    std::string label;

    double delta(double epsilon) const noexcept { return slope * epsilon + intercept; }
};

/// d = ρ, δ(ε) = ε.
ApproxMeasure exact_approx(const DissimilarityMeasure& rho);

/// Euclidean distance of the retained coordinates (0-based). d <= ρ, so δ(ε) = ε.
/// `base` must be a Euclidean measure of fixed arity N and every coordinate < N.
ApproxMeasure project_measure(const DissimilarityMeasure& base, std::vector<std::size_t> coords);

/// d = F(ρ) for a transform with F(t) <= t (identity, log1p, bounded, cap), so δ(ε) = ε.
ApproxMeasure transformed_approx(const DissimilarityMeasure& rho, const TransformFn& F);

/// Swaps between l1 and Euclidean of fixed arity N: Euclidean for l1 with δ(ε) = ε,
/// l1 for Euclidean with δ(ε) = √N·ε.
ApproxMeasure norm_approx(const DissimilarityMeasure& rho);

struct ModulusAudit {
    std::size_t pairs_checked = 0;
    double worst_excess = 0.0;  // max over pairs of d - (slope·ρ + intercept); <= tolerance when sound
};

/// Checks d(x,y) <= slope·ρ(x,y) + intercept (within tolerance; strictly below the
/// intercept when slope = 0) on `sample_pairs` pairs drawn from the query sampler
/// (or the dataset when there is none), plus every dataset pair when |X| <= 200.
/// Throws ModulusError naming the offending pair.
ModulusAudit audit_modulus(const Workload& workload, const ApproxMeasure& approx, std::uint64_t seed = 0,
                           std::size_t sample_pairs = 10000);

struct PipelineStats {
    std::size_t candidates = 0;
    std::size_t verified = 0;
    std::size_t false_hits = 0;
    std::size_t d_evaluations = 0;
    std::size_t rho_evaluations = 0;
    bool used_index = false;
    double delta = 0.0;             // δ(ε)
    double candidate_radius = 0.0;  // δ(ε) widened by the audit tolerance

    double false_hit_rate() const noexcept {
        return static_cast<double>(false_hits) / static_cast<double>(candidates == 0 ? 1 : candidates);
    }
};

struct FilteredResult {
    std::vector<std::size_t> ids;  // ascending
    PipelineStats stats;
};

/// Audited replace-the-distance pipeline over one workload. Candidate
/// generation uses a tree index over d when one was requested, otherwise a
/// linear scan under d.
class PrefilterPipeline {
public:
    struct Options {
        std::uint64_t seed = 0;
        std::size_t audit_pairs = 10000;
        bool build_index = false;
        BuildConfig index_config{};
    };

    /// Throws ModulusError when the audit finds a pair violating the modulus.
    PrefilterPipeline(const Workload& workload, ApproxMeasure approx, Options options);
    PrefilterPipeline(const Workload& workload, ApproxMeasure approx);

    const Workload& workload() const noexcept { return *rho_; }
    const ApproxMeasure& approx() const noexcept { return approx_; }
    const ModulusAudit& audit() const noexcept { return audit_; }
    bool has_index() const noexcept { return index_.has_value(); }

private:
    friend FilteredResult filtered_range_query(const PrefilterPipeline&, const Point&, double);

    std::shared_ptr<const Workload> rho_;
    Workload d_workload_;
    ApproxMeasure approx_;
    ModulusAudit audit_;
    std::optional<IndexTree> index_;
};

/// Exact ρ-range query answered through the pipeline.
FilteredResult filtered_range_query(const PrefilterPipeline& pipeline, const Point& centre, double epsilon);

struct FalseHitRecord {
    std::size_t query_id;
    double epsilon;
    double delta;
    std::size_t candidates;
    std::size_t false_hits;
    double rate;
};

struct FalseHitProfile {
    std::vector<FalseHitRecord> records;
    double max_rate = 0.0;
    double mean_rate = 0.0;
    std::size_t worst_query = 0;     // record index achieving max_rate (first on ties)
    Point worst_centre;
    double max_candidate_fraction = 0.0;  // largest candidates / |X| over the queries
};

/// Runs `query_count` queries drawn from the workload's sampler, query i using
/// the sub-stream (seed, "prefilter.query", i).
FalseHitProfile false_hit_profile(const PrefilterPipeline& pipeline, double epsilon, std::size_t query_count,
                                  std::uint64_t seed);

}  // namespace simsearch
