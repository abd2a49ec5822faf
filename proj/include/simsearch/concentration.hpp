#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simsearch/index.hpp"
#include "simsearch/metric.hpp"
#include "simsearch/prefilter.hpp"

namespace simsearch {

/// A metric space with a probability measure: either finitely many weighted
/// points or a seeded sampler.
class ProbabilitySpace {
public:
    /// Weights must be nonnegative and sum to 1 within 1e-9.
    static ProbabilitySpace finite(std::vector<Point> points, std::vector<double> weights, DissimilarityMeasure measure);
    static ProbabilitySpace uniform(std::vector<Point> points, DissimilarityMeasure measure);
    static ProbabilitySpace sampled(QuerySampler sampler, DissimilarityMeasure measure);

    /// {0,1}^n as strings over "01" with Hamming distance and counting measure.
    static ProbabilitySpace hamming_cube(std::size_t n);

    bool is_finite() const noexcept { return !sampler_; }
    const DissimilarityMeasure& measure() const noexcept { return measure_; }
    const std::vector<Point>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const QuerySampler& sampler() const noexcept { return sampler_; }

    /// One draw from the measure.
    Point draw(Rng& rng) const;

    /// Finite spaces return themselves; sampled spaces return `count` draws with
    /// equal weights, drawn from the (seed, "concentration.sample") stream.
    ProbabilitySpace discretize(std::size_t count, std::uint64_t seed) const;

    /// Largest pairwise distance (finite spaces only).
    double diameter() const;

private:
    ProbabilitySpace(std::vector<Point> points, std::vector<double> weights, QuerySampler sampler,
                     DissimilarityMeasure measure);

    std::vector<Point> points_;
    std::vector<double> weights_;
    QuerySampler sampler_;
    DissimilarityMeasure measure_;
};

enum class ConcentrationMethod { exact_enumeration, hamming_isoperimetric, ball_family, lipschitz_family };

const char* to_string(ConcentrationMethod method);

/// True when the method computes α itself rather than a lower bound on it.
bool is_exact(ConcentrationMethod method) noexcept;

struct ConcentrationConfig {
    ConcentrationMethod method = ConcentrationMethod::ball_family;
    std::size_t samples = 1024;  // draws used to discretize a sampled space
    std::size_t centres = 64;    // ball centres or Lipschitz probes
    std::uint64_t seed = 0;
};

/// α(ε) = 1 - inf { μ(O_ε(A)) : μ(A) >= 1/2 } on a grid, where O_ε(A) is the open ε-neighbourhood.
struct ConcentrationEstimate {
    std::vector<double> grid;
    std::vector<double> alpha;
    ConcentrationMethod method = ConcentrationMethod::exact_enumeration;
    bool lower_bound = false;  // family methods only see part of the infimum
    std::size_t points = 0;    // size of the (discretized) space
    std::size_t family_size = 0;
    std::uint64_t seed = 0;

    /// α at ε: 1/2 at ε = 0, otherwise the value at the largest grid point <= ε
    /// (a valid upper bound on α(ε) because α is nonincreasing). Throws if ε is below the grid.
    double at(double epsilon) const;
};

inline constexpr std::size_t kEnumerationLimit = 24;

/// Throws InvalidArgument for a grid that is not positive and increasing, or for an
/// exact method on a space it cannot handle.
ConcentrationEstimate estimate_concentration(const ProbabilitySpace& space, std::span<const double> grid,
                                             const ConcentrationConfig& config = {});

/// 32 geometric steps spanning [diameter/100, diameter].
std::vector<double> default_grid(double diameter, std::size_t steps = 32);

struct MedianCheck {
    double median = 0.0;
    double mass = 0.0;   // μ{ M - ε < f < M + ε }
    double bound = 0.0;  // 1 - 2 α(ε)
    bool satisfied = false;
    bool asserted = false;  // only exact α makes the bound a theorem
};

/// Lower median of f under μ: the least v with μ(f <= v) >= 1/2.
double lower_median(const ProbabilitySpace& space, const RealFunction& f);

/// Throws LipschitzError (with the offending pair) when f is not 1-Lipschitz on the
/// checked pairs: every pair of a finite space up to 200 points, otherwise 10^4 sampled pairs.
/// Sampled spaces are discretized with `samples` draws.
MedianCheck median_concentration_check(const ProbabilitySpace& space, const RealFunction& f, double epsilon,
                                       const ConcentrationEstimate& alpha, std::size_t samples = 1 << 16,
                                       std::uint64_t seed = 0);

enum class CoverMethod { greedy_upper, exact_small };

const char* to_string(CoverMethod method);

struct CoverReport {
    double epsilon = 0.0;
    std::size_t n = 0;
    double entropy = 0.0;  // log2 N
    CoverMethod method = CoverMethod::greedy_upper;
    std::vector<std::size_t> centres;
};

struct CoverConfig {
    std::optional<CoverMethod> method;  // default: exact up to exact_limit points, greedy beyond
    std::size_t exact_limit = 20;
};

/// Open ε-balls centred on the points. Greedy farthest-point traversal from
/// point 0 gives an upper bound; branch and bound gives the minimum.
CoverReport covering_number(std::span<const Point> points, const DissimilarityMeasure& measure, double epsilon,
                            const CoverConfig& config = {});

struct BlowupConfig {
    std::size_t queries = 32;       // candidate x*
    std::size_t samples = 100000;   // draws estimating μ
    std::size_t cover_samples = 2000;
    std::size_t alpha_samples = 512;
    std::uint64_t seed = 0;
};

struct BlowupReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double worst_mass = 0.0;       // max over x* of μ(O_δ(x*)) under d
    double true_ball_mass = 0.0;   // μ(O_ε(x*)) under ρ at the same x*
    Point worst_query;
    CoverReport cover;              // (Ω, d) at ε/3
    ConcentrationEstimate alpha;    // (Ω, ρ) at ε, family lower bound
    ModulusAudit audit;
};

/// Side-by-side measurement of the mass captured by a δ-ball under the cheap
/// measure, the covering number of (Ω, d) at ε/3, and α̂ of (Ω, ρ).
/// Requires ρ < ε/3 ⇒ d < δ/3: the modulus must satisfy δ(ε/3) <= δ/3 and pass its audit.
BlowupReport blowup_experiment(const ProbabilitySpace& space, const ApproxMeasure& approx, double epsilon,
                               double delta, const BlowupConfig& config = {});

}  // namespace simsearch
