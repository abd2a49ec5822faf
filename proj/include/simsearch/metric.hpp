#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace simsearch {

using Coords = std::vector<double>;

enum class PointKind { coords, symbols };

/// A query point or dataset element. Coordinate tuples also carry histogram
/// weight vectors for measures defined over a ground space.
struct Point {
    std::variant<Coords, std::string> payload;

    Point() = default;
    Point(Coords c) : payload(std::move(c)) {}
    Point(std::initializer_list<double> c) : payload(Coords(c)) {}
    Point(std::string s) : payload(std::move(s)) {}
    Point(const char* s) : payload(std::string(s)) {}

    PointKind kind() const noexcept {
        return std::holds_alternative<Coords>(payload) ? PointKind::coords : PointKind::symbols;
    }
    const Coords& coords() const;
    const std::string& symbols() const;

    friend bool operator==(const Point&, const Point&) = default;
};

/// What a measure accepts: payload kind, fixed arity (0 = any) and, for symbol
/// strings, the alphabet (empty = any character).
struct MeasureDomain {
    PointKind kind = PointKind::coords;
    std::size_t arity = 0;
    std::string alphabet;

    /// Throws DomainError if `p` is not in the domain.
    void check(const Point& p) const;
    /// Throws DomainError unless `x` and `y` are in the domain and mutually compatible.
    void check_pair(const Point& x, const Point& y) const;
};

enum class MeasureKind { euclidean, l1, hamming, edit, kantorovich, quadratic, transformed, projected, custom };

const char* to_string(MeasureKind kind);

struct EditCosts {
    double insert_delete = 1.0;
    double substitute = 1.0;
};

struct MeasureTraits {
    bool pseudo = false;          // d(x,y)=0 with x != y is legal
    bool integer_valued = false;  // compare exactly instead of with tolerance
};

/// An evaluable distance or pseudometric over a declared domain. Immutable and
/// cheap to copy; evaluation is pure.
class DissimilarityMeasure {
public:
    using Fn = std::function<double(const Point&, const Point&)>;

    using Traits = MeasureTraits;

    DissimilarityMeasure(MeasureKind kind, std::string name, MeasureDomain domain, Fn fn, Traits traits = {},
                         std::shared_ptr<const DissimilarityMeasure> base = nullptr,
                         std::vector<std::size_t> projection = {});

    /// Evaluates after checking both points against the domain.
    double operator()(const Point& x, const Point& y) const {
        domain_.check_pair(x, y);
        return fn_(x, y);
    }
    /// Evaluates without domain checks; for inner loops over validated data.
    double unchecked(const Point& x, const Point& y) const { return fn_(x, y); }

    MeasureKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    const MeasureDomain& domain() const noexcept { return domain_; }
    bool is_pseudo() const noexcept { return traits_.pseudo; }
    bool is_integer_valued() const noexcept { return traits_.integer_valued; }
    const Traits& traits() const noexcept { return traits_; }

    /// Base measure of a transformed or projected measure, null otherwise.
    const DissimilarityMeasure* base() const noexcept { return base_.get(); }
    /// Retained coordinates of a projected measure (0-based).
    const std::vector<std::size_t>& projection() const noexcept { return projection_; }

private:
    MeasureKind kind_;
    std::string name_;
    MeasureDomain domain_;
    Fn fn_;
    Traits traits_;
    std::shared_ptr<const DissimilarityMeasure> base_;
    std::vector<std::size_t> projection_;
};

DissimilarityMeasure euclidean(std::size_t arity = 0);
DissimilarityMeasure l1(std::size_t arity = 0);
DissimilarityMeasure hamming(std::string alphabet = {});
/// Levenshtein distance with configurable insertion/deletion and substitution costs.
DissimilarityMeasure edit(std::string alphabet = {}, EditCosts costs = {});
DissimilarityMeasure custom_measure(std::string name, MeasureDomain domain, DissimilarityMeasure::Fn fn,
                                    DissimilarityMeasure::Traits traits = {});

/// ρ(x, y) with domain checks; throws DomainError on incompatible points.
inline double eval_distance(const DissimilarityMeasure& measure, const Point& x, const Point& y) {
    return measure(x, y);
}

// Real-valued comparisons use absolute 1e-9 plus relative 1e-12; integer measures compare exactly.
inline constexpr double kAbsTol = 1e-9;
inline constexpr double kRelTol = 1e-12;

bool leq_tol(double lhs, double rhs, bool exact = false);

/// Row-major n x n table of pairwise distances.
std::vector<double> distance_matrix(const DissimilarityMeasure& measure, std::span<const Point> points);

// ---------------------------------------------------------------------------
// Metric validation

enum class Axiom { nonnegativity, symmetry, identity, indiscernibles, triangle };

const char* to_string(Axiom axiom);

struct AxiomViolation {
    Axiom axiom;
    std::vector<std::size_t> witness;  // indices into the sample: a pair, or (x, y, z) with ρ(x,z) > ρ(x,y)+ρ(y,z)
    double lhs = 0;
    double rhs = 0;

    std::string describe() const;
};

struct MetricReport {
    bool ok = true;
    std::vector<AxiomViolation> violations;  // capped at kMaxViolations
    std::size_t pairs_checked = 0;
    std::size_t triples_checked = 0;

    static constexpr std::size_t kMaxViolations = 64;
};

/// Checks the metric axioms on every pair and ordered triple of `sample`.
/// Identity of indiscernibles is skipped when `pseudo_allowed`.
MetricReport validate_metric(const DissimilarityMeasure& measure, std::span<const Point> sample,
                             bool pseudo_allowed);

// ---------------------------------------------------------------------------
// Metric transforms

/// A concave non-decreasing F with F(0)=0, applied to distances.
class TransformFn {
public:
    enum class Family { identity, power, log1p, bounded, cap, custom };

    static TransformFn identity();
    static TransformFn power(double p);  // t^p, 0 < p <= 1
    static TransformFn log1p();
    static TransformFn bounded();        // t / (1 + t)
    static TransformFn cap(double c);    // min(t, c), c > 0
    static TransformFn custom(std::string name, std::function<double(double)> fn);
    /// Parses "identity", "power:0.5", "log1p", "bounded", "cap:2".
    static TransformFn parse(const std::string& spec);

    double operator()(double t) const;

    Family family() const noexcept { return family_; }
    double parameter() const noexcept { return param_; }
    std::string spec() const;
    bool strictly_increasing() const noexcept { return family_ != Family::cap && family_ != Family::custom; }

    /// Checks F(0)=0, monotonicity and midpoint concavity on a 1024-point
    /// geometric grid over [0, upper]. Throws InvalidArgument on failure.
    void validate(double upper) const;

private:
    TransformFn(Family family, double param, std::string name, std::function<double(double)> fn);

    Family family_;
    double param_;
    std::string name_;
    std::function<double(double)> fn_;
};

/// Returns the measure (x, y) -> F(ρ(x, y)). `F` is validated on a grid up to ten
/// times the largest distance observed in `sample` (or up to 10 when no sample is given).
DissimilarityMeasure metric_transform(const DissimilarityMeasure& measure, const TransformFn& F,
                                      std::span<const Point> sample = {});

// ---------------------------------------------------------------------------
// 1-Lipschitz checking

using RealFunction = std::function<double(const Point&)>;

struct LipschitzViolation {
    std::size_t pair_index;
    double variation;  // |f(x) - f(y)|
    double distance;   // ρ(x, y)
};

/// First pair with |f(x) - f(y)| > ρ(x, y) + tolerance, or nullopt when every pair passes.
std::optional<LipschitzViolation> check_one_lipschitz(const RealFunction& f, const DissimilarityMeasure& measure,
                                                      std::span<const std::pair<Point, Point>> pairs);

/// x -> ρ(v, x).
RealFunction distance_to(const DissimilarityMeasure& measure, Point vantage);

}  // namespace simsearch
