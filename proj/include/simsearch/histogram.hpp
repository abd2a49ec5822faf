#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "simsearch/metric.hpp"

namespace simsearch {

/// A finite metric space C = {c_1, ..., c_n} with its distance table.
class GroundSpace {
public:
    /// Validates zero diagonal, symmetry and the triangle inequality.
    GroundSpace(std::vector<Point> elements, std::vector<double> distances, std::string id = {});

    static GroundSpace from_points(std::vector<Point> elements, const DissimilarityMeasure& measure,
                                   std::string id = {});

    std::size_t size() const noexcept { return elements_.size(); }
    double distance(std::size_t i, std::size_t j) const noexcept { return distances_[i * size() + j]; }
    const std::vector<Point>& elements() const noexcept { return elements_; }
    const std::vector<double>& distances() const noexcept { return distances_; }
    double max_distance() const noexcept { return max_distance_; }
    const std::string& id() const noexcept { return id_; }

private:
    std::vector<Point> elements_;
    std::vector<double> distances_;
    double max_distance_ = 0.0;
    std::string id_;
};

/// A probability vector over a ground space: nonnegative weights summing to one.
class Histogram {
public:
    /// Throws InvalidArgument unless all weights are >= 0 and sum to 1 within 1e-9.
    explicit Histogram(std::vector<double> weights);

    static Histogram point_mass(std::size_t n, std::size_t at);
    static Histogram uniform(std::size_t n);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const noexcept { return weights_[i]; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// t * a + (1 - t) * b, for t in [0, 1].
    static Histogram mix(double t, const Histogram& a, const Histogram& b);

private:
    std::vector<double> weights_;
};

/// Nonnegative flows λ_ij; the net divergence at i equals μ1_i - μ2_i.
struct TransportPlan {
    std::size_t n = 0;
    std::vector<double> flows;  // row-major n x n

    double flow(std::size_t i, std::size_t j) const noexcept { return flows[i * n + j]; }
    double cost(const GroundSpace& ground) const;
    /// Σ_j (λ_ij - λ_ji) for every i.
    std::vector<double> net_divergence() const;
    std::size_t arcs() const;
};

struct KantorovichResult {
    double distance = 0.0;
    TransportPlan plan;
    /// A 1-Lipschitz potential φ on C with Σ φ_i (μ1_i - μ2_i) equal to `distance`.
    std::vector<double> potential;
    double dual_value = 0.0;
};

/// Exact Kantorovich (earth mover's) distance between two histograms, solved as an
/// uncapacitated min-cost transshipment by successive shortest paths. Every call
/// checks its own dual certificate and throws Error if it does not close.
KantorovichResult kantorovich(const Histogram& mu1, const Histogram& mu2, const GroundSpace& ground);

/// Treats coordinate points as weight vectors over `ground`.
DissimilarityMeasure kantorovich_measure(const GroundSpace& ground);

// ---------------------------------------------------------------------------

enum class Norm { l2, l1, linf };

double norm_of_difference(const Coords& a, const Coords& b, Norm norm);

/// The affine extension μ -> Σ μ_i f(c_i) of a map defined on the ground elements.
class AffineMap {
public:
    AffineMap(std::vector<Coords> images, Norm norm) : images_(std::move(images)), norm_(norm) {}

    Coords operator()(const Histogram& mu) const;
    const std::vector<Coords>& images() const noexcept { return images_; }
    Norm norm() const noexcept { return norm_; }

private:
    std::vector<Coords> images_;
    Norm norm_;
};

/// Extends f: C -> (R^m, norm) affinely to P(C). f must be nonexpansive; an expansive
/// f is rejected with LipschitzError naming a witnessing pair.
AffineMap extend_map(std::vector<Coords> images, const GroundSpace& ground, Norm norm = Norm::l2);

// ---------------------------------------------------------------------------

/// Symmetric matrix positive semidefinite on zero-sum vectors.
class QuadraticForm {
public:
    explicit QuadraticForm(std::size_t n, std::vector<double> matrix);

    std::size_t size() const noexcept { return n_; }
    double at(std::size_t i, std::size_t j) const noexcept { return matrix_[i * n_ + j]; }
    /// v A v^T.
    double evaluate(std::span<const double> v) const;
    /// Smallest eigenvalue of A restricted to the zero-sum subspace.
    double min_zero_sum_eigenvalue() const noexcept { return min_eigen_; }

private:
    std::size_t n_;
    std::vector<double> matrix_;
    double min_eigen_ = 0.0;
};

/// a_ij = 1 - d_ij with d_ij = ρ(c_i, c_j) / max ρ.
QuadraticForm qbic_form(const GroundSpace& ground);

/// sqrt((μ1 - μ2) A (μ1 - μ2)^T).
double quadratic_distance(const Histogram& mu1, const Histogram& mu2, const QuadraticForm& form);

DissimilarityMeasure quadratic_measure(const QuadraticForm& form);

struct SqrtEmbedding {
    std::vector<Coords> points;
    /// True when the embedding came from the Gram matrix (1 - ρ_ij)/2, which puts
    /// every point at distance `radius` from the origin.
    bool on_sphere = false;
    double radius = 0.0;
};

/// Points x_i with |x_i - x_j| = sqrt(ρ(c_i, c_j)). Requires max ρ <= 1.
/// Throws EmbeddingError when the Gram matrix has an eigenvalue below -1e-6.
SqrtEmbedding embed_sqrt_transform(const GroundSpace& ground);

// ---------------------------------------------------------------------------

/// One line of a histogram file: `<ground-id> w_1 ... w_n`.
struct HistogramRecord {
    std::string ground_id;
    Histogram histogram;
};

/// Weights summing to within 1e-6 of one are renormalised; anything further off is a ParseError.
std::vector<HistogramRecord> read_histograms(std::istream& in);
void write_histograms(std::ostream& out, std::span<const HistogramRecord> records);

}  // namespace simsearch
