#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "simsearch/histogram.hpp"
#include "simsearch/random.hpp"

namespace simsearch {

/// Equilateral colour triangle with side 1: R = (0, 0), G = (1, 0), B = (1/2, √3/2).
struct ColourSpace {
    Coords red{0.0, 0.0};
    Coords green{1.0, 0.0};
    Coords blue;

    ColourSpace();
    Coords centroid() const;
    /// Barycentric coordinates (λ_R, λ_G, λ_B) of a planar point.
    std::vector<double> barycentric(const Coords& p) const;
    bool contains(const Coords& p, double tol = 1e-12) const;
};

/// Triangular grid R + i·h·(G - R) + j·h·(B - R), i, j >= 0, i + j <= 1/h,
/// with the Euclidean ground metric.
class ColourLattice {
public:
    /// 1/spacing must be a positive integer (within 1e-9).
    explicit ColourLattice(double spacing);

    double spacing() const noexcept { return spacing_; }
    std::size_t divisions() const noexcept { return m_; }
    std::size_t size() const noexcept { return points_.size(); }
    const std::vector<Coords>& points() const noexcept { return points_; }
    const GroundSpace& ground() const noexcept { return ground_; }
    const ColourSpace& space() const noexcept { return space_; }

    /// Lattice ids of the three vertices.
    std::size_t red() const noexcept { return 0; }
    std::size_t green() const noexcept;
    std::size_t blue() const noexcept { return size() - 1; }

private:
    double spacing_;
    std::size_t m_;
    ColourSpace space_;
    std::vector<Coords> points_;
    GroundSpace ground_;
};

ColourLattice build_lattice(double spacing);

/// A picture function {1..k} -> lattice, as lattice ids.
struct Image {
    std::vector<std::size_t> pixels;

    std::size_t k() const noexcept { return pixels.size(); }
    friend bool operator==(const Image&, const Image&) = default;
};

/// (1/k) Σ ρ_C(x_i, y_i). Throws DomainError for unequal lengths or invalid ids.
double image_metric(const Image& x, const Image& y, const ColourLattice& lattice);

/// Uniform independent pixels; image i uses the sub-stream (seed, "colour.image", i).
std::vector<Image> sample_images(const ColourLattice& lattice, std::size_t k, std::size_t count, std::uint64_t seed);
Image sample_image(const ColourLattice& lattice, std::size_t k, std::uint64_t seed, std::size_t index);

/// Colour histogram: weight of c = (pixels equal to c) / k.
Histogram histogram_map(const Image& x, const ColourLattice& lattice);

/// Barycentre Σ λ_c · c of a histogram over the lattice.
Coords average_colour(const Histogram& h, const ColourLattice& lattice);

struct BallAreaRatio {
    double value = 0.0;
    double standard_error = 0.0;
    bool closed_form = true;
    std::size_t samples = 0;
};

/// area(disc of radius ε about the centroid ∩ triangle) / area(triangle). Closed
/// form when the disc is inside the triangle or contains it, Monte Carlo otherwise.
BallAreaRatio ball_area_ratio(double epsilon, std::uint64_t seed = 0, std::size_t samples = 1000000);

struct ColourExperiment {
    std::size_t k = 0;
    double epsilon = 0.0;
    double spacing = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    Coords centre;                    // average colour of the query histogram
    double measured_mass = 0.0;       // fraction of images with ‖avg - centre‖ < ε
    double mass_standard_error = 0.0;
    double blowup_bound = 0.0;         // 1 - 2 exp(-ε² k / 8)
    BallAreaRatio ball_area;
    double concentration_bound = 0.0; // exp(-ε² k / 4) / 2
};

/// Query centre: the uniform histogram on the lattice, whose average colour is the centroid.
ColourExperiment qbic_blowup_experiment(const ColourLattice& lattice, std::size_t k, double epsilon,
                                        std::size_t sample_count, std::uint64_t seed);

}  // namespace simsearch
