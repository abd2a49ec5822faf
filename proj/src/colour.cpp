#include "simsearch/colour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "simsearch/errors.hpp"
#include "text.hpp"

namespace simsearch {

ColourSpace::ColourSpace() : blue{0.5, std::sqrt(3.0) / 2.0} {}

Coords ColourSpace::centroid() const {
    return {(red[0] + green[0] + blue[0]) / 3.0, (red[1] + green[1] + blue[1]) / 3.0};
}

std::vector<double> ColourSpace::barycentric(const Coords& p) const {
    const double x = p.at(0), y = p.at(1);
    const double det = (green[1] - blue[1]) * (red[0] - blue[0]) + (blue[0] - green[0]) * (red[1] - blue[1]);
    const double l1 = ((green[1] - blue[1]) * (x - blue[0]) + (blue[0] - green[0]) * (y - blue[1])) / det;
    const double l2 = ((blue[1] - red[1]) * (x - blue[0]) + (red[0] - blue[0]) * (y - blue[1])) / det;
    return {l1, l2, 1.0 - l1 - l2};
}

bool ColourSpace::contains(const Coords& p, double tol) const {
    const auto b = barycentric(p);
    return std::all_of(b.begin(), b.end(), [tol](double l) { return l >= -tol && l <= 1.0 + tol; });
}

namespace {

std::size_t divisions_for(double spacing) {
    if (!(spacing > 0.0)) throw InvalidArgument("lattice spacing must be positive");
    if (spacing > 1.0) throw InvalidArgument("lattice spacing must not exceed the side length 1");
    const double inv = 1.0 / spacing;
    const double m = std::round(inv);
    if (std::abs(m * spacing - 1.0) > 1e-9) {
        throw InvalidArgument("lattice spacing " + detail::format_real(spacing) + " does not divide the side length");
    }
    return static_cast<std::size_t>(m);
}

std::vector<Coords> lattice_points(const ColourSpace& s, std::size_t m) {
    std::vector<Coords> pts;
    const double h = 1.0 / static_cast<double>(m);
    // Row j runs from the R-G edge towards B.
    for (std::size_t j = 0; j <= m; ++j) {
        for (std::size_t i = 0; i + j <= m; ++i) {
            const double a = static_cast<double>(i) * h, b = static_cast<double>(j) * h;
            pts.push_back({s.red[0] + a * (s.green[0] - s.red[0]) + b * (s.blue[0] - s.red[0]),
                           s.red[1] + a * (s.green[1] - s.red[1]) + b * (s.blue[1] - s.red[1])});
        }
    }
    return pts;
}

GroundSpace lattice_ground(const std::vector<Coords>& pts, double spacing) {
    std::vector<Point> elements(pts.begin(), pts.end());
    return GroundSpace::from_points(std::move(elements), euclidean(2), "lattice:" + detail::format_real(spacing));
}

}  // namespace

ColourLattice::ColourLattice(double spacing)
    : spacing_(spacing),
      m_(divisions_for(spacing)),
      points_(lattice_points(space_, m_)),
      ground_(lattice_ground(points_, spacing)) {}

std::size_t ColourLattice::green() const noexcept { return m_; }

ColourLattice build_lattice(double spacing) { return ColourLattice(spacing); }

double image_metric(const Image& x, const Image& y, const ColourLattice& lattice) {
    if (x.k() != y.k()) {
        throw DomainError("images have different sizes " + std::to_string(x.k()) + " and " + std::to_string(y.k()));
    }
    if (x.k() == 0) throw DomainError("empty image");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.k(); ++i) {
        if (x.pixels[i] >= lattice.size() || y.pixels[i] >= lattice.size()) {
            throw DomainError("pixel " + std::to_string(i) + " is not a lattice id");
        }
        sum += lattice.ground().distance(x.pixels[i], y.pixels[i]);
    }
    return sum / static_cast<double>(x.k());
}

Image sample_image(const ColourLattice& lattice, std::size_t k, std::uint64_t seed, std::size_t index) {
    if (k == 0) throw InvalidArgument("images need at least one pixel");
    Rng rng = make_rng(seed, "colour.image", index);
    std::uniform_int_distribution<std::size_t> pick(0, lattice.size() - 1);
    Image img;
    img.pixels.resize(k);
    for (auto& p : img.pixels) p = pick(rng);
    return img;
}

std::vector<Image> sample_images(const ColourLattice& lattice, std::size_t k, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw InvalidArgument("sample count must be positive");
    std::vector<Image> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_image(lattice, k, seed, i));
    return out;
}

Histogram histogram_map(const Image& x, const ColourLattice& lattice) {
    if (x.k() == 0) throw DomainError("empty image");
    std::vector<double> counts(lattice.size(), 0.0);
    for (std::size_t p : x.pixels) {
        if (p >= lattice.size()) throw DomainError("pixel id " + std::to_string(p) + " is not a lattice id");
        counts[p] += 1.0;
    }
    for (auto& c : counts) c /= static_cast<double>(x.k());
    return Histogram(std::move(counts));
}

Coords average_colour(const Histogram& h, const ColourLattice& lattice) {
    if (h.size() != lattice.size()) throw DomainError("histogram is not over this lattice");
    Coords c{0.0, 0.0};
    for (std::size_t i = 0; i < h.size(); ++i) {
        c[0] += h[i] * lattice.points()[i][0];
        c[1] += h[i] * lattice.points()[i][1];
    }
    return c;
}

BallAreaRatio ball_area_ratio(double epsilon, std::uint64_t seed, std::size_t samples) {
    if (!(epsilon > 0.0)) throw InvalidArgument("ε must be positive");
    const double area = std::sqrt(3.0) / 4.0;
    const double inradius = 1.0 / (2.0 * std::sqrt(3.0));
    const double circumradius = 1.0 / std::sqrt(3.0);
    BallAreaRatio r;
    if (epsilon <= inradius) {
        r.value = std::numbers::pi * epsilon * epsilon / area;
        return r;
    }
    if (epsilon > circumradius) {
        r.value = 1.0;
        return r;
    }
    if (samples == 0) throw InvalidArgument("Monte Carlo ball ratio needs samples");
    const ColourSpace s;
    const Coords c = s.centroid();
    Rng rng = make_rng(seed, "colour.ball");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        double a = u(rng), b = u(rng);
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        const double x = s.red[0] + a * (s.green[0] - s.red[0]) + b * (s.blue[0] - s.red[0]);
        const double y = s.red[1] + a * (s.green[1] - s.red[1]) + b * (s.blue[1] - s.red[1]);
        inside += std::hypot(x - c[0], y - c[1]) < epsilon;
    }
    const double n = static_cast<double>(samples);
    r.value = static_cast<double>(inside) / n;
    r.standard_error = std::sqrt(r.value * (1.0 - r.value) / n);
    r.closed_form = false;
    r.samples = samples;
    return r;
}

ColourExperiment qbic_blowup_experiment(const ColourLattice& lattice, std::size_t k, double epsilon,
                                        std::size_t sample_count, std::uint64_t seed) {
    if (k == 0 || sample_count == 0) throw InvalidArgument("k and the sample count must be positive");
    if (!(epsilon > 0.0)) throw InvalidArgument("ε must be positive");
    ColourExperiment e;
    e.k = k;
    e.epsilon = epsilon;
    e.spacing = lattice.spacing();
    e.sample_count = sample_count;
    e.seed = seed;
    e.centre = average_colour(Histogram::uniform(lattice.size()), lattice);

    std::size_t inside = 0;
    const auto& pts = lattice.points();
    for (std::size_t i = 0; i < sample_count; ++i) {
        // Average colour straight from the pixels; equal to average_colour(histogram_map(x)).
        const Image img = sample_image(lattice, k, seed, i);
        double x = 0.0, y = 0.0;
        for (std::size_t p : img.pixels) {
            x += pts[p][0];
            y += pts[p][1];
        }
        x /= static_cast<double>(k);
        y /= static_cast<double>(k);
        inside += std::hypot(x - e.centre[0], y - e.centre[1]) < epsilon;
    }
    const double n = static_cast<double>(sample_count);
    e.measured_mass = static_cast<double>(inside) / n;
    e.mass_standard_error = std::sqrt(e.measured_mass * (1.0 - e.measured_mass) / n);
    const double kk = static_cast<double>(k);
    e.blowup_bound = 1.0 - 2.0 * std::exp(-epsilon * epsilon * kk / 8.0);
    e.concentration_bound = 0.5 * std::exp(-epsilon * epsilon * kk / 4.0);
    e.ball_area = ball_area_ratio(epsilon, seed);
    return e;
}

}  // namespace simsearch
