#include "simsearch/concentration.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "simsearch/errors.hpp"
#include "text.hpp"

namespace simsearch {

// ---------------------------------------------------------------------------
// ProbabilitySpace

ProbabilitySpace::ProbabilitySpace(std::vector<Point> points, std::vector<double> weights, QuerySampler sampler,
                                   DissimilarityMeasure measure)
    : points_(std::move(points)),
      weights_(std::move(weights)),
      sampler_(std::move(sampler)),
      measure_(std::move(measure)) {}

ProbabilitySpace ProbabilitySpace::finite(std::vector<Point> points, std::vector<double> weights,
                                          DissimilarityMeasure measure) {
    if (points.empty()) throw InvalidArgument("probability space: no points");
    if (weights.size() != points.size()) throw InvalidArgument("probability space: one weight per point required");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("probability space: weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("probability space: weights sum to " + detail::format_real(sum) + ", not 1");
    }
    for (const auto& p : points) measure.domain().check_pair(points.front(), p);
    return ProbabilitySpace(std::move(points), std::move(weights), {}, std::move(measure));
}

ProbabilitySpace ProbabilitySpace::uniform(std::vector<Point> points, DissimilarityMeasure measure) {
    if (points.empty()) throw InvalidArgument("probability space: no points");
    std::vector<double> weights(points.size(), 1.0 / static_cast<double>(points.size()));
    return finite(std::move(points), std::move(weights), std::move(measure));
}

ProbabilitySpace ProbabilitySpace::sampled(QuerySampler sampler, DissimilarityMeasure measure) {
    if (!sampler) throw InvalidArgument("probability space: empty sampler");
    return ProbabilitySpace({}, {}, std::move(sampler), std::move(measure));
}

ProbabilitySpace ProbabilitySpace::hamming_cube(std::size_t n) {
    if (n == 0 || n > 20) throw InvalidArgument("hamming cube dimension must be in 1..20");
    std::vector<Point> points;
    points.reserve(std::size_t{1} << n);
    for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
        std::string s(n, '0');
        for (std::size_t i = 0; i < n; ++i) {
            if (m >> i & 1) s[i] = '1';
        }
        points.emplace_back(std::move(s));
    }
    return uniform(std::move(points), hamming("01"));
}

Point ProbabilitySpace::draw(Rng& rng) const {
    if (sampler_) return sampler_(rng);
    std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
    return points_[pick(rng)];
}

ProbabilitySpace ProbabilitySpace::discretize(std::size_t count, std::uint64_t seed) const {
    if (is_finite()) return *this;
    if (count == 0) throw InvalidArgument("discretize: zero samples");
    Rng rng = make_rng(seed, "concentration.sample");
    std::vector<Point> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pts.push_back(sampler_(rng));
    return uniform(std::move(pts), measure_);
}

double ProbabilitySpace::diameter() const {
    if (!is_finite()) throw InvalidArgument("diameter of a sampled space is not computed");
    double diam = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        for (std::size_t j = i + 1; j < points_.size(); ++j) diam = std::max(diam, measure_(points_[i], points_[j]));
    }
    return diam;
}

// ---------------------------------------------------------------------------
// Concentration function

const char* to_string(ConcentrationMethod method) {
    switch (method) {
    case ConcentrationMethod::exact_enumeration: return "exact-enumeration";
    case ConcentrationMethod::hamming_isoperimetric: return "hamming-isoperimetric";
    case ConcentrationMethod::ball_family: return "ball-family";
    case ConcentrationMethod::lipschitz_family: return "lipschitz-family";
    }
    return "?";
}

bool is_exact(ConcentrationMethod method) noexcept {
    return method == ConcentrationMethod::exact_enumeration || method == ConcentrationMethod::hamming_isoperimetric;
}

double ConcentrationEstimate::at(double epsilon) const {
    if (epsilon == 0.0) return 0.5;
    auto it = std::upper_bound(grid.begin(), grid.end(), epsilon);
    if (it == grid.begin()) {
        throw InvalidArgument("ε = " + detail::format_real(epsilon) + " lies below the estimate's grid");
    }
    return alpha[static_cast<std::size_t>(it - grid.begin()) - 1];
}

std::vector<double> default_grid(double diameter, std::size_t steps) {
    if (!(diameter > 0.0)) throw InvalidArgument("default grid needs a positive diameter");
    if (steps < 2) throw InvalidArgument("default grid needs at least 2 steps");
    std::vector<double> grid(steps);
    const double lo = diameter / 100.0;
    for (std::size_t i = 0; i < steps; ++i) {
        grid[i] = lo * std::pow(100.0, static_cast<double>(i) / static_cast<double>(steps - 1));
    }
    grid.back() = diameter;
    return grid;
}

namespace {

constexpr double kMassTol = 1e-12;

double clamp_alpha(double a) { return std::clamp(a, 0.0, 0.5); }

// Masses of bit subsets, via two 12-bit lookup tables.
class MaskMass {
public:
    explicit MaskMass(const std::vector<double>& w) {
        for (std::size_t half = 0; half < 2; ++half) {
            auto& t = table_[half];
            t.assign(std::size_t{1} << 12, 0.0);
            for (std::size_t m = 1; m < t.size(); ++m) {
                const auto low = static_cast<std::size_t>(std::countr_zero(m));
                const std::size_t idx = half * 12 + low;
                t[m] = t[m & (m - 1)] + (idx < w.size() ? w[idx] : 0.0);
            }
        }
    }
    double operator()(std::uint32_t mask) const { return table_[0][mask & 0xfff] + table_[1][mask >> 12]; }

private:
    std::array<std::vector<double>, 2> table_;
};

std::vector<double> exact_enumeration(const ProbabilitySpace& space, std::span<const double> grid) {
    const std::size_t n = space.points().size();
    if (n > kEnumerationLimit) {
        throw InvalidArgument("exact enumeration is limited to " + std::to_string(kEnumerationLimit) +
                              " points, space has " + std::to_string(n));
    }
    const auto dist = distance_matrix(space.measure(), space.points());
    const MaskMass mass(space.weights());
    // Suffix masses for the "cannot reach 1/2" cut.
    std::vector<double> rest(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) rest[i] = rest[i + 1] + space.weights()[i];

    const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
    std::vector<double> alpha;
    std::vector<std::uint32_t> nb(n);
    for (double eps : grid) {
        for (std::size_t i = 0; i < n; ++i) {
            nb[i] = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (dist[i * n + j] < eps) nb[i] |= std::uint32_t{1} << j;
            }
        }
        // Largest mass left outside O_ε(A); tracked directly so full coverage gives exactly 0.
        double best_out = 0.0;
        // Sets reaching mass 1/2 are not extended further: O_ε is monotone in A.
        std::function<void(std::size_t, std::uint32_t, double)> walk = [&](std::size_t i, std::uint32_t hood,
                                                                            double m) {
            const double out = mass(full & ~hood);
            if (m >= 0.5 - kMassTol) {
                best_out = std::max(best_out, out);
                return;
            }
            if (i == n || m + rest[i] < 0.5 - kMassTol) return;
            if (out <= best_out) return;
            walk(i + 1, hood | nb[i], m + space.weights()[i]);
            walk(i + 1, hood, m);
        };
        walk(0, 0, 0.0);
        alpha.push_back(clamp_alpha(best_out));
    }
    return alpha;
}

// Cube {0,1}^n with uniform measure: initial segments of the simplicial order
// minimise t-neighbourhoods among sets of the same size.
std::vector<double> hamming_isoperimetric(const ProbabilitySpace& space, std::span<const double> grid) {
    const auto& pts = space.points();
    if (space.measure().kind() != MeasureKind::hamming || pts.empty() || pts.front().kind() != PointKind::symbols) {
        throw InvalidArgument("isoperimetric method needs a Hamming cube");
    }
    const std::size_t n = pts.front().symbols().size();
    if (n == 0 || n > 20 || pts.size() != (std::size_t{1} << n)) {
        throw InvalidArgument("isoperimetric method needs all 2^n binary strings");
    }
    std::vector<char> seen(pts.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& s = pts[i].symbols();
        std::size_t m = 0;
        for (std::size_t b = 0; b < n; ++b) {
            if (s.size() != n || (s[b] != '0' && s[b] != '1')) throw InvalidArgument("isoperimetric method needs binary strings");
            if (s[b] == '1') m |= std::size_t{1} << b;
        }
        if (seen[m]) throw InvalidArgument("isoperimetric method: repeated cube vertex");
        seen[m] = 1;
        if (std::abs(space.weights()[i] - 1.0 / static_cast<double>(pts.size())) > 1e-12) {
            throw InvalidArgument("isoperimetric method needs the uniform measure");
        }
    }

    const std::size_t total = pts.size();
    std::vector<std::uint32_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [](std::uint32_t x, std::uint32_t y) {
        const int px = std::popcount(x), py = std::popcount(y);
        if (px != py) return px < py;
        if (x == y) return false;
        const std::uint32_t low = (x ^ y) & (~(x ^ y) + 1);
        return (x & low) != 0;
    });
    const std::size_t half = (total + 1) / 2;

    std::vector<double> alpha;
    for (double eps : grid) {
        // Integer distances: ρ < ε  iff  ρ <= ceil(ε) - 1.
        const auto t = static_cast<std::size_t>(std::max(0.0, std::ceil(eps) - 1.0));
        std::vector<int> depth(total, -1);
        std::vector<std::uint32_t> frontier(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
        for (auto v : frontier) depth[v] = 0;
        std::size_t covered = half;
        for (std::size_t level = 0; level < t && !frontier.empty(); ++level) {
            std::vector<std::uint32_t> next;
            for (auto v : frontier) {
                for (std::size_t b = 0; b < n; ++b) {
                    const std::uint32_t u = v ^ (std::uint32_t{1} << b);
                    if (depth[u] < 0) {
                        depth[u] = static_cast<int>(level) + 1;
                        next.push_back(u);
                        ++covered;
                    }
                }
            }
            frontier = std::move(next);
        }
        alpha.push_back(clamp_alpha(static_cast<double>(total - covered) / static_cast<double>(total)));
    }
    return alpha;
}

// Lower median of values under weights.
double weighted_lower_median(const std::vector<double>& values, const std::vector<double>& weights) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        acc += weights[idx[k]];
        const bool last_of_value = k + 1 == idx.size() || values[idx[k + 1]] != values[idx[k]];
        if (last_of_value && acc >= 0.5 - kMassTol) return values[idx[k]];
    }
    return values[idx.back()];
}

std::vector<double> family_estimate(const ProbabilitySpace& space, std::span<const double> grid,
                                    const ConcentrationConfig& cfg, std::size_t& family_size) {
    const std::size_t n = space.points().size();
    if (n > 4096) throw InvalidArgument("family estimates are limited to 4096 points");
    const auto dist = distance_matrix(space.measure(), space.points());
    const auto& w = space.weights();

    Rng rng = make_rng(cfg.seed, "concentration.family");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::vector<char>> sets;
    for (std::size_t c = 0; c < cfg.centres; ++c) {
        const std::size_t v = pick(rng);
        std::vector<double> f(dist.begin() + static_cast<std::ptrdiff_t>(v * n),
                              dist.begin() + static_cast<std::ptrdiff_t>((v + 1) * n));
        const double m = weighted_lower_median(f, w);
        // The closed ball of least radius holding mass 1/2 is the sublevel set at the median.
        std::vector<char> below(n), above(n);
        for (std::size_t x = 0; x < n; ++x) {
            below[x] = f[x] <= m;
            above[x] = f[x] >= m;
        }
        sets.push_back(std::move(below));
        if (cfg.method == ConcentrationMethod::lipschitz_family) sets.push_back(std::move(above));
    }
    family_size = sets.size();

    // max over sets of μ(X \ O_ε(A)), summed from the far end so full coverage is exactly 0.
    std::vector<double> outside(grid.size(), 0.0);
    std::vector<std::pair<double, double>> reach(n);
    std::vector<double> tail(n + 1);
    for (const auto& a : sets) {
        for (std::size_t x = 0; x < n; ++x) {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t y = 0; y < n; ++y) {
                if (a[y]) d = std::min(d, dist[x * n + y]);
            }
            reach[x] = {d, w[x]};
        }
        std::sort(reach.begin(), reach.end());
        tail[n] = 0.0;
        for (std::size_t k = n; k-- > 0;) tail[k] = tail[k + 1] + reach[k].second;
        std::size_t k = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            while (k < n && reach[k].first < grid[g]) ++k;
            outside[g] = std::max(outside[g], tail[k]);
        }
    }
    std::vector<double> alpha(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) alpha[g] = clamp_alpha(outside[g]);
    return alpha;
}

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("ε grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw InvalidArgument("ε grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("ε grid must be increasing");
    }
}

}  // namespace

ConcentrationEstimate estimate_concentration(const ProbabilitySpace& space, std::span<const double> grid,
                                             const ConcentrationConfig& config) {
    check_grid(grid);
    ConcentrationEstimate est;
    est.grid.assign(grid.begin(), grid.end());
    est.method = config.method;
    est.lower_bound = !is_exact(config.method);
    est.seed = config.seed;

    if (is_exact(config.method) && !space.is_finite()) {
        throw InvalidArgument(std::string(to_string(config.method)) + " needs a finite space");
    }
    const ProbabilitySpace finite = space.discretize(config.samples, config.seed);
    est.points = finite.points().size();
    switch (config.method) {
    case ConcentrationMethod::exact_enumeration:
        est.alpha = exact_enumeration(finite, grid);
        break;
    case ConcentrationMethod::hamming_isoperimetric:
        est.alpha = hamming_isoperimetric(finite, grid);
        break;
    case ConcentrationMethod::ball_family:
    case ConcentrationMethod::lipschitz_family:
        if (config.centres == 0) throw InvalidArgument("family estimate needs at least one centre");
        est.alpha = family_estimate(finite, grid, config, est.family_size);
        break;
    }
    for (std::size_t i = 1; i < est.alpha.size(); ++i) {
        if (est.alpha[i] > est.alpha[i - 1]) throw Error("concentration estimate is not monotone");
    }
    return est;
}

// ---------------------------------------------------------------------------
// Median concentration

double lower_median(const ProbabilitySpace& space, const RealFunction& f) {
    if (!space.is_finite()) throw InvalidArgument("lower_median needs a finite or discretized space");
    std::vector<double> values;
    values.reserve(space.points().size());
    for (const auto& p : space.points()) values.push_back(f(p));
    return weighted_lower_median(values, space.weights());
}

MedianCheck median_concentration_check(const ProbabilitySpace& space, const RealFunction& f, double epsilon,
                                       const ConcentrationEstimate& alpha, std::size_t samples, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw InvalidArgument("ε must be positive");
    const ProbabilitySpace fin = space.discretize(samples, seed);
    const auto& pts = fin.points();

    std::vector<std::pair<Point, Point>> pairs;
    if (pts.size() <= 200) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) pairs.emplace_back(pts[i], pts[j]);
        }
    } else {
        Rng rng = make_rng(seed, "concentration.lipschitz");
        std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
        for (int i = 0; i < 10000; ++i) pairs.emplace_back(pts[pick(rng)], pts[pick(rng)]);
    }
    if (auto v = check_one_lipschitz(f, fin.measure(), pairs)) {
        std::ostringstream msg;
        msg << "function is not 1-Lipschitz: |f(x) - f(y)| = " << detail::format_real(v->variation)
            << " > rho(x, y) = " << detail::format_real(v->distance) << " on checked pair " << v->pair_index;
        throw LipschitzError(msg.str());
    }

    std::vector<double> values;
    values.reserve(pts.size());
    for (const auto& p : pts) values.push_back(f(p));
    MedianCheck out;
    out.median = weighted_lower_median(values, fin.weights());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (out.median - epsilon < values[i] && values[i] < out.median + epsilon) out.mass += fin.weights()[i];
    }
    out.bound = 1.0 - 2.0 * alpha.at(epsilon);
    out.satisfied = out.mass >= out.bound - kAbsTol;
    out.asserted = !alpha.lower_bound && space.is_finite();
    return out;
}

// ---------------------------------------------------------------------------
// Covering numbers

const char* to_string(CoverMethod method) {
    return method == CoverMethod::greedy_upper ? "greedy-upper" : "exact-small";
}

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t popcount(const Bits& b) {
    std::size_t c = 0;
    for (auto w : b) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::vector<std::size_t> greedy_cover(const std::vector<double>& dist, std::size_t n, double eps) {
    std::vector<std::size_t> centres{0};
    std::vector<double> reach(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n));
    for (;;) {
        std::size_t far = 0;
        for (std::size_t x = 1; x < n; ++x) {
            if (reach[x] > reach[far]) far = x;
        }
        if (reach[far] < eps) return centres;
        centres.push_back(far);
        for (std::size_t x = 0; x < n; ++x) reach[x] = std::min(reach[x], dist[far * n + x]);
    }
}

class ExactCover {
public:
    ExactCover(const std::vector<double>& dist, std::size_t n, double eps) : n_(n), words_((n + 63) / 64) {
        balls_.assign(n, Bits(words_, 0));
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t x = 0; x < n; ++x) {
                if (dist[c * n + x] < eps) balls_[c][x / 64] |= std::uint64_t{1} << (x % 64);
            }
            max_ball_ = std::max(max_ball_, popcount(balls_[c]));
        }
    }

    std::vector<std::size_t> solve(std::vector<std::size_t> upper) {
        best_ = std::move(upper);
        std::vector<std::size_t> chosen;
        search(Bits(words_, 0), chosen);
        return best_;
    }

private:
    void search(const Bits& covered, std::vector<std::size_t>& chosen) {
        std::size_t first = n_;
        for (std::size_t wi = 0; wi < words_ && first == n_; ++wi) {
            std::uint64_t open = ~covered[wi];
            if (wi + 1 == words_ && n_ % 64) open &= (std::uint64_t{1} << (n_ % 64)) - 1;
            if (open) first = wi * 64 + static_cast<std::size_t>(std::countr_zero(open));
        }
        if (first == n_) {
            if (chosen.size() < best_.size()) best_ = chosen;
            return;
        }
        const std::size_t left = n_ - popcount(covered);
        const std::size_t need = (left + max_ball_ - 1) / max_ball_;
        if (chosen.size() + need >= best_.size()) return;

        std::vector<std::pair<std::size_t, std::size_t>> options;  // (-gain, centre)
        for (std::size_t c = 0; c < n_; ++c) {
            if (!(balls_[c][first / 64] >> (first % 64) & 1)) continue;
            std::size_t gain = 0;
            for (std::size_t wi = 0; wi < words_; ++wi) gain += std::popcount(balls_[c][wi] & ~covered[wi]);
            options.emplace_back(n_ - gain, c);
        }
        std::sort(options.begin(), options.end());
        for (const auto& [neg, c] : options) {
            Bits next = covered;
            for (std::size_t wi = 0; wi < words_; ++wi) next[wi] |= balls_[c][wi];
            chosen.push_back(c);
            search(next, chosen);
            chosen.pop_back();
        }
    }

    std::size_t n_;
    std::size_t words_;
    std::vector<Bits> balls_;
    std::size_t max_ball_ = 1;
    std::vector<std::size_t> best_;
};

}  // namespace

CoverReport covering_number(std::span<const Point> points, const DissimilarityMeasure& measure, double epsilon,
                            const CoverConfig& config) {
    if (points.empty()) throw InvalidArgument("covering number of an empty set");
    if (!(epsilon > 0.0)) throw InvalidArgument("ε must be positive");
    const std::size_t n = points.size();
    const CoverMethod method =
        config.method.value_or(n <= config.exact_limit ? CoverMethod::exact_small : CoverMethod::greedy_upper);
    if (method == CoverMethod::exact_small && n > config.exact_limit) {
        throw InvalidArgument("exact cover is limited to " + std::to_string(config.exact_limit) + " points");
    }
    const auto dist = distance_matrix(measure, points);
    CoverReport r;
    r.epsilon = epsilon;
    r.method = method;
    r.centres = greedy_cover(dist, n, epsilon);
    if (method == CoverMethod::exact_small) r.centres = ExactCover(dist, n, epsilon).solve(std::move(r.centres));
    std::sort(r.centres.begin(), r.centres.end());
    r.n = r.centres.size();
    r.entropy = std::log2(static_cast<double>(r.n));
    return r;
}

// ---------------------------------------------------------------------------
// Blow-up

BlowupReport blowup_experiment(const ProbabilitySpace& space, const ApproxMeasure& approx, double epsilon,
                               double delta, const BlowupConfig& config) {
    if (!(epsilon > 0.0) || !(delta > 0.0)) throw InvalidArgument("ε and δ must be positive");
    const double third = approx.delta(epsilon / 3.0);
    if (third > delta / 3.0 + kAbsTol + kRelTol * delta) {
        throw ModulusError("modulus gives δ(ε/3) = " + detail::format_real(third) + " > δ/3 = " +
                           detail::format_real(delta / 3.0));
    }
    const DissimilarityMeasure& rho = space.measure();

    Rng mass_rng = make_rng(config.seed, "blowup.mass");
    std::vector<Point> sample;
    sample.reserve(config.samples);
    for (std::size_t i = 0; i < config.samples; ++i) sample.push_back(space.draw(mass_rng));
    if (sample.empty()) throw InvalidArgument("blow-up experiment needs samples");

    BlowupReport out;
    out.epsilon = epsilon;
    out.delta = delta;
    {
        std::vector<Point> head(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(sample.size(), 1000)));
        QuerySampler draw = [&space](Rng& rng) { return space.draw(rng); };
        const Workload w = make_workload(rho, std::move(head), draw);
        out.audit = audit_modulus(w, approx, config.seed);
    }

    const double n = static_cast<double>(sample.size());
    for (std::size_t q = 0; q < config.queries; ++q) {
        Rng rng = make_rng(config.seed, "blowup.query", q);
        const Point x = space.draw(rng);
        std::size_t inside = 0;
        for (const auto& p : sample) inside += approx.d(p, x) < delta;
        const double m = static_cast<double>(inside) / n;
        if (q == 0 || m > out.worst_mass) {
            out.worst_mass = m;
            out.worst_query = x;
        }
    }
    if (config.queries > 0) {
        std::size_t inside = 0;
        for (const auto& p : sample) inside += rho(p, out.worst_query) < epsilon;
        out.true_ball_mass = static_cast<double>(inside) / n;
    }

    const std::vector<Point> cover_pts(sample.begin(),
                                       sample.begin() + static_cast<std::ptrdiff_t>(std::min(sample.size(), config.cover_samples)));
    out.cover = covering_number(cover_pts, approx.d, epsilon / 3.0, {CoverMethod::greedy_upper, 20});

    ConcentrationConfig cc;
    cc.method = ConcentrationMethod::ball_family;
    cc.samples = config.alpha_samples;
    cc.seed = config.seed;
    const std::vector<double> grid{epsilon};
    if (space.is_finite() && space.points().size() > 4096) {
        const ProbabilitySpace sub = ProbabilitySpace::sampled([&space](Rng& r) { return space.draw(r); }, rho);
        out.alpha = estimate_concentration(sub, grid, cc);
    } else {
        out.alpha = estimate_concentration(space, grid, cc);
    }
    return out;
}

}  // namespace simsearch
