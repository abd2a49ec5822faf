#include "simsearch/histogram.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "simsearch/errors.hpp"
#include "text.hpp"

namespace simsearch {

namespace {

constexpr double kWeightTol = 1e-9;
constexpr double kCertificateTol = 1e-7;
constexpr double kEigenClip = 1e-6;

Eigen::MatrixXd to_eigen(std::size_t n, const std::vector<double>& row_major) {
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = row_major[i * n + j];
    }
    return m;
}

}  // namespace

GroundSpace::GroundSpace(std::vector<Point> elements, std::vector<double> distances, std::string id)
    : elements_(std::move(elements)), distances_(std::move(distances)), id_(std::move(id)) {
    const std::size_t n = elements_.size();
    if (n == 0) throw InvalidArgument("ground space is empty");
    if (distances_.size() != n * n) throw InvalidArgument("ground distance table is not n x n");
    for (std::size_t i = 0; i < n; ++i) {
        if (distance(i, i) != 0.0) throw NonMetricError("ground distance has nonzero diagonal at " + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) {
            const double dij = distance(i, j);
            if (!(dij >= 0.0) || !std::isfinite(dij)) {
                throw NonMetricError("ground distance (" + std::to_string(i) + ", " + std::to_string(j) +
                                     ") is negative or not finite");
            }
            if (std::abs(dij - distance(j, i)) > kAbsTol + kRelTol * dij) {
                throw NonMetricError("ground distance is not symmetric at (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ")");
            }
            max_distance_ = std::max(max_distance_, dij);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                if (!leq_tol(distance(i, k), distance(i, j) + distance(j, k))) {
                    throw NonMetricError("ground distance violates the triangle inequality at (" + std::to_string(i) +
                                         ", " + std::to_string(j) + ", " + std::to_string(k) + ")");
                }
            }
        }
    }
}

GroundSpace GroundSpace::from_points(std::vector<Point> elements, const DissimilarityMeasure& measure,
                                     std::string id) {
    auto table = distance_matrix(measure, elements);
    return GroundSpace(std::move(elements), std::move(table), std::move(id));
}

// ---------------------------------------------------------------------------

Histogram::Histogram(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw InvalidArgument("histogram has no weights");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw InvalidArgument("histogram weight " + std::to_string(i) + " is negative or not finite");
        }
        sum += weights_[i];
    }
    if (std::abs(sum - 1.0) > kWeightTol) {
        throw InvalidArgument("histogram weights sum to " + detail::format_real(sum) + ", not 1");
    }
}

Histogram Histogram::point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw InvalidArgument("point mass index out of range");
    std::vector<double> w(n, 0.0);
    w[at] = 1.0;
    return Histogram(std::move(w));
}

Histogram Histogram::uniform(std::size_t n) {
    if (n == 0) throw InvalidArgument("histogram has no weights");
    return Histogram(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Histogram Histogram::mix(double t, const Histogram& a, const Histogram& b) {
    if (a.size() != b.size()) throw DomainError("histograms over different ground spaces");
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("mixing weight must lie in [0, 1]");
    std::vector<double> w(a.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = t * a[i] + (1.0 - t) * b[i];
    return Histogram(std::move(w));
}

double TransportPlan::cost(const GroundSpace& ground) const {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) total += flow(i, j) * ground.distance(i, j);
    }
    return total;
}

std::vector<double> TransportPlan::net_divergence() const {
    std::vector<double> div(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            div[i] += flow(i, j);
            div[j] -= flow(i, j);
        }
    }
    return div;
}

std::size_t TransportPlan::arcs() const {
    return static_cast<std::size_t>(std::count_if(flows.begin(), flows.end(), [](double f) { return f > 0.0; }));
}

// ---------------------------------------------------------------------------
// Successive shortest paths on the bipartite network
//   source -> surplus node a -> deficit node b -> sink
// with infinite a -> b capacity at cost ρ(a, b). Node potentials keep reduced
// costs nonnegative so each phase is a dense Dijkstra.

namespace {

class TransportSolver {
public:
    TransportSolver(const std::vector<double>& diff, const GroundSpace& ground) : ground_(ground) {
        for (std::size_t i = 0; i < diff.size(); ++i) {
            if (diff[i] > 0.0) {
                sources_.push_back(i);
                supply_.push_back(diff[i]);
            } else if (diff[i] < 0.0) {
                sinks_.push_back(i);
                demand_.push_back(-diff[i]);
            }
        }
        m_ = sources_.size();
        l_ = sinks_.size();
        flow_.assign(m_ * l_, 0.0);
        // node layout: 0 = source, 1..m = surplus, m+1..m+l = deficit, m+l+1 = sink
        potential_.assign(m_ + l_ + 2, 0.0);
        const double total = std::accumulate(supply_.begin(), supply_.end(), 0.0);
        threshold_ = 1e-15 * std::max(1.0, total);
    }

    void solve() {
        while (remaining(supply_) && remaining(demand_)) augment();
    }

    std::size_t surplus_count() const { return m_; }
    std::size_t deficit_count() const { return l_; }
    std::size_t surplus_node(std::size_t a) const { return sources_[a]; }
    std::size_t deficit_node(std::size_t b) const { return sinks_[b]; }
    double flow(std::size_t a, std::size_t b) const { return flow_[a * l_ + b]; }
    double surplus_potential(std::size_t a) const { return potential_[1 + a]; }
    double deficit_potential(std::size_t b) const { return potential_[1 + m_ + b]; }

private:
    bool remaining(const std::vector<double>& v) const {
        return std::any_of(v.begin(), v.end(), [&](double x) { return x > threshold_; });
    }

    double cost(std::size_t a, std::size_t b) const { return ground_.distance(sources_[a], sinks_[b]); }

    void augment() {
        const std::size_t nodes = m_ + l_ + 2;
        const std::size_t src = 0;
        const std::size_t sink = nodes - 1;
        constexpr double inf = std::numeric_limits<double>::infinity();
        constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
        std::vector<double> dist(nodes, inf);
        std::vector<std::size_t> prev(nodes, none);
        std::vector<char> done(nodes, 0);
        dist[src] = 0.0;

        auto relax = [&](std::size_t u, std::size_t v, double c) {
            const double reduced = std::max(0.0, c + potential_[u] - potential_[v]);
            if (dist[u] + reduced < dist[v]) {
                dist[v] = dist[u] + reduced;
                prev[v] = u;
            }
        };

        for (;;) {
            std::size_t u = none;
            for (std::size_t v = 0; v < nodes; ++v) {
                if (!done[v] && dist[v] < inf && (u == none || dist[v] < dist[u])) u = v;
            }
            if (u == none) break;
            done[u] = 1;
            if (u == src) {
                for (std::size_t a = 0; a < m_; ++a) {
                    if (supply_[a] > threshold_) relax(src, 1 + a, 0.0);
                }
            } else if (u <= m_) {
                const std::size_t a = u - 1;
                for (std::size_t b = 0; b < l_; ++b) relax(u, 1 + m_ + b, cost(a, b));
            } else if (u < sink) {
                const std::size_t b = u - 1 - m_;
                for (std::size_t a = 0; a < m_; ++a) {
                    if (flow_[a * l_ + b] > 0.0) relax(u, 1 + a, -cost(a, b));
                }
                if (demand_[b] > threshold_) relax(u, sink, 0.0);
            }
        }
        if (!(dist[sink] < inf)) throw Error("transport solver: no augmenting path (infeasible instance)");

        double reach = 0.0;
        for (double d : dist) {
            if (d < inf) reach = std::max(reach, d);
        }
        for (std::size_t v = 0; v < nodes; ++v) potential_[v] += dist[v] < inf ? dist[v] : reach;

        // Walk the path backwards to find the bottleneck, then push.
        double push = inf;
        for (std::size_t v = sink; v != src; v = prev[v]) {
            const std::size_t u = prev[v];
            if (u == src) {
                push = std::min(push, supply_[v - 1]);
            } else if (v == sink) {
                push = std::min(push, demand_[u - 1 - m_]);
            } else if (u > m_) {  // backward arc deficit -> surplus
                push = std::min(push, flow_[(v - 1) * l_ + (u - 1 - m_)]);
            }
        }
        for (std::size_t v = sink; v != src; v = prev[v]) {
            const std::size_t u = prev[v];
            if (u == src) {
                supply_[v - 1] -= push;
            } else if (v == sink) {
                demand_[u - 1 - m_] -= push;
            } else if (u <= m_) {
                flow_[(u - 1) * l_ + (v - 1 - m_)] += push;
            } else {
                double& f = flow_[(v - 1) * l_ + (u - 1 - m_)];
                f -= push;
                if (f < threshold_) f = 0.0;
            }
        }
    }

    const GroundSpace& ground_;
    std::vector<std::size_t> sources_, sinks_;
    std::vector<double> supply_, demand_;
    std::size_t m_ = 0, l_ = 0;
    std::vector<double> flow_;
    std::vector<double> potential_;
    double threshold_ = 0.0;
};

}  // namespace

KantorovichResult kantorovich(const Histogram& mu1, const Histogram& mu2, const GroundSpace& ground) {
    const std::size_t n = ground.size();
    if (mu1.size() != n || mu2.size() != n) {
        throw DomainError("histograms do not match the ground space (" + std::to_string(mu1.size()) + ", " +
                          std::to_string(mu2.size()) + " vs " + std::to_string(n) + ")");
    }
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = mu1[i] - mu2[i];

    KantorovichResult result;
    result.plan.n = n;
    result.plan.flows.assign(n * n, 0.0);
    result.potential.assign(n, 0.0);

    TransportSolver solver(diff, ground);
    if (solver.surplus_count() == 0 || solver.deficit_count() == 0) return result;
    solver.solve();

    for (std::size_t a = 0; a < solver.surplus_count(); ++a) {
        for (std::size_t b = 0; b < solver.deficit_count(); ++b) {
            result.plan.flows[solver.surplus_node(a) * n + solver.deficit_node(b)] = solver.flow(a, b);
        }
    }
    result.distance = result.plan.cost(ground);

    // Dual certificate: φ = -π on the deficit nodes, extended to all of C by the
    // 1-Lipschitz envelope φ(x) = min_b (φ_b + ρ(x, b)).
    for (std::size_t x = 0; x < n; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < solver.deficit_count(); ++b) {
            best = std::min(best, -solver.deficit_potential(b) + ground.distance(x, solver.deficit_node(b)));
        }
        result.potential[x] = best;
    }
    const double shift = result.potential[0];
    for (double& p : result.potential) p -= shift;
    for (std::size_t i = 0; i < n; ++i) result.dual_value += result.potential[i] * diff[i];

    if (std::abs(result.dual_value - result.distance) > kCertificateTol * (1.0 + result.distance)) {
        throw Error("transport solver: dual certificate does not close (primal " +
                    detail::format_real(result.distance) + ", dual " + detail::format_real(result.dual_value) + ")");
    }
    return result;
}

DissimilarityMeasure kantorovich_measure(const GroundSpace& ground) {
    auto shared = std::make_shared<const GroundSpace>(ground);
    std::string name = "kantorovich";
    if (!ground.id().empty()) name += "(" + ground.id() + ")";
    return {MeasureKind::kantorovich, std::move(name), MeasureDomain{PointKind::coords, ground.size(), {}},
            [shared](const Point& x, const Point& y) {
                return kantorovich(Histogram(x.coords()), Histogram(y.coords()), *shared).distance;
            }};
}

// ---------------------------------------------------------------------------

double norm_of_difference(const Coords& a, const Coords& b, Norm norm) {
    if (a.size() != b.size()) throw DomainError("vectors of different dimension");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        switch (norm) {
            case Norm::l2: acc += d * d; break;
            case Norm::l1: acc += d; break;
            case Norm::linf: acc = std::max(acc, d); break;
        }
    }
    return norm == Norm::l2 ? std::sqrt(acc) : acc;
}

Coords AffineMap::operator()(const Histogram& mu) const {
    if (mu.size() != images_.size()) throw DomainError("histogram does not match the map's ground space");
    Coords out(images_.empty() ? 0 : images_.front().size(), 0.0);
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (mu[i] == 0.0) continue;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += mu[i] * images_[i][k];
    }
    return out;
}

AffineMap extend_map(std::vector<Coords> images, const GroundSpace& ground, Norm norm) {
    if (images.size() != ground.size()) throw DomainError("need one image per ground element");
    for (const auto& img : images) {
        if (img.size() != images.front().size()) throw DomainError("images have different dimensions");
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            const double stretch = norm_of_difference(images[i], images[j], norm);
            if (!leq_tol(stretch, ground.distance(i, j))) {
                throw LipschitzError("map is expansive on ground pair (" + std::to_string(i) + ", " +
                                     std::to_string(j) + "): " + detail::format_real(stretch) + " > " +
                                     detail::format_real(ground.distance(i, j)));
            }
        }
    }
    return AffineMap(std::move(images), norm);
}

// ---------------------------------------------------------------------------

QuadraticForm::QuadraticForm(std::size_t n, std::vector<double> matrix) : n_(n), matrix_(std::move(matrix)) {
    if (n_ == 0 || matrix_.size() != n_ * n_) throw InvalidArgument("quadratic form matrix is not n x n");
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            if (std::abs(at(i, j) - at(j, i)) > kAbsTol + kRelTol * std::abs(at(i, j))) {
                throw InvalidArgument("quadratic form matrix is not symmetric at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
            }
        }
    }
    if (n_ == 1) return;  // the zero-sum subspace is {0}
    // Project onto the zero-sum subspace: P A P with P = I - 11^T/n.
    const Eigen::MatrixXd a = to_eigen(n_, matrix_);
    const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n_, n_) -
                              Eigen::MatrixXd::Constant(n_, n_, 1.0 / static_cast<double>(n_));
    const Eigen::MatrixXd projected = p * a * p;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(projected, Eigen::EigenvaluesOnly);
    // Spectrum of PAP is {0} (the all-ones direction) plus the spectrum on the subspace.
    Eigen::VectorXd values = eig.eigenvalues();
    min_eigen_ = values.minCoeff();
    if (min_eigen_ > 0.0) min_eigen_ = 0.0;
    if (min_eigen_ < -kAbsTol) {
        throw InvalidArgument("quadratic form is not positive semidefinite on zero-sum vectors (eigenvalue " +
                              detail::format_real(min_eigen_) + ")");
    }
}

double QuadraticForm::evaluate(std::span<const double> v) const {
    if (v.size() != n_) throw DomainError("vector does not match the quadratic form");
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (v[i] == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) row += at(i, j) * v[j];
        total += v[i] * row;
    }
    return total;
}

QuadraticForm qbic_form(const GroundSpace& ground) {
    const std::size_t n = ground.size();
    const double scale = ground.max_distance() > 0.0 ? ground.max_distance() : 1.0;
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 1.0 - ground.distance(i, j) / scale;
    }
    return QuadraticForm(n, std::move(a));
}

double quadratic_distance(const Histogram& mu1, const Histogram& mu2, const QuadraticForm& form) {
    if (mu1.size() != form.size() || mu2.size() != form.size()) {
        throw DomainError("histograms do not match the quadratic form dimension");
    }
    std::vector<double> v(form.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mu1[i] - mu2[i];
    const double q = form.evaluate(v);
    if (q < -kAbsTol) throw InvalidArgument("quadratic form is negative on a histogram difference");
    return std::sqrt(std::max(0.0, q));
}

DissimilarityMeasure quadratic_measure(const QuadraticForm& form) {
    auto shared = std::make_shared<const QuadraticForm>(form);
    return {MeasureKind::quadratic, "quadratic", MeasureDomain{PointKind::coords, form.size(), {}},
            [shared](const Point& x, const Point& y) {
                return quadratic_distance(Histogram(x.coords()), Histogram(y.coords()), *shared);
            },
            {.pseudo = true, .integer_valued = false}};
}

// ---------------------------------------------------------------------------

namespace {

// Coordinates V sqrt(Λ) from a Gram matrix, or nullopt if it has an eigenvalue
// below -kEigenClip.
std::optional<std::vector<Coords>> coordinates_from_gram(const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& values = eig.eigenvalues();
    if (values.minCoeff() < -kEigenClip) return std::nullopt;
    const auto n = static_cast<std::size_t>(gram.rows());
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (values(k) > 0.0) kept.push_back(k);
    }
    std::vector<Coords> points(n, Coords(kept.size(), 0.0));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        const double s = std::sqrt(values(kept[c]));
        for (std::size_t i = 0; i < n; ++i) {
            points[i][c] = eig.eigenvectors()(static_cast<Eigen::Index>(i), kept[c]) * s;
        }
    }
    return points;
}

}  // namespace

SqrtEmbedding embed_sqrt_transform(const GroundSpace& ground) {
    const std::size_t n = ground.size();
    if (ground.max_distance() > 1.0 + kAbsTol) {
        throw InvalidArgument("ground distances must be normalised to at most 1 (max is " +
                              detail::format_real(ground.max_distance()) + ")");
    }
    const Eigen::MatrixXd d = to_eigen(n, ground.distances());

    // |x_i - x_j|^2 = g_ii + g_jj - 2 g_ij = ρ_ij with g = (1 - ρ)/2 and g_ii = 1/2.
    const Eigen::MatrixXd sphere_gram = 0.5 * (Eigen::MatrixXd::Ones(n, n) - d);
    if (auto points = coordinates_from_gram(sphere_gram)) {
        return {std::move(*points), true, std::sqrt(0.5)};
    }
    // Classical scaling of the squared target distances ρ_ij.
    const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n) -
                              Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    const Eigen::MatrixXd centred = -0.5 * j * d * j;
    if (auto points = coordinates_from_gram(centred)) {
        return {std::move(*points), false, 0.0};
    }
    throw EmbeddingError("square-root transform of the ground space is not Euclidean (Gram eigenvalue below -1e-6)");
}

// ---------------------------------------------------------------------------

std::vector<HistogramRecord> read_histograms(std::istream& in) {
    std::vector<HistogramRecord> records;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::istringstream fields(line);
        std::string id;
        if (!(fields >> id) || id.front() == '#') continue;
        std::vector<double> weights;
        std::string token;
        std::size_t column = 1;
        while (fields >> token) {
            ++column;
            auto value = detail::parse_real(token);
            if (!value || !std::isfinite(*value)) throw ParseError("row " + std::to_string(row) + ", column " +
                                                                   std::to_string(column) + ": not a number: '" +
                                                                   token + "'", row, column);
            if (*value < 0.0) throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(column) +
                                               ": negative weight", row, column);
            weights.push_back(*value);
        }
        if (weights.empty()) throw ParseError("row " + std::to_string(row) + ": no weights", row);
        if (!records.empty() && (id != records.front().ground_id || weights.size() != records.front().histogram.size())) {
            throw ParseError("row " + std::to_string(row) + ": ground space differs from the first record", row);
        }
        const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ParseError("row " + std::to_string(row) + ": weights sum to " + detail::format_real(sum) +
                             " (more than 1e-6 from 1)", row);
        }
        for (double& w : weights) w /= sum;
        records.push_back({std::move(id), Histogram(std::move(weights))});
    }
    return records;
}

void write_histograms(std::ostream& out, std::span<const HistogramRecord> records) {
    for (const auto& r : records) {
        out << r.ground_id;
        for (double w : r.histogram.weights()) out << ' ' << detail::format_real(w);
        out << '\n';
    }
}

}  // namespace simsearch
