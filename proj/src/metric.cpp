#include "simsearch/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "simsearch/errors.hpp"
#include "text.hpp"

namespace simsearch {

const Coords& Point::coords() const {
    if (const auto* c = std::get_if<Coords>(&payload)) return *c;
    throw DomainError("point holds a symbol string, not a coordinate tuple");
}

const std::string& Point::symbols() const {
    if (const auto* s = std::get_if<std::string>(&payload)) return *s;
    throw DomainError("point holds a coordinate tuple, not a symbol string");
}

void MeasureDomain::check(const Point& p) const {
    if (p.kind() != kind) {
        throw DomainError(kind == PointKind::coords ? "expected a coordinate tuple" : "expected a symbol string");
    }
    if (kind == PointKind::coords) {
        const auto n = p.coords().size();
        if (arity != 0 && n != arity) {
            throw DomainError("arity mismatch: expected " + std::to_string(arity) + ", got " + std::to_string(n));
        }
        return;
    }
    const auto& s = p.symbols();
    if (arity != 0 && s.size() != arity) {
        throw DomainError("length mismatch: expected " + std::to_string(arity) + ", got " + std::to_string(s.size()));
    }
    if (!alphabet.empty()) {
        for (char c : s) {
            if (alphabet.find(c) == std::string::npos) {
                throw DomainError(std::string("symbol '") + c + "' is not in the alphabet \"" + alphabet + "\"");
            }
        }
    }
}

void MeasureDomain::check_pair(const Point& x, const Point& y) const {
    check(x);
    check(y);
    if (kind == PointKind::coords && x.coords().size() != y.coords().size()) {
        throw DomainError("coordinate tuples of different arity: " + std::to_string(x.coords().size()) + " vs " +
                          std::to_string(y.coords().size()));
    }
}

const char* to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::euclidean: return "euclidean";
        case MeasureKind::l1: return "l1";
        case MeasureKind::hamming: return "hamming";
        case MeasureKind::edit: return "edit";
        case MeasureKind::kantorovich: return "kantorovich";
        case MeasureKind::quadratic: return "quadratic";
        case MeasureKind::transformed: return "transformed";
        case MeasureKind::projected: return "projected";
        case MeasureKind::custom: return "custom";
    }
    return "unknown";
}

DissimilarityMeasure::DissimilarityMeasure(MeasureKind kind, std::string name, MeasureDomain domain, Fn fn,
                                           Traits traits, std::shared_ptr<const DissimilarityMeasure> base,
                                           std::vector<std::size_t> projection)
    : kind_(kind),
      name_(std::move(name)),
      domain_(std::move(domain)),
      fn_(std::move(fn)),
      traits_(traits),
      base_(std::move(base)),
      projection_(std::move(projection)) {
    if (!fn_) throw InvalidArgument("measure '" + name_ + "' has no evaluation function");
}

DissimilarityMeasure euclidean(std::size_t arity) {
    return {MeasureKind::euclidean, "euclidean", MeasureDomain{PointKind::coords, arity, {}},
            [](const Point& x, const Point& y) {
                const auto& a = x.coords();
                const auto& b = y.coords();
                double sum = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    const double d = a[i] - b[i];
                    sum += d * d;
                }
                return std::sqrt(sum);
            }};
}

DissimilarityMeasure l1(std::size_t arity) {
    return {MeasureKind::l1, "l1", MeasureDomain{PointKind::coords, arity, {}},
            [](const Point& x, const Point& y) {
                const auto& a = x.coords();
                const auto& b = y.coords();
                double sum = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
                return sum;
            }};
}

DissimilarityMeasure hamming(std::string alphabet) {
    MeasureDomain domain{PointKind::symbols, 0, std::move(alphabet)};
    return {MeasureKind::hamming, "hamming", domain,
            [](const Point& x, const Point& y) {
                const auto& a = x.symbols();
                const auto& b = y.symbols();
                if (a.size() != b.size()) {
                    throw DomainError("hamming distance needs equal-length strings");
                }
                std::size_t count = 0;
                for (std::size_t i = 0; i < a.size(); ++i) count += a[i] != b[i];
                return static_cast<double>(count);
            },
            {.pseudo = false, .integer_valued = true}};
}

DissimilarityMeasure edit(std::string alphabet, EditCosts costs) {
    if (!(costs.insert_delete > 0) || !(costs.substitute > 0)) {
        throw InvalidArgument("edit costs must be positive");
    }
    const bool integral = costs.insert_delete == std::floor(costs.insert_delete) &&
                          costs.substitute == std::floor(costs.substitute);
    std::string name = "edit";
    if (costs.insert_delete != 1.0 || costs.substitute != 1.0) {
        name += "(" + detail::format_real(costs.insert_delete) + "," + detail::format_real(costs.substitute) + ")";
    }
    MeasureDomain domain{PointKind::symbols, 0, std::move(alphabet)};
    return {MeasureKind::edit, std::move(name), domain,
            [costs](const Point& x, const Point& y) {
                const auto& a = x.symbols();
                const auto& b = y.symbols();
                // Single-row Wagner-Fischer.
                std::vector<double> row(b.size() + 1);
                for (std::size_t j = 0; j <= b.size(); ++j) row[j] = costs.insert_delete * static_cast<double>(j);
                for (std::size_t i = 1; i <= a.size(); ++i) {
                    double diag = row[0];
                    row[0] = costs.insert_delete * static_cast<double>(i);
                    for (std::size_t j = 1; j <= b.size(); ++j) {
                        const double up = row[j];
                        const double sub = diag + (a[i - 1] == b[j - 1] ? 0.0 : costs.substitute);
                        row[j] = std::min({sub, up + costs.insert_delete, row[j - 1] + costs.insert_delete});
                        diag = up;
                    }
                }
                return row[b.size()];
            },
            {.pseudo = false, .integer_valued = integral}};
}

DissimilarityMeasure custom_measure(std::string name, MeasureDomain domain, DissimilarityMeasure::Fn fn,
                                    DissimilarityMeasure::Traits traits) {
    return {MeasureKind::custom, std::move(name), std::move(domain), std::move(fn), traits};
}

bool leq_tol(double lhs, double rhs, bool exact) {
    if (exact) return lhs <= rhs;
    return lhs <= rhs + kAbsTol + kRelTol * std::abs(rhs);
}

std::vector<double> distance_matrix(const DissimilarityMeasure& measure, std::span<const Point> points) {
    const std::size_t n = points.size();
    std::vector<double> table(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) table[i * n + j] = measure(points[i], points[j]);
    }
    return table;
}

// ---------------------------------------------------------------------------

const char* to_string(Axiom axiom) {
    switch (axiom) {
        case Axiom::nonnegativity: return "nonnegativity";
        case Axiom::symmetry: return "symmetry";
        case Axiom::identity: return "identity";
        case Axiom::indiscernibles: return "identity of indiscernibles";
        case Axiom::triangle: return "triangle inequality";
    }
    return "unknown";
}

std::string AxiomViolation::describe() const {
    std::ostringstream out;
    out << to_string(axiom) << " violated at (";
    for (std::size_t i = 0; i < witness.size(); ++i) out << (i ? ", " : "") << witness[i];
    out << "): " << detail::format_real(lhs) << " vs " << detail::format_real(rhs);
    return out.str();
}

MetricReport validate_metric(const DissimilarityMeasure& measure, std::span<const Point> sample,
                             bool pseudo_allowed) {
    if (sample.size() < 3) throw InvalidArgument("metric validation needs at least 3 sample points");
    const std::size_t n = sample.size();
    const bool exact = measure.is_integer_valued();
    const auto d = distance_matrix(measure, sample);
    auto at = [&](std::size_t i, std::size_t j) { return d[i * n + j]; };

    MetricReport report;
    auto record = [&](Axiom axiom, std::vector<std::size_t> witness, double lhs, double rhs) {
        report.ok = false;
        if (report.violations.size() < MetricReport::kMaxViolations) {
            report.violations.push_back({axiom, std::move(witness), lhs, rhs});
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (at(i, i) != 0.0) record(Axiom::identity, {i, i}, at(i, i), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            ++report.pairs_checked;
            const double dij = at(i, j);
            const double dji = at(j, i);
            if (dij < 0.0 || dji < 0.0) record(Axiom::nonnegativity, {i, j}, std::min(dij, dji), 0.0);
            const bool symmetric = exact ? dij == dji : std::abs(dij - dji) <= kAbsTol + kRelTol * std::abs(dij);
            if (!symmetric) record(Axiom::symmetry, {i, j}, dij, dji);
            if (!pseudo_allowed && dij == 0.0 && !(sample[i] == sample[j])) {
                record(Axiom::indiscernibles, {i, j}, dij, 0.0);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                ++report.triples_checked;
                const double direct = at(i, k);
                const double detour = at(i, j) + at(j, k);
                if (!leq_tol(direct, detour, exact)) record(Axiom::triangle, {i, j, k}, direct, detour);
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

TransformFn::TransformFn(Family family, double param, std::string name, std::function<double(double)> fn)
    : family_(family), param_(param), name_(std::move(name)), fn_(std::move(fn)) {}

TransformFn TransformFn::identity() {
    return {Family::identity, 0.0, "identity", [](double t) { return t; }};
}

TransformFn TransformFn::power(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidArgument("power transform needs 0 < p <= 1 (got " + detail::format_real(p) + ")");
    }
    return {Family::power, p, "power:" + detail::format_real(p), [p](double t) { return std::pow(t, p); }};
}

TransformFn TransformFn::log1p() {
    return {Family::log1p, 0.0, "log1p", [](double t) { return std::log1p(t); }};
}

TransformFn TransformFn::bounded() {
    return {Family::bounded, 0.0, "bounded", [](double t) { return t / (1.0 + t); }};
}

TransformFn TransformFn::cap(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("cap transform needs a finite c > 0 (got " + detail::format_real(c) + ")");
    }
    return {Family::cap, c, "cap:" + detail::format_real(c), [c](double t) { return std::min(t, c); }};
}

TransformFn TransformFn::custom(std::string name, std::function<double(double)> fn) {
    if (!fn) throw InvalidArgument("custom transform has no function");
    TransformFn F(Family::custom, 0.0, std::move(name), std::move(fn));
    F.validate(10.0);
    return F;
}

TransformFn TransformFn::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string family = spec.substr(0, colon);
    std::optional<double> param;
    if (colon != std::string::npos) {
        param = detail::parse_real(std::string_view(spec).substr(colon + 1));
        if (!param) throw InvalidArgument("bad transform parameter in '" + spec + "'");
    }
    auto no_param = [&](TransformFn F) {
        if (param) throw InvalidArgument("transform '" + family + "' takes no parameter");
        return F;
    };
    if (family == "identity") return no_param(identity());
    if (family == "log1p") return no_param(log1p());
    if (family == "bounded") return no_param(bounded());
    if (family == "power" || family == "cap") {
        if (!param) throw InvalidArgument("transform '" + family + "' needs a parameter, e.g. " + family + ":0.5");
        return family == "power" ? power(*param) : cap(*param);
    }
    throw InvalidArgument("unknown transform '" + spec + "'");
}

double TransformFn::operator()(double t) const { return fn_(t); }

std::string TransformFn::spec() const { return name_; }

void TransformFn::validate(double upper) const {
    if (!(upper > 0.0) || !std::isfinite(upper)) throw InvalidArgument("transform validation range must be positive");
    if (fn_(0.0) != 0.0) throw InvalidArgument("transform '" + name_ + "' has F(0) != 0");

    constexpr std::size_t kGrid = 1024;
    std::vector<double> grid(kGrid);
    grid[0] = 0.0;
    const double lo = upper * 1e-6;
    const double ratio = std::pow(upper / lo, 1.0 / static_cast<double>(kGrid - 2));
    for (std::size_t i = 1; i < kGrid; ++i) grid[i] = lo * std::pow(ratio, static_cast<double>(i - 1));
    grid.back() = upper;

    std::vector<double> values(kGrid);
    for (std::size_t i = 0; i < kGrid; ++i) {
        values[i] = fn_(grid[i]);
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            throw InvalidArgument("transform '" + name_ + "' is not finite and nonnegative at t=" +
                                  detail::format_real(grid[i]));
        }
    }
    for (std::size_t i = 1; i < kGrid; ++i) {
        if (values[i] < values[i - 1] - kAbsTol) {
            throw InvalidArgument("transform '" + name_ + "' decreases near t=" + detail::format_real(grid[i]));
        }
    }
    auto concave_at = [&](std::size_t a, std::size_t b) {
        const double mid = fn_(0.5 * (grid[a] + grid[b]));
        return mid >= 0.5 * (values[a] + values[b]) - kAbsTol * (1.0 + std::abs(mid));
    };
    // Neighbouring pairs, plus every pair on a 64-point subgrid for long-range chords.
    for (std::size_t i = 0; i + 1 < kGrid; ++i) {
        if (!concave_at(i, i + 1) || (i + 2 < kGrid && !concave_at(i, i + 2))) {
            throw InvalidArgument("transform '" + name_ + "' is not concave near t=" + detail::format_real(grid[i]));
        }
    }
    for (std::size_t a = 0; a < kGrid; a += 16) {
        for (std::size_t b = a + 16; b < kGrid; b += 16) {
            if (!concave_at(a, b)) {
                throw InvalidArgument("transform '" + name_ + "' is not concave on [" + detail::format_real(grid[a]) +
                                      ", " + detail::format_real(grid[b]) + "]");
            }
        }
    }
}

DissimilarityMeasure metric_transform(const DissimilarityMeasure& measure, const TransformFn& F,
                                      std::span<const Point> sample) {
    double max_seen = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.size(); ++j) max_seen = std::max(max_seen, measure(sample[i], sample[j]));
    }
    F.validate(max_seen > 0.0 ? 10.0 * max_seen : 10.0);

    auto base = std::make_shared<const DissimilarityMeasure>(measure);
    DissimilarityMeasure::Traits traits = measure.traits();
    if (F.family() != TransformFn::Family::identity) traits.integer_valued = false;
    // cap collapses distinct distances only above c, never to zero, so pseudo-ness is inherited.
    return {MeasureKind::transformed,
            "transformed(" + F.spec() + "," + measure.name() + ")",
            measure.domain(),
            [base, F](const Point& x, const Point& y) { return F(base->unchecked(x, y)); },
            traits,
            base};
}

// ---------------------------------------------------------------------------

std::optional<LipschitzViolation> check_one_lipschitz(const RealFunction& f, const DissimilarityMeasure& measure,
                                                      std::span<const std::pair<Point, Point>> pairs) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[i];
        const double variation = std::abs(f(x) - f(y));
        const double dist = measure(x, y);
        if (!leq_tol(variation, dist)) return LipschitzViolation{i, variation, dist};
    }
    return std::nullopt;
}

RealFunction distance_to(const DissimilarityMeasure& measure, Point vantage) {
    return [measure, v = std::move(vantage)](const Point& x) { return measure(v, x); };
}

}  // namespace simsearch
