#include "simsearch/prefilter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "simsearch/errors.hpp"
#include "text.hpp"

namespace simsearch {

namespace {

double modulus_tol(double bound) { return kAbsTol + kRelTol * std::abs(bound); }

std::size_t fixed_arity(const DissimilarityMeasure& m, const char* what) {
    if (m.domain().kind != PointKind::coords || m.domain().arity == 0) {
        throw InvalidArgument(std::string(what) + " needs a coordinate measure of fixed arity, got " + m.name());
    }
    return m.domain().arity;
}

}  // namespace

ApproxMeasure exact_approx(const DissimilarityMeasure& rho) { return {rho, 1.0, 0.0, "exact"}; }

ApproxMeasure project_measure(const DissimilarityMeasure& base, std::vector<std::size_t> coords) {
    if (base.kind() != MeasureKind::euclidean) {
        throw InvalidArgument("projection needs a Euclidean base measure, got " + base.name());
    }
    const std::size_t n = fixed_arity(base, "projection");
    if (coords.empty()) throw InvalidArgument("projection: empty coordinate set");
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    if (coords.back() >= n) {
        throw InvalidArgument("projection: coordinate " + std::to_string(coords.back() + 1) + " exceeds arity " +
                              std::to_string(n));
    }
    std::string name = "projection[";
    for (std::size_t i = 0; i < coords.size(); ++i) name += (i ? "," : "") + std::to_string(coords[i] + 1);
    name += "](" + base.name() + ")";

    auto fn = [coords](const Point& x, const Point& y) {
        const Coords& a = x.coords();
        const Coords& b = y.coords();
        double sum = 0.0;
        for (std::size_t i : coords) sum += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(sum);
    };
    DissimilarityMeasure d(MeasureKind::projected, name, base.domain(), fn, {.pseudo = coords.size() < n},
                           std::make_shared<const DissimilarityMeasure>(base), coords);
    return {std::move(d), 1.0, 0.0, name};
}

ApproxMeasure transformed_approx(const DissimilarityMeasure& rho, const TransformFn& F) {
    using Family = TransformFn::Family;
    switch (F.family()) {
    case Family::identity:
    case Family::log1p:
    case Family::bounded:
    case Family::cap:
        break;
    default:
        throw InvalidArgument("transform " + F.spec() + " is not dominated by the identity; no modulus known");
    }
    DissimilarityMeasure d = metric_transform(rho, F);
    std::string label = d.name();
    return {std::move(d), 1.0, 0.0, std::move(label)};
}

ApproxMeasure norm_approx(const DissimilarityMeasure& rho) {
    const std::size_t n = fixed_arity(rho, "norm approximation");
    if (rho.kind() == MeasureKind::l1) return {euclidean(n), 1.0, 0.0, "euclidean-for-l1"};
    if (rho.kind() == MeasureKind::euclidean) {
        return {l1(n), std::sqrt(static_cast<double>(n)), 0.0, "l1-for-euclidean"};
    }
    throw InvalidArgument("norm approximation needs an l1 or Euclidean measure, got " + rho.name());
}

ModulusAudit audit_modulus(const Workload& w, const ApproxMeasure& approx, std::uint64_t seed,
                           std::size_t sample_pairs) {
    if (approx.slope < 0.0 || approx.intercept < 0.0 || !std::isfinite(approx.slope) ||
        !std::isfinite(approx.intercept)) {
        throw InvalidArgument("modulus coefficients must be finite and nonnegative");
    }
    ModulusAudit audit;
    audit.worst_excess = -std::numeric_limits<double>::infinity();
    auto check = [&](const Point& x, const Point& y, const std::string& where) {
        const double r = w.measure(x, y);
        const double dv = approx.d(x, y);
        const double bound = approx.slope * r + approx.intercept;
        ++audit.pairs_checked;
        audit.worst_excess = std::max(audit.worst_excess, dv - bound);
        if (dv > bound + modulus_tol(bound)) {
            std::ostringstream msg;
            msg << "modulus audit failed for " << approx.label << " on " << where << ": rho = "
                << detail::format_real(r) << ", d = " << detail::format_real(dv) << " > "
                << detail::format_real(approx.slope) << "*rho + " << detail::format_real(approx.intercept);
            throw ModulusError(msg.str());
        }
    };

    Rng rng = make_rng(seed, "prefilter.audit");
    std::uniform_int_distribution<std::size_t> pick(0, w.dataset.size() - 1);
    for (std::size_t i = 0; i < sample_pairs; ++i) {
        if (w.sampler) {
            const Point q = w.sample_query(rng);
            if (i % 2 == 0) {
                check(q, w.sample_query(rng), "sampled pair " + std::to_string(i));
            } else {
                const std::size_t id = pick(rng);
                check(q, w.dataset[id], "sampled query " + std::to_string(i) + " and point " + std::to_string(id));
            }
        } else {
            const std::size_t a = pick(rng), b = pick(rng);
            check(w.dataset[a], w.dataset[b], "points " + std::to_string(a) + ", " + std::to_string(b));
        }
    }
    if (w.dataset.size() <= 200) {
        for (std::size_t a = 0; a < w.dataset.size(); ++a) {
            for (std::size_t b = a + 1; b < w.dataset.size(); ++b) {
                check(w.dataset[a], w.dataset[b], "points " + std::to_string(a) + ", " + std::to_string(b));
            }
        }
    }
    if (audit.pairs_checked == 0) audit.worst_excess = 0.0;
    return audit;
}

PrefilterPipeline::PrefilterPipeline(const Workload& workload, ApproxMeasure approx, Options options)
    : rho_(std::make_shared<const Workload>(workload)),
      d_workload_{approx.d, workload.dataset, workload.sampler},
      approx_(std::move(approx)) {
    workload.validate();
    d_workload_.validate();
    audit_ = audit_modulus(*rho_, approx_, options.seed, options.audit_pairs);
    if (options.build_index) index_ = build_vp_tree(d_workload_, options.index_config);
}

PrefilterPipeline::PrefilterPipeline(const Workload& workload, ApproxMeasure approx)
    : PrefilterPipeline(workload, std::move(approx), Options{}) {}

FilteredResult filtered_range_query(const PrefilterPipeline& p, const Point& centre, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("range query radius must be positive");
    const Workload& w = p.workload();
    w.measure.domain().check_pair(centre, w.dataset.front());

    FilteredResult out;
    auto& s = out.stats;
    s.delta = p.approx_.delta(epsilon);
    s.candidate_radius = std::nextafter(s.delta + modulus_tol(s.delta), std::numeric_limits<double>::infinity());
    s.used_index = p.index_.has_value();

    const RangeResult cand = s.used_index ? range_query(*p.index_, centre, s.candidate_radius)
                                          : linear_range_scan(p.d_workload_, centre, s.candidate_radius);
    s.candidates = cand.ids.size();
    s.d_evaluations = cand.stats.distance_evaluations;
    for (std::size_t id : cand.ids) {
        ++s.rho_evaluations;
        if (w.measure.unchecked(w.dataset[id], centre) < epsilon) {
            out.ids.push_back(id);
        }
    }
    s.verified = out.ids.size();
    s.false_hits = s.candidates - s.verified;
    return out;
}

FalseHitProfile false_hit_profile(const PrefilterPipeline& p, double epsilon, std::size_t query_count,
                                  std::uint64_t seed) {
    FalseHitProfile prof;
    const double n = static_cast<double>(p.workload().dataset.size());
    double total = 0.0;
    for (std::size_t i = 0; i < query_count; ++i) {
        Rng rng = make_rng(seed, "prefilter.query", i);
        const Point centre = p.workload().sample_query(rng);
        const FilteredResult r = filtered_range_query(p, centre, epsilon);
        const double rate = r.stats.false_hit_rate();
        prof.records.push_back({i, epsilon, r.stats.delta, r.stats.candidates, r.stats.false_hits, rate});
        total += rate;
        if (i == 0 || rate > prof.max_rate) {
            prof.max_rate = rate;
            prof.worst_query = i;
            prof.worst_centre = centre;
        }
        prof.max_candidate_fraction = std::max(prof.max_candidate_fraction, static_cast<double>(r.stats.candidates) / n);
    }
    if (query_count > 0) prof.mean_rate = total / static_cast<double>(query_count);
    return prof;
}

}  // namespace simsearch
