#include "simsearch/index.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "simsearch/errors.hpp"
#include "text.hpp"

namespace simsearch {

void Workload::validate() const {
    if (dataset.empty()) throw InvalidArgument("workload: dataset is empty");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        try {
            measure.domain().check(dataset[i]);
        } catch (const DomainError& e) {
            throw DomainError("workload: dataset point " + std::to_string(i) + ": " + e.what());
        }
    }
    if (measure.domain().arity == 0 && measure.domain().kind == PointKind::coords) {
        for (const auto& p : dataset) measure.domain().check_pair(dataset.front(), p);
    }
}

Point Workload::sample_query(Rng& rng) const {
    if (!sampler) throw InvalidArgument("workload has no query sampler");
    Point q = sampler(rng);
    measure.domain().check_pair(q, dataset.front());
    return q;
}

Workload make_workload(DissimilarityMeasure measure, std::vector<Point> dataset, QuerySampler sampler) {
    Workload w{std::move(measure), std::move(dataset), std::move(sampler)};
    w.validate();
    return w;
}

QueryStats& QueryStats::operator+=(const QueryStats& other) noexcept {
    nodes_visited += other.nodes_visited;
    nodes_pruned += other.nodes_pruned;
    distance_evaluations += other.distance_evaluations;
    return *this;
}

std::size_t IndexTree::height() const {
    std::vector<std::size_t> depth(nodes_.size(), 0);
    std::size_t h = 0;
    // Children always have larger ids than their parent.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (std::size_t c : nodes_[i].children) depth[c] = depth[i] + 1;
        h = std::max(h, depth[i]);
    }
    return h;
}

namespace {

std::vector<std::size_t> sample_ids(const std::vector<std::size_t>& block, std::size_t count, Rng& rng) {
    if (block.size() <= count) return block;
    std::vector<std::size_t> out;
    std::sample(block.begin(), block.end(), std::back_inserter(out), count, rng);
    return out;
}

std::size_t choose_vantage(const Workload& w, const std::vector<std::size_t>& block, VantagePolicy policy,
                           Rng& rng) {
    switch (policy) {
    case VantagePolicy::first:
        return block.front();
    case VantagePolicy::random:
        return block[std::uniform_int_distribution<std::size_t>(0, block.size() - 1)(rng)];
    case VantagePolicy::max_spread:
        break;
    }
    const auto candidates = sample_ids(block, 8, rng);
    const auto probes = sample_ids(block, 16, rng);
    std::size_t best = candidates.front();
    double best_score = -1.0;
    for (std::size_t c : candidates) {
        double sum = 0.0;
        for (std::size_t p : probes) sum += w.measure.unchecked(w.dataset[c], w.dataset[p]);
        const double score = sum / static_cast<double>(probes.size());
        if (score > best_score || (score == best_score && c < best)) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

void check_triangle_sample(const Workload& w, const BuildConfig& config) {
    const std::size_t n = w.dataset.size();
    if (n < 3 || config.validation_sample < 3) return;
    Rng rng = make_rng(config.seed, "index.validate");
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto ids = sample_ids(all, config.validation_sample, rng);
    std::vector<Point> sample;
    sample.reserve(ids.size());
    for (std::size_t id : ids) sample.push_back(w.dataset[id]);
    const MetricReport report = validate_metric(w.measure, sample, true);
    if (report.ok) return;
    AxiomViolation v = report.violations.front();
    for (auto& idx : v.witness) idx = ids[idx];
    throw NonMetricError("index build aborted: " + w.measure.name() + " fails on dataset points: " + v.describe());
}

// Slack added to the pruning test so that rounding, both in the computed
// distances and in a - eps / b + eps, can never turn a true hit into a pruned one.
double prune_slack(double f, const NodeCertificate& c, double epsilon) {
    return kAbsTol + kRelTol * (std::abs(f) + std::abs(c.lower) + std::abs(c.upper) + epsilon);
}

}  // namespace

IndexTree build_vp_tree(const Workload& workload, const BuildConfig& config) {
    workload.validate();
    if (config.leaf_capacity < 1) throw InvalidArgument("leaf capacity must be at least 1");
    if (config.branching < 2) throw InvalidArgument("branching must be at least 2");
    check_triangle_sample(workload, config);

    IndexTree tree;
    tree.workload_ = std::make_shared<const Workload>(workload);
    tree.config_ = config;
    const Workload& w = *tree.workload_;

    Rng rng = make_rng(config.seed, "index.build");
    IndexNode root;
    root.block.resize(w.dataset.size());
    std::iota(root.block.begin(), root.block.end(), 0);
    tree.nodes_.push_back(std::move(root));

    // Breadth-first so node ids grow with depth.
    for (std::size_t t = 0; t < tree.nodes_.size(); ++t) {
        if (tree.nodes_[t].block.size() <= config.leaf_capacity) continue;
        const std::vector<std::size_t> block = tree.nodes_[t].block;
        const std::size_t v = choose_vantage(w, block, config.policy, rng);

        std::vector<std::pair<double, std::size_t>> keyed;
        keyed.reserve(block.size());
        for (std::size_t id : block) keyed.emplace_back(w.measure.unchecked(w.dataset[v], w.dataset[id]), id);
        std::sort(keyed.begin(), keyed.end());

        tree.nodes_[t].vantage = v;
        const std::size_t groups = std::min(config.branching, block.size());
        for (std::size_t g = 0; g < groups; ++g) {
            const std::size_t lo = g * block.size() / groups;
            const std::size_t hi = (g + 1) * block.size() / groups;
            if (lo == hi) continue;
            IndexNode child;
            child.parent = t;
            child.certificate = NodeCertificate{v, keyed[lo].first, keyed[hi - 1].first};
            for (std::size_t i = lo; i < hi; ++i) child.block.push_back(keyed[i].second);
            std::sort(child.block.begin(), child.block.end());
            tree.nodes_[t].children.push_back(tree.nodes_.size());
            tree.nodes_.push_back(std::move(child));
        }
    }
    return tree;
}

RangeResult range_query(const IndexTree& tree, const Point& centre, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("range query radius must be positive");
    const Workload& w = tree.workload();
    w.measure.domain().check_pair(centre, w.dataset.front());

    RangeResult out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t t = stack.back();
        stack.pop_back();
        const IndexNode& node = tree.node(t);
        ++out.stats.nodes_visited;
        if (node.is_leaf()) {
            for (std::size_t id : node.block) {
                const double d = w.measure.unchecked(w.dataset[id], centre);
                ++out.stats.distance_evaluations;
                if (d < epsilon) {
                    out.ids.push_back(id);
                    out.distances.push_back(d);
                }
            }
            continue;
        }
        const double f = w.measure.unchecked(w.dataset[*node.vantage], centre);
        ++out.stats.distance_evaluations;
        // Reverse order so children are expanded left to right.
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
            const NodeCertificate& c = *tree.node(*it).certificate;
            const double slack = prune_slack(f, c, epsilon);
            if (f <= c.lower - epsilon - slack || f >= c.upper + epsilon + slack) {
                ++out.stats.nodes_pruned;
                out.pruned.push_back(*it);
            } else {
                stack.push_back(*it);
            }
        }
    }

    std::vector<std::size_t> order(out.ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.ids[a] < out.ids[b]; });
    RangeResult sorted;
    sorted.stats = out.stats;
    sorted.pruned = std::move(out.pruned);
    std::sort(sorted.pruned.begin(), sorted.pruned.end());
    for (std::size_t i : order) {
        sorted.ids.push_back(out.ids[i]);
        sorted.distances.push_back(out.distances[i]);
    }
    return sorted;
}

RangeResult linear_range_scan(const Workload& w, const Point& centre, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("range query radius must be positive");
    w.measure.domain().check_pair(centre, w.dataset.front());
    RangeResult out;
    for (std::size_t id = 0; id < w.dataset.size(); ++id) {
        const double d = w.measure.unchecked(w.dataset[id], centre);
        ++out.stats.distance_evaluations;
        if (d < epsilon) {
            out.ids.push_back(id);
            out.distances.push_back(d);
        }
    }
    return out;
}

KnnResult knn_query(const IndexTree& tree, const Point& centre, std::size_t k, std::uint64_t seed) {
    const Workload& w = tree.workload();
    w.measure.domain().check_pair(centre, w.dataset.front());
    if (k == 0) throw InvalidArgument("k must be positive");
    const auto available = static_cast<std::size_t>(
        std::count_if(w.dataset.begin(), w.dataset.end(), [&](const Point& p) { return !(p == centre); }));
    if (k > available) {
        throw InvalidArgument("k = " + std::to_string(k) + " exceeds the " + std::to_string(available) +
                              " points available");
    }

    KnnResult out;
    auto gather = [&](double radius) {
        RangeResult r = range_query(tree, centre, radius);
        out.stats += r.stats;
        ++out.range_queries;
        std::vector<Neighbour> found;
        for (std::size_t i = 0; i < r.ids.size(); ++i) {
            if (!(w.dataset[r.ids[i]] == centre)) found.push_back({r.ids[i], r.distances[i]});
        }
        std::sort(found.begin(), found.end(), [](const Neighbour& a, const Neighbour& b) {
            return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
        });
        return found;
    };

    Rng rng = make_rng(seed, "index.knn");
    std::uniform_int_distribution<std::size_t> pick(0, w.dataset.size() - 1);
    double radius = w.measure.unchecked(w.dataset[pick(rng)], centre);
    ++out.stats.distance_evaluations;
    for (int tries = 0; tries < 8 && !(radius > 0.0); ++tries) {
        radius = std::max(radius, w.measure.unchecked(w.dataset[pick(rng)], centre));
        ++out.stats.distance_evaluations;
    }
    if (!(radius > 0.0)) radius = 1.0;

    std::vector<Neighbour> found = gather(radius);
    while (found.size() < k) {
        radius *= 2.0;
        if (!std::isfinite(radius)) throw Error("k-NN radius schedule diverged");
        found = gather(radius);
    }
    // Shrink to the k-th best distance and certify with one final query.
    const double rk = found[k - 1].distance;
    found = gather(std::nextafter(rk, std::numeric_limits<double>::infinity()));
    found.resize(k);
    out.neighbours = std::move(found);
    return out;
}

double exact_set_distance(std::span<const std::size_t> block, const Point& x, const Workload& workload) {
    if (block.empty()) throw InvalidArgument("exact_set_distance: empty block");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t id : block) best = std::min(best, workload.measure(workload.dataset.at(id), x));
    return best;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kMagic = "simsearch-index";
constexpr int kVersion = 1;

std::string opt_id(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "-"; }

std::optional<std::size_t> read_opt_id(std::istream& in, std::size_t line) {
    std::string tok;
    if (!(in >> tok)) throw ParseError("index: truncated node record", line);
    if (tok == "-") return std::nullopt;
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(tok, &pos);
        if (pos != tok.size()) throw ParseError("index: bad id '" + tok + "'", line);
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw ParseError("index: bad id '" + tok + "'", line);
    }
}

std::size_t read_id(std::istream& in, std::size_t line) {
    auto v = read_opt_id(in, line);
    if (!v) throw ParseError("index: missing id", line);
    return *v;
}

double read_real(std::istream& in, std::size_t line) {
    std::string tok;
    if (!(in >> tok)) throw ParseError("index: truncated node record", line);
    auto v = detail::parse_real(tok);
    if (!v) throw ParseError("index: bad number '" + tok + "'", line);
    return *v;
}

void expect(std::istream& in, const std::string& word, std::size_t line) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw ParseError("index: expected '" + word + "'", line);
}

const char* policy_name(VantagePolicy p) {
    switch (p) {
    case VantagePolicy::max_spread: return "max_spread";
    case VantagePolicy::random: return "random";
    case VantagePolicy::first: return "first";
    }
    return "?";
}

VantagePolicy parse_policy(const std::string& s, std::size_t line) {
    if (s == "max_spread") return VantagePolicy::max_spread;
    if (s == "random") return VantagePolicy::random;
    if (s == "first") return VantagePolicy::first;
    throw ParseError("index: unknown vantage policy '" + s + "'", line);
}

}  // namespace

void save_index(std::ostream& out, const IndexTree& tree) {
    const auto& c = tree.config();
    out << kMagic << ' ' << kVersion << '\n';
    out << "measure " << tree.workload().measure.name() << '\n';
    out << "points " << tree.workload().dataset.size() << '\n';
    out << "config " << c.leaf_capacity << ' ' << c.branching << ' ' << policy_name(c.policy) << ' ' << c.seed
        << ' ' << c.validation_sample << '\n';
    out << "nodes " << tree.nodes().size() << '\n';
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const IndexNode& n = tree.nodes()[i];
        out << "node " << i << " parent " << opt_id(n.parent) << " vantage " << opt_id(n.vantage) << " cert ";
        if (n.certificate) {
            out << n.certificate->vantage << ' ' << detail::format_real(n.certificate->lower) << ' '
                << detail::format_real(n.certificate->upper);
        } else {
            out << "- - -";
        }
        out << " block " << n.block.size();
        for (std::size_t id : n.block) out << ' ' << id;
        out << " children " << n.children.size();
        for (std::size_t id : n.children) out << ' ' << id;
        out << '\n';
    }
}

IndexTree load_index(std::istream& in, const Workload& workload) {
    workload.validate();
    std::string line;
    std::size_t row = 0;
    auto next_line = [&]() -> std::istringstream {
        if (!std::getline(in, line)) throw ParseError("index: unexpected end of file", row + 1);
        ++row;
        return std::istringstream(line);
    };

    {
        auto s = next_line();
        std::string magic;
        int version = 0;
        if (!(s >> magic >> version) || magic != kMagic) throw ParseError("index: not an index file", row);
        if (version != kVersion) throw ParseError("index: unsupported version " + std::to_string(version), row);
    }
    {
        next_line();
        const std::string prefix = "measure ";
        if (line.rfind(prefix, 0) != 0) throw ParseError("index: expected 'measure'", row);
        const std::string name = line.substr(prefix.size());
        if (name != workload.measure.name()) {
            throw DomainError("index was built for measure '" + name + "', workload uses '" +
                              workload.measure.name() + "'");
        }
    }
    {
        auto s = next_line();
        expect(s, "points", row);
        const std::size_t n = read_id(s, row);
        if (n != workload.dataset.size()) {
            throw DomainError("index was built over " + std::to_string(n) + " points, workload has " +
                              std::to_string(workload.dataset.size()));
        }
    }
    IndexTree tree;
    {
        auto s = next_line();
        expect(s, "config", row);
        tree.config_.leaf_capacity = read_id(s, row);
        tree.config_.branching = read_id(s, row);
        std::string policy;
        s >> policy;
        tree.config_.policy = parse_policy(policy, row);
        std::uint64_t seed = 0;
        if (!(s >> seed)) throw ParseError("index: bad seed", row);
        tree.config_.seed = seed;
        tree.config_.validation_sample = read_id(s, row);
    }
    std::size_t count = 0;
    {
        auto s = next_line();
        expect(s, "nodes", row);
        count = read_id(s, row);
    }
    const std::size_t npoints = workload.dataset.size();
    for (std::size_t i = 0; i < count; ++i) {
        auto s = next_line();
        expect(s, "node", row);
        if (read_id(s, row) != i) throw ParseError("index: node ids out of order", row);
        IndexNode n;
        expect(s, "parent", row);
        n.parent = read_opt_id(s, row);
        expect(s, "vantage", row);
        n.vantage = read_opt_id(s, row);
        expect(s, "cert", row);
        if (auto v = read_opt_id(s, row)) {
            const double a = read_real(s, row);
            const double b = read_real(s, row);
            n.certificate = NodeCertificate{*v, a, b};
        } else {
            expect(s, "-", row);
            expect(s, "-", row);
        }
        expect(s, "block", row);
        n.block.resize(read_id(s, row));
        for (auto& id : n.block) {
            id = read_id(s, row);
            if (id >= npoints) throw ParseError("index: point id out of range", row);
        }
        expect(s, "children", row);
        n.children.resize(read_id(s, row));
        for (auto& id : n.children) {
            id = read_id(s, row);
            if (id <= i || id >= count) throw ParseError("index: bad child id", row);
        }
        if (!n.children.empty() && !n.vantage) throw ParseError("index: internal node without vantage", row);
        if ((i == 0) == n.certificate.has_value()) throw ParseError("index: certificate on the wrong nodes", row);
        tree.nodes_.push_back(std::move(n));
    }
    if (tree.nodes_.empty()) throw ParseError("index: no nodes", row);
    tree.workload_ = std::make_shared<const Workload>(workload);
    return tree;
}

}  // namespace simsearch
