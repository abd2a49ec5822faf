#include "simsearch/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "simsearch/colour.hpp"
#include "simsearch/concentration.hpp"
#include "simsearch/errors.hpp"
#include "simsearch/histogram.hpp"
#include "simsearch/index.hpp"
#include "simsearch/prefilter.hpp"
#include "text.hpp"

namespace simsearch::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr int kReportVersion = 1;
constexpr std::size_t kDefaultQueryCount = 100;

const std::pair<Command, const char*> kCommands[] = {
    {Command::ingest, "ingest"},
    {Command::build_index, "build-index"},
    {Command::query, "query"},
    {Command::prefilter_run, "prefilter-run"},
    {Command::concentration, "concentration"},
    {Command::cover, "cover"},
    {Command::colour_experiment, "colour-experiment"},
};

const std::pair<InputFormat, const char*> kFormats[] = {
    {InputFormat::vectors, "vectors-delimited"},
    {InputFormat::strings, "strings-lines"},
    {InputFormat::histograms, "histograms"},
};

}  // namespace

const char* to_string(Command c) {
    for (const auto& [cmd, name] : kCommands) {
        if (cmd == c) return name;
    }
    return "?";
}

const char* to_string(InputFormat f) {
    for (const auto& [fmt, name] : kFormats) {
        if (fmt == f) return name;
    }
    return "?";
}

Command parse_command(const std::string& name) {
    for (const auto& [cmd, n] : kCommands) {
        if (name == n) return cmd;
    }
    throw InvalidArgument("unknown command '" + name + "'");
}

InputFormat parse_format(const std::string& name) {
    for (const auto& [fmt, n] : kFormats) {
        if (name == n) return fmt;
    }
    throw InvalidArgument("unknown input format '" + name + "'");
}

// ---------------------------------------------------------------------------
// Ingest

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    return in;
}

bool is_delimiter(char c) { return c == ',' || c == ';' || c == ' ' || c == '\t'; }

std::vector<Point> read_vectors(std::istream& in) {
    std::vector<Point> points;
    std::string line;
    std::size_t row = 0;
    std::size_t arity = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        Coords c;
        std::size_t pos = 0;
        std::size_t column = 0;
        while (pos < line.size()) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
            if (pos == line.size()) break;
            std::size_t end = pos;
            while (end < line.size() && !is_delimiter(line[end])) ++end;
            ++column;
            const auto value = detail::parse_real(std::string_view(line).substr(pos, end - pos));
            if (!value || !std::isfinite(*value)) {
                throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(column) +
                                     ": not a finite number: '" + line.substr(pos, end - pos) + "'",
                                 row, column);
            }
            c.push_back(*value);
            pos = end;
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
            if (pos < line.size() && is_delimiter(line[pos])) {
                ++pos;
                while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
                if (pos == line.size()) {
                    throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(column + 1) +
                                         ": missing value after delimiter",
                                     row, column + 1);
                }
            }
        }
        if (points.empty()) {
            arity = c.size();
        } else if (c.size() != arity) {
            throw ParseError("row " + std::to_string(row) + ": " + std::to_string(c.size()) + " values, expected " +
                                 std::to_string(arity),
                             row, std::min(c.size(), arity) + 1);
        }
        points.emplace_back(std::move(c));
    }
    return points;
}

std::vector<Point> read_strings(std::istream& in) {
    std::vector<Point> points;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        points.emplace_back(line);
    }
    return points;
}

double lattice_spacing(const std::string& ground_id) {
    const std::string prefix = "lattice:";
    if (ground_id.rfind(prefix, 0) != 0) {
        throw InvalidArgument("unsupported ground space '" + ground_id + "' (expected lattice:<spacing>)");
    }
    const auto h = detail::parse_real(ground_id.substr(prefix.size()));
    if (!h) throw InvalidArgument("bad lattice spacing in '" + ground_id + "'");
    return *h;
}

}  // namespace

Dataset ingest(const std::string& path, InputFormat format) {
    auto in = open_input(path);
    Dataset d;
    d.format = format;
    switch (format) {
    case InputFormat::vectors:
        d.points = read_vectors(in);
        break;
    case InputFormat::strings:
        d.points = read_strings(in);
        break;
    case InputFormat::histograms: {
        for (auto& rec : read_histograms(in)) {
            d.ground_id = rec.ground_id;
            d.points.emplace_back(rec.histogram.weights());
        }
        break;
    }
    }
    if (d.points.empty()) throw InvalidArgument("'" + path + "' holds no data points");
    return d;
}

DissimilarityMeasure resolve_measure(const std::string& spec, const std::string& transform, const Dataset& data) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string param = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    auto expect_format = [&](InputFormat f) {
        if (data.format != f) {
            throw DomainError("measure '" + name + "' needs " + to_string(f) + " input, got " +
                              to_string(data.format));
        }
    };

    std::optional<DissimilarityMeasure> m;
    if (name == "euclidean" || name == "l1") {
        expect_format(InputFormat::vectors);
        const std::size_t arity = data.points.front().coords().size();
        m = name == "euclidean" ? euclidean(arity) : l1(arity);
    } else if (name == "hamming" || name == "edit") {
        expect_format(InputFormat::strings);
        m = name == "hamming" ? hamming(param) : edit(param);
    } else if (name == "kantorovich" || name == "quadratic") {
        expect_format(InputFormat::histograms);
        const ColourLattice lattice(lattice_spacing(data.ground_id));
        if (lattice.size() != data.points.front().coords().size()) {
            throw DomainError("histograms have " + std::to_string(data.points.front().coords().size()) +
                              " bins but " + data.ground_id + " has " + std::to_string(lattice.size()) + " points");
        }
        m = name == "kantorovich" ? kantorovich_measure(lattice.ground()) : quadratic_measure(qbic_form(lattice.ground()));
    } else {
        throw InvalidArgument("unknown measure '" + spec + "'");
    }
    for (const auto& p : data.points) m->domain().check(p);

    const TransformFn F = TransformFn::parse(transform);
    if (F.family() == TransformFn::Family::identity) return *m;
    std::vector<Point> sample(data.points.begin(),
                              data.points.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(data.points.size(), 64)));
    return metric_transform(*m, F, sample);
}

// ---------------------------------------------------------------------------
// Config <-> JSON

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json config_to_json(const RunConfig& c) {
    Json j;
    j["command"] = to_string(c.command);
    j["input"] = c.input;
    j["format"] = c.format ? Json(to_string(*c.format)) : Json(nullptr);
    j["measure"] = c.measure;
    j["transform"] = c.transform;
    j["epsilon"] = opt(c.epsilon);
    j["k"] = opt(c.k);
    j["seed"] = c.seed;
    j["spacing"] = c.spacing;
    j["samples"] = opt(c.samples);
    j["leaf_capacity"] = c.leaf_capacity;
    j["branching"] = c.branching;
    j["coords"] = c.coords;
    j["index"] = c.index;
    j["queries"] = c.queries;
    j["method"] = c.method;
    j["dimension"] = opt(c.dimension);
    j["timing"] = c.timing;
    return j;
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

Json stats_json(const QueryStats& s) {
    return {{"nodes_visited", s.nodes_visited},
            {"nodes_pruned", s.nodes_pruned},
            {"distance_evaluations", s.distance_evaluations}};
}

Json point_json(const Point& p) {
    if (p.kind() == PointKind::symbols) return p.symbols();
    return p.coords();
}

InputFormat default_format(const std::string& measure) {
    const std::string name = measure.substr(0, measure.find(':'));
    if (name == "hamming" || name == "edit") return InputFormat::strings;
    if (name == "kantorovich" || name == "quadratic") return InputFormat::histograms;
    return InputFormat::vectors;
}

// Everything a command needs from --input and --measure.
struct Loaded {
    Dataset data;
    Workload workload;
};

Loaded load_workload(const RunConfig& c, QuerySampler sampler = {}) {
    if (c.input.empty()) throw InvalidArgument(std::string(to_string(c.command)) + " needs --input");
    Dataset data = ingest(c.input, c.format.value_or(default_format(c.measure)));
    DissimilarityMeasure m = resolve_measure(c.measure, c.transform, data);
    Workload w = make_workload(std::move(m), data.points, std::move(sampler));
    return {std::move(data), std::move(w)};
}

BuildConfig build_config(const RunConfig& c) {
    BuildConfig b;
    b.leaf_capacity = c.leaf_capacity;
    b.branching = c.branching;
    b.seed = c.seed;
    return b;
}

Json tree_summary(const IndexTree& t) {
    std::size_t leaves = 0;
    for (const auto& n : t.nodes()) leaves += n.is_leaf();
    return {{"nodes", t.nodes().size()}, {"leaves", leaves}, {"height", t.height()}};
}

void require_distinct_paths(const std::string& written, const std::string& input) {
    if (written.empty() || input.empty()) return;
    std::error_code ec;
    if (std::filesystem::exists(written, ec) && std::filesystem::equivalent(written, input, ec)) {
        throw InvalidArgument("refusing to overwrite the input file '" + input + "'");
    }
}

// ---------------------------------------------------------------------------
// Commands

Json cmd_ingest(const RunConfig& c) {
    const Loaded l = load_workload(c);
    Json r;
    r["format"] = to_string(l.data.format);
    r["points"] = l.data.points.size();
    r["measure"] = l.workload.measure.name();
    if (l.data.format == InputFormat::strings) {
        std::size_t lo = SIZE_MAX, hi = 0;
        for (const auto& p : l.data.points) {
            lo = std::min(lo, p.symbols().size());
            hi = std::max(hi, p.symbols().size());
        }
        r["min_length"] = lo;
        r["max_length"] = hi;
    } else {
        r["arity"] = l.data.points.front().coords().size();
    }
    if (!l.data.ground_id.empty()) r["ground"] = l.data.ground_id;
    return r;
}

Json cmd_build_index(const RunConfig& c) {
    if (c.index.empty()) throw InvalidArgument("build-index needs --index <path>");
    require_distinct_paths(c.index, c.input);
    const Loaded l = load_workload(c);
    const IndexTree tree = build_vp_tree(l.workload, build_config(c));
    std::ofstream out(c.index, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write index to '" + c.index + "'");
    save_index(out, tree);
    out.close();
    if (!out) throw Error("failed writing index to '" + c.index + "'");
    Json r;
    r["points"] = l.workload.dataset.size();
    r["measure"] = l.workload.measure.name();
    r["tree"] = tree_summary(tree);
    return r;
}

Json cmd_query(const RunConfig& c) {
    if (!c.epsilon && !c.k) throw InvalidArgument("query needs --epsilon, --k or both");
    const Loaded l = load_workload(c);
    const Workload& w = l.workload;

    std::optional<IndexTree> tree;
    std::string source;
    if (!c.index.empty()) {
        auto in = open_input(c.index);
        tree = load_index(in, w);
        source = "loaded";
    } else {
        tree = build_vp_tree(w, build_config(c));
        source = "built";
    }

    std::vector<Point> queries = w.dataset;
    if (!c.queries.empty()) {
        queries = ingest(c.queries, l.data.format).points;
        for (const auto& q : queries) w.measure.domain().check_pair(q, w.dataset.front());
    }

    Json r;
    r["points"] = w.dataset.size();
    r["measure"] = w.measure.name();
    r["index_source"] = source;
    r["tree"] = tree_summary(*tree);
    Json per = Json::array();
    QueryStats range_total, knn_total;
    bool agree = true;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        Json q;
        q["query"] = qi;
        if (c.epsilon) {
            const RangeResult res = range_query(*tree, queries[qi], *c.epsilon);
            const RangeResult scan = linear_range_scan(w, queries[qi], *c.epsilon);
            const bool same = res.ids == scan.ids;
            agree = agree && same;
            range_total += res.stats;
            q["range"] = {{"ids", res.ids}, {"stats", stats_json(res.stats)}, {"linear_scan_agrees", same}};
        }
        if (c.k) {
            const KnnResult res = knn_query(*tree, queries[qi], *c.k, c.seed);
            Json nb = Json::array();
            for (const auto& n : res.neighbours) nb.push_back({{"id", n.id}, {"distance", n.distance}});
            knn_total += res.stats;
            q["knn"] = {{"neighbours", nb}, {"range_queries", res.range_queries}, {"stats", stats_json(res.stats)}};
        }
        per.push_back(std::move(q));
    }
    r["queries"] = std::move(per);
    Json totals;
    if (c.epsilon) {
        totals["range"] = stats_json(range_total);
        totals["linear_scan_agrees"] = agree;
    }
    if (c.k) totals["knn"] = stats_json(knn_total);
    r["totals"] = std::move(totals);
    return r;
}

QuerySampler uniform_cube(std::size_t dim) {
    return [dim](Rng& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Coords x(dim);
        for (auto& v : x) v = u(rng);
        return Point(std::move(x));
    };
}

Json cmd_prefilter_run(const RunConfig& c) {
    if (!c.epsilon) throw InvalidArgument("prefilter-run needs --epsilon");
    std::optional<Workload> w;
    Json source;
    if (!c.input.empty()) {
        // --transform selects the approximation here, so ρ itself is loaded untransformed.
        RunConfig base = c;
        base.transform = "identity";
        Loaded l = load_workload(base);
        // Queries follow the empirical distribution of the dataset.
        auto pts = std::make_shared<const std::vector<Point>>(l.workload.dataset);
        l.workload.sampler = [pts](Rng& rng) {
            return (*pts)[std::uniform_int_distribution<std::size_t>(0, pts->size() - 1)(rng)];
        };
        w = std::move(l.workload);
        source = {{"kind", "file"}, {"path", c.input}};
    } else {
        if (!c.dimension) throw InvalidArgument("prefilter-run needs --input or --dimension");
        const std::size_t n = c.samples.value_or(1000);
        auto sampler = uniform_cube(*c.dimension);
        Rng rng = make_rng(c.seed, "cli.dataset");
        std::vector<Point> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(sampler(rng));
        Dataset d{InputFormat::vectors, pts, {}};
        w = make_workload(resolve_measure(c.measure, "identity", d), std::move(pts), sampler);
        source = {{"kind", "uniform-cube"}, {"dimension", *c.dimension}, {"points", n}};
    }

    std::optional<ApproxMeasure> approx;
    if (!c.coords.empty()) {
        std::vector<std::size_t> zero_based;
        for (std::size_t i : c.coords) {
            if (i == 0) throw InvalidArgument("--coords are 1-based");
            zero_based.push_back(i - 1);
        }
        approx = project_measure(w->measure, zero_based);
    } else if (TransformFn::parse(c.transform).family() != TransformFn::Family::identity) {
        approx = transformed_approx(w->measure, TransformFn::parse(c.transform));
    } else {
        approx = exact_approx(w->measure);
    }

    PrefilterPipeline::Options opts;
    opts.seed = c.seed;
    opts.build_index = w->dataset.size() > 256;
    opts.index_config = build_config(c);
    const PrefilterPipeline p(*w, *approx, opts);
    const std::size_t count = c.k.value_or(kDefaultQueryCount);
    const FalseHitProfile prof = false_hit_profile(p, *c.epsilon, count, c.seed);

    Json r;
    r["dataset"] = source;
    r["measure"] = w->measure.name();
    r["approximation"] = {{"label", approx->label},
                          {"measure", approx->d.name()},
                          {"slope", approx->slope},
                          {"intercept", approx->intercept}};
    r["audit"] = {{"pairs_checked", p.audit().pairs_checked}, {"worst_excess", p.audit().worst_excess}};
    r["candidate_generation"] = p.has_index() ? "index" : "linear-scan";
    Json recs = Json::array();
    std::size_t cand = 0, fh = 0;
    for (const auto& rec : prof.records) {
        recs.push_back({{"query_id", rec.query_id},
                        {"epsilon", rec.epsilon},
                        {"delta", rec.delta},
                        {"candidates", rec.candidates},
                        {"false_hits", rec.false_hits},
                        {"rate", rec.rate}});
        cand += rec.candidates;
        fh += rec.false_hits;
    }
    r["records"] = std::move(recs);
    r["summary"] = {{"queries", count},
                    {"max_rate", prof.max_rate},
                    {"mean_rate", prof.mean_rate},
                    {"worst_query", prof.worst_query},
                    {"worst_centre", point_json(prof.worst_centre)},
                    {"max_candidate_fraction", prof.max_candidate_fraction},
                    {"total_candidates", cand},
                    {"total_false_hits", fh}};
    return r;
}

ConcentrationMethod parse_concentration_method(const std::string& s) {
    if (s == "exact") return ConcentrationMethod::exact_enumeration;
    if (s == "isoperimetric") return ConcentrationMethod::hamming_isoperimetric;
    if (s == "ball") return ConcentrationMethod::ball_family;
    if (s == "lipschitz") return ConcentrationMethod::lipschitz_family;
    throw InvalidArgument("unknown concentration method '" + s + "' (exact, isoperimetric, ball, lipschitz)");
}

Json cmd_concentration(const RunConfig& c) {
    std::optional<ProbabilitySpace> space;
    const std::string measure_name = c.measure.substr(0, c.measure.find(':'));
    if (!c.input.empty()) {
        const Loaded l = load_workload(c);
        space = ProbabilitySpace::uniform(l.workload.dataset, l.workload.measure);
    } else if (measure_name == "hamming" && c.dimension) {
        space = ProbabilitySpace::hamming_cube(*c.dimension);
    } else if (c.dimension) {
        Dataset probe{InputFormat::vectors, {Point(Coords(*c.dimension, 0.0))}, {}};
        space = ProbabilitySpace::sampled(uniform_cube(*c.dimension), resolve_measure(c.measure, c.transform, probe));
    } else {
        throw InvalidArgument("concentration needs --input or --dimension");
    }

    ConcentrationConfig cfg;
    cfg.seed = c.seed;
    cfg.samples = c.samples.value_or(cfg.samples);
    if (!c.method.empty()) {
        cfg.method = parse_concentration_method(c.method);
    } else if (space->is_finite() && space->points().size() <= kEnumerationLimit) {
        cfg.method = ConcentrationMethod::exact_enumeration;
    } else if (!c.input.empty() || !space->is_finite() || measure_name != "hamming") {
        cfg.method = ConcentrationMethod::ball_family;
    } else {
        cfg.method = ConcentrationMethod::hamming_isoperimetric;
    }

    std::vector<double> grid;
    if (c.epsilon) {
        grid = {*c.epsilon};
    } else {
        grid = default_grid(space->discretize(cfg.samples, c.seed).diameter());
    }
    const ConcentrationEstimate e = estimate_concentration(*space, grid, cfg);
    Json r;
    r["method"] = to_string(e.method);
    r["seed"] = e.seed;
    r["grid"] = e.grid;
    r["values"] = e.alpha;
    r["sample_sizes"] = {{"points", e.points}, {"family", e.family_size}};
    r["lower_bound"] = e.lower_bound;
    return r;
}

Json cmd_cover(const RunConfig& c) {
    if (!c.epsilon) throw InvalidArgument("cover needs --epsilon");
    const Loaded l = load_workload(c);
    CoverConfig cfg;
    if (c.method == "exact") {
        cfg.method = CoverMethod::exact_small;
        cfg.exact_limit = l.workload.dataset.size();
    } else if (c.method == "greedy") {
        cfg.method = CoverMethod::greedy_upper;
    } else if (!c.method.empty()) {
        throw InvalidArgument("unknown cover method '" + c.method + "' (greedy, exact)");
    }
    const CoverReport cr = covering_number(l.workload.dataset, l.workload.measure, *c.epsilon, cfg);
    Json r;
    r["epsilon"] = cr.epsilon;
    r["n"] = cr.n;
    r["entropy"] = cr.entropy;
    r["method"] = to_string(cr.method);
    r["centres"] = cr.centres;
    return r;
}

Json cmd_colour(const RunConfig& c) {
    const ColourLattice lattice(c.spacing);
    const std::size_t k = c.k.value_or(10000);
    const double eps = c.epsilon.value_or(0.1);
    const std::size_t count = c.samples.value_or(10000);
    const ColourExperiment e = qbic_blowup_experiment(lattice, k, eps, count, c.seed);
    Json r;
    r["k"] = e.k;
    r["epsilon"] = e.epsilon;
    r["spacing"] = e.spacing;
    r["sample_count"] = e.sample_count;
    r["seed"] = e.seed;
    r["measured_mass"] = e.measured_mass;
    r["blowup_bound"] = e.blowup_bound;
    r["ball_area_ratio"] = e.ball_area.value;
    r["concentration_bound"] = e.concentration_bound;
    r["lattice_points"] = lattice.size();
    r["centre"] = e.centre;
    r["mass_standard_error"] = e.mass_standard_error;
    r["ball_area_closed_form"] = e.ball_area.closed_form;
    r["ball_area_standard_error"] = e.ball_area.standard_error;
    return r;
}

}  // namespace

std::string config_json(const RunConfig& config) { return config_to_json(config).dump(2); }

RunConfig config_from_report(const std::string& report_text) {
    Json j;
    try {
        j = Json::parse(report_text);
    } catch (const Json::parse_error& e) {
        throw InvalidArgument(std::string("report is not valid JSON: ") + e.what());
    }
    if (!j.contains("config")) throw InvalidArgument("report has no embedded config");
    const Json& cj = j["config"];
    try {
        RunConfig c;
        c.command = parse_command(cj.at("command").get<std::string>());
        c.input = cj.at("input").get<std::string>();
        if (auto f = get_opt<std::string>(cj, "format")) c.format = parse_format(*f);
        c.measure = cj.at("measure").get<std::string>();
        c.transform = cj.at("transform").get<std::string>();
        c.epsilon = get_opt<double>(cj, "epsilon");
        c.k = get_opt<std::size_t>(cj, "k");
        c.seed = cj.at("seed").get<std::uint64_t>();
        c.spacing = cj.at("spacing").get<double>();
        c.samples = get_opt<std::size_t>(cj, "samples");
        c.leaf_capacity = cj.at("leaf_capacity").get<std::size_t>();
        c.branching = cj.at("branching").get<std::size_t>();
        c.coords = cj.at("coords").get<std::vector<std::size_t>>();
        c.index = cj.at("index").get<std::string>();
        c.queries = cj.at("queries").get<std::string>();
        c.method = cj.at("method").get<std::string>();
        c.dimension = get_opt<std::size_t>(cj, "dimension");
        c.timing = cj.at("timing").get<bool>();
        return c;
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("malformed embedded config: ") + e.what());
    }
}

RunResult run(const RunConfig& config) {
    RunResult out;
    const auto start = std::chrono::steady_clock::now();
    try {
        require_distinct_paths(config.output, config.input);
        Json results;
        switch (config.command) {
        case Command::ingest: results = cmd_ingest(config); break;
        case Command::build_index: results = cmd_build_index(config); break;
        case Command::query: results = cmd_query(config); break;
        case Command::prefilter_run: results = cmd_prefilter_run(config); break;
        case Command::concentration: results = cmd_concentration(config); break;
        case Command::cover: results = cmd_cover(config); break;
        case Command::colour_experiment: results = cmd_colour(config); break;
        }
        Json report;
        report["tool"] = "simsearch";
        report["report_version"] = kReportVersion;
        report["config"] = config_to_json(config);
        report["seeds"] = {{"root", config.seed}, {"streams", "derived per module and task index"}};
        report["results"] = std::move(results);
        if (config.timing) {
            const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
            report["timing"] = {{"wall_seconds", secs.count()}};
        }
        out.report = report.dump(2) + "\n";
    } catch (const ParseError& e) {
        out.status = 1;
        out.diagnostic = std::string("parse error: ") + e.what();
    } catch (const Error& e) {
        out.status = 1;
        out.diagnostic = e.what();
    } catch (const std::exception& e) {
        out.status = 1;
        out.diagnostic = std::string("unexpected failure: ") + e.what();
    }
    return out;
}

}  // namespace simsearch::cli
