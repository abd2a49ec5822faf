#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "simsearch/errors.hpp"
#include "simsearch/index.hpp"

using namespace simsearch;

namespace {

std::vector<Point> uniform_cloud(std::size_t n, std::size_t dim, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> out;
    for (std::size_t i = 0; i < n; ++i) {
        Coords c(dim);
        for (auto& x : c) x = u(rng);
        out.emplace_back(std::move(c));
    }
    return out;
}

std::vector<Point> random_strings(std::size_t n, std::size_t max_len, Rng& rng) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> sym(0, 3);
    std::vector<Point> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s(len(rng), 'a');
        for (auto& ch : s) ch = static_cast<char>('a' + sym(rng));
        out.emplace_back(std::move(s));
    }
    return out;
}

QuerySampler cube_sampler(std::size_t dim) {
    return [dim](Rng& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Coords c(dim);
        for (auto& x : c) x = u(rng);
        return Point(std::move(c));
    };
}

// Walks the tree and checks the structural invariants at every node.
void audit_tree(const IndexTree& tree) {
    const Workload& w = tree.workload();
    std::vector<std::size_t> all(w.dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    ASSERT_EQ(tree.node(0).block, all);
    for (std::size_t t = 0; t < tree.nodes().size(); ++t) {
        const IndexNode& node = tree.node(t);
        if (node.is_leaf()) {
            EXPECT_LE(node.block.size(), tree.config().leaf_capacity);
            continue;
        }
        std::vector<std::size_t> united;
        for (std::size_t c : node.children) {
            const IndexNode& child = tree.node(c);
            ASSERT_TRUE(child.certificate);
            EXPECT_EQ(child.certificate->vantage, *node.vantage);
            for (std::size_t id : child.block) {
                const double f = w.measure(w.dataset[*node.vantage], w.dataset[id]);
                EXPECT_LE(child.certificate->lower, f);
                EXPECT_LE(f, child.certificate->upper);
                united.push_back(id);
            }
        }
        std::sort(united.begin(), united.end());
        EXPECT_EQ(united, node.block) << "node " << t;
    }
}

}  // namespace

TEST(Workload, RejectsEmptyAndIncompatible) {
    EXPECT_THROW(make_workload(euclidean(), {}), InvalidArgument);
    EXPECT_THROW(make_workload(euclidean(2), {Point{0.0, 1.0}, Point{1.0}}), DomainError);
    EXPECT_THROW(make_workload(euclidean(), {Point{0.0, 1.0}, Point{1.0}}), DomainError);
    EXPECT_THROW(make_workload(hamming(), {Point("ab"), Point{1.0}}), DomainError);
}

TEST(Workload, SamplerIsDeterministic) {
    const Workload w = make_workload(euclidean(3), {Point{0.0, 0.0, 0.0}}, cube_sampler(3));
    Rng a = make_rng(7, "queries"), b = make_rng(7, "queries");
    for (int i = 0; i < 5; ++i) EXPECT_EQ(w.sample_query(a), w.sample_query(b));
    const Workload bare = make_workload(euclidean(3), {Point{0.0, 0.0, 0.0}});
    EXPECT_THROW(bare.sample_query(a), InvalidArgument);
}

TEST(BuildVpTree, SingletonIsOneLeaf) {
    const IndexTree tree = build_vp_tree(make_workload(euclidean(), {Point{1.0, 2.0}}));
    ASSERT_EQ(tree.nodes().size(), 1u);
    EXPECT_TRUE(tree.node(0).is_leaf());
    EXPECT_EQ(tree.node(0).block, std::vector<std::size_t>{0});
    EXPECT_FALSE(tree.node(0).certificate);
    EXPECT_EQ(tree.height(), 0u);
}

TEST(BuildVpTree, CollinearChildrenCoverParent) {
    std::vector<Point> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(Point{static_cast<double>(i)});
    BuildConfig cfg;
    cfg.leaf_capacity = 2;
    cfg.branching = 2;
    const IndexTree tree = build_vp_tree(make_workload(euclidean(1), pts), cfg);
    EXPECT_GT(tree.nodes().size(), 1u);
    audit_tree(tree);
}

TEST(BuildVpTree, RandomCloudInvariantsAcrossConfigs) {
    Rng rng = make_rng(11, "cloud");
    const Workload w = make_workload(euclidean(3), uniform_cloud(100, 3, rng));
    for (std::size_t branching : {2u, 3u, 5u}) {
        for (std::size_t leaf : {1u, 4u, 10u}) {
            for (VantagePolicy policy : {VantagePolicy::max_spread, VantagePolicy::random, VantagePolicy::first}) {
                BuildConfig cfg{leaf, branching, policy, 3, 24};
                audit_tree(build_vp_tree(w, cfg));
            }
        }
    }
}

TEST(BuildVpTree, DuplicatePointsTerminate) {
    std::vector<Point> pts(20, Point{1.0, 1.0});
    BuildConfig cfg;
    cfg.leaf_capacity = 1;
    const IndexTree tree = build_vp_tree(make_workload(euclidean(2), pts), cfg);
    audit_tree(tree);
    EXPECT_EQ(range_query(tree, Point{1.0, 1.0}, 0.5).ids.size(), 20u);
}

TEST(BuildVpTree, RejectsNonTriangleMeasureWithWitness) {
    const auto squared = custom_measure("squared", {PointKind::coords, 1, {}}, [](const Point& x, const Point& y) {
        const double d = x.coords()[0] - y.coords()[0];
        return d * d;
    });
    std::vector<Point> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(Point{static_cast<double>(i)});
    try {
        build_vp_tree(make_workload(squared, pts));
        FAIL() << "expected NonMetricError";
    } catch (const NonMetricError& e) {
        EXPECT_NE(std::string(e.what()).find("triangle"), std::string::npos) << e.what();
    }
}

TEST(BuildVpTree, RejectsBadConfig) {
    const Workload w = make_workload(euclidean(), {Point{0.0}, Point{1.0}});
    BuildConfig cfg;
    cfg.branching = 1;
    EXPECT_THROW(build_vp_tree(w, cfg), InvalidArgument);
    cfg.branching = 2;
    cfg.leaf_capacity = 0;
    EXPECT_THROW(build_vp_tree(w, cfg), InvalidArgument);
}

TEST(RangeQuery, Basics) {
    Rng rng = make_rng(5, "cloud");
    const auto pts = uniform_cloud(50, 2, rng);
    const IndexTree tree = build_vp_tree(make_workload(euclidean(2), pts));
    EXPECT_TRUE(range_query(tree, Point{100.0, 100.0}, 1e-9).ids.empty());
    const auto hit = range_query(tree, pts[17], 1e-12);
    EXPECT_NE(std::find(hit.ids.begin(), hit.ids.end(), 17u), hit.ids.end());
    EXPECT_THROW(range_query(tree, pts[0], 0.0), InvalidArgument);
    EXPECT_THROW(range_query(tree, pts[0], -1.0), InvalidArgument);
    EXPECT_THROW(range_query(tree, Point{1.0}, 0.5), DomainError);
}

TEST(RangeQuery, StrictInequality) {
    const IndexTree tree = build_vp_tree(make_workload(euclidean(1), {Point{0.0}, Point{1.0}, Point{2.0}}));
    EXPECT_EQ(range_query(tree, Point{0.0}, 1.0).ids, std::vector<std::size_t>{0});
    EXPECT_EQ(range_query(tree, Point{0.0}, std::nextafter(1.0, 2.0)).ids, (std::vector<std::size_t>{0, 1}));
}

TEST(RangeQuery, MatchesLinearScanOnEuclidean) {
    Rng rng = make_rng(1, "cloud");
    const Workload w = make_workload(euclidean(4), uniform_cloud(1000, 4, rng), cube_sampler(4));
    BuildConfig cfg;
    cfg.leaf_capacity = 6;
    const IndexTree tree = build_vp_tree(w, cfg);
    std::uniform_real_distribution<double> eps(0.01, 0.6);
    std::size_t nodes = tree.nodes().size(), internal = 0;
    for (const auto& n : tree.nodes()) internal += !n.is_leaf();
    std::size_t pruned_total = 0;
    for (int q = 0; q < 1000; ++q) {
        const Point centre = w.sample_query(rng);
        const double e = eps(rng);
        const auto got = range_query(tree, centre, e);
        ASSERT_EQ(got.ids, oracle::scan_range(w.measure, w.dataset, centre, e)) << "query " << q;
        EXPECT_LE(got.stats.distance_evaluations, w.dataset.size() + internal);
        EXPECT_LE(got.stats.nodes_visited + got.stats.nodes_pruned, nodes);
        EXPECT_EQ(got.stats.nodes_pruned, got.pruned.size());
        pruned_total += got.stats.nodes_pruned;
    }
    EXPECT_GT(pruned_total, 0u);
}

TEST(RangeQuery, MatchesLinearScanOnStrings) {
    Rng rng = make_rng(2, "strings");
    const Workload w = make_workload(edit("abcd"), random_strings(300, 8, rng));
    const IndexTree tree = build_vp_tree(w);
    std::uniform_int_distribution<int> eps(1, 5);
    const auto queries = random_strings(1000, 8, rng);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const double e = eps(rng);
        ASSERT_EQ(range_query(tree, queries[q], e).ids, oracle::scan_range(w.measure, w.dataset, queries[q], e));
        // Just above an integer radius, where a +- eps rounds back onto the lattice.
        const double up = std::nextafter(e, 10.0);
        ASSERT_EQ(range_query(tree, queries[q], up).ids, oracle::scan_range(w.measure, w.dataset, queries[q], up));
    }
    std::vector<Point> words;
    for (int i = 0; i < 300; ++i) {
        std::string t(6, 'a');
        for (auto& ch : t) ch = static_cast<char>('a' + eps(rng) % 4);
        words.emplace_back(std::move(t));
    }
    const Workload h = make_workload(hamming("abcd"), words);
    const IndexTree htree = build_vp_tree(h);
    for (int q = 0; q < 200; ++q) {
        std::string s(6, 'a');
        for (auto& ch : s) ch = static_cast<char>('a' + eps(rng) % 4);
        ASSERT_EQ(range_query(htree, s, 2.0).ids, oracle::scan_range(h.measure, h.dataset, s, 2.0));
    }
}

TEST(RangeQuery, PrunedNodesAreFarFromCentre) {
    Rng rng = make_rng(3, "cloud");
    const Workload w = make_workload(euclidean(2), uniform_cloud(400, 2, rng), cube_sampler(2));
    const IndexTree tree = build_vp_tree(w, {4, 3, VantagePolicy::max_spread, 9, 24});
    std::uniform_real_distribution<double> eps(0.02, 0.3);
    std::size_t replayed = 0;
    for (int q = 0; q < 300; ++q) {
        const Point centre = w.sample_query(rng);
        const double e = eps(rng);
        for (std::size_t t : range_query(tree, centre, e).pruned) {
            EXPECT_GE(exact_set_distance(tree.node(t).block, centre, w), e);
            ++replayed;
        }
    }
    EXPECT_GT(replayed, 100u);
}

TEST(KnnQuery, ThreePointsOnALine) {
    const IndexTree tree = build_vp_tree(make_workload(euclidean(1), {Point{0.0}, Point{1.0}, Point{3.0}}));
    const auto r = knn_query(tree, Point{0.9}, 1);
    ASSERT_EQ(r.neighbours.size(), 1u);
    EXPECT_EQ(r.neighbours[0].id, 1u);
}

TEST(KnnQuery, WholeDatasetMinusCentre) {
    Rng rng = make_rng(4, "cloud");
    const auto pts = uniform_cloud(30, 2, rng);
    const Workload w = make_workload(euclidean(2), pts);
    const IndexTree tree = build_vp_tree(w);
    const auto r = knn_query(tree, pts[3], 29);
    ASSERT_EQ(r.neighbours.size(), 29u);
    for (const auto& nb : r.neighbours) EXPECT_NE(nb.id, 3u);
    for (std::size_t i = 1; i < r.neighbours.size(); ++i) {
        EXPECT_LE(r.neighbours[i - 1].distance, r.neighbours[i].distance);
    }
    EXPECT_THROW(knn_query(tree, pts[3], 30), InvalidArgument);
    EXPECT_THROW(knn_query(tree, pts[3], 0), InvalidArgument);
    EXPECT_NO_THROW(knn_query(tree, Point{5.0, 5.0}, 30));
}

TEST(KnnQuery, MatchesSortedLinearScan) {
    Rng rng = make_rng(6, "cloud");
    const Workload w = make_workload(euclidean(3), uniform_cloud(800, 3, rng), cube_sampler(3));
    const IndexTree tree = build_vp_tree(w);
    for (int q = 0; q < 500; ++q) {
        const Point centre = (q % 5 == 0) ? w.dataset[static_cast<std::size_t>(q)] : w.sample_query(rng);
        for (std::size_t k : {1u, 5u, 10u}) {
            const auto got = knn_query(tree, centre, k, static_cast<std::uint64_t>(q));
            const auto want = oracle::scan_knn(w.measure, w.dataset, centre, k);
            ASSERT_EQ(got.neighbours.size(), want.size());
            for (std::size_t i = 0; i < k; ++i) {
                EXPECT_EQ(got.neighbours[i].id, want[i].first);
                EXPECT_EQ(got.neighbours[i].distance, want[i].second);
            }
        }
    }
}

TEST(KnnQuery, TiesBrokenByIdAndPrefixProperty) {
    // Integer-valued measure: many exact ties.
    Rng rng = make_rng(8, "strings");
    const Workload w = make_workload(edit("abcd"), random_strings(200, 5, rng));
    const IndexTree tree = build_vp_tree(w);
    for (int q = 0; q < 50; ++q) {
        const Point centre = random_strings(1, 5, rng)[0];
        std::vector<Neighbour> prev;
        for (std::size_t k = 1; k <= 15; ++k) {
            const auto got = knn_query(tree, centre, k).neighbours;
            const auto want = oracle::scan_knn(w.measure, w.dataset, centre, k);
            for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(got[i].id, want[i].first);
            EXPECT_TRUE(std::equal(prev.begin(), prev.end(), got.begin()));
            prev = got;
        }
    }
}

TEST(KnnQuery, ZeroStartingRadius) {
    // Every sampled start point coincides with the centre.
    std::vector<Point> pts(10, Point{0.0});
    pts.push_back(Point{7.0});
    const IndexTree tree = build_vp_tree(make_workload(euclidean(1), pts));
    const auto r = knn_query(tree, Point{0.0}, 1);
    EXPECT_EQ(r.neighbours[0].id, 10u);
    EXPECT_EQ(r.neighbours[0].distance, 7.0);
}

TEST(ExactSetDistance, Examples) {
    const Workload w = make_workload(euclidean(2), {Point{0.0, 0.0}, Point{1.0, 1.0}});
    const std::vector<std::size_t> first{0};
    EXPECT_DOUBLE_EQ(exact_set_distance(first, Point{3.0, 4.0}, w), 5.0);
    const std::vector<std::size_t> both{0, 1};
    EXPECT_EQ(exact_set_distance(both, Point{1.0, 1.0}, w), 0.0);
    EXPECT_THROW(exact_set_distance({}, Point{1.0, 1.0}, w), InvalidArgument);
}

TEST(Persistence, RoundTripReproducesResultsAndStats) {
    Rng rng = make_rng(10, "cloud");
    const Workload w = make_workload(euclidean(3), uniform_cloud(300, 3, rng), cube_sampler(3));
    const IndexTree tree = build_vp_tree(w, {5, 3, VantagePolicy::max_spread, 42, 24});
    std::stringstream buf;
    save_index(buf, tree);
    const std::string dump = buf.str();
    const IndexTree loaded = load_index(buf, w);
    std::stringstream again;
    save_index(again, loaded);
    EXPECT_EQ(again.str(), dump);
    for (int q = 0; q < 200; ++q) {
        const Point c = w.sample_query(rng);
        const auto a = range_query(tree, c, 0.2);
        const auto b = range_query(loaded, c, 0.2);
        EXPECT_EQ(a.ids, b.ids);
        EXPECT_EQ(a.pruned, b.pruned);
        EXPECT_EQ(a.stats.nodes_visited, b.stats.nodes_visited);
        EXPECT_EQ(a.stats.nodes_pruned, b.stats.nodes_pruned);
        EXPECT_EQ(a.stats.distance_evaluations, b.stats.distance_evaluations);
    }
}

TEST(Persistence, RejectsMismatchAndCorruption) {
    Rng rng = make_rng(12, "cloud");
    const Workload w = make_workload(euclidean(2), uniform_cloud(40, 2, rng));
    std::stringstream buf;
    save_index(buf, build_vp_tree(w));
    const std::string dump = buf.str();

    std::istringstream other_measure(dump);
    EXPECT_THROW(load_index(other_measure, make_workload(l1(2), w.dataset)), DomainError);
    std::istringstream other_size(dump);
    auto fewer = w.dataset;
    fewer.pop_back();
    EXPECT_THROW(load_index(other_size, make_workload(euclidean(2), fewer)), DomainError);

    std::istringstream bad_magic("not-an-index 1\n");
    EXPECT_THROW(load_index(bad_magic, w), ParseError);
    std::istringstream truncated(dump.substr(0, dump.size() / 2));
    EXPECT_THROW(load_index(truncated, w), ParseError);
    std::string bumped = dump;
    bumped.replace(bumped.find(" 1\n"), 3, " 9\n");
    std::istringstream version(bumped);
    EXPECT_THROW(load_index(version, w), ParseError);
}
