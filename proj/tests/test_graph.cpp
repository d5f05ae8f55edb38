#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "lago/distance.hpp"
#include "lago/graph.hpp"
#include "lago/rng.hpp"

using namespace lago;

namespace {

const char* kAppendixCsv =
    "eng,fra,ita\n"
    "eng,0,0.46,0.51\n"
    "fra,0.46,0,0.55\n"
    "ita,0.51,0.55,0\n";

std::set<std::pair<int, int>> edge_set(const LanguageGraph& g) {
    return {g.edges.begin(), g.edges.end()};
}

DistanceMatrix random_distance(int n, std::uint64_t seed) {
    DistanceMatrix d;
    d.labels = default_labels(n);
    d.values = Matrix::Zero(n, n);
    const rng::Key key{seed, rng::Stream::base_transform, 7};
    std::uint64_t counter = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = rng::uniform_half_open(key, counter++);
            d.values(i, j) = v;
            d.values(j, i) = v;
        }
    return d;
}

} // namespace

TEST_CASE("distance matrix loads the worked three-language example", "[graph]") {
    const auto d = load_distance_matrix(kAppendixCsv);
    REQUIRE(d.labels == std::vector<std::string>{"eng", "fra", "ita"});
    CHECK(d.values(0, 1) == Catch::Approx(0.46));
    CHECK(d.values(0, 2) == Catch::Approx(0.51));
    CHECK(d.values(1, 2) == Catch::Approx(0.55));
    CHECK(d.values(1, 0) == d.values(0, 1));
    CHECK(d.values.diagonal().isZero());
}

TEST_CASE("distance matrix accepts a single language", "[graph]") {
    const auto d = load_distance_matrix("eng\neng,0\n");
    REQUIRE(d.size() == 1);
    CHECK(d.values(0, 0) == 0.0);
    const auto g = build_graph(d, 0.5);
    CHECK(g.edges.empty());
    CHECK(g.degrees == std::vector<int>{0});
}

TEST_CASE("distance matrix ingestion rejects malformed input", "[graph]") {
    SECTION("asymmetry beyond tolerance") {
        const char* csv =
            "eng,fra\n"
            "eng,0,0.46\n"
            "fra,0.47,0\n";
        CHECK_THROWS_AS(load_distance_matrix(csv), DataError);
    }
    SECTION("asymmetry within tolerance is averaged") {
        const char* csv =
            "eng,fra\n"
            "eng,0,0.4600000001\n"
            "fra,0.46,0\n";
        const auto d = load_distance_matrix(csv);
        CHECK(d.values(0, 1) == Catch::Approx(0.46000000005));
        CHECK(d.values(0, 1) == d.values(1, 0));
    }
    SECTION("non-square") {
        CHECK_THROWS_AS(load_distance_matrix("eng,fra\neng,0,0.4\n"), DataError);
    }
    SECTION("negative entry") {
        CHECK_THROWS_AS(load_distance_matrix("a,b\na,0,-0.1\nb,-0.1,0\n"), DataError);
    }
    SECTION("non-finite entry") {
        CHECK_THROWS_AS(load_distance_matrix("a,b\na,0,inf\nb,inf,0\n"), DataError);
    }
    SECTION("duplicate labels") {
        CHECK_THROWS_AS(load_distance_matrix("a,a\na,0,0.1\na,0.1,0\n"), DataError);
    }
    SECTION("nonzero diagonal") {
        CHECK_THROWS_AS(load_distance_matrix("a,b\na,0.2,0.1\nb,0.1,0\n"), DataError);
    }
    SECTION("row label mismatch") {
        CHECK_THROWS_AS(load_distance_matrix("a,b\nb,0,0.1\na,0.1,0\n"), DataError);
    }
    SECTION("garbage value") {
        CHECK_THROWS_AS(load_distance_matrix("a,b\na,0,xyz\nb,xyz,0\n"), DataError);
    }
}

TEST_CASE("thresholding reproduces the worked topology at all four radii", "[graph]") {
    const auto d = load_distance_matrix(kAppendixCsv);

    CHECK(build_graph(d, 0.45).edges.empty());
    CHECK(edge_set(build_graph(d, 0.47)) == std::set<std::pair<int, int>>{{0, 1}});
    CHECK(edge_set(build_graph(d, 0.52)) == std::set<std::pair<int, int>>{{0, 1}, {0, 2}});
    CHECK(edge_set(build_graph(d, 0.56)) ==
          std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});

    // boundary is strict: 0.46 is not < 0.46
    CHECK(build_graph(d, 0.46).edges.empty());

    const auto g = build_graph(d, 0.52);
    CHECK(g.degrees == std::vector<int>{2, 1, 1});
}

TEST_CASE("connected components partition the node set", "[graph]") {
    const auto d = load_distance_matrix(kAppendixCsv);
    CHECK(connected_components(build_graph(d, 0.52)) ==
          std::vector<std::vector<int>>{{0, 1, 2}});
    CHECK(connected_components(build_graph(d, 0.45)) ==
          std::vector<std::vector<int>>{{0}, {1}, {2}});

    const auto g = make_graph(default_labels(4), {{0, 1}, {2, 3}});
    CHECK(connected_components(g) == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
}

TEST_CASE("edge sets grow monotonically with the threshold", "[graph]") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto d = random_distance(6, seed);
        const rng::Key key{seed, rng::Stream::node_deviation, 1};
        double r1 = rng::uniform_half_open(key, 0);
        double r2 = rng::uniform_half_open(key, 1);
        if (r1 > r2) std::swap(r1, r2);
        const auto lo = edge_set(build_graph(d, r1));
        const auto hi = edge_set(build_graph(d, r2));
        for (const auto& e : lo) CHECK(hi.count(e) == 1);
    }
}

TEST_CASE("build_graph commutes with label permutations", "[graph]") {
    const auto d = random_distance(5, 17);
    const double r = 0.5;
    const auto g = build_graph(d, r);

    // permute: new index k holds old index perm[k]
    const std::vector<int> perm{3, 0, 4, 1, 2};
    DistanceMatrix pd;
    pd.labels.resize(5);
    pd.values = Matrix::Zero(5, 5);
    for (int a = 0; a < 5; ++a) {
        pd.labels[a] = d.labels[static_cast<std::size_t>(perm[a])];
        for (int b = 0; b < 5; ++b) pd.values(a, b) = d.values(perm[a], perm[b]);
    }
    const auto pg = build_graph(pd, r);

    std::vector<int> inverse(5);
    for (int a = 0; a < 5; ++a) inverse[static_cast<std::size_t>(perm[a])] = a;
    std::set<std::pair<int, int>> expected;
    for (auto [i, j] : g.edges) {
        int a = inverse[static_cast<std::size_t>(i)], b = inverse[static_cast<std::size_t>(j)];
        if (a > b) std::swap(a, b);
        expected.emplace(a, b);
    }
    CHECK(edge_set(pg) == expected);
}

TEST_CASE("adjacency view matches (1 - sign(D - r)) / 2 off the diagonal", "[graph]") {
    const auto sign_plus = [](double x) { return x >= 0.0 ? 1.0 : -1.0; };  // sign(0) = +1
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto d = random_distance(5, seed);
        for (const double r : {0.2, 0.5, 0.9}) {
            const auto a = adjacency_matrix(build_graph(d, r));
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    if (i == j) {
                        CHECK(a(i, j) == 0.0);
                    } else {
                        CHECK(a(i, j) == (1.0 - sign_plus(d.values(i, j) - r)) / 2.0);
                    }
                }
        }
    }
}

TEST_CASE("graph JSON export has the documented schema", "[graph]") {
    const auto d = load_distance_matrix(kAppendixCsv);
    const auto g = build_graph(d, 0.47);
    const auto j = graph_to_json(g);
    REQUIRE(j.size() == 2);
    CHECK(j.at("labels") == nlohmann::json({"eng", "fra", "ita"}));
    CHECK(j.at("edges") == nlohmann::json::array({{0, 1}}));

    const auto g2 = graph_from_json(j);
    CHECK(g2.labels == g.labels);
    CHECK(g2.edges == g.edges);
    CHECK(g2.degrees == g.degrees);
}

TEST_CASE("explicit graph construction rejects bad edges", "[graph]") {
    CHECK_THROWS_AS(make_graph(default_labels(3), {{0, 0}}), DataError);
    CHECK_THROWS_AS(make_graph(default_labels(3), {{0, 5}}), DataError);
    const auto g = make_graph(default_labels(3), {{2, 0}, {0, 2}});
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 2}});  // normalized + deduplicated
}
