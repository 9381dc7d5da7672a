#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include "impedscope/masks.hpp"
#include "impedscope/rng.hpp"

using namespace impedscope;

namespace {

const std::string kConfig = IMPEDSCOPE_CONFIG_DIR;

struct Fixture {
    ElectrodeArray array = ElectrodeArray::load(kConfig + "/geometry.json");
    PatternUniverse universe{array};
    MaskRegistry registry = MaskRegistry::load(kConfig + "/masks.json");
};

} // namespace

TEST_CASE("all thirteen named masks expand to their registry cardinalities") {
    Fixture fx;
    const std::map<std::string, size_t> expected = {
        {"All", 7728},        {"Long a+", 16},      {"Long a+ ext.", 120},
        {"Med. a+ ext.", 120}, {"Skip1 close", 360}, {"Adj. close", 292},
        {"Med. adj.", 387},   {"Adj. far", 660},    {"Skip1 medium", 440},
        {"Skip1 far", 224},   {"Opp. close", 264},  {"Opp. medium", 264},
        {"Opp. far", 264}};
    REQUIRE(fx.registry.names().size() == expected.size());
    for (const auto& [name, count] : expected) {
        const MaskSet m = fx.registry.build(name, fx.universe, fx.array);
        CHECK(m.indices.size() == count);
        CHECK(std::is_sorted(m.indices.begin(), m.indices.end()));
        CHECK(m.indices.back() < fx.universe.size());
    }
}

TEST_CASE("the All mask mean distances sit within 5% of the reference values") {
    Fixture fx;
    const MaskSet all = fx.registry.build("All", fx.universe, fx.array);
    CHECK(all.mean_ii_distance_mm == Catch::Approx(4.54).epsilon(0.05));
    CHECK(all.mean_vv_distance_mm == Catch::Approx(2.71).epsilon(0.05));
}

TEST_CASE("a wrong expected count fails validation naming the mask") {
    Fixture fx;
    nlohmann::json j;
    j["masks"] = nlohmann::json::array();
    j["masks"].push_back({{"name", "Broken"},
                          {"expected_count", 5},
                          {"rule", "entries"},
                          {"entries",
                           {{{"ii", {26, 27}}, {"mode", "within"}, {"sets", {{1, 2, 3}}}}}}});
    const MaskRegistry bad = MaskRegistry::from_json(j);
    try {
        bad.build("Broken", fx.universe, fx.array);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("Broken") != std::string::npos);
    }
}

TEST_CASE("mask_stats of a single pattern returns that pair's distances") {
    nlohmann::json j;
    j["name"] = "tiny";
    j["inner"] = {{{"id", 1}, {"x", 0.0}, {"y", 0.0}}, {{"id", 2}, {"x", 0.0}, {"y", 1.5}}};
    j["outer"] = {{{"id", 10}, {"x", 0.0}, {"y", -2.0}}, {{"id", 11}, {"x", 3.0}, {"y", -2.0}}};
    const ElectrodeArray a = ElectrodeArray::from_json(j);
    const PatternUniverse u(a);
    MaskSet m;
    m.name = "single";
    m.indices = {u.index_of(IIVVPattern(10, 11, 1, 2))};
    const MaskStats s = mask_stats(m, u, a);
    CHECK(s.mean_ii_distance_mm == Catch::Approx(3.0));
    CHECK(s.mean_vv_distance_mm == Catch::Approx(1.5));
}

TEST_CASE("mask stats do not depend on pattern order") {
    Fixture fx;
    MaskSet m = fx.registry.build("Skip1 far", fx.universe, fx.array);
    MaskSet shuffled = m;
    Rng rng(7);
    rng.shuffle(shuffled.indices);
    const MaskStats s1 = mask_stats(m, fx.universe, fx.array);
    const MaskStats s2 = mask_stats(shuffled, fx.universe, fx.array);
    CHECK(s1.mean_ii_distance_mm == s2.mean_ii_distance_mm);
    CHECK(s1.mean_vv_distance_mm == s2.mean_vv_distance_mm);
}

TEST_CASE("z-threshold boundary behaviour") {
    std::vector<double> means = {10.0, 20.0, 30.0, 40.0};
    bool oor = false;
    MaskSet above_all = build_zthreshold_mask(means, 5.0, ThresholdSide::Above, &oor);
    CHECK(above_all.indices.size() == 4);
    CHECK(oor);

    MaskSet empty = build_zthreshold_mask(means, 45.0, ThresholdSide::Above, &oor);
    CHECK(empty.indices.empty());
    CHECK(oor);

    MaskSet inside = build_zthreshold_mask(means, 25.0, ThresholdSide::Above, &oor);
    CHECK(inside.indices == std::vector<size_t>{2, 3});
    CHECK_FALSE(oor);
}

TEST_CASE("both sides of any threshold partition the universe") {
    Rng rng(11);
    std::vector<double> means(128);
    for (double& v : means) v = rng.uniform(1.0, 1000.0);
    for (int sweep = 0; sweep < 50; ++sweep) {
        const double thr = rng.uniform(0.0, 1100.0);
        const MaskSet below = build_zthreshold_mask(means, thr, ThresholdSide::Below);
        const MaskSet above = build_zthreshold_mask(means, thr, ThresholdSide::Above);
        std::vector<size_t> joined = below.indices;
        joined.insert(joined.end(), above.indices.begin(), above.indices.end());
        std::sort(joined.begin(), joined.end());
        REQUIRE(joined.size() == means.size());
        for (size_t i = 0; i < joined.size(); ++i) REQUIRE(joined[i] == i);
    }
}
