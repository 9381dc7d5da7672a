#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "impedscope/geometry.hpp"
#include "impedscope/rng.hpp"

using namespace impedscope;

namespace {

ElectrodeArray standard_array() {
    return ElectrodeArray::load(std::string(IMPEDSCOPE_CONFIG_DIR) + "/geometry.json");
}

ElectrodeArray toy_array(int n_inner, int n_outer) {
    nlohmann::json j;
    j["name"] = "toy";
    j["inner"] = nlohmann::json::array();
    j["outer"] = nlohmann::json::array();
    for (int i = 0; i < n_inner; ++i)
        j["inner"].push_back({{"id", i + 1}, {"x", double(i)}, {"y", 0.0}});
    for (int i = 0; i < n_outer; ++i)
        j["outer"].push_back({{"id", 100 + i}, {"x", double(i)}, {"y", 5.0}});
    return ElectrodeArray::from_json(j);
}

} // namespace

TEST_CASE("standard array has 24 inner and 8 outer electrodes, no electrode 13") {
    const ElectrodeArray a = standard_array();
    CHECK(a.n_inner() == 24);
    CHECK(a.n_outer() == 8);
    CHECK_FALSE(a.has_inner(13));
    CHECK(a.has_inner(12));
    CHECK(a.has_inner(14));
}

TEST_CASE("standard array yields 28 II pairs, 276 VV pairs, 7728 patterns") {
    const ElectrodeArray a = standard_array();
    const PatternUniverse u(a);
    CHECK(u.n_ii_pairs() == 28);
    CHECK(u.n_vv_pairs() == 276);
    CHECK(u.size() == 7728);
}

TEST_CASE("4 outer / 3 inner array yields C(4,2)*C(3,2) = 18 patterns") {
    const PatternUniverse u(toy_array(3, 4));
    CHECK(u.size() == 18);
}

TEST_CASE("enumeration is deterministic") {
    const ElectrodeArray a = standard_array();
    const PatternUniverse u1(a), u2(a);
    REQUIRE(u1.size() == u2.size());
    for (size_t i = 0; i < u1.size(); ++i) CHECK(u1[i] == u2[i]);
}

TEST_CASE("patterns are duplicate-free under canonical ordering for random sub-arrays") {
    Rng rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
        const int ni = 2 + int(rng.below(6));
        const int no = 2 + int(rng.below(4));
        const PatternUniverse u(toy_array(ni, no));
        std::set<IIVVPattern> seen(u.patterns().begin(), u.patterns().end());
        REQUIRE(seen.size() == u.size());
    }
}

TEST_CASE("pattern index lookup inverts enumeration") {
    const PatternUniverse u(toy_array(4, 3));
    for (size_t i = 0; i < u.size(); ++i) CHECK(u.index_of(u[i]) == i);
    CHECK_THROWS_AS(u.index_of(IIVVPattern(1, 2, 3, 4)), ValidationError);
}
