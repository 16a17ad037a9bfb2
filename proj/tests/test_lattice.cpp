#include <doctest.h>

#include <algorithm>
#include <set>

#include "ergochron/lattice.hpp"

using namespace ergochron;

namespace {

void check_table_invariants(const LatticeSpec& spec, const NeighborTable& t)
{
    REQUIRE(t.site_count() == spec.site_count());
    for (std::size_t j = 0; j < t.site_count(); ++j) {
        const auto& nb = t.neighbors(j);
        std::set<int> uniq(nb.begin(), nb.end());
        CHECK(uniq.size() == nb.size());
        CHECK(uniq.count(static_cast<int>(j)) == 0);
        for (int k : nb) {
            const auto& back = t.neighbors(static_cast<std::size_t>(k));
            CHECK(std::find(back.begin(), back.end(), static_cast<int>(j)) != back.end());
        }
    }
}

}  // namespace

TEST_CASE("periodic chain of 100 sites has two neighbours per site")
{
    const LatticeSpec spec{{100}, Boundary::periodic};
    const auto t = build_neighbor_table(spec);
    check_table_invariants(spec, t);
    CHECK(t.coordination() == 2);
    for (std::size_t j = 0; j < 100; ++j)
        CHECK(t.neighbors(j).size() == 2);
    CHECK(t.bond_count() == 100);
    CHECK(t.neighbors(0) == std::vector<int>{1, 99});
}

TEST_CASE("periodic 4x4x4 cube has six neighbours per site")
{
    const LatticeSpec spec{{4, 4, 4}, Boundary::periodic};
    const auto t = build_neighbor_table(spec);
    check_table_invariants(spec, t);
    CHECK(t.coordination() == 6);
    for (std::size_t j = 0; j < spec.site_count(); ++j)
        CHECK(t.neighbors(j).size() == 6);
    CHECK(t.bond_count() == 64 * 6 / 2);
}

TEST_CASE("periodic 10x10 square")
{
    const LatticeSpec spec{{10, 10}, Boundary::periodic};
    const auto t = build_neighbor_table(spec);
    check_table_invariants(spec, t);
    CHECK(t.coordination() == 4);
    CHECK(t.bond_count() == 200);
    // Site (0, 0): neighbours (0, 1), (0, 9), (1, 0), (9, 0).
    CHECK(t.neighbors(0) == std::vector<int>{1, 9, 10, 90});
}

TEST_CASE("open chain of three sites has degrees 1, 2, 1")
{
    const LatticeSpec spec{{3}, Boundary::open};
    const auto t = build_neighbor_table(spec);
    check_table_invariants(spec, t);
    CHECK(t.neighbors(0).size() == 1);
    CHECK(t.neighbors(1).size() == 2);
    CHECK(t.neighbors(2).size() == 1);
    CHECK(t.bond_count() == 2);
}

TEST_CASE("open 3x4 rectangle")
{
    const LatticeSpec spec{{3, 4}, Boundary::open};
    const auto t = build_neighbor_table(spec);
    check_table_invariants(spec, t);
    // 3 rows of 3 horizontal bonds plus 2 x 4 vertical bonds.
    CHECK(t.bond_count() == 17);
    CHECK(t.neighbors(0).size() == 2);
    CHECK(t.neighbors(5).size() == 4);
}

TEST_CASE("single open site has no bonds")
{
    const LatticeSpec spec{{1}, Boundary::open};
    const auto t = build_neighbor_table(spec);
    CHECK(t.site_count() == 1);
    CHECK(t.neighbors(0).empty());
    CHECK(t.bond_count() == 0);
}

TEST_CASE("invalid geometries are rejected")
{
    CHECK_THROWS_AS(build_neighbor_table({{2}, Boundary::periodic}), std::invalid_argument);
    CHECK_THROWS_AS(build_neighbor_table({{10, 2}, Boundary::periodic}), std::invalid_argument);
    CHECK_THROWS_AS(build_neighbor_table({{}, Boundary::periodic}), std::invalid_argument);
    CHECK_THROWS_AS(build_neighbor_table({{3, 3, 3, 3}, Boundary::periodic}), std::invalid_argument);
    CHECK_THROWS_AS(build_neighbor_table({{0}, Boundary::open}), std::invalid_argument);
    CHECK_NOTHROW(build_neighbor_table({{2}, Boundary::open}));
}

TEST_CASE("row-major index is a bijection with the last axis fastest")
{
    const LatticeSpec spec{{3, 4, 5}, Boundary::periodic};
    CHECK(spec.site_count() == 60);
    CHECK(spec.index_of({0, 0, 1}) == 1);
    CHECK(spec.index_of({0, 1, 0}) == 5);
    CHECK(spec.index_of({1, 0, 0}) == 20);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < spec.site_count(); ++i) {
        const auto c = spec.coords_of(i);
        CHECK(spec.index_of(c) == i);
        seen.insert(spec.index_of(c));
    }
    CHECK(seen.size() == spec.site_count());
}

TEST_CASE("labels and boundary names")
{
    CHECK(LatticeSpec{{100}, Boundary::periodic}.label() == "1D N=100");
    CHECK(LatticeSpec{{10, 10}, Boundary::periodic}.label() == "2D 10x10");
    CHECK(boundary_from_string(to_string(Boundary::open)) == Boundary::open);
    CHECK(boundary_from_string("periodic") == Boundary::periodic);
    CHECK_THROWS_AS(boundary_from_string("twisted"), std::invalid_argument);
}
