#include <catch2/catch.hpp>

#include <vector>

#include "cellinf/complex.hpp"
#include "cellinf/random.hpp"
#include "cellinf/spanning_tree.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cellinf;

namespace {

using fixtures::code_of;

Eigen::VectorXi ints(std::initializer_list<int> values)
{
    Eigen::VectorXi v(static_cast<Eigen::Index>(values.size()));
    int i = 0;
    for (int x : values)
        v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("graph construction rejects self-loops, duplicates and bad ids")
{
    CHECK(code_of([] { OrientedGraph(3, {{0, 0}}); }) == ErrorCode::InvalidGraph);
    CHECK(code_of([] { OrientedGraph(3, {{0, 1}, {1, 0}}); }) == ErrorCode::InvalidGraph);
    CHECK(code_of([] { OrientedGraph(2, {{0, 2}}); }) == ErrorCode::InvalidGraph);
    CHECK(code_of([] { OrientedGraph(0, {}); }) == ErrorCode::InvalidGraph);
    CHECK(fixtures::k4().cyclomatic_number() == 3);
    CHECK(fixtures::path3().cyclomatic_number() == 0);
}

TEST_CASE("incidence follows the +1 source / -1 target convention")
{
    const Eigen::MatrixXi b1 = Eigen::MatrixXi(build_incidence(fixtures::t3()));
    Eigen::MatrixXi expected(3, 3);
    expected << 1, 0, 1,
               -1, 1, 0,
                0, -1, -1;
    CHECK(b1 == expected);

    const Eigen::MatrixXi single = Eigen::MatrixXi(build_incidence(OrientedGraph(2, {{0, 1}})));
    CHECK(single(0, 0) == 1);
    CHECK(single(1, 0) == -1);

    const Eigen::MatrixXi path = Eigen::MatrixXi(build_incidence(fixtures::path3()));
    CHECK(path.colwise().sum().isZero());
}

TEST_CASE("validate_cycle orients by traversal direction")
{
    const OrientedGraph t3 = fixtures::t3();
    CHECK(validate_cycle(t3, std::vector{0, 1, 2, 0}).dense_int() == ints({1, 1, -1}));
    CHECK(validate_cycle(t3, std::vector{0, 2, 1, 0}).dense_int() == ints({-1, -1, 1}));
    CHECK(validate_cycle(fixtures::k4(), std::vector{0, 1, 2, 0}).dense_int() == ints({1, -1, 0, 1, 0, 0}));

    const OrientedGraph k4 = fixtures::k4();
    CHECK(code_of([&] { validate_cycle(t3, std::vector{0, 1, 0}); }) == ErrorCode::TooShort);
    CHECK(code_of([&] { validate_cycle(k4, std::vector{0, 1, 2, 1, 0}); }) == ErrorCode::RepeatedNode);
    CHECK(code_of([&] { validate_cycle(fixtures::two_triangles(), std::vector{0, 1, 3, 0}); }) == ErrorCode::MissingEdge);
    CHECK(code_of([&] { validate_cycle(k4, std::vector{0, 1, 2, 3}); }) == ErrorCode::NotClosed);
}

TEST_CASE("reversed walks give negated boundaries with zero divergence")
{
    const OrientedGraph k4 = fixtures::k4();
    const Eigen::MatrixXi b1 = Eigen::MatrixXi(build_incidence(k4));
    const std::vector<std::vector<int>> walks = {{0, 1, 2, 0}, {0, 1, 3, 2, 0}, {1, 3, 2, 1}, {3, 0, 2, 1, 3}};
    for (const auto& walk : walks) {
        std::vector<int> reversed(walk.rbegin(), walk.rend());
        const CellBoundary forward = validate_cycle(k4, walk);
        const CellBoundary backward = validate_cycle(k4, reversed);
        CHECK(forward.negated() == backward);
        CHECK((b1 * forward.dense_int()).isZero());
    }
}

TEST_CASE("boundary_from_edge_set uses the canonical orientation")
{
    CHECK(boundary_from_edge_set(fixtures::t3(), std::vector{0, 1, 2}).dense_int() == ints({1, 1, -1}));
    CHECK(boundary_from_edge_set(fixtures::k4(), std::vector{0, 3, 1}).dense_int() == ints({1, -1, 0, 1, 0, 0}));
    const OrientedGraph k4 = fixtures::k4();
    CHECK(code_of([&] { boundary_from_edge_set(k4, std::vector{0, 1}); }) == ErrorCode::NotACycle);
    CHECK(code_of([&] { boundary_from_edge_set(k4, std::vector<int>{}); }) == ErrorCode::NotACycle);
    // two triangles sharing node 0 are not a simple cycle
    const OrientedGraph bowtie(5, {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {3, 4}, {0, 4}});
    CHECK(code_of([&] { boundary_from_edge_set(bowtie, std::vector{0, 1, 2, 3, 4, 5}); }) == ErrorCode::NotACycle);
    // two disjoint triangles: degrees are fine but the set is disconnected
    const OrientedGraph pair(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    CHECK(code_of([&] { boundary_from_edge_set(pair, std::vector{0, 1, 2, 3, 4, 5}); }) == ErrorCode::NotACycle);
}

TEST_CASE("boundary_from_edge_set agrees with the oracle on every K4 cycle up to sign")
{
    const OrientedGraph k4 = fixtures::k4();
    const auto cycles = oracle::simple_cycles(k4);
    REQUIRE(cycles.size() == 7);
    for (const auto& cycle : cycles) {
        const Eigen::VectorXd b = boundary_from_edge_set(k4, cycle).dense();
        const Eigen::VectorXd ref = oracle::cycle_vector(k4, cycle);
        CHECK(((b - ref).isZero() || (b + ref).isZero()));
        CHECK(boundary_from_edge_set(k4, cycle) == boundary_from_edge_set(k4, cycle));
    }
}

TEST_CASE("tree_cycle closes the forest path")
{
    CHECK(tree_cycle(fixtures::t3(), std::vector{0, 1}, 2) == std::vector{0, 1, 2});
    CHECK(tree_cycle(fixtures::k4(), std::vector{0, 3, 5}, 2) == std::vector{0, 2, 3, 5});
    const OrientedGraph k4 = fixtures::k4();
    CHECK(code_of([&] { tree_cycle(k4, std::vector{0}, 5); }) == ErrorCode::NoPath);
    CHECK(code_of([&] { tree_cycle(k4, std::vector{0, 5}, 5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tree_cycle output is a cycle containing the closing edge")
{
    Rng rng(7);
    const OrientedGraph g(6, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 5}, {0, 5}});
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<int> tree = random_spanning_tree(g, rng);
        for (int closing : complement_edges(g, tree)) {
            const std::vector<int> cycle = tree_cycle(g, tree, closing);
            CHECK(std::find(cycle.begin(), cycle.end(), closing) != cycle.end());
            CHECK_NOTHROW(boundary_from_edge_set(g, cycle));
        }
    }
}

TEST_CASE("add_cells appends valid cells and drops duplicates up to sign")
{
    const OrientedGraph t3 = fixtures::t3();
    const CellBoundary tri = validate_cycle(t3, std::vector{0, 1, 2, 0});

    AddCellsResult one = add_cells(CellComplex(t3), std::vector{tri});
    CHECK(one.complex.cell_count() == 1);
    CHECK(Eigen::MatrixXi(build_incidence(t3) * one.complex.boundary_matrix()).isZero());

    AddCellsResult twice = add_cells(CellComplex(t3), std::vector{tri, tri});
    CHECK(twice.complex.cell_count() == 1);
    CHECK(twice.added == std::vector<std::size_t>{0});
    CHECK(twice.dropped == std::vector<std::size_t>{1});

    AddCellsResult flipped = add_cells(one.complex, std::vector{tri.negated()});
    CHECK(flipped.complex.cell_count() == 1);
    CHECK(flipped.added.empty());

    // open path: not a cycle
    const OrientedGraph k4 = fixtures::k4();
    const CellBoundary open(k4.edge_count(), {{0, 1}, {3, 1}, {5, 1}});
    CHECK(code_of([&] { add_cells(CellComplex(k4), std::vector{open}); }) == ErrorCode::InvalidCell);
    // right support, inconsistent signs
    const CellBoundary twisted(3, {{0, 1}, {1, 1}, {2, 1}});
    CHECK(code_of([&] { add_cells(CellComplex(t3), std::vector{twisted}); }) == ErrorCode::InvalidCell);
}

TEST_CASE("cell boundary encoding rejects bad entries")
{
    CHECK(code_of([] { CellBoundary(3, {{0, 2}}); }) == ErrorCode::InvalidCell);
    CHECK(code_of([] { CellBoundary(3, {{3, 1}}); }) == ErrorCode::InvalidCell);
    CHECK(code_of([] { CellBoundary(3, {{1, 1}, {1, -1}}); }) == ErrorCode::InvalidCell);
    CHECK(code_of([] {
              const OrientedGraph t3 = fixtures::t3();
              const CellBoundary tri = validate_cycle(t3, std::vector{0, 1, 2, 0});
              CellComplex(t3, {tri, tri.negated()});
          })
          == ErrorCode::InvalidCell);
}
