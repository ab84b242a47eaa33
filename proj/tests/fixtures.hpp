#pragma once

#include <vector>

#include <catch2/catch.hpp>

#include "cellinf/complex.hpp"
#include "cellinf/error.hpp"

namespace fixtures {

using cellinf::Edge;
using cellinf::OrientedGraph;

/// Triangle: e0=(0,1), e1=(1,2), e2=(0,2).
inline OrientedGraph t3()
{
    return OrientedGraph(3, {{0, 1}, {1, 2}, {0, 2}});
}

/// K4 with lexicographic edges e0=(0,1) e1=(0,2) e2=(0,3) e3=(1,2) e4=(1,3) e5=(2,3).
inline OrientedGraph k4()
{
    return OrientedGraph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

/// Triangles 0-1-2 and 4-5-6 joined through node 3 by the path 2-3-4.
inline OrientedGraph two_triangles()
{
    return OrientedGraph(7, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {4, 6}});
}

inline OrientedGraph path3()
{
    return OrientedGraph(3, {{0, 1}, {1, 2}});
}

/// Code of the cellinf::Error thrown by f; fails the test if none is thrown.
template <typename F>
cellinf::ErrorCode code_of(F&& f)
{
    try {
        f();
    } catch (const cellinf::Error& err) {
        return err.code();
    }
    FAIL("expected cellinf::Error");
    return cellinf::ErrorCode::InvalidArgument;
}

}  // namespace fixtures
