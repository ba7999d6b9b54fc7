#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "spstgcn/errors.hpp"

namespace spstgcn {

// Multivariate time series: one C-dimensional point per frame, row-major T x C.
struct Series {
    std::size_t length = 0;
    std::size_t dims = 0;
    std::vector<double> values; // length * dims

    Series() = default;
    Series(std::size_t t, std::size_t c) : length(t), dims(c), values(t * c, 0.0) {}

    double* point(std::size_t t) { return values.data() + t * dims; }
    const double* point(std::size_t t) const { return values.data() + t * dims; }

    double& at(std::size_t t, std::size_t c) { return values[t * dims + c]; }
    double at(std::size_t t, std::size_t c) const { return values[t * dims + c]; }
};

// Monotone alignment between two series. Starts at (0,0), ends at
// (T_a-1, T_b-1); each step advances one or both indices by 1.
struct WarpPath {
    std::vector<std::pair<int, int>> steps;
    double total_cost = 0.0;

    std::size_t length() const { return steps.size(); }
    // Checks the step constraints and that total_cost is the sum of point
    // costs along the path.
    bool valid(const Series& a, const Series& b) const;
};

using PointCost = std::function<double(const double*, const double*, std::size_t)>;

// Euclidean distance between two C-dimensional points (the default cost).
double euclidean_point_cost(const double* p, const double* q, std::size_t dims);

// Full O(T_a * T_b) dynamic program; returns a globally optimal path.
WarpPath dtw_exact(const Series& a, const Series& b, const PointCost& cost = {});

// FastDTW (Salvador & Chan): coarsen by pairwise averaging, solve recursively,
// refine within `radius` cells of the projected coarse path. Exact whenever
// the window covers the full cost matrix; never better than dtw_exact.
WarpPath fastdtw(const Series& a, const Series& b, int radius = 1, const PointCost& cost = {});

} // namespace spstgcn
