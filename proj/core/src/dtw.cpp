#include "spstgcn/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spstgcn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const Series& a, const Series& b) {
    if (a.length == 0 || b.length == 0) {
        throw DimensionMismatch("dtw: empty series");
    }
    if (a.dims != b.dims) {
        throw DimensionMismatch("dtw: point dimensions differ (" + std::to_string(a.dims) +
                                " vs " + std::to_string(b.dims) + ")");
    }
}

PointCost resolve(const PointCost& cost) {
    if (cost) return cost;
    return euclidean_point_cost;
}

// Per-row column window [lo[i], hi[i]). Rows form a monotone staircase.
struct Window {
    std::vector<int> lo;
    std::vector<int> hi;
};

Window full_window(int ta, int tb) {
    Window w;
    w.lo.assign(ta, 0);
    w.hi.assign(ta, tb);
    return w;
}

// DP over the window; unmarked cells are treated as unreachable.
WarpPath dtw_window(const Series& a, const Series& b, const Window& win, const PointCost& cost) {
    const int ta = static_cast<int>(a.length);
    const int tb = static_cast<int>(b.length);
    const std::size_t dims = a.dims;

    // acc[i*tb + j] = best cumulative cost ending at (i, j)
    std::vector<double> acc(static_cast<std::size_t>(ta) * tb, kInf);

    for (int i = 0; i < ta; ++i) {
        const int jlo = win.lo[i];
        const int jhi = win.hi[i];
        for (int j = jlo; j < jhi; ++j) {
            const double c = cost(a.point(i), b.point(j), dims);
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = kInf;
                if (i > 0 && j > 0) best = std::min(best, acc[(i - 1) * static_cast<std::size_t>(tb) + (j - 1)]);
                if (i > 0) best = std::min(best, acc[(i - 1) * static_cast<std::size_t>(tb) + j]);
                if (j > 0) best = std::min(best, acc[i * static_cast<std::size_t>(tb) + (j - 1)]);
            }
            acc[i * static_cast<std::size_t>(tb) + j] = best + c;
        }
    }

    WarpPath path;
    path.total_cost = acc[static_cast<std::size_t>(ta - 1) * tb + (tb - 1)];

    // Backtrack, preferring the diagonal on ties.
    int i = ta - 1, j = tb - 1;
    path.steps.emplace_back(i, j);
    while (i > 0 || j > 0) {
        double diag = (i > 0 && j > 0) ? acc[(i - 1) * static_cast<std::size_t>(tb) + (j - 1)] : kInf;
        double up = (i > 0) ? acc[(i - 1) * static_cast<std::size_t>(tb) + j] : kInf;
        double left = (j > 0) ? acc[i * static_cast<std::size_t>(tb) + (j - 1)] : kInf;
        if (diag <= up && diag <= left) {
            --i;
            --j;
        } else if (up <= left) {
            --i;
        } else {
            --j;
        }
        path.steps.emplace_back(i, j);
    }
    std::reverse(path.steps.begin(), path.steps.end());
    return path;
}

// Halve time resolution by pairwise averaging; a trailing odd frame is kept.
Series reduce_by_half(const Series& s) {
    const std::size_t half_len = (s.length + 1) / 2;
    Series out(half_len, s.dims);
    for (std::size_t t = 0; t < half_len; ++t) {
        const std::size_t t0 = 2 * t;
        const std::size_t t1 = std::min(2 * t + 1, s.length - 1);
        for (std::size_t c = 0; c < s.dims; ++c) {
            out.at(t, c) = 0.5 * (s.at(t0, c) + s.at(t1, c));
        }
    }
    return out;
}

// Project the coarse path onto the fine grid: every path cell, inflated by
// `radius` in coarse coordinates, contributes its 2x2 fine block.
Window expand_window(const std::vector<std::pair<int, int>>& coarse_path, int ta, int tb,
                     int radius) {
    Window w;
    w.lo.assign(ta, tb);
    w.hi.assign(ta, 0);
    for (const auto& [ci, cj] : coarse_path) {
        const int row_begin = std::max(0, 2 * (ci - radius));
        const int row_end = std::min(ta, 2 * (ci + radius) + 2);
        const int col_begin = std::max(0, 2 * (cj - radius));
        const int col_end = std::min(tb, 2 * (cj + radius) + 2);
        for (int i = row_begin; i < row_end; ++i) {
            w.lo[i] = std::min(w.lo[i], col_begin);
            w.hi[i] = std::max(w.hi[i], col_end);
        }
    }
    return w;
}

WarpPath fastdtw_canonical(const Series& a, const Series& b, int radius, const PointCost& cost) {
    const int min_size = radius + 2;
    if (static_cast<int>(a.length) <= min_size || static_cast<int>(b.length) <= min_size) {
        return dtw_window(a, b, full_window(static_cast<int>(a.length), static_cast<int>(b.length)),
                          cost);
    }
    const Series sa = reduce_by_half(a);
    const Series sb = reduce_by_half(b);
    const WarpPath low = fastdtw_canonical(sa, sb, radius, cost);
    const Window win = expand_window(low.steps, static_cast<int>(a.length),
                                     static_cast<int>(b.length), radius);
    return dtw_window(a, b, win, cost);
}

// Finest-level refinement window a single-pass run with this radius would use.
Window final_window(const Series& a, const Series& b, int radius, const PointCost& cost) {
    const int min_size = radius + 2;
    const int ta = static_cast<int>(a.length), tb = static_cast<int>(b.length);
    if (ta <= min_size || tb <= min_size) return full_window(ta, tb);
    const Series sa = reduce_by_half(a);
    const Series sb = reduce_by_half(b);
    const WarpPath low = fastdtw_canonical(sa, sb, radius, cost);
    return expand_window(low.steps, ta, tb, radius);
}

void merge_window(Window& into, const Window& other) {
    for (std::size_t i = 0; i < into.lo.size(); ++i) {
        into.lo[i] = std::min(into.lo[i], other.lo[i]);
        into.hi[i] = std::max(into.hi[i], other.hi[i]);
    }
}

// The refinement window is the union of the projected windows for every
// radius up to the requested one. Smaller radii always refine inside a
// subset of the window, so the approximation cost is monotone in the radius
// (a lone projected path can shift between radii and break that ordering).
WarpPath fastdtw_impl(const Series& a, const Series& b, int radius, const PointCost& cost) {
    const int ta = static_cast<int>(a.length), tb = static_cast<int>(b.length);
    if (ta <= radius + 2 || tb <= radius + 2) {
        return dtw_window(a, b, full_window(ta, tb), cost);
    }
    Window merged = final_window(a, b, 0, cost);
    for (int s = 1; s <= radius; ++s) {
        if (ta <= s + 2 || tb <= s + 2) {
            merged = full_window(ta, tb);
            break;
        }
        merge_window(merged, final_window(a, b, s, cost));
    }
    return dtw_window(a, b, merged, cost);
}

} // namespace

double euclidean_point_cost(const double* p, const double* q, std::size_t dims) {
    double s = 0.0;
    for (std::size_t c = 0; c < dims; ++c) {
        const double d = p[c] - q[c];
        s += d * d;
    }
    return std::sqrt(s);
}

bool WarpPath::valid(const Series& a, const Series& b) const {
    if (steps.empty()) return false;
    if (steps.front() != std::make_pair(0, 0)) return false;
    if (steps.back() != std::make_pair(static_cast<int>(a.length) - 1,
                                       static_cast<int>(b.length) - 1)) {
        return false;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto [i, j] = steps[k];
        if (i < 0 || j < 0 || i >= static_cast<int>(a.length) || j >= static_cast<int>(b.length)) {
            return false;
        }
        if (k > 0) {
            const int di = i - steps[k - 1].first;
            const int dj = j - steps[k - 1].second;
            const bool ok = (di == 0 || di == 1) && (dj == 0 || dj == 1) && (di + dj > 0);
            if (!ok) return false;
        }
        sum += euclidean_point_cost(a.point(i), b.point(j), a.dims);
    }
    return std::abs(sum - total_cost) <= 1e-9 * std::max(1.0, std::abs(total_cost));
}

WarpPath dtw_exact(const Series& a, const Series& b, const PointCost& cost) {
    check_pair(a, b);
    return dtw_window(a, b, full_window(static_cast<int>(a.length), static_cast<int>(b.length)),
                      resolve(cost));
}

WarpPath fastdtw(const Series& a, const Series& b, int radius, const PointCost& cost) {
    check_pair(a, b);
    if (radius < 0) {
        throw Error("fastdtw: radius must be nonnegative");
    }
    return fastdtw_impl(a, b, radius, resolve(cost));
}

} // namespace spstgcn
