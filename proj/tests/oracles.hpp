// Test-side reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <vector>

#include "tsrt/topology.hpp"

namespace oracle {

// Textbook BFS hop distances from `root`; unreachable nodes get -1.
inline std::vector<int> bfs_distances(const tsrt::NetworkGraph& g, tsrt::NodeId root) {
    std::vector<int> dist(static_cast<size_t>(g.node_count()), -1);
    std::queue<tsrt::NodeId> q;
    dist[static_cast<size_t>(root)] = 0;
    q.push(root);
    while (!q.empty()) {
        tsrt::NodeId u = q.front();
        q.pop();
        for (tsrt::NodeId v : g.neighbors(u)) {
            if (dist[static_cast<size_t>(v)] < 0) {
                dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

inline int diameter(const tsrt::NetworkGraph& g) {
    int best = 0;
    for (tsrt::NodeId u = 0; u < g.node_count(); ++u)
        for (int d : bfs_distances(g, u)) best = std::max(best, d);
    return best;
}

// Random connected graph: a random spanning tree plus `extra_edges` random
// non-duplicate edges, all with the same delay.
inline tsrt::NetworkGraph random_connected_graph(int n, int extra_edges, double delay,
                                                 std::mt19937_64& rng) {
    std::vector<tsrt::NetworkGraph::Edge> edges;
    std::vector<std::vector<char>> have(static_cast<size_t>(n),
                                        std::vector<char>(static_cast<size_t>(n), 0));
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> pick(0, v - 1);
        int u = pick(rng);
        edges.push_back({u, v, delay});
        have[static_cast<size_t>(u)][static_cast<size_t>(v)] = 1;
        have[static_cast<size_t>(v)][static_cast<size_t>(u)] = 1;
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < extra_edges; ++k) {
        int u = pick(rng);
        int v = pick(rng);
        if (u == v || have[static_cast<size_t>(u)][static_cast<size_t>(v)]) continue;
        edges.push_back({u, v, delay});
        have[static_cast<size_t>(u)][static_cast<size_t>(v)] = 1;
        have[static_cast<size_t>(v)][static_cast<size_t>(u)] = 1;
    }
    return tsrt::NetworkGraph(n, edges, 0);
}

inline double mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

inline double sample_std(const std::vector<double>& xs) { return std::sqrt(sample_variance(xs)); }

// Least-squares slope of y over x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Complementary error function, independent of std::erfc: Maclaurin series
// of erf for small x, Abramowitz & Stegun 7.1.14 continued fraction for
// large x, evaluated with the modified Lentz algorithm.
inline double erfc_reference(double x) {
    if (x < 0) return 2.0 - erfc_reference(-x);
    double x2 = x * x;
    if (x < 3.0) {
        double term = x;
        double sum = x;
        for (int n = 1; n < 300; ++n) {
            term *= -x2 / static_cast<double>(n);
            double add = term / static_cast<double>(2 * n + 1);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return 1.0 - 2.0 / std::sqrt(M_PI) * sum;
    }
    // sqrt(pi) exp(x^2) erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int n = 1; n < 400; ++n) {
        double an = n == 1 ? 1.0 : static_cast<double>(n - 1) / 2.0;
        d = x + an * d;
        if (d == 0.0) d = tiny;
        c = x + an / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x2) / std::sqrt(M_PI) * f;
}

// Bisection inverse of the exceedance probability erfc(eps/(sqrt(2)*sigma)),
// built on erfc_reference.
inline double sigma_from_ps_reference(double eps_max, double ps) {
    auto exceed = [&](double sigma) { return erfc_reference(eps_max / (std::sqrt(2.0) * sigma)); };
    double lo = eps_max / 300.0, hi = eps_max;
    while (exceed(hi) < ps) hi *= 2.0;
    while (exceed(lo) > ps) lo /= 2.0;
    for (int i = 0; i < 300 && (hi - lo) > 1e-13 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (exceed(mid) < ps ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
