#pragma once

// Deterministic instance generators. Same seed, same bytes — the only
// randomness source is the splitmix64 stream, so generated files are
// reproducible across platforms.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/product.hpp"
#include "coarse/tree.hpp"
#include "coarse/util.hpp"

namespace coarse {

// Uniform random recursive tree: vertex i attaches to a uniform earlier
// vertex. Labels are v0 (the root), v1, ...
inline RootedTree random_tree(std::uint64_t seed, std::size_t size) {
    if (size == 0) throw PreconditionError("tree needs at least the root");
    if (size > MetricSpace::kMaxPoints)
        throw BudgetError("tree size " + std::to_string(size) + " exceeds the point cap " +
                          std::to_string(MetricSpace::kMaxPoints));
    Rng rng(seed);
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t v = 1; v < size; ++v) {
        std::size_t p = static_cast<std::size_t>(rng.below(v));
        edges.push_back({"v" + std::to_string(p), "v" + std::to_string(v)});
    }
    return RootedTree("v0", edges);
}

// The path v0 - v1 - ... rooted at one end.
inline RootedTree path_tree(std::size_t size) {
    if (size == 0) throw PreconditionError("tree needs at least the root");
    if (size > MetricSpace::kMaxPoints)
        throw BudgetError("tree size " + std::to_string(size) + " exceeds the point cap " +
                          std::to_string(MetricSpace::kMaxPoints));
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t v = 1; v < size; ++v)
        edges.push_back({"v" + std::to_string(v - 1), "v" + std::to_string(v)});
    return RootedTree("v0", edges);
}

// Distinct points of the restricted product, uniform over full coordinate
// tuples (vertex 0 of each factor is the base point and stays out of the
// support map). Rejection-samples duplicates, so the requested count must
// not exceed the number of distinct points available.
inline std::vector<RestrictedPoint> random_restricted_points(
    std::uint64_t seed, std::size_t count, const std::vector<RootedTree>& factors) {
    if (factors.empty()) throw PreconditionError("need at least one factor");
    // saturating product of factor sizes = number of distinct points
    std::size_t total = 1;
    const std::size_t cap = 1u << 30;
    for (const auto& t : factors) {
        if (total >= cap) break;
        total *= t.size();
        if (total > cap) total = cap;
    }
    if (count > total)
        throw PreconditionError("only " + std::to_string(total) +
                                " distinct points exist; cannot generate " +
                                std::to_string(count));
    Rng rng(seed);
    std::set<RestrictedPoint> seen;
    std::vector<RestrictedPoint> out;
    while (out.size() < count) {
        RestrictedPoint p;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            int v = static_cast<int>(rng.below(factors[i].size()));
            if (v != 0) p.support[static_cast<int>(i) + 1] = v;
        }
        if (seen.insert(p).second) out.push_back(std::move(p));
    }
    return out;
}

}  // namespace coarse
