#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/family.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/rational.hpp"
#include "coarse/util.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// Rooted tree with unit edges. Vertices are indexed in label order of
// ingestion; the induced metric is the shortest-path metric,
// d(u,v) = depth(u) + depth(v) - 2*depth(lca(u,v)).
class RootedTree {
public:
    RootedTree(const std::string& root_label,
               const std::vector<std::pair<std::string, std::string>>& edges) {
        // Edges may arrive in any order; index vertices by BFS from the
        // root so vertex order is deterministic for fixed input.
        std::map<std::string, std::vector<std::string>> kids;
        std::map<std::string, int> seen_as_child;
        for (const auto& [p, c] : edges) {
            if (c == root_label) throw ParseError("root " + c + " cannot have a parent");
            if (++seen_as_child[c] > 1) throw ParseError("vertex " + c + " has two parents");
            kids[p].push_back(c);
        }
        add_vertex(root_label);
        for (std::size_t q = 0; q < labels_.size(); ++q) {
            auto it = kids.find(labels_[q]);
            if (it == kids.end()) continue;
            for (const auto& c : it->second) {
                int ci = add_vertex(c);
                parent_[static_cast<std::size_t>(ci)] = static_cast<int>(q);
                depth_[static_cast<std::size_t>(ci)] = depth_[q] + 1;
                children_[q].push_back(ci);
            }
        }
        if (labels_.size() != edges.size() + 1) {
            for (const auto& [c, cnt] : seen_as_child)
                if (!index_.count(c))
                    throw ParseError("vertex " + c + " is not connected to the root");
            throw ParseError("edge list does not form a tree on the given vertices");
        }
    }

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    int root() const { return 0; }
    int parent(int v) const { return parent_[static_cast<std::size_t>(v)]; }
    std::int64_t depth(int v) const { return depth_[static_cast<std::size_t>(v)]; }
    std::int64_t max_depth() const {
        std::int64_t m = 0;
        for (auto d : depth_) m = std::max(m, d);
        return m;
    }

    int index_of(const std::string& l) const {
        auto it = index_.find(l);
        if (it == index_.end()) throw PreconditionError("unknown vertex: " + l);
        return it->second;
    }

    int ancestor_at_depth(int v, std::int64_t t) const {
        if (t > depth(v)) throw PreconditionError("ancestor depth below the vertex");
        while (depth(v) > t) v = parent(v);
        return v;
    }

    int lca(int x, int y) const {
        while (depth(x) > depth(y)) x = parent(x);
        while (depth(y) > depth(x)) y = parent(y);
        while (x != y) {
            x = parent(x);
            y = parent(y);
        }
        return x;
    }

    std::int64_t distance(int x, int y) const {
        return depth(x) + depth(y) - 2 * depth(lca(x, y));
    }

    // Metric closure as a MetricSpace (unit-edge shortest paths).
    MetricSpace to_space() const {
        std::size_t n = size();
        std::vector<std::int64_t> flat(n * n, 0);
        for (std::size_t src = 0; src < n; ++src) {
            // BFS from src over the undirected tree
            std::vector<std::int64_t> d(n, -1);
            std::vector<int> queue{static_cast<int>(src)};
            d[src] = 0;
            for (std::size_t q = 0; q < queue.size(); ++q) {
                int v = queue[q];
                auto push = [&](int u) {
                    if (d[static_cast<std::size_t>(u)] < 0) {
                        d[static_cast<std::size_t>(u)] = d[static_cast<std::size_t>(v)] + 1;
                        queue.push_back(u);
                    }
                };
                if (v != root()) push(parent(v));
                for (int c : children_[static_cast<std::size_t>(v)]) push(c);
            }
            for (std::size_t i = 0; i < n; ++i) flat[src * n + i] = d[i];
        }
        return MetricSpace::from_int_matrix(labels_, std::move(flat));
    }

private:
    int add_vertex(const std::string& l) {
        if (labels_.size() >= MetricSpace::kMaxPoints)
            throw BudgetError("vertex count exceeds budget " +
                              std::to_string(MetricSpace::kMaxPoints));
        int i = static_cast<int>(labels_.size());
        labels_.push_back(l);
        if (!index_.emplace(l, i).second) throw ParseError("duplicate vertex label: " + l);
        parent_.push_back(i);
        depth_.push_back(0);
        children_.emplace_back();
        return i;
    }

    std::vector<std::string> labels_;
    std::map<std::string, int> index_;
    std::vector<int> parent_;
    std::vector<std::int64_t> depth_;
    std::vector<std::vector<int>> children_;
};

// Half-open depth band [lo, hi) in a rooted tree.
struct Annulus {
    Rational lo, hi;
};

// (x|y)_e = (d(x,e) + d(y,e) - d(x,y)) / 2; equals depth(lca(x,y)).
inline Rational gromov_product(const RootedTree& t, int x, int y) {
    return Rational(t.depth(t.lca(x, y)));
}
inline Rational gromov_product(const RootedTree& t, const std::string& x, const std::string& y) {
    return gromov_product(t, t.index_of(x), t.index_of(y));
}

// Vertices v with lo <= depth(v) < hi, in index order.
inline std::vector<int> annulus_points(const RootedTree& t, const Rational& lo,
                                       const Rational& hi) {
    if (lo < 0 || !(lo < hi)) throw PreconditionError("annulus needs 0 <= lo < hi");
    std::vector<int> out;
    for (std::size_t v = 0; v < t.size(); ++v) {
        Rational d(t.depth(static_cast<int>(v)));
        if (d >= lo && d < hi) out.push_back(static_cast<int>(v));
    }
    return out;
}

// Refine a strictly R-disjoint family of annuli into an R-disjoint family
// with mesh < 2w + 2R (w = max annulus width). Annuli whose lower bound
// exceeds R are split into classes of the relation
// x E y iff (x|y)_e >= lo - R; annuli within R of the root stay whole
// (their diameter is already at most 2(hi-1) <= 2w + 2R - 2). Classes are
// grouped by union-find over vertex pairs and emitted in input-annulus
// order, each class keyed by its minimal vertex index.
inline FamilyEntry refine_annuli(const RootedTree& t, const std::vector<Annulus>& annuli,
                                 const Rational& r) {
    if (!(r > 0)) throw PreconditionError("refinement needs R > 0");
    Rational width = 0;
    std::vector<std::vector<int>> bands;
    for (const auto& a : annuli) {
        if (a.lo < 0 || !(a.lo < a.hi)) throw PreconditionError("annulus needs 0 <= lo < hi");
        Rational w = a.hi - a.lo;
        if (w > width) width = w;
        bands.push_back(annulus_points(t, a.lo, a.hi));
    }

    // The conclusion's cross-annulus separation rests on this hypothesis,
    // so it is checked, not assumed.
    {
        SubsetFamily as_family;
        for (const auto& b : bands)
            if (!b.empty()) as_family.sets.push_back(b);
        std::int64_t worst = std::numeric_limits<std::int64_t>::max();
        for (std::size_t i = 0; i < as_family.sets.size(); ++i)
            for (std::size_t j = i + 1; j < as_family.sets.size(); ++j)
                for (int x : as_family.sets[i])
                    for (int y : as_family.sets[j]) worst = std::min(worst, t.distance(x, y));
        if (worst != std::numeric_limits<std::int64_t>::max() && !(Rational(worst) > r))
            throw PreconditionError("input annuli are not " + rational_to_string(r) +
                                    "-disjoint (closest vertex pair at distance " +
                                    std::to_string(worst) + ")");
    }

    FamilyEntry out;
    out.separation = r;
    out.mesh = 2 * width + 2 * r;
    for (std::size_t ai = 0; ai < annuli.size(); ++ai) {
        const auto& band = bands[ai];
        if (band.empty()) continue;
        if (annuli[ai].lo <= r) {
            out.family.sets.push_back(band);
            continue;
        }
        // x E y iff depth(lca) >= lo - R, i.e. >= ceil(lo - R) since
        // depths are integers; equivalently x and y share their ancestor
        // at that depth.
        std::int64_t cut = rational_ceil_ll(annuli[ai].lo - r);
        std::vector<int> anc(band.size());
        for (std::size_t i = 0; i < band.size(); ++i)
            anc[i] = t.ancestor_at_depth(band[i], cut);
        UnionFind uf(band.size());
        for (std::size_t i = 0; i < band.size(); ++i)
            for (std::size_t j = i + 1; j < band.size(); ++j)
                if (anc[i] == anc[j]) uf.unite(i, j);
        // classes keyed by minimal member; band is in index order already
        std::map<std::size_t, std::vector<int>> classes;
        for (std::size_t i = 0; i < band.size(); ++i)
            classes[uf.find(i)].push_back(band[i]);
        std::vector<std::vector<int>> ordered;
        for (auto& [key, members] : classes) ordered.push_back(std::move(members));
        std::sort(ordered.begin(), ordered.end(),
                  [](const std::vector<int>& a, const std::vector<int>& b) {
                      return a.front() < b.front();
                  });
        for (auto& c : ordered) out.family.sets.push_back(std::move(c));
    }
    return out;
}

// Two-family cover at separation R certifying asdim <= 1: depth blocks of
// height L = ceil(R), alternating parity, each refined. Same-parity
// blocks are L+1 > R apart radially, so each refinement input is
// R-disjoint; the two unions partition the depths, hence are disjoint.
inline CoverWitness tree_asdim1_witness(const RootedTree& t, const Rational& r) {
    if (!(r > 0)) throw PreconditionError("witness needs R > 0");
    std::int64_t L = rational_ceil_ll(r);
    std::int64_t dmax = t.max_depth();
    std::vector<Annulus> even, odd;
    for (std::int64_t a = 0; a <= dmax; a += 2 * L) {
        even.push_back({Rational(a), Rational(a + L)});
        if (a + L <= dmax) odd.push_back({Rational(a + L), Rational(a + 2 * L)});
    }
    CoverWitness w;
    w.entries.push_back(refine_annuli(t, even, r));
    if (odd.empty()) {
        FamilyEntry e;
        e.separation = r;
        e.mesh = 2 * Rational(L) + 2 * r;
        w.entries.push_back(std::move(e));
    } else {
        w.entries.push_back(refine_annuli(t, odd, r));
    }
    return w;
}

}  // namespace coarse
