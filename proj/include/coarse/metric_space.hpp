#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/rational.hpp"

namespace coarse {

struct WeightedEdge {
    std::string u, v;
    Rational w;
};

// Finite metric space: ordered labels plus an exact pairwise distance
// matrix. When every distance is an integer the matrix is stored as
// int64 and rationals are materialized on demand; verification loops use
// the integer path directly. Values are immutable after construction.
class MetricSpace {
public:
    static constexpr std::size_t kMaxPoints = 4096;

    MetricSpace() = default;

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }

    bool integral() const { return integral_; }

    std::int64_t idist(std::size_t i, std::size_t j) const {
        return idist_[i * size() + j];
    }
    Rational dist(std::size_t i, std::size_t j) const {
        if (integral_) return Rational(idist_[i * size() + j]);
        return rdist_[i * size() + j];
    }

    int index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) throw PreconditionError("unknown point label: " + label);
        return it->second;
    }
    bool has_label(const std::string& label) const { return index_.count(label) != 0; }

    Rational diameter() const {
        if (integral_) {
            std::int64_t m = 0;
            for (auto v : idist_) m = std::max(m, v);
            return Rational(m);
        }
        Rational m = 0;
        for (const auto& v : rdist_)
            if (v > m) m = v;
        return m;
    }

    // Exact matrix ingestion; checks all metric axioms including the
    // full triangle inequality.
    static MetricSpace from_matrix(std::vector<std::string> labels,
                                   const std::vector<std::vector<Rational>>& matrix) {
        MetricSpace s = from_matrix_unchecked(std::move(labels), matrix);
        s.validate_metric();
        return s;
    }

    // For distances produced by a shortest-path closure or another
    // already-valid metric; skips the cubic triangle scan.
    static MetricSpace from_matrix_unchecked(std::vector<std::string> labels,
                                             const std::vector<std::vector<Rational>>& matrix) {
        MetricSpace s;
        s.init_labels(std::move(labels));
        std::size_t n = s.size();
        if (matrix.size() != n) throw ParseError("distance matrix size does not match labels");
        bool integral = true;
        for (const auto& row : matrix) {
            if (row.size() != n) throw ParseError("distance matrix is not square");
            for (const auto& v : row)
                if (!rational_is_integer(v)) integral = false;
        }
        s.integral_ = integral;
        if (integral) {
            s.idist_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s.idist_[i * n + j] = checked_int64(matrix[i][j]);
        } else {
            s.rdist_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) s.rdist_[i * n + j] = matrix[i][j];
        }
        return s;
    }

    static MetricSpace from_int_matrix(std::vector<std::string> labels,
                                       std::vector<std::int64_t> flat) {
        MetricSpace s;
        s.init_labels(std::move(labels));
        if (flat.size() != s.size() * s.size())
            throw ParseError("distance matrix size does not match labels");
        s.integral_ = true;
        s.idist_ = std::move(flat);
        return s;
    }

    // All-pairs shortest-path closure of a connected weighted graph.
    static MetricSpace from_graph(std::vector<std::string> labels,
                                  const std::vector<WeightedEdge>& edges);

    // Subspace induced by the given point indices (kept in the given order).
    MetricSpace restrict(const std::vector<int>& points) const {
        MetricSpace s;
        std::vector<std::string> labels;
        labels.reserve(points.size());
        for (int p : points) labels.push_back(labels_.at(static_cast<std::size_t>(p)));
        s.init_labels(std::move(labels));
        std::size_t n = points.size();
        s.integral_ = integral_;
        if (integral_) {
            s.idist_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s.idist_[i * n + j] =
                        idist(static_cast<std::size_t>(points[i]), static_cast<std::size_t>(points[j]));
        } else {
            s.rdist_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s.rdist_[i * n + j] =
                        dist(static_cast<std::size_t>(points[i]), static_cast<std::size_t>(points[j]));
        }
        return s;
    }

    // Exact check of every metric axiom. Cubic; intended for ingested data.
    void validate_metric() const {
        std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!(dist(i, i) == 0))
                throw ParseError("dist(" + labels_[i] + "," + labels_[i] + ") != 0");
            for (std::size_t j = i + 1; j < n; ++j) {
                if (dist(i, j) != dist(j, i))
                    throw ParseError("asymmetric distance at (" + labels_[i] + "," + labels_[j] + ")");
                if (!(dist(i, j) > 0))
                    throw ParseError("nonpositive distance between distinct points " + labels_[i] +
                                     "," + labels_[j]);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (dist(i, k) > dist(i, j) + dist(j, k))
                        throw ParseError("triangle inequality fails at (" + labels_[i] + "," +
                                         labels_[j] + "," + labels_[k] + ")");
    }

private:
    void init_labels(std::vector<std::string> labels) {
        if (labels.empty()) throw ParseError("metric space needs at least one point");
        if (labels.size() > kMaxPoints)
            throw BudgetError("point count " + std::to_string(labels.size()) +
                              " exceeds budget " + std::to_string(kMaxPoints));
        labels_ = std::move(labels);
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (!index_.emplace(labels_[i], static_cast<int>(i)).second)
                throw ParseError("duplicate point label: " + labels_[i]);
        }
    }

    static std::int64_t checked_int64(const Rational& v) {
        BigInt n = numerator(v);
        if (n < std::numeric_limits<std::int64_t>::min() ||
            n > std::numeric_limits<std::int64_t>::max())
            throw BudgetError("integer distance exceeds 64-bit range");
        return static_cast<std::int64_t>(n);
    }

    std::vector<std::string> labels_;
    std::map<std::string, int> index_;
    bool integral_ = true;
    std::vector<std::int64_t> idist_;
    std::vector<Rational> rdist_;
};

inline MetricSpace MetricSpace::from_graph(std::vector<std::string> labels,
                                           const std::vector<WeightedEdge>& edges) {
    MetricSpace s;
    s.init_labels(std::move(labels));
    std::size_t n = s.size();

    struct Arc {
        int to;
        Rational w;
    };
    std::vector<std::vector<Arc>> adj(n);
    bool integral = true;
    for (const auto& e : edges) {
        int u = s.index_of(e.u), v = s.index_of(e.v);
        if (!(e.w > 0))
            throw PreconditionError("nonpositive edge weight on (" + e.u + "," + e.v + ")");
        if (!rational_is_integer(e.w)) integral = false;
        adj[static_cast<std::size_t>(u)].push_back({v, e.w});
        adj[static_cast<std::size_t>(v)].push_back({u, e.w});
    }

    auto report_disconnected = [&](const std::vector<char>& reached) {
        std::string inside, outside;
        for (std::size_t i = 0; i < n; ++i) {
            std::string& side = reached[i] ? inside : outside;
            if (!side.empty()) side += ",";
            side += s.labels_[i];
        }
        throw PreconditionError("graph is disconnected; separated component {" + outside +
                                "} unreachable from {" + inside + "}");
    };

    if (integral) {
        s.integral_ = true;
        s.idist_.assign(n * n, -1);
        for (std::size_t src = 0; src < n; ++src) {
            // dense Dijkstra over int64 weights
            std::vector<std::int64_t> d(n, std::numeric_limits<std::int64_t>::max());
            std::vector<char> done(n, 0);
            d[src] = 0;
            for (std::size_t it = 0; it < n; ++it) {
                std::size_t best = n;
                for (std::size_t i = 0; i < n; ++i)
                    if (!done[i] && d[i] != std::numeric_limits<std::int64_t>::max() &&
                        (best == n || d[i] < d[best]))
                        best = i;
                if (best == n) break;
                done[best] = 1;
                for (const auto& a : adj[best]) {
                    std::int64_t nd = d[best] + checked_int64(a.w);
                    if (nd < d[static_cast<std::size_t>(a.to)]) d[static_cast<std::size_t>(a.to)] = nd;
                }
            }
            if (src == 0) {
                std::vector<char> reached(n);
                bool all = true;
                for (std::size_t i = 0; i < n; ++i) {
                    reached[i] = d[i] != std::numeric_limits<std::int64_t>::max();
                    all = all && reached[i];
                }
                if (!all) report_disconnected(reached);
            }
            for (std::size_t i = 0; i < n; ++i) s.idist_[src * n + i] = d[i];
        }
    } else {
        s.integral_ = false;
        s.rdist_.assign(n * n, Rational(0));
        const Rational inf(-1);
        for (std::size_t src = 0; src < n; ++src) {
            std::vector<Rational> d(n, inf);
            std::vector<char> done(n, 0);
            d[src] = 0;
            for (std::size_t it = 0; it < n; ++it) {
                std::size_t best = n;
                for (std::size_t i = 0; i < n; ++i)
                    if (!done[i] && d[i] >= 0 && (best == n || d[i] < d[best])) best = i;
                if (best == n) break;
                done[best] = 1;
                for (const auto& a : adj[best]) {
                    Rational nd = d[best] + a.w;
                    auto to = static_cast<std::size_t>(a.to);
                    if (d[to] < 0 || nd < d[to]) d[to] = nd;
                }
            }
            if (src == 0) {
                std::vector<char> reached(n);
                bool all = true;
                for (std::size_t i = 0; i < n; ++i) {
                    reached[i] = d[i] >= 0;
                    all = all && reached[i];
                }
                if (!all) report_disconnected(reached);
            }
            for (std::size_t i = 0; i < n; ++i) s.rdist_[src * n + i] = d[i];
        }
    }
    return s;
}

}  // namespace coarse
