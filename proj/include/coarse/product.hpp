#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/family.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/rational.hpp"
#include "coarse/tree.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// ---------------------------------------------------------------------------
// Restricted products: finitely supported sequences over pointed factors,
// d((a_i),(b_i)) = sum over i of i * d_i(a_i, b_i), coordinates 1-based.
// ---------------------------------------------------------------------------

// Sparse point: coordinate (1-based) -> factor point index, entries only
// where the point differs from the factor's base point.
struct RestrictedPoint {
    std::map<int, int> support;

    bool operator==(const RestrictedPoint& o) const { return support == o.support; }
    bool operator<(const RestrictedPoint& o) const { return support < o.support; }
};

namespace detail {

template <class FactorDist>
Rational restricted_distance(const RestrictedPoint& a, const RestrictedPoint& b, int base,
                             FactorDist&& dist) {
    Rational total = 0;
    auto ia = a.support.begin(), ib = b.support.begin();
    while (ia != a.support.end() || ib != b.support.end()) {
        int coord;
        int pa = base, pb = base;
        if (ib == b.support.end() || (ia != a.support.end() && ia->first < ib->first)) {
            coord = ia->first;
            pa = ia->second;
            ++ia;
        } else if (ia == a.support.end() || ib->first < ia->first) {
            coord = ib->first;
            pb = ib->second;
            ++ib;
        } else {
            coord = ia->first;
            pa = ia->second;
            pb = ib->second;
            ++ia;
            ++ib;
        }
        if (pa != pb) total += coord * dist(coord, pa, pb);
    }
    return total;
}

}  // namespace detail

inline void validate_restricted_point(const RestrictedPoint& p, std::size_t factor_count) {
    for (const auto& [coord, v] : p.support) {
        if (coord < 1 || static_cast<std::size_t>(coord) > factor_count)
            throw PreconditionError("support coordinate " + std::to_string(coord) +
                                    " outside declared factors 1.." +
                                    std::to_string(factor_count));
        if (v == 0)
            throw PreconditionError("support entry at coordinate " + std::to_string(coord) +
                                    " equals the base point");
    }
}

// Weighted distance over general metric factors; base point of every
// factor is its point 0.
inline Rational restricted_metric(const RestrictedPoint& a, const RestrictedPoint& b,
                                  const std::vector<MetricSpace>& factors) {
    validate_restricted_point(a, factors.size());
    validate_restricted_point(b, factors.size());
    for (const auto* p : {&a, &b})
        for (const auto& [coord, v] : p->support)
            if (v < 0 || static_cast<std::size_t>(v) >= factors[static_cast<std::size_t>(coord - 1)].size())
                throw PreconditionError("factor point index out of range at coordinate " +
                                        std::to_string(coord));
    return detail::restricted_distance(a, b, 0, [&](int coord, int x, int y) {
        return factors[static_cast<std::size_t>(coord - 1)].dist(static_cast<std::size_t>(x),
                                                                 static_cast<std::size_t>(y));
    });
}

// Same metric over tree factors (base point = root).
inline Rational restricted_metric(const RestrictedPoint& a, const RestrictedPoint& b,
                                  const std::vector<RootedTree>& trees) {
    validate_restricted_point(a, trees.size());
    validate_restricted_point(b, trees.size());
    for (const auto* p : {&a, &b})
        for (const auto& [coord, v] : p->support)
            if (v < 0 || static_cast<std::size_t>(v) >= trees[static_cast<std::size_t>(coord - 1)].size())
                throw PreconditionError("factor point index out of range at coordinate " +
                                        std::to_string(coord));
    return detail::restricted_distance(a, b, 0, [&](int coord, int x, int y) {
        return Rational(trees[static_cast<std::size_t>(coord - 1)].distance(x, y));
    });
}

// Materialize the finite subspace spanned by the given points, labeled
// p0, p1, ... in input order.
template <class Factors>
MetricSpace restricted_space(const std::vector<RestrictedPoint>& points, const Factors& factors) {
    if (points.empty()) throw PreconditionError("need at least one point");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j])
                throw PreconditionError("duplicate points p" + std::to_string(i) + ", p" +
                                        std::to_string(j));
    std::size_t n = points.size();
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "p" + std::to_string(i);
    std::vector<std::vector<Rational>> matrix(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            matrix[i][j] = matrix[j][i] = restricted_metric(points[i], points[j], factors);
    return MetricSpace::from_matrix_unchecked(std::move(labels), matrix);
}

// ---------------------------------------------------------------------------
// Sup products.
// ---------------------------------------------------------------------------

// Lazy sup-metric product of two spaces; point (ix, iy) has index
// ix * |Y| + iy. Satisfies the same read interface as MetricSpace, so
// the family scans and witness verifier work on it directly.
class SupProductView {
public:
    SupProductView(const MetricSpace& x, const MetricSpace& y) : x_(x), y_(y) {}

    std::size_t size() const { return x_.size() * y_.size(); }
    bool integral() const { return x_.integral() && y_.integral(); }
    std::int64_t idist(std::size_t i, std::size_t j) const {
        return std::max(x_.idist(i / y_.size(), j / y_.size()),
                        y_.idist(i % y_.size(), j % y_.size()));
    }
    Rational dist(std::size_t i, std::size_t j) const {
        return std::max(x_.dist(i / y_.size(), j / y_.size()),
                        y_.dist(i % y_.size(), j % y_.size()));
    }
    std::string label(std::size_t i) const {
        return "(" + x_.label(i / y_.size()) + "," + y_.label(i % y_.size()) + ")";
    }
    int pair_index(int ix, int iy) const { return ix * static_cast<int>(y_.size()) + iy; }

private:
    const MetricSpace& x_;
    const MetricSpace& y_;
};

// Materialized sup-metric product of several factors; tuple indices are
// mixed-radix with the last factor fastest.
inline MetricSpace sup_product(const std::vector<MetricSpace>& factors,
                               std::size_t point_budget = 1024) {
    if (factors.empty()) throw PreconditionError("sup product needs at least one factor");
    std::size_t total = 1;
    for (const auto& f : factors) {
        if (f.size() > point_budget / total)
            throw BudgetError("sup product exceeds point budget " + std::to_string(point_budget));
        total *= f.size();
    }
    std::vector<std::string> labels(total);
    std::vector<std::vector<std::size_t>> coords(total, std::vector<std::size_t>(factors.size()));
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        for (std::size_t f = factors.size(); f-- > 0;) {
            coords[i][f] = rem % factors[f].size();
            rem /= factors[f].size();
        }
        std::string l = "(";
        for (std::size_t f = 0; f < factors.size(); ++f) {
            if (f) l += ",";
            l += factors[f].label(coords[i][f]);
        }
        labels[i] = l + ")";
    }
    bool integral = true;
    for (const auto& f : factors) integral = integral && f.integral();
    if (integral) {
        std::vector<std::int64_t> flat(total * total, 0);
        for (std::size_t i = 0; i < total; ++i)
            for (std::size_t j = 0; j < total; ++j) {
                std::int64_t d = 0;
                for (std::size_t f = 0; f < factors.size(); ++f)
                    d = std::max(d, factors[f].idist(coords[i][f], coords[j][f]));
                flat[i * total + j] = d;
            }
        return MetricSpace::from_int_matrix(std::move(labels), std::move(flat));
    }
    std::vector<std::vector<Rational>> matrix(total, std::vector<Rational>(total, Rational(0)));
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = 0; j < total; ++j) {
            Rational d = 0;
            for (std::size_t f = 0; f < factors.size(); ++f) {
                Rational c = factors[f].dist(coords[i][f], coords[j][f]);
                if (c > d) d = c;
            }
            matrix[i][j] = d;
        }
    return MetricSpace::from_matrix_unchecked(std::move(labels), matrix);
}

// ---------------------------------------------------------------------------
// Two-factor cover combiner.
// ---------------------------------------------------------------------------

// Position n >= 1 of the flat schedule maps to a (row, column) pair.
using Reindex = std::function<std::pair<int, int>(int)>;

// Diagonal enumeration of positive pairs: 1->(1,1), 2->(1,2), 3->(2,1),
// 4->(1,3), 5->(2,2), 6->(3,1), ...
inline std::pair<int, int> cantor_pair(int n) {
    if (n < 1) throw PreconditionError("pairing is defined on positive positions");
    std::int64_t s = 1;
    while (s * (s + 1) / 2 < n) ++s;
    std::int64_t offset = n - (s - 1) * s / 2;  // 1..s
    return {static_cast<int>(offset), static_cast<int>(s + 1 - offset)};
}

// Answers a finite separation schedule with a verified cover witness
// using at most as many families as the schedule has entries.
using WitnessProvider = std::function<CoverWitness(const std::vector<Rational>&)>;

// One family containing the whole space: vacuously disjoint at any
// separation, mesh = diameter.
inline WitnessProvider trivial_provider(const MetricSpace& s) {
    return [&s](const std::vector<Rational>& schedule) {
        if (schedule.empty()) throw ProviderError("empty schedule request");
        std::vector<int> all(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) all[i] = static_cast<int>(i);
        CoverWitness w;
        FamilyEntry e;
        e.family.sets.push_back(std::move(all));
        e.separation = schedule.front();
        e.mesh = s.diameter();
        w.entries.push_back(std::move(e));
        return w;
    };
}

// Two depth-block families from the tree construction; answers length-1
// requests with the trivial single family. The tree's vertex order must
// match the space the combiner verifies against (tree.to_space()).
inline WitnessProvider tree_witness_provider(const RootedTree& t) {
    return [&t](const std::vector<Rational>& schedule) {
        if (schedule.empty()) throw ProviderError("empty schedule request");
        Rational rmax = schedule.front();
        for (const auto& r : schedule) rmax = std::max(rmax, r);
        if (schedule.size() == 1) {
            std::vector<int> all(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) all[i] = static_cast<int>(i);
            CoverWitness w;
            FamilyEntry e;
            e.family.sets.push_back(std::move(all));
            e.separation = rmax;
            e.mesh = Rational(2 * t.max_depth());
            w.entries.push_back(std::move(e));
            return w;
        }
        CoverWitness w = tree_asdim1_witness(t, rmax);
        // claims to match the requested positions (running max keeps the
        // schedule nondecreasing even for non-monotone requests)
        Rational running = schedule[0];
        for (std::size_t i = 0; i < w.entries.size(); ++i) {
            running = std::max(running, schedule[i]);
            w.entries[i].separation = running;
        }
        return w;
    };
}

// Replays a prebuilt witness; refuses schedules it is too short or too
// weakly separated to answer.
inline WitnessProvider stored_witness_provider(CoverWitness w) {
    return [w](const std::vector<Rational>& schedule) {
        if (w.entries.size() > schedule.size())
            throw ProviderError("stored witness has " + std::to_string(w.entries.size()) +
                                " families but only " + std::to_string(schedule.size()) +
                                " were requested");
        for (std::size_t i = 0; i < w.entries.size(); ++i)
            if (w.entries[i].separation < schedule[i])
                throw ProviderError("stored witness separation at position " +
                                    std::to_string(i) + " is below the requested " +
                                    rational_to_string(schedule[i]));
        return w;
    };
}

namespace detail {

inline CoverWitness checked_provider_answer(const MetricSpace& space, const WitnessProvider& p,
                                            const std::vector<Rational>& schedule,
                                            const char* which) {
    CoverWitness w = p(schedule);
    if (w.entries.empty() || w.entries.size() > schedule.size())
        throw ProviderError(std::string(which) + " provider returned " +
                            std::to_string(w.entries.size()) + " families for a request of " +
                            std::to_string(schedule.size()));
    for (std::size_t i = 0; i < w.entries.size(); ++i)
        if (w.entries[i].separation < schedule[i])
            throw ProviderError(std::string(which) + " provider claims separation " +
                                rational_to_string(w.entries[i].separation) + " at position " +
                                std::to_string(i) + ", below the requested " +
                                rational_to_string(schedule[i]));
    VerificationReport rep = verify_cover_witness(space, w);
    if (!rep.pass())
        throw ProviderError(std::string(which) + " provider witness fails verification: " +
                            rep.summary());
    return w;
}

}  // namespace detail

// Product cover a la the two-space combiner: the flat schedule is
// reindexed into rows; each row's values are answered by the second
// space's provider; the first space answers the per-row maxima (made
// nondecreasing by running max); matched families multiply into product
// families placed back at their flat positions, with empty families
// filling the gaps below the last used position. Output indices follow
// SupProductView(x, y).
inline CoverWitness combine_product_covers(const MetricSpace& x, const MetricSpace& y,
                                           const std::vector<Rational>& schedule,
                                           const WitnessProvider& x_provider,
                                           const WitnessProvider& y_provider,
                                           const Reindex& reindex = cantor_pair) {
    if (schedule.empty()) throw PreconditionError("schedule must be nonempty");
    for (std::size_t n = 0; n < schedule.size(); ++n) {
        if (!(schedule[n] > 0)) throw PreconditionError("schedule values must be positive");
        if (n > 0 && schedule[n] < schedule[n - 1])
            throw PreconditionError("schedule must be nondecreasing");
    }
    const int N = static_cast<int>(schedule.size());

    // decode and check injectivity on the used range
    std::map<std::pair<int, int>, int> seen;
    std::map<int, std::vector<std::pair<int, int>>> rows;  // row -> (column, position)
    for (int n = 1; n <= N; ++n) {
        auto mj = reindex(n);
        if (mj.first < 1 || mj.second < 1)
            throw PreconditionError("reindex must produce positive pairs");
        if (!seen.emplace(mj, n).second)
            throw PreconditionError("reindex is not injective: positions " +
                                    std::to_string(seen[mj]) + " and " + std::to_string(n) +
                                    " collide");
        rows[mj.first].push_back({mj.second, n});
    }
    for (auto& [row, cols] : rows) std::sort(cols.begin(), cols.end());

    // second factor: one witness per row
    struct RowAnswer {
        std::vector<std::pair<int, int>> cols;  // (column, flat position), ascending
        CoverWitness witness;
        std::vector<Rational> meshes;  // actual family meshes on y
    };
    std::map<int, RowAnswer> answers;
    std::vector<Rational> row_max;  // aligned with ascending row ids
    std::vector<int> row_ids;
    for (auto& [row, cols] : rows) {
        std::vector<Rational> req;
        req.reserve(cols.size());
        for (auto& [col, pos] : cols) req.push_back(schedule[static_cast<std::size_t>(pos - 1)]);
        RowAnswer ans;
        ans.cols = cols;
        ans.witness = detail::checked_provider_answer(y, y_provider, req, "second-factor");
        for (const auto& e : ans.witness.entries)
            ans.meshes.push_back(family_mesh(y, e.family));
        Rational rmax = req[0];
        for (std::size_t i = 1; i < ans.witness.entries.size(); ++i)
            rmax = std::max(rmax, req[i]);
        answers.emplace(row, std::move(ans));
        row_ids.push_back(row);
        row_max.push_back(rmax);
    }

    // first factor: running max keeps the request nondecreasing
    std::vector<Rational> x_request = row_max;
    for (std::size_t i = 1; i < x_request.size(); ++i)
        x_request[i] = std::max(x_request[i], x_request[i - 1]);
    CoverWitness xw = detail::checked_provider_answer(x, x_provider, x_request, "first-factor");
    std::vector<Rational> x_meshes;
    for (const auto& e : xw.entries) x_meshes.push_back(family_mesh(x, e.family));

    // multiply matched families into their flat positions
    const int ysize = static_cast<int>(y.size());
    std::vector<FamilyEntry> placed(static_cast<std::size_t>(N));
    int last_used = 0;
    for (std::size_t ri = 0; ri < xw.entries.size(); ++ri) {
        const auto& ans = answers.at(row_ids[ri]);
        const auto& xfam = xw.entries[ri].family;
        for (std::size_t ci = 0; ci < ans.witness.entries.size(); ++ci) {
            int pos = ans.cols[ci].second;
            const auto& yfam = ans.witness.entries[ci].family;
            FamilyEntry e;
            for (const auto& u : xfam.sets)
                for (const auto& v : yfam.sets) {
                    std::vector<int> prod;
                    prod.reserve(u.size() * v.size());
                    for (int a : u)
                        for (int b : v) prod.push_back(a * ysize + b);
                    e.family.sets.push_back(std::move(prod));
                }
            e.separation = schedule[static_cast<std::size_t>(pos - 1)];
            e.mesh = std::max(x_meshes[ri], ans.meshes[ci]);
            placed[static_cast<std::size_t>(pos - 1)] = std::move(e);
            last_used = std::max(last_used, pos);
        }
    }

    CoverWitness out;
    for (int n = 1; n <= last_used; ++n) {
        FamilyEntry& e = placed[static_cast<std::size_t>(n - 1)];
        e.separation = schedule[static_cast<std::size_t>(n - 1)];
        if (!e.mesh) e.mesh = Rational(0);  // gap position: empty family
        out.entries.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Covers of restricted products of trees.
// ---------------------------------------------------------------------------

// Parameters of the tree-product construction: a strictly increasing
// schedule R_0 < R_1 < ... defined at least up to index k*2^k, block
// sizes k (annulus-treated factors) and m (parity-coded factors) with
// R_0 < k and R_{k*2^k} < m, period scale S = R_0 + R_{k*2^k}, and two
// bijections given as permutations: psi[l-1] is the m-bit code selecting
// parity families for the middle block, phi[t-1] the k-bit code for the
// first block.
struct TreeProductSchedule {
    std::vector<Rational> R;
    int k = 0;
    int m = 0;
    std::vector<int> psi;  // permutation of {0, ..., 2^m - 1}
    std::vector<int> phi;  // permutation of {0, ..., 2^k - 1}

    int top_index() const { return k * (1 << k); }
    const Rational& r0() const { return R.at(0); }
    const Rational& r_top() const { return R.at(static_cast<std::size_t>(top_index())); }
    Rational S() const { return r0() + r_top(); }
    int psi_bit(int l, int j) const { return (psi.at(static_cast<std::size_t>(l - 1)) >> j) & 1; }
    int phi_bit(int t, int i) const {
        return (phi.at(static_cast<std::size_t>(t - 1)) >> (i - 1)) & 1;
    }

    static TreeProductSchedule make(std::vector<Rational> r, int k, int m) {
        TreeProductSchedule s;
        s.R = std::move(r);
        s.k = k;
        s.m = m;
        s.psi.resize(static_cast<std::size_t>(1) << m);
        s.phi.resize(static_cast<std::size_t>(1) << k);
        for (std::size_t i = 0; i < s.psi.size(); ++i) s.psi[i] = static_cast<int>(i);
        for (std::size_t i = 0; i < s.phi.size(); ++i) s.phi[i] = static_cast<int>(i);
        s.validate();
        return s;
    }

    void validate() const {
        if (k < 1 || m < 1) throw PreconditionError("block sizes k, m must be positive");
        if (k > 16 || m > 16) throw BudgetError("block sizes beyond 16 are not supported");
        if (R.size() <= static_cast<std::size_t>(top_index()))
            throw PreconditionError("schedule needs " + std::to_string(top_index() + 1) +
                                    " values (up to index k*2^k), got " +
                                    std::to_string(R.size()));
        for (std::size_t i = 0; i < R.size(); ++i) {
            if (!(R[i] > 0)) throw PreconditionError("schedule values must be positive");
            if (i > 0 && !(R[i] > R[i - 1]))
                throw PreconditionError("schedule must be strictly increasing");
        }
        if (!(r0() < k))
            throw PreconditionError("constraint R_0 < k violated: " + rational_to_string(r0()) +
                                    " >= " + std::to_string(k));
        if (!(r_top() < m))
            throw PreconditionError("constraint R_{k*2^k} < m violated: " +
                                    rational_to_string(r_top()) + " >= " + std::to_string(m));
        auto check_perm = [](const std::vector<int>& p, std::size_t n, const char* name) {
            if (p.size() != n)
                throw PreconditionError(std::string(name) + " must be a permutation of " +
                                        std::to_string(n) + " codes");
            std::vector<char> hit(n, 0);
            for (int v : p) {
                if (v < 0 || static_cast<std::size_t>(v) >= n || hit[static_cast<std::size_t>(v)])
                    throw PreconditionError(std::string(name) + " is not a permutation");
                hit[static_cast<std::size_t>(v)] = 1;
            }
        };
        check_perm(psi, static_cast<std::size_t>(1) << m, "psi");
        check_perm(phi, static_cast<std::size_t>(1) << k, "phi");
    }
};

// Per-vertex location within a two-family depth-parity cover: which
// family (0/1) and which member set.
struct ParityIndex {
    SubsetFamily fams[2];
    std::vector<int> bit;  // per vertex
    std::vector<int> sid;  // per vertex
};

inline ParityIndex parity_families(const RootedTree& t, const Rational& r) {
    CoverWitness w = tree_asdim1_witness(t, r);
    ParityIndex out;
    out.bit.assign(t.size(), -1);
    out.sid.assign(t.size(), -1);
    for (int b = 0; b < 2; ++b) {
        out.fams[b] = w.entries[static_cast<std::size_t>(b)].family;
        for (std::size_t s = 0; s < out.fams[b].sets.size(); ++s)
            for (int v : out.fams[b].sets[s]) {
                out.bit[static_cast<std::size_t>(v)] = b;
                out.sid[static_cast<std::size_t>(v)] = static_cast<int>(s);
            }
    }
    for (std::size_t v = 0; v < t.size(); ++v)
        if (out.bit[v] < 0) throw Error("depth-parity families failed to cover a vertex");
    return out;
}

// The periodic annulus families on one annulus-treated factor: wide
// C-annuli refined at R_0, and the width-R_0 gap annuli refined at
// R_{k*2^k}. Together they cover the tree; gaps start only past depth
// (2^m + l)S - R_0.
struct CdwFactor {
    FamilyEntry C, D;
    std::vector<int> c_sid;  // per vertex: member set of C, or -1
    std::vector<int> d_sid;  // per vertex: member set of D, or -1
};

inline CdwFactor cdw_factor(const RootedTree& t, const TreeProductSchedule& sched, int l) {
    const Rational S = sched.S();
    const Rational& r0 = sched.r0();
    const int two_m = 1 << sched.m;
    const Rational maxd(t.max_depth());

    std::vector<Annulus> c_annuli, d_annuli;
    c_annuli.push_back({Rational(0), (two_m + l) * S - r0});
    for (int n = 1; Rational((static_cast<std::int64_t>(two_m) * n + l)) * S <= maxd; ++n) {
        Rational lo = (static_cast<std::int64_t>(two_m) * n + l) * S;
        Rational hi = (static_cast<std::int64_t>(two_m) * (n + 1) + l) * S - r0;
        c_annuli.push_back({lo, hi});
    }
    for (int n = 1; Rational((static_cast<std::int64_t>(two_m) * n + l)) * S - r0 <= maxd; ++n) {
        Rational hi = (static_cast<std::int64_t>(two_m) * n + l) * S;
        d_annuli.push_back({hi - r0, hi});
    }

    CdwFactor out;
    out.C = refine_annuli(t, c_annuli, r0);
    if (d_annuli.empty()) {
        out.D.separation = sched.r_top();
        out.D.mesh = Rational(0);
    } else {
        out.D = refine_annuli(t, d_annuli, sched.r_top());
    }
    out.c_sid.assign(t.size(), -1);
    out.d_sid.assign(t.size(), -1);
    for (std::size_t s = 0; s < out.C.family.sets.size(); ++s)
        for (int v : out.C.family.sets[s]) out.c_sid[static_cast<std::size_t>(v)] = static_cast<int>(s);
    for (std::size_t s = 0; s < out.D.family.sets.size(); ++s)
        for (int v : out.D.family.sets[s]) out.d_sid[static_cast<std::size_t>(v)] = static_cast<int>(s);
    return out;
}

// The three family layers for one value of l: per annulus-treated factor
// its C/D pair, plus the parity-bit selection for the middle block.
struct CdwBundle {
    std::vector<CdwFactor> factors;  // index i-1 for factor i = 1..k
    std::vector<int> w_bits;         // per middle coordinate j = 0..m-1
};

inline CdwBundle build_cdw(const std::vector<RootedTree>& trees,
                           const TreeProductSchedule& sched, int l) {
    sched.validate();
    if (l < 1 || l > (1 << sched.m))
        throw PreconditionError("l must lie in 1..2^m");
    if (trees.size() < static_cast<std::size_t>(sched.k + sched.m))
        throw PreconditionError("need at least k+m tree factors");
    CdwBundle out;
    for (int i = 1; i <= sched.k; ++i)
        out.factors.push_back(cdw_factor(trees[static_cast<std::size_t>(i - 1)], sched, l));
    for (int j = 0; j < sched.m; ++j) out.w_bits.push_back(sched.psi_bit(l, j));
    return out;
}

// Member sets of W_l on the materialized sup product of the middle-block
// trees (small cases only; for the full construction the selection stays
// symbolic inside restricted_tree_cover).
inline SubsetFamily materialize_w(const std::vector<RootedTree>& trees,
                                  const TreeProductSchedule& sched, int l,
                                  const std::vector<ParityIndex>& middle) {
    std::vector<std::size_t> sizes;
    for (int j = 0; j < sched.m; ++j)
        sizes.push_back(trees.at(static_cast<std::size_t>(sched.k + j)).size());
    std::vector<const SubsetFamily*> chosen;
    for (int j = 0; j < sched.m; ++j)
        chosen.push_back(&middle.at(static_cast<std::size_t>(j)).fams[sched.psi_bit(l, j)]);
    SubsetFamily out;
    std::vector<std::size_t> pick(static_cast<std::size_t>(sched.m), 0);
    while (true) {
        // one product set per choice of member sets
        std::vector<std::vector<int>> tuples{{}};
        for (int j = 0; j < sched.m; ++j) {
            const auto& s = chosen[static_cast<std::size_t>(j)]->sets[pick[static_cast<std::size_t>(j)]];
            std::vector<std::vector<int>> next;
            for (const auto& t : tuples)
                for (int v : s) {
                    auto u = t;
                    u.push_back(v);
                    next.push_back(std::move(u));
                }
            tuples = std::move(next);
        }
        std::vector<int> prod;
        for (const auto& t : tuples) {
            std::size_t idx = 0;
            for (int j = 0; j < sched.m; ++j)
                idx = idx * sizes[static_cast<std::size_t>(j)] +
                      static_cast<std::size_t>(t[static_cast<std::size_t>(j)]);
            prod.push_back(static_cast<int>(idx));
        }
        std::sort(prod.begin(), prod.end());
        out.sets.push_back(std::move(prod));
        int j = sched.m - 1;
        for (; j >= 0; --j) {
            if (++pick[static_cast<std::size_t>(j)] < chosen[static_cast<std::size_t>(j)]->sets.size()) break;
            pick[static_cast<std::size_t>(j)] = 0;
        }
        if (j < 0) break;
    }
    return out;
}

struct RestrictedCoverResult {
    MetricSpace space;      // the sampled points with the weighted metric
    CoverWitness witness;   // 1 + k*2^k families at separations R_0..R_{k*2^k}
};

// Cover a finite sample of a restricted product of trees: family 0 takes
// the points whose first k coordinates all sit in wide C-annuli (for the
// middle-block-determined l), and family 2^k(s-1)+t takes points whose
// s-th coordinate sits in a gap annulus, with the remaining first-block
// coordinates in the parity families selected by phi(t). Points are
// grouped by their full membership signature, so each family's sets are
// disjoint by construction; points with equal supports past k+m share a
// tail group, and differing tails force distance > k+m.
inline RestrictedCoverResult restricted_tree_cover(const std::vector<RootedTree>& trees,
                                                   const TreeProductSchedule& sched,
                                                   const std::vector<RestrictedPoint>& points) {
    sched.validate();
    const int k = sched.k, m = sched.m;
    if (trees.size() < static_cast<std::size_t>(k + m))
        throw PreconditionError("need at least k+m tree factors");
    for (const auto& p : points) {
        validate_restricted_point(p, trees.size());
        for (const auto& [coord, v] : p.support)
            if (v < 0 || static_cast<std::size_t>(v) >= trees[static_cast<std::size_t>(coord - 1)].size())
                throw PreconditionError("factor point index out of range at coordinate " +
                                        std::to_string(coord));
    }

    RestrictedCoverResult out{restricted_space(points, trees), {}};

    std::vector<ParityIndex> first_block, middle;
    for (int i = 1; i <= k; ++i)
        first_block.push_back(parity_families(trees[static_cast<std::size_t>(i - 1)], sched.r_top()));
    for (int j = 0; j < m; ++j)
        middle.push_back(parity_families(trees[static_cast<std::size_t>(k + j)], sched.r_top()));

    const int two_m = 1 << m;
    std::vector<CdwBundle> per_l;  // index l-1
    for (int l = 1; l <= two_m; ++l) per_l.push_back(build_cdw(trees, sched, l));

    std::vector<int> inv_psi(static_cast<std::size_t>(two_m));
    for (int l = 1; l <= two_m; ++l)
        inv_psi[static_cast<std::size_t>(sched.psi[static_cast<std::size_t>(l - 1)])] = l;

    // per point: coordinate values, middle signature, l, tail group
    auto coord_of = [&](const RestrictedPoint& p, int i) {
        auto it = p.support.find(i);
        return it == p.support.end() ? 0 : it->second;
    };
    std::map<std::vector<std::pair<int, int>>, int> tail_ids;
    std::vector<int> p_l(points.size()), p_tail(points.size());
    std::vector<std::vector<int>> p_mid_sid(points.size());
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        int code = 0;
        auto& mids = p_mid_sid[pi];
        for (int j = 0; j < m; ++j) {
            int v = coord_of(points[pi], k + 1 + j);
            code |= middle[static_cast<std::size_t>(j)].bit[static_cast<std::size_t>(v)] << j;
            mids.push_back(middle[static_cast<std::size_t>(j)].sid[static_cast<std::size_t>(v)]);
        }
        p_l[pi] = inv_psi[static_cast<std::size_t>(code)];
        std::vector<std::pair<int, int>> tail;
        for (const auto& [coord, v] : points[pi].support)
            if (coord > k + m) tail.push_back({coord, v});
        p_tail[pi] = tail_ids.emplace(std::move(tail), static_cast<int>(tail_ids.size()))
                         .first->second;
    }

    auto grouped_entry = [&](const std::vector<std::pair<std::vector<int>, int>>& keyed,
                             const Rational& separation) {
        std::map<std::vector<int>, std::vector<int>> groups;
        for (const auto& [key, pi] : keyed) groups[key].push_back(pi);
        FamilyEntry e;
        e.separation = separation;
        for (auto& [key, members] : groups) e.family.sets.push_back(std::move(members));
        e.mesh = family_mesh(out.space, e.family);
        return e;
    };

    // family 0: all first-block coordinates inside C-annuli
    {
        std::vector<std::pair<std::vector<int>, int>> keyed;
        for (std::size_t pi = 0; pi < points.size(); ++pi) {
            const CdwBundle& b = per_l[static_cast<std::size_t>(p_l[pi] - 1)];
            std::vector<int> key{p_l[pi], p_tail[pi]};
            bool ok = true;
            for (int i = 1; i <= k && ok; ++i) {
                int v = coord_of(points[pi], i);
                int cid = b.factors[static_cast<std::size_t>(i - 1)].c_sid[static_cast<std::size_t>(v)];
                if (cid < 0)
                    ok = false;
                else
                    key.push_back(cid);
            }
            if (!ok) continue;
            for (int s : p_mid_sid[pi]) key.push_back(s);
            keyed.push_back({std::move(key), static_cast<int>(pi)});
        }
        out.witness.entries.push_back(grouped_entry(keyed, sched.r0()));
    }

    // family 2^k(s-1)+t: gap annulus at coordinate s, parity choice phi(t)
    // elsewhere in the first block
    for (int s = 1; s <= k; ++s)
        for (int t = 1; t <= (1 << k); ++t) {
            std::vector<std::pair<std::vector<int>, int>> keyed;
            for (std::size_t pi = 0; pi < points.size(); ++pi) {
                const CdwBundle& b = per_l[static_cast<std::size_t>(p_l[pi] - 1)];
                int vs = coord_of(points[pi], s);
                int did = b.factors[static_cast<std::size_t>(s - 1)].d_sid[static_cast<std::size_t>(vs)];
                if (did < 0) continue;
                std::vector<int> key{p_l[pi], p_tail[pi], did};
                bool ok = true;
                for (int i = 1; i <= k && ok; ++i) {
                    if (i == s) continue;
                    int v = coord_of(points[pi], i);
                    const ParityIndex& par = first_block[static_cast<std::size_t>(i - 1)];
                    if (par.bit[static_cast<std::size_t>(v)] != sched.phi_bit(t, i))
                        ok = false;
                    else
                        key.push_back(par.sid[static_cast<std::size_t>(v)]);
                }
                if (!ok) continue;
                for (int sm : p_mid_sid[pi]) key.push_back(sm);
                keyed.push_back({std::move(key), static_cast<int>(pi)});
            }
            int j = (1 << k) * (s - 1) + t;
            out.witness.entries.push_back(
                grouped_entry(keyed, sched.R[static_cast<std::size_t>(j)]));
        }

    return out;
}

}  // namespace coarse
