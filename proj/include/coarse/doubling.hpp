#pragma once

// Large-scale doubling checks on finite spaces. The core decision —
// can B_2r(x) ∩ U be covered by at most N open r-balls centered in the
// space — is made exactly: a greedy pre-pass for fast acceptance, then
// branch-and-bound over candidate centers. Approximation is never
// substituted; ball counts past the search budget raise an error instead.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/family.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/rational.hpp"
#include "coarse/report.hpp"
#include "coarse/util.hpp"
#include "coarse/witness.hpp"

namespace coarse {

inline constexpr int kBallSearchBudget = 5;

struct DoublingParams {
    int n = 1;         // ball count
    Rational r = 1;    // scale threshold

    void validate() const {
        if (n < 1) throw PreconditionError("ball count must be at least 1");
        if (!(r > 0)) throw PreconditionError("scale threshold must be positive");
    }
};

// Scales {R, 2R, 4R, ...} not exceeding diam. Empty when R > diam, which
// leaves nothing to check: an open ball of radius beyond the diameter is
// the whole space, so one ball always suffices at such scales.
inline std::vector<Rational> geometric_grid(const Rational& r, const Rational& diam) {
    std::vector<Rational> grid;
    for (Rational v = r; v <= diam; v *= 2) grid.push_back(v);
    return grid;
}

// Every scale in [R, diam] where some ball's membership can change: the
// realized distances (B_r boundaries) and their halves (B_2r boundaries).
// The cover predicate is constant between consecutive values and constant
// past the diameter, so this grid decides the full range r ≥ R.
inline std::vector<Rational> exhaustive_grid(const MetricSpace& m, const Rational& r) {
    std::vector<Rational> grid;
    const Rational diam = m.diameter();
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            Rational d = m.dist(static_cast<int>(i), static_cast<int>(j));
            if (d >= r && d <= diam) grid.push_back(d);
            Rational h = d / 2;
            if (h >= r && h <= diam) grid.push_back(h);
        }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

inline std::vector<Rational> default_r_grid(const MetricSpace& m, const Rational& r,
                                            bool exhaustive) {
    return exhaustive ? exhaustive_grid(m, r) : geometric_grid(r, m.diameter());
}

namespace detail {

// Exact decision: do <= n open r-balls centered in the space cover the
// target points? Candidate centers are all points; branching always picks
// the uncovered target with the fewest candidate centers.
class BallCoverSearch {
public:
    BallCoverSearch(const MetricSpace& m, std::vector<int> target, const Rational& r)
        : m_(m), target_(std::move(target)), r_(r), mask_cache_(m.size()) {
        centers_for_.resize(target_.size());
        if (m_.integral() && rational_is_integer(r_)) {
            std::int64_t ri = rational_ceil_ll(r_);
            for (std::size_t j = 0; j < target_.size(); ++j)
                for (std::size_t c = 0; c < m_.size(); ++c)
                    if (m_.idist(static_cast<int>(c), target_[j]) < ri)
                        centers_for_[j].push_back(static_cast<int>(c));
        } else {
            for (std::size_t j = 0; j < target_.size(); ++j)
                for (std::size_t c = 0; c < m_.size(); ++c)
                    if (m_.dist(static_cast<int>(c), target_[j]) < r_)
                        centers_for_[j].push_back(static_cast<int>(c));
        }
    }

    bool coverable(int n) {
        if (target_.empty()) return true;
        Bitset covered(target_.size());
        // greedy: repeatedly take the center gaining the most targets
        Bitset greedy = covered;
        for (int step = 0; step < n; ++step) {
            std::size_t best_gain = 0;
            const Bitset* best = nullptr;
            for (std::size_t c = 0; c < m_.size(); ++c) {
                const Bitset& mask = mask_of(static_cast<int>(c));
                std::size_t gain = mask.and_not(greedy).count();
                if (gain > best_gain) {
                    best_gain = gain;
                    best = &mask;
                }
            }
            if (!best) break;
            greedy |= *best;
            if (greedy.count() == target_.size()) return true;
        }
        return branch(covered, 0, n);
    }

private:
    const Bitset& mask_of(int c) {
        auto& slot = mask_cache_[static_cast<std::size_t>(c)];
        if (!slot) {
            Bitset b(target_.size());
            if (m_.integral() && rational_is_integer(r_)) {
                std::int64_t ri = rational_ceil_ll(r_);
                for (std::size_t j = 0; j < target_.size(); ++j)
                    if (m_.idist(c, target_[j]) < ri) b.set(j);
            } else {
                for (std::size_t j = 0; j < target_.size(); ++j)
                    if (m_.dist(c, target_[j]) < r_) b.set(j);
            }
            slot = std::move(b);
        }
        return *slot;
    }

    bool branch(const Bitset& covered, int depth, int n) {
        if (covered.count() == target_.size()) return true;
        if (depth == n) return false;
        // pick the uncovered target hardest to cover
        std::size_t pick = Bitset::npos, pick_width = static_cast<std::size_t>(-1);
        for (std::size_t j = 0; j < target_.size(); ++j)
            if (!covered.test(j) && centers_for_[j].size() < pick_width) {
                pick = j;
                pick_width = centers_for_[j].size();
            }
        if (pick_width == 0) return false;  // unreachable: each point covers itself
        // order that target's candidate centers by marginal coverage
        std::vector<std::pair<std::size_t, int>> order;
        for (int c : centers_for_[pick])
            order.push_back({mask_of(c).and_not(covered).count(), c});
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second < b.second);
        });
        for (const auto& [gain, c] : order) {
            Bitset next = covered;
            next |= mask_of(c);
            if (branch(next, depth + 1, n)) return true;
        }
        return false;
    }

    const MetricSpace& m_;
    std::vector<int> target_;
    Rational r_;
    std::vector<std::optional<Bitset>> mask_cache_;
    std::vector<std::vector<int>> centers_for_;
};

}  // namespace detail

// Exact cover decision for one (target, n, r) instance.
inline bool ball_cover_decision(const MetricSpace& m, const std::vector<int>& target, int n,
                                const Rational& r, int search_budget = kBallSearchBudget) {
    if (n > search_budget)
        throw BudgetError("exact ball-cover search supports at most " +
                          std::to_string(search_budget) + " balls, asked for " +
                          std::to_string(n) + "; raise the budget to insist");
    detail::BallCoverSearch search(m, target, r);
    return search.coverable(n);
}

// Does every B_2r(x) ∩ U admit a cover by <= N open r-balls centered in
// the space, for every point x and every scale r in the grid? Violations
// name the failing (x, r) pairs, ordered by point index then scale.
inline VerificationReport is_lsd_subset(const MetricSpace& m, const std::vector<int>& u,
                                        const DoublingParams& params,
                                        const std::vector<Rational>& r_grid,
                                        int search_budget = kBallSearchBudget) {
    params.validate();
    if (u.empty()) throw PreconditionError("subset must be nonempty");
    std::vector<int> subset = u;
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    if (subset.front() < 0 || static_cast<std::size_t>(subset.back()) >= m.size())
        throw PreconditionError("subset point index out of range");
    for (const Rational& r : r_grid)
        if (r < params.r)
            throw PreconditionError("grid scale " + rational_to_string(r) +
                                    " is below the threshold " + rational_to_string(params.r));
    if (params.n > search_budget)
        throw BudgetError("exact ball-cover search supports at most " +
                          std::to_string(search_budget) + " balls, asked for " +
                          std::to_string(params.n) + "; raise the budget to insist");

    std::vector<VerificationReport> per_point(m.size());
    parallel_for(m.size(), [&](std::size_t xi) {
        int x = static_cast<int>(xi);
        for (const Rational& r : r_grid) {
            Rational two_r = 2 * r;
            std::vector<int> target;
            for (int p : subset)
                if (m.dist(x, p) < two_r) target.push_back(p);
            detail::BallCoverSearch search(m, target, r);
            if (!search.coverable(params.n))
                per_point[xi].add(
                    "ball-cover", {m.label(x), "r=" + rational_to_string(r)},
                    "no cover by " + std::to_string(params.n) + " balls of radius " +
                        rational_to_string(r),
                    "B_2r(x) within the subset coverable by " + std::to_string(params.n) +
                        " r-balls");
        }
    });
    VerificationReport report;
    for (const auto& r : per_point) report.merge(r);
    return report;
}

namespace detail {

inline std::string member_list_name(const std::vector<std::size_t>& idx) {
    std::string s = "{";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(idx[i]);
    }
    return s + "}";
}

}  // namespace detail

// Clause (a) of uniform large-scale doubling: every member is doubling at
// the given (N, R) across the grid.
inline VerificationReport is_weakly_uniformly_lsd(const MetricSpace& m, const SubsetFamily& f,
                                                  const DoublingParams& params,
                                                  const std::vector<Rational>& r_grid,
                                                  int search_budget = kBallSearchBudget) {
    if (f.sets.empty()) throw PreconditionError("family must be nonempty");
    f.validate(m.size());
    VerificationReport report;
    for (std::size_t i = 0; i < f.sets.size(); ++i) {
        VerificationReport sub = is_lsd_subset(m, f.sets[i], params, r_grid, search_budget);
        for (auto& v : sub.violations) {
            v.subjects.insert(v.subjects.begin(), "member " + std::to_string(i));
            report.violations.push_back(std::move(v));
        }
    }
    return report;
}

// Full uniform large-scale doubling: clause (a) above, plus clause (b) —
// every union of at most union_budget members is doubling at (N, R') for
// some R' in {R, 2R, 4R, ...}. On a finite space the search always lands
// (scales past the diameter hold trivially); the found R' per union is
// recorded in the report's notes.
inline VerificationReport is_uniformly_lsd(const MetricSpace& m, const SubsetFamily& f,
                                           const DoublingParams& params, int union_budget,
                                           const std::vector<Rational>& r_grid,
                                           int search_budget = kBallSearchBudget) {
    if (union_budget < 1) throw PreconditionError("union budget must be at least 1");
    VerificationReport report = is_weakly_uniformly_lsd(m, f, params, r_grid, search_budget);

    const Rational diam = m.diameter();
    auto union_passes_at = [&](const std::vector<int>& pts, const Rational& r_prime) {
        std::vector<Rational> grid;
        for (const Rational& r : r_grid)
            if (r >= r_prime) grid.push_back(r);
        DoublingParams p{params.n, r_prime};
        return is_lsd_subset(m, pts, p, grid, search_budget).pass();
    };

    // unions of 2..union_budget members, in lexicographic index order
    std::vector<std::size_t> pick;
    auto handle_union = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> pts;
        for (std::size_t i : idx)
            pts.insert(pts.end(), f.sets[i].begin(), f.sets[i].end());
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        Rational r_prime = params.r;
        while (!union_passes_at(pts, r_prime)) {
            if (r_prime > diam)
                throw Error("union scale search failed beyond the diameter");
            r_prime *= 2;
        }
        report.note("union " + detail::member_list_name(idx) +
                    ": doubling at R'=" + rational_to_string(r_prime));
    };
    std::size_t cap = std::min<std::size_t>(static_cast<std::size_t>(union_budget),
                                            f.sets.size());
    for (std::size_t size = 2; size <= cap; ++size) {
        pick.assign(size, 0);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        while (true) {
            handle_union(pick);
            std::size_t j = size;
            while (j > 0 && pick[j - 1] == f.sets.size() - (size - j) - 1) --j;
            if (j == 0) break;
            ++pick[j - 1];
            for (std::size_t i = j; i < size; ++i) pick[i] = pick[i - 1] + 1;
        }
    }
    return report;
}

// Which family the doubling condition of a layered cover applies to: the
// single concatenation of all layers, or each layer on its own. Both
// readings of the definition are exposed; neither is preferred silently.
enum class DoublingReading { union_family, per_family };

// Check a layered cover witness as a doubling cover: the witness itself
// (coverage and separations) plus the large-scale doubling condition in
// the chosen reading, fully quantified unions (uniform) or members only
// (weak).
inline VerificationReport verify_doubling_cover(const MetricSpace& m, const CoverWitness& w,
                                                const DoublingParams& params, int union_budget,
                                                const std::vector<Rational>& r_grid,
                                                DoublingReading reading, bool weak,
                                                int search_budget = kBallSearchBudget) {
    VerificationReport report = verify_cover_witness(m, w);
    auto run = [&](const SubsetFamily& f, const std::string& tag) {
        if (f.sets.empty()) return;
        VerificationReport sub =
            weak ? is_weakly_uniformly_lsd(m, f, params, r_grid, search_budget)
                 : is_uniformly_lsd(m, f, params, union_budget, r_grid, search_budget);
        if (!tag.empty()) {
            for (auto& v : sub.violations) v.subjects.insert(v.subjects.begin(), tag);
            for (auto& n : sub.notes) n = tag + ": " + n;
        }
        report.merge(sub);
    };
    if (reading == DoublingReading::union_family) {
        SubsetFamily all;
        for (const auto& e : w.entries)
            all.sets.insert(all.sets.end(), e.family.sets.begin(), e.family.sets.end());
        run(all, "");
    } else {
        for (std::size_t i = 0; i < w.entries.size(); ++i)
            run(w.entries[i].family, "family " + std::to_string(i));
    }
    return report;
}

}  // namespace coarse
