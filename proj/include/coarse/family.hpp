#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/rational.hpp"
#include "coarse/report.hpp"

namespace coarse {

// A finite list of point-index subsets of one metric space. Sets are kept
// sorted and duplicate-free; empty member sets are dropped on normalize
// (an empty *family* is legal and is vacuously disjoint with mesh 0).
struct SubsetFamily {
    std::vector<std::vector<int>> sets;

    void normalize() {
        for (auto& s : sets) {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
        }
        sets.erase(std::remove_if(sets.begin(), sets.end(),
                                  [](const std::vector<int>& s) { return s.empty(); }),
                   sets.end());
    }

    void validate(std::size_t space_size) const {
        for (const auto& s : sets) {
            if (s.empty()) throw PreconditionError("family contains an empty set");
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (s[k] < 0 || static_cast<std::size_t>(s[k]) >= space_size)
                    throw PreconditionError("point index " + std::to_string(s[k]) +
                                            " out of range");
                if (k > 0 && s[k] <= s[k - 1])
                    throw PreconditionError("set members must be sorted and distinct");
            }
        }
    }

    std::size_t point_count() const {
        std::size_t n = 0;
        for (const auto& s : sets) n += s.size();
        return n;
    }
};

namespace detail {

template <class M>
std::int64_t iset_distance(const M& m, const std::vector<int>& a, const std::vector<int>& b) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (int x : a)
        for (int y : b)
            best = std::min(best, m.idist(static_cast<std::size_t>(x), static_cast<std::size_t>(y)));
    return best;
}

template <class M>
Rational rset_distance(const M& m, const std::vector<int>& a, const std::vector<int>& b) {
    Rational best = m.dist(static_cast<std::size_t>(a[0]), static_cast<std::size_t>(b[0]));
    for (int x : a)
        for (int y : b) {
            Rational d = m.dist(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
            if (d < best) best = d;
        }
    return best;
}

}  // namespace detail

// d(A, B) = min over pairs; exact.
template <class M>
Rational set_distance(const M& m, const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) throw PreconditionError("set distance needs nonempty sets");
    if (m.integral()) return Rational(detail::iset_distance(m, a, b));
    return detail::rset_distance(m, a, b);
}

// diam(A) = max over pairs; 0 for a singleton.
template <class M>
Rational set_diameter(const M& m, const std::vector<int>& a) {
    if (a.empty()) throw PreconditionError("diameter needs a nonempty set");
    if (m.integral()) {
        std::int64_t best = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j)
                best = std::max(best, m.idist(static_cast<std::size_t>(a[i]),
                                              static_cast<std::size_t>(a[j])));
        return Rational(best);
    }
    Rational best = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            Rational d = m.dist(static_cast<std::size_t>(a[i]), static_cast<std::size_t>(a[j]));
            if (d > best) best = d;
        }
    return best;
}

// mesh(F) = max set diameter; 0 for an empty family.
template <class M>
Rational family_mesh(const M& m, const SubsetFamily& f) {
    Rational best = 0;
    for (const auto& s : f.sets) {
        Rational d = set_diameter(m, s);
        if (d > best) best = d;
    }
    return best;
}

namespace detail {

inline std::string set_name(const std::vector<int>& s, std::size_t cap = 6) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size() && i < cap; ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    if (s.size() > cap) out += ",...";
    return out + "}";
}

}  // namespace detail

// Strict R-disjointness: every pair of distinct member sets must satisfy
// d(A, B) > R. Each failing pair is reported with its exact distance.
template <class M>
VerificationReport is_r_disjoint(const M& m, const SubsetFamily& f, const Rational& r) {
    VerificationReport rep;
    const std::size_t n = f.sets.size();
    if (m.integral()) {
        Threshold thr(r);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                std::int64_t d = detail::iset_distance(m, f.sets[i], f.sets[j]);
                if (thr.le(d))
                    rep.add("separation", {detail::set_name(f.sets[i]), detail::set_name(f.sets[j])},
                            rational_to_string(Rational(d)), "> " + rational_to_string(r));
            }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                Rational d = detail::rset_distance(m, f.sets[i], f.sets[j]);
                if (!(d > r))
                    rep.add("separation", {detail::set_name(f.sets[i]), detail::set_name(f.sets[j])},
                            rational_to_string(d), "> " + rational_to_string(r));
            }
    }
    return rep;
}

}  // namespace coarse
