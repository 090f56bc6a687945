#pragma once

// Coarse-embedding machinery. Distortion envelopes are step functions on
// the realized distances of a finite sample (left-constant in between,
// zero before the first breakpoint): the lower one is the largest
// nondecreasing function under the observed minima, the upper one the
// running maximum of the observed maxima. Witness pullback transports a
// cover witness through a map against its envelope; the appended
// embedding sends factor-wise embedded points into one weighted product
// of trees and carries explicit upper and lower distance estimates at
// three granularities.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/family.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/product.hpp"
#include "coarse/rational.hpp"
#include "coarse/report.hpp"
#include "coarse/tree.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// Nondecreasing step function: value at t is the value of the largest
// breakpoint not exceeding t, and 0 before the first breakpoint.
struct StepFunction {
    std::vector<std::pair<Rational, Rational>> points;  // (distance, value), ascending

    Rational eval(const Rational& t) const {
        Rational v = 0;
        for (const auto& [bt, bv] : points) {
            if (bt > t) break;
            v = bv;
        }
        return v;
    }

    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].first < 0 || points[i].second < 0)
                throw PreconditionError("step function entries must be nonnegative");
            if (i > 0 && !(points[i].first > points[i - 1].first))
                throw PreconditionError("step function breakpoints must be strictly increasing");
            if (i > 0 && points[i].second < points[i - 1].second)
                throw PreconditionError("step function values must be nondecreasing");
        }
    }

    // drop breakpoints that repeat the running value; left-constant
    // evaluation makes them redundant
    void compress() {
        std::vector<std::pair<Rational, Rational>> kept;
        Rational last = 0;
        for (auto& p : points) {
            if (kept.empty() ? p.second == 0 : p.second == last) continue;
            last = p.second;
            kept.push_back(std::move(p));
        }
        points = std::move(kept);
    }
};

inline StepFunction pointwise_max(const StepFunction& a, const StepFunction& b) {
    std::vector<Rational> ts;
    for (const auto& p : a.points) ts.push_back(p.first);
    for (const auto& p : b.points) ts.push_back(p.first);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    StepFunction out;
    for (const Rational& t : ts) out.points.push_back({t, std::max(a.eval(t), b.eval(t))});
    out.compress();
    return out;
}

struct DistortionEnvelope {
    StepFunction lo;  // rho_minus
    StepFunction hi;  // rho_plus

    void validate() const {
        lo.validate();
        hi.validate();
        for (const auto& p : lo.points)
            if (p.second > hi.eval(p.first))
                throw PreconditionError("lower envelope exceeds the upper at distance " +
                                        rational_to_string(p.first));
    }
};

// Finite-scale properness proxy: does the lower envelope climb past the
// threshold by the largest sampled distance? Says nothing about scales
// beyond the sample.
inline bool envelope_proper_beyond(const DistortionEnvelope& env, const Rational& threshold) {
    return !env.lo.points.empty() && env.lo.points.back().second > threshold;
}

// Tightest envelope a finite sample supports: per realized domain
// distance take the extreme image distances, then smooth to nondecreasing
// (running max above, reverse running min below).
inline DistortionEnvelope empirical_envelope(const MetricSpace& x, const MetricSpace& y,
                                             const std::vector<int>& image) {
    if (x.size() == 0) throw PreconditionError("empty domain");
    if (image.size() != x.size())
        throw PreconditionError("map must assign an image to every domain point");
    for (int v : image)
        if (v < 0 || static_cast<std::size_t>(v) >= y.size())
            throw PreconditionError("image index out of range");

    std::map<Rational, std::pair<Rational, Rational>> raw;  // t -> (min, max)
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            Rational t = x.dist(i, j);
            Rational d = y.dist(static_cast<std::size_t>(image[i]),
                                static_cast<std::size_t>(image[j]));
            auto it = raw.find(t);
            if (it == raw.end())
                raw.emplace(t, std::make_pair(d, d));
            else {
                it->second.first = std::min(it->second.first, d);
                it->second.second = std::max(it->second.second, d);
            }
        }

    DistortionEnvelope env;
    Rational run_max = 0;
    for (const auto& [t, mm] : raw) {
        run_max = std::max(run_max, mm.second);
        env.hi.points.push_back({t, run_max});
    }
    Rational run_min = 0;
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
        run_min = it == raw.rbegin() ? it->second.first : std::min(run_min, it->second.first);
        env.lo.points.push_back({it->first, run_min});
    }
    std::reverse(env.lo.points.begin(), env.lo.points.end());
    env.hi.compress();
    env.lo.compress();
    env.validate();
    return env;
}

// Pull a verified cover witness on the codomain back through the map:
// family i becomes {preimage of V : V in family i} at the target
// separation, provided the family was built at separation at least
// rho_plus of that target (then image distance above the family's
// separation forces domain distance above the target). The mesh claim is
// the largest sampled distance whose lower-envelope value still fits
// under the family's mesh; if even the largest sampled distance fits, no
// bound is derivable and the pullback refuses.
inline CoverWitness pullback_witness(const MetricSpace& x, const MetricSpace& y,
                                     const std::vector<int>& image,
                                     const DistortionEnvelope& env, const CoverWitness& wy,
                                     const std::vector<Rational>& targets) {
    env.validate();
    if (image.size() != x.size())
        throw PreconditionError("map must assign an image to every domain point");
    if (targets.size() != wy.entries.size())
        throw PreconditionError("one target separation per witness family: " +
                                std::to_string(wy.entries.size()) + " families, " +
                                std::to_string(targets.size()) + " targets");
    VerificationReport wr = verify_cover_witness(y, wy);
    if (!wr.pass())
        throw PreconditionError("codomain witness fails verification: " + wr.summary());

    std::vector<Rational> realized;  // domain distances, ascending
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) realized.push_back(x.dist(i, j));
    std::sort(realized.begin(), realized.end());
    realized.erase(std::unique(realized.begin(), realized.end()), realized.end());

    CoverWitness out;
    for (std::size_t i = 0; i < wy.entries.size(); ++i) {
        const FamilyEntry& e = wy.entries[i];
        Rational needed = env.hi.eval(targets[i]);
        if (e.separation < needed)
            throw PreconditionError(
                "family " + std::to_string(i) + " was built at separation " +
                rational_to_string(e.separation) + ", below the required upper-envelope value " +
                rational_to_string(needed) + " at target " + rational_to_string(targets[i]));

        Rational y_mesh = e.mesh ? *e.mesh : family_mesh(y, e.family);
        if (!realized.empty() && env.lo.eval(realized.back()) <= y_mesh)
            throw PreconditionError(
                "cannot bound preimage mesh for family " + std::to_string(i) +
                ": the lower envelope stays within " + rational_to_string(y_mesh) +
                " up to the largest sampled distance " + rational_to_string(realized.back()));
        Rational mesh_bound = 0;
        for (const Rational& t : realized)
            if (env.lo.eval(t) <= y_mesh) mesh_bound = std::max(mesh_bound, t);

        FamilyEntry fe;
        fe.separation = targets[i];
        fe.mesh = mesh_bound;
        for (const auto& v : e.family.sets) {
            std::vector<int> pre;
            for (std::size_t p = 0; p < x.size(); ++p)
                if (std::binary_search(v.begin(), v.end(), image[p]))
                    pre.push_back(static_cast<int>(p));
            if (!pre.empty()) fe.family.sets.push_back(std::move(pre));
        }
        out.entries.push_back(std::move(fe));
    }

    VerificationReport check = verify_cover_witness(x, out);
    if (!check.pass())
        throw PreconditionError("pullback failed verification (is the envelope valid for the "
                                "map?): " +
                                check.summary());
    return out;
}

// ---------------------------------------------------------------------------
// Appended embeddings into a weighted product of trees.
// ---------------------------------------------------------------------------

// Strictly increasing block starts: factor i owns product coordinates
// K(i) .. K(i+1)-1. K(1) = 1 so the blocks tile an initial segment.
struct BlockPartition {
    std::vector<std::int64_t> k;  // K(1), K(2), ...

    void validate() const {
        if (k.empty()) throw PreconditionError("block partition is empty");
        if (k.front() != 1) throw PreconditionError("blocks must start at coordinate 1");
        for (std::size_t i = 1; i < k.size(); ++i)
            if (k[i] <= k[i - 1])
                throw PreconditionError("block starts must be strictly increasing");
    }

    // K(i), 1-based; errors name the missing index
    std::int64_t at(int i) const {
        if (i < 1 || static_cast<std::size_t>(i) > k.size())
            throw PreconditionError("block partition is not defined at index " +
                                    std::to_string(i) + " (holds " + std::to_string(k.size()) +
                                    " entries)");
        return k[static_cast<std::size_t>(i - 1)];
    }
};

// One factor's embedding data: a finite sample of the factor, the trees
// of its block, each sample point's image tuple (one vertex per tree),
// and a distortion envelope for the map. The tuple metric is the max of
// the tree distances.
struct FactorEmbedding {
    MetricSpace domain;
    std::vector<RootedTree> trees;
    std::vector<std::vector<int>> image;  // image[p][b] = vertex in trees[b]
    DistortionEnvelope env;

    Rational image_distance(int p, int q) const {
        std::int64_t best = 0;
        for (std::size_t b = 0; b < trees.size(); ++b)
            best = std::max(best, trees[b].distance(image[static_cast<std::size_t>(p)][b],
                                                    image[static_cast<std::size_t>(q)][b]));
        return Rational(best);
    }
};

struct EmbeddingSpec {
    std::vector<FactorEmbedding> factors;  // factor i = factors[i-1]

    // Normalize into the form the bound arguments rely on: upper
    // envelopes nondecreasing across factors (running pointwise max),
    // lower envelopes at least 1 from distance 1 on (distinct points map
    // to distinct tuples over integer tree metrics, so image distances at
    // positive domain distance are at least 1), then every per-factor
    // sandwich re-checked.
    void finalize() {
        if (factors.empty()) throw PreconditionError("no factors");
        for (std::size_t fi = 0; fi < factors.size(); ++fi) {
            FactorEmbedding& f = factors[fi];
            std::string tag = "factor " + std::to_string(fi + 1);
            if (f.trees.empty()) throw PreconditionError(tag + " has no trees");
            if (f.image.size() != f.domain.size())
                throw PreconditionError(tag + " must map every sample point");
            for (const auto& tup : f.image) {
                if (tup.size() != f.trees.size())
                    throw PreconditionError(tag + " image tuples must have one vertex per tree");
                for (std::size_t b = 0; b < tup.size(); ++b)
                    if (tup[b] < 0 || static_cast<std::size_t>(tup[b]) >= f.trees[b].size())
                        throw PreconditionError(tag + " image vertex out of range");
            }
            for (int v : f.image[0])
                if (v != 0)
                    throw PreconditionError(tag +
                                            " must send its base point to the tree roots");
            for (std::size_t p = 0; p < f.image.size(); ++p)
                for (std::size_t q = p + 1; q < f.image.size(); ++q) {
                    if (f.image[p] == f.image[q])
                        throw PreconditionError(tag + " is not injective: " +
                                                f.domain.label(p) + " and " + f.domain.label(q) +
                                                " share an image");
                    if (f.domain.dist(p, q) < 1)
                        throw PreconditionError(tag + " sample has distinct points at distance " +
                                                rational_to_string(f.domain.dist(p, q)) +
                                                "; distances below 1 break the block estimates");
                }
            f.env.validate();
        }

        // upper envelopes: running max across factors
        for (std::size_t fi = 1; fi < factors.size(); ++fi)
            factors[fi].env.hi = pointwise_max(factors[fi].env.hi, factors[fi - 1].env.hi);

        // lower envelopes: at least 1 from distance 1 on
        for (auto& f : factors) {
            StepFunction floor_one;
            floor_one.points.push_back({Rational(1), Rational(1)});
            f.env.lo = pointwise_max(f.env.lo, floor_one);
        }

        for (std::size_t fi = 0; fi < factors.size(); ++fi) {
            const FactorEmbedding& f = factors[fi];
            for (std::size_t p = 0; p < f.domain.size(); ++p)
                for (std::size_t q = p + 1; q < f.domain.size(); ++q) {
                    Rational t = f.domain.dist(p, q);
                    Rational d = f.image_distance(static_cast<int>(p), static_cast<int>(q));
                    if (d < f.env.lo.eval(t) || d > f.env.hi.eval(t))
                        throw PreconditionError(
                            "factor " + std::to_string(fi + 1) + " envelope fails at " +
                            f.domain.label(p) + "," + f.domain.label(q) + ": image distance " +
                            rational_to_string(d) + " outside [" +
                            rational_to_string(f.env.lo.eval(t)) + ", " +
                            rational_to_string(f.env.hi.eval(t)) + "]");
                }
        }
    }

    // block widths must match each factor's tree count
    void check_blocks(const BlockPartition& blocks) const {
        blocks.validate();
        for (std::size_t fi = 0; fi < factors.size(); ++fi) {
            std::int64_t width = blocks.at(static_cast<int>(fi) + 2) -
                                 blocks.at(static_cast<int>(fi) + 1);
            if (width != static_cast<std::int64_t>(factors[fi].trees.size()))
                throw PreconditionError("factor " + std::to_string(fi + 1) + " holds " +
                                        std::to_string(factors[fi].trees.size()) +
                                        " trees but its block has width " +
                                        std::to_string(width));
        }
    }
};

namespace detail {

inline int factor_coordinate(const EmbeddingSpec& spec, const RestrictedPoint& p, int i) {
    auto it = p.support.find(i);
    if (it == p.support.end()) return 0;
    if (i < 1 || static_cast<std::size_t>(i) > spec.factors.size())
        throw PreconditionError("missing factor map for coordinate " + std::to_string(i));
    const auto& f = spec.factors[static_cast<std::size_t>(i - 1)];
    if (it->second < 0 || static_cast<std::size_t>(it->second) >= f.domain.size())
        throw PreconditionError("sample index out of range at coordinate " + std::to_string(i));
    return it->second;
}

}  // namespace detail

// Send a finitely supported point of the factor product into the product
// of all block trees: coordinate K(i)+b of the output is component b of
// factor i's image tuple. Base points go to roots, so support stays finite.
inline RestrictedPoint append_embedding(const EmbeddingSpec& spec, const BlockPartition& blocks,
                                        const RestrictedPoint& x) {
    RestrictedPoint out;
    for (const auto& entry : x.support) {
        int i = entry.first;
        int xi = detail::factor_coordinate(spec, x, i);
        const FactorEmbedding& f = spec.factors[static_cast<std::size_t>(i - 1)];
        std::int64_t lo = blocks.at(i);
        std::int64_t width = blocks.at(i + 1) - lo;
        if (width != static_cast<std::int64_t>(f.trees.size()))
            throw PreconditionError("factor " + std::to_string(i) + " holds " +
                                    std::to_string(f.trees.size()) +
                                    " trees but its block has width " + std::to_string(width));
        const auto& tuple = f.image[static_cast<std::size_t>(xi)];
        for (std::size_t b = 0; b < tuple.size(); ++b)
            if (tuple[b] != 0)
                out.support[static_cast<int>(lo + static_cast<std::int64_t>(b))] = tuple[b];
    }
    return out;
}

// Weighted distance between two factor-product points: sum of i times the
// factor-sample distance at every differing coordinate.
inline Rational factor_product_distance(const EmbeddingSpec& spec, const RestrictedPoint& x,
                                        const RestrictedPoint& y) {
    Rational total = 0;
    std::vector<int> coords;
    for (const auto& [i, v] : x.support) coords.push_back(i);
    for (const auto& [i, v] : y.support) coords.push_back(i);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    for (int i : coords) {
        int a = detail::factor_coordinate(spec, x, i);
        int b = detail::factor_coordinate(spec, y, i);
        if (a == b) continue;
        total += i * spec.factors[static_cast<std::size_t>(i - 1)].domain.dist(
                         static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    }
    return total;
}

// Measured distance between the appended images: sum over block
// coordinates of coordinate-number times tree distance.
inline Rational appended_distance(const EmbeddingSpec& spec, const BlockPartition& blocks,
                                  const RestrictedPoint& x, const RestrictedPoint& y) {
    Rational total = 0;
    std::vector<int> coords;
    for (const auto& [i, v] : x.support) coords.push_back(i);
    for (const auto& [i, v] : y.support) coords.push_back(i);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    for (int i : coords) {
        int a = detail::factor_coordinate(spec, x, i);
        int b = detail::factor_coordinate(spec, y, i);
        const FactorEmbedding& f = spec.factors[static_cast<std::size_t>(i - 1)];
        std::int64_t lo = blocks.at(i);
        for (std::size_t t = 0; t < f.trees.size(); ++t) {
            std::int64_t d = f.trees[t].distance(f.image[static_cast<std::size_t>(a)][t],
                                                 f.image[static_cast<std::size_t>(b)][t]);
            total += Rational(lo + static_cast<std::int64_t>(t)) * d;
        }
    }
    return total;
}

// First upper estimate: each differing factor contributes at most
// (K(i+1)-1)(K(i+1)-K(i)) times its image sup-distance — the block's
// largest coordinate number times its width.
inline Rational block_weighted_bound(const EmbeddingSpec& spec, const BlockPartition& blocks,
                                     const RestrictedPoint& x, const RestrictedPoint& y) {
    Rational total = 0;
    std::vector<int> coords;
    for (const auto& [i, v] : x.support) coords.push_back(i);
    for (const auto& [i, v] : y.support) coords.push_back(i);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    for (int i : coords) {
        int a = detail::factor_coordinate(spec, x, i);
        int b = detail::factor_coordinate(spec, y, i);
        if (a == b) continue;
        const FactorEmbedding& f = spec.factors[static_cast<std::size_t>(i - 1)];
        Rational weight = Rational(blocks.at(i + 1) - 1) * (blocks.at(i + 1) - blocks.at(i));
        total += weight * f.image_distance(a, b);
    }
    return total;
}

// M = K(ceil(t)+1): every factor that can differ at product distance t
// has index at most floor(t), so its whole block sits below M.
inline std::int64_t block_horizon(const BlockPartition& blocks, const Rational& t) {
    if (t < 0) throw PreconditionError("distances are nonnegative");
    std::int64_t idx = rational_ceil_ll(t) + 1;
    if (idx > static_cast<std::int64_t>(blocks.k.size()))
        throw PreconditionError("block partition is not defined at index " +
                                std::to_string(idx) + ", needed for distance " +
                                rational_to_string(t));
    return blocks.at(static_cast<int>(idx));
}

// Second upper estimate: M^2 times the plain sum of image sup-distances,
// with M the block horizon of the pair's product distance.
inline Rational square_sum_bound(const EmbeddingSpec& spec, const BlockPartition& blocks,
                                 const RestrictedPoint& x, const RestrictedPoint& y) {
    Rational t = factor_product_distance(spec, x, y);
    Rational m(block_horizon(blocks, t));
    Rational sum = 0;
    std::vector<int> coords;
    for (const auto& [i, v] : x.support) coords.push_back(i);
    for (const auto& [i, v] : y.support) coords.push_back(i);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    for (int i : coords) {
        int a = detail::factor_coordinate(spec, x, i);
        int b = detail::factor_coordinate(spec, y, i);
        if (a == b) continue;
        sum += spec.factors[static_cast<std::size_t>(i - 1)].image_distance(a, b);
    }
    return m * m * sum;
}

// Third upper estimate, a function of the product distance alone:
// M^3 times the upper envelope at t, taken from factor M (or the last
// factor when the sample has fewer — envelopes are nondecreasing across
// factors, so the last one dominates all sampled factors).
inline Rational rho_plus_bound(const EmbeddingSpec& spec, const BlockPartition& blocks,
                               const Rational& t) {
    Rational m(block_horizon(blocks, t));
    std::size_t idx = std::min<std::size_t>(
        static_cast<std::size_t>(rational_ceil_ll(m)), spec.factors.size());
    const StepFunction& hi = spec.factors[idx - 1].env.hi;
    return m * m * m * hi.eval(t);
}

// Sample lower estimate: the least weighted lower-envelope sum over
// sampled pairs at product distance at least t. An over-estimate of the
// infinite-space infimum by construction; only ever quoted per sample.
inline Rational rho_minus_min(const EmbeddingSpec& spec,
                              const std::vector<RestrictedPoint>& sample, const Rational& t) {
    if (sample.empty()) throw PreconditionError("empty sample");
    bool found = false;
    Rational best = 0;
    for (std::size_t p = 0; p < sample.size(); ++p)
        for (std::size_t q = p + 1; q < sample.size(); ++q) {
            if (factor_product_distance(spec, sample[p], sample[q]) < t) continue;
            Rational sum = 0;
            std::vector<int> coords;
            for (const auto& [i, v] : sample[p].support) coords.push_back(i);
            for (const auto& [i, v] : sample[q].support) coords.push_back(i);
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
            for (int i : coords) {
                int a = detail::factor_coordinate(spec, sample[p], i);
                int b = detail::factor_coordinate(spec, sample[q], i);
                if (a == b) continue;
                const FactorEmbedding& f = spec.factors[static_cast<std::size_t>(i - 1)];
                sum += i * f.env.lo.eval(f.domain.dist(static_cast<std::size_t>(a),
                                                       static_cast<std::size_t>(b)));
            }
            if (!found || sum < best) {
                best = sum;
                found = true;
            }
        }
    if (!found)
        throw PreconditionError("no sampled pair at distance >= " + rational_to_string(t));
    return best;
}

// The lower estimate is only honest if the appended metric dominates the
// weighted lower-envelope sum pair by pair; checked, never assumed.
inline VerificationReport check_rho_minus_domination(const EmbeddingSpec& spec,
                                                     const BlockPartition& blocks,
                                                     const std::vector<RestrictedPoint>& sample) {
    VerificationReport rep;
    for (std::size_t p = 0; p < sample.size(); ++p)
        for (std::size_t q = p + 1; q < sample.size(); ++q) {
            Rational lhs = 0;
            std::vector<int> coords;
            for (const auto& [i, v] : sample[p].support) coords.push_back(i);
            for (const auto& [i, v] : sample[q].support) coords.push_back(i);
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
            for (int i : coords) {
                int a = detail::factor_coordinate(spec, sample[p], i);
                int b = detail::factor_coordinate(spec, sample[q], i);
                if (a == b) continue;
                const FactorEmbedding& f = spec.factors[static_cast<std::size_t>(i - 1)];
                lhs += i * f.env.lo.eval(f.domain.dist(static_cast<std::size_t>(a),
                                                       static_cast<std::size_t>(b)));
            }
            Rational rhs = appended_distance(spec, blocks, sample[p], sample[q]);
            if (lhs > rhs)
                rep.add("domination",
                        {"pair " + std::to_string(p) + "," + std::to_string(q)},
                        rational_to_string(lhs) + " > " + rational_to_string(rhs),
                        "weighted lower-envelope sum at most the appended distance");
        }
    return rep;
}

}  // namespace coarse
