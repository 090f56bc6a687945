// Acceptance gate: seven property bundles, each with an instance budget
// and a wall-clock target. One line per bundle; nonzero exit if any
// bundle fails a check or overruns its target.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coarse/doubling.hpp"
#include "coarse/embed.hpp"
#include "coarse/family.hpp"
#include "coarse/gen.hpp"
#include "coarse/io.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/product.hpp"
#include "coarse/rational.hpp"
#include "coarse/sfdc.hpp"
#include "coarse/tree.hpp"
#include "coarse/util.hpp"
#include "coarse/witness.hpp"

using coarse::Annulus;
using coarse::CoverWitness;
using coarse::FamilyEntry;
using coarse::MetricSpace;
using coarse::Rational;
using coarse::RestrictedPoint;
using coarse::Rng;
using coarse::RootedTree;
using coarse::SubsetFamily;

namespace {

struct Outcome {
    std::size_t instances = 0;
    std::string error;  // empty = pass; first failure otherwise

    bool ok() const { return error.empty(); }
};

// Collect per-trial errors from an index-parallel loop; report the first.
std::string first_error(const std::vector<std::string>& errs) {
    for (const auto& e : errs)
        if (!e.empty()) return e;
    return "";
}

std::string shortened(std::string s) {
    if (s.size() > 160) s = s.substr(0, 157) + "...";
    for (auto& c : s)
        if (c == '\n') c = ' ';
    return s;
}

// --------------------------------------------------------------------------
// 1. Annulus refinement: R-disjointness, per-annulus diameter bound
//    2(b-a)+2R, intra-annulus separation beyond 2R, union preservation.
// --------------------------------------------------------------------------
Outcome check_annulus_refinement() {
    const std::size_t trials = 200;
    Rng seeder(101);
    std::vector<std::uint64_t> seeds(trials);
    for (auto& s : seeds) s = seeder.next();
    std::vector<std::string> errs(trials);

    coarse::parallel_for(trials, [&](std::size_t trial) {
        Rng rng(seeds[trial]);
        const std::string tag = "instance " + std::to_string(trial) + ": ";
        std::size_t size = 2 + rng.below(299);  // up to 300 vertices
        RootedTree t = coarse::random_tree(rng.next(), size);
        MetricSpace m = t.to_space();
        int ri = 1 + static_cast<int>(rng.below(10));
        Rational r(ri);

        std::vector<Annulus> annuli;
        std::int64_t dmax = t.max_depth();
        std::int64_t lo = static_cast<std::int64_t>(rng.below(3));
        while (lo <= dmax && annuli.size() < 8) {
            std::int64_t width = 1 + static_cast<std::int64_t>(rng.below(4));
            annuli.push_back({Rational(lo), Rational(lo + width)});
            lo += width + ri + static_cast<std::int64_t>(rng.below(3));
        }
        if (annuli.empty()) annuli.push_back({Rational(0), Rational(1)});

        FamilyEntry e;
        try {
            e = coarse::refine_annuli(t, annuli, r);
        } catch (const coarse::Error& ex) {
            errs[trial] = tag + "refinement refused: " + ex.what();
            return;
        }

        coarse::VerificationReport disjoint = coarse::is_r_disjoint(m, e.family, r);
        if (!disjoint.pass()) {
            errs[trial] = tag + shortened(disjoint.summary());
            return;
        }

        // assign each class to its annulus by vertex depth
        std::vector<int> band_of(e.family.sets.size(), -1);
        for (std::size_t s = 0; s < e.family.sets.size(); ++s) {
            for (int v : e.family.sets[s]) {
                Rational d(t.depth(v));
                int band = -1;
                for (std::size_t a = 0; a < annuli.size(); ++a)
                    if (annuli[a].lo <= d && d < annuli[a].hi) band = static_cast<int>(a);
                if (band < 0) {
                    errs[trial] = tag + "class vertex outside every annulus";
                    return;
                }
                if (band_of[s] < 0) band_of[s] = band;
                if (band_of[s] != band) {
                    errs[trial] = tag + "class straddles two annuli";
                    return;
                }
            }
            const Annulus& a = annuli[static_cast<std::size_t>(band_of[s])];
            Rational bound = 2 * (a.hi - a.lo) + 2 * r;
            Rational diam = coarse::set_diameter(m, e.family.sets[s]);
            if (!(diam < bound)) {
                errs[trial] = tag + "class diameter " + coarse::rational_to_string(diam) +
                              " not below " + coarse::rational_to_string(bound);
                return;
            }
        }

        // classes sharing an annulus sit strictly farther than 2R apart
        for (std::size_t i = 0; i < e.family.sets.size(); ++i)
            for (std::size_t j = i + 1; j < e.family.sets.size(); ++j) {
                if (band_of[i] != band_of[j]) continue;
                Rational d = coarse::set_distance(m, e.family.sets[i], e.family.sets[j]);
                if (!(d > 2 * r)) {
                    errs[trial] = tag + "same-annulus classes at distance " +
                                  coarse::rational_to_string(d) + ", need > " +
                                  coarse::rational_to_string(2 * r);
                    return;
                }
            }

        // the refinement covers exactly the annulus points
        std::vector<char> expected(m.size(), 0), got(m.size(), 0);
        for (std::size_t v = 0; v < m.size(); ++v) {
            Rational d(t.depth(static_cast<int>(v)));
            for (const Annulus& a : annuli)
                if (a.lo <= d && d < a.hi) expected[v] = 1;
        }
        for (const auto& s : e.family.sets)
            for (int v : s) {
                if (got[static_cast<std::size_t>(v)]) {
                    errs[trial] = tag + "a vertex appears in two classes";
                    return;
                }
                got[static_cast<std::size_t>(v)] = 1;
            }
        if (expected != got) {
            errs[trial] = tag + "refined union differs from the annulus union";
            return;
        }
    });

    return {trials, first_error(errs)};
}

// --------------------------------------------------------------------------
// 2. Pairwise product covers: the combiner's output verifies on the lazy
//    sup-metric product, with gap positions placed as empty families.
// --------------------------------------------------------------------------
Outcome check_pair_products() {
    const std::size_t trials = 100;
    Rng seeder(202);
    std::vector<std::uint64_t> seeds(trials);
    for (auto& s : seeds) s = seeder.next();
    std::vector<std::string> errs(trials);

    coarse::parallel_for(trials, [&](std::size_t trial) {
        Rng rng(seeds[trial]);
        const std::string tag = "instance " + std::to_string(trial) + ": ";
        auto make_tree = [&](std::size_t max_size) {
            std::size_t size = 2 + rng.below(max_size - 1);
            return rng.below(2) ? coarse::path_tree(size)
                                : coarse::random_tree(rng.next(), size);
        };
        RootedTree xt = make_tree(60);
        RootedTree yt = make_tree(60);
        MetricSpace x = xt.to_space(), y = yt.to_space();

        std::size_t len = 1 + rng.below(8);
        std::vector<Rational> schedule;
        std::int64_t v = 1;
        for (std::size_t i = 0; i < len; ++i) {
            schedule.push_back(Rational(v));
            v += static_cast<std::int64_t>(rng.below(2));
        }

        coarse::WitnessProvider xp = coarse::tree_witness_provider(xt);
        coarse::WitnessProvider yp = coarse::tree_witness_provider(yt);
        CoverWitness w;
        try {
            w = coarse::combine_product_covers(x, y, schedule, xp, yp);
        } catch (const coarse::Error& ex) {
            errs[trial] = tag + "combiner refused: " + ex.what();
            return;
        }

        coarse::SupProductView view(x, y);
        coarse::VerificationReport rep = coarse::verify_cover_witness(view, w);
        if (!rep.pass()) {
            errs[trial] = tag + shortened(rep.summary());
            return;
        }
        if (w.entries.empty()) {
            errs[trial] = tag + "combiner produced no families";
            return;
        }
        if (w.entries.size() > schedule.size()) {
            errs[trial] = tag + "more families than schedule entries";
            return;
        }
        for (std::size_t i = 0; i < w.entries.size(); ++i) {
            if (w.entries[i].separation != schedule[i]) {
                errs[trial] = tag + "family " + std::to_string(i) +
                              " separation differs from the schedule";
                return;
            }
            if (w.entries[i].family.sets.empty() && !w.entries[i].mesh) {
                errs[trial] = tag + "empty family " + std::to_string(i) +
                              " carries no mesh claim";
                return;
            }
        }
    });

    return {trials, first_error(errs)};
}

// --------------------------------------------------------------------------
// 3. Restricted product covers: builder output verifies; family 0 is
//    disjoint at the schedule head, all later families at the schedule top.
// --------------------------------------------------------------------------
Outcome check_restricted_products() {
    struct Config {
        int k, m;
        std::uint64_t seed;
    };
    std::vector<Config> configs;
    Rng seeder(303);
    for (int k = 1; k <= 2; ++k)
        for (int m = 1; m <= 2; ++m)
            for (int rep = 0; rep < 5; ++rep) configs.push_back({k, m, seeder.next()});

    std::vector<std::string> errs(configs.size());
    coarse::parallel_for(configs.size(), [&](std::size_t ci) {
        const Config& cfg = configs[ci];
        Rng rng(cfg.seed);
        const std::string tag = "config " + std::to_string(ci) + " (k=" +
                                std::to_string(cfg.k) + ", m=" + std::to_string(cfg.m) +
                                "): ";
        int top = cfg.k * (1 << cfg.k);
        coarse::TreeProductSchedule sched;
        sched.k = cfg.k;
        sched.m = cfg.m;
        Rational capacity(std::min(cfg.k, cfg.m));
        for (int i = 0; i <= top; ++i)
            sched.R.push_back(capacity * (i + 1) / (top + 2));
        for (int i = 0; i < (1 << cfg.m); ++i) sched.psi.push_back(i);
        for (int i = 0; i < (1 << cfg.k); ++i) sched.phi.push_back(i);

        std::vector<RootedTree> factors;
        std::size_t total = 1;
        for (int f = 0; f < cfg.k + cfg.m; ++f) {
            factors.push_back(coarse::random_tree(rng.next(), 6 + rng.below(15)));
            total *= factors.back().size();
        }
        std::size_t count = std::min<std::size_t>(40 + rng.below(61), total);
        std::vector<RestrictedPoint> points =
            coarse::random_restricted_points(rng.next(), count, factors);

        coarse::RestrictedCoverResult res;
        try {
            res = coarse::restricted_tree_cover(factors, sched, points);
        } catch (const coarse::Error& ex) {
            errs[ci] = tag + "builder refused: " + ex.what();
            return;
        }

        coarse::VerificationReport rep = coarse::verify_cover_witness(res.space, res.witness);
        if (!rep.pass()) {
            errs[ci] = tag + shortened(rep.summary());
            return;
        }
        if (res.witness.entries.size() != static_cast<std::size_t>(1 + top)) {
            errs[ci] = tag + "expected " + std::to_string(1 + top) + " families, got " +
                       std::to_string(res.witness.entries.size());
            return;
        }
        coarse::VerificationReport head =
            coarse::is_r_disjoint(res.space, res.witness.entries[0].family, sched.R[0]);
        if (!head.pass()) {
            errs[ci] = tag + "family 0 at the schedule head: " + shortened(head.summary());
            return;
        }
        for (std::size_t j = 1; j < res.witness.entries.size(); ++j) {
            coarse::VerificationReport tail = coarse::is_r_disjoint(
                res.space, res.witness.entries[j].family, sched.R[static_cast<std::size_t>(top)]);
            if (!tail.pass()) {
                errs[ci] = tag + "family " + std::to_string(j) +
                           " at the schedule top: " + shortened(tail.summary());
                return;
            }
        }
    });

    return {configs.size(), first_error(errs)};
}

// --------------------------------------------------------------------------
// 4. Decomposition chains from both builders, plus the bounded-mesh
//    doubling consequence on every witness family used.
// --------------------------------------------------------------------------
std::string bounded_mesh_doubles(const MetricSpace& m, const SubsetFamily& f) {
    if (f.sets.empty()) return "";
    Rational d = coarse::family_mesh(m, f);
    coarse::DoublingParams params{1, d + 1};
    coarse::VerificationReport rep =
        coarse::is_uniformly_lsd(m, f, params, 1, {d + 1});
    if (!rep.pass())
        return "mesh-" + coarse::rational_to_string(d) +
               " family not 1-ball doubling at scale " + coarse::rational_to_string(d + 1) +
               ": " + shortened(rep.summary());
    return "";
}

Outcome check_decomposition_chains() {
    const std::size_t trials = 100;  // per route
    Rng seeder(404);
    std::vector<std::uint64_t> seeds(2 * trials);
    for (auto& s : seeds) s = seeder.next();
    std::vector<std::string> errs(2 * trials);

    coarse::parallel_for(2 * trials, [&](std::size_t i) {
        Rng rng(seeds[i]);
        bool layered_route = i >= trials;
        const std::string tag = std::string(layered_route ? "layered" : "dimension") +
                                " instance " + std::to_string(i % trials) + ": ";
        std::size_t size = 8 + rng.below(33);
        int ri = 1 + static_cast<int>(rng.below(4));
        Rational r(ri);
        RootedTree t = coarse::random_tree(rng.next(), size);
        MetricSpace m = t.to_space();
        CoverWitness cw = coarse::tree_asdim1_witness(t, r);

        coarse::DecompositionChain chain;
        try {
            if (layered_route) {
                chain = coarse::hpc_to_sfdc_chain(m, cw, {});
            } else {
                coarse::AsdimWitness aw;
                aw.dimension = 1;
                aw.scale = r;
                aw.mesh_bound = 0;
                for (const auto& e : cw.entries)
                    if (e.mesh) aw.mesh_bound = std::max(aw.mesh_bound, *e.mesh);
                aw.per_space = {{cw.entries[0].family, cw.entries[1].family}};
                SubsetFamily whole;
                whole.sets.push_back({});
                for (std::size_t p = 0; p < m.size(); ++p)
                    whole.sets[0].push_back(static_cast<int>(p));
                chain = coarse::asdim_to_sfdc_chain(m, whole, aw, {r, r});
                if (chain.terminal_mesh > aw.mesh_bound) {
                    errs[i] = tag + "terminal mesh exceeds the witness bound";
                    return;
                }
            }
        } catch (const coarse::Error& ex) {
            errs[i] = tag + "builder refused: " + ex.what();
            return;
        }

        coarse::VerificationReport rep = coarse::verify_sfdc_chain(m, chain);
        if (!rep.pass()) {
            errs[i] = tag + shortened(rep.summary());
            return;
        }

        for (const auto& e : cw.entries) {
            std::string msg = bounded_mesh_doubles(m, e.family);
            if (!msg.empty()) {
                errs[i] = tag + msg;
                return;
            }
        }
    });

    return {2 * trials, first_error(errs)};
}

// --------------------------------------------------------------------------
// 5. Ball-cover decisions vs a mask-based exhaustive oracle on every
//    2r-window of every point, across the full realized scale grid.
// --------------------------------------------------------------------------
bool oracle_coverable(const MetricSpace& m, const std::vector<int>& target, int n,
                      const Rational& r) {
    if (target.empty()) return true;
    const std::size_t bits = target.size();
    std::uint32_t full = bits >= 32 ? 0xffffffffu
                                    : ((std::uint32_t{1} << bits) - 1);
    std::vector<std::uint32_t> masks;
    for (std::size_t c = 0; c < m.size(); ++c) {
        std::uint32_t mask = 0;
        for (std::size_t ti = 0; ti < bits; ++ti)
            if (m.dist(c, static_cast<std::size_t>(target[ti])) < r)
                mask |= std::uint32_t{1} << ti;
        if (mask) masks.push_back(mask);
    }
    auto search = [&](auto&& self, std::size_t start, int left,
                      std::uint32_t acc) -> bool {
        if (acc == full) return true;
        if (left == 0) return false;
        for (std::size_t c = start; c < masks.size(); ++c)
            if (self(self, c + 1, left - 1, acc | masks[c])) return true;
        return false;
    };
    return search(search, 0, n, 0);
}

Outcome check_ball_cover_oracle() {
    std::vector<MetricSpace> spaces;
    Rng seeder(505);
    for (int i = 0; i < 9; ++i)
        spaces.push_back(coarse::random_tree(seeder.next(), 5 + seeder.below(21)).to_space());
    spaces.push_back(coarse::path_tree(25).to_space());
    spaces.push_back(coarse::path_tree(2).to_space());

    std::vector<std::string> errs(spaces.size());
    std::vector<std::size_t> counts(spaces.size(), 0);
    coarse::parallel_for(spaces.size(), [&](std::size_t si) {
        const MetricSpace& m = spaces[si];
        const std::string tag = "space " + std::to_string(si) + ": ";
        Rational least = 0;
        for (std::size_t i = 0; i < m.size() && errs[si].empty(); ++i)
            for (std::size_t j = i + 1; j < m.size(); ++j) {
                Rational d = m.dist(i, j);
                if (least == 0 || d < least) least = d;
            }
        if (least == 0) least = 1;
        std::vector<Rational> grid = coarse::exhaustive_grid(m, least / 2);

        for (const Rational& r : grid) {
            for (std::size_t x = 0; x < m.size(); ++x) {
                std::vector<int> target;
                Rational window = 2 * r;
                for (std::size_t p = 0; p < m.size(); ++p)
                    if (m.dist(x, p) < window) target.push_back(static_cast<int>(p));
                for (int n = 1; n <= 3; ++n) {
                    bool decided = coarse::ball_cover_decision(m, target, n, r);
                    bool brute = oracle_coverable(m, target, n, r);
                    ++counts[si];
                    if (decided != brute) {
                        errs[si] = tag + "disagreement at x=" + m.label(x) +
                                   ", r=" + coarse::rational_to_string(r) +
                                   ", n=" + std::to_string(n) + ": search says " +
                                   (decided ? "coverable" : "not coverable");
                        return;
                    }
                }
            }
        }
    });

    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    return {total, first_error(errs)};
}

// --------------------------------------------------------------------------
// 6. Embedding bounds: envelope sandwich, pullback verify/refuse, and the
//    three-stage distance estimate chain on appended embeddings.
// --------------------------------------------------------------------------
coarse::FactorEmbedding identity_factor(const RootedTree& t, std::size_t width) {
    coarse::FactorEmbedding f;
    f.domain = t.to_space();
    for (std::size_t b = 0; b < width; ++b) f.trees.push_back(t);
    for (std::size_t v = 0; v < t.size(); ++v)
        f.image.push_back(std::vector<int>(width, static_cast<int>(v)));
    std::vector<int> iota(t.size());
    for (std::size_t v = 0; v < t.size(); ++v) iota[v] = static_cast<int>(v);
    f.env = coarse::empirical_envelope(f.domain, f.domain, iota);
    return f;
}

MetricSpace scaled_path(std::size_t points, int step) {
    std::vector<std::string> labels;
    std::vector<coarse::WeightedEdge> edges;
    for (std::size_t i = 0; i < points; ++i) labels.push_back("y" + std::to_string(i));
    for (std::size_t i = 0; i + 1 < points; ++i)
        edges.push_back({labels[i], labels[i + 1], Rational(step)});
    return MetricSpace::from_graph(labels, edges);
}

Outcome check_embedding_bounds() {
    std::size_t instances = 0;

    // envelope sandwich on random maps
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        MetricSpace x =
            coarse::random_tree(rng.next(), 3 + rng.below(10)).to_space();
        MetricSpace y =
            coarse::random_tree(rng.next(), 3 + rng.below(10)).to_space();
        std::vector<int> image;
        for (std::size_t p = 0; p < x.size(); ++p)
            image.push_back(static_cast<int>(rng.below(y.size())));
        coarse::DistortionEnvelope env = coarse::empirical_envelope(x, y, image);
        ++instances;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = i + 1; j < x.size(); ++j) {
                Rational t = x.dist(i, j);
                Rational d = y.dist(static_cast<std::size_t>(image[i]),
                                    static_cast<std::size_t>(image[j]));
                if (env.lo.eval(t) > d || d > env.hi.eval(t))
                    return {instances,
                            "sandwich broken on map trial " + std::to_string(trial)};
            }
    }

    // pullback: verified transports and explicit refusals
    for (std::size_t size : {8u, 10u, 12u}) {
        MetricSpace x = scaled_path(size, 1);
        MetricSpace y = scaled_path(size, 2);
        std::vector<int> image(size);
        for (std::size_t i = 0; i < size; ++i) image[i] = static_cast<int>(i);
        coarse::DistortionEnvelope env = coarse::empirical_envelope(x, y, image);
        CoverWitness wy;
        FamilyEntry a, b;
        for (std::size_t pair = 0; 2 * pair + 1 < size; ++pair) {
            std::vector<int> s = {static_cast<int>(2 * pair), static_cast<int>(2 * pair + 1)};
            (pair % 2 == 0 ? a : b).family.sets.push_back(s);
        }
        a.separation = b.separation = Rational(4);
        a.mesh = b.mesh = Rational(2);
        wy.entries = {a, b};
        ++instances;
        try {
            CoverWitness wx = coarse::pullback_witness(x, y, image, env, wy,
                                                       {Rational(2), Rational(2)});
            coarse::VerificationReport rep = coarse::verify_cover_witness(x, wx);
            if (!rep.pass())
                return {instances, "pullback output fails verification at size " +
                                       std::to_string(size)};
        } catch (const coarse::Error& ex) {
            return {instances,
                    std::string("pullback refused a valid transport: ") + ex.what()};
        }
        bool refused = false;
        try {
            coarse::pullback_witness(x, y, image, env, wy, {Rational(3), Rational(3)});
        } catch (const coarse::PreconditionError&) {
            refused = true;
        }
        if (!refused)
            return {instances, "pullback accepted an unreachable separation target"};
        CoverWitness loose = wy;
        loose.entries[0].mesh = Rational(2 * (static_cast<int>(size) - 1));
        refused = false;
        try {
            coarse::pullback_witness(x, y, image, env, loose, {Rational(2), Rational(2)});
        } catch (const coarse::PreconditionError&) {
            refused = true;
        }
        if (!refused)
            return {instances, "pullback accepted an unboundable mesh"};
    }

    // three-stage upper estimates on appended embeddings
    Rng chain_rng(616);
    for (int trial = 0; trial < 50; ++trial) {
        coarse::EmbeddingSpec spec;
        coarse::BlockPartition blocks;
        blocks.k = {1};
        std::vector<RootedTree> trees;
        std::size_t factor_count = 2 + chain_rng.below(3);
        for (std::size_t f = 0; f < factor_count; ++f) {
            trees.push_back(coarse::random_tree(chain_rng.next(), 3 + chain_rng.below(6)));
        }
        for (const RootedTree& t : trees) {
            std::size_t width = 1 + chain_rng.below(2);
            spec.factors.push_back(identity_factor(t, width));
            blocks.k.push_back(blocks.k.back() + static_cast<std::int64_t>(width));
        }
        spec.finalize();
        spec.check_blocks(blocks);

        std::vector<RestrictedPoint> sample;
        for (int i = 0; i < 8; ++i) {
            RestrictedPoint p;
            for (std::size_t f = 1; f <= spec.factors.size(); ++f) {
                int v = static_cast<int>(
                    chain_rng.below(spec.factors[f - 1].domain.size()));
                if (v) p.support[static_cast<int>(f)] = v;
            }
            sample.push_back(p);
        }
        Rational t_max = 0;
        for (std::size_t i = 0; i < sample.size(); ++i)
            for (std::size_t j = i + 1; j < sample.size(); ++j)
                t_max = std::max(
                    t_max, coarse::factor_product_distance(spec, sample[i], sample[j]));
        while (static_cast<std::int64_t>(blocks.k.size()) <
               coarse::rational_ceil_ll(t_max) + 1)
            blocks.k.push_back(blocks.k.back() + 1);

        ++instances;
        for (std::size_t i = 0; i < sample.size(); ++i)
            for (std::size_t j = i + 1; j < sample.size(); ++j) {
                Rational t = coarse::factor_product_distance(spec, sample[i], sample[j]);
                Rational measured =
                    coarse::appended_distance(spec, blocks, sample[i], sample[j]);
                Rational g1 =
                    coarse::block_weighted_bound(spec, blocks, sample[i], sample[j]);
                Rational g2 = coarse::square_sum_bound(spec, blocks, sample[i], sample[j]);
                Rational g3 = coarse::rho_plus_bound(spec, blocks, t);
                if (!(measured <= g1 && g1 <= g2 && g2 <= g3))
                    return {instances,
                            "estimate chain broken on appended trial " + std::to_string(trial)};
            }
        coarse::VerificationReport dom =
            coarse::check_rho_minus_domination(spec, blocks, sample);
        if (!dom.pass())
            return {instances, "lower-estimate domination failed on trial " +
                                   std::to_string(trial)};
    }

    return {instances, ""};
}

// --------------------------------------------------------------------------
// 7. Every builder, run twice with the same inputs, emits identical bytes.
// --------------------------------------------------------------------------
std::vector<std::string> build_everything_once() {
    std::vector<std::string> dumps;

    RootedTree t = coarse::random_tree(42, 18);
    dumps.push_back(coarse::tree_to_json(t).dump());
    MetricSpace m = t.to_space();

    std::vector<Annulus> annuli = {{Rational(0), Rational(2)}, {Rational(4), Rational(6)}};
    dumps.push_back(
        coarse::family_file(m, coarse::refine_annuli(t, annuli, Rational(1))).dump());

    CoverWitness cw = coarse::tree_asdim1_witness(t, Rational(2));
    dumps.push_back(coarse::cover_witness_file(m, cw).dump());

    RootedTree xt = coarse::path_tree(6);
    RootedTree yt = coarse::random_tree(7, 7);
    MetricSpace x = xt.to_space(), y = yt.to_space();
    coarse::WitnessProvider xp = coarse::tree_witness_provider(xt);
    coarse::WitnessProvider yp = coarse::tree_witness_provider(yt);
    CoverWitness combined = coarse::combine_product_covers(
        x, y, {Rational(1), Rational(1), Rational(2)}, xp, yp);
    MetricSpace prod = coarse::sup_product({x, y});
    dumps.push_back(coarse::cover_witness_file(prod, combined).dump());

    std::vector<RootedTree> factors = {coarse::random_tree(3, 8), coarse::random_tree(4, 9)};
    coarse::TreeProductSchedule sched;
    sched.k = sched.m = 1;
    sched.R = {Rational(1) / 4, Rational(1) / 2, Rational(3) / 4};
    sched.psi = {0, 1};
    sched.phi = {0, 1};
    std::vector<RestrictedPoint> pts = coarse::random_restricted_points(11, 20, factors);
    dumps.push_back(coarse::points_to_json(pts, factors).dump());
    coarse::RestrictedCoverResult res = coarse::restricted_tree_cover(factors, sched, pts);
    dumps.push_back(coarse::cover_witness_file(res.space, res.witness).dump());

    coarse::AsdimWitness aw;
    aw.dimension = 1;
    aw.scale = Rational(2);
    aw.mesh_bound = 0;
    for (const auto& e : cw.entries)
        if (e.mesh) aw.mesh_bound = std::max(aw.mesh_bound, *e.mesh);
    aw.per_space = {{cw.entries[0].family, cw.entries[1].family}};
    SubsetFamily whole;
    whole.sets.push_back({});
    for (std::size_t p = 0; p < m.size(); ++p) whole.sets[0].push_back(static_cast<int>(p));
    dumps.push_back(
        coarse::chain_file(m, coarse::asdim_to_sfdc_chain(m, whole, aw,
                                                          {Rational(2), Rational(2)}))
            .dump());
    dumps.push_back(coarse::chain_file(m, coarse::hpc_to_sfdc_chain(m, cw, {})).dump());

    MetricSpace px = scaled_path(10, 1);
    MetricSpace py = scaled_path(10, 2);
    std::vector<int> image(10);
    for (std::size_t i = 0; i < 10; ++i) image[i] = static_cast<int>(i);
    coarse::DistortionEnvelope env = coarse::empirical_envelope(px, py, image);
    dumps.push_back(coarse::envelope_to_json(env).dump());
    CoverWitness wy;
    FamilyEntry a, b;
    a.family.sets = {{0, 1}, {4, 5}, {8, 9}};
    b.family.sets = {{2, 3}, {6, 7}};
    a.separation = b.separation = Rational(4);
    a.mesh = b.mesh = Rational(2);
    wy.entries = {a, b};
    dumps.push_back(
        coarse::witness_to_json(coarse::pullback_witness(px, py, image, env, wy,
                                                         {Rational(2), Rational(2)}),
                                px)
            .dump());

    return dumps;
}

Outcome check_determinism() {
    std::vector<std::string> first = build_everything_once();
    std::vector<std::string> second = build_everything_once();
    if (first.size() != second.size())
        return {first.size(), "builder reruns produced different artifact counts"};
    for (std::size_t i = 0; i < first.size(); ++i)
        if (first[i] != second[i])
            return {first.size(),
                    "artifact " + std::to_string(i) + " differs between identical runs"};
    return {first.size(), ""};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*run)();
        double target_seconds;
    };
    const Criterion criteria[] = {
        {"annulus refinement properties", check_annulus_refinement, 10.0},
        {"pairwise product covers", check_pair_products, 30.0},
        {"restricted product covers", check_restricted_products, 120.0},
        {"decomposition chains", check_decomposition_chains, 30.0},
        {"ball-cover decisions vs oracle", check_ball_cover_oracle, 60.0},
        {"embedding bounds", check_embedding_bounds, 30.0},
        {"builder determinism", check_determinism, 60.0},
    };

    bool all_ok = true;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        auto begin = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& ex) {
            outcome.error = std::string("unexpected exception: ") + ex.what();
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        bool in_time = seconds <= c.target_seconds;
        bool ok = outcome.ok() && in_time;
        all_ok = all_ok && ok;
        if (ok) {
            std::printf("[pass] %d %s - %zu instances in %.1fs (target %.0fs)\n", index,
                        c.name, outcome.instances, seconds, c.target_seconds);
        } else if (!outcome.ok()) {
            std::printf("[FAIL] %d %s - %s (%.1fs)\n", index, c.name,
                        outcome.error.c_str(), seconds);
        } else {
            std::printf("[FAIL] %d %s - overran the %.0fs target: %.1fs\n", index, c.name,
                        c.target_seconds, seconds);
        }
    }
    return all_ok ? 0 : 1;
}
