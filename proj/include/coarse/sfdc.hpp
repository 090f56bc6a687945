#pragma once

// Decomposition chains: a root family, a sequence of scaled decomposition
// steps, and a terminal mesh claim. Each step splits every set of the
// previous family into two R-disjoint subfamilies drawn from the step's
// target family. Builders derive chains from dimension witnesses (carving
// each space with one witness family per step) and from layered cover
// witnesses (peeling one layer per step, then delegating the leftover
// pieces to a dimension witness).

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"
#include "coarse/family.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/rational.hpp"
#include "coarse/report.hpp"
#include "coarse/util.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// How one set of the previous family splits: two disjoint subfamilies,
// each given by indices into the step's target family.
struct SetDecomposition {
    std::vector<int> part1;
    std::vector<int> part2;
};

struct ChainStep {
    Rational r = 0;
    SubsetFamily target;
    std::vector<SetDecomposition> per_set;  // aligned with the previous family's sets
};

struct DecompositionChain {
    SubsetFamily root;
    std::vector<ChainStep> steps;
    Rational terminal_mesh = 0;

    const SubsetFamily& terminal() const {
        return steps.empty() ? root : steps.back().target;
    }
};

// One decomposition instance: u1 and u2 must each be r-disjoint, all
// their members must literally belong to the target family, and their
// union must equal x — no uncovered point, no overshoot.
inline VerificationReport check_decomposition_step(const MetricSpace& m,
                                                   const std::vector<int>& x, const Rational& r,
                                                   const SubsetFamily& u1, const SubsetFamily& u2,
                                                   const SubsetFamily& target) {
    VerificationReport rep;
    auto half = [&](const SubsetFamily& u, const char* name) {
        VerificationReport d = is_r_disjoint(m, u, r);
        for (auto& v : d.violations) {
            v.subjects.insert(v.subjects.begin(), name);
            rep.violations.push_back(std::move(v));
        }
        for (const auto& s : u.sets)
            if (std::find(target.sets.begin(), target.sets.end(), s) == target.sets.end())
                rep.add("membership", {name, detail::set_name(s)},
                        "set absent from the target family", "every member drawn from the target");
    };
    half(u1, "first subfamily");
    half(u2, "second subfamily");

    std::vector<int> covered;
    for (const auto& s : u1.sets) covered.insert(covered.end(), s.begin(), s.end());
    for (const auto& s : u2.sets) covered.insert(covered.end(), s.begin(), s.end());
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());

    std::vector<int> missing, excess;
    std::set_difference(x.begin(), x.end(), covered.begin(), covered.end(),
                        std::back_inserter(missing));
    std::set_difference(covered.begin(), covered.end(), x.begin(), x.end(),
                        std::back_inserter(excess));
    if (!missing.empty())
        rep.add("coverage", {detail::set_name(missing)}, "points left uncovered",
                "the two subfamilies union to the decomposed set");
    if (!excess.empty())
        rep.add("overshoot", {detail::set_name(excess)}, "points outside the decomposed set",
                "the two subfamilies union to the decomposed set");
    return rep;
}

// Walk the chain: every step's witness must decompose every set of the
// previous family at that step's scale, scales must be nondecreasing, and
// the final family's measured mesh must not exceed the claim.
inline VerificationReport verify_sfdc_chain(const MetricSpace& m,
                                            const DecompositionChain& chain) {
    chain.root.validate(m.size());
    for (const auto& st : chain.steps) st.target.validate(m.size());

    VerificationReport rep;
    const SubsetFamily* prev = &chain.root;
    for (std::size_t i = 0; i < chain.steps.size(); ++i) {
        const ChainStep& st = chain.steps[i];
        std::string step_tag = "step " + std::to_string(i);
        if (i > 0 && st.r < chain.steps[i - 1].r)
            rep.add("schedule", {step_tag}, rational_to_string(st.r) + " after " +
                        rational_to_string(chain.steps[i - 1].r),
                    "nondecreasing scales");
        if (st.per_set.size() != prev->sets.size())
            throw PreconditionError(step_tag + " carries " + std::to_string(st.per_set.size()) +
                                    " decompositions for " + std::to_string(prev->sets.size()) +
                                    " sets");
        for (std::size_t j = 0; j < st.per_set.size(); ++j) {
            auto pick = [&](const std::vector<int>& idx) {
                SubsetFamily f;
                for (int t : idx) {
                    if (t < 0 || static_cast<std::size_t>(t) >= st.target.sets.size())
                        throw PreconditionError(step_tag + " references target set " +
                                                std::to_string(t) + " of " +
                                                std::to_string(st.target.sets.size()));
                    f.sets.push_back(st.target.sets[static_cast<std::size_t>(t)]);
                }
                return f;
            };
            VerificationReport d =
                check_decomposition_step(m, prev->sets[j], st.r, pick(st.per_set[j].part1),
                                         pick(st.per_set[j].part2), st.target);
            for (auto& v : d.violations) {
                v.subjects.insert(v.subjects.begin(), "set " + std::to_string(j));
                v.subjects.insert(v.subjects.begin(), step_tag);
                rep.violations.push_back(std::move(v));
            }
        }
        prev = &st.target;
    }

    Rational mesh = family_mesh(m, chain.terminal());
    if (mesh > chain.terminal_mesh)
        rep.add("terminal-mesh", {}, rational_to_string(mesh),
                "mesh at most " + rational_to_string(chain.terminal_mesh));
    return rep;
}

namespace detail {

// Shared carving engine: one space per root set, one family per step.
// Step k re-lists everything carved so far (as singleton subfamilies),
// carves the running remainder of each space with that space's step-k
// family, and keeps the new remainder as the second subfamily. Used with
// a dimension witness (all families at one scale) and with a layered
// cover witness (one family per scale).
struct CarvePlan {
    std::vector<Rational> schedule;
    // families[k][a] = family to carve space a with at step k
    std::vector<std::vector<const SubsetFamily*>> families;
};

inline DecompositionChain carve_chain(const SubsetFamily& roots, const CarvePlan& plan,
                                      const Rational& terminal_mesh) {
    const std::size_t spaces = roots.sets.size();
    DecompositionChain chain;
    chain.root = roots;
    chain.terminal_mesh = terminal_mesh;

    struct Origin {
        std::size_t alpha = 0;
        int carved_index = -1;  // -1 for the running remainder
    };
    std::vector<std::vector<std::vector<int>>> carved(spaces);
    std::vector<std::vector<int>> rem(spaces);
    std::vector<Origin> prev_origin;
    for (std::size_t a = 0; a < spaces; ++a) {
        rem[a] = roots.sets[a];
        prev_origin.push_back({a, -1});
    }

    for (std::size_t k = 0; k < plan.schedule.size(); ++k) {
        ChainStep st;
        st.r = plan.schedule[k];

        std::vector<std::vector<int>> new_carvings_of(spaces);
        std::vector<int> rem_pos(spaces, -1);
        std::vector<std::vector<int>> carved_pos(spaces);

        for (std::size_t a = 0; a < spaces; ++a) {
            // carryovers first, in carve order
            for (const auto& s : carved[a]) {
                carved_pos[a].push_back(static_cast<int>(st.target.sets.size()));
                st.target.sets.push_back(s);
            }
            // then this step's carvings from the remainder
            for (const auto& u : plan.families[k][a]->sets) {
                std::vector<int> piece;
                std::set_intersection(rem[a].begin(), rem[a].end(), u.begin(), u.end(),
                                      std::back_inserter(piece));
                if (piece.empty()) continue;
                new_carvings_of[a].push_back(static_cast<int>(st.target.sets.size()));
                std::vector<int> rest;
                std::set_difference(rem[a].begin(), rem[a].end(), piece.begin(), piece.end(),
                                    std::back_inserter(rest));
                rem[a] = std::move(rest);
                carved[a].push_back(piece);
                st.target.sets.push_back(std::move(piece));
            }
        }
        for (std::size_t a = 0; a < spaces; ++a)
            if (!rem[a].empty()) {
                rem_pos[a] = static_cast<int>(st.target.sets.size());
                st.target.sets.push_back(rem[a]);
            }

        std::vector<Origin> next_origin(st.target.sets.size());
        for (std::size_t a = 0; a < spaces; ++a) {
            for (std::size_t c = 0; c < carved_pos[a].size(); ++c)
                next_origin[static_cast<std::size_t>(carved_pos[a][c])] = {a,
                                                                           static_cast<int>(c)};
            // new carvings continue this space's carved list after its carryovers
            std::size_t base = carved_pos[a].size();
            for (std::size_t c = 0; c < new_carvings_of[a].size(); ++c)
                next_origin[static_cast<std::size_t>(new_carvings_of[a][c])] = {
                    a, static_cast<int>(base + c)};
            if (rem_pos[a] >= 0) next_origin[static_cast<std::size_t>(rem_pos[a])] = {a, -1};
        }

        for (const Origin& o : prev_origin) {
            SetDecomposition d;
            if (o.carved_index >= 0) {
                // already carved: travels as a singleton subfamily
                d.part1.push_back(carved_pos[o.alpha][static_cast<std::size_t>(o.carved_index)]);
            } else {
                d.part1 = new_carvings_of[o.alpha];
                if (rem_pos[o.alpha] >= 0) d.part2.push_back(rem_pos[o.alpha]);
            }
            st.per_set.push_back(std::move(d));
        }

        prev_origin = std::move(next_origin);
        chain.steps.push_back(std::move(st));
    }

    for (std::size_t a = 0; a < spaces; ++a)
        if (!rem[a].empty())
            throw Error("carving left an uncovered remainder; the witness does not cover");
    return chain;
}

}  // namespace detail

// Chain a family of spaces through a shared dimension witness: step k
// carves each space's remainder with that space's k-th witness family.
// The witness is verified first; the scales must fit under its claimed
// separation, one per witness family.
inline DecompositionChain asdim_to_sfdc_chain(const MetricSpace& m, const SubsetFamily& pieces,
                                              const AsdimWitness& w,
                                              const std::vector<Rational>& schedule) {
    pieces.validate(m.size());
    if (pieces.sets.empty()) throw PreconditionError("no spaces to decompose");
    if (schedule.size() != static_cast<std::size_t>(w.dimension) + 1)
        throw PreconditionError("schedule needs one scale per witness family: " +
                                std::to_string(w.dimension + 1) + " expected, " +
                                std::to_string(schedule.size()) + " given");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0)) throw PreconditionError("scales must be positive");
        if (i > 0 && schedule[i] < schedule[i - 1])
            throw PreconditionError("scales must be nondecreasing");
    }
    if (schedule.back() > w.scale)
        throw PreconditionError("top scale " + rational_to_string(schedule.back()) +
                                " exceeds the witness separation " + rational_to_string(w.scale));
    VerificationReport wr = verify_asdim_witness(m, w, pieces.sets);
    if (!wr.pass())
        throw PreconditionError("dimension witness fails verification: " + wr.summary());

    detail::CarvePlan plan;
    plan.schedule = schedule;
    plan.families.resize(schedule.size());
    for (std::size_t k = 0; k < schedule.size(); ++k)
        for (std::size_t a = 0; a < pieces.sets.size(); ++a)
            plan.families[k].push_back(&w.per_space[a][k]);
    return detail::carve_chain(pieces, plan, w.mesh_bound);
}

// Supplies a dimension witness for the leftover pieces after peeling; the
// step from doubling control to finite dimension is an input, not derived.
using AsdimProvider = std::function<AsdimWitness(const SubsetFamily& pieces)>;

// Chain a space through a layered cover witness: step i peels the i-th
// layer out of the running remainder at that layer's separation. The
// leftover pieces (each inside some layer set) then continue through
// asdim_to_sfdc_chain, using the provided dimension witness — or, absent
// a provider, the degenerate one that keeps each piece whole, which is
// honest only because a finite sample is always bounded; a mesh budget
// makes that fallback refuse instead.
inline DecompositionChain hpc_to_sfdc_chain(
    const MetricSpace& m, const CoverWitness& w, std::vector<Rational> suffix_schedule,
    const AsdimProvider& provider = nullptr,
    const std::optional<Rational>& terminal_mesh_budget = std::nullopt) {
    if (w.entries.empty()) throw PreconditionError("cover witness has no families");
    VerificationReport wr = verify_cover_witness(m, w);
    if (!wr.pass())
        throw PreconditionError("cover witness fails verification: " + wr.summary());

    // prefix: peel one layer per step over the whole space
    SubsetFamily whole;
    whole.sets.push_back({});
    for (std::size_t i = 0; i < m.size(); ++i) whole.sets[0].push_back(static_cast<int>(i));
    detail::CarvePlan plan;
    for (const auto& e : w.entries) {
        plan.schedule.push_back(e.separation);
        plan.families.push_back({&e.family});
    }
    Rational prefix_mesh = 0;
    for (const auto& e : w.entries) prefix_mesh = std::max(prefix_mesh, family_mesh(m, e.family));
    DecompositionChain prefix = detail::carve_chain(whole, plan, prefix_mesh);

    const SubsetFamily& pieces = prefix.terminal();

    AsdimWitness tail;
    if (provider) {
        tail = provider(pieces);
    } else {
        // degenerate witness: each piece is its own single bounded family
        Rational bound = 0;
        for (const auto& s : pieces.sets) bound = std::max(bound, set_diameter(m, s));
        if (terminal_mesh_budget && bound > *terminal_mesh_budget)
            throw ExternalInputError(
                "external input required: leftover pieces reach diameter " +
                rational_to_string(bound) + ", past the budget " +
                rational_to_string(*terminal_mesh_budget) +
                "; supply a dimension witness for them");
        if (suffix_schedule.empty()) suffix_schedule.push_back(w.entries.back().separation);
        tail.dimension = 0;
        tail.scale = suffix_schedule.back();
        tail.mesh_bound = bound;
        for (const auto& s : pieces.sets) {
            SubsetFamily f;
            f.sets.push_back(s);
            tail.per_space.push_back({f});
        }
    }
    if (suffix_schedule.empty())
        throw PreconditionError("a provided dimension witness needs an explicit scale schedule");
    if (suffix_schedule.front() < w.entries.back().separation)
        throw PreconditionError("suffix scales must continue the witness schedule: " +
                                rational_to_string(suffix_schedule.front()) + " after " +
                                rational_to_string(w.entries.back().separation));

    DecompositionChain suffix = asdim_to_sfdc_chain(m, pieces, tail, suffix_schedule);

    DecompositionChain out;
    out.root = prefix.root;
    out.steps = std::move(prefix.steps);
    for (auto& st : suffix.steps) out.steps.push_back(std::move(st));
    out.terminal_mesh = suffix.terminal_mesh;
    return out;
}

}  // namespace coarse
