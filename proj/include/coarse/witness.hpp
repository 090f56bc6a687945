#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarse/family.hpp"
#include "coarse/rational.hpp"
#include "coarse/report.hpp"
#include "coarse/util.hpp"

namespace coarse {

// One family together with the claims made about it: strict separation
// between member sets and (optionally) an upper bound on its mesh.
struct FamilyEntry {
    SubsetFamily family;
    Rational separation = 0;
    std::optional<Rational> mesh;
};

// A finite cover of a space by claimed-disjoint families. The families
// jointly must cover every point; each family individually must honor its
// separation claim and, when present, its mesh claim.
struct CoverWitness {
    std::vector<FamilyEntry> entries;

    void normalize() {
        for (auto& e : entries) e.family.normalize();
    }
    void validate(std::size_t space_size) const {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            e.family.validate(space_size);
            if (e.separation < 0) throw PreconditionError("negative separation claim");
            if (e.mesh && *e.mesh < 0) throw PreconditionError("negative mesh claim");
            if (i > 0 && e.separation < entries[i - 1].separation)
                throw PreconditionError("separation schedule must be nondecreasing");
        }
    }
};

// Witness that each space of a family {X_a} has asymptotic dimension at
// most `dimension` at scale `scale`: for every a, exactly dimension+1
// families of subsets of X_a, each strictly scale-disjoint, all meshes
// bounded by `mesh_bound`, their union covering X_a. The single-space
// case is per_space.size() == 1 with X_a the whole point set.
struct AsdimWitness {
    int dimension = 0;
    Rational scale = 0;
    Rational mesh_bound = 0;
    std::vector<std::vector<SubsetFamily>> per_space;

    CoverWitness cover_for(std::size_t a) const {
        CoverWitness w;
        for (const auto& f : per_space.at(a)) w.entries.push_back({f, scale, mesh_bound});
        return w;
    }
};

namespace detail {

template <class M>
void check_coverage(const M& m, const std::vector<const SubsetFamily*>& families,
                    VerificationReport& rep) {
    Bitset covered(m.size());
    for (const auto* f : families)
        for (const auto& s : f->sets)
            for (int p : s) covered.set(static_cast<std::size_t>(p));
    std::vector<std::string> missing;
    std::size_t missing_count = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!covered.test(i)) {
            ++missing_count;
            if (missing.size() < 8) missing.push_back(m.label(i));
        }
    if (missing_count > 0) {
        if (missing_count > missing.size())
            missing.push_back("+" + std::to_string(missing_count - missing.size()) + " more");
        rep.add("coverage", missing, std::to_string(missing_count) + " uncovered point(s)",
                "every point covered");
    }
}

}  // namespace detail

// Full check of a cover witness against its own claims: per-family strict
// separation, per-family mesh bound where claimed, and joint coverage.
template <class M>
VerificationReport verify_cover_witness(const M& m, const CoverWitness& w) {
    w.validate(m.size());
    VerificationReport rep;
    for (std::size_t i = 0; i < w.entries.size(); ++i) {
        const auto& e = w.entries[i];
        VerificationReport sep = is_r_disjoint(m, e.family, e.separation);
        for (auto& v : sep.violations) {
            v.subjects.insert(v.subjects.begin(), "family " + std::to_string(i));
            rep.violations.push_back(std::move(v));
        }
        if (e.mesh) {
            Rational mesh = family_mesh(m, e.family);
            if (mesh > *e.mesh)
                rep.add("mesh", {"family " + std::to_string(i)}, rational_to_string(mesh),
                        "<= " + rational_to_string(*e.mesh));
        }
    }
    std::vector<const SubsetFamily*> fams;
    fams.reserve(w.entries.size());
    for (const auto& e : w.entries) fams.push_back(&e.family);
    detail::check_coverage(m, fams, rep);
    return rep;
}

// Check an asdim witness against the point sets it claims to cover
// (targets[a] is X_a, sorted). Every member set must lie inside its X_a,
// honor the separation and mesh bounds, and the a-th union must be X_a.
template <class M>
VerificationReport verify_asdim_witness(const M& m, const AsdimWitness& w,
                                        const std::vector<std::vector<int>>& targets) {
    if (w.dimension < 0) throw PreconditionError("negative dimension claim");
    if (w.per_space.size() != targets.size())
        throw PreconditionError("witness covers " + std::to_string(w.per_space.size()) +
                                " spaces, " + std::to_string(targets.size()) + " expected");
    VerificationReport rep;
    for (std::size_t a = 0; a < targets.size(); ++a) {
        const auto& fams = w.per_space[a];
        std::string tag = "space " + std::to_string(a);
        if (fams.size() != static_cast<std::size_t>(w.dimension) + 1) {
            rep.add("family-count", {tag}, std::to_string(fams.size()),
                    "exactly " + std::to_string(w.dimension + 1) + " families");
            continue;
        }
        Bitset target(m.size());
        for (int p : targets[a]) target.set(static_cast<std::size_t>(p));
        Bitset covered(m.size());
        for (std::size_t i = 0; i < fams.size(); ++i) {
            fams[i].validate(m.size());
            VerificationReport sep = is_r_disjoint(m, fams[i], w.scale);
            for (auto& v : sep.violations) {
                v.subjects.insert(v.subjects.begin(), tag + " family " + std::to_string(i));
                rep.violations.push_back(std::move(v));
            }
            Rational mesh = family_mesh(m, fams[i]);
            if (mesh > w.mesh_bound)
                rep.add("mesh", {tag + " family " + std::to_string(i)},
                        rational_to_string(mesh), "<= " + rational_to_string(w.mesh_bound));
            for (const auto& s : fams[i].sets)
                for (int p : s) {
                    if (!target.test(static_cast<std::size_t>(p)))
                        rep.add("outside-target", {tag, m.label(static_cast<std::size_t>(p))},
                                "set member outside the covered space", "subset of the space");
                    covered.set(static_cast<std::size_t>(p));
                }
        }
        std::size_t missing = 0;
        std::string first_missing;
        for (int p : targets[a])
            if (!covered.test(static_cast<std::size_t>(p))) {
                if (missing == 0) first_missing = m.label(static_cast<std::size_t>(p));
                ++missing;
            }
        if (missing > 0)
            rep.add("coverage", {tag, first_missing},
                    std::to_string(missing) + " uncovered point(s)", "every point covered");
    }
    return rep;
}

// Lift a family stated in subspace indices back to the parent space:
// index i becomes point_map[i].
inline SubsetFamily map_family(const SubsetFamily& f, const std::vector<int>& point_map) {
    SubsetFamily out;
    out.sets.reserve(f.sets.size());
    for (const auto& s : f.sets) {
        std::vector<int> lifted;
        lifted.reserve(s.size());
        for (int p : s) lifted.push_back(point_map.at(static_cast<std::size_t>(p)));
        out.sets.push_back(std::move(lifted));
    }
    out.normalize();
    return out;
}

inline AsdimWitness map_witness(const AsdimWitness& w, const std::vector<int>& point_map) {
    AsdimWitness out;
    out.dimension = w.dimension;
    out.scale = w.scale;
    out.mesh_bound = w.mesh_bound;
    out.per_space.reserve(w.per_space.size());
    for (const auto& fams : w.per_space) {
        std::vector<SubsetFamily> lifted;
        lifted.reserve(fams.size());
        for (const auto& f : fams) lifted.push_back(map_family(f, point_map));
        out.per_space.push_back(std::move(lifted));
    }
    return out;
}

}  // namespace coarse
