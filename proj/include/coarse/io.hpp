#pragma once

// JSON ingestion and export. Exactness is preserved end to end: rationals
// travel as integers or "p/q" strings, never as floats (floats are
// rejected on input). Point sets are written as label arrays, so files
// stay readable and independent of internal index order.

#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "coarse/embed.hpp"
#include "coarse/errors.hpp"
#include "coarse/family.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/product.hpp"
#include "coarse/rational.hpp"
#include "coarse/report.hpp"
#include "coarse/sfdc.hpp"
#include "coarse/tree.hpp"
#include "coarse/witness.hpp"

namespace coarse {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Scalars.
// ---------------------------------------------------------------------------

inline Rational rational_from_json(const Json& j, const std::string& what) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return rational_from_string(j.get<std::string>());
        } catch (const Error& e) {
            throw ParseError(what + ": " + e.what());
        }
    }
    if (j.is_number_float())
        throw ParseError(what + ": floats are not exact; write an integer or a \"p/q\" string");
    throw ParseError(what + ": expected an integer or a \"p/q\" string");
}

inline Json rational_to_json(const Rational& r) {
    if (rational_is_integer(r)) {
        BigInt n = numerator(r);
        if (n >= std::numeric_limits<std::int64_t>::min() &&
            n <= std::numeric_limits<std::int64_t>::max())
            return Json(static_cast<std::int64_t>(n));
    }
    return Json(rational_to_string(r));
}

namespace detail {

inline const Json& field(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + " must be a JSON object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + " is missing \"" + key + "\"");
    return *it;
}

inline std::string string_field(const Json& j, const std::string& key,
                                const std::string& where) {
    const Json& v = field(j, key, where);
    if (!v.is_string()) throw ParseError(where + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

inline int int_field(const Json& j, const std::string& key, const std::string& where) {
    const Json& v = field(j, key, where);
    if (!v.is_number_integer()) throw ParseError(where + ": \"" + key + "\" must be an integer");
    return v.get<int>();
}

inline int label_index(const MetricSpace& m, const Json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": point labels must be strings");
    std::string l = j.get<std::string>();
    if (!m.has_label(l)) throw ParseError(where + ": unknown point label \"" + l + "\"");
    return m.index_of(l);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Files.
// ---------------------------------------------------------------------------

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw Error("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Spaces and trees.
// ---------------------------------------------------------------------------

inline MetricSpace space_from_json(const Json& j) {
    const Json& jl = detail::field(j, "labels", "space");
    if (!jl.is_array() || jl.empty()) throw ParseError("space: \"labels\" must be a nonempty array");
    std::vector<std::string> labels;
    for (const Json& l : jl) {
        if (!l.is_string()) throw ParseError("space: labels must be strings");
        labels.push_back(l.get<std::string>());
    }
    if (j.contains("edges")) {
        std::vector<WeightedEdge> edges;
        const Json& je = j.at("edges");
        if (!je.is_array()) throw ParseError("space: \"edges\" must be an array");
        for (const Json& e : je) {
            if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_string() ||
                !e[1].is_string())
                throw ParseError("space: each edge is [u, v] or [u, v, w]");
            Rational w = e.size() == 3 ? rational_from_json(e[2], "edge weight") : Rational(1);
            edges.push_back({e[0].get<std::string>(), e[1].get<std::string>(), w});
        }
        try {
            return MetricSpace::from_graph(std::move(labels), edges);
        } catch (const Error& e) {
            throw ParseError(std::string("space: ") + e.what());
        }
    }
    if (j.contains("dist")) {
        const Json& jd = j.at("dist");
        if (!jd.is_array()) throw ParseError("space: \"dist\" must be a matrix");
        std::vector<std::vector<Rational>> matrix;
        for (const Json& row : jd) {
            if (!row.is_array()) throw ParseError("space: \"dist\" must be a matrix");
            std::vector<Rational> r;
            for (const Json& v : row) r.push_back(rational_from_json(v, "distance"));
            matrix.push_back(std::move(r));
        }
        try {
            return MetricSpace::from_matrix(std::move(labels), matrix);
        } catch (const Error& e) {
            throw ParseError(std::string("space: ") + e.what());
        }
    }
    throw ParseError("space needs \"edges\" or \"dist\"");
}

inline Json space_to_json(const MetricSpace& m) {
    Json j = Json::object();
    j["labels"] = m.labels();
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < m.size(); ++k) row.push_back(rational_to_json(m.dist(i, k)));
        rows.push_back(std::move(row));
    }
    j["dist"] = std::move(rows);
    return j;
}

inline RootedTree tree_from_json(const Json& j) {
    std::string root = detail::string_field(j, "root", "tree");
    const Json& je = detail::field(j, "edges", "tree");
    if (!je.is_array()) throw ParseError("tree: \"edges\" must be an array");
    std::vector<std::pair<std::string, std::string>> edges;
    for (const Json& e : je) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            throw ParseError("tree: each edge is [parent, child]");
        edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    try {
        return RootedTree(root, edges);
    } catch (const Error& e) {
        throw ParseError(std::string("tree: ") + e.what());
    }
}

inline Json tree_to_json(const RootedTree& t) {
    Json j = Json::object();
    j["root"] = t.label(0);
    Json edges = Json::array();
    for (std::size_t v = 1; v < t.size(); ++v)
        edges.push_back(Json::array({t.label(static_cast<std::size_t>(t.parent(static_cast<int>(v)))),
                                     t.label(v)}));
    j["edges"] = std::move(edges);
    return j;
}

// a file that is either a tree or a space; trees carry "root"
inline MetricSpace space_or_tree_from_json(const Json& j) {
    if (j.is_object() && j.contains("root")) return tree_from_json(j).to_space();
    return space_from_json(j);
}

// ---------------------------------------------------------------------------
// Families and witnesses (sets as label arrays).
// ---------------------------------------------------------------------------

inline SubsetFamily family_from_json(const Json& j, const MetricSpace& m) {
    if (!j.is_array()) throw ParseError("family must be an array of sets");
    SubsetFamily f;
    for (const Json& set : j) {
        if (!set.is_array()) throw ParseError("family: each set is an array of labels");
        std::vector<int> s;
        for (const Json& l : set) s.push_back(detail::label_index(m, l, "family"));
        f.sets.push_back(std::move(s));
    }
    f.normalize();
    f.validate(m.size());
    return f;
}

inline Json family_to_json(const SubsetFamily& f, const MetricSpace& m) {
    Json sets = Json::array();
    for (const auto& s : f.sets) {
        Json set = Json::array();
        for (int p : s) set.push_back(m.label(static_cast<std::size_t>(p)));
        sets.push_back(std::move(set));
    }
    return sets;
}

inline CoverWitness witness_from_json(const Json& j, const MetricSpace& m) {
    if (!j.is_array()) throw ParseError("witness \"families\" must be an array");
    CoverWitness w;
    for (const Json& je : j) {
        FamilyEntry e;
        e.separation = rational_from_json(detail::field(je, "separation", "witness family"),
                                          "separation");
        if (je.contains("mesh")) e.mesh = rational_from_json(je.at("mesh"), "mesh");
        e.family = family_from_json(detail::field(je, "sets", "witness family"), m);
        w.entries.push_back(std::move(e));
    }
    w.validate(m.size());
    return w;
}

inline Json witness_to_json(const CoverWitness& w, const MetricSpace& m) {
    Json families = Json::array();
    for (const auto& e : w.entries) {
        Json je = Json::object();
        je["separation"] = rational_to_json(e.separation);
        if (e.mesh) je["mesh"] = rational_to_json(*e.mesh);
        je["sets"] = family_to_json(e.family, m);
        families.push_back(std::move(je));
    }
    return families;
}

// self-contained cover-witness file
inline Json cover_witness_file(const MetricSpace& m, const CoverWitness& w) {
    Json j = Json::object();
    j["schema"] = kSchemaVersion;
    j["kind"] = "cover-witness";
    j["space"] = space_to_json(m);
    j["families"] = witness_to_json(w, m);
    return j;
}

// a single family with its separation/mesh claims (not a cover)
inline Json family_file(const MetricSpace& m, const FamilyEntry& e) {
    Json j = Json::object();
    j["schema"] = kSchemaVersion;
    j["kind"] = "family";
    j["space"] = space_to_json(m);
    j["separation"] = rational_to_json(e.separation);
    if (e.mesh) j["mesh"] = rational_to_json(*e.mesh);
    j["sets"] = family_to_json(e.family, m);
    return j;
}

inline FamilyEntry family_entry_from_json(const Json& j, const MetricSpace& m) {
    FamilyEntry e;
    e.separation =
        rational_from_json(detail::field(j, "separation", "family file"), "separation");
    if (j.contains("mesh")) e.mesh = rational_from_json(j.at("mesh"), "mesh");
    e.family = family_from_json(detail::field(j, "sets", "family file"), m);
    return e;
}

// ---------------------------------------------------------------------------
// Dimension witnesses.
// ---------------------------------------------------------------------------

struct AsdimWitnessFile {
    MetricSpace space;
    SubsetFamily targets;  // the covered point sets X_a
    AsdimWitness witness;
};

inline AsdimWitnessFile asdim_file_from_json(const Json& j) {
    AsdimWitnessFile out{space_from_json(detail::field(j, "space", "asdim witness")), {}, {}};
    out.witness.dimension = detail::int_field(j, "dimension", "asdim witness");
    out.witness.scale =
        rational_from_json(detail::field(j, "scale", "asdim witness"), "scale");
    out.witness.mesh_bound =
        rational_from_json(detail::field(j, "mesh_bound", "asdim witness"), "mesh_bound");
    out.targets = family_from_json(detail::field(j, "targets", "asdim witness"), out.space);
    const Json& jp = detail::field(j, "per_space", "asdim witness");
    if (!jp.is_array()) throw ParseError("asdim witness: \"per_space\" must be an array");
    for (const Json& fams : jp) {
        if (!fams.is_array())
            throw ParseError("asdim witness: each space entry is an array of families");
        std::vector<SubsetFamily> v;
        for (const Json& f : fams) v.push_back(family_from_json(f, out.space));
        out.witness.per_space.push_back(std::move(v));
    }
    return out;
}

inline Json asdim_file_to_json(const MetricSpace& m, const SubsetFamily& targets,
                               const AsdimWitness& w) {
    Json j = Json::object();
    j["schema"] = kSchemaVersion;
    j["kind"] = "asdim-witness";
    j["space"] = space_to_json(m);
    j["dimension"] = w.dimension;
    j["scale"] = rational_to_json(w.scale);
    j["mesh_bound"] = rational_to_json(w.mesh_bound);
    j["targets"] = family_to_json(targets, m);
    Json per_space = Json::array();
    for (const auto& fams : w.per_space) {
        Json v = Json::array();
        for (const auto& f : fams) v.push_back(family_to_json(f, m));
        per_space.push_back(std::move(v));
    }
    j["per_space"] = std::move(per_space);
    return j;
}

// ---------------------------------------------------------------------------
// Decomposition chains (family references by index).
// ---------------------------------------------------------------------------

inline Json chain_file(const MetricSpace& m, const DecompositionChain& c) {
    Json j = Json::object();
    j["schema"] = kSchemaVersion;
    j["kind"] = "chain";
    j["space"] = space_to_json(m);
    j["root"] = family_to_json(c.root, m);
    Json steps = Json::array();
    for (const auto& st : c.steps) {
        Json js = Json::object();
        js["r"] = rational_to_json(st.r);
        js["target"] = family_to_json(st.target, m);
        Json decs = Json::array();
        for (const auto& d : st.per_set) {
            Json jd = Json::object();
            jd["part1"] = d.part1;
            jd["part2"] = d.part2;
            decs.push_back(std::move(jd));
        }
        js["decompositions"] = std::move(decs);
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    j["terminal_mesh"] = rational_to_json(c.terminal_mesh);
    return j;
}

inline DecompositionChain chain_from_json(const Json& j, const MetricSpace& m) {
    DecompositionChain c;
    c.root = family_from_json(detail::field(j, "root", "chain"), m);
    c.terminal_mesh =
        rational_from_json(detail::field(j, "terminal_mesh", "chain"), "terminal_mesh");
    const Json& js = detail::field(j, "steps", "chain");
    if (!js.is_array()) throw ParseError("chain: \"steps\" must be an array");
    for (const Json& s : js) {
        ChainStep st;
        st.r = rational_from_json(detail::field(s, "r", "chain step"), "r");
        st.target = family_from_json(detail::field(s, "target", "chain step"), m);
        const Json& jd = detail::field(s, "decompositions", "chain step");
        if (!jd.is_array()) throw ParseError("chain step: \"decompositions\" must be an array");
        for (const Json& d : jd) {
            SetDecomposition dec;
            for (const Json& v : detail::field(d, "part1", "decomposition")) {
                if (!v.is_number_integer())
                    throw ParseError("decomposition parts are arrays of set indices");
                dec.part1.push_back(v.get<int>());
            }
            for (const Json& v : detail::field(d, "part2", "decomposition")) {
                if (!v.is_number_integer())
                    throw ParseError("decomposition parts are arrays of set indices");
                dec.part2.push_back(v.get<int>());
            }
            st.per_set.push_back(std::move(dec));
        }
        c.steps.push_back(std::move(st));
    }
    // Structural alignment: one decomposition per set of the previous stage,
    // and part indices must point into the step's own target family.
    const SubsetFamily* prev = &c.root;
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
        const ChainStep& st = c.steps[i];
        if (st.per_set.size() != prev->sets.size())
            throw PreconditionError("chain step " + std::to_string(i) + " has " +
                                    std::to_string(st.per_set.size()) + " decompositions for " +
                                    std::to_string(prev->sets.size()) + " sets");
        int limit = static_cast<int>(st.target.sets.size());
        for (const auto& d : st.per_set)
            for (const auto* part : {&d.part1, &d.part2})
                for (int v : *part)
                    if (v < 0 || v >= limit)
                        throw PreconditionError("chain step " + std::to_string(i) +
                                                ": set index " + std::to_string(v) +
                                                " outside target family");
        prev = &st.target;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Restricted points and product schedules.
// ---------------------------------------------------------------------------

inline std::vector<RestrictedPoint> points_from_json(const Json& j,
                                                     const std::vector<RootedTree>& factors) {
    const Json& jp = detail::field(j, "points", "points file");
    if (!jp.is_array()) throw ParseError("points file: \"points\" must be an array");
    std::vector<RestrictedPoint> out;
    for (const Json& p : jp) {
        const Json& sup = detail::field(p, "support", "point");
        if (!sup.is_object()) throw ParseError("point: \"support\" must be an object");
        RestrictedPoint rp;
        for (const auto& [key, val] : sup.items()) {
            int coord = 0;
            try {
                std::size_t used = 0;
                coord = std::stoi(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ParseError("point: coordinate \"" + key + "\" is not an integer");
            }
            if (coord < 1 || static_cast<std::size_t>(coord) > factors.size())
                throw ParseError("point: coordinate " + key + " outside 1.." +
                                 std::to_string(factors.size()));
            if (!val.is_string()) throw ParseError("point: vertex labels must be strings");
            const RootedTree& t = factors[static_cast<std::size_t>(coord - 1)];
            int v = 0;
            try {
                v = t.index_of(val.get<std::string>());
            } catch (const Error&) {
                throw ParseError("point: unknown vertex \"" + val.get<std::string>() +
                                 "\" in factor " + key);
            }
            rp.support[coord] = v;
        }
        try {
            validate_restricted_point(rp, factors.size());
        } catch (const Error& e) {
            throw ParseError(std::string("point: ") + e.what());
        }
        out.push_back(std::move(rp));
    }
    return out;
}

inline Json points_to_json(const std::vector<RestrictedPoint>& pts,
                           const std::vector<RootedTree>& factors) {
    Json j = Json::object();
    j["schema"] = kSchemaVersion;
    j["kind"] = "points";
    Json arr = Json::array();
    for (const auto& p : pts) {
        Json sup = Json::object();
        for (const auto& [coord, v] : p.support)
            sup[std::to_string(coord)] =
                factors[static_cast<std::size_t>(coord - 1)].label(static_cast<std::size_t>(v));
        Json jp = Json::object();
        jp["support"] = std::move(sup);
        arr.push_back(std::move(jp));
    }
    j["points"] = std::move(arr);
    return j;
}

inline TreeProductSchedule product_schedule_from_json(const Json& j) {
    TreeProductSchedule s;
    const Json& jr = detail::field(j, "R", "schedule");
    if (!jr.is_array() || jr.empty()) throw ParseError("schedule: \"R\" must be a nonempty array");
    for (const Json& v : jr) s.R.push_back(rational_from_json(v, "schedule value"));
    s.k = detail::int_field(j, "k", "schedule");
    s.m = detail::int_field(j, "m", "schedule");
    if (s.k < 1 || s.k > 16 || s.m < 1 || s.m > 16)
        throw PreconditionError("schedule: block sizes must lie in 1..16");
    auto perm = [&](const char* key, int bits) {
        std::vector<int> p;
        if (j.contains(key)) {
            const Json& ja = j.at(key);
            if (!ja.is_array()) throw ParseError(std::string("schedule: \"") + key +
                                                 "\" must be a permutation array");
            for (const Json& v : ja) {
                if (!v.is_number_integer())
                    throw ParseError(std::string("schedule: \"") + key +
                                     "\" entries must be integers");
                p.push_back(v.get<int>());
            }
        } else {
            p.resize(static_cast<std::size_t>(1) << bits);
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<int>(i);
        }
        return p;
    };
    s.psi = perm("psi", s.m);
    s.phi = perm("phi", s.k);
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Maps and envelopes.
// ---------------------------------------------------------------------------

inline std::vector<int> map_from_json(const Json& j, const MetricSpace& x,
                                      const MetricSpace& y) {
    const Json& jp = detail::field(j, "pairs", "map");
    if (!jp.is_array()) throw ParseError("map: \"pairs\" must be an array");
    std::vector<int> image(x.size(), -1);
    for (const Json& pair : jp) {
        if (!pair.is_array() || pair.size() != 2)
            throw ParseError("map: each pair is [domain_label, image_label]");
        int xi = detail::label_index(x, pair[0], "map domain");
        int yi = detail::label_index(y, pair[1], "map image");
        if (image[static_cast<std::size_t>(xi)] != -1)
            throw ParseError("map: point \"" + x.label(static_cast<std::size_t>(xi)) +
                             "\" is mapped twice");
        image[static_cast<std::size_t>(xi)] = yi;
    }
    for (std::size_t i = 0; i < image.size(); ++i)
        if (image[i] == -1)
            throw ParseError("map: point \"" + x.label(i) + "\" has no image");
    return image;
}

inline Json step_function_to_json(const StepFunction& f) {
    Json arr = Json::array();
    for (const auto& [t, v] : f.points)
        arr.push_back(Json::array({rational_to_json(t), rational_to_json(v)}));
    return arr;
}

inline StepFunction step_function_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of [distance, value] pairs");
    StepFunction f;
    for (const Json& p : j) {
        if (!p.is_array() || p.size() != 2)
            throw ParseError(what + " entries are [distance, value] pairs");
        f.points.push_back({rational_from_json(p[0], what + " distance"),
                            rational_from_json(p[1], what + " value")});
    }
    f.validate();
    return f;
}

inline Json envelope_to_json(const DistortionEnvelope& env) {
    Json j = Json::object();
    j["rho_minus"] = step_function_to_json(env.lo);
    j["rho_plus"] = step_function_to_json(env.hi);
    return j;
}

inline DistortionEnvelope envelope_from_json(const Json& j) {
    DistortionEnvelope env;
    env.lo = step_function_from_json(detail::field(j, "rho_minus", "envelope"), "rho_minus");
    env.hi = step_function_from_json(detail::field(j, "rho_plus", "envelope"), "rho_plus");
    env.validate();
    return env;
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

inline Json report_to_json(const VerificationReport& rep, const std::string& command) {
    Json j = Json::object();
    j["schema"] = kSchemaVersion;
    j["kind"] = "report";
    j["command"] = command;
    j["verdict"] = rep.pass() ? "pass" : "fail";
    Json violations = Json::array();
    for (const auto& v : rep.violations) {
        Json jv = Json::object();
        jv["kind"] = v.kind;
        jv["subjects"] = v.subjects;
        jv["measured"] = v.measured;
        jv["required"] = v.required;
        violations.push_back(std::move(jv));
    }
    j["violations"] = std::move(violations);
    j["notes"] = rep.notes;
    return j;
}

}  // namespace coarse
