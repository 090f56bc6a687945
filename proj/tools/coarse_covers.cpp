// Batch front door: build cover/chain artifacts, verify artifacts against
// their own claims, and generate deterministic test instances. One command
// per process; every verdict is a JSON report on stdout.
//
// Exit codes: 0 verified pass, 1 verified fail, 2 malformed input,
// 3 precondition/budget/builder error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coarse/doubling.hpp"
#include "coarse/errors.hpp"
#include "coarse/gen.hpp"
#include "coarse/io.hpp"
#include "coarse/metric_space.hpp"
#include "coarse/product.hpp"
#include "coarse/sfdc.hpp"
#include "coarse/tree.hpp"
#include "coarse/witness.hpp"

namespace {

using coarse::Json;
using coarse::MetricSpace;
using coarse::Rational;
using coarse::VerificationReport;

struct Options {
    std::string artifact;   // verify: file to check
    std::string space;      // verify: space override
    std::string kind;       // build/gen: what to make
    std::vector<std::string> trees;
    std::string left, right, points, witness, annuli;
    std::string schedule;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t size = 1;
    int budget_n = coarse::kBallSearchBudget;
    int union_budget = 2;
    bool exhaustive_grid = false;
    std::string reading;
};

std::vector<Rational> parse_schedule_list(const std::string& s) {
    if (s.empty()) throw coarse::ParseError("--schedule must be nonempty");
    std::vector<Rational> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t a = item.find_first_not_of(" \t");
        std::size_t b = item.find_last_not_of(" \t");
        if (a == std::string::npos)
            throw coarse::ParseError("--schedule has an empty entry");
        out.push_back(coarse::rational_from_string(item.substr(a, b - a + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void emit(const Json& report, const std::string& out_path) {
    std::cout << report.dump(2) << "\n";
    if (!out_path.empty()) coarse::save_json(out_path, report);
}

// Load the space an artifact refers to: --space wins, then the embedded one.
MetricSpace resolve_space(const Json& artifact, const std::string& space_path) {
    if (!space_path.empty())
        return coarse::space_or_tree_from_json(coarse::load_json(space_path));
    if (artifact.contains("space")) return coarse::space_from_json(artifact.at("space"));
    throw coarse::ParseError("artifact embeds no space; pass --space");
}

// Verification core shared by cmd_verify and the post-build self-check.
// The caller supplies the artifact JSON and the space to check against.
VerificationReport run_verify(const Json& j, const MetricSpace& m, const Options& opt) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw coarse::ParseError("artifact has no \"kind\" field");
    std::string kind = j.at("kind").get<std::string>();

    if (kind == "cover-witness") {
        coarse::CoverWitness w =
            coarse::witness_from_json(coarse::detail::field(j, "families", "witness file"), m);
        return coarse::verify_cover_witness(m, w);
    }

    if (kind == "family") {
        coarse::FamilyEntry e = coarse::family_entry_from_json(j, m);
        VerificationReport rep = coarse::is_r_disjoint(m, e.family, e.separation);
        if (e.mesh) {
            Rational measured = coarse::family_mesh(m, e.family);
            if (measured > *e.mesh)
                rep.add("mesh", {"family"}, coarse::rational_to_string(measured),
                        "<= " + coarse::rational_to_string(*e.mesh));
        }
        return rep;
    }

    if (kind == "chain") {
        coarse::DecompositionChain c = coarse::chain_from_json(j, m);
        return coarse::verify_sfdc_chain(m, c);
    }

    if (kind == "lsd-check") {
        coarse::DoublingParams params;
        params.n = coarse::detail::int_field(j, "n", "lsd-check");
        params.r = coarse::rational_from_json(coarse::detail::field(j, "r", "lsd-check"), "r");
        std::string mode = coarse::detail::string_field(j, "mode", "lsd-check");
        if (mode != "weak" && mode != "uniform")
            throw coarse::ParseError("lsd-check: \"mode\" must be \"weak\" or \"uniform\"");
        std::vector<Rational> grid = coarse::default_r_grid(m, params.r, opt.exhaustive_grid);

        if (j.contains("witness")) {
            // layered input: the caller must say which reading to apply
            coarse::DoublingReading reading;
            if (opt.reading == "union-family")
                reading = coarse::DoublingReading::union_family;
            else if (opt.reading == "per-family")
                reading = coarse::DoublingReading::per_family;
            else
                throw coarse::ParseError(
                    "layered lsd-check needs --reading union-family or per-family");
            coarse::CoverWitness w = coarse::witness_from_json(j.at("witness"), m);
            return coarse::verify_doubling_cover(m, w, params, opt.union_budget, grid, reading,
                                                 mode == "weak", opt.budget_n);
        }
        if (j.contains("family")) {
            coarse::SubsetFamily f = coarse::family_from_json(j.at("family"), m);
            if (mode == "weak")
                return coarse::is_weakly_uniformly_lsd(m, f, params, grid, opt.budget_n);
            return coarse::is_uniformly_lsd(m, f, params, opt.union_budget, grid, opt.budget_n);
        }
        throw coarse::ParseError("lsd-check needs \"family\" or \"witness\"");
    }

    throw coarse::ParseError("unrecognized artifact kind \"" + kind + "\"");
}

int cmd_verify(const Options& opt) {
    Json j = coarse::load_json(opt.artifact);
    MetricSpace m = resolve_space(j, opt.space);
    VerificationReport rep = run_verify(j, m, opt);
    std::string kind = j.at("kind").get<std::string>();
    emit(coarse::report_to_json(rep, "verify " + kind), opt.out);
    return rep.pass() ? 0 : 1;
}

// After writing an artifact, read the bytes back and re-verify them against
// the space used to build (whose serialized form must round-trip exactly).
void self_check(const std::string& path, const MetricSpace& m, const Options& opt) {
    Json j = coarse::load_json(path);
    if (!j.contains("space") || j.at("space") != coarse::space_to_json(m))
        throw coarse::Error("self-check failed: written space does not round-trip");
    VerificationReport rep = run_verify(j, m, opt);
    if (!rep.pass()) throw coarse::Error("self-check failed: " + rep.summary());
}

int cmd_build(const Options& opt) {
    if (opt.out.empty()) throw coarse::ParseError("build needs --out");
    Json artifact;
    std::optional<MetricSpace> built_on;

    if (opt.kind == "tree-asdim1") {
        if (opt.trees.size() != 1) throw coarse::ParseError("tree-asdim1 needs exactly one --tree");
        std::vector<Rational> sched = parse_schedule_list(opt.schedule);
        if (sched.size() != 1)
            throw coarse::ParseError("tree-asdim1 takes a single-scale --schedule");
        coarse::RootedTree t = coarse::tree_from_json(coarse::load_json(opt.trees[0]));
        coarse::CoverWitness w = coarse::tree_asdim1_witness(t, sched[0]);
        built_on = t.to_space();
        artifact = coarse::cover_witness_file(*built_on, w);
    } else if (opt.kind == "product-combine") {
        if (opt.left.empty() || opt.right.empty())
            throw coarse::ParseError("product-combine needs --left and --right");
        std::vector<Rational> sched = parse_schedule_list(opt.schedule);
        // tree inputs get the real depth-block provider, plain spaces the
        // trivial one-family provider
        std::optional<coarse::RootedTree> lt, rt;
        auto load_side = [](const std::string& path, std::optional<coarse::RootedTree>& slot) {
            Json j = coarse::load_json(path);
            if (j.is_object() && j.contains("root")) {
                slot.emplace(coarse::tree_from_json(j));
                return slot->to_space();
            }
            return coarse::space_from_json(j);
        };
        MetricSpace x = load_side(opt.left, lt);
        MetricSpace y = load_side(opt.right, rt);
        coarse::WitnessProvider xp =
            lt ? coarse::tree_witness_provider(*lt) : coarse::trivial_provider(x);
        coarse::WitnessProvider yp =
            rt ? coarse::tree_witness_provider(*rt) : coarse::trivial_provider(y);
        coarse::CoverWitness w = coarse::combine_product_covers(x, y, sched, xp, yp);
        built_on = coarse::sup_product({x, y}, coarse::MetricSpace::kMaxPoints);
        artifact = coarse::cover_witness_file(*built_on, w);
    } else if (opt.kind == "restricted-tree-cover") {
        if (opt.trees.empty())
            throw coarse::ParseError("restricted-tree-cover needs --tree factors in order");
        if (opt.points.empty()) throw coarse::ParseError("restricted-tree-cover needs --points");
        if (opt.schedule.find(".json") == std::string::npos)
            throw coarse::ParseError(
                "restricted-tree-cover takes --schedule as a JSON file (R, k, m, psi, phi)");
        coarse::TreeProductSchedule sched =
            coarse::product_schedule_from_json(coarse::load_json(opt.schedule));
        std::vector<coarse::RootedTree> factors;
        for (const auto& path : opt.trees)
            factors.push_back(coarse::tree_from_json(coarse::load_json(path)));
        std::vector<coarse::RestrictedPoint> pts =
            coarse::points_from_json(coarse::load_json(opt.points), factors);
        coarse::RestrictedCoverResult res = coarse::restricted_tree_cover(factors, sched, pts);
        built_on = std::move(res.space);
        artifact = coarse::cover_witness_file(*built_on, res.witness);
    } else if (opt.kind == "sfdc-from-asdim") {
        if (opt.witness.empty()) throw coarse::ParseError("sfdc-from-asdim needs --witness");
        std::vector<Rational> sched = parse_schedule_list(opt.schedule);
        coarse::AsdimWitnessFile af =
            coarse::asdim_file_from_json(coarse::load_json(opt.witness));
        coarse::DecompositionChain chain =
            coarse::asdim_to_sfdc_chain(af.space, af.targets, af.witness, sched);
        built_on = std::move(af.space);
        artifact = coarse::chain_file(*built_on, chain);
    } else if (opt.kind == "sfdc-from-hpc") {
        if (opt.witness.empty()) throw coarse::ParseError("sfdc-from-hpc needs --witness");
        Json jw = coarse::load_json(opt.witness);
        MetricSpace m = resolve_space(jw, opt.space);
        coarse::CoverWitness w =
            coarse::witness_from_json(coarse::detail::field(jw, "families", "witness file"), m);
        std::vector<Rational> suffix;
        if (!opt.schedule.empty()) suffix = parse_schedule_list(opt.schedule);
        coarse::DecompositionChain chain = coarse::hpc_to_sfdc_chain(m, w, suffix);
        built_on = std::move(m);
        artifact = coarse::chain_file(*built_on, chain);
    } else if (opt.kind == "refine-annuli") {
        if (opt.trees.size() != 1) throw coarse::ParseError("refine-annuli needs exactly one --tree");
        if (opt.annuli.empty()) throw coarse::ParseError("refine-annuli needs --annuli");
        std::vector<Rational> sched = parse_schedule_list(opt.schedule);
        if (sched.size() != 1)
            throw coarse::ParseError("refine-annuli takes a single-scale --schedule");
        coarse::RootedTree t = coarse::tree_from_json(coarse::load_json(opt.trees[0]));
        Json ja = coarse::load_json(opt.annuli);
        const Json& arr = coarse::detail::field(ja, "annuli", "annuli file");
        if (!arr.is_array()) throw coarse::ParseError("annuli file: \"annuli\" must be an array");
        std::vector<coarse::Annulus> annuli;
        for (const Json& a : arr) {
            if (!a.is_array() || a.size() != 2)
                throw coarse::ParseError("annuli file: each annulus is [lo, hi]");
            annuli.push_back({coarse::rational_from_json(a[0], "annulus bound"),
                              coarse::rational_from_json(a[1], "annulus bound")});
        }
        coarse::FamilyEntry e = coarse::refine_annuli(t, annuli, sched[0]);
        built_on = t.to_space();
        artifact = coarse::family_file(*built_on, e);
    } else {
        throw coarse::ParseError("unknown build kind \"" + opt.kind + "\"");
    }

    coarse::save_json(opt.out, artifact);
    self_check(opt.out, *built_on, opt);

    VerificationReport ok;
    ok.note("artifact: " + opt.out);
    ok.note("self-check: pass");
    emit(coarse::report_to_json(ok, "build " + opt.kind), "");
    return 0;
}

int cmd_gen(const Options& opt) {
    if (opt.out.empty()) throw coarse::ParseError("gen needs --out");
    Json artifact;
    if (opt.kind == "random-tree") {
        artifact = coarse::tree_to_json(coarse::random_tree(opt.seed, opt.size));
    } else if (opt.kind == "random-path") {
        artifact = coarse::tree_to_json(coarse::path_tree(opt.size));
    } else if (opt.kind == "random-restricted-points") {
        if (opt.trees.empty())
            throw coarse::ParseError("random-restricted-points needs --tree factors");
        std::vector<coarse::RootedTree> factors;
        for (const auto& path : opt.trees)
            factors.push_back(coarse::tree_from_json(coarse::load_json(path)));
        artifact = coarse::points_to_json(
            coarse::random_restricted_points(opt.seed, opt.size, factors), factors);
    } else {
        throw coarse::ParseError("unknown gen kind \"" + opt.kind + "\"");
    }
    coarse::save_json(opt.out, artifact);

    VerificationReport ok;
    ok.note("artifact: " + opt.out);
    emit(coarse::report_to_json(ok, "gen " + opt.kind), "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"cover and decomposition artifacts: build, verify, generate"};
    app.require_subcommand(1);

    CLI::App* verify = app.add_subcommand("verify", "check an artifact against its claims");
    verify->add_option("artifact", opt.artifact, "artifact JSON file")->required();
    verify->add_option("--space", opt.space, "space or tree file overriding the embedded space");
    verify->add_option("--out", opt.out, "also write the report JSON here");
    verify->add_option("--budget-n", opt.budget_n, "exact ball-cover search cap");
    verify->add_option("--union-budget", opt.union_budget, "union arity cap for uniform checks");
    verify->add_flag("--exhaustive-grid", opt.exhaustive_grid,
                     "scan every realized scale instead of the geometric grid");
    verify->add_option("--reading", opt.reading,
                       "union-family | per-family (layered doubling input)");

    CLI::App* build = app.add_subcommand("build", "construct an artifact and self-verify it");
    build->add_option("kind", opt.kind,
                      "tree-asdim1 | product-combine | restricted-tree-cover | "
                      "sfdc-from-asdim | sfdc-from-hpc | refine-annuli")
        ->required();
    build->add_option("--tree", opt.trees, "tree file (repeat for ordered factors)");
    build->add_option("--left", opt.left, "first factor (tree or space file)");
    build->add_option("--right", opt.right, "second factor (tree or space file)");
    build->add_option("--points", opt.points, "restricted points file");
    build->add_option("--witness", opt.witness, "witness artifact to transform");
    build->add_option("--annuli", opt.annuli, "annuli file");
    build->add_option("--space", opt.space, "space file when the witness embeds none");
    build->add_option("--schedule", opt.schedule,
                      "comma-separated scales, or a schedule JSON file for "
                      "restricted-tree-cover");
    build->add_option("--out", opt.out, "artifact output path")->required();

    CLI::App* gen = app.add_subcommand("gen", "deterministic instance generation");
    gen->add_option("kind", opt.kind,
                    "random-tree | random-path | random-restricted-points")
        ->required();
    gen->add_option("--seed", opt.seed, "RNG seed");
    gen->add_option("--size", opt.size, "vertex / point count");
    gen->add_option("--tree", opt.trees, "factor tree file (repeat, ordered)");
    gen->add_option("--out", opt.out, "instance output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // --help exits cleanly; bad usage is an input error
    }

    try {
        if (verify->parsed()) return cmd_verify(opt);
        if (build->parsed()) return cmd_build(opt);
        return cmd_gen(opt);
    } catch (const coarse::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const coarse::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
