#pragma once

// The `freerel` command line. run() parses argv, dispatches to a
// subcommand, prints a deterministic text report to `out`, optionally writes
// a JSON report, and returns the exit code:
//   0 success / true verdict, 1 false verdict, 2 usage or domain error,
//   3 internal assertion failure.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/eval.hpp"
#include "freerel/expr.hpp"
#include "freerel/field.hpp"
#include "freerel/quiver.hpp"
#include "freerel/report.hpp"
#include "freerel/sigma.hpp"

namespace freerel {

namespace cli {

constexpr int kTrue = 0;
constexpr int kFalse = 1;
constexpr int kUsage = 2;
constexpr int kInternal = 3;

struct Options {
    std::string field = "q";
    std::string group = "GL";
    std::size_t n = 2;
    std::optional<std::size_t> n_max;
    std::uint32_t d = 2;
    std::size_t deg = 2;
    std::size_t max_len = 3;
    std::optional<std::uint32_t> t_max;
    std::uint32_t q = 1;
    std::uint64_t seed = 0;
    std::size_t samples = 20;
    bool exploratory = false;
    bool reuse_index = false;
    std::optional<std::uint32_t> slots;
    std::string out_path;
    std::string expr;
    std::string file;
};

/// Text plus JSON report of one command.
struct Output {
    std::ostringstream text;
    Json json;
    int code = kTrue;
};

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

inline void exploratory_note(Output& o, bool exploratory) {
    if (exploratory) o.text << "note: exploratory mode; results lie outside the supported hypotheses\n";
}

template <Field F>
GroupSpec group_of(const Options& opt, const F& field, std::size_t n) {
    GroupSpec g{parse_group(opt.group), n, opt.exploratory};
    validate_group(g, field.characteristic());
    return g;
}

// --- subcommands -----------------------------------------------------------

template <Field F>
void cmd_eval(const Options& opt, const F& field, Output& o) {
    auto g = group_of(opt, field, opt.n);
    auto f = parse_expr(opt.expr, field);
    auto img = psi_n(f, g);
    o.json = report_header("eval", field.name(), g.kind, {g.n}, opt.exploratory);
    o.json["input"] = format_expr(f);
    o.json["image"] = img.str();
    o.json["verdict"] = nullptr;
    exploratory_note(o, opt.exploratory);
    o.text << "group: " << g.str() << "\nfield: " << field.name() << "\ninput: " << format_expr(f)
           << "\nimage: " << img.str() << "\n";
}

template <Field F>
void cmd_derive(const Options& opt, const F& field, Output& o) {
    auto f = parse_expr(opt.expr, field);
    DeriveOptions dopt{opt.reuse_index};
    auto df = derive(f, opt.q, dopt);
    o.json = report_header("derive", field.name(), std::nullopt, {}, false);
    o.json["input"] = format_expr(f);
    o.json["q"] = opt.q;
    o.json["output"] = format_expr(df);
    o.json["verdict"] = nullptr;
    o.text << "field: " << field.name() << "\ninput: " << format_expr(f) << "\nd_" << opt.q << ": " << format_expr(df)
           << "\n";
}

template <Field F>
void cmd_is_relation(const Options& opt, const F& field, Output& o) {
    auto g = group_of(opt, field, opt.n);
    auto f = parse_expr(opt.expr, field);
    bool rel = is_relation(f, g);
    o.json = report_header("is-relation", field.name(), g.kind, {g.n}, opt.exploratory);
    o.json["input"] = format_expr(f);
    o.json["verdict"] = rel;
    exploratory_note(o, opt.exploratory);
    o.text << "group: " << g.str() << "\nfield: " << field.name() << "\ninput: " << format_expr(f)
           << "\nrelation: " << yes_no(rel) << "\n";
    o.code = rel ? kTrue : kFalse;
}

template <Field F>
void cmd_scan_free(const Options& opt, const F& field, Output& o) {
    const GroupKind kind = parse_group(opt.group);
    const std::size_t n_max = opt.n_max.value_or(opt.n);
    if (n_max < opt.n) throw DomainError("--n-max must be >= --n");
    for (std::size_t n = opt.n; n <= n_max; ++n)
        if (kind != GroupKind::Sp || n % 2 == 0) validate_group(GroupSpec{kind, n, opt.exploratory}, field.characteristic());
    auto f = parse_expr(opt.expr, field);
    auto rep = free_scan(f, kind, opt.n, n_max, opt.exploratory);
    std::vector<std::size_t> ns;
    for (const auto& [n, rel] : rep.per_n) ns.push_back(n);
    o.json = report_header("scan-free", field.name(), kind, ns, opt.exploratory);
    o.json["input"] = format_expr(f);
    o.json["scan"] = relation_json(rep);
    o.json["verdict"] = rep.relation_at_all_tested_n();
    exploratory_note(o, opt.exploratory);
    o.text << "group: " << group_name(kind) << "\nfield: " << field.name() << "\ninput: " << format_expr(f) << "\n";
    for (const auto& [n, rel] : rep.per_n) o.text << "n=" << n << ": " << (rel ? "relation" : "not a relation") << "\n";
    if (rep.relation_at_all_tested_n())
        o.text << "verdict: relation at every tested n (no claim beyond the tested range)\n";
    else
        o.text << "verdict: fails at n=" << *rep.fails_at << "\n";
    o.code = rep.relation_at_all_tested_n() ? kTrue : kFalse;
}

template <Field F>
void cmd_certify(const Options& opt, const F& field, Output& o) {
    auto g = group_of(opt, field, opt.n);
    auto rep = independence_certificate(field, opt.d, opt.deg, g);
    o.json = report_header("certify", field.name(), g.kind, {g.n}, opt.exploratory);
    o.json["d"] = opt.d;
    o.json["degree"] = opt.deg;
    o.json["certificate"] = certificate_json(rep);
    o.json["verdict"] = rep.independent();
    exploratory_note(o, opt.exploratory);
    o.text << "group: " << g.str() << "\nfield: " << field.name() << "\nletters: " << opt.d << "\ndegree: " << opt.deg
           << "\nbasis_size: " << rep.basis_size << "\nrank: " << rep.rank << "\nindependent: " << yes_no(rep.independent())
           << "\n";
    for (const auto& m : rep.dependent) o.text << "dependent: " << m.str() << "\n";
    o.code = rep.independent() ? kTrue : kFalse;
}

template <Field F>
void cmd_multilinear_cert(const Options& opt, const F& field, Output& o) {
    const GroupKind kind = parse_group(opt.group);
    if (kind == GroupKind::O && field.characteristic() == 2 && !opt.exploratory) {
        validate_group(GroupSpec{kind, 2, false}, 2);
    }
    auto f = parse_expr(opt.expr, field);
    auto cert = multilinear_certificate(f, kind);
    o.json = report_header("multilinear-cert", field.name(), kind, {cert.n}, opt.exploratory);
    o.json["input"] = format_expr(f);
    o.json["d"] = cert.d;
    Json vals = Json::array();
    for (const auto& [m, v] : cert.values) vals.push_back(Json{{"monomial", m.str()}, {"value", field.format(v)}});
    o.json["isolation_values"] = vals;
    o.json["vanishes"] = cert.vanishes;
    o.json["witness"] = cert.witness ? Json(cert.witness->first.str()) : Json(nullptr);
    o.json["verdict"] = true;
    exploratory_note(o, opt.exploratory);
    o.text << "group: " << group_name(kind) << "\nfield: " << field.name() << "\ninput: " << format_expr(f)
           << "\nletters: " << cert.d << "\nmatrix size: " << cert.n << "\n";
    for (const auto& [m, v] : cert.values) o.text << "value at assignment of " << m.str() << ": " << field.format(v) << "\n";
    o.text << "vanishes: " << yes_no(cert.vanishes) << "\n";
    if (cert.witness)
        o.text << "witness: " << cert.witness->first.str() << " with coefficient " << field.format(cert.witness->second)
               << "\n";
}

template <Field F>
void cmd_diagram_check(const Options& opt, const F& field, Output& o) {
    auto g = group_of(opt, field, opt.n);
    auto f = parse_expr(opt.expr, field);
    auto r = diagram_check(f, opt.q, g, DeriveOptions{opt.reuse_index});
    o.json = report_header("diagram-check", field.name(), g.kind, {g.n}, opt.exploratory);
    o.json["input"] = format_expr(f);
    o.json["q"] = opt.q;
    o.json["symbolic_side"] = r.symbolic_side.str();
    o.json["matrix_side"] = r.matrix_side.str();
    o.json["verdict"] = r.commutes;
    exploratory_note(o, opt.exploratory);
    o.text << "group: " << g.str() << "\nfield: " << field.name() << "\ninput: " << format_expr(f) << "\nq: " << opt.q
           << "\ncommutes: " << yes_no(r.commutes) << "\n";
    if (!r.commutes)
        o.text << "psi(d f): " << r.symbolic_side.str() << "\nd psi(f): " << r.matrix_side.str() << "\n";
    o.code = r.commutes ? kTrue : kFalse;
}

template <Field F>
void cmd_char2_scan(const Options& opt, const F& field, Output& o) {
    if (parse_group(opt.group) != GroupKind::Sp) throw DomainError("char2-scan runs over Sp only (use --group Sp)");
    std::vector<std::size_t> ns;
    const std::size_t n_max = opt.n_max.value_or(opt.n);
    for (std::size_t n = opt.n; n <= n_max; ++n)
        if (n % 2 == 0) ns.push_back(n);
    if (ns.empty()) throw DomainError("no even n in the requested range");
    auto rows = conjecture_scan(field, opt.d, opt.max_len, ns);
    o.json = report_header("char2-scan", field.name(), GroupKind::Sp, ns, opt.exploratory);
    o.json["d"] = opt.d;
    o.json["max_len"] = opt.max_len;
    Json jr = Json::array();
    for (const auto& r : rows) {
        jr.push_back(Json{{"class", word_str(r.cls.canonical)},
                          {"t", r.t},
                          {"odd_t", r.odd_t()},
                          {"n", r.n},
                          {"relation", r.relation},
                          {"trivial", r.trivial}});
    }
    o.json["rows"] = jr;
    o.json["verdict"] = nullptr;
    o.text << "group: Sp\nfield: " << field.name() << "\nletters: " << opt.d << "\nmax length: " << opt.max_len << "\n";
    if (rows.empty()) o.text << "no self-transposed classes in range\n";
    for (const auto& r : rows) {
        o.text << "sigma(" << r.t << ", " << word_str(r.cls.canonical) << ") n=" << r.n << ": "
               << (r.trivial ? "relation (t > n)" : (r.relation ? "relation" : "not a relation"))
               << (r.odd_t() ? " [odd t]" : " [even t]") << "\n";
    }
    o.text << "note: evidence only; the scan makes no claim about all n\n";
}

inline MixedSetup load_quiver(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open quiver file '" + path + "'");
    return parse_quiver(in);
}

template <Field F>
void cmd_quiver_gens(const Options& opt, const F& field, Output& o) {
    auto s = load_quiver(opt.file);
    auto gens = quiver_generators(s, opt.max_len, opt.t_max);
    o.json = report_header("quiver gens", field.name(), std::nullopt, s.dims, false);
    o.json["max_len"] = opt.max_len;
    Json arrows = Json::array();
    for (const auto& a : s.quiver.arrows)
        arrows.push_back(Json{{"letter", a.letter.str()}, {"name", a.name}, {"head", s.quiver.vertices[a.head]},
                              {"tail", s.quiver.vertices[a.tail]}});
    o.json["arrows"] = arrows;
    Json jg = Json::array();
    for (const auto& g : gens) jg.push_back(g.symbol.str());
    o.json["generators"] = jg;
    o.json["verdict"] = nullptr;
    std::istringstream legend(quiver_legend(s));
    for (std::string line; std::getline(legend, line);) o.text << "# " << line << "\n";
    for (const auto& g : gens) o.text << g.symbol.str() << "\n";
}

template <Field F>
void cmd_quiver_check(const Options& opt, const F& field, Output& o) {
    auto s = load_quiver(opt.file);
    auto gens = quiver_generators(s, opt.max_len, opt.t_max);
    auto samples = mixed_group_sample(field, s, opt.samples, opt.seed);
    auto ev = quiver_evaluator(field, s);
    o.json = report_header("quiver check", field.name(), std::nullopt, s.dims, false);
    Json rows = Json::array();
    bool all = true;
    for (const auto& g : gens) {
        auto rep = quiver_invariance_check(ev.factor_image(g.symbol), s, samples);
        all = all && rep.invariant;
        rows.push_back(Json{{"generator", g.symbol.str()}, {"invariant", rep.invariant}, {"samples", rep.samples_checked}});
        o.text << g.symbol.str() << ": " << (rep.invariant ? "invariant" : "NOT invariant") << " (" << rep.samples_checked
               << " samples)\n";
    }
    o.json["generators"] = rows;
    o.json["samples"] = opt.samples;
    o.json["seed"] = opt.seed;
    o.json["verdict"] = all;
    o.text << "all invariant: " << yes_no(all) << "\n";
    o.code = all ? kTrue : kFalse;
}

template <Field F>
void cmd_quiver_certify(const Options& opt, const F& field, Output& o) {
    auto s = load_quiver(opt.file);
    auto rep = quiver_independence(field, s, opt.n, opt.deg);
    o.json = report_header("quiver certify", field.name(), std::nullopt, {opt.n}, false);
    o.json["degree"] = opt.deg;
    o.json["certificate"] = certificate_json(rep);
    o.json["verdict"] = rep.independent();
    o.text << "field: " << field.name() << "\nuniform dimension: " << opt.n << "\ndegree: " << opt.deg
           << "\nbasis_size: " << rep.basis_size << "\nrank: " << rep.rank << "\nindependent: " << yes_no(rep.independent())
           << "\n";
    o.code = rep.independent() ? kTrue : kFalse;
}

template <Field F>
void cmd_pipeline(const Options& opt, const F& field, Output& o) {
    auto f = parse_expr(opt.expr, field);
    if (f.is_zero()) throw DomainError("the pipeline needs a nonzero element");
    if (field.characteristic() == 2 && !opt.exploratory)
        throw DomainError("the reduction needs characteristic != 2; pass --exploratory to run it anyway");
    o.json = report_header("pipeline", field.name(), std::nullopt, {}, opt.exploratory);
    o.json["input"] = format_expr(f);
    exploratory_note(o, opt.exploratory);
    o.text << "field: " << field.name() << "\ninput: " << format_expr(f) << "\n";
    const ReductionResult<F> red = reduce_to_multilinear(f, opt.slots, opt.exploratory);
    Json rounds = Json::array();
    for (std::size_t i = 0; i < red.rounds.size(); ++i) {
        const auto& r = red.rounds[i];
        Json jr;
        o.text << "round " << i + 1 << ":\n";
        Json steps = Json::array();
        for (std::size_t q = 0; q < r.derivation.chain.size(); ++q) {
            o.text << "  d_" << q + 1 << ": " << format_expr(r.derivation.chain[q]) << "\n";
            steps.push_back(format_expr(r.derivation.chain[q]));
        }
        std::string trace;
        for (std::size_t k = 0; k < r.derivation.deg_minus_trace.size(); ++k)
            trace += (k ? " -> " : "") + std::to_string(r.derivation.deg_minus_trace[k]);
        std::string witness;
        for (const auto& b : r.derivation.witness) witness += (witness.empty() ? "" : ", ") + b.str();
        o.text << "  p-multilinear after " << r.derivation.steps << " derivation(s); deg- " << trace << "; I = {"
               << witness << "}\n";
        o.text << "  rename y -> x: " << format_expr(r.renamed) << "\n";
        jr["derivatives"] = steps;
        jr["deg_minus"] = r.derivation.deg_minus_trace;
        jr["renamed"] = format_expr(r.renamed);
        if (r.stripped) {
            o.text << "  strip p-th powers: " << format_expr(*r.stripped) << "\n";
            jr["stripped"] = format_expr(*r.stripped);
        }
        rounds.push_back(jr);
    }
    o.json["rounds"] = rounds;
    o.json["result"] = format_expr(red.result);
    o.json["verdict"] = !red.result.is_zero();
    o.text << "result: " << format_expr(red.result) << "\nmultilinear: true\n";
}

// --- dispatch ----------------------------------------------------------------

using Handler = std::function<void(const Options&, Output&)>;

#define FREEREL_DISPATCH(fn)                                                                   \
    [](const Options& opt, Output& o) {                                                        \
        with_field(parse_field(opt.field), [&](const auto& field) { fn(opt, field, o); });     \
    }

}  // namespace cli

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace cli;
    Options opt;
    CLI::App app{"freerel: exact computations with matrix and quiver invariants in trace/sigma form"};
    app.name("freerel");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    struct Entry {
        CLI::App* app;
        Handler handler;
    };
    std::vector<Entry> entries;

    auto add_field = [&](CLI::App* a) { a->add_option("--field", opt.field, "Coefficient field: f<p> for a prime p, or q")->capture_default_str(); };
    auto add_group = [&](CLI::App* a) { a->add_option("--group", opt.group, "Group: GL, O or Sp")->capture_default_str(); };
    auto add_n = [&](CLI::App* a) { a->add_option("--n", opt.n, "Matrix size n")->capture_default_str(); };
    auto add_expl = [&](CLI::App* a) {
        a->add_flag("--exploratory", opt.exploratory, "Allow O(n) in characteristic 2 (outside the supported hypotheses); reports are marked");
    };
    auto add_out = [&](CLI::App* a) { a->add_option("--out", opt.out_path, "Write a JSON report to this file"); };
    auto add_expr = [&](CLI::App* a) { a->add_option("expr", opt.expr, "Sigma-expression, e.g. \"sigma(2, x1*T(x2)) - tr(x1)\"")->required(); };
    auto add_seed = [&](CLI::App* a) {
        a->add_option("--seed", opt.seed, "Root seed for all sampling")->capture_default_str();
        a->add_option("--samples", opt.samples, "Number of sampled group elements")->capture_default_str();
    };

    {
        auto* a = app.add_subcommand("eval", "Evaluate an expression at generic n x n matrices: sigma_t(a) goes to sigma_t(X_a) for t <= n and to 0 otherwise; transposed letters become X^T (O) or the symplectic transpose X* (Sp).");
        add_expr(a), add_field(a), add_group(a), add_n(a), add_expl(a), add_out(a);
        entries.push_back({a, FREEREL_DISPATCH(cmd_eval)});
    }
    {
        auto* a = app.add_subcommand("derive", "Apply the formal derivation d_q: x_k becomes y_{k,q} one occurrence at a time, with d_q(sigma_t(a)) = sum_i (-1)^i tr(a^i d_q(a)) sigma_{t-i-1}(a).");
        add_expr(a), add_field(a), add_out(a);
        a->add_option("--q", opt.q, "Derivation index q >= 1")->capture_default_str();
        a->add_flag("--reuse-index", opt.reuse_index, "Accept inputs that already contain y-letters with index >= q");
        entries.push_back({a, FREEREL_DISPATCH(cmd_derive)});
    }
    {
        auto* a = app.add_subcommand("is-relation", "Decide exactly whether the expression maps to 0 at generic n x n matrices for the chosen group. Exit 0 if it is a relation, 1 if not.");
        add_expr(a), add_field(a), add_group(a), add_n(a), add_expl(a), add_out(a);
        entries.push_back({a, FREEREL_DISPATCH(cmd_is_relation)});
    }
    {
        auto* a = app.add_subcommand("scan-free", "Test the expression for being a relation at every n in [--n, --n-max] (even n only for Sp). Evidence for a free relation, never a proof for all n.");
        add_expr(a), add_field(a), add_group(a), add_expl(a), add_out(a);
        a->add_option("--n", opt.n, "Smallest n")->capture_default_str();
        a->add_option("--n-max", opt.n_max, "Largest n (defaults to --n)");
        entries.push_back({a, FREEREL_DISPATCH(cmd_scan_free)});
    }
    {
        auto* a = app.add_subcommand("certify", "Linear-independence certificate: exact rank of the images of all sigma-monomials of degree 1..--deg in --d letters at size --n. Full rank means no relation of that degree exists at that n.");
        add_field(a), add_group(a), add_n(a), add_expl(a), add_out(a);
        a->add_option("--d", opt.d, "Number of letters")->capture_default_str();
        a->add_option("--deg", opt.deg, "Maximal degree")->capture_default_str();
        entries.push_back({a, FREEREL_DISPATCH(cmd_certify)});
    }
    {
        auto* a = app.add_subcommand("multilinear-cert", "For a multilinear expression in which every monomial uses each of x1..xd once, evaluate it at the elementary-matrix assignment built from each monomial (size d, or 2d for Sp); each value must equal that monomial's coefficient.");
        add_expr(a), add_field(a), add_group(a), add_expl(a), add_out(a);
        entries.push_back({a, FREEREL_DISPATCH(cmd_multilinear_cert)});
    }
    {
        auto* a = app.add_subcommand("diagram-check", "Check that evaluating d_q(f) equals applying d_q entrywise to the evaluation of f (both computed independently).");
        add_expr(a), add_field(a), add_group(a), add_n(a), add_expl(a), add_out(a);
        a->add_option("--q", opt.q, "Derivation index q >= 1")->capture_default_str();
        a->add_flag("--reuse-index", opt.reuse_index, "Accept inputs that already contain y-letters with index >= q");
        entries.push_back({a, FREEREL_DISPATCH(cmd_diagram_check)});
    }
    {
        auto* a = app.add_subcommand("char2-scan", "Over F_2 and Sp: for every class a with a cyclically equivalent to its transpose (length <= --max-len, --d letters) and every t, record whether sigma_t(a) is a relation at each even n in [--n, --n-max]. Reports evidence only.");
        opt.field = "f2";
        opt.group = "Sp";
        add_field(a), add_group(a), add_out(a);
        // The defaults above are only captured for this subcommand's help.
        opt.field = "q";
        opt.group = "GL";
        a->add_option("--d", opt.d, "Number of letters")->capture_default_str();
        a->add_option("--max-len", opt.max_len, "Maximal word length")->capture_default_str();
        a->add_option("--n", opt.n, "Smallest n")->capture_default_str();
        a->add_option("--n-max", opt.n_max, "Largest n (defaults to --n)");
        entries.push_back({a, FREEREL_DISPATCH(cmd_char2_scan)});
    }
    {
        auto* a = app.add_subcommand("pipeline", "Reduce a nonzero element to a multilinear one: derive until p-multilinear (deg- must drop each step), rename y-letters to fresh x-letters, strip p-th powers, and repeat. Every stage is printed.");
        add_expr(a), add_field(a), add_expl(a), add_out(a);
        a->add_option("--d", opt.slots, "Number of x-slots available for renaming (default: just enough)");
        entries.push_back({a, FREEREL_DISPATCH(cmd_pipeline)});
    }
    auto* quiver = app.add_subcommand("quiver", "Mixed quiver representations (quiver file: `vertex NAME dim N`, `arrow NAME HEAD TAIL`, `invol A B`).");
    quiver->require_subcommand(1);
    auto add_file = [&](CLI::App* a) { a->add_option("file", opt.file, "Quiver file")->required()->check(CLI::ExistingFile); };
    {
        auto* a = quiver->add_subcommand("gens", "List the generators sigma_t(a) for primitive closed paths a of the double quiver with |a| <= --max-len and t <= n at the head of a. Arrow k is printed as the letter xk, its reverse as T(xk).");
        add_file(a), add_field(a), add_out(a);
        a->add_option("--max-len", opt.max_len, "Maximal path length")->capture_default_str();
        a->add_option("--t-max", opt.t_max, "Cap on t");
        entries.push_back({a, FREEREL_DISPATCH(cmd_quiver_gens)});
    }
    {
        auto* a = quiver->add_subcommand("check", "Check every generator for invariance under sampled base changes g with g_v g_i(v)^T = E, acting by X_a -> g_head X_a g_tail^{-1}.");
        add_file(a), add_field(a), add_seed(a), add_out(a);
        a->add_option("--max-len", opt.max_len, "Maximal path length")->capture_default_str();
        a->add_option("--t-max", opt.t_max, "Cap on t");
        entries.push_back({a, FREEREL_DISPATCH(cmd_quiver_check)});
    }
    {
        auto* a = quiver->add_subcommand("certify", "Exact rank of all generator monomials of degree 1..--deg evaluated at uniform dimension --n.");
        add_file(a), add_field(a), add_out(a);
        a->add_option("--n", opt.n, "Uniform dimension at every vertex")->capture_default_str();
        a->add_option("--deg", opt.deg, "Maximal degree")->capture_default_str();
        entries.push_back({a, FREEREL_DISPATCH(cmd_quiver_certify)});
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kTrue;
        }
        err << "error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return kUsage;
    }

    const Entry* chosen = nullptr;
    for (const auto& e : entries)
        if (e.app->parsed()) chosen = &e;
    if (!chosen) {
        err << "error: no subcommand selected\n";
        return kUsage;
    }
    if (chosen->app->get_name() == "char2-scan") {
        if (chosen->app->count("--field") == 0) opt.field = "f2";
        if (chosen->app->count("--group") == 0) opt.group = "Sp";
    }

    Output o;
    try {
        chosen->handler(opt, o);
        if (!opt.out_path.empty()) write_report_file(opt.out_path, o.json);
    } catch (const InvariantViolation& e) {
        err << "internal assertion failed: " << e.what() << "\n";
        return kInternal;
    } catch (const ParseError& e) {
        err << "parse error at " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ResourceLimit& e) {
        err << "resource limit: " << e.what() << "\n";
        return kUsage;
    }
    out << o.text.str();
    return o.code;
}

}  // namespace freerel
