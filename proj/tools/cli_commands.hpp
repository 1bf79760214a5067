#pragma once

// Verb implementations for the gf2lab command line. Every verb maps parsed
// options to one JSON report; nothing is kept between invocations.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gf2lab/cbreak.hpp"
#include "gf2lab/condense.hpp"
#include "gf2lab/daext.hpp"
#include "gf2lab/dimexp.hpp"
#include "gf2lab/injector.hpp"
#include "gf2lab/lbp.hpp"
#include "gf2lab/snmext.hpp"
#include "gf2lab/verify.hpp"

namespace gf2lab::cli {

using nlohmann::json;

struct Outcome {
    json report;
    bool ok = true;  // false when the verb's own check failed
};

struct Globals {
    std::uint64_t seed = 1;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string budget = "2^36";
    bool json_out = false;

    Budget make_budget() const {
        if (budget.rfind("2^", 0) == 0) return Budget{pow2(static_cast<unsigned>(std::stoul(budget.substr(2))))};
        return Budget{std::stoull(budget)};
    }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline json read_json(const std::string& path) { return json::parse(read_file(path)); }

/// "len:hex", or bare hex read as `len` bits.
inline BitVec parse_input(const std::string& s, std::size_t len) {
    const BitVec v = s.find(':') == std::string::npos ? BitVec::from_text(std::to_string(len) + ":" + s) : BitVec::from_text(s);
    if (v.size() != len) throw std::invalid_argument("input has " + std::to_string(v.size()) + " bits, expected " + std::to_string(len));
    return v;
}


// ---------------------------------------------------------------------------
// Shared builders

/// Expander at width w: from a file when its width matches, else the seeded search.
inline DimExpander expander_for(std::size_t w, std::size_t d, std::uint64_t seed, const std::string& file,
                                const Globals& g) {
    if (!file.empty()) {
        auto e = DimExpander::from_text(read_file(file));
        if (e.n == w) return e;
    }
    if (w > 10) throw std::invalid_argument("no expander for width " + std::to_string(w) + "; pass --expander");
    SearchOptions opt;
    opt.workers = g.workers;
    opt.budget = g.make_budget();
    return search_dimension_expander(w, d, Rational(1, 4), seed, 500, opt);
}

inline PipelineParams load_params(const std::string& spec) {
    if (spec == "structural") return PipelineParams::structural_toy();
    if (spec == "statistical") return PipelineParams::statistical_toy();
    return PipelineParams::from_json(read_json(spec));
}

/// builtin:NAME, file:TRUTHTABLE, pipeline:PARAMS (path or preset), structured:FILE.
inline BoolFn load_function(const std::string& spec, std::size_t n) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--f expects KIND:VALUE");
    const std::string kind = spec.substr(0, colon), val = spec.substr(colon + 1);
    if (kind == "builtin") {
        if (n == 0) throw std::invalid_argument("builtin functions need --n");
        return builtin_fn(val, n);
    }
    if (kind == "file") return BoolFn::from_text(read_file(val));
    if (kind == "pipeline") {
        const Pipeline P(load_params(val));
        const auto t = P.table();
        return BoolFn(P.params().n, P.params().out_bits(), std::vector<std::uint32_t>(t.begin(), t.end()), "pipeline:" + val);
    }
    if (kind == "structured") return structured_table(StructuredFunction::from_json(read_json(val)), spec);
    throw std::invalid_argument("unknown function kind " + kind);
}

inline LinearBP load_program(const std::string& path) { return LinearBP::from_json(read_json(path)); }

// ---------------------------------------------------------------------------
// Verbs. Each add_* registers a subcommand whose callback sets `action`.

using Action = std::function<Outcome()>;

inline void add_condense(CLI::App& app, const Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("condense", "somewhere condensers: build and verify");
    cmd->require_subcommand(1);

    struct Opts {
        std::string kind = "affine", delta = "1/2", target, expander, out, condenser, gamma;
        std::size_t n = 8, d = 3, h = 0, k = 0;
        bool exhaustive = false;
        std::uint64_t samples = 0;
    };
    auto o = std::make_shared<Opts>();

    auto* build = cmd->add_subcommand("build", "build a condenser and write it as JSON");
    build->add_option("--kind", o->kind, "affine or general")->check(CLI::IsMember({"affine", "general"}));
    build->add_option("--n", o->n, "input bits");
    build->add_option("--delta", o->delta, "input rate");
    build->add_option("--target", o->target, "target rate; picks the number of steps");
    build->add_option("--steps", o->h, "number of condensing steps (overrides --target)");
    build->add_option("--d", o->d, "maps per expander");
    build->add_option("--expander", o->expander, "expander file for width n/2");
    build->add_option("--out", o->out, "condenser output file");
    build->callback([o, &g, &action] {
        action = [o, &g] {
            const bool general = o->kind == "general";
            const auto e0 = expander_for(o->n / 2, o->d, g.seed, o->expander, g);
            std::size_t h = o->h;
            if (h == 0) h = o->target.empty() ? 1 : std::max<std::size_t>(1, choose_steps(parse_rational(o->delta), parse_rational(o->target), e0.alpha, o->d));
            ExpanderFamily fam;
            std::size_t w = o->n;
            for (std::size_t s = 0; s < h; ++s, w /= 2) {
                if (w % 2) throw std::invalid_argument("n is not divisible by 2^h");
                fam.emplace(w / 2, w / 2 == e0.n ? e0 : expander_for(w / 2, o->d, g.seed, o->expander, g));
            }
            const auto C = h == 1 ? (general ? basic_gcond(fam.at(o->n / 2), o->n) : basic_cond(fam.at(o->n / 2), o->n))
                                  : (general ? sgcond(fam, o->n, h) : scond(fam, o->n, h));
            if (!o->out.empty()) write_file(o->out, C.to_json().dump(2) + "\n");
            json r{{"verb", "condense build"}, {"kind", to_string(C.kind)}, {"n", C.n_in}, {"h", C.h},
                   {"rows", C.rows()}, {"m_out", C.m_out}, {"alpha", to_string(e0.alpha)}, {"provenance", C.provenance}};
            if (o->out.empty()) r["condenser"] = C.to_json();
            return Outcome{r, true};
        };
    });

    auto* verify = cmd->add_subcommand("verify", "best-row rank over k-dim subspaces");
    verify->add_option("--condenser", o->condenser, "condenser file (else BasicCond at --n)");
    verify->add_option("--n", o->n, "input bits when building");
    verify->add_option("--d", o->d, "maps per expander when building");
    verify->add_option("--expander", o->expander, "expander file for width n/2");
    verify->add_option("--k", o->k, "subspace dimension")->required();
    verify->add_option("--gamma", o->gamma, "target output rate (default: the lemma's rate)");
    auto* ex = verify->add_flag("--exhaustive", o->exhaustive, "all k-dim subspaces");
    verify->add_option("--samples", o->samples, "random subspaces")->excludes(ex);
    verify->callback([o, &g, &action] {
        action = [o, &g] {
            SomewhereCondenser C;
            std::optional<DimExpander> e;
            if (!o->condenser.empty()) {
                C = SomewhereCondenser::from_json(read_json(o->condenser));
            } else {
                e = expander_for(o->n / 2, o->d, g.seed, o->expander, g);
                C = basic_cond(*e, o->n);
            }
            const Rational delta(static_cast<long>(o->k), static_cast<long>(C.n_in));
            Rational gamma = delta;
            if (!o->gamma.empty()) gamma = parse_rational(o->gamma);
            else if (e) gamma = lemma_rate(e->alpha, e->d(), delta);
            const auto rep = o->samples ? sample_affine_condenser(C, o->k, gamma, o->samples, g.seed)
                                        : verify_affine_condenser(C, o->k, gamma, g.make_budget(), g.workers);
            json r = rep.to_json();
            r["verb"] = "condense verify";
            if (e) r["alpha"] = to_string(e->alpha), r["expander_d"] = e->d();
            return Outcome{r, rep.pass};
        };
    });
}

inline void add_daext(CLI::App& app, const Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("daext", "the directional affine extractor pipeline");
    cmd->require_subcommand(1);
    struct Opts {
        std::string params = "statistical", input, trace, delta = "1", mode = "structural", preset, out;
        std::size_t n = 0;
    };
    auto o = std::make_shared<Opts>();

    auto* run = cmd->add_subcommand("run", "evaluate on one input");
    run->add_option("--params", o->params, "params file or preset (structural, statistical)");
    run->add_option("--input", o->input, "input as len:hex or hex")->required();
    run->add_option("--trace", o->trace, "write the per-stage trace here");
    run->callback([o, &g, &action] {
        action = [o, &g] {
            const Pipeline P(load_params(o->params));
            const BitVec x = parse_input(o->input, P.params().n);
            const auto res = P.core(x, true, g.workers);
            if (!o->trace.empty()) write_file(o->trace, res.trace.to_json().dump(2) + "\n");
            return Outcome{{{"verb", "daext run"}, {"n", P.params().n}, {"input", x.to_text()}, {"z", res.z.to_text()},
                            {"o", res.trace.o.to_text()}, {"mode", to_string(P.params().mode)}},
                           true};
        };
    });

    auto* params = cmd->add_subcommand("params", "emit a validated parameter record");
    params->add_option("--n", o->n, "input bits");
    params->add_option("--delta", o->delta, "entropy rate");
    params->add_option("--mode", o->mode, "structural or statistical")->check(CLI::IsMember({"structural", "statistical"}));
    params->add_option("--preset", o->preset, "structural or statistical toy")->check(CLI::IsMember({"structural", "statistical"}));
    params->add_option("--out", o->out, "write the record here");
    params->callback([o, &action] {
        action = [o] {
            PipelineParams p;
            if (!o->preset.empty()) p = load_params(o->preset);
            else if (o->n) p = PipelineParams::derive(o->n, parse_rational(o->delta), parse_pipeline_mode(o->mode));
            else throw std::invalid_argument("daext params needs --n or --preset");
            json r = p.to_json();
            if (!o->out.empty()) write_file(o->out, r.dump(2) + "\n");
            bool structural_ok = true;
            for (const auto& c : p.constraints())
                if (c.kind == "structural" && !c.held) structural_ok = false;
            r["verb"] = "daext params";
            r["structurally_valid"] = structural_ok;
            return Outcome{r, true};
        };
    });
}

inline void add_snmext(CLI::App& app, const Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("snmext", "seeded non-malleable extractor");
    cmd->require_subcommand(1);
    struct Opts {
        std::size_t n = 16, ksrc = 12, m = 1;
        std::string shift = "1";
    };
    auto o = std::make_shared<Opts>();
    auto* v = cmd->add_subcommand("verify", "exact non-malleability distance against y -> y + shift");
    v->add_option("--n", o->n, "source bits");
    v->add_option("--ksrc", o->ksrc, "source dimension (random affine source from --seed)");
    v->add_option("--shift", o->shift, "tamper shift, hex over n/2-1 seed bits");
    v->add_option("--m", o->m, "output bits (indices 1..m)");
    v->callback([o, &g, &action] {
        action = [o, &g] {
            Rng rng = make_rng(g.seed, 0xa11);
            GF2Matrix b;
            if (o->ksrc == o->n) b = GF2Matrix::identity(o->n);
            else
                do b = GF2Matrix::random(o->ksrc, o->n, rng);
                while (b.rank() != o->ksrc);
            const AffineSource X(b, o->ksrc == o->n ? BitVec(o->n) : random_bitvec(rng, o->n));
            const BitVec c = parse_input(o->shift, snm_seed_bits(o->n));
            const auto r = verify_nonmalleability(X, xor_tamper(c), snm_default_indices(o->m), g.make_budget(), g.workers);
            return Outcome{{{"verb", "snmext verify"},
                            {"n", o->n},
                            {"ksrc", o->ksrc},
                            {"m", o->m},
                            {"shift", c.to_text()},
                            {"distance", to_string(r.distance)},
                            {"distance_double", to_double(r.distance)},
                            {"strong_distance", to_string(r.strong_distance)},
                            {"seeds", r.seeds}},
                           true};
        };
    });
}

inline void add_cbreak(CLI::App& app, const Globals&, Action& action) {
    auto* cmd = app.add_subcommand("cbreak", "advice correlation breaker");
    cmd->require_subcommand(1);
    struct Opts {
        std::string params, x, y, id = "0";
    };
    auto o = std::make_shared<Opts>();
    auto load = [o] { return o->params.empty() ? CBParams::toy() : CBParams::from_json(read_json(o->params)); };

    auto* val = cmd->add_subcommand("validate", "print every constraint and its status");
    val->add_option("--params", o->params, "CBParams file (default: the 8-bit toy)");
    val->callback([load, &action] {
        action = [load] {
            const auto p = load();
            json cs = json::array();
            for (const auto& c : p.constraints()) cs.push_back({{"name", c.name}, {"kind", c.kind}, {"held", c.held}, {"detail", c.detail}});
            return Outcome{{{"verb", "cbreak validate"},
                            {"params", p.to_json()},
                            {"constraints", cs},
                            {"structurally_valid", p.structurally_valid()},
                            {"theorem_valid", p.theorem_valid()}},
                           p.structurally_valid()};
        };
    });

    auto* run = cmd->add_subcommand("run", "ldACB(x, y, id)");
    run->add_option("--params", o->params, "CBParams file (default: the 8-bit toy)");
    run->add_option("--x", o->x, "source")->required();
    run->add_option("--y", o->y, "seed")->required();
    run->add_option("--id", o->id, "advice");
    run->callback([o, load, &action] {
        action = [o, load] {
            const auto p = load();
            p.validate();
            const BitVec z = ldacb(parse_input(o->x, p.n), parse_input(o->y, p.d), parse_input(o->id, p.a), p);
            return Outcome{{{"verb", "cbreak run"}, {"output", z.to_text()}}, true};
        };
    });
}

inline void add_lbp(CLI::App& app, const Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("lbp", "linear branching programs");
    cmd->require_subcommand(1);
    struct Opts {
        std::string program, input, f, kind = "subspace", out;
        std::size_t n = 16, k = 8, d = 0, w = 2;
        std::uint64_t samples = 0;
    };
    auto o = std::make_shared<Opts>();

    auto* build = cmd->add_subcommand("build", "write a program file");
    build->add_option("--kind", o->kind, "subspace, parity or tribes")->check(CLI::IsMember({"subspace", "parity", "tribes"}));
    build->add_option("--n", o->n, "variables");
    build->add_option("--k", o->k, "subspace dimension");
    build->add_option("--w", o->w, "tribe width");
    build->add_option("--out", o->out, "program file");
    build->callback([o, &g, &action] {
        action = [o, &g] {
            LinearBP P;
            json r{{"verb", "lbp build"}, {"kind", o->kind}};
            if (o->kind == "subspace") {
                Rng rng = make_rng(g.seed, 0x5b);
                GF2Matrix B;
                do B = GF2Matrix::random(o->k, o->n, rng);
                while (B.rank() != o->k);
                P = subspace_indicator_srolbp(B, random_bitvec(rng, o->n));
            } else if (o->kind == "parity") {
                std::vector<std::size_t> vars(o->n);
                for (std::size_t i = 0; i < o->n; ++i) vars[i] = i;
                P = parity_robp(o->n, vars);
            } else {
                P = tribes_robp(o->n, o->w, o->n / o->w);
            }
            if (!o->out.empty()) write_file(o->out, P.to_json().dump(2) + "\n");
            else r["program"] = P.to_json();
            r["size"] = P.size();
            return Outcome{r, true};
        };
    });

    auto* eval = cmd->add_subcommand("eval", "evaluate on one input");
    eval->add_option("--program", o->program, "program file")->required();
    eval->add_option("--input", o->input, "len:hex or hex")->required();
    eval->callback([o, &action] {
        action = [o] {
            const auto P = load_program(o->program);
            const BitVec x = parse_input(o->input, P.n);
            return Outcome{{{"verb", "lbp eval"}, {"input", x.to_text()}, {"output", P.eval(x) ? 1 : 0}}, true};
        };
    });

    auto* val = cmd->add_subcommand("validate", "strong and weak read-once checks");
    val->add_option("--program", o->program, "program file")->required();
    val->callback([o, &action] {
        action = [o] {
            const auto P = load_program(o->program);
            const auto s = is_strongly_read_once(P), w = is_weakly_read_once(P);
            return Outcome{{{"verb", "lbp validate"}, {"size", P.size()}, {"strong", s.to_json()}, {"weak", w.to_json()}}, true};
        };
    });

    auto* cor = cmd->add_subcommand("correlate", "agreement of the program with a function");
    cor->add_option("--program", o->program, "program file")->required();
    cor->add_option("--f", o->f, "builtin:NAME, file:TT, structured:FILE")->required();
    cor->add_option("--samples", o->samples, "sampled mode (default exhaustive)");
    cor->callback([o, &g, &action] {
        action = [o, &g] {
            const auto P = load_program(o->program);
            const auto f = load_function(o->f, P.n);
            if (f.n != P.n || f.m != 1) throw std::invalid_argument("correlate: f must be a 1-bit function on n inputs");
            const auto rep = o->samples ? correlation_sampled(P, [&](const BitVec& x) { return f(x.to_u64()) != 0; }, o->samples, g.seed)
                                        : correlation_exhaustive(P, [&](std::uint64_t x) { return f(x) != 0; }, g.workers, g.make_budget());
            json r = rep.to_json();
            r["verb"] = "lbp correlate";
            r["f"] = f.name;
            return Outcome{r, true};
        };
    });

    auto* cut = cmd->add_subcommand("cut", "events after n - d reads");
    cut->add_option("--program", o->program, "program file")->required();
    cut->add_option("--d", o->d, "free variables")->required();
    cut->callback([o, &action] {
        action = [o] {
            const auto P = load_program(o->program);
            const auto ev = robp_cut(P, o->d);
            Rational total = 0;
            json es = json::array();
            for (const auto& e : ev) total += e.probability, es.push_back(e.to_json());
            return Outcome{{{"verb", "lbp cut"}, {"d", o->d}, {"events", es}, {"total_probability", to_string(total)}}, total == 1};
        };
    });

    auto* sep = cmd->add_subcommand("separation-demo", "subspace indicator vs a catalog of ROBPs");
    sep->add_option("--n", o->n, "variables");
    sep->callback([o, &g, &action] {
        action = [o, &g] {
            json r = separation_demo(o->n, g.seed, g.workers);
            r["verb"] = "lbp separation-demo";
            const bool ok = r.at("strongly_read_once").get<bool>() && r.at("membership_mismatches").get<std::uint64_t>() == 0;
            return Outcome{r, ok};
        };
    });
}

inline void add_injector(CLI::App& app, const Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("injector", "sumset linear injectors");
    cmd->require_subcommand(1);
    struct Opts {
        std::size_t n = 6, k1 = 2, k2 = 2, d = 5, m = 24, k = 0, candidates = 4;
        std::string file, out;
    };
    auto o = std::make_shared<Opts>();
    auto shape = [o](CLI::App* c) {
        c->add_option("--n", o->n, "input bits");
        c->add_option("--k1", o->k1, "first subspace dimension");
        c->add_option("--k2", o->k2, "second subspace dimension");
        c->add_option("--d", o->d, "output bits per matrix");
        c->add_option("--m", o->m, "number of matrices");
    };

    auto* sample = cmd->add_subcommand("sample", "draw a family from --seed");
    shape(sample);
    sample->add_option("--out", o->out, "injector file");
    sample->callback([o, &g, &action] {
        action = [o, &g] {
            const auto J = sample_injector(o->n, o->k1, o->k2, o->d, o->m, g.seed);
            if (!o->out.empty()) write_file(o->out, J.to_json().dump(2) + "\n");
            json r{{"verb", "injector sample"}, {"n", J.n}, {"k1", J.k1}, {"k2", J.k2}, {"d", J.d}, {"m", J.m()}};
            if (o->out.empty()) r["injector"] = J.to_json();
            return Outcome{r, true};
        };
    });

    auto* verify = cmd->add_subcommand("verify", "exhaustive certification");
    shape(verify);
    verify->add_option("--injector", o->file, "injector file (else sample from --seed)");
    verify->callback([o, &g, &action] {
        action = [o, &g] {
            auto J = o->file.empty() ? sample_injector(o->n, o->k1, o->k2, o->d, o->m, g.seed)
                                     : SumsetInjector::from_json(read_json(o->file));
            const auto c = verify_injector(J, g.make_budget());
            json r = c.to_json(J.n);
            r["verb"] = "injector verify";
            r["shape"] = {{"n", J.n}, {"k1", J.k1}, {"k2", J.k2}, {"d", J.d}, {"m", J.m()}};
            return Outcome{r, c.ok};
        };
    });

    auto* search = cmd->add_subcommand("search", "best structured function by exact joint bias");
    search->add_option("--n", o->n, "input bits");
    search->add_option("--k", o->k, "subspace dimension")->required();
    search->add_option("--candidates", o->candidates, "tables to try");
    search->add_option("--injector", o->file, "injector file (else the default shape from --seed)");
    search->add_option("--out", o->out, "write the best structured function here");
    search->callback([o, &g, &action] {
        action = [o, &g] {
            auto J = o->file.empty() ? default_search_injector(o->n, o->k, g.seed) : SumsetInjector::from_json(read_json(o->file));
            auto res = search_optimal_daext(J, o->k, o->candidates, g.seed, g.make_budget(), g.workers);
            // Certify the winner's injector when it fits what is left of the budget.
            try {
                verify_injector(res.best.injector, g.make_budget());
            } catch (const BudgetExceeded&) {
            }
            if (!o->out.empty()) write_file(o->out, res.best.to_json().dump(2) + "\n");
            json r = res.to_json();
            if (!o->out.empty()) r.erase("function");
            r["verb"] = "injector search";
            return Outcome{r, true};
        };
    });
}

inline void add_verify(CLI::App& app, const Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("verify", "exact and sampled extractor measurements");
    cmd->require_subcommand(1);
    struct Opts {
        std::string f, mode = "exhaustive", property = "xor_bias";
        std::size_t n = 0, k = 0;
        std::uint64_t tuples = 0, points = 1024;
        bool linear_only = false;
    };
    auto o = std::make_shared<Opts>();
    auto common = [o](CLI::App* c, bool needs_k) {
        c->add_option("--f", o->f, "builtin:NAME, file:TT, pipeline:PARAMS, structured:FILE")->required();
        c->add_option("--n", o->n, "input bits (builtin functions)");
        auto* k = c->add_option("--k", o->k, "subspace dimension");
        if (needs_k) k->required();
    };
    auto modal = [o](CLI::App* c) {
        c->add_option("--mode", o->mode, "exhaustive or sampled")->check(CLI::IsMember({"exhaustive", "sampled"}));
        c->add_option("--tuples", o->tuples, "sampled: random tuples (0 = every tuple)");
        c->add_option("--points", o->points, "sampled: points per tuple");
        c->add_flag("--linear-only", o->linear_only, "only subspaces through the origin");
    };
    auto mode_of = [o, &g] {
        return o->mode == "sampled" ? VerifyMode::sampled(o->tuples, o->points, g.seed) : VerifyMode::exhaustive();
    };
    auto options = [o, &g] {
        DirectionalOptions d;
        d.linear_only = o->linear_only;
        d.workers = g.workers;
        d.budget = g.make_budget();
        return d;
    };
    auto finish = [](const VerifyReport& rep, const BoolFn& f, const std::string& verb) {
        json r = rep.to_json();
        r["verb"] = verb;
        r["f"] = f.name;
        return Outcome{r, rep.held};
    };

    auto* dir = cmd->add_subcommand("directional", "max bias of f(x) against f(x + a) on affine sources");
    common(dir, true);
    modal(dir);
    dir->add_option("--property", o->property, "xor_bias or joint")->check(CLI::IsMember({"xor_bias", "joint"}));
    dir->callback([=, &action] {
        action = [=] {
            const auto f = load_function(o->f, o->n);
            return finish(directional_bias(f, o->k, o->property, mode_of(), options()), f, "verify directional");
        };
    });

    auto* aff = cmd->add_subcommand("affine", "max distance of f from uniform on affine sources");
    common(aff, true);
    modal(aff);
    aff->callback([=, &action] {
        action = [=] {
            const auto f = load_function(o->f, o->n);
            return finish(affine_extractor_distance(f, o->k, mode_of(), options()), f, "verify affine");
        };
    });

    auto* dis = cmd->add_subcommand("disperser", "f(x) + f(x + a) takes both values on every source");
    common(dis, true);
    dis->callback([=, &action] {
        action = [=] {
            const auto f = load_function(o->f, o->n);
            return finish(disperser_check(f, o->k, options()), f, "verify disperser");
        };
    });

    auto* eps = cmd->add_subcommand("epsbias", "subset biases of the output bits under uniform input");
    common(eps, false);
    eps->callback([=, &action] {
        action = [=] {
            const auto f = load_function(o->f, o->n);
            return finish(eps_bias_check(f.table, f.m), f, "verify epsbias");
        };
    });
}

// ---------------------------------------------------------------------------
// Entry points

struct CliResult {
    int code = 0;
    json report;  // null when the invocation failed before producing one
    std::string error;
};

/// Parses argv (without the program name) and runs the selected verb.
/// Help and parse errors go to `out` / `err` with CLI11's exit codes.
inline CliResult invoke(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline json run_campaign_file(const std::string& file, const std::string& out_override, const Globals& g, bool& ok);

inline void add_campaign(CLI::App& app, Globals& g, Action& action) {
    auto* cmd = app.add_subcommand("campaign", "run a campaign file");
    auto file = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("file", *file, "campaign JSON")->required();
    cmd->add_option("--out", *out, "output directory (overrides the file)");
    cmd->callback([file, out, &g, &action] {
        action = [file, out, &g] {
            bool ok = true;
            json index = run_campaign_file(*file, *out, g, ok);
            index["verb"] = "campaign";
            return Outcome{index, ok};
        };
    });
}

inline void print_report(const json& r, bool as_json, std::ostream& out) {
    if (as_json) {
        out << r.dump(2) << "\n";
        return;
    }
    for (const auto& [key, v] : r.items()) {
        if (v.is_structured()) {
            const std::string s = v.dump();
            out << key << ": " << (s.size() > 120 ? s.substr(0, 117) + "..." : s) << "\n";
        } else {
            out << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
        }
    }
}

inline CliResult invoke(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gf2lab: affine extractors, condensers and branching programs over GF(2)", "gf2lab"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "global seed")->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads (default: available parallelism)");
    app.add_option("--budget", g.budget, "work budget, an integer or 2^N")->capture_default_str();
    app.add_flag("--json", g.json_out, "print the report as JSON");
    Action action;
    add_condense(app, g, action);
    add_daext(app, g, action);
    add_snmext(app, g, action);
    add_cbreak(app, g, action);
    add_lbp(app, g, action);
    add_injector(app, g, action);
    add_verify(app, g, action);
    add_campaign(app, g, action);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return {app.exit(e, out, err), nullptr, e.what()};
    }
    if (g.workers == 0) g.workers = 1;
    try {
        Outcome o = action();
        print_report(o.report, g.json_out, out);
        return {o.ok ? 0 : 1, o.report, ""};
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return {2, nullptr, e.what()};
    }
}

// ---------------------------------------------------------------------------
// Campaigns
//
// {"seed": S, "output_dir": DIR, "steps": [{"verb": V, "args": [...], "expect": {"/json/pointer": value},
//                                          "check": "pass" | "fail" | "any"}]}
// Step i writes DIR/NN-verb.json; DIR/index.json records every step's status.
// "check" states how the verb's own pass flag must come out (default pass).

inline bool has_flag(const std::vector<std::string>& v, const std::string& f) {
    return std::find(v.begin(), v.end(), f) != v.end();
}

inline json run_campaign(const json& c, const std::string& out_dir, const Globals& g, bool& ok) {
    const std::uint64_t seed = c.value("seed", g.seed);
    const std::string dir = out_dir.empty() ? c.value("output_dir", std::string("campaign_out")) : out_dir;
    std::filesystem::create_directories(dir);
    json index{{"seed", seed}, {"steps", json::array()}};
    ok = true;
    std::size_t i = 0;
    const json steps = c.value("steps", json::array());
    for (const auto& step : steps) {
        ++i;
        if (!step.contains("verb") || (step.contains("expect") && !step["expect"].is_object()))
            throw std::invalid_argument("campaign step " + std::to_string(i) + ": needs a verb, and expect must be an object");
        const std::string verb = step.at("verb");
        std::vector<std::string> args{verb};
        const json step_args = step.value("args", json::array());
        for (const auto& a : step_args) args.push_back(a.is_string() ? a.get<std::string>() : a.dump());
        if (!has_flag(args, "--seed")) args.insert(args.end(), {"--seed", std::to_string(seed)});
        if (!has_flag(args, "--workers")) args.insert(args.end(), {"--workers", std::to_string(g.workers)});
        if (!has_flag(args, "--budget")) args.insert(args.end(), {"--budget", g.budget});
        std::ostringstream sink, errs;
        const CliResult res = invoke(args, sink, errs);
        std::ostringstream name;
        name << std::setw(2) << std::setfill('0') << i << "-" << verb << ".json";
        json rec{{"index", i}, {"verb", verb}, {"args", step_args}, {"file", name.str()}};
        json failures = json::array();
        if (res.report.is_null()) {
            failures.push_back({{"kind", "error"}, {"message", res.error}});
        } else {
            write_file((std::filesystem::path(dir) / name.str()).string(), res.report.dump(2) + "\n");
            const std::string want_check = step.value("check", std::string("pass"));
            if (want_check != "pass" && want_check != "fail" && want_check != "any")
                throw std::invalid_argument("campaign step " + std::to_string(i) + ": check must be pass, fail or any");
            if (want_check == "pass" && res.code != 0)
                failures.push_back({{"kind", "check"}, {"message", "the verb's own check failed"}});
            if (want_check == "fail" && res.code == 0)
                failures.push_back({{"kind", "check"}, {"message", "the verb's own check was expected to fail"}});
            const json expect = step.value("expect", json::object());
            for (const auto& [ptr, want] : expect.items()) {
                const json::json_pointer p(ptr);
                const bool present = res.report.contains(p);
                if (!present || res.report.at(p) != want)
                    failures.push_back({{"kind", "expect"}, {"pointer", ptr}, {"expected", want},
                                        {"actual", present ? res.report.at(p) : json(nullptr)}});
            }
        }
        rec["ok"] = failures.empty();
        if (!failures.empty()) rec["failures"] = failures, ok = false;
        index["steps"].push_back(rec);
    }
    index["ok"] = ok;
    write_file((std::filesystem::path(dir) / "index.json").string(), index.dump(2) + "\n");
    return index;
}

inline json run_campaign_file(const std::string& file, const std::string& out_override, const Globals& g, bool& ok) {
    return run_campaign(read_json(file), out_override, g, ok);
}

}  // namespace gf2lab::cli
