#include "adelic/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <ostream>
#include <random>
#include <regex>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "adelic/error.hpp"
#include "adelic/hypcheck.hpp"
#include "adelic/imageanalysis.hpp"
#include "adelic/selftest.hpp"

namespace adelic {

using nlohmann::json;

namespace {

struct PrimeRange {
    i64 lo = 5, hi = 50;
};

std::optional<PrimeRange> parse_range(const std::string& s) {
    static const std::regex re(R"((\d+)\.\.(\d+))");
    std::smatch m;
    if (!std::regex_match(s, m, re)) return std::nullopt;
    PrimeRange r{std::stoll(m[1]), std::stoll(m[2])};
    if (r.lo < 2 || r.lo > r.hi || r.hi > 100000) return std::nullopt;
    return r;
}

std::vector<i64> primes_in(const PrimeRange& r) {
    std::vector<i64> out;
    for (i64 p : primes_upto(r.hi))
        if (p >= r.lo) out.push_back(p);
    return out;
}

// runs fn(i) for i < n on a small pool; results are written by index so order is fixed
template <class F>
void parallel_for(std::size_t n, int workers, F fn) {
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto run = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

Newform resolve_form(const std::string& s, LmfdbClient& client) {
    if (std::filesystem::is_regular_file(s)) return load_newform_file(s);
    return load_newform_file(client.fetch(s));
}

i64 effective_bound(const Newform& f, i64 requested) {
    i64 B = requested ? requested : std::min<i64>(f.bound, 2000);
    if (B < 37) throw Error(ErrorCode::InvalidArgument, "coefficient bound must be at least 37");
    return B;
}

json form_summary(const Newform& f) {
    json poly = json::array();
    for (auto& c : f.field.poly()) poly.push_back(c.get_str());
    json j = {{"label", f.label},
              {"level", f.level},
              {"weight", f.weight},
              {"character", character_to_json(f.character)},
              {"character_order", f.character.order()},
              {"field_poly", poly},
              {"degree", f.field.degree()},
              {"coefficient_bound", f.bound},
              {"warnings", f.warnings}};
    if (f.cm_disc) j["cm_disc"] = *f.cm_disc;
    return j;
}

json twist_group_json(const InnerTwistGroup& G, i64 B) {
    json els = json::array();
    for (auto& t : G.elements())
        els.push_back({{"gamma", qelem_to_json(t.gamma.image)},
                       {"chi", character_to_json(t.chi)},
                       {"conductor", char_conductor(t.chi)},
                       {"order", t.chi.order()}});
    return {{"evidence_bound", B}, {"order", G.order()}, {"elements", els}, {"modulus", G.modulus()}};
}

json error_json(const Error& e) { return {{"error", std::string(error_name(e.code()))}, {"message", e.what()}}; }

void emit(const json& report, std::ostream& out, const std::string& json_out) {
    std::string s = report.dump(2);
    if (!json_out.empty()) {
        std::ofstream f(json_out);
        if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + json_out);
        f << s << "\n";
    }
    out << s << "\n";
}

json tool_json() { return {{"name", "adelic-image"}, {"version", kToolVersion}}; }

// ---------------------------------------------------------------- analyze

json analyze_prime(const Newform& f, const InnerTwistGroup& G, i64 p, std::uint64_t seed) {
    json e = {{"p", p}};
    DaggerSpec spec;
    try {
        spec = dagger_spec(f, G, p);
    } catch (const Error& err) {
        e["skipped"] = error_json(err);
        return e;
    }
    json blocks = json::array();
    double work = 1;
    for (auto& R : spec.blocks) {
        blocks.push_back(R.size());
        work *= std::pow(static_cast<double>(R.size()), 4);
    }
    e["dagger"] = {{"blocks", blocks}, {"order", dagger_order(spec)}};
    if (work <= 2e7) e["dagger"]["bruteforce_order"] = dagger_order_bruteforce(spec);

    i64 M = G.modulus();
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(p));
    std::uniform_int_distribution<i64> pick(1, M);
    std::set<i64> us;
    for (int tries = 0; us.size() < 3 && tries < 1000; ++tries) {
        i64 u = pick(rng) % M;
        if (std::gcd(u, M * f.level) == 1) us.insert(u);
    }
    auto P = residue_primes(f.field, p).front();
    json pap = json::array();
    for (i64 u : us) {
        try {
            auto s = papier_coset(f, G, P, u);
            pap.push_back({{"prime", P.str()},
                           {"u", u},
                           {"alpha", s.alpha},
                           {"coset", mat::to_string(s.coset)},
                           {"residue_generator", s.generator},
                           {"conditions", s.conditions.size()},
                           {"verified", papier_verify(f.field, s, f)}});
        } catch (const Error& err) {
            json x = error_json(err);
            x["u"] = u;
            pap.push_back(x);
        }
    }
    e["papier"] = pap;
    return e;
}

int cmd_analyze(const std::string& form, const PrimeRange& range, i64 bound, const std::string& json_out,
                LmfdbClient& client, std::uint64_t seed, int workers, std::ostream& out) {
    Newform f = resolve_form(form, client);
    i64 B = effective_bound(f, bound);
    InnerTwistGroup G = detect_inner_twists(f, f.automorphisms, B);
    json report = {{"tool", tool_json()},
                   {"command", "analyze"},
                   {"inputs", {{"form", form}, {"primes", {range.lo, range.hi}}, {"bound", B}, {"seed", seed}}},
                   {"form", form_summary(f)},
                   {"inner_twists", twist_group_json(G, B)}};
    if (!f.character.is_trivial()) {
        auto c = complex_conjugation(f);
        json cj = {{"found", c.has_value()}};
        if (c) {
            auto chk = verify_inner_twist(f, {*c, char_inverse(f.character)}, B);
            cj["verified"] = chk.ok;
            cj["in_group"] = G.find({*c, char_inverse(f.character).extend(G.modulus())}).has_value();
            if (chk.first_failure) cj["first_failure"] = *chk.first_failure;
        }
        report["conjugate_twist"] = cj;
    }
    auto st = detect_self_twist(f, B);
    report["self_twist"] = st ? json{{"disc", quadratic_discriminant(*st)}, {"conductor", char_conductor(*st)}} : json(nullptr);

    auto ps = primes_in(range);
    std::vector<json> rows(ps.size());
    parallel_for(ps.size(), workers, [&](std::size_t i) { rows[i] = analyze_prime(f, G, ps[i], seed); });
    report["primes"] = rows;
    report["assumptions"] = {"local images equal the dagger group at every listed prime (open image theorem)",
                             "inner twists and CM are evidence at the coefficient bound, not proofs"};
    report["conclusion"] = "image of the Galois representation is open in G(adeles), conditional on the assumptions";
    emit(report, out, json_out);
    return 0;
}

// ---------------------------------------------------------------- pair

std::optional<LocalImageReport> synthetic_local_image(const Newform& f, const Newform& g, const InnerTwistGroup& Gf,
                                                      const InnerTwistGroup& Gg, i64 p, bool entangled) {
    DaggerSpec sf = dagger_spec(f, Gf, p), sg = dagger_spec(g, Gg, p);
    PairSpec ps{p, sf.blocks, sg.blocks, f.weight, g.weight};
    bool small = ps.f_blocks.size() == 1 && ps.g_blocks.size() == 1 && fibre_order(ps) <= 1'000'000;
    LocalImageReport rep;
    rep.p = p;
    if (!small) {
        if (entangled) {
            rep.verdict = LocalVerdict::Unknown;
            rep.evidence.push_back("entangled synthetic image too large to enumerate");
        } else {
            rep.verdict = LocalVerdict::FullDagger;
            rep.evidence.push_back("fibre product of order " + std::to_string(fibre_order(ps)) +
                                   " not enumerated; open image theorem conclusion assumed");
        }
        return rep;
    }
    std::vector<Elem> gens = fibre_generators(ps);
    if (entangled) {
        if ((ps.kf - ps.kg) % 2 || ps.f_blocks[0] != ps.g_blocks[0]) {
            rep.verdict = LocalVerdict::Unknown;
            rep.evidence.push_back("no scalar pattern for these weights or residue fields");
            return rep;
        }
        const FiniteRing& R = ps.f_blocks[0];
        Ambient amb = pair_ambient(ps);
        i64 g0 = FiniteRing::field_of_degree(p, 1).canonical_generator();
        int e = (ps.kf - ps.kg) / 2;
        Mat2 d = mat::diag(R, powmod(invmod(g0, p), static_cast<u64>(ps.kf - 1), p), 1);
        gens = {{d, mat::scale(R, powmod(g0, static_cast<u64>(mod(e, p - 1)), p), d), mat::diag(amb.back().ring, g0, 1)}};
        for (int j = 0; j < R.n(); ++j) {
            i64 x = ipow(p, static_cast<unsigned>(j));
            gens.push_back({Mat2{1, x, 0, 1}, Mat2{1, x, 0, 1}, mat::identity(amb.back().ring)});
            gens.push_back({Mat2{1, 0, x, 1}, Mat2{1, 0, x, 1}, mat::identity(amb.back().ring)});
        }
    }
    auto U = closure(gens, pair_ambient(ps));
    rep = pair_entanglement_classify(U, ps);
    rep.evidence.push_back(entangled ? "synthetic graph image" : "synthetic full fibre product");
    return rep;
}

int cmd_pair(const std::string& fs, const std::string& gs, const PrimeRange& range, i64 bound, bool hyp,
             const std::string& composite_path, const std::string& json_out, LmfdbClient& client, std::uint64_t seed,
             int workers, std::ostream& out) {
    Newform f = resolve_form(fs, client), g = resolve_form(gs, client);
    i64 B = std::min(effective_bound(f, bound), effective_bound(g, bound));
    InnerTwistGroup Gf = detect_inner_twists(f, f.automorphisms, B);
    InnerTwistGroup Gg = detect_inner_twists(g, g.automorphisms, B);
    std::optional<CompositeField> comp;
    if (!composite_path.empty()) {
        std::ifstream in(composite_path);
        if (!in) throw Error(ErrorCode::SchemaError, "cannot read " + composite_path);
        json cj;
        try {
            in >> cj;
            comp = composite_from_json(cj, f, g);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaError, composite_path + ": " + e.what());
        }
    }
    json report = {{"tool", tool_json()},
                   {"command", "pair"},
                   {"inputs",
                    {{"f", fs}, {"g", gs}, {"primes", {range.lo, range.hi}}, {"bound", B}, {"hyp", hyp}, {"seed", seed}}},
                   {"forms", {form_summary(f), form_summary(g)}},
                   {"inner_twists", {twist_group_json(Gf, B), twist_group_json(Gg, B)}}};

    bool degenerate = false;
    json ev = json::array();
    for (auto& gm : g.automorphisms) {
        try {
            auto t = twist_relation_evidence(f, g, gm, B, comp);
            degenerate = degenerate || (t.tested > 0 && t.matched == t.tested);
            json x = {{"gamma", qelem_to_json(gm.image)}, {"matched", t.matched}, {"tested", t.tested}};
            if (t.counterexample) x["counterexample"] = *t.counterexample;
            ev.push_back(x);
        } catch (const Error& e) {
            ev.push_back(error_json(e));
        }
    }
    report["twist_evidence"] = ev;
    report["headline"] = degenerate ? "twist-degenerate: g is a twist of a conjugate of f (evidence)"
                                    : "open: the image of H is open in G(adeles), conditional on the assumptions";

    std::set<i64> candidates;
    bool all_primes = false;
    {
        const Newform& hi = f.weight >= g.weight ? f : g;
        const Newform& lo = f.weight >= g.weight ? g : f;
        const InnerTwistGroup& Ghi = f.weight >= g.weight ? Gf : Gg;
        const InnerTwistGroup& Glo = f.weight >= g.weight ? Gg : Gf;
        i64 lb = std::min<i64>(200, B);
        try {
            std::optional<CompositeField> c2 = comp;
            if (c2 && &hi != &f) std::swap(c2->embed_f, c2->embed_g);
            auto s = exceptional_prime_scan(hi, lo, Ghi, Glo, lo.automorphisms, lb, 1000, c2);
            all_primes = s.all_primes;
            candidates.insert(s.candidates.begin(), s.candidates.end());
            report["exceptional_scan"] = {{"l_bound", lb},
                                          {"p_bound", 1000},
                                          {"tested_l", s.norms.size()},
                                          {"all_primes_candidate", s.all_primes},
                                          {"candidates", s.candidates}};
        } catch (const Error& e) {
            report["exceptional_scan"] = error_json(e);
        }
    }

    FormProfile pf = profile_of(f, Gf), pg = profile_of(g, Gg);
    auto ps = primes_in(range);
    std::vector<json> rows(ps.size());
    std::vector<std::optional<LocalImageReport>> locals(ps.size());
    parallel_for(ps.size(), workers, [&](std::size_t i) {
        i64 p = ps[i];
        auto gp = good_prime(pf, pg, p);
        bool exceptional = all_primes || degenerate || candidates.count(p);
        gp.scan_support = !exceptional;
        json row = {{"p", p}, {"good_prime", gp.to_json()}};
        if (gp.good()) {
            try {
                locals[i] = synthetic_local_image(f, g, Gf, Gg, p, exceptional);
                row["local_image"] = locals[i]->to_json();
            } catch (const Error& e) {
                row["local_image"] = error_json(e);
            }
            if (hyp) {
                json h;
                auto guard = [&](const char* name, auto fn) {
                    try {
                        HypStatus st = fn();
                        if (st.holds_T == Tri::Yes && st.holds_V != Tri::Yes)
                            throw Error(ErrorCode::InvalidArgument, "T verdict without V verdict");
                        h[name] = st.to_json();
                    } catch (const Error& e) {
                        h[name] = error_json(e);
                    }
                };
                guard("existence_tau", [&] { return check_existence_tau(pf, pg, p); });
                guard("existence_tau_II", [&] { return check_existence_tau_II(pf, pg, p); });
                if (g.cm_disc) guard("cm", [&] { return check_cm_case(pf, pg, p); });
                if (g.weight == 1) guard("weight_one", [&] { return check_weight_one(pf, pg, p, !exceptional); });
                row["hyp"] = h;
            }
        }
        rows[i] = row;
    });
    report["primes"] = rows;

    std::vector<LocalImageReport> reps;
    std::vector<i64> S;
    for (auto& l : locals)
        if (l) reps.push_back(*l), S.push_back(l->p);
    auto audit = adelic_openness_audit(reps, S, DetImage{});
    json aj = {{"open", audit.open}, {"index_bound", audit.index_bound}, {"notes", audit.notes}, {"primes", S}};
    aj["failing"] = audit.failing ? json(*audit.failing) : json(nullptr);
    report["audit"] = aj;
    if (hyp) {
        auto neg = negative_check(f.character, g.character, 5);
        report["negative_check"] = {{"applies", neg.applies}, {"q", neg.q}, {"pairs", neg.pairs}, {"violations", neg.violations}};
    }
    report["assumptions"] = {"local images equal the dagger group outside the audited primes (open image theorem)",
                             "conclusion of the pair open image theorem at good primes not flagged by the scan",
                             "tau is represented by its image pair; the Galois lift is assumed",
                             "twist relations and CM are evidence at the coefficient bound"};
    emit(report, out, json_out);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::shared_ptr<Transport> transport) {
    CLI::App app{"Adelic open image and Hyp checks for pairs of modular forms", "adelic-image"};
    std::string cache_dir;
    bool offline = false;
    std::uint64_t seed = 1;
    int workers = 0;
    app.add_option("--cache-dir", cache_dir, "response cache directory");
    app.add_flag("--offline", offline, "never touch the network");
    app.add_option("--seed", seed, "seed for sampled choices");
    app.add_option("--workers", workers, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
    app.require_subcommand(1);

    auto range_check = CLI::Validator(
        [](std::string& s) { return parse_range(s) ? std::string() : "expected A..B with 2 <= A <= B"; }, "A..B");

    std::string label;
    auto* fetch = app.add_subcommand("fetch", "download and cache a newform by label");
    fetch->add_option("label", label)->required();

    std::string form, primes = "5..50", json_out;
    i64 bound = 0;
    auto* analyze = app.add_subcommand("analyze", "single form report");
    analyze->add_option("form", form, "label or JSON file")->required();
    analyze->add_option("--primes", primes)->check(range_check);
    analyze->add_option("--bound", bound);
    analyze->add_option("--json", json_out);

    std::string f2, g2, composite;
    bool hyp = false;
    auto* pair = app.add_subcommand("pair", "pair report");
    pair->add_option("f", f2)->required();
    pair->add_option("g", g2)->required();
    pair->add_option("--primes", primes)->check(range_check);
    pair->add_option("--bound", bound);
    pair->add_option("--json", json_out);
    pair->add_option("--composite", composite, "composite field presentation (JSON)");
    pair->add_flag("--hyp", hyp);

    std::string suite;
    auto* selftest = app.add_subcommand("selftest", "exhaustive self checks");
    selftest->add_option("suite", suite)->required()->check(CLI::IsMember(selftest_suites()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    try {
        std::filesystem::path cache = cache_dir.empty() ? default_cache_dir() : std::filesystem::path(cache_dir);
        LmfdbClient client(cache, offline, transport);
        if (*fetch) {
            auto path = client.fetch(label);
            load_newform_file(path);
            out << json{{"command", "fetch"}, {"label", label}, {"path", path.string()}}.dump(2) << "\n";
            return 0;
        }
        PrimeRange range = *parse_range(primes);
        if (*analyze) return cmd_analyze(form, range, bound, json_out, client, seed, workers, out);
        if (*pair) return cmd_pair(f2, g2, range, bound, hyp, composite, json_out, client, seed, workers, out);
        if (*selftest) {
            SuiteResult r = run_selftest(suite, seed);
            out << r.to_json().dump(2) << "\n";
            return r.failures == 0 ? 0 : 1;
        }
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace adelic
