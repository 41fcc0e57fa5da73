#include "adelic/selftest.hpp"

#include <random>
#include <unordered_set>

#include "adelic/error.hpp"
#include "adelic/finitegroups.hpp"
#include "adelic/hypcheck.hpp"
#include "adelic/imageanalysis.hpp"

namespace adelic {

nlohmann::json SuiteResult::to_json() const {
    return {{"suite", suite}, {"cases", cases}, {"failures", failures}, {"details", details}};
}

const std::vector<std::string>& selftest_suites() {
    static const std::vector<std::string> s{"lifting", "goursat", "negative-hyp", "counterexample", "dagger-orders", "papier"};
    return s;
}

SuiteResult run_selftest(const std::string& suite, std::uint64_t seed) {
    if (suite == "lifting") {
        SuiteResult a = selftest_lifting(seed), b = selftest_lifting_product(seed);
        a.cases += b.cases;
        a.failures += b.failures;
        a.details["product"] = b.details;
        return a;
    }
    if (suite == "goursat") return selftest_goursat();
    if (suite == "negative-hyp") return selftest_negative_hyp();
    if (suite == "counterexample") return selftest_counterexample();
    if (suite == "dagger-orders") return selftest_dagger_orders();
    if (suite == "papier") return selftest_papier();
    throw Error(ErrorCode::InvalidArgument, "unknown selftest suite '" + suite + "'");
}

namespace {

Mat2 random_sl2(const FiniteRing& R, std::mt19937_64& rng) {
    std::uniform_int_distribution<i64> d(0, R.size() - 1);
    for (;;) {
        i64 a = d(rng), b = d(rng), c = d(rng);
        if (!R.is_unit(a)) continue;
        i64 dd = R.mul(R.add(R.from_int(1), R.mul(b, c)), R.inv(a));
        return {a, b, c, dd};
    }
}

}  // namespace

SuiteResult selftest_lifting(std::uint64_t seed, int samples) {
    SuiteResult r;
    r.suite = "lifting";
    FiniteRing Z25 = FiniteRing::residue(5, 2), F5 = FiniteRing::field_of_degree(5, 1);
    Ambient amb{{Z25, AmbientTag::SL2}}, pamb{{F5, AmbientTag::PSL2}};
    std::mt19937_64 rng(seed);
    i64 full = 0, tried = 0;
    while (r.cases < samples) {
        Mat2 x = random_sl2(Z25, rng), y = random_sl2(Z25, rng);
        ++tried;
        Elem xr{mat::reduce(Z25, F5, x)}, yr{mat::reduce(Z25, F5, y)};
        if (closure({xr, yr}, pamb).order() != 60) continue;
        ++r.cases;
        if (closure({{x}, {y}}, amb).order() == 15000) ++full;
        else ++r.failures;
    }
    Mat2 u{1, 1, 0, 1}, l{1, 0, 1, 1};
    i64 uni = closure({{u}, {l}}, amb).order();
    ++r.cases;
    if (uni != 15000) ++r.failures;
    r.details = {{"ring", "Z/25"}, {"random_pairs", samples}, {"drawn", tried}, {"full", full}, {"unipotent_pair_order", uni}};
    return r;
}

SuiteResult selftest_lifting_product(std::uint64_t seed, int samples) {
    SuiteResult r;
    r.suite = "lifting-product";
    FiniteRing F5 = FiniteRing::field_of_degree(5, 1);
    Ambient amb{{F5, AmbientTag::SL2}, {F5, AmbientTag::SL2}}, pamb{{F5, AmbientTag::PSL2}, {F5, AmbientTag::PSL2}};
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    i64 full = 0, tried = 0;
    while (r.cases < samples) {
        std::vector<Elem> gens;
        for (int i = 0; i < 2; ++i) gens.push_back({random_sl2(F5, rng), random_sl2(F5, rng)});
        ++tried;
        if (closure(gens, pamb).order() != 3600) continue;
        ++r.cases;
        if (closure(gens, amb).order() == 14400) ++full;
        else ++r.failures;
    }
    r.details = {{"ambient", "SL2(F5)^2"}, {"sets", samples}, {"drawn", tried}, {"full", full}};
    return r;
}

SuiteResult selftest_goursat() {
    SuiteResult r;
    r.suite = "goursat";
    FiniteRing F5 = FiniteRing::field_of_degree(5, 1);
    Ambient amb{{F5, AmbientTag::SL2}, {F5, AmbientTag::SL2}};
    Mat2 u{1, 1, 0, 1}, l{1, 0, 1, 1}, I = mat::identity(F5), mI = mat::neg(F5, I);
    auto keys = [](std::vector<Elem> v) {
        std::vector<std::string> k;
        for (auto& e : v) k.push_back(elem::key(e));
        std::sort(k.begin(), k.end());
        return k;
    };
    auto check = [&](const std::string& name, std::vector<Elem> gens, GoursatResult::Kind want, std::size_t n1) {
        auto U = closure(gens, amb);
        auto g = goursat_classify(U, 1, 120, 120);
        bool ok = g.kind == want;
        if (ok && want == GoursatResult::Kind::Graph)
            ok = g.N1.size() == n1 && g.N2.size() == n1 && keys(goursat_regenerate(g, amb)) == keys(U.elements());
        ++r.cases;
        if (!ok) ++r.failures;
        r.details[name] = {{"order", U.order()}, {"ok", ok}};
    };
    check("product", {{u, I}, {l, I}, {I, u}, {I, l}}, GoursatResult::Kind::Full, 0);
    check("diagonal", {{u, u}, {l, l}}, GoursatResult::Kind::Graph, 1);
    check("diagonal_mod_pm1", {{u, u}, {l, l}, {I, mI}}, GoursatResult::Kind::Graph, 2);
    // entanglement round trips in the fibre product, p = 5
    PairSpec ps{5, {F5}, {F5}, 2, 2};
    Ambient pa = pair_ambient(ps);
    Mat2 d3{3, 0, 0, 1}, lam2{2, 0, 0, 1};
    std::vector<std::pair<std::string, std::vector<Elem>>> ent{
        {"plus", {{u, u, I}, {l, l, I}, {d3, d3, lam2}}},
        {"minus", {{u, u, I}, {l, l, I}, {d3, mat::neg(F5, d3), lam2}}},
        {"plus_minus", {{u, u, I}, {l, l, I}, {d3, d3, lam2}, {I, mI, I}}}};
    for (auto& [name, gens] : ent) {
        auto U = closure(gens, pa);
        auto rep = pair_entanglement_classify(U, ps);
        bool ok = rep.verdict == LocalVerdict::Entangled && keys(regenerate_entangled(U, ps, *rep.datum)) == keys(U.elements());
        ++r.cases;
        if (!ok) ++r.failures;
        r.details["entangled_" + name] = {{"order", U.order()}, {"ok", ok}};
    }
    return r;
}

SuiteResult selftest_negative_hyp() {
    SuiteResult r;
    r.suite = "negative-hyp";
    for (i64 q : {5, 3}) {
        auto rec = negative_scan(q);
        ++r.cases;
        if (rec.violations != 0) ++r.failures;
        r.details["q" + std::to_string(q)] = {{"pairs", rec.pairs}, {"violations", rec.violations}};
    }
    return r;
}

SuiteResult selftest_counterexample() {
    SuiteResult r;
    r.suite = "counterexample";
    for (std::vector<i64> ps : {std::vector<i64>{3, 5}, std::vector<i64>{3, 5, 7}}) {
        auto c = counterexample_subgroup(ps);
        i64 want = i64{1} << (ps.size() - 1);
        bool ok = c.is_subgroup && c.projections_surjective && c.index == want;
        ++r.cases;
        if (!ok) ++r.failures;
        std::string name;
        for (i64 p : ps) name += (name.empty() ? "" : ",") + std::to_string(p);
        r.details[name] = {{"subgroup_order", c.subgroup_order}, {"group_order", c.group_order}, {"index", c.index}, {"ok", ok}};
    }
    return r;
}

SuiteResult selftest_dagger_orders() {
    SuiteResult r;
    r.suite = "dagger-orders";
    // real quadratic fields split / inert at p
    auto quad = [](i64 d) { return NumberFieldQ(ZPoly{mpz_class(static_cast<long>(-d)), 0, 1}); };
    for (i64 p : {5, 7}) {
        std::vector<std::pair<std::string, NumberFieldQ>> fields{{"Q", NumberFieldQ::rationals()}};
        for (auto [name, want] : {std::pair{"split", 1}, std::pair{"inert", -1}})
            for (i64 d : {2, 3, 6, 11, 13})
                if (kronecker(d, p) == want) {
                    fields.push_back({name, quad(d)});
                    break;
                }
        for (auto& [name, L] : fields)
            for (int k = 2; k <= 8; ++k) {
                auto spec = dagger_spec(L, {identity_automorphism(L)}, p, 1, k);
                i64 a = dagger_order(spec), b = dagger_order_bruteforce(spec);
                ++r.cases;
                if (a != b) ++r.failures;
                r.details[std::to_string(p) + "/" + name + "/k" + std::to_string(k)] = {{"formula", a}, {"count", b}};
            }
    }
    return r;
}

SuiteResult selftest_papier() {
    SuiteResult r;
    r.suite = "papier";
    NumberFieldQ L(ZPoly{-3, 0, 1});
    auto P = residue_primes(L, 5).front();
    FiniteRing k = P.residue_field();
    FieldAutomorphism s{{0, -1}};
    i64 alpha = papier_solve(L, P, k, {{s, k.from_int(-1)}});
    bool ok = alpha != 0 && k.pow(alpha, 5) == k.neg(alpha);
    ++r.cases;
    if (!ok) ++r.failures;
    i64 triv = papier_solve(L, P, k, {});
    ++r.cases;
    if (triv != k.from_int(1)) ++r.failures;
    r.details = {{"field", "Q(sqrt 3)"}, {"p", 5}, {"alpha", alpha}, {"alpha^5 = -alpha", ok}, {"trivial_D_alpha", triv}};
    return r;
}

}  // namespace adelic
