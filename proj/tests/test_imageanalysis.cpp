#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "adelic/error.hpp"
#include "adelic/imageanalysis.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace adelic;

namespace {

std::vector<std::string> sorted_keys(const std::vector<Elem>& v) {
    std::vector<std::string> k;
    for (auto& e : v) k.push_back(elem::key(e));
    std::sort(k.begin(), k.end());
    return k;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no adelic::Error thrown");
    return ErrorCode::InvalidArgument;
}

const Mat2 U{1, 1, 0, 1}, L{1, 0, 1, 1};

}  // namespace

TEST_CASE("dagger groups: examples and brute-force membership") {
    auto Q = NumberFieldQ::rationals();
    auto s2 = dagger_spec(Q, {identity_automorphism(Q)}, 5, 1, 2);
    CHECK(dagger_order(s2) == 480);
    auto s3 = dagger_spec(Q, {identity_automorphism(Q)}, 5, 1, 3);
    CHECK(dagger_order(s3) == 240);
    CHECK(dagger_member(s3, {mat::identity(s3.blocks[0])}));
    CHECK(dagger_order_bruteforce(s3) == 240);

    // membership agrees with the defining determinant condition
    std::mt19937_64 rng(5);
    for (int k = 2; k <= 6; ++k) {
        auto s = dagger_spec(Q, {identity_automorphism(Q)}, 7, 1, k);
        auto& R = s.blocks[0];
        std::set<i64> allowed;
        for (i64 l = 1; l < 7; ++l) allowed.insert(powmod(l, k - 1, 7));
        for (int t = 0; t < 300; ++t) {
            Mat2 m = oracle::random_matrix(R, AmbientTag::GL2, rng);
            CHECK(dagger_member(s, {m}) == static_cast<bool>(allowed.count(mat::det(R, m))));
        }
    }
    // p | N is rejected
    Newform f = fixtures::load("11.2.a.a");
    auto G = detect_inner_twists(f, f.automorphisms, 500);
    CHECK(code_of([&] { dagger_spec(f, G, 11); }) == ErrorCode::BadPrime);
}

TEST_CASE("dagger order formula vs brute force, p in {5,7}, k in 2..8") {
    auto Q = NumberFieldQ::rationals();
    NumberFieldQ split5({-11, 0, 1}), inert5({-2, 0, 1}), split7({-2, 0, 1}), inert7({-3, 0, 1});
    CHECK(kronecker(11, 5) == 1);
    CHECK(kronecker(2, 5) == -1);
    CHECK(kronecker(2, 7) == 1);
    CHECK(kronecker(3, 7) == -1);
    std::vector<std::pair<i64, std::vector<NumberFieldQ>>> cases{{5, {Q, split5, inert5}}, {7, {Q, split7, inert7}}};
    for (auto& [p, fields] : cases)
        for (auto& F : fields)
            for (int k = 2; k <= 8; ++k) {
                auto s = dagger_spec(F, {identity_automorphism(F)}, p, 1, k);
                CHECK(dagger_order(s) == dagger_order_bruteforce(s));
            }
    // blocks follow Gamma-orbits; an inert prime with Gamma = Gal has a degree-1 block
    FieldAutomorphism conj{{0, -1}};
    CHECK(dagger_spec(split7, {identity_automorphism(split7), conj}, 7, 1, 2).blocks.size() == 1);
    CHECK(dagger_spec(split7, {identity_automorphism(split7)}, 7, 1, 2).blocks.size() == 2);
    auto in = dagger_spec(inert7, {identity_automorphism(inert7), conj}, 7, 1, 2);
    REQUIRE(in.blocks.size() == 1);
    CHECK(in.blocks[0].size() == 7);
}

TEST_CASE("Papier solver") {
    NumberFieldQ L({-3, 0, 1});
    auto P = residue_primes(L, 5).front();
    auto k = P.residue_field();
    FieldAutomorphism s{{0, -1}};
    i64 a = papier_solve(L, P, k, {{s, k.from_int(-1)}});
    CHECK(a != 0);
    CHECK(k.pow(a, 5) == k.neg(a));
    CHECK(k.pow(a, 4) == k.from_int(-1));
    CHECK(papier_solve(L, P, k, {}) == k.from_int(1));
    CHECK(papier_solve(L, P, k, {{s, k.from_int(1)}}) != 0);
}

TEST_CASE("Papier cosets on fixtures satisfy the eigen-conditions") {
    for (auto l : {"13.2.e.a", "7.3.b.a", "15.3.d.b", "23.2.a.a", "11.2.a.a"}) {
        CAPTURE(l);
        Newform f = fixtures::load(l);
        auto G = detect_inner_twists(f, f.automorphisms, 500);
        i64 M = G.modulus();
        for (i64 p : {5, 11, 17, 19, 29, 31}) {
            if ((f.level * M) % p == 0 || f.field.discriminant() % p == 0) continue;
            for (auto& P : residue_primes(f.field, p)) {
                for (i64 u = 2; u < std::min<i64>(M, 12); ++u) {
                    if (std::gcd(u, M * f.level) != 1) continue;
                    PapierSolution sol;
                    try {
                        sol = papier_coset(f, G, P, u);
                    } catch (const Error& e) {
                        CHECK(e.code() == ErrorCode::NoSolution);
                        continue;
                    }
                    auto kP = P.residue_field();
                    CHECK(sol.alpha != 0);
                    CHECK(papier_verify(f.field, sol, f));
                    // independent check: gamma acts on k_P as a Frobenius power
                    i64 theta = reduce(f.field, f.field.gen(), P, kP);
                    for (auto& [g, z] : sol.conditions) {
                        i64 gt = reduce(f.field, apply(f.field, g, f.field.gen()), P, kP);
                        int j = 0;
                        while (j < kP.n() && kP.frobenius(theta, j) != gt) ++j;
                        REQUIRE(j < kP.n());
                        i64 c = reduce(f.field, f.value(z), P, kP);
                        CHECK(kP.frobenius(sol.alpha, j) == kP.mul(c, sol.alpha));
                    }
                    // coset matrix is diag(alpha, eps(u) / alpha)
                    i64 eps = reduce(f.field, f.value(sol.eps_u), P, kP);
                    CHECK(sol.coset == Mat2{sol.alpha, 0, 0, kP.mul(eps, kP.inv(sol.alpha))});
                }
            }
        }
    }
}

TEST_CASE("Goursat classification") {
    auto F5 = FiniteRing::field_of_degree(5, 1);
    Mat2 I = mat::identity(F5), mI = mat::neg(F5, I);
    Ambient amb{{F5, AmbientTag::SL2}, {F5, AmbientTag::SL2}};
    auto full = closure({{U, I}, {L, I}, {I, U}, {I, L}}, amb);
    CHECK(goursat_classify(full, 1, 120, 120).kind == GoursatResult::Kind::Full);

    auto diag = closure({{U, U}, {L, L}}, amb);
    auto g = goursat_classify(diag, 1, 120, 120);
    REQUIRE(g.kind == GoursatResult::Kind::Graph);
    CHECK(g.N1.size() == 1);
    CHECK(g.N2.size() == 1);
    for (auto& [a, b] : g.iso) CHECK(a[0] == b[0]);  // the identity isomorphism
    CHECK(sorted_keys(goursat_regenerate(g, amb)) == sorted_keys(diag.elements()));

    auto pm = closure({{U, U}, {L, L}, {I, mI}}, amb);
    auto h = goursat_classify(pm, 1, 120, 120);
    REQUIRE(h.kind == GoursatResult::Kind::Graph);
    CHECK(h.N1.size() == 2);
    CHECK(h.N2.size() == 2);
    CHECK(static_cast<i64>(pm.order()) == 120 * 2);  // |G1| |N2|
    CHECK(sorted_keys(goursat_regenerate(h, amb)) == sorted_keys(pm.elements()));

    CHECK(goursat_classify(closure({{U, I}}, amb), 1, 120, 120).kind == GoursatResult::Kind::NotSurjective);
    CHECK_THROWS_AS(goursat_classify(SubgroupClosure(amb, {{U, U}}), 1, 120, 120), Error);

    // twisted graphs (g, P g P^-1) regenerate exactly
    std::mt19937_64 rng(13);
    for (int t = 0; t < 5; ++t) {
        Mat2 P = oracle::random_matrix(F5, AmbientTag::GL2, rng), Pi = mat::inv(F5, P);
        auto cj = [&](const Mat2& x) { return mat::mul(F5, mat::mul(F5, P, x), Pi); };
        auto Ug = closure({{U, cj(U)}, {L, cj(L)}}, amb);
        auto r = goursat_classify(Ug, 1, 120, 120);
        REQUIRE(r.kind == GoursatResult::Kind::Graph);
        CHECK(static_cast<i64>(r.iso.size()) * static_cast<i64>(r.N1.size()) == 120);
        CHECK(sorted_keys(goursat_regenerate(r, amb)) == sorted_keys(Ug.elements()));
    }
}

TEST_CASE("entanglement classification round trips") {
    auto F5 = FiniteRing::field_of_degree(5, 1);
    Mat2 I = mat::identity(F5), mI = mat::neg(F5, I);
    PairSpec ps{5, {F5}, {F5}, 2, 2};
    Ambient pa = pair_ambient(ps);
    auto full = closure(fibre_generators(ps), pa);
    CHECK(full.order() == fibre_order(ps));
    CHECK(pair_entanglement_classify(full, ps).verdict == LocalVerdict::FullDagger);
    for (auto& e : full.elements()) CHECK(fibre_member(ps, e));

    Mat2 d3{3, 0, 0, 1}, lam2{2, 0, 0, 1};
    struct Case {
        std::string sign;
        std::vector<Elem> gens;
    };
    for (auto& c : std::vector<Case>{{"+", {{U, U, I}, {L, L, I}, {d3, d3, lam2}}},
                                     {"-", {{U, U, I}, {L, L, I}, {d3, mat::neg(F5, d3), lam2}}},
                                     {"+-", {{U, U, I}, {L, L, I}, {d3, d3, lam2}, {I, mI, I}}}}) {
        CAPTURE(c.sign);
        auto E = closure(c.gens, pa);
        auto rep = pair_entanglement_classify(E, ps);
        REQUIRE(rep.verdict == LocalVerdict::Entangled);
        REQUIRE(rep.datum.has_value());
        CHECK(rep.datum->sign == c.sign);
        CHECK(rep.datum->frobenius == 0);
        CHECK(rep.datum->exponent == 0);
        CHECK(sorted_keys(regenerate_entangled(E, ps, *rep.datum)) == sorted_keys(E.elements()));
        auto j = rep.to_json();
        CHECK(j["verdict"] == "Entangled");
        CHECK(j.contains("datum"));
    }
}

TEST_CASE("Frobenius-twisted entanglement over F_25") {
    auto F25 = FiniteRing::field_of_degree(5, 2);
    PairSpec ps{5, {F25}, {F25}, 2, 2};
    Ambient pa = pair_ambient(ps);
    auto F5 = pa.back().ring;
    i64 w = 5;  // the class of x
    std::vector<Elem> gens;
    for (i64 a : {i64{1}, w}) {
        Mat2 u{1, a, 0, 1}, l{1, 0, a, 1};
        gens.push_back({u, mat::frobenius(F25, u, 1), mat::identity(F5)});
        gens.push_back({l, mat::frobenius(F25, l, 1), mat::identity(F5)});
    }
    gens.push_back({Mat2{3, 0, 0, 1}, Mat2{3, 0, 0, 1}, Mat2{2, 0, 0, 1}});
    auto E = closure(gens, pa);
    CHECK(E.order() == 15600 * 4);
    auto rep = pair_entanglement_classify(E, ps);
    REQUIRE(rep.verdict == LocalVerdict::Entangled);
    CHECK(rep.datum->frobenius == 1);
    CHECK(rep.datum->sign == "+");
    CHECK(sorted_keys(regenerate_entangled(E, ps, *rep.datum)) == sorted_keys(E.elements()));
}

TEST_CASE("scalar lambda^((kf-kg)/2) entanglement, kf = 4, kg = 2") {
    auto F5 = FiniteRing::field_of_degree(5, 1);
    PairSpec ps{5, {F5}, {F5}, 4, 2};
    Ambient pa = pair_ambient(ps);
    Mat2 I = mat::identity(F5);
    i64 lam = 2, e = 1;
    Mat2 d{powmod(invmod(lam, 5), 3, 5), 0, 0, 1};  // det = lam^(1 - kf)
    auto E = closure({{U, U, I}, {L, L, I}, {d, mat::scale(F5, powmod(lam, e, 5), d), Mat2{lam, 0, 0, 1}}}, pa);
    for (auto& x : E.elements()) CHECK(fibre_member(ps, x));
    auto rep = pair_entanglement_classify(E, ps);
    REQUIRE(rep.verdict == LocalVerdict::Entangled);
    CHECK(rep.datum->exponent == 1);
    CHECK(sorted_keys(regenerate_entangled(E, ps, *rep.datum)) == sorted_keys(E.elements()));

    // odd weight difference: no scalar pattern is attempted
    PairSpec odd{5, {F5}, {F5}, 3, 2};
    auto fo = closure(fibre_generators(odd), pair_ambient(odd));
    CHECK(pair_entanglement_classify(fo, odd).verdict == LocalVerdict::FullDagger);
    // a diagonal SL2 graph plus any lift of a generating lambda already fills the fibre product
    Mat2 df{powmod(invmod(lam, 5), 2, 5), 0, 0, 1}, dg{invmod(lam, 5), 0, 0, 1};
    auto Eo = closure({{U, U, I}, {L, L, I}, {df, dg, Mat2{lam, 0, 0, 1}}}, pair_ambient(odd));
    CHECK(Eo.order() == fibre_order(odd));
}

TEST_CASE("exceptional prime scan") {
    auto ld = [](const char* l) { return fixtures::load(l); };
    auto G = [](const Newform& f) { return detect_inner_twists(f, f.automorphisms, 1999); };
    Newform f = ld("11.2.a.a"), g = ld("37.2.a.a"), r1 = ld("26.2.a.b"), r2 = ld("174.2.a.e");
    auto Gf = G(f), Gg = G(g);
    auto gen = exceptional_prime_scan(f, g, Gf, Gg, g.automorphisms, 200, 1000);
    CHECK(gen.candidates.empty());
    CHECK_FALSE(gen.all_primes);
    // the stored norms are a_f^2 - a_g^2 for rational weight-2 forms
    for (auto& [l, n] : gen.norms) CHECK(n == f.a(l)[0].get_num() * f.a(l)[0].get_num() - g.a(l)[0].get_num() * g.a(l)[0].get_num());
    CHECK(gen.norms.size() >= 3);

    auto rig = exceptional_prime_scan(r1, r2, G(r1), G(r2), r2.automorphisms, 200, 1000);
    CHECK(rig.candidates == std::vector<i64>{7});
    // oracle: 7 divides every nonzero norm
    for (auto& [l, n] : rig.norms)
        if (n != 0 && l != 7) CHECK(n % 7 == 0);

    auto same = exceptional_prime_scan(f, f, Gf, Gf, f.automorphisms, 200, 1000);
    CHECK(same.all_primes);
    CHECK(code_of([&] { exceptional_prime_scan(r1, r2, G(r1), G(r2), r2.automorphisms, 2, 1000); }) == ErrorCode::NoEligibleEll);
}

TEST_CASE("adelic openness audit") {
    auto rep = [](i64 p, LocalVerdict v, i64 idx = 1) {
        LocalImageReport r;
        r.p = p;
        r.verdict = v;
        r.index = idx;
        if (v == LocalVerdict::Entangled) r.datum = EntanglementDatum{};
        return r;
    };
    std::vector<i64> S{5, 7, 13};
    auto ok = adelic_openness_audit({rep(5, LocalVerdict::FullDagger), rep(7, LocalVerdict::FullDagger), rep(13, LocalVerdict::FullDagger)}, S, {});
    CHECK(ok.open);
    CHECK(ok.index_bound == 1);
    auto ent = adelic_openness_audit({rep(5, LocalVerdict::FullDagger), rep(7, LocalVerdict::Entangled), rep(13, LocalVerdict::FullDagger)}, S, {});
    CHECK_FALSE(ent.open);
    CHECK(ent.failing == "EntangledPair");
    DetImage sq{15, {4}, DetImage::Tail::Squares};
    auto det = adelic_openness_audit({rep(5, LocalVerdict::FullDagger), rep(7, LocalVerdict::FullDagger), rep(13, LocalVerdict::FullDagger)}, S, sq);
    CHECK_FALSE(det.open);
    CHECK(det.failing == "DetNotOpen");
    auto bounded = adelic_openness_audit({rep(5, LocalVerdict::OpenIndexBounded, 2), rep(7, LocalVerdict::OpenIndexBounded, 3), rep(13, LocalVerdict::FullDagger)}, S, {});
    CHECK(bounded.open);
    CHECK(bounded.index_bound == 6);
    CHECK(code_of([&] { adelic_openness_audit({rep(5, LocalVerdict::FullDagger)}, S, {}); }) == ErrorCode::IncompleteCover);
    CHECK(code_of([&] { adelic_openness_audit({rep(5, LocalVerdict::FullDagger), rep(5, LocalVerdict::FullDagger), rep(7, LocalVerdict::FullDagger)}, {5, 7}, {}); }) ==
          ErrorCode::IncompleteCover);

    // monotonicity: upgrading one report to FullDagger never turns open into not-open
    std::mt19937_64 rng(17);
    std::vector<LocalVerdict> vs{LocalVerdict::FullDagger, LocalVerdict::OpenIndexBounded, LocalVerdict::Entangled, LocalVerdict::Unknown};
    for (int t = 0; t < 500; ++t) {
        std::vector<LocalImageReport> rs;
        for (i64 p : S) rs.push_back(rep(p, vs[rng() % 4], 1 + static_cast<i64>(rng() % 3)));
        DetImage d = rng() % 4 ? DetImage{} : sq;
        bool before = adelic_openness_audit(rs, S, d).open;
        std::size_t i = rng() % rs.size();
        rs[i] = rep(rs[i].p, LocalVerdict::FullDagger);
        if (before) CHECK(adelic_openness_audit(rs, S, d).open);
    }
}

TEST_CASE("counterexample gallery against direct enumeration") {
    for (std::vector<i64> ps : {std::vector<i64>{3, 5}, std::vector<i64>{3, 5, 7}, std::vector<i64>{5, 11}}) {
        auto c = counterexample_subgroup(ps);
        i64 M = 1;
        for (i64 p : ps) M *= p;
        std::set<i64> want;
        for (i64 x = 1; x < M; ++x) {
            if (std::gcd(x, M) != 1) continue;
            std::set<int> kinds;
            for (i64 p : ps) kinds.insert(kronecker(x, p));
            if (kinds.size() == 1) want.insert(x);
        }
        CHECK(std::set<i64>(c.elements.begin(), c.elements.end()) == want);
        CHECK(c.index == (i64{1} << (ps.size() - 1)));
        CHECK(c.is_subgroup);
        CHECK(c.projections_surjective);
        CHECK(c.group_order == euler_phi(M));
        CHECK(c.subgroup_order == static_cast<i64>(want.size()));
    }
    CHECK(counterexample_subgroup({3, 5}).subgroup_order == 4);
    CHECK(code_of([&] { counterexample_subgroup({3}); }) == ErrorCode::NeedTwoPrimes);
}

TEST_CASE("CM expected images") {
    auto c2 = cm_expected_image_modp(2, -4, 5);
    CHECK(c2.split);
    CHECK(c2.order == 16);
    auto c3 = cm_expected_image_modp(3, -4, 5);
    CHECK(c3.order == 4);
    for (auto& m : c3.elements()) {
        CHECK(m.b == 0);
        CHECK(m.c == 0);
        CHECK(kronecker(m.a, 5) == 1);
        CHECK(kronecker(m.d, 5) == 1);
        CHECK(c3.contains(m));
    }
    CHECK_FALSE(c3.contains(Mat2{2, 0, 0, 1}));
    auto in = cm_expected_image_modp(2, -4, 7);
    CHECK_FALSE(in.split);
    CHECK(in.order == 48);
    CHECK(static_cast<i64>(in.elements().size()) == 48);
    std::set<Mat2> uniq;
    for (auto& m : in.elements()) uniq.insert(m);
    CHECK(uniq.size() == 48);
    CHECK(code_of([&] { cm_expected_image_modp(2, -3, 3); }) == ErrorCode::RamifiedInK);
}
