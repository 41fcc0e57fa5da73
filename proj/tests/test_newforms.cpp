#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <set>

#include "adelic/error.hpp"
#include "adelic/newforms.hpp"
#include "fixtures.hpp"

using namespace adelic;
using fixtures::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no adelic::Error thrown");
    return ErrorCode::InvalidArgument;
}

Newform from(const json& j) { return newform_from_json(j); }

// group generated by the listed twists and everything detected must agree as sets
bool same_twist_sets(const std::vector<InnerTwist>& a, const std::vector<InnerTwist>& b) {
    if (a.size() != b.size()) return false;
    for (auto& x : a) {
        bool hit = false;
        for (auto& y : b) hit = hit || same_twist(x, y);
        if (!hit) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("fixtures load and validate") {
    for (auto& l : fixtures::labels()) {
        CAPTURE(l);
        Newform f = fixtures::load(l);
        CHECK(f.label == l);
        CHECK(f.level % f.character.modulus() == 0);
        CHECK(f.warnings.empty());  // no Ramanujan advisories on real data
        for (i64 p : primes_upto(f.bound)) CHECK_NOTHROW(f.a(p));
    }
}

TEST_CASE("schema errors") {
    auto dir = fixtures::temp_dir("schema");
    fixtures::write_file(dir / "bad.json", "{\"label\": ");
    CHECK(code_of([&] { load_newform_file(dir / "bad.json"); }) == ErrorCode::SchemaError);
    json j = fixtures::raw("11.2.a.a");
    j.erase("level");
    CHECK(code_of([&] { from(j); }) == ErrorCode::SchemaError);
    j = fixtures::raw("11.2.a.a");
    j["power_basis"] = false;
    CHECK(code_of([&] { from(j); }) == ErrorCode::NotPowerBasis);
    j = fixtures::raw("11.2.a.a");
    j["field_poly"] = {-4, 0, 1};
    CHECK(code_of([&] { from(j); }) == ErrorCode::SchemaError);
    j = fixtures::raw("11.2.a.a");
    j["ap"].erase(3);  // gap in the prime table
    CHECK(code_of([&] { from(j); }) == ErrorCode::SchemaError);
    j = fixtures::raw("13.2.e.a");
    j["automorphisms"][0] = {"5", "0"};
    CHECK(code_of([&] { from(j); }) == ErrorCode::SchemaError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("Ramanujan advisory flags absurd coefficients") {
    json j = fixtures::raw("11.2.a.a");
    j["ap"][3]["coords"][0] = "1000";  // l = 7
    Newform f = from(j);
    CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("Hecke recursion against the eta-product q-expansion of 11.2.a.a") {
    Newform f = fixtures::load("11.2.a.a");
    const int n = 300;
    // q prod (1 - q^m)^2 (1 - q^11m)^2
    std::vector<mpz_class> s(n + 1, 0);
    s[1] = 1;
    auto mul_factor = [&](int step) {
        for (int m = step; m <= n; m += step)
            for (int rep = 0; rep < 2; ++rep)
                for (int i = n; i >= m; --i) s[i] -= s[i - m];
    };
    mul_factor(1);
    for (int m = 11; m <= n; m += 11)
        for (int rep = 0; rep < 2; ++rep)
            for (int i = n; i >= m; --i) s[i] -= s[i - m];
    for (int k = 1; k <= n; ++k) {
        CAPTURE(k);
        CHECK(f.an(k)[0] == mpq_class(s[k]));
    }
}

TEST_CASE("verify_inner_twist") {
    for (auto& l : fixtures::labels()) {
        CAPTURE(l);
        Newform f = fixtures::load(l);
        CHECK(verify_inner_twist(f, {identity_automorphism(f.field), DirichletCharacter::trivial(f.level)}, 200).ok);
        if (!f.character.is_trivial()) {
            auto c = complex_conjugation(f);
            REQUIRE(c.has_value());
            CHECK(verify_inner_twist(f, {*c, char_inverse(f.character)}, std::min<i64>(f.bound, 1000)).ok);
        }
        CHECK(code_of([&] { verify_inner_twist(f, {identity_automorphism(f.field), DirichletCharacter::trivial(1)}, f.bound + 1); }) ==
              ErrorCode::BoundTooLarge);
    }
    Newform f = fixtures::load("11.2.a.a");
    // a quadratic character kills the identity on a non-CM form at the first l with chi(l) = -1, a_l != 0
    auto chi = kronecker_character(-11, 11);
    i64 want = 0;
    for (i64 l : primes_upto(200))
        if (l != 11 && kronecker(-11, l) == -1 && f.a(l)[0] != 0) {
            want = l;
            break;
        }
    auto r = verify_inner_twist(f, {identity_automorphism(f.field), chi}, 200);
    CHECK_FALSE(r.ok);
    CHECK(r.first_failure == want);
    CHECK(code_of([&] { verify_inner_twist(f, {identity_automorphism(f.field), kronecker_character(5, 5)}, 200); }) ==
          ErrorCode::ConductorViolation);
}

TEST_CASE("inner-twist detection reproduces the listed twists at B = 500") {
    int compared = 0;
    for (auto& l : fixtures::labels()) {
        CAPTURE(l);
        Newform f = fixtures::load(l);
        try {
            check_twist_bound(f.level, 500);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BoundTooSmall);
            CHECK(code_of([&] { detect_inner_twists(f, f.automorphisms, 500); }) == ErrorCode::BoundTooSmall);
            continue;
        }
        auto G = detect_inner_twists(f, f.automorphisms, 500);
        CHECK(same_twist_sets(G.elements(), f.listed_twists));
        ++compared;
        if (!f.character.is_trivial()) {
            auto c = complex_conjugation(f);
            CHECK(G.find({*c, char_inverse(f.character)}).has_value());
        }
    }
    CHECK(compared >= 3);
}

TEST_CASE("inner-twist group axioms, conductors and the subgroup H") {
    for (auto& l : fixtures::labels()) {
        CAPTURE(l);
        Newform f = fixtures::load(l);
        i64 B = std::min<i64>(f.bound, 2000);
        try {
            check_twist_bound(f.level, B);
        } catch (const Error&) {
            continue;  // the table is too short to pin down characters mod 4N
        }
        InnerTwistGroup G = detect_inner_twists(f, f.automorphisms, B);
        std::size_t n = G.order();
        // identity first
        CHECK(G.elements()[0].gamma == identity_automorphism(f.field));
        CHECK(G.elements()[0].chi.is_trivial());
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(G.product(0, i) == i);
            bool has_inv = false;
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(G.product(i, j) == G.product(j, i));
                has_inv = has_inv || G.product(i, j) == 0;
                for (std::size_t k = 0; k < n; ++k) CHECK(G.product(G.product(i, j), k) == G.product(i, G.product(j, k)));
                // table agrees with the law computed directly
                CHECK(same_twist(twist_product(f, G.elements()[i], G.elements()[j]), G.elements()[G.product(i, j)]));
            }
            CHECK(has_inv);
            i64 M = twist_modulus(f.level);
            CHECK(M % char_conductor(G.elements()[i].chi) == 0);
        }
        // H is a subgroup of (Z/M)^x whose index divides the product of character orders
        i64 M = G.modulus();
        REQUIRE(M <= 10000);
        std::vector<i64> H;
        for (i64 u = 1; u < M; ++u)
            if (std::gcd(u, M) == 1 && G.in_H(u)) H.push_back(u);
        std::set<i64> Hs(H.begin(), H.end());
        CHECK(Hs.count(1));
        for (i64 a : H) {
            CHECK(Hs.count(invmod(a, M)));
            for (i64 b : H) CHECK(Hs.count(a * b % M));
        }
        i64 index = euler_phi(M) / static_cast<i64>(H.size());
        CHECK(euler_phi(M) % static_cast<i64>(H.size()) == 0);
        i64 ords = 1;
        for (auto& t : G.elements()) ords *= t.chi.order();
        CHECK(ords % index == 0);
    }
}

TEST_CASE("detection is idempotent and independent of candidate order") {
    for (auto& l : {"13.2.e.a", "7.3.b.a", "15.3.d.b", "23.2.a.a"}) {
        CAPTURE(l);
        Newform f = fixtures::load(l);
        auto G = detect_inner_twists(f, f.automorphisms, 500);
        auto G2 = detect_inner_twists(f, G.automorphisms(), 500);
        CHECK(same_twist_sets(G.elements(), G2.elements()));
        auto rev = f.automorphisms;
        std::reverse(rev.begin(), rev.end());
        auto G3 = detect_inner_twists(f, rev, 500);
        CHECK(same_twist_sets(G.elements(), G3.elements()));
        // element order is canonical, not candidate-dependent
        for (std::size_t i = 0; i < G.order(); ++i) CHECK(same_twist(G.elements()[i], G3.elements()[i]));
    }
}

TEST_CASE("inconsistent twist data is rejected") {
    Newform f = fixtures::load("13.2.e.a");
    auto c = complex_conjugation(f);
    // (conj, 1) is not an inner twist, so it cannot be forced into a group
    CHECK(code_of([&] {
              InnerTwistGroup(f, {{identity_automorphism(f.field), DirichletCharacter::trivial(13)},
                                  {*c, DirichletCharacter::trivial(13)},
                                  {*c, char_inverse(f.character)}});
          }) == ErrorCode::NotClosed);
}

TEST_CASE("self twists") {
    CHECK_FALSE(detect_self_twist(fixtures::load("11.2.a.a"), 500).has_value());
    CHECK_FALSE(detect_self_twist(fixtures::load("13.2.e.a"), 500).has_value());
    auto cm = detect_self_twist(fixtures::load("32.2.a.a"), 500);
    REQUIRE(cm.has_value());
    CHECK(quadratic_discriminant(*cm) == -4);
    CHECK(char_conductor(*cm) == 4);
    auto cm23 = detect_self_twist(fixtures::load("23.1.b.a"), 500);
    REQUIRE(cm23.has_value());
    CHECK(quadratic_discriminant(*cm23) == -23);
    CHECK(code_of([&] { detect_self_twist(fixtures::load("176.2.a.b"), 37); }) == ErrorCode::BoundTooSmall);
}

TEST_CASE("twist relation evidence") {
    Newform f = fixtures::load("11.2.a.a");
    auto self = twist_relation_evidence(f, f, identity_automorphism(f.field), 500);
    CHECK(self.matched == self.tested);
    CHECK(self.tested > 50);
    CHECK_FALSE(self.counterexample.has_value());

    Newform g = from(fixtures::quadratic_twist_json("11.2.a.a", -3));
    auto tw = twist_relation_evidence(f, g, identity_automorphism(g.field), 500);
    CHECK(tw.matched == tw.tested);

    Newform h = fixtures::load("37.2.a.a");
    auto gen = twist_relation_evidence(f, h, identity_automorphism(h.field), 500);
    CHECK(gen.matched < gen.tested / 10);
    REQUIRE(gen.counterexample.has_value());
    CHECK(*gen.counterexample < 20);

    Newform q = fixtures::load("13.2.e.a"), r = fixtures::load("15.3.d.b");
    CHECK(code_of([&] { twist_relation_evidence(q, r, r.automorphisms[0], 500); }) == ErrorCode::IncompatibleFields);
}

TEST_CASE("LMFDB client: cache, offline switch, errors") {
    auto dir = fixtures::temp_dir("client");
    auto t = std::make_shared<fixtures::RecordingTransport>();
    fixtures::add_lmfdb_records(*t, "11.2.a.a");
    {
        LmfdbClient offline(dir, true, t);
        CHECK(code_of([&] { offline.fetch("11.2.a.a"); }) == ErrorCode::OfflineMiss);
        CHECK(t->calls.empty());
    }
    LmfdbClient c(dir, false, t);
    auto p = c.fetch("11.2.a.a");
    CHECK(t->calls.size() == 2);
    Newform f = load_newform_file(p), ref = fixtures::load("11.2.a.a");
    CHECK(f.ap.size() == ref.ap.size());
    for (auto& [l, a] : ref.ap) CHECK(f.a(l) == a);
    CHECK(std::filesystem::exists(dir / "raw" / "11.2.a.a.mf_newforms.json"));
    // warm cache: idempotent, no network
    CHECK(c.fetch("11.2.a.a") == p);
    CHECK(t->calls.size() == 2);
    LmfdbClient offline2(dir, true, t);
    CHECK(offline2.fetch("11.2.a.a") == p);
    CHECK(t->calls.size() == 2);

    try {
        c.fetch("99.2.z.z");
        FAIL("expected FetchError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FetchError);
        CHECK(std::string(e.what()).find("404") != std::string::npos);
    }
    CHECK(code_of([&] { c.fetch("../etc/passwd"); }) == ErrorCode::FetchError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("LMFDB conversion rejects non-power bases") {
    json nf = {{"label", "x"}, {"level", 11}, {"weight", 2}, {"field_poly", {0, 1}}, {"hecke_ring_power_basis", false}};
    CHECK(code_of([&] { convert_lmfdb_records(nf, json::object()); }) == ErrorCode::NotPowerBasis);
    nf["hecke_ring_power_basis"] = true;
    CHECK(code_of([&] { convert_lmfdb_records(nf, json::object()); }) == ErrorCode::SchemaError);
}
