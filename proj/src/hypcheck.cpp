#include "adelic/hypcheck.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <numeric>

#include "adelic/error.hpp"
#include "adelic/smith.hpp"

namespace adelic {

FormProfile profile_of(const Newform& f, const InnerTwistGroup& G) {
    return {f.level, f.weight, f.character, f.field, G.elements(), f.cm_disc};
}

MonoMat2 mono_diag(const Monomial& x, const Monomial& y) { return {x, Monomial{0, {}}, Monomial{0, {}}, y}; }

MonoMat2 mono_from_ints(i64 a, i64 b, i64 c, i64 d) {
    auto m = [](i64 v) { return Monomial{mpq_class(static_cast<long>(v)), {}}; };
    return {m(a), m(b), m(c), m(d)};
}

namespace {

const NumberFieldQ& cyclotomic_cached(i64 W) {
    static std::mutex mu;
    static std::map<i64, NumberFieldQ> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(W);
    if (it == cache.end()) it = cache.emplace(W, NumberFieldQ::cyclotomic(W)).first;
    return it->second;
}

i64 mono_lcm(const MonoMat2& a, const MonoMat2& b) {
    i64 W = 1;
    for (auto* m : {&a, &b})
        for (auto& x : *m) W = lcm(W, x.z.order);
    return W;
}

}  // namespace

int rank_char0(const MonoMat2& a, const MonoMat2& b) {
    i64 W = mono_lcm(a, b);
    static const NumberFieldQ Qf = NumberFieldQ::rationals();
    const NumberFieldQ& K = W <= 2 ? Qf : cyclotomic_cached(W);
    auto val = [&](const Monomial& m) {
        if (K.degree() == 1) return K.from_rational(m.z.order == 2 ? -m.c : m.c);
        return K.scale(m.c, K.pow(K.gen(), m.z.exp * (W / m.z.order)));
    };
    std::vector<std::vector<QElem>> M(4, std::vector<QElem>(4));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    QElem v = K.mul(val(a[2 * i + j]), val(b[2 * k + l]));
                    if (2 * i + k == 2 * j + l) v = K.sub(v, K.one());
                    M[2 * i + k][2 * j + l] = v;
                }
    int rank = 0;
    for (int c = 0; c < 4 && rank < 4; ++c) {
        int piv = -1;
        for (int r = rank; r < 4; ++r)
            if (!K.is_zero(M[r][c])) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(M[piv], M[rank]);
        QElem iv = K.inv(M[rank][c]);
        for (int r = rank + 1; r < 4; ++r) {
            if (K.is_zero(M[r][c])) continue;
            QElem t = K.mul(M[r][c], iv);
            for (int j = c; j < 4; ++j) M[r][j] = K.sub(M[r][j], K.mul(t, M[rank][j]));
        }
        ++rank;
    }
    return rank;
}

FiniteRing residue_field_for(i64 p, i64 W) {
    while (W % p == 0) W /= p;
    int f = W <= 2 ? 1 : static_cast<int>(mult_order(p % W, W));
    return FiniteRing::field_of_degree(p, f);
}

Mat2 reduce_mono(const MonoMat2& m, const FiniteRing& F) {
    const i64 p = F.p();
    auto red = [&](const Monomial& x) {
        mpz_class num = x.c.get_num() % p, den = x.c.get_den() % p;
        if (den == 0) throw Error(ErrorCode::DenominatorAtP, "denominator divisible by p");
        i64 v = mulmod(mod(num.get_si(), p), invmod(mod(den.get_si(), p), p), p);
        return F.mul(F.from_int(v), reduce_root_of_unity(x.z, F));
    };
    return {red(m[0]), red(m[1]), red(m[2]), red(m[3])};
}

std::string tri_name(Tri t) {
    switch (t) {
        case Tri::Yes: return "Yes";
        case Tri::No: return "No";
        case Tri::Unknown: return "Unknown";
    }
    return "?";
}

namespace {

std::string mono_str(const MonoMat2& m) {
    std::string s = "[";
    for (int i = 0; i < 4; ++i) {
        if (i) s += i == 2 ? "],[" : ",";
        s += m[i].c.get_str();
        if (!m[i].z.is_one()) s += "*" + m[i].z.str();
    }
    return "[" + s + "]]";
}

}  // namespace

nlohmann::json HypWitness::to_json() const {
    nlohmann::json j = {{"a0", mono_str(a0)},
                        {"b0", mono_str(b0)},
                        {"rank0", rank0},
                        {"residue_field", residue.describe()},
                        {"a", mat::to_string(a)},
                        {"b", mat::to_string(b)},
                        {"certificate",
                         {{"p", cert.p},
                          {"residue_rank", cert.residue_rank},
                          {"profile", cert.profile()},
                          {"free_rank_one", cert.free_rank_one}}},
                        {"scalars", scalars}};
    if (u) j["u"] = *u;
    return j;
}

nlohmann::json HypStatus::to_json() const {
    nlohmann::json j = {{"holds_V", tri_name(holds_V)},
                        {"holds_T", tri_name(holds_T)},
                        {"criterion", criterion},
                        {"conditions", conditions}};
    if (witness) j["witness"] = witness->to_json();
    return j;
}

bool witness_checks(const HypWitness& w, bool need_T) {
    if (w.rank0 != 3 || rank_char0(w.a0, w.b0) != 3) return false;
    if (reduce_mono(w.a0, w.residue) != w.a || reduce_mono(w.b0, w.residue) != w.b) return false;
    if (!need_T) return true;
    auto c = tensor_coker_certificate(w.residue, w.a, w.b);
    return c.residue_rank == 3 && c.free_rank_one && c.profile() == w.cert.profile();
}

// ---------------------------------------------------------------- negative

NegativeRecord negative_scan(i64 q) {
    if (q != 3 && q != 5 && q != 7) throw Error(ErrorCode::InvalidArgument, "negative scan supports q in {3,5,7}");
    FiniteRing F = FiniteRing::field_of_degree(q, 1);
    std::vector<std::vector<Mat2>> by_det(q);
    for (i64 a = 0; a < q; ++a)
        for (i64 b = 0; b < q; ++b)
            for (i64 c = 0; c < q; ++c)
                for (i64 d = 0; d < q; ++d) {
                    Mat2 m{a, b, c, d};
                    i64 dt = mat::det(F, m);
                    if (dt) by_det[dt].push_back(m);
                }
    NegativeRecord r;
    r.q = q;
    for (i64 dx = 1; dx < q; ++dx)
        for (auto& x : by_det[dx])
            for (auto& y : by_det[F.inv(dx)]) {
                ++r.pairs;
                if (rank_over_field(F, kron_minus_identity(F, x, y)) == 3) ++r.violations;
            }
    return r;
}

NegativeRecord negative_check(const DirichletCharacter& ef, const DirichletCharacter& eg, i64 q) {
    NegativeRecord r = negative_scan(q);
    i64 m = lcm(ef.modulus(), eg.modulus());
    r.applies = char_mul(ef.extend(m), eg.extend(m)).is_trivial();
    return r;
}

// ---------------------------------------------------------------- good primes

nlohmann::json GoodPrimeVerdict::to_json() const {
    nlohmann::json j = {{"p", p},
                        {"p_ge_5", p_ge_5},
                        {"p_ge_7", p_ge_7},
                        {"prime_to_levels", prime_to_levels},
                        {"outside_bad_set", outside_bad_set},
                        {"unramified", unramified},
                        {"pair_image_conclusion_assumed", pair_image_assumed},
                        {"good", good()}};
    if (scan_support) j["scan_support"] = *scan_support;
    return j;
}

i64 hyp_modulus(const FormProfile& f, const FormProfile& g) {
    i64 L = lcm(f.level, g.level);
    return (f.level % 2 && g.level % 2) ? L : 4 * L;
}

GoodPrimeVerdict good_prime(const FormProfile& f, const FormProfile& g, i64 p) {
    GoodPrimeVerdict v;
    v.p = p;
    v.p_ge_5 = p >= 5 && is_prime(p);
    v.p_ge_7 = p >= 7 && is_prime(p);
    v.prime_to_levels = (f.level * g.level) % p != 0;
    auto divides = [&](const mpz_class& d) { return mpz_divisible_ui_p(d.get_mpz_t(), static_cast<unsigned long>(p)) != 0; };
    v.unramified = !divides(f.field.discriminant()) && !divides(g.field.discriminant());
    v.outside_bad_set = v.unramified && (2 * hyp_modulus(f, g)) % p != 0;
    return v;
}

namespace {

void require_good(const FormProfile& f, const FormProfile& g, i64 p) {
    auto v = good_prime(f, g, p);
    if (!v.p_ge_5) throw Error(ErrorCode::BadPrime, "p must be a prime >= 5");
    if (!v.prime_to_levels) throw Error(ErrorCode::BadPrime, "p divides a level");
    if (!v.unramified) throw Error(ErrorCode::BadPrime, "p divides a coefficient field discriminant");
}

std::vector<FieldAutomorphism> autos_of(const FormProfile& f) {
    std::vector<FieldAutomorphism> out{identity_automorphism(f.field)};
    for (auto& t : f.gamma)
        if (std::find(out.begin(), out.end(), t.gamma) == out.end()) out.push_back(t.gamma);
    return out;
}

// chi_gamma for gamma in the decomposition group of the chosen prime
std::vector<DirichletCharacter> decomposition_chars(const FormProfile& f, i64 p, std::size_t idx) {
    auto primes = residue_primes(f.field, p);
    if (idx >= primes.size()) throw Error(ErrorCode::InvalidArgument, "no residue prime with that index");
    auto D = decomposition_group(f.field, autos_of(f), primes[idx]);
    std::vector<DirichletCharacter> out;
    for (auto& t : f.gamma)
        if (std::find(D.begin(), D.end(), t.gamma) != D.end()) out.push_back(t.chi);
    return out;
}

bool all_one(const std::vector<DirichletCharacter>& chis, i64 u) {
    return std::all_of(chis.begin(), chis.end(), [&](const DirichletCharacter& c) { return c(u).is_one(); });
}

bool product_trivial(const FormProfile& f, const FormProfile& g) {
    i64 m = lcm(f.character.modulus(), g.character.modulus());
    return char_mul(f.character.extend(m), g.character.extend(m)).is_trivial();
}

HypWitness diag_witness(i64 u, const RootOfUnity& ef, const RootOfUnity& eg, const mpq_class& x, i64 p) {
    HypWitness w;
    w.u = u;
    mpq_class y = 1 / x;
    w.a0 = mono_diag({x, {}}, {1 / x, ef});
    w.b0 = mono_diag({y, {}}, {1 / y, eg});
    w.rank0 = rank_char0(w.a0, w.b0);
    w.residue = residue_field_for(p, lcm(ef.order, eg.order));
    w.a = reduce_mono(w.a0, w.residue);
    w.b = reduce_mono(w.b0, w.residue);
    w.cert = tensor_coker_certificate(w.residue, w.a, w.b);
    w.scalars = {{"x", x.get_str()}, {"y", y.get_str()}};
    return w;
}

// x in 1..p-1 with x^-2 ef != 1 and x^2 eg != 1 in the residue field
std::optional<i64> residue_scalar(const RootOfUnity& ef, const RootOfUnity& eg, i64 p) {
    FiniteRing F = residue_field_for(p, lcm(ef.order, eg.order));
    i64 rf = reduce_root_of_unity(ef, F), rg = reduce_root_of_unity(eg, F), one = F.from_int(1);
    for (i64 x = 1; x < p; ++x) {
        i64 x2 = F.from_int(x * x % p);
        if (F.mul(F.inv(x2), rf) != one && F.mul(x2, rg) != one) return x;
    }
    return std::nullopt;
}

const char* kLiftNote = "tau is represented by its image pair; the Galois lift is assumed";

// shared u-search for the diagonal constructions
HypStatus diagonal_search(const FormProfile& f, const FormProfile& g, i64 p, i64 N,
                          const std::function<bool(i64)>& admissible, const std::string& criterion) {
    HypStatus st;
    st.criterion = criterion;
    st.conditions.push_back(kLiftNote);
    st.conditions.push_back("conclusion of the open-image theorem assumed at p = " + std::to_string(p));
    std::optional<i64> first;
    for (i64 u = 1; u < N; ++u) {
        if (std::gcd(u, N) != 1) continue;
        RootOfUnity ef = f.character(u), eg = g.character(u);
        if ((ef * eg).is_one() || !admissible(u)) continue;
        if (!first) first = u;
        if (p < 7 || is_one_mod_p(ef * eg, p)) continue;
        auto x = residue_scalar(ef, eg, p);
        if (!x) continue;
        HypWitness w = diag_witness(u, ef, eg, mpq_class(static_cast<long>(*x)), p);
        if (w.rank0 == 3 && w.cert.residue_rank == 3 && w.cert.free_rank_one) {
            st.holds_V = st.holds_T = Tri::Yes;
            st.witness = w;
            st.conditions.push_back("strong branch: p >= 7 and epsilon_f epsilon_g(u) != 1 mod p");
            return st;
        }
    }
    if (!first) {
        st.conditions.push_back("NoSuitableU: no admissible u modulo " + std::to_string(N));
        return st;
    }
    RootOfUnity ef = f.character(*first), eg = g.character(*first);
    HypWitness w = diag_witness(*first, ef, eg, mpq_class(2), p);
    if (w.rank0 == 3) {
        st.holds_V = Tri::Yes;
        st.witness = w;
        st.conditions.push_back("strong branch unavailable at this prime; T left undecided");
    }
    return st;
}

}  // namespace

HypStatus check_existence_tau(const FormProfile& f, const FormProfile& g, i64 p, std::size_t prime_f,
                              std::size_t prime_g) {
    require_good(f, g, p);
    i64 N = hyp_modulus(f, g);
    if (product_trivial(f, g)) {
        HypStatus st;
        st.criterion = "negative";
        st.holds_V = st.holds_T = Tri::No;
        st.conditions.push_back("NoSuitableU: epsilon_f epsilon_g is trivial");
        st.conditions.push_back("negative proposition applies (exhaustive det(xy) = 1 scan)");
        return st;
    }
    auto cf = decomposition_chars(f, p, prime_f), cg = decomposition_chars(g, p, prime_g);
    return diagonal_search(f, g, p, N, [&](i64 u) { return all_one(cf, u) && all_one(cg, u); }, "existence-tau");
}

HypStatus check_existence_tau_II(const FormProfile& f, const FormProfile& g, i64 p) {
    require_good(f, g, p);
    i64 N = hyp_modulus(f, g);
    HypStatus st;
    st.criterion = "existence-tau-II";
    st.conditions.push_back(kLiftNote);
    const RootOfUnity minus = RootOfUnity::make(2, 1);
    for (i64 u = 1; u < N; ++u) {
        if (std::gcd(u, N) != 1 || g.character(u) != minus) continue;
        bool ok = std::all_of(f.gamma.begin(), f.gamma.end(), [&](const InnerTwist& t) { return t.chi(u).is_one(); });
        if (!ok) continue;
        HypWitness w;
        w.u = u;
        w.a0 = mono_from_ints(1, 1, 0, 1);
        w.b0 = mono_from_ints(1, 0, 0, -1);
        w.rank0 = rank_char0(w.a0, w.b0);
        w.residue = FiniteRing::field_of_degree(p, 1);
        w.a = reduce_mono(w.a0, w.residue);
        w.b = reduce_mono(w.b0, w.residue);
        w.cert = tensor_coker_certificate(w.residue, w.a, w.b);
        w.scalars = {{"alpha", "2"}, {"alpha_squared", std::to_string(4 % p)}};
        if (w.rank0 == 3) st.holds_V = Tri::Yes;
        if (w.rank0 == 3 && w.cert.free_rank_one) st.holds_T = Tri::Yes;
        st.witness = w;
        st.conditions.push_back("alpha normalised so that alpha^2 != 1 mod p");
        return st;
    }
    st.conditions.push_back("NoSuitableU: no u with epsilon_g(u) = -1 in the kernel of every chi_gamma of f");
    return st;
}

HypStatus check_cm_case(const FormProfile& f, const FormProfile& g, i64 p, std::size_t prime_f, std::size_t prime_g) {
    if (!g.cm_disc) throw Error(ErrorCode::InvalidArgument, "g carries no CM discriminant");
    require_good(f, g, p);
    i64 D = *g.cm_disc;
    if (D % p == 0) throw Error(ErrorCode::RamifiedInK, "p ramifies in the CM field");
    HypStatus st;
    st.criterion = "cm";
    auto pf = residue_primes(f.field, p);
    auto pg = residue_primes(g.field, p);
    if (prime_f >= pf.size() || prime_g >= pg.size()) throw Error(ErrorCode::InvalidArgument, "no residue prime with that index");
    auto flags = residue_equality_flags(f.field, autos_of(f), pf[prime_f]);
    if (!flags.F_loc_equals_L_loc) {
        st.conditions.push_back("LocalFieldTooBig: decomposition group of the prime of L_f is nontrivial");
        return st;
    }
    if (pg[prime_g].f != 1 || kronecker(D, p) != 1) {
        st.conditions.push_back("LocalFieldTooBig: residue degree of g's coefficient field at p exceeds 1");
        return st;
    }
    i64 N = lcm(hyp_modulus(f, g), std::abs(D) % 4 == 0 ? std::abs(D) : 4 * std::abs(D));
    DirichletCharacter eK = kronecker_character(D, N);
    st = diagonal_search(f, g, p, N, [&](i64 u) { return eK(u).is_one(); }, "cm");
    st.conditions.push_back("image of G_K contains the expected torus (assumed)");
    return st;
}

HypStatus check_weight_one(const FormProfile& f, const FormProfile& g, i64 p, bool generic) {
    if (g.weight != 1) throw Error(ErrorCode::InvalidArgument, "g must have weight one");
    if (std::gcd(f.level, g.level) != 1) throw Error(ErrorCode::LevelsNotCoprime, "levels share a factor");
    if (p < 5 || !is_prime(p) || (f.level * g.level) % p == 0) throw Error(ErrorCode::BadPrime, "bad prime for the weight one criterion");
    HypStatus st;
    st.criterion = "weight-one";
    st.conditions.push_back(kLiftNote);
    int r = generic ? 0 : 1;
    HypWitness w;
    w.a0 = mono_from_ints(-1, 0, 0, 1);
    w.b0 = mono_from_ints(1, ipow(p, static_cast<unsigned>(r)), 0, 1);
    w.rank0 = rank_char0(w.a0, w.b0);
    w.residue = FiniteRing::field_of_degree(p, 1);
    w.a = reduce_mono(w.a0, w.residue);
    w.b = reduce_mono(w.b0, w.residue);
    w.cert = tensor_coker_certificate(w.residue, w.a, w.b);
    w.scalars = {{"r", std::to_string(r)}};
    if (w.rank0 == 3) st.holds_V = Tri::Yes;
    if (w.rank0 == 3 && w.cert.residue_rank == 3 && w.cert.free_rank_one) st.holds_T = Tri::Yes;
    st.conditions.push_back(generic ? "generic p: r = 0" : "non-generic p: r = 1");
    st.witness = w;
    return st;
}

std::optional<HypWitness> tau_search_modp(const SubgroupClosure& U, const std::optional<Elem>& coset_rep) {
    const Ambient& amb = U.ambient();
    if (amb.size() != 2 || amb[0].ring != amb[1].ring || !amb[0].ring.is_field() || amb[0].tag == AmbientTag::PSL2 ||
        amb[0].tag == AmbientTag::GL1 || amb[1].tag == AmbientTag::PSL2 || amb[1].tag == AmbientTag::GL1)
        throw Error(ErrorCode::InvalidArgument, "tau_search_modp needs GL2/SL2 blocks over one finite field");
    const FiniteRing& F = amb[0].ring;
    for (auto& e : U.elements()) {
        Elem x = coset_rep ? Elem{mat::mul(F, (*coset_rep)[0], e[0]), mat::mul(F, (*coset_rep)[1], e[1])} : e;
        if (rank_over_field(F, kron_minus_identity(F, x[0], x[1])) != 3) continue;
        HypWitness w;
        w.residue = F;
        w.a = x[0];
        w.b = x[1];
        w.cert = tensor_coker_certificate(F, w.a, w.b);
        w.scalars = {{"source", "search"}};
        return w;
    }
    return std::nullopt;
}

}  // namespace adelic
