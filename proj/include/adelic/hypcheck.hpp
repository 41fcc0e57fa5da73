#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adelic/finitegroups.hpp"
#include "adelic/newforms.hpp"
#include "json.hpp"

namespace adelic {

// what the criteria consume from a newform
struct FormProfile {
    i64 level = 1;
    int weight = 2;
    DirichletCharacter character = DirichletCharacter::trivial(1);
    NumberFieldQ field = NumberFieldQ::rationals();
    std::vector<InnerTwist> gamma;  // the inner twist group, identity included
    std::optional<i64> cm_disc;
};

FormProfile profile_of(const Newform& f, const InnerTwistGroup& G);

// c * zeta_m^e
struct Monomial {
    mpq_class c = 1;
    RootOfUnity z;
};
using MonoMat2 = std::array<Monomial, 4>;  // a b c d

MonoMat2 mono_diag(const Monomial& x, const Monomial& y);
MonoMat2 mono_from_ints(i64 a, i64 b, i64 c, i64 d);
// rank of a (x) b - 1 over Q(mu_W), W the lcm of the orders involved
int rank_char0(const MonoMat2& a, const MonoMat2& b);
// reduction at the canonical prime above p; denominators must be prime to p
Mat2 reduce_mono(const MonoMat2& m, const FiniteRing& F);
// F_{p^f}, f the order of p modulo the prime-to-p part of W
FiniteRing residue_field_for(i64 p, i64 W);

enum class Tri { Yes, No, Unknown };
std::string tri_name(Tri t);

struct HypWitness {
    std::optional<i64> u;
    MonoMat2 a0, b0;  // characteristic-zero images
    int rank0 = 0;
    FiniteRing residue = FiniteRing::residue(2, 1);
    Mat2 a, b;  // reductions into the residue field
    TensorCertificate cert;
    std::map<std::string, std::string> scalars;
    nlohmann::json to_json() const;
};

struct HypStatus {
    Tri holds_V = Tri::Unknown, holds_T = Tri::Unknown;
    std::string criterion;
    std::optional<HypWitness> witness;
    std::vector<std::string> conditions;
    nlohmann::json to_json() const;
};

// re-run rank and certificate on the stored matrices
bool witness_checks(const HypWitness& w, bool need_T);

struct NegativeRecord {
    bool applies = false;
    i64 q = 0;
    i64 pairs = 0;
    i64 violations = 0;  // pairs with rank(x (x) y - 1) = 3
};

NegativeRecord negative_scan(i64 q);
NegativeRecord negative_check(const DirichletCharacter& ef, const DirichletCharacter& eg, i64 q);

struct GoodPrimeVerdict {
    i64 p = 0;
    bool p_ge_5 = false, p_ge_7 = false, prime_to_levels = false, outside_bad_set = false, unramified = false;
    bool pair_image_assumed = true;
    std::optional<bool> scan_support;  // p excluded by an exceptional-prime scan
    bool good() const { return p_ge_5 && prime_to_levels && outside_bad_set && unramified; }
    nlohmann::json to_json() const;
};

GoodPrimeVerdict good_prime(const FormProfile& f, const FormProfile& g, i64 p);

// the pair modulus: LCM of levels, times 4 when one of them is even
i64 hyp_modulus(const FormProfile& f, const FormProfile& g);

HypStatus check_existence_tau(const FormProfile& f, const FormProfile& g, i64 p, std::size_t prime_f = 0,
                              std::size_t prime_g = 0);
HypStatus check_existence_tau_II(const FormProfile& f, const FormProfile& g, i64 p);
HypStatus check_cm_case(const FormProfile& f, const FormProfile& g, i64 p, std::size_t prime_f = 0,
                        std::size_t prime_g = 0);
HypStatus check_weight_one(const FormProfile& f, const FormProfile& g, i64 p, bool generic);

// first (a, b) in rep * U (breadth-first order) with rank(a (x) b - 1) = 3 over the field
std::optional<HypWitness> tau_search_modp(const SubgroupClosure& U, const std::optional<Elem>& coset_rep = std::nullopt);

}  // namespace adelic
