#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adelic/finitegroups.hpp"
#include "adelic/newforms.hpp"
#include "adelic/numberfields.hpp"
#include "json.hpp"

namespace adelic {

// The mod-p group {x in prod_v GL2(k_v) : det x_v = mu for all v, mu in (F_p^x)^(k-1)}.
// One block per prime v of F above p, i.e. per Gamma-orbit of primes of L.
struct DaggerSpec {
    i64 p = 0;
    int weight = 2;
    std::vector<FiniteRing> blocks;
};

// blocks from the Gamma-orbits of primes of L above p; k_v has degree f_P / |D_P|
DaggerSpec dagger_spec(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& gamma, i64 p, i64 level,
                       int weight);
DaggerSpec dagger_spec(const Newform& f, const InnerTwistGroup& G, i64 p);

Ambient dagger_ambient(const DaggerSpec& s);
i64 dagger_order(const DaggerSpec& s);
bool dagger_member(const DaggerSpec& s, const Elem& x);
// exhaustive count over all matrices of every block
i64 dagger_order_bruteforce(const DaggerSpec& s);

struct PapierSolution {
    ResiduePrime prime;
    FiniteRing residue_field;
    i64 u = 1;
    // (gamma, chi_gamma(u)) for every inner twist whose gamma fixes the prime
    std::vector<std::pair<FieldAutomorphism, RootOfUnity>> conditions;
    i64 alpha = 1;
    i64 generator = 0;  // canonical generator of the residue field, for the record
    RootOfUnity eps_u;
    Mat2 coset;  // diag(alpha, eps(u) alpha^-1), coset of SL2
};

// alpha != 0 in k_P with gamma(alpha) = c_gamma alpha for the given (gamma, c_gamma)
i64 papier_solve(const NumberFieldQ& L, const ResiduePrime& P, const FiniteRing& kP,
                 const std::vector<std::pair<FieldAutomorphism, i64>>& conditions);
PapierSolution papier_coset(const Newform& f, const InnerTwistGroup& G, const ResiduePrime& P, i64 u);
// gamma(alpha) == c alpha for every condition, evaluated directly in k_P
bool papier_verify(const NumberFieldQ& L, const PapierSolution& s, const Newform& f);

struct GoursatResult {
    enum class Kind { Full, Graph, NotSurjective } kind = Kind::Full;
    std::size_t split = 0;
    i64 order = 0, order1 = 0, order2 = 0;
    std::vector<Elem> N1, N2;
    // coset representatives (minimal keys) paired by the isomorphism G1/N1 -> G2/N2
    std::vector<std::pair<Elem, Elem>> iso;
};

std::pair<Ambient, Ambient> split_ambient(const Ambient& amb, std::size_t split);
GoursatResult goursat_classify(const SubgroupClosure& U, std::size_t split, i64 order1, i64 order2);
std::vector<Elem> goursat_regenerate(const GoursatResult& r, const Ambient& amb);

// mod-p fibre product of the two (dagger) groups over GL1: blocks of f, blocks of g,
// then lambda in GL1(F_p) stored as diag(lambda, 1); det x = lambda^(1-k_f), det y = lambda^(1-k_g)
struct PairSpec {
    i64 p = 0;
    std::vector<FiniteRing> f_blocks, g_blocks;
    int kf = 2, kg = 2;
};

Ambient pair_ambient(const PairSpec& s);
i64 fibre_order(const PairSpec& s);
bool fibre_member(const PairSpec& s, const Elem& x);
// generators of the full fibre product
std::vector<Elem> fibre_generators(const PairSpec& s);

struct EntanglementDatum {
    std::size_t v = 0, w = 0;  // block indices into f_blocks, g_blocks
    int frobenius = 0;         // y_w = s lambda^e P phi^j(x_v) P^-1
    std::string sign;          // "+", "-" (s = Legendre(lambda)) or "+-"
    int exponent = 0;          // (k_f - k_g) / 2
    Mat2 conj;                 // P
};

enum class LocalVerdict { FullDagger, OpenIndexBounded, Entangled, Unknown };
std::string verdict_name(LocalVerdict v);

struct LocalImageReport {
    i64 p = 0;
    LocalVerdict verdict = LocalVerdict::Unknown;
    i64 index = 1;  // for OpenIndexBounded
    std::optional<EntanglementDatum> datum;
    std::vector<std::string> evidence;
    nlohmann::json to_json() const;
};

LocalImageReport pair_entanglement_classify(const SubgroupClosure& U, const PairSpec& s);
std::vector<Elem> regenerate_entangled(const SubgroupClosure& U, const PairSpec& s, const EntanglementDatum& d);

struct ScanResult {
    bool all_primes = false;  // every tested norm vanished
    std::vector<i64> candidates;
    std::vector<std::pair<i64, mpz_class>> norms;  // (l, integer norm)
};

// l ranges over primes <= l_bound, prime to N_f N_g, lying in H (kernel of all chi of both groups)
ScanResult exceptional_prime_scan(const Newform& f, const Newform& g, const InnerTwistGroup& Gf,
                                  const InnerTwistGroup& Gg, const std::vector<FieldAutomorphism>& gammas,
                                  i64 l_bound, i64 p_bound, const std::optional<CompositeField>& composite = std::nullopt);
i64 pair_modulus(i64 nf, i64 ng);

struct DetImage {
    i64 modulus = 1;
    std::vector<i64> generators;  // of the finite-level image in (Z/modulus)^x
    enum class Tail { Full, Squares, AllSquaresOrAllNonsquares } tail = Tail::Full;
};

struct AuditResult {
    bool open = false;
    i64 index_bound = 1;
    std::optional<std::string> failing;
    std::vector<std::string> notes;
};

AuditResult adelic_openness_audit(const std::vector<LocalImageReport>& reports, const std::vector<i64>& S,
                                  const DetImage& det);

struct CounterexampleRecord {
    std::vector<i64> primes;
    i64 modulus = 1, group_order = 0, subgroup_order = 0, index = 0;
    bool is_subgroup = false, projections_surjective = false;
    std::vector<i64> elements;  // residues mod the product of the primes
};

CounterexampleRecord counterexample_subgroup(const std::vector<i64>& primes);

struct CmImage {
    i64 p = 0;
    int weight = 2;
    i64 disc = 0;
    bool split = true;
    FiniteRing field = FiniteRing::residue(2, 1);  // F_p split, F_{p^2} inert
    i64 order = 0;
    bool contains(const Mat2& m) const;
    std::vector<Mat2> elements() const;
};

CmImage cm_expected_image_modp(int k, i64 disc, i64 p);

}  // namespace adelic
