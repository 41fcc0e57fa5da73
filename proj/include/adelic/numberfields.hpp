#pragma once
#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "adelic/finite_ring.hpp"
#include "adelic/polymodp.hpp"

namespace adelic {

using ZPoly = std::vector<mpz_class>;  // constant first
using QElem = std::vector<mpq_class>;  // power-basis coordinates

namespace zpoly {
void trim(ZPoly& a);
int deg(const ZPoly& a);
ZPoly mul(const ZPoly& a, const ZPoly& b);
ZPoly derivative(const ZPoly& a);
// exact division by a monic polynomial; nullopt if it does not divide
std::optional<ZPoly> divide_exact(const ZPoly& a, const ZPoly& b);
mpz_class resultant(const ZPoly& a, const ZPoly& b);
mpz_class discriminant(const ZPoly& f);
polyp::Poly mod_p(const ZPoly& a, i64 p);
// irreducibility over Q of a monic integral polynomial (Zassenhaus)
bool is_irreducible(const ZPoly& f);
ZPoly cyclotomic(i64 m);
}  // namespace zpoly

class NumberFieldQ {
public:
    explicit NumberFieldQ(ZPoly poly);
    static NumberFieldQ rationals();
    static NumberFieldQ cyclotomic(i64 m);

    int degree() const { return static_cast<int>(poly_.size()) - 1; }
    const ZPoly& poly() const { return poly_; }
    const mpz_class& discriminant() const { return disc_; }
    bool operator==(const NumberFieldQ& o) const { return poly_ == o.poly_; }

    QElem zero() const { return QElem(degree(), 0); }
    QElem one() const { return from_rational(1); }
    QElem gen() const;
    QElem from_rational(const mpq_class& r) const;

    QElem add(const QElem& a, const QElem& b) const;
    QElem sub(const QElem& a, const QElem& b) const;
    QElem neg(const QElem& a) const;
    QElem mul(const QElem& a, const QElem& b) const;
    QElem scale(const mpq_class& c, const QElem& a) const;
    QElem inv(const QElem& a) const;
    QElem pow(QElem a, i64 e) const;
    bool is_zero(const QElem& a) const;
    mpq_class norm(const QElem& a) const;
    // value of a polynomial with integer coefficients at a
    QElem eval(const ZPoly& f, const QElem& a) const;
    void check(const QElem& a) const;
    std::string str(const QElem& a) const;

private:
    ZPoly poly_;
    mpz_class disc_;
    std::vector<QElem> high_powers_;  // theta^d .. theta^(2d-2) in the basis
    std::vector<std::vector<mpq_class>> mult_matrix(const QElem& a) const;
};

struct ResiduePrime {
    i64 p;
    polyp::Poly g;  // monic irreducible factor mod p
    int f;
    FiniteRing residue_field() const { return FiniteRing::field(p, g); }
    bool operator==(const ResiduePrime& o) const { return p == o.p && g == o.g; }
    std::string str() const;
};

std::vector<ResiduePrime> residue_primes(const NumberFieldQ& L, i64 p);
i64 reduce(const NumberFieldQ& L, const QElem& a, const ResiduePrime& P);
i64 reduce(const NumberFieldQ& L, const QElem& a, const ResiduePrime& P, const FiniteRing& kP);

struct FieldAutomorphism {
    QElem image;  // image of the power-basis root
    bool operator==(const FieldAutomorphism& o) const { return image == o.image; }
};

FieldAutomorphism identity_automorphism(const NumberFieldQ& L);
void verify_automorphism(const NumberFieldQ& L, const FieldAutomorphism& s);
QElem apply(const NumberFieldQ& L, const FieldAutomorphism& s, const QElem& a);
// (s o t)(x) = s(t(x))
FieldAutomorphism compose(const NumberFieldQ& L, const FieldAutomorphism& s, const FieldAutomorphism& t);
void check_group(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G);

// index of the prime s(P) in `primes`
std::size_t prime_image(const NumberFieldQ& L, const FieldAutomorphism& s, const ResiduePrime& P,
                        const std::vector<ResiduePrime>& primes);
std::vector<FieldAutomorphism> decomposition_group(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G,
                                                   const ResiduePrime& P);
// orbits of G on the primes above p, each as a sorted index list
std::vector<std::vector<std::size_t>> prime_orbits(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G,
                                                   const std::vector<ResiduePrime>& primes);

struct ResidueFlags {
    bool F_loc_equals_L_loc;
    int residue_degree;
};
ResidueFlags residue_equality_flags(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G,
                                    const ResiduePrime& P);

// smallest t in [1, w) with s(zeta) = zeta^t, zeta of order w in L
i64 automorphism_exponent(const NumberFieldQ& L, const FieldAutomorphism& s, const QElem& zeta, i64 w);

}  // namespace adelic
