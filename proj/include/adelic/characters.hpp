#pragma once
#include <memory>
#include <string>
#include <vector>

#include "adelic/arith.hpp"
#include "adelic/finite_ring.hpp"

namespace adelic {

// (Z/NZ)^x with CRT generators: per prime power in ascending order, the
// smallest primitive root mod p^e for odd p; -1 (and 5 when e >= 3) for 2^e.
class UnitGroupZN {
public:
    explicit UnitGroupZN(i64 n);

    i64 modulus() const { return n_; }
    const std::vector<i64>& generators() const { return gens_; }
    const std::vector<i64>& orders() const { return orders_; }
    i64 order() const { return phi_; }

    std::vector<i64> exponents(i64 u) const;
    i64 from_exponents(const std::vector<i64>& e) const;

private:
    struct Comp {
        i64 p;
        int e;
        i64 q;
        std::size_t first;      // index of its first generator
        std::vector<int> log;   // discrete log of the cyclic part
    };
    i64 n_;
    i64 phi_;
    std::vector<i64> gens_, orders_;
    std::vector<Comp> comps_;
};

std::shared_ptr<const UnitGroupZN> unit_group(i64 n);

// e / m in lowest terms, representing exp(2 pi i e / m)
struct RootOfUnity {
    i64 order = 1;
    i64 exp = 0;

    static RootOfUnity make(i64 m, i64 e);
    RootOfUnity operator*(const RootOfUnity& o) const;
    RootOfUnity inv() const { return make(order, -exp); }
    RootOfUnity pow(i64 k) const { return make(order, mulmod(mod(exp, order), mod(k, order), order)); }
    bool is_one() const { return order == 1; }
    bool operator==(const RootOfUnity& o) const { return order == o.order && exp == o.exp; }
    bool operator!=(const RootOfUnity& o) const { return !(*this == o); }
    std::string str() const;
};

class DirichletCharacter {
public:
    DirichletCharacter(std::shared_ptr<const UnitGroupZN> g, std::vector<RootOfUnity> images);

    static DirichletCharacter trivial(i64 n);
    // generator i maps to exp(2 pi i a_i / ord_i)
    static DirichletCharacter from_exponents(i64 n, const std::vector<i64>& a);

    i64 modulus() const { return g_->modulus(); }
    const UnitGroupZN& group() const { return *g_; }
    const std::vector<RootOfUnity>& images() const { return images_; }
    RootOfUnity operator()(i64 u) const;
    i64 order() const;
    bool is_trivial() const;
    bool is_odd() const { return (*this)(-1) != RootOfUnity{}; }
    DirichletCharacter extend(i64 m) const;  // to a multiple of the modulus
    bool operator==(const DirichletCharacter& o) const;
    bool operator!=(const DirichletCharacter& o) const { return !(*this == o); }
    std::string str() const;

private:
    std::shared_ptr<const UnitGroupZN> g_;
    std::vector<RootOfUnity> images_;
};

RootOfUnity char_eval(const DirichletCharacter& chi, i64 u);
DirichletCharacter char_mul(const DirichletCharacter& a, const DirichletCharacter& b);
DirichletCharacter char_inverse(const DirichletCharacter& a);
DirichletCharacter char_pow(const DirichletCharacter& a, i64 k);
i64 char_conductor(const DirichletCharacter& chi);
// values raised to the t-th power: the action of zeta -> zeta^t
DirichletCharacter char_conjugate_by(const DirichletCharacter& chi, i64 t);
// equality as functions on integers coprime to both moduli
bool same_character(const DirichletCharacter& a, const DirichletCharacter& b);
std::vector<DirichletCharacter> all_characters(i64 n);
// u -> (d / u) as a character modulo `modulus` (|d| must divide it, up to 4)
DirichletCharacter kronecker_character(i64 d, i64 modulus);
// +1 / -1 for a quadratic (or trivial) character
int quadratic_sign(const RootOfUnity& z);

bool is_one_mod_p(const RootOfUnity& z, i64 p);

// zeta_m^e -> g^((q-1)/m' * ...) with g the canonical generator; the p-part maps to 1
i64 reduce_root_of_unity(const RootOfUnity& z, const FiniteRing& f);

}  // namespace adelic
