#pragma once
#include <memory>
#include <string>
#include <vector>

#include "adelic/arith.hpp"
#include "adelic/polymodp.hpp"

namespace adelic {

// Z/p^n or F_p[x]/(g). Elements are integers in [0, size); field elements
// are the base-p encodings of their coefficient vectors (constant first).
class FiniteRing {
public:
    enum class Kind { Residue, Field };

    static FiniteRing residue(i64 p, int n);
    static FiniteRing field(i64 p, const polyp::Poly& modulus);
    static FiniteRing field_of_degree(i64 p, int f);

    Kind kind() const { return d_->kind; }
    i64 p() const { return d_->p; }
    // exponent n for Z/p^n, degree f for F_{p^f}
    int n() const { return d_->n; }
    i64 size() const { return d_->size; }
    const polyp::Poly& modulus() const { return d_->mod; }
    bool is_field() const { return d_->kind == Kind::Field || d_->n == 1; }
    // size of the residue field
    i64 residue_size() const { return d_->kind == Kind::Field ? d_->size : d_->p; }
    std::string describe() const;

    i64 add(i64 a, i64 b) const;
    i64 sub(i64 a, i64 b) const;
    i64 neg(i64 a) const;
    i64 mul(i64 a, i64 b) const;
    i64 inv(i64 a) const;
    i64 pow(i64 a, i64 e) const;
    i64 from_int(i64 a) const;
    bool is_unit(i64 a) const;
    // reduction to the residue field (identity for fields)
    i64 to_residue(i64 a) const;
    i64 frobenius(i64 a, int j) const;

    polyp::Poly coeffs(i64 a) const;
    i64 encode(const polyp::Poly& c) const;

    // smallest encoding generating the multiplicative group (fields only)
    i64 canonical_generator() const;
    // an element of order dividing q-1 equal to g^((q-1)/m * e); fields only
    i64 root_of_unity(i64 m, i64 e) const;
    i64 mult_order(i64 a) const;

    bool operator==(const FiniteRing& o) const;
    bool operator!=(const FiniteRing& o) const { return !(*this == o); }

private:
    struct Data {
        Kind kind;
        i64 p;
        int n;
        i64 size;
        polyp::Poly mod;
        i64 gen = -1;
        std::vector<i64> log, exp;  // fields with tables
    };
    std::shared_ptr<const Data> d_;
    i64 field_mul_poly(i64 a, i64 b) const;
    static FiniteRing build_field(i64 p, const polyp::Poly& modulus);
};

}  // namespace adelic
