#pragma once
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adelic/finite_ring.hpp"
#include "adelic/smith.hpp"

namespace adelic {

struct Mat2 {
    i64 a = 1, b = 0, c = 0, d = 1;
    auto operator<=>(const Mat2&) const = default;
};

namespace mat {
Mat2 identity(const FiniteRing& R);
Mat2 scalar(const FiniteRing& R, i64 s);
Mat2 diag(const FiniteRing& R, i64 x, i64 y);
Mat2 from_ints(const FiniteRing& R, i64 a, i64 b, i64 c, i64 d);
Mat2 mul(const FiniteRing& R, const Mat2& x, const Mat2& y);
Mat2 inv(const FiniteRing& R, const Mat2& x);
Mat2 neg(const FiniteRing& R, const Mat2& x);
Mat2 scale(const FiniteRing& R, i64 s, const Mat2& x);
Mat2 pow(const FiniteRing& R, Mat2 x, i64 e);
i64 det(const FiniteRing& R, const Mat2& x);
i64 trace(const FiniteRing& R, const Mat2& x);
Mat2 frobenius(const FiniteRing& R, const Mat2& x, int j);
// reduce entries of a matrix over Z/p^n into the ring `to` (Z/p^m, m <= n, or F_p)
Mat2 reduce(const FiniteRing& from, const FiniteRing& to, const Mat2& x);
bool is_scalar(const Mat2& x);
// lexicographically smaller of x and -x
Mat2 psl2_canonical(const FiniteRing& R, const Mat2& x);
std::string to_string(const Mat2& x);
}  // namespace mat

enum class AmbientTag { GL2, SL2, PSL2, GL1 };

struct Factor {
    FiniteRing ring;
    AmbientTag tag;
};

using Ambient = std::vector<Factor>;
using Elem = std::vector<Mat2>;

std::string tag_name(AmbientTag t);
i64 factor_order(const Factor& f);
i64 ambient_order(const Ambient& amb);

namespace elem {
Elem identity(const Ambient& amb);
Elem mul(const Ambient& amb, const Elem& x, const Elem& y);
Elem inv(const Ambient& amb, const Elem& x);
Elem canonical(const Ambient& amb, Elem x);
std::string key(const Elem& x);
bool valid(const Ambient& amb, const Elem& x);
}  // namespace elem

constexpr i64 kDefaultClosureBound = 20'000'000;

class SubgroupClosure {
public:
    SubgroupClosure(Ambient ambient, std::vector<Elem> generators, i64 bound = kDefaultClosureBound);

    const Ambient& ambient() const { return ambient_; }
    const std::vector<Elem>& generators() const { return gens_; }
    i64 bound() const { return bound_; }
    bool enumerated() const { return !elements_.empty(); }
    const std::vector<Elem>& elements() const;
    i64 order() const;
    bool contains(const Elem& x) const;
    // index in the breadth-first element order
    std::optional<std::size_t> index_of(const Elem& x) const;

    void enumerate();

private:
    Ambient ambient_;
    std::vector<Elem> gens_;
    i64 bound_;
    std::vector<Elem> elements_;
    std::unordered_map<std::string, std::size_t> index_;
};

// breadth-first closure from the identity, generators in index order
SubgroupClosure closure(const std::vector<Elem>& gens, const Ambient& ambient, i64 bound = kDefaultClosureBound);

// images of gens in prod PSL2(F_p) generate the whole product
bool is_full_sl2_lift(const std::vector<Elem>& gens, const std::vector<FiniteRing>& rings,
                      i64 bound = kDefaultClosureBound);

enum class Psl2Tag { Cyclic, Dihedral, A4, S4, A5, PSL2Subfield, PGL2Subfield, BorelContained, Full };

struct Psl2Class {
    Psl2Tag tag;
    i64 subfield_q = 0;  // for the subfield tags
    i64 order = 0;
    std::string name() const;
};

i64 psl2_order(i64 q);
i64 pgl2_order(i64 q);
// element orders of a subgroup of PSL2 (orders modulo +-1)
std::map<i64, i64> psl2_order_histogram(const SubgroupClosure& sub);
Psl2Class dickson_classify(const SubgroupClosure& sub);

struct TensorCertificate {
    i64 p = 0;
    int residue_rank = 0;
    // valuations of the Smith diagonal over the ambient ring; -1 stands for 0
    std::vector<int> smith_valuations;
    bool free_rank_one = false;
    std::string profile() const;
};

// 4x4 matrix of a (x) b - 1, Kronecker convention
RMatrix kron_minus_identity(const FiniteRing& R, const Mat2& a, const Mat2& b);
TensorCertificate tensor_coker_certificate(const FiniteRing& ra, const Mat2& a, const FiniteRing& rb, const Mat2& b);
inline TensorCertificate tensor_coker_certificate(const FiniteRing& r, const Mat2& a, const Mat2& b) {
    return tensor_coker_certificate(r, a, r, b);
}

// profile string from valuations, e.g. (1,1,1,0) or (1,1,p^2,0)
std::string smith_profile_string(const std::vector<int>& vals);

}  // namespace adelic
