#pragma once
#include <cstdint>
#include <vector>

#include "adelic/arith.hpp"

// Dense polynomials over F_p, constant term first, no trailing zeros.
namespace adelic::polyp {

using Poly = std::vector<i64>;

void trim(Poly& a);
int deg(const Poly& a);  // -1 for zero
Poly reduce(const std::vector<i64>& coeffs, i64 p);
Poly add(const Poly& a, const Poly& b, i64 p);
Poly sub(const Poly& a, const Poly& b, i64 p);
Poly mul(const Poly& a, const Poly& b, i64 p);
Poly scale(const Poly& a, i64 c, i64 p);
void divmod(const Poly& a, const Poly& b, i64 p, Poly& q, Poly& r);
Poly rem(const Poly& a, const Poly& b, i64 p);
Poly monic(const Poly& a, i64 p);
Poly gcd(Poly a, Poly b, i64 p);  // monic
Poly mulmod(const Poly& a, const Poly& b, const Poly& m, i64 p);
Poly powmod(Poly base, u64 e, const Poly& m, i64 p);
Poly derivative(const Poly& a, i64 p);
i64 eval(const Poly& a, i64 x, i64 p);
// extended gcd: s a + t b = g (monic)
Poly xgcd(const Poly& a, const Poly& b, i64 p, Poly& s, Poly& t);

bool is_irreducible(const Poly& f, i64 p);
bool is_squarefree(const Poly& f, i64 p);

// monic irreducible factors of a monic squarefree polynomial, sorted by
// (degree, coefficients); deterministic (Cantor-Zassenhaus, fixed seed)
std::vector<Poly> factor_squarefree(const Poly& f, i64 p);

// first monic irreducible of degree d in the order of base-p encodings
Poly first_irreducible(int d, i64 p);

}  // namespace adelic::polyp
