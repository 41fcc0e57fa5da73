#pragma once
#include <gmpxx.h>

#include <vector>

#include "adelic/arith.hpp"
#include "adelic/finite_ring.hpp"

namespace adelic {

using ZMatrix = std::vector<std::vector<mpz_class>>;
using RMatrix = std::vector<std::vector<i64>>;

// invariant factors d1 | d2 | ... (length min(rows, cols)), zeros last
std::vector<mpz_class> integer_smith_form(ZMatrix m);

int rank_over_field(const FiniteRing& f, RMatrix m);

// Smith form over Z/p^n: p-adic valuation of each diagonal entry, -1 for 0
std::vector<int> local_smith_valuations(const FiniteRing& zpn, RMatrix m);

}  // namespace adelic
