#pragma once
#include <cstdint>
#include <utility>
#include <vector>

namespace adelic {

using i64 = std::int64_t;
using u64 = std::uint64_t;

inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 mulmod(i64 a, i64 b, i64 m) {
    return static_cast<i64>((static_cast<__int128>(a) * b) % m);
}

i64 powmod(i64 a, u64 e, i64 m);
i64 invmod(i64 a, i64 m);  // throws NotCoprime
i64 lcm(i64 a, i64 b);
i64 ipow(i64 a, unsigned e);

bool is_prime(i64 n);
std::vector<std::pair<i64, int>> factorize(i64 n);
std::vector<i64> divisors(i64 n);
i64 euler_phi(i64 n);
std::vector<i64> primes_upto(i64 n);
int valuation(i64 n, i64 p);

// x = a mod m, x = b mod n, gcd(m, n) = 1
i64 crt(i64 a, i64 m, i64 b, i64 n);

// Kronecker symbol (d / n), n >= 1
int kronecker(i64 d, i64 n);

// multiplicative order of a modulo m (a a unit)
i64 mult_order(i64 a, i64 m);

}  // namespace adelic
