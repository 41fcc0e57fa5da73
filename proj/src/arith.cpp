#include "adelic/arith.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "adelic/error.hpp"

namespace adelic {

i64 powmod(i64 a, u64 e, i64 m) {
    if (m == 1) return 0;
    i64 r = 1, b = mod(a, m);
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

i64 invmod(i64 a, i64 m) {
    i64 g = m, x = 0, x1 = 1, a1 = mod(a, m);
    while (a1) {
        i64 q = g / a1;
        std::tie(g, a1) = std::make_pair(a1, g - q * a1);
        std::tie(x, x1) = std::make_pair(x1, x - q * x1);
    }
    if (g != 1) throw Error(ErrorCode::NotCoprime, std::to_string(a) + " is not invertible mod " + std::to_string(m));
    return mod(x, m);
}

i64 lcm(i64 a, i64 b) { return a / std::gcd(a, b) * b; }

i64 ipow(i64 a, unsigned e) {
    i64 r = 1;
    while (e--) r *= a;
    return r;
}

bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 d : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % d == 0) return n == d;
    }
    // deterministic Miller-Rabin for 64-bit inputs
    i64 d = n - 1;
    int s = 0;
    while (d % 2 == 0) d /= 2, ++s;
    for (i64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        i64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) { comp = false; break; }
        }
        if (comp) return false;
    }
    return true;
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
    std::vector<std::pair<i64, int>> out;
    if (n < 0) n = -n;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) n /= p, ++e;
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

std::vector<i64> divisors(i64 n) {
    std::vector<i64> ds{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t cur = ds.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < cur; ++i) ds.push_back(ds[i] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

std::vector<i64> primes_upto(i64 n) {
    std::vector<i64> out;
    if (n < 2) return out;
    std::vector<bool> comp(n + 1, false);
    for (i64 i = 2; i <= n; ++i) {
        if (comp[i]) continue;
        out.push_back(i);
        for (i64 j = i * i; j <= n; j += i) comp[j] = true;
    }
    return out;
}

int valuation(i64 n, i64 p) {
    if (n == 0) return 1 << 30;
    int v = 0;
    while (n % p == 0) n /= p, ++v;
    return v;
}

i64 crt(i64 a, i64 m, i64 b, i64 n) {
    // x = a + m * t,  m t = b - a mod n
    i64 t = mulmod(mod(b - a, n), invmod(m % n, n), n);
    return mod(a + m * t, m * n);
}

int kronecker(i64 d, i64 n) {
    if (n <= 0) throw Error(ErrorCode::InvalidArgument, "kronecker needs n >= 1");
    int sign = 1;
    while (n % 2 == 0) {
        n /= 2;
        if (d % 2 == 0) return 0;
        i64 r = mod(d, 8);
        if (r == 3 || r == 5) sign = -sign;
    }
    // Jacobi symbol (d / n), n odd
    i64 a = mod(d, n);
    while (a) {
        while (a % 2 == 0) {
            a /= 2;
            i64 r = n % 8;
            if (r == 3 || r == 5) sign = -sign;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) sign = -sign;
        a %= n;
    }
    return n == 1 ? sign : 0;
}

i64 mult_order(i64 a, i64 m) {
    if (std::gcd(mod(a, m), m) != 1) throw Error(ErrorCode::NotCoprime, "mult_order");
    i64 ord = euler_phi(m);
    for (auto [q, e] : factorize(ord)) {
        for (int i = 0; i < e && powmod(a, ord / q, m) == 1; ++i) ord /= q;
    }
    return ord;
}

}  // namespace adelic
