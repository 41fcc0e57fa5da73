#include "adelic/polymodp.hpp"

#include <algorithm>
#include <random>

#include "adelic/error.hpp"

namespace adelic::polyp {

void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

int deg(const Poly& a) { return static_cast<int>(a.size()) - 1; }

Poly reduce(const std::vector<i64>& coeffs, i64 p) {
    Poly r(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) r[i] = mod(coeffs[i], p);
    trim(r);
    return r;
}

Poly add(const Poly& a, const Poly& b, i64 p) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        i64 x = (i < a.size() ? a[i] : 0) + (i < b.size() ? b[i] : 0);
        r[i] = x >= p ? x - p : x;
    }
    trim(r);
    return r;
}

Poly sub(const Poly& a, const Poly& b, i64 p) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        i64 x = (i < a.size() ? a[i] : 0) - (i < b.size() ? b[i] : 0);
        r[i] = x < 0 ? x + p : x;
    }
    trim(r);
    return r;
}

Poly mul(const Poly& a, const Poly& b, i64 p) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + adelic::mulmod(a[i], b[j], p)) % p;
    }
    trim(r);
    return r;
}

Poly scale(const Poly& a, i64 c, i64 p) {
    Poly r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = adelic::mulmod(a[i], mod(c, p), p);
    trim(r);
    return r;
}

void divmod(const Poly& a, const Poly& b, i64 p, Poly& q, Poly& r) {
    if (b.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial division by zero");
    r = a;
    int db = deg(b);
    if (deg(a) < db) {
        q.clear();
        return;
    }
    q.assign(a.size() - b.size() + 1, 0);
    i64 lead_inv = invmod(b.back(), p);
    for (int i = deg(r); i >= db; --i) {
        i64 c = adelic::mulmod(r[i], lead_inv, p);
        q[i - db] = c;
        if (!c) continue;
        for (int j = 0; j <= db; ++j) r[i - db + j] = mod(r[i - db + j] - adelic::mulmod(c, b[j], p), p);
    }
    trim(q);
    trim(r);
}

Poly rem(const Poly& a, const Poly& b, i64 p) {
    Poly q, r;
    divmod(a, b, p, q, r);
    return r;
}

Poly monic(const Poly& a, i64 p) {
    if (a.empty()) return a;
    return scale(a, invmod(a.back(), p), p);
}

Poly gcd(Poly a, Poly b, i64 p) {
    while (!b.empty()) {
        Poly r = rem(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(a, p);
}

Poly xgcd(const Poly& a, const Poly& b, i64 p, Poly& s, Poly& t) {
    Poly r0 = a, r1 = b, s0{1}, s1{}, t0{}, t1{1};
    while (!r1.empty()) {
        Poly q, r;
        divmod(r0, r1, p, q, r);
        Poly s2 = sub(s0, mul(q, s1, p), p), t2 = sub(t0, mul(q, t1, p), p);
        r0 = std::move(r1), r1 = std::move(r);
        s0 = std::move(s1), s1 = std::move(s2);
        t0 = std::move(t1), t1 = std::move(t2);
    }
    if (r0.empty()) {
        s = s0, t = t0;
        return r0;
    }
    i64 li = invmod(r0.back(), p);
    s = scale(s0, li, p);
    t = scale(t0, li, p);
    return scale(r0, li, p);
}

Poly mulmod(const Poly& a, const Poly& b, const Poly& m, i64 p) { return rem(mul(a, b, p), m, p); }

Poly powmod(Poly base, u64 e, const Poly& m, i64 p) {
    Poly r{1};
    r = rem(r, m, p);
    base = rem(base, m, p);
    while (e) {
        if (e & 1) r = mulmod(r, base, m, p);
        base = mulmod(base, base, m, p);
        e >>= 1;
    }
    return r;
}

Poly derivative(const Poly& a, i64 p) {
    if (a.size() <= 1) return {};
    Poly r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = adelic::mulmod(a[i], static_cast<i64>(i) % p, p);
    trim(r);
    return r;
}

i64 eval(const Poly& a, i64 x, i64 p) {
    i64 r = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) r = (adelic::mulmod(r, x, p) + *it) % p;
    return r;
}

namespace {

// x^(p^k) mod f, by repeated p-th powering
Poly frob_power(const Poly& xpk, const Poly& f, i64 p) { return powmod(xpk, static_cast<u64>(p), f, p); }

}  // namespace

bool is_squarefree(const Poly& f, i64 p) {
    Poly d = derivative(f, p);
    if (d.empty()) return deg(f) <= 0;
    return deg(gcd(f, d, p)) == 0;
}

bool is_irreducible(const Poly& f, i64 p) {
    int n = deg(f);
    if (n <= 0) return false;
    if (n == 1) return true;
    Poly fm = monic(f, p);
    // Ben-Or: no factor of degree <= n/2
    Poly x{0, 1}, xp = x;
    for (int k = 1; k <= n / 2; ++k) {
        xp = frob_power(xp, fm, p);
        if (deg(gcd(fm, sub(xp, x, p), p)) > 0) return false;
    }
    return true;
}

std::vector<Poly> factor_squarefree(const Poly& f0, i64 p) {
    Poly f = monic(f0, p);
    std::vector<Poly> out;
    if (deg(f) <= 0) return out;
    // distinct degree
    std::vector<std::pair<int, Poly>> dd;
    Poly x{0, 1}, xp = x, rest = f;
    for (int k = 1; 2 * k <= deg(rest); ++k) {
        xp = frob_power(xp, rest, p);
        Poly g = gcd(rest, sub(xp, x, p), p);
        if (deg(g) > 0) {
            dd.emplace_back(k, g);
            Poly q, r;
            divmod(rest, g, p, q, r);
            rest = q;
            xp = rem(xp, rest, p);
        }
    }
    if (deg(rest) > 0) dd.emplace_back(deg(rest), rest);

    std::mt19937_64 rng(0x5EED);
    for (auto& [d, g] : dd) {
        std::vector<Poly> stack{g}, done;
        while (!stack.empty()) {
            Poly h = stack.back();
            stack.pop_back();
            if (deg(h) == d) {
                done.push_back(monic(h, p));
                continue;
            }
            Poly split;
            while (true) {
                Poly a(deg(h));
                for (auto& c : a) c = static_cast<i64>(rng() % static_cast<u64>(p));
                trim(a);
                if (deg(a) < 1) continue;
                Poly b;
                if (p == 2) {
                    // trace map a + a^2 + ... + a^(2^(d-1))
                    Poly t = a, cur = a;
                    for (int i = 1; i < d; ++i) {
                        cur = mulmod(cur, cur, h, p);
                        t = add(t, cur, p);
                    }
                    b = t;
                } else {
                    u64 e = (static_cast<u64>(ipow(p, static_cast<unsigned>(d))) - 1) / 2;
                    b = sub(powmod(a, e, h, p), Poly{1}, p);
                }
                split = gcd(h, b, p);
                if (deg(split) > 0 && deg(split) < deg(h)) break;
            }
            Poly q, r;
            divmod(h, split, p, q, r);
            stack.push_back(split);
            stack.push_back(q);
        }
        for (auto& h : done) out.push_back(h);
    }
    std::sort(out.begin(), out.end(), [](const Poly& a, const Poly& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

Poly first_irreducible(int d, i64 p) {
    i64 count = ipow(p, static_cast<unsigned>(d));
    for (i64 code = 0; code < count; ++code) {
        Poly f(d + 1);
        i64 c = code;
        for (int i = 0; i < d; ++i) f[i] = c % p, c /= p;
        f[d] = 1;
        if (is_irreducible(f, p)) return f;
    }
    throw Error(ErrorCode::InvalidArgument, "no irreducible polynomial found");
}

}  // namespace adelic::polyp
