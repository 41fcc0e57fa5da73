#include "adelic/finite_ring.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "adelic/error.hpp"

namespace adelic {

namespace {
constexpr i64 kTableLimit = i64(1) << 21;
}

FiniteRing FiniteRing::residue(i64 p, int n) {
    if (!is_prime(p) || n < 1) throw Error(ErrorCode::InvalidArgument, "residue ring needs a prime and n >= 1");
    auto d = std::make_shared<Data>();
    d->kind = Kind::Residue;
    d->p = p;
    d->n = n;
    d->size = ipow(p, static_cast<unsigned>(n));
    if (n == 1) {
        i64 g = 1;
        while (p > 2 && adelic::mult_order(g, p) != p - 1) ++g;
        d->gen = g;
    }
    FiniteRing r;
    r.d_ = d;
    return r;
}

FiniteRing FiniteRing::field(i64 p, const polyp::Poly& modulus) {
    // construction searches a generator and fills log tables; keep one copy per presentation
    static std::mutex mu;
    static std::map<std::pair<i64, polyp::Poly>, FiniteRing> cache;
    std::pair<i64, polyp::Poly> key{p, modulus};
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    FiniteRing r = build_field(p, modulus);
    std::lock_guard lock(mu);
    return cache.emplace(key, r).first->second;
}

FiniteRing FiniteRing::build_field(i64 p, const polyp::Poly& modulus) {
    if (!is_prime(p)) throw Error(ErrorCode::InvalidArgument, "field characteristic must be prime");
    polyp::Poly m = polyp::reduce(modulus, p);
    if (m.empty() || m.back() != 1) throw Error(ErrorCode::InvalidArgument, "field modulus must be monic");
    if (!polyp::is_irreducible(m, p)) throw Error(ErrorCode::InvalidArgument, "field modulus is reducible mod p");
    auto d = std::make_shared<Data>();
    d->kind = Kind::Field;
    d->p = p;
    d->n = polyp::deg(m);
    if (std::log2(static_cast<double>(p)) * d->n > 40)
        throw Error(ErrorCode::Unsupported, "residue field F_" + std::to_string(p) + "^" + std::to_string(d->n) + " too large");
    d->size = ipow(p, static_cast<unsigned>(d->n));
    d->mod = m;
    FiniteRing r;
    r.d_ = d;
    // canonical generator and log tables
    i64 q = d->size;
    auto is_gen = [&](i64 g) {
        if (g == 0) return false;
        for (auto [l, e] : factorize(q - 1)) {
            if (r.pow(g, (q - 1) / l) == 1) return false;
        }
        return true;
    };
    i64 g = 1;
    while (!is_gen(g)) ++g;
    d->gen = g;
    if (q <= kTableLimit) {
        d->log.assign(q, -1);
        d->exp.assign(q - 1, 0);
        i64 x = 1;
        for (i64 k = 0; k < q - 1; ++k) {
            d->exp[k] = x;
            d->log[x] = k;
            x = r.field_mul_poly(x, g);
        }
    }
    return r;
}

FiniteRing FiniteRing::field_of_degree(i64 p, int f) {
    if (f == 1) return field(p, polyp::Poly{0, 1});
    return field(p, polyp::first_irreducible(f, p));
}

std::string FiniteRing::describe() const {
    if (kind() == Kind::Residue) return "Z/" + std::to_string(p()) + "^" + std::to_string(n());
    return "F_" + std::to_string(p()) + "^" + std::to_string(n());
}

polyp::Poly FiniteRing::coeffs(i64 a) const {
    polyp::Poly c(d_->n, 0);
    for (int i = 0; i < d_->n; ++i) c[i] = a % d_->p, a /= d_->p;
    return c;
}

i64 FiniteRing::encode(const polyp::Poly& c) const {
    i64 r = 0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) r = r * d_->p + mod(c[i], d_->p);
    return r;
}

i64 FiniteRing::from_int(i64 a) const {
    if (d_->kind == Kind::Residue) return mod(a, d_->size);
    return mod(a, d_->p);
}

i64 FiniteRing::add(i64 a, i64 b) const {
    if (d_->kind == Kind::Residue) {
        i64 s = a + b;
        return s >= d_->size ? s - d_->size : s;
    }
    i64 r = 0, pw = 1, p = d_->p;
    for (int i = 0; i < d_->n; ++i) {
        i64 x = a % p + b % p;
        if (x >= p) x -= p;
        r += x * pw;
        pw *= p;
        a /= p, b /= p;
    }
    return r;
}

i64 FiniteRing::neg(i64 a) const {
    if (d_->kind == Kind::Residue) return a == 0 ? 0 : d_->size - a;
    i64 r = 0, pw = 1, p = d_->p;
    for (int i = 0; i < d_->n; ++i) {
        i64 x = a % p;
        r += (x ? p - x : 0) * pw;
        pw *= p;
        a /= p;
    }
    return r;
}

i64 FiniteRing::sub(i64 a, i64 b) const { return add(a, neg(b)); }

i64 FiniteRing::field_mul_poly(i64 a, i64 b) const {
    return encode(polyp::mulmod(polyp::reduce(coeffs(a), d_->p), polyp::reduce(coeffs(b), d_->p), d_->mod, d_->p));
}

i64 FiniteRing::mul(i64 a, i64 b) const {
    if (d_->kind == Kind::Residue) return mulmod(a, b, d_->size);
    if (a == 0 || b == 0) return 0;
    if (!d_->log.empty()) {
        i64 k = d_->log[a] + d_->log[b];
        if (k >= d_->size - 1) k -= d_->size - 1;
        return d_->exp[k];
    }
    return field_mul_poly(a, b);
}

bool FiniteRing::is_unit(i64 a) const {
    if (d_->kind == Kind::Residue) return a % d_->p != 0;
    return a != 0;
}

i64 FiniteRing::inv(i64 a) const {
    if (!is_unit(a)) throw Error(ErrorCode::NotCoprime, "non-unit in " + describe());
    if (d_->kind == Kind::Residue) return invmod(a, d_->size);
    if (!d_->log.empty()) {
        i64 k = d_->log[a];
        return d_->exp[k == 0 ? 0 : d_->size - 1 - k];
    }
    return pow(a, d_->size - 2);
}

i64 FiniteRing::pow(i64 a, i64 e) const {
    if (e < 0) return pow(inv(a), -e);
    if (d_->kind == Kind::Field && !d_->log.empty() && a != 0) {
        i64 q1 = d_->size - 1;
        return d_->exp[mulmod(d_->log[a], e % q1, q1)];
    }
    i64 r = from_int(1), b = a;
    while (e) {
        if (e & 1) r = mul(r, b);
        b = mul(b, b);
        e >>= 1;
    }
    return r;
}

i64 FiniteRing::to_residue(i64 a) const {
    if (d_->kind == Kind::Residue) return a % d_->p;
    return a;
}

i64 FiniteRing::frobenius(i64 a, int j) const {
    if (d_->kind == Kind::Residue) return a;
    j %= d_->n;
    for (int i = 0; i < j; ++i) a = pow(a, d_->p);
    return a;
}

i64 FiniteRing::canonical_generator() const {
    if (!is_field()) throw Error(ErrorCode::InvalidArgument, "canonical generator needs a field presentation");
    return d_->gen;
}

i64 FiniteRing::root_of_unity(i64 m, i64 e) const {
    i64 q1 = residue_size() - 1;
    if (q1 % m) throw Error(ErrorCode::InvalidArgument, "no root of unity of order " + std::to_string(m) + " in " + describe());
    return pow(canonical_generator(), q1 / m * mod(e, m));
}

i64 FiniteRing::mult_order(i64 a) const {
    if (!is_field()) throw Error(ErrorCode::InvalidArgument, "mult_order needs a field");
    i64 q1 = residue_size() - 1;
    i64 ord = q1;
    for (auto [l, e] : factorize(q1)) {
        for (int i = 0; i < e && pow(a, ord / l) == from_int(1); ++i) ord /= l;
    }
    return ord;
}

bool FiniteRing::operator==(const FiniteRing& o) const {
    if (d_ == o.d_) return true;
    return d_->kind == o.d_->kind && d_->p == o.d_->p && d_->n == o.d_->n && d_->mod == o.d_->mod;
}

}  // namespace adelic
