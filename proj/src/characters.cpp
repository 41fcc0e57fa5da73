#include "adelic/characters.hpp"

#include <map>
#include <mutex>
#include <numeric>

#include "adelic/error.hpp"

namespace adelic {

UnitGroupZN::UnitGroupZN(i64 n) : n_(n), phi_(euler_phi(n)) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "unit group modulus must be >= 1");
    for (auto [p, e] : factorize(n)) {
        i64 q = ipow(p, static_cast<unsigned>(e));
        i64 rest = n / q;
        auto lift = [&](i64 r) { return rest == 1 ? mod(r, n) : crt(mod(r, q), q, 1, rest); };
        Comp c{p, e, q, gens_.size(), {}};
        if (p == 2) {
            if (e >= 2) {
                gens_.push_back(lift(q - 1));
                orders_.push_back(2);
            }
            if (e >= 3) {
                gens_.push_back(lift(5));
                orders_.push_back(q / 4);
                c.log.assign(q, -1);
                i64 x = 1;
                for (i64 k = 0; k < q / 4; ++k) c.log[x] = static_cast<int>(k), x = x * 5 % q;
            }
        } else {
            i64 g = 2, phiq = q / p * (p - 1);
            while (g % p == 0 || mult_order(g, q) != phiq) ++g;
            gens_.push_back(lift(g));
            orders_.push_back(phiq);
            c.log.assign(q, -1);
            i64 x = 1;
            for (i64 k = 0; k < phiq; ++k) c.log[x] = static_cast<int>(k), x = mulmod(x, g, q);
        }
        comps_.push_back(std::move(c));
    }
}

std::vector<i64> UnitGroupZN::exponents(i64 u) const {
    u = mod(u, n_);
    if (std::gcd(u, n_) != 1) throw Error(ErrorCode::NotCoprime, std::to_string(u) + " is not a unit mod " + std::to_string(n_));
    std::vector<i64> out(gens_.size(), 0);
    for (auto& c : comps_) {
        i64 r = u % c.q;
        if (c.p == 2) {
            if (c.e == 1) continue;
            std::size_t i = c.first;
            if (r % 4 == 3) {
                out[i] = 1;
                r = c.q - r;
            }
            if (c.e >= 3) out[i + 1] = c.log[r];
        } else {
            out[c.first] = c.log[r];
        }
    }
    return out;
}

i64 UnitGroupZN::from_exponents(const std::vector<i64>& e) const {
    i64 r = 1 % n_;
    for (std::size_t i = 0; i < gens_.size(); ++i) r = mulmod(r, powmod(gens_[i], static_cast<u64>(mod(e[i], orders_[i])), n_), n_);
    return r;
}

std::shared_ptr<const UnitGroupZN> unit_group(i64 n) {
    static std::mutex mu;
    static std::map<i64, std::shared_ptr<const UnitGroupZN>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto g = std::make_shared<const UnitGroupZN>(n);
    if (n <= 1'000'000) cache.emplace(n, g);
    return g;
}

RootOfUnity RootOfUnity::make(i64 m, i64 e) {
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "root of unity order must be >= 1");
    e = mod(e, m);
    i64 g = std::gcd(e, m);
    if (e == 0) return {1, 0};
    return {m / g, e / g};
}

RootOfUnity RootOfUnity::operator*(const RootOfUnity& o) const {
    i64 m = lcm(order, o.order);
    return make(m, exp * (m / order) + o.exp * (m / o.order));
}

std::string RootOfUnity::str() const {
    if (order == 1) return "1";
    if (order == 2) return "-1";
    return "zeta_" + std::to_string(order) + "^" + std::to_string(exp);
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const UnitGroupZN> g, std::vector<RootOfUnity> images)
    : g_(std::move(g)), images_(std::move(images)) {
    if (images_.size() != g_->generators().size())
        throw Error(ErrorCode::InvalidArgument, "character needs one image per generator");
    for (std::size_t i = 0; i < images_.size(); ++i) {
        images_[i] = RootOfUnity::make(images_[i].order, images_[i].exp);
        if (!images_[i].pow(g_->orders()[i]).is_one())
            throw Error(ErrorCode::InvalidArgument, "image order does not divide generator order");
    }
}

DirichletCharacter DirichletCharacter::trivial(i64 n) {
    auto g = unit_group(n);
    return DirichletCharacter(g, std::vector<RootOfUnity>(g->generators().size()));
}

DirichletCharacter DirichletCharacter::from_exponents(i64 n, const std::vector<i64>& a) {
    auto g = unit_group(n);
    std::vector<RootOfUnity> im;
    for (std::size_t i = 0; i < g->orders().size(); ++i) im.push_back(RootOfUnity::make(g->orders()[i], a.at(i)));
    return DirichletCharacter(g, im);
}

RootOfUnity DirichletCharacter::operator()(i64 u) const {
    auto e = g_->exponents(u);
    RootOfUnity r;
    for (std::size_t i = 0; i < e.size(); ++i) r = r * images_[i].pow(e[i]);
    return r;
}

i64 DirichletCharacter::order() const {
    i64 o = 1;
    for (auto& z : images_) o = lcm(o, z.order);
    return o;
}

bool DirichletCharacter::is_trivial() const { return order() == 1; }

DirichletCharacter DirichletCharacter::extend(i64 m) const {
    if (m % modulus()) throw Error(ErrorCode::InvalidArgument, "extension modulus must be a multiple");
    auto g = unit_group(m);
    std::vector<RootOfUnity> im;
    for (i64 x : g->generators()) im.push_back((*this)(x));
    return DirichletCharacter(g, im);
}

bool DirichletCharacter::operator==(const DirichletCharacter& o) const {
    return modulus() == o.modulus() && images_ == o.images_;
}

std::string DirichletCharacter::str() const {
    std::string s = "chi mod " + std::to_string(modulus()) + " [";
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(g_->generators()[i]) + "->" + images_[i].str();
    }
    return s + "]";
}

RootOfUnity char_eval(const DirichletCharacter& chi, i64 u) { return chi(u); }

DirichletCharacter char_mul(const DirichletCharacter& a, const DirichletCharacter& b) {
    i64 m = lcm(a.modulus(), b.modulus());
    DirichletCharacter x = a.extend(m), y = b.extend(m);
    std::vector<RootOfUnity> im;
    for (std::size_t i = 0; i < x.images().size(); ++i) im.push_back(x.images()[i] * y.images()[i]);
    return DirichletCharacter(unit_group(m), im);
}

DirichletCharacter char_pow(const DirichletCharacter& a, i64 k) {
    std::vector<RootOfUnity> im;
    for (auto& z : a.images()) im.push_back(z.pow(k));
    return DirichletCharacter(unit_group(a.modulus()), im);
}

DirichletCharacter char_inverse(const DirichletCharacter& a) { return char_pow(a, -1); }

DirichletCharacter char_conjugate_by(const DirichletCharacter& chi, i64 t) {
    if (std::gcd(mod(t, chi.order()), chi.order()) != 1 && chi.order() > 1)
        throw Error(ErrorCode::InvalidArgument, "conjugation exponent must be coprime to the character order");
    return char_pow(chi, t);
}

i64 char_conductor(const DirichletCharacter& chi) {
    i64 n = chi.modulus();
    for (i64 d : divisors(n)) {
        bool ok = true;
        for (i64 u = 1; u < n && ok; u += d) {
            if (std::gcd(u, n) != 1) continue;
            if (!chi(u).is_one()) ok = false;
        }
        if (ok) return d;
    }
    return n;
}

bool same_character(const DirichletCharacter& a, const DirichletCharacter& b) {
    i64 m = lcm(a.modulus(), b.modulus());
    return a.extend(m) == b.extend(m);
}

std::vector<DirichletCharacter> all_characters(i64 n) {
    auto g = unit_group(n);
    const auto& ords = g->orders();
    std::vector<DirichletCharacter> out;
    std::vector<i64> a(ords.size(), 0);
    while (true) {
        out.push_back(DirichletCharacter::from_exponents(n, a));
        std::size_t i = 0;
        while (i < a.size() && ++a[i] == ords[i]) a[i++] = 0;
        if (i == a.size()) break;
    }
    return out;
}

DirichletCharacter kronecker_character(i64 d, i64 modulus) {
    auto g = unit_group(modulus);
    std::vector<RootOfUnity> im;
    for (i64 x : g->generators()) {
        // (d / x) depends only on x mod |d| (d a discriminant) once x is coprime to it
        int s = kronecker(d, x);
        if (s == 0) throw Error(ErrorCode::NotCoprime, "modulus not compatible with discriminant");
        im.push_back(s == 1 ? RootOfUnity{} : RootOfUnity{2, 1});
    }
    DirichletCharacter chi(g, im);
    return chi;
}

int quadratic_sign(const RootOfUnity& z) {
    if (z.order == 1) return 1;
    if (z.order == 2) return -1;
    throw Error(ErrorCode::InvalidArgument, "value is not +-1");
}

bool is_one_mod_p(const RootOfUnity& z, i64 p) {
    i64 m = z.order;
    while (m % p == 0) m /= p;
    return m == 1;
}

i64 reduce_root_of_unity(const RootOfUnity& z, const FiniteRing& f) {
    i64 p = f.p(), m = z.order, pa = 1;
    while (m % p == 0) m /= p, pa *= p;
    if (m == 1) return f.from_int(1);
    // zeta_M = zeta_{p^a}^s zeta_m^t with s m + t p^a = 1
    i64 t = invmod(pa % m, m);
    return f.root_of_unity(m, mulmod(t, mod(z.exp, m), m));
}

}  // namespace adelic
