#include "adelic/numberfields.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "adelic/error.hpp"

namespace adelic {

namespace zpoly {

void trim(ZPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

int deg(const ZPoly& a) { return static_cast<int>(a.size()) - 1; }

ZPoly mul(const ZPoly& a, const ZPoly& b) {
    if (a.empty() || b.empty()) return {};
    ZPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

ZPoly derivative(const ZPoly& a) {
    ZPoly r;
    for (std::size_t i = 1; i < a.size(); ++i) r.push_back(a[i] * static_cast<long>(i));
    trim(r);
    return r;
}

std::optional<ZPoly> divide_exact(const ZPoly& a, const ZPoly& b) {
    if (b.empty() || b.back() != 1) throw Error(ErrorCode::InvalidArgument, "divide_exact needs a monic divisor");
    ZPoly r = a;
    trim(r);
    int db = deg(b);
    if (deg(r) < db) return r.empty() ? std::optional<ZPoly>(ZPoly{}) : std::nullopt;
    ZPoly q(r.size() - b.size() + 1, 0);
    for (int i = deg(r); i >= db; --i) {
        mpz_class c = r[i];
        q[i - db] = c;
        if (c == 0) continue;
        for (int j = 0; j <= db; ++j) r[i - db + j] -= c * b[j];
    }
    trim(r);
    if (!r.empty()) return std::nullopt;
    trim(q);
    return q;
}

namespace {

// fraction-free determinant
mpz_class bareiss(std::vector<std::vector<mpz_class>> m) {
    std::size_t n = m.size();
    if (n == 0) return 1;
    mpz_class prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t sw = k + 1;
            while (sw < n && m[sw][k] == 0) ++sw;
            if (sw == n) return 0;
            std::swap(m[k], m[sw]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

ZPoly mod_sym(const ZPoly& a, const mpz_class& m) {
    ZPoly r(a.size());
    mpz_class half = m / 2;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mpz_class x = a[i] % m;
        if (x < 0) x += m;
        if (x > half) x -= m;
        r[i] = x;
    }
    trim(r);
    return r;
}

ZPoly mod_pos(const ZPoly& a, const mpz_class& m) {
    ZPoly r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = a[i] % m;
        if (r[i] < 0) r[i] += m;
    }
    trim(r);
    return r;
}

ZPoly from_p(const polyp::Poly& a) {
    ZPoly r;
    for (i64 c : a) r.push_back(mpz_class(static_cast<long>(c)));
    return r;
}

ZPoly sub(const ZPoly& a, const ZPoly& b) {
    ZPoly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (i < a.size() ? a[i] : 0) - (i < b.size() ? b[i] : 0);
    trim(r);
    return r;
}

ZPoly add_scaled(const ZPoly& a, const ZPoly& b, const mpz_class& s) {
    ZPoly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (i < a.size() ? a[i] : 0) + s * (i < b.size() ? b[i] : 0);
    trim(r);
    return r;
}

// lift f = g h mod p (g monic, coprime to h) to mod p^k
void hensel_lift(const ZPoly& f, ZPoly& g, ZPoly& h, i64 p, int k) {
    polyp::Poly gp = mod_p(g, p), hp = mod_p(h, p), s, t;
    polyp::xgcd(gp, hp, p, s, t);  // s g + t h = 1
    mpz_class pj = p;
    for (int j = 1; j < k; ++j) {
        ZPoly e = sub(f, mul(g, h));
        for (auto& c : e) c /= pj;
        polyp::Poly ep = mod_p(e, p);
        polyp::Poly a = polyp::rem(polyp::mul(ep, t, p), gp, p);
        polyp::Poly q, rem;
        polyp::divmod(polyp::sub(ep, polyp::mul(a, hp, p), p), gp, p, q, rem);
        g = add_scaled(g, from_p(a), pj);
        h = add_scaled(h, from_p(q), pj);
        pj *= p;
    }
}

}  // namespace

mpz_class resultant(const ZPoly& a, const ZPoly& b) {
    int m = deg(a), n = deg(b);
    if (m < 0 || n < 0) return 0;
    std::size_t N = static_cast<std::size_t>(m + n);
    if (N == 0) return 1;
    std::vector<std::vector<mpz_class>> s(N, std::vector<mpz_class>(N, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= m; ++j) s[i][i + j] = a[m - j];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= n; ++j) s[n + i][i + j] = b[n - j];
    return bareiss(s);
}

mpz_class discriminant(const ZPoly& f) {
    int d = deg(f);
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "discriminant of a constant");
    if (d == 1) return 1;
    mpz_class r = resultant(f, derivative(f));
    if ((d * (d - 1) / 2) % 2) r = -r;
    return r / f.back();
}

polyp::Poly mod_p(const ZPoly& a, i64 p) {
    polyp::Poly r(a.size());
    mpz_class P = static_cast<long>(p);
    for (std::size_t i = 0; i < a.size(); ++i) {
        mpz_class x = a[i] % P;
        if (x < 0) x += P;
        r[i] = x.get_si();
    }
    polyp::trim(r);
    return r;
}

bool is_irreducible(const ZPoly& f0) {
    ZPoly f = f0;
    trim(f);
    int d = deg(f);
    if (d < 1 || f.back() != 1) throw Error(ErrorCode::InvalidArgument, "irreducibility test needs a monic polynomial");
    if (d == 1) return true;
    mpz_class disc = discriminant(f);
    if (disc == 0) return false;

    // degree sieve over several good primes
    std::set<int> possible;
    for (int k = 1; k < d; ++k) possible.insert(k);
    i64 best_p = 0;
    std::vector<polyp::Poly> best_factors;
    int good = 0;
    for (i64 p : primes_upto(2000)) {
        if (p < 3 || disc % static_cast<long>(p) == 0) continue;
        auto fac = polyp::factor_squarefree(mod_p(f, p), p);
        if (fac.size() == 1) return true;
        std::set<int> sums{0};
        for (auto& g : fac) {
            std::set<int> next = sums;
            for (int s : sums) next.insert(s + polyp::deg(g));
            sums = next;
        }
        std::set<int> keep;
        for (int k : possible)
            if (sums.count(k)) keep.insert(k);
        possible = keep;
        if (possible.empty()) return true;
        if (best_p == 0 || fac.size() < best_factors.size()) best_p = p, best_factors = fac;
        if (++good >= 12) break;
    }

    // Hensel lift and recombine
    i64 p = best_p;
    mpz_class norm2 = 0;
    for (auto& c : f) norm2 += c * c;
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), norm2.get_mpz_t());
    mpz_class bound = (root + 1) * (mpz_class(1) << d) * 2 + 1;
    int k = 1;
    mpz_class pk = p;
    while (pk <= bound) pk *= p, ++k;

    std::vector<ZPoly> lifted;
    ZPoly rest = f;
    for (std::size_t i = 0; i + 1 < best_factors.size(); ++i) {
        ZPoly g = from_p(best_factors[i]);
        polyp::Poly hp = best_factors[i + 1];
        for (std::size_t j = i + 2; j < best_factors.size(); ++j) hp = polyp::mul(hp, best_factors[j], p);
        ZPoly h = from_p(hp);
        hensel_lift(rest, g, h, p, k);
        g = mod_pos(g, pk);
        h = mod_pos(h, pk);
        lifted.push_back(g);
        rest = h;
    }
    lifted.push_back(rest);

    std::size_t r = lifted.size();
    for (std::size_t s = 1; 2 * s <= r; ++s) {
        std::vector<bool> pick(r, false);
        std::fill(pick.begin(), pick.begin() + static_cast<long>(s), true);
        do {
            ZPoly cand{1};
            for (std::size_t i = 0; i < r; ++i)
                if (pick[i]) cand = mod_pos(mul(cand, lifted[i]), pk);
            cand = mod_sym(cand, pk);
            if (!cand.empty() && cand.back() == 1 && divide_exact(f, cand)) return false;
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return true;
}

ZPoly cyclotomic(i64 m) {
    // x^m - 1 divided by Phi_d for proper divisors d
    ZPoly r(m + 1, 0);
    r[0] = -1;
    r[m] = 1;
    for (i64 d : divisors(m)) {
        if (d == m) continue;
        r = *divide_exact(r, cyclotomic(d));
    }
    return r;
}

}  // namespace zpoly

NumberFieldQ::NumberFieldQ(ZPoly poly) : poly_(std::move(poly)) {
    zpoly::trim(poly_);
    if (poly_.size() < 2 || poly_.back() != 1)
        throw Error(ErrorCode::InvalidArgument, "defining polynomial must be monic of degree >= 1");
    if (!zpoly::is_irreducible(poly_)) throw Error(ErrorCode::InvalidArgument, "defining polynomial is reducible over Q");
    disc_ = zpoly::discriminant(poly_);
    int d = degree();
    QElem cur(d);
    for (int i = 0; i < d; ++i) cur[i] = -mpq_class(poly_[i]);
    for (int k = d; k <= 2 * d - 2; ++k) {
        high_powers_.push_back(cur);
        // multiply by theta
        QElem next(d, 0);
        for (int i = 0; i + 1 < d; ++i) next[i + 1] = cur[i];
        for (int i = 0; i < d; ++i) next[i] -= cur[d - 1] * poly_[i];
        cur = next;
    }
}

NumberFieldQ NumberFieldQ::rationals() { return NumberFieldQ(ZPoly{0, 1}); }

NumberFieldQ NumberFieldQ::cyclotomic(i64 m) {
    if (m <= 2) return rationals();
    return NumberFieldQ(zpoly::cyclotomic(m));
}

QElem NumberFieldQ::gen() const {
    QElem r = zero();
    if (degree() == 1) {
        r[0] = -mpq_class(poly_[0]);
        return r;
    }
    r[1] = 1;
    return r;
}

QElem NumberFieldQ::from_rational(const mpq_class& x) const {
    QElem r = zero();
    r[0] = x;
    return r;
}

void NumberFieldQ::check(const QElem& a) const {
    if (static_cast<int>(a.size()) != degree()) throw Error(ErrorCode::InvalidArgument, "element has wrong length");
}

QElem NumberFieldQ::add(const QElem& a, const QElem& b) const {
    QElem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

QElem NumberFieldQ::sub(const QElem& a, const QElem& b) const {
    QElem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

QElem NumberFieldQ::neg(const QElem& a) const {
    QElem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

QElem NumberFieldQ::scale(const mpq_class& c, const QElem& a) const {
    QElem r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

QElem NumberFieldQ::mul(const QElem& a, const QElem& b) const {
    int d = degree();
    std::vector<mpq_class> prod(2 * d - 1, 0);
    for (int i = 0; i < d; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < d; ++j) prod[i + j] += a[i] * b[j];
    }
    QElem r(prod.begin(), prod.begin() + d);
    for (int k = d; k <= 2 * d - 2; ++k) {
        if (prod[k] == 0) continue;
        const QElem& hp = high_powers_[k - d];
        for (int i = 0; i < d; ++i) r[i] += prod[k] * hp[i];
    }
    return r;
}

QElem NumberFieldQ::pow(QElem a, i64 e) const {
    if (e < 0) return pow(inv(a), -e);
    QElem r = one();
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

bool NumberFieldQ::is_zero(const QElem& a) const {
    return std::all_of(a.begin(), a.end(), [](const mpq_class& x) { return x == 0; });
}

std::vector<std::vector<mpq_class>> NumberFieldQ::mult_matrix(const QElem& a) const {
    int d = degree();
    std::vector<std::vector<mpq_class>> m(d, std::vector<mpq_class>(d));
    QElem col = a;
    QElem th = zero();
    if (d > 1) th[1] = 1;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) m[i][j] = col[i];
        if (j + 1 < d) col = mul(col, th);
    }
    return m;
}

QElem NumberFieldQ::inv(const QElem& a) const {
    if (is_zero(a)) throw Error(ErrorCode::InvalidArgument, "inverse of zero");
    int d = degree();
    auto m = mult_matrix(a);
    std::vector<mpq_class> rhs(d, 0);
    rhs[0] = 1;
    for (int c = 0; c < d; ++c) {
        int piv = c;
        while (m[piv][c] == 0) ++piv;
        std::swap(m[piv], m[c]);
        std::swap(rhs[piv], rhs[c]);
        for (int i = 0; i < d; ++i) {
            if (i == c || m[i][c] == 0) continue;
            mpq_class q = m[i][c] / m[c][c];
            for (int j = c; j < d; ++j) m[i][j] -= q * m[c][j];
            rhs[i] -= q * rhs[c];
        }
    }
    QElem r(d);
    for (int i = 0; i < d; ++i) r[i] = rhs[i] / m[i][i];
    return r;
}

mpq_class NumberFieldQ::norm(const QElem& a) const {
    auto m = mult_matrix(a);
    int d = degree();
    mpq_class det = 1;
    for (int c = 0; c < d; ++c) {
        int piv = c;
        while (piv < d && m[piv][c] == 0) ++piv;
        if (piv == d) return 0;
        if (piv != c) std::swap(m[piv], m[c]), det = -det;
        det *= m[c][c];
        for (int i = c + 1; i < d; ++i) {
            if (m[i][c] == 0) continue;
            mpq_class q = m[i][c] / m[c][c];
            for (int j = c; j < d; ++j) m[i][j] -= q * m[c][j];
        }
    }
    return det;
}

QElem NumberFieldQ::eval(const ZPoly& f, const QElem& a) const {
    QElem r = zero();
    for (auto it = f.rbegin(); it != f.rend(); ++it) r = add(mul(r, a), from_rational(mpq_class(*it)));
    return r;
}

std::string NumberFieldQ::str(const QElem& a) const {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        if (!s.empty()) s += " + ";
        s += a[i].get_str();
        if (i == 1) s += "*a";
        if (i > 1) s += "*a^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
}

std::string ResiduePrime::str() const {
    std::string s = "(" + std::to_string(p) + ", [";
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
    return s + "])";
}

std::vector<ResiduePrime> residue_primes(const NumberFieldQ& L, i64 p) {
    if (!is_prime(p)) throw Error(ErrorCode::InvalidArgument, std::to_string(p) + " is not prime");
    if (L.discriminant() % static_cast<long>(p) == 0)
        throw Error(ErrorCode::RamifiedOrBadPoly, std::to_string(p) + " divides the polynomial discriminant");
    std::vector<ResiduePrime> out;
    for (auto& g : polyp::factor_squarefree(zpoly::mod_p(L.poly(), p), p)) out.push_back({p, g, polyp::deg(g)});
    return out;
}

i64 reduce(const NumberFieldQ& L, const QElem& a, const ResiduePrime& P, const FiniteRing& kP) {
    i64 p = P.p;
    mpz_class Pz = static_cast<long>(p);
    polyp::Poly c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        mpz_class den = a[i].get_den();
        if (den % Pz == 0) throw Error(ErrorCode::DenominatorAtP, "coordinate denominator divisible by " + std::to_string(p));
        mpz_class num = a[i].get_num() % Pz;
        if (num < 0) num += Pz;
        mpz_class dm = den % Pz;
        c[i] = mulmod(num.get_si(), invmod(dm.get_si(), p), p);
    }
    polyp::trim(c);
    if (L.degree() == 1) {
        // the power basis of Q is {1}; its root may be nonzero but coordinates are scalars
        return kP.from_int(c.empty() ? 0 : c[0]);
    }
    return kP.encode(polyp::rem(c, P.g, p));
}

i64 reduce(const NumberFieldQ& L, const QElem& a, const ResiduePrime& P) {
    return reduce(L, a, P, P.residue_field());
}

FieldAutomorphism identity_automorphism(const NumberFieldQ& L) { return {L.gen()}; }

QElem apply(const NumberFieldQ& L, const FieldAutomorphism& s, const QElem& a) {
    L.check(a);
    if (L.degree() == 1) return a;
    QElem r = L.zero(), pw = L.one();
    for (int i = 0; i < L.degree(); ++i) {
        if (a[i] != 0) r = L.add(r, L.scale(a[i], pw));
        pw = L.mul(pw, s.image);
    }
    return r;
}

void verify_automorphism(const NumberFieldQ& L, const FieldAutomorphism& s) {
    L.check(s.image);
    if (!L.is_zero(L.eval(L.poly(), s.image)))
        throw Error(ErrorCode::InvalidArgument, "automorphism image is not a root of the defining polynomial");
    int d = L.degree();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            QElem ei = L.zero(), ej = L.zero();
            ei[i] = 1, ej[j] = 1;
            if (apply(L, s, L.mul(ei, ej)) != L.mul(apply(L, s, ei), apply(L, s, ej)))
                throw Error(ErrorCode::InvalidArgument, "automorphism is not multiplicative");
        }
}

FieldAutomorphism compose(const NumberFieldQ& L, const FieldAutomorphism& s, const FieldAutomorphism& t) {
    return {apply(L, s, t.image)};
}

void check_group(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G) {
    auto id = identity_automorphism(L);
    if (std::find(G.begin(), G.end(), id) == G.end()) throw Error(ErrorCode::NotAGroup, "identity missing");
    for (auto& a : G)
        for (auto& b : G)
            if (std::find(G.begin(), G.end(), compose(L, a, b)) == G.end())
                throw Error(ErrorCode::NotAGroup, "automorphisms not closed under composition");
}

std::size_t prime_image(const NumberFieldQ& L, const FieldAutomorphism& s, const ResiduePrime& P,
                        const std::vector<ResiduePrime>& primes) {
    // s(P) is the unique prime Q with g_P(s(theta)) in Q
    for (std::size_t i = 0; i < primes.size(); ++i) {
        FiniteRing k = primes[i].residue_field();
        i64 r = reduce(L, s.image, primes[i], k);
        i64 acc = 0;
        for (auto it = P.g.rbegin(); it != P.g.rend(); ++it) acc = k.add(k.mul(acc, r), k.from_int(*it));
        if (acc == 0) return i;
    }
    throw Error(ErrorCode::InvalidArgument, "automorphism image of prime not found");
}

std::vector<FieldAutomorphism> decomposition_group(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G,
                                                   const ResiduePrime& P) {
    check_group(L, G);
    if (L.discriminant() % static_cast<long>(P.p) == 0)
        throw Error(ErrorCode::RamifiedOrBadPoly, "ramified prime");
    std::vector<FieldAutomorphism> out;
    FiniteRing k = P.residue_field();
    for (auto& s : G) {
        i64 r = reduce(L, s.image, P, k);
        i64 acc = 0;
        for (auto it = P.g.rbegin(); it != P.g.rend(); ++it) acc = k.add(k.mul(acc, r), k.from_int(*it));
        if (acc == 0) out.push_back(s);
    }
    return out;
}

std::vector<std::vector<std::size_t>> prime_orbits(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G,
                                                   const std::vector<ResiduePrime>& primes) {
    std::vector<int> seen(primes.size(), 0);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        if (seen[i]) continue;
        std::set<std::size_t> orb;
        for (auto& s : G) orb.insert(prime_image(L, s, primes[i], primes));
        for (auto j : orb) seen[j] = 1;
        out.emplace_back(orb.begin(), orb.end());
    }
    return out;
}

ResidueFlags residue_equality_flags(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& G,
                                    const ResiduePrime& P) {
    return {decomposition_group(L, G, P).size() == 1, P.f};
}

i64 automorphism_exponent(const NumberFieldQ& L, const FieldAutomorphism& s, const QElem& zeta, i64 w) {
    QElem img = apply(L, s, zeta), z = zeta;
    for (i64 t = 1; t <= w; ++t) {
        if (z == img) return t;
        z = L.mul(z, zeta);
    }
    throw Error(ErrorCode::InvalidArgument, "automorphism does not preserve the roots of unity");
}

}  // namespace adelic
