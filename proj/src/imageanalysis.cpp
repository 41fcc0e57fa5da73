#include "adelic/imageanalysis.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "adelic/error.hpp"

namespace adelic {

namespace {

i64 sl2_order(i64 q) { return q * (q * q - 1); }

bool is_power_mod_p(i64 mu, int e, i64 p) {
    // mu in (F_p^x)^e
    i64 g = std::gcd(p - 1, static_cast<i64>(std::abs(e)));
    if (g == 0) return mu % p == 1;
    return powmod(mod(mu, p), (p - 1) / g, p) == 1;
}

i64 fp_pow(i64 x, i64 e, i64 p) {
    x = mod(x, p);
    if (e < 0) x = invmod(x, p), e = -e;
    return powmod(x, e, p);
}

}  // namespace

// ---------------------------------------------------------------- dagger

DaggerSpec dagger_spec(const NumberFieldQ& L, const std::vector<FieldAutomorphism>& gamma, i64 p, i64 level,
                       int weight) {
    if (p < 5 || !is_prime(p)) throw Error(ErrorCode::BadPrime, "p = " + std::to_string(p) + " must be a prime >= 5");
    if (level % p == 0) throw Error(ErrorCode::BadPrime, "p divides the level");
    if (mpz_divisible_ui_p(L.discriminant().get_mpz_t(), static_cast<unsigned long>(p)))
        throw Error(ErrorCode::BadPrime, "p divides the discriminant of the defining polynomial");
    auto primes = residue_primes(L, p);
    DaggerSpec s{p, weight, {}};
    for (auto& orbit : prime_orbits(L, gamma, primes)) {
        const ResiduePrime& P = primes[orbit.front()];
        auto D = decomposition_group(L, gamma, P);
        int fv = P.f / static_cast<int>(D.size());
        s.blocks.push_back(FiniteRing::field_of_degree(p, fv));
    }
    return s;
}

DaggerSpec dagger_spec(const Newform& f, const InnerTwistGroup& G, i64 p) {
    return dagger_spec(f.field, G.automorphisms(), p, f.level, f.weight);
}

Ambient dagger_ambient(const DaggerSpec& s) {
    Ambient a;
    for (auto& R : s.blocks) a.push_back({R, AmbientTag::GL2});
    return a;
}

i64 dagger_order(const DaggerSpec& s) {
    i64 r = (s.p - 1) / std::gcd(s.p - 1, static_cast<i64>(s.weight - 1));
    for (auto& R : s.blocks) r *= sl2_order(R.size());
    return r;
}

bool dagger_member(const DaggerSpec& s, const Elem& x) {
    if (x.size() != s.blocks.size() || x.empty()) return false;
    i64 mu = -1;
    for (std::size_t i = 0; i < x.size(); ++i) {
        i64 d = mat::det(s.blocks[i], x[i]);
        if (d <= 0 || d >= s.p) return false;  // zero, or not in F_p
        if (mu >= 0 && d != mu) return false;
        mu = d;
    }
    return is_power_mod_p(mu, s.weight - 1, s.p);
}

i64 dagger_order_bruteforce(const DaggerSpec& s) {
    std::vector<std::vector<i64>> hist;
    for (auto& R : s.blocks) {
        i64 q = R.size();
        std::vector<i64> h(q, 0);
        for (i64 a = 0; a < q; ++a)
            for (i64 d = 0; d < q; ++d) {
                i64 ad = R.mul(a, d);
                for (i64 b = 0; b < q; ++b)
                    for (i64 c = 0; c < q; ++c) ++h[R.sub(ad, R.mul(b, c))];
            }
        hist.push_back(std::move(h));
    }
    std::set<i64> mus;
    for (i64 l = 1; l < s.p; ++l) mus.insert(fp_pow(l, s.weight - 1, s.p));
    i64 total = 0;
    for (i64 mu : mus) {
        i64 t = 1;
        for (auto& h : hist) t *= h[mu];
        total += t;
    }
    return total;
}

// ---------------------------------------------------------------- Papier

namespace {

// null space of an m x n matrix over F_p; basis from the reduced row echelon form
std::vector<std::vector<i64>> null_space_mod_p(std::vector<std::vector<i64>> A, std::size_t n, i64 p) {
    std::vector<int> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < A.size(); ++c) {
        std::size_t k = r;
        while (k < A.size() && A[k][c] % p == 0) ++k;
        if (k == A.size()) continue;
        std::swap(A[k], A[r]);
        i64 iv = invmod(A[r][c], p);
        for (auto& x : A[r]) x = mulmod(x, iv, p);
        for (std::size_t i = 0; i < A.size(); ++i) {
            if (i == r || A[i][c] == 0) continue;
            i64 m = A[i][c];
            for (std::size_t j = 0; j < n; ++j) A[i][j] = mod(A[i][j] - mulmod(m, A[r][j], p), p);
        }
        pivot_col.push_back(static_cast<int>(c));
        ++r;
    }
    std::vector<std::vector<i64>> basis;
    for (std::size_t fc = 0; fc < n; ++fc) {
        if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(fc)) != pivot_col.end()) continue;
        std::vector<i64> v(n, 0);
        v[fc] = 1;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = mod(-A[i][fc], p);
        basis.push_back(v);
    }
    return basis;
}

QElem lift_residue(const NumberFieldQ& L, const FiniteRing& kP, i64 a) {
    QElem r = L.zero();
    auto c = kP.coeffs(a);
    QElem pw = L.one();
    for (std::size_t i = 0; i < c.size(); ++i) {
        r = L.add(r, L.scale(mpq_class(static_cast<long>(c[i])), pw));
        if (L.degree() > 1) pw = L.mul(pw, L.gen());
    }
    return r;
}

}  // namespace

i64 papier_solve(const NumberFieldQ& L, const ResiduePrime& P, const FiniteRing& kP,
                 const std::vector<std::pair<FieldAutomorphism, i64>>& conditions) {
    if (conditions.empty()) return kP.from_int(1);
    const i64 p = P.p;
    const std::size_t f = static_cast<std::size_t>(P.f);
    std::vector<i64> basis(f);
    for (std::size_t i = 0; i < f; ++i) basis[i] = ipow(p, static_cast<unsigned>(i));
    std::vector<std::vector<i64>> A;
    for (auto& [g, c] : conditions) {
        std::vector<std::vector<i64>> block(f, std::vector<i64>(f, 0));
        QElem img = L.one();
        QElem gt = L.degree() > 1 ? apply(L, g, L.gen()) : L.one();
        for (std::size_t i = 0; i < f; ++i) {
            // column i: gamma(x^i) - c x^i
            i64 gi = reduce(L, img, P, kP);
            i64 col = kP.sub(gi, kP.mul(c, basis[i]));
            auto cc = kP.coeffs(col);
            for (std::size_t r = 0; r < f; ++r) block[r][i] = r < cc.size() ? cc[r] : 0;
            if (L.degree() > 1) img = L.mul(img, gt);
        }
        for (auto& row : block) A.push_back(row);
    }
    auto ns = null_space_mod_p(A, f, p);
    if (ns.empty()) throw Error(ErrorCode::NoSolution, "no common eigenvector in the residue field at " + P.str());
    return kP.encode(ns.front());
}

PapierSolution papier_coset(const Newform& f, const InnerTwistGroup& G, const ResiduePrime& P, i64 u) {
    if (std::gcd(u, G.modulus() * f.level) != 1)
        throw Error(ErrorCode::InvalidArgument, "u must be a unit modulo " + std::to_string(G.modulus()));
    FiniteRing kP = P.residue_field();
    PapierSolution s{P, kP, mod(u, G.modulus()), {}, 1, kP.canonical_generator(), f.character(u), {}};
    auto D = decomposition_group(f.field, G.automorphisms(), P);
    std::vector<std::pair<FieldAutomorphism, i64>> conds;
    for (auto& t : G.elements()) {
        if (std::find(D.begin(), D.end(), t.gamma) == D.end()) continue;
        RootOfUnity z = t.chi(u);
        s.conditions.emplace_back(t.gamma, z);
        conds.emplace_back(t.gamma, reduce(f.field, f.value(z), P, kP));
    }
    s.alpha = papier_solve(f.field, P, kP, conds);
    i64 e = reduce(f.field, f.value(s.eps_u), P, kP);
    s.coset = mat::diag(kP, s.alpha, kP.mul(e, kP.inv(s.alpha)));
    return s;
}

bool papier_verify(const NumberFieldQ& L, const PapierSolution& s, const Newform& f) {
    const FiniteRing& kP = s.residue_field;
    if (s.alpha == 0) return false;
    QElem lift = lift_residue(L, kP, s.alpha);
    for (auto& [g, z] : s.conditions) {
        i64 lhs = reduce(L, apply(L, g, lift), s.prime, kP);
        i64 c = reduce(L, f.value(z), s.prime, kP);
        if (lhs != kP.mul(c, s.alpha)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- Goursat

std::pair<Ambient, Ambient> split_ambient(const Ambient& amb, std::size_t split) {
    if (split == 0 || split >= amb.size()) throw Error(ErrorCode::InvalidArgument, "split index out of range");
    return {Ambient(amb.begin(), amb.begin() + static_cast<std::ptrdiff_t>(split)),
            Ambient(amb.begin() + static_cast<std::ptrdiff_t>(split), amb.end())};
}

namespace {

Elem part(const Elem& x, std::size_t lo, std::size_t hi) {
    return Elem(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
}

Elem concat(const Elem& a, const Elem& b) {
    Elem r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

// coset x N -> representative with minimal key, memoised over whole cosets
class CosetReps {
public:
    CosetReps(const Ambient& amb, const std::vector<Elem>& N) : amb_(amb), N_(N) {}
    const Elem& rep(const Elem& x) {
        auto k = elem::key(x);
        auto it = rep_.find(k);
        if (it != rep_.end()) return reps_[it->second];
        std::vector<Elem> coset;
        for (auto& n : N_) coset.push_back(elem::mul(amb_, x, n));
        auto best = std::min_element(coset.begin(), coset.end(),
                                     [](const Elem& a, const Elem& b) { return elem::key(a) < elem::key(b); });
        reps_.push_back(*best);
        for (auto& c : coset) rep_[elem::key(c)] = reps_.size() - 1;
        return reps_.back();
    }

private:
    const Ambient& amb_;
    const std::vector<Elem>& N_;
    std::unordered_map<std::string, std::size_t> rep_;
    std::vector<Elem> reps_;
};

}  // namespace

GoursatResult goursat_classify(const SubgroupClosure& U, std::size_t split, i64 order1, i64 order2) {
    if (!U.enumerated()) throw Error(ErrorCode::NotEnumerated, "goursat_classify needs an enumerated subgroup");
    const Ambient& amb = U.ambient();
    auto [a1, a2] = split_ambient(amb, split);
    const auto& els = U.elements();
    GoursatResult r;
    r.split = split;
    r.order = U.order();
    r.order1 = order1;
    r.order2 = order2;
    std::unordered_set<std::string> p1, p2;
    Elem id1 = elem::identity(a1), id2 = elem::identity(a2);
    std::string k1 = elem::key(id1), k2 = elem::key(id2);
    for (auto& e : els) {
        Elem x = part(e, 0, split), y = part(e, split, amb.size());
        p1.insert(elem::key(x));
        p2.insert(elem::key(y));
        if (elem::key(y) == k2) r.N1.push_back(x);
        if (elem::key(x) == k1) r.N2.push_back(y);
    }
    if (static_cast<i64>(p1.size()) != order1 || static_cast<i64>(p2.size()) != order2) {
        r.kind = GoursatResult::Kind::NotSurjective;
        return r;
    }
    if (r.order == order1 * order2) {
        r.kind = GoursatResult::Kind::Full;
        return r;
    }
    r.kind = GoursatResult::Kind::Graph;
    CosetReps c1(a1, r.N1), c2(a2, r.N2);
    std::map<std::string, std::pair<Elem, Elem>> iso;
    for (auto& e : els) {
        const Elem& x = c1.rep(part(e, 0, split));
        const Elem& y = c2.rep(part(e, split, amb.size()));
        auto [it, fresh] = iso.emplace(elem::key(x), std::make_pair(x, y));
        if (!fresh && elem::key(it->second.second) != elem::key(y))
            throw Error(ErrorCode::InvalidArgument, "coset map is not well defined; input is not a subgroup");
    }
    for (auto& [k, v] : iso) r.iso.push_back(v);
    return r;
}

std::vector<Elem> goursat_regenerate(const GoursatResult& r, const Ambient& amb) {
    if (r.kind != GoursatResult::Kind::Graph) throw Error(ErrorCode::InvalidArgument, "only Graph data regenerates");
    auto [a1, a2] = split_ambient(amb, r.split);
    std::vector<Elem> out;
    for (auto& [x, y] : r.iso)
        for (auto& n1 : r.N1)
            for (auto& n2 : r.N2) out.push_back(concat(elem::mul(a1, x, n1), elem::mul(a2, y, n2)));
    std::sort(out.begin(), out.end(), [](const Elem& a, const Elem& b) { return elem::key(a) < elem::key(b); });
    return out;
}

// ---------------------------------------------------------------- pairs

Ambient pair_ambient(const PairSpec& s) {
    Ambient a;
    for (auto& R : s.f_blocks) a.push_back({R, AmbientTag::GL2});
    for (auto& R : s.g_blocks) a.push_back({R, AmbientTag::GL2});
    a.push_back({FiniteRing::field_of_degree(s.p, 1), AmbientTag::GL1});
    return a;
}

i64 fibre_order(const PairSpec& s) {
    i64 r = s.p - 1;
    for (auto& R : s.f_blocks) r *= sl2_order(R.size());
    for (auto& R : s.g_blocks) r *= sl2_order(R.size());
    return r;
}

bool fibre_member(const PairSpec& s, const Elem& x) {
    std::size_t nf = s.f_blocks.size(), ng = s.g_blocks.size();
    if (x.size() != nf + ng + 1) return false;
    const Mat2& l = x.back();
    if (l.b || l.c || l.d != 1 || l.a <= 0 || l.a >= s.p) return false;
    i64 df = fp_pow(l.a, 1 - s.kf, s.p), dg = fp_pow(l.a, 1 - s.kg, s.p);
    for (std::size_t i = 0; i < nf; ++i)
        if (mat::det(s.f_blocks[i], x[i]) != df) return false;
    for (std::size_t i = 0; i < ng; ++i)
        if (mat::det(s.g_blocks[i], x[nf + i]) != dg) return false;
    return true;
}

std::vector<Elem> fibre_generators(const PairSpec& s) {
    Ambient amb = pair_ambient(s);
    std::size_t nf = s.f_blocks.size();
    std::vector<Elem> gens;
    i64 g0 = FiniteRing::field_of_degree(s.p, 1).canonical_generator();
    Elem t = elem::identity(amb);
    for (std::size_t i = 0; i < amb.size() - 1; ++i) {
        const FiniteRing& R = amb[i].ring;
        t[i] = mat::diag(R, fp_pow(g0, 1 - (i < nf ? s.kf : s.kg), s.p), 1);
    }
    t.back() = mat::diag(amb.back().ring, g0, 1);
    gens.push_back(t);
    for (std::size_t i = 0; i < amb.size() - 1; ++i) {
        const FiniteRing& R = amb[i].ring;
        for (int j = 0; j < R.n(); ++j) {
            i64 x = ipow(s.p, static_cast<unsigned>(j));
            Elem up = elem::identity(amb), lo = elem::identity(amb);
            up[i] = Mat2{1, x, 0, 1};
            lo[i] = Mat2{1, 0, x, 1};
            gens.push_back(up);
            gens.push_back(lo);
        }
    }
    return gens;
}

std::string verdict_name(LocalVerdict v) {
    switch (v) {
        case LocalVerdict::FullDagger: return "FullDagger";
        case LocalVerdict::OpenIndexBounded: return "OpenIndexBounded";
        case LocalVerdict::Entangled: return "Entangled";
        case LocalVerdict::Unknown: return "Unknown";
    }
    return "?";
}

nlohmann::json LocalImageReport::to_json() const {
    nlohmann::json j = {{"p", p}, {"verdict", verdict_name(verdict)}, {"evidence", evidence}};
    if (verdict == LocalVerdict::OpenIndexBounded) j["index"] = index;
    if (datum)
        j["datum"] = {{"v", datum->v},
                      {"w", datum->w},
                      {"frobenius", datum->frobenius},
                      {"sign", datum->sign},
                      {"exponent", datum->exponent},
                      {"conj", mat::to_string(datum->conj)}};
    return j;
}

namespace {

std::vector<Mat2> pgl2_reps(const FiniteRing& R) {
    i64 q = R.size();
    std::vector<Mat2> out{mat::identity(R)};
    for (i64 b = 0; b < q; ++b)
        for (i64 c = 0; c < q; ++c)
            for (i64 d = 0; d < q; ++d) {
                Mat2 m{1, b, c, d};
                if (mat::det(R, m) != 0 && m != out.front()) out.push_back(m);
            }
    for (i64 c = 1; c < q; ++c)
        for (i64 d = 0; d < q; ++d) out.push_back(Mat2{0, 1, c, d});
    return out;
}

Mat2 twisted(const FiniteRing& R, const Mat2& P, const Mat2& Pinv, const Mat2& x, int j, i64 scal) {
    return mat::scale(R, scal, mat::mul(R, mat::mul(R, P, mat::frobenius(R, x, j)), Pinv));
}

}  // namespace

LocalImageReport pair_entanglement_classify(const SubgroupClosure& U, const PairSpec& s) {
    if (!U.enumerated()) throw Error(ErrorCode::NotEnumerated, "pair_entanglement_classify needs an enumerated subgroup");
    const auto& els = U.elements();
    std::size_t nf = s.f_blocks.size(), ng = s.g_blocks.size();
    for (auto& g : U.generators())
        if (!fibre_member(s, g)) throw Error(ErrorCode::InvalidArgument, "generator outside the fibre product");
    LocalImageReport rep;
    rep.p = s.p;

    std::unordered_set<std::string> pf, pg;
    for (auto& e : els) {
        Elem xf = part(e, 0, nf), xg = part(e, nf, nf + ng);
        xf.push_back(e.back());
        xg.push_back(e.back());
        pf.insert(elem::key(xf));
        pg.insert(elem::key(xg));
    }
    i64 of = s.p - 1, og = s.p - 1;
    for (auto& R : s.f_blocks) of *= sl2_order(R.size());
    for (auto& R : s.g_blocks) og *= sl2_order(R.size());
    if (static_cast<i64>(pf.size()) != of || static_cast<i64>(pg.size()) != og)
        throw Error(ErrorCode::NotSurjectiveOntoFactors, "U does not surject onto both dagger groups");

    i64 full = fibre_order(s);
    rep.evidence.push_back("|U| = " + std::to_string(U.order()) + ", fibre product order " + std::to_string(full));
    if (U.order() == full) {
        rep.verdict = LocalVerdict::FullDagger;
        return rep;
    }
    if ((s.kf - s.kg) % 2 != 0) {
        rep.verdict = LocalVerdict::Unknown;
        rep.evidence.push_back("k_f - k_g odd: scalar pattern not attempted");
        return rep;
    }
    int e = (s.kf - s.kg) / 2;
    Ambient amb = pair_ambient(s);
    for (std::size_t v = 0; v < nf; ++v)
        for (std::size_t w = 0; w < ng; ++w) {
            const FiniteRing& R = s.f_blocks[v];
            if (R != s.g_blocks[w]) continue;
            std::vector<Mat2> Ps{mat::identity(R)};
            if (R.size() <= 11) Ps = pgl2_reps(R);
            // (1, ..., -1 at w, ..., lambda = 1)
            Elem minus = elem::identity(amb);
            minus[nf + w] = mat::neg(R, mat::identity(R));
            bool has_minus = U.contains(minus);
            for (int j = 0; j < R.n(); ++j)
                for (auto& P : Ps) {
                    Mat2 Pinv = mat::inv(R, P);
                    bool ok = true, all_plus = true, legendre = true;
                    for (auto& el : els) {
                        i64 lam = el.back().a;
                        Mat2 z = twisted(R, P, Pinv, el[v], j, fp_pow(lam, e, s.p));
                        const Mat2& y = el[nf + w];
                        int sg;
                        if (y == z) sg = 1;
                        else if (y == mat::neg(R, z)) sg = -1;
                        else {
                            ok = false;
                            break;
                        }
                        all_plus = all_plus && sg == 1;
                        legendre = legendre && sg == kronecker(lam, s.p);
                    }
                    if (!ok) continue;
                    std::string sign;
                    if (has_minus) sign = "+-";
                    else if (all_plus) sign = "+";
                    else if (legendre) sign = "-";
                    else continue;
                    rep.verdict = LocalVerdict::Entangled;
                    rep.datum = EntanglementDatum{v, w, j, sign, e, P};
                    rep.evidence.push_back("y_w = " + sign + " lambda^" + std::to_string(e) + " P phi^" + std::to_string(j) +
                                           "(x_v) P^-1 on every element");
                    return rep;
                }
        }
    rep.verdict = LocalVerdict::Unknown;
    rep.evidence.push_back("no scalar-twist relation between blocks found");
    return rep;
}

std::vector<Elem> regenerate_entangled(const SubgroupClosure& U, const PairSpec& s, const EntanglementDatum& d) {
    if (s.f_blocks.size() != 1 || s.g_blocks.size() != 1)
        throw Error(ErrorCode::Unsupported, "regeneration is implemented for one block per form");
    const FiniteRing& R = s.f_blocks[0];
    Mat2 Pinv = mat::inv(R, d.conj);
    std::map<std::string, Elem> out;
    for (auto& el : U.elements()) {
        i64 lam = el.back().a;
        Mat2 z = twisted(R, d.conj, Pinv, el[0], d.frobenius, fp_pow(lam, d.exponent, s.p));
        std::vector<Mat2> ys;
        if (d.sign == "+") ys = {z};
        else if (d.sign == "-") ys = {kronecker(lam, s.p) == 1 ? z : mat::neg(R, z)};
        else ys = {z, mat::neg(R, z)};
        for (auto& y : ys) {
            Elem x{el[0], y, el.back()};
            out.emplace(elem::key(x), x);
        }
    }
    std::vector<Elem> r;
    for (auto& [k, v] : out) r.push_back(v);
    return r;
}

// ---------------------------------------------------------------- exceptional primes

i64 pair_modulus(i64 nf, i64 ng) {
    i64 L = lcm(nf, ng);
    return (nf % 2 && ng % 2) ? L : 4 * L;
}

ScanResult exceptional_prime_scan(const Newform& f, const Newform& g, const InnerTwistGroup& Gf,
                                  const InnerTwistGroup& Gg, const std::vector<FieldAutomorphism>& gammas,
                                  i64 l_bound, i64 p_bound, const std::optional<CompositeField>& composite) {
    if (f.weight < g.weight) throw Error(ErrorCode::InvalidArgument, "scan expects k_f >= k_g");
    if (l_bound > std::min(f.bound, g.bound)) throw Error(ErrorCode::BoundTooLarge, "l-bound exceeds a coefficient table");
    auto comp = composite ? composite : default_composite(f, g);
    if (!comp) throw Error(ErrorCode::IncompatibleFields, "no composite presentation for the coefficient fields");
    const NumberFieldQ& K = comp->field;
    std::vector<FieldAutomorphism> gs = gammas;
    if (gs.empty()) gs.push_back(identity_automorphism(g.field));
    i64 M = pair_modulus(f.level, g.level);
    mpz_class lk = 1;
    ScanResult res;
    for (i64 l : primes_upto(l_bound)) {
        if (M % l == 0 || (f.level * g.level) % l == 0) continue;
        if (!Gf.in_H(l) || !Gg.in_H(l)) continue;
        mpz_class lpow = 1;
        for (int i = 0; i < f.weight - g.weight; ++i) lpow *= static_cast<long>(l);
        QElem af = embed(f.field, f.a(l), K, comp->embed_f);
        QElem af2 = K.mul(af, af);
        QElem prod = K.one();
        for (auto& gm : gs) {
            QElem ag = embed(g.field, apply(g.field, gm, g.a(l)), K, comp->embed_g);
            prod = K.mul(prod, K.sub(af2, K.scale(mpq_class(lpow), K.mul(ag, ag))));
        }
        mpq_class n = K.norm(prod);
        res.norms.emplace_back(l, n.get_num());
    }
    if (res.norms.empty()) throw Error(ErrorCode::NoEligibleEll, "no prime l <= " + std::to_string(l_bound) + " lies in H");
    if (std::all_of(res.norms.begin(), res.norms.end(), [](auto& x) { return x.second == 0; })) {
        res.all_primes = true;
        return res;
    }
    for (i64 p : primes_upto(p_bound)) {
        if (p < 5 || (f.level * g.level) % p == 0) continue;
        int count = 0;
        bool ok = true;
        for (auto& [l, n] : res.norms) {
            if (l == p || n == 0) continue;
            if (!mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(p))) {
                ok = false;
                break;
            }
            ++count;
        }
        if (ok && count >= 3) res.candidates.push_back(p);
    }
    return res;
}

// ---------------------------------------------------------------- audit

AuditResult adelic_openness_audit(const std::vector<LocalImageReport>& reports, const std::vector<i64>& S,
                                  const DetImage& det) {
    std::vector<i64> have, want = S;
    for (auto& r : reports) have.push_back(r.p);
    std::sort(have.begin(), have.end());
    std::sort(want.begin(), want.end());
    if (std::adjacent_find(have.begin(), have.end()) != have.end())
        throw Error(ErrorCode::IncompleteCover, "duplicate report for a prime");
    if (have != want) throw Error(ErrorCode::IncompleteCover, "reports do not cover the audited prime set exactly");

    AuditResult a;
    a.notes.push_back("primes outside the audited set are assumed FullDagger");
    for (auto& r : reports) {
        if (r.verdict == LocalVerdict::OpenIndexBounded) a.index_bound *= r.index;
        if (r.verdict == LocalVerdict::Entangled && !a.failing) a.failing = "EntangledPair";
    }
    if (!a.failing)
        for (auto& r : reports)
            if (r.verdict == LocalVerdict::Unknown) {
                a.failing = "UnknownLocalImage";
                break;
            }
    if (!a.failing && det.tail != DetImage::Tail::Full) a.failing = "DetNotOpen";

    // index of the finite-level determinant image
    if (det.modulus > 1) {
        std::set<i64> seen{1};
        std::vector<i64> queue{1};
        for (std::size_t i = 0; i < queue.size(); ++i)
            for (i64 g : det.generators) {
                if (std::gcd(g, det.modulus) != 1) throw Error(ErrorCode::InvalidArgument, "determinant generator is not a unit");
                i64 x = mulmod(queue[i], mod(g, det.modulus), det.modulus);
                if (seen.insert(x).second) queue.push_back(x);
            }
        i64 idx = euler_phi(det.modulus) / static_cast<i64>(seen.size());
        a.index_bound *= idx;
        a.notes.push_back("determinant index " + std::to_string(idx) + " at modulus " + std::to_string(det.modulus));
    }
    a.open = !a.failing;
    return a;
}

// ---------------------------------------------------------------- counterexample

CounterexampleRecord counterexample_subgroup(const std::vector<i64>& primes) {
    if (primes.size() < 2) throw Error(ErrorCode::NeedTwoPrimes, "need at least two odd primes");
    std::set<i64> uniq(primes.begin(), primes.end());
    if (uniq.size() != primes.size()) throw Error(ErrorCode::InvalidArgument, "primes must be distinct");
    CounterexampleRecord r;
    r.primes.assign(uniq.begin(), uniq.end());
    for (i64 p : r.primes) {
        if (p < 3 || !is_prime(p)) throw Error(ErrorCode::InvalidArgument, "expected odd primes");
        r.modulus *= p;
    }
    std::vector<i64> group;
    for (i64 u = 1; u < r.modulus; ++u) {
        if (std::gcd(u, r.modulus) != 1) continue;
        group.push_back(u);
        int first = kronecker(u, r.primes[0]);
        bool same = true;
        for (i64 p : r.primes) same = same && kronecker(u, p) == first;
        if (same) r.elements.push_back(u);
    }
    r.group_order = static_cast<i64>(group.size());
    r.subgroup_order = static_cast<i64>(r.elements.size());
    std::set<i64> S(r.elements.begin(), r.elements.end());
    bool sub = S.count(1) > 0;
    for (i64 a : r.elements) {
        sub = sub && S.count(invmod(a, r.modulus));
        for (i64 b : r.elements) sub = sub && S.count(mulmod(a, b, r.modulus));
    }
    r.is_subgroup = sub;
    bool surj = true;
    for (i64 p : r.primes) {
        std::set<i64> img;
        for (i64 a : r.elements) img.insert(a % p);
        surj = surj && static_cast<i64>(img.size()) == p - 1;
    }
    r.projections_surjective = surj;
    r.index = r.subgroup_order ? r.group_order / r.subgroup_order : 0;
    return r;
}

// ---------------------------------------------------------------- CM

CmImage cm_expected_image_modp(int k, i64 disc, i64 p) {
    if (!is_prime(p) || p < 3) throw Error(ErrorCode::InvalidArgument, "p must be an odd prime");
    if (disc % p == 0) throw Error(ErrorCode::RamifiedInK, std::to_string(p) + " ramifies in Q(sqrt(" + std::to_string(disc) + "))");
    CmImage c;
    c.p = p;
    c.weight = k;
    c.disc = disc;
    c.split = kronecker(disc, p) == 1;
    c.field = FiniteRing::field_of_degree(p, c.split ? 1 : 2);
    i64 q = c.field.size();
    i64 g = std::gcd(q - 1, static_cast<i64>(std::abs(k - 1)));
    if (k == 1) g = q - 1;
    c.order = c.split ? ((p - 1) / g) * ((p - 1) / g) : (q - 1) / g;
    return c;
}

bool CmImage::contains(const Mat2& m) const {
    if (m.b != 0 || m.c != 0 || m.a == 0 || m.d == 0) return false;
    i64 q = field.size();
    i64 g = weight == 1 ? q - 1 : std::gcd(q - 1, static_cast<i64>(std::abs(weight - 1)));
    auto in_image = [&](i64 x) { return field.pow(x, (q - 1) / g) == field.from_int(1); };
    if (split) return in_image(m.a) && in_image(m.d);
    return in_image(m.a) && m.d == field.frobenius(m.a, 1);
}

std::vector<Mat2> CmImage::elements() const {
    std::vector<Mat2> out;
    i64 q = field.size();
    for (i64 a = 1; a < q; ++a)
        for (i64 d = 1; d < q; ++d) {
            Mat2 m{a, 0, 0, d};
            if (contains(m)) out.push_back(m);
        }
    return out;
}

}  // namespace adelic
