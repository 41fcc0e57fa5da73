#include "adelic/finitegroups.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <set>

#include "adelic/error.hpp"

namespace adelic {

namespace mat {

Mat2 identity(const FiniteRing& R) { return scalar(R, R.from_int(1)); }
Mat2 scalar(const FiniteRing&, i64 s) { return {s, 0, 0, s}; }
Mat2 diag(const FiniteRing&, i64 x, i64 y) { return {x, 0, 0, y}; }

Mat2 from_ints(const FiniteRing& R, i64 a, i64 b, i64 c, i64 d) {
    return {R.from_int(a), R.from_int(b), R.from_int(c), R.from_int(d)};
}

Mat2 mul(const FiniteRing& R, const Mat2& x, const Mat2& y) {
    return {R.add(R.mul(x.a, y.a), R.mul(x.b, y.c)), R.add(R.mul(x.a, y.b), R.mul(x.b, y.d)),
            R.add(R.mul(x.c, y.a), R.mul(x.d, y.c)), R.add(R.mul(x.c, y.b), R.mul(x.d, y.d))};
}

i64 det(const FiniteRing& R, const Mat2& x) { return R.sub(R.mul(x.a, x.d), R.mul(x.b, x.c)); }
i64 trace(const FiniteRing& R, const Mat2& x) { return R.add(x.a, x.d); }

Mat2 inv(const FiniteRing& R, const Mat2& x) {
    i64 di = R.inv(det(R, x));
    return {R.mul(x.d, di), R.mul(R.neg(x.b), di), R.mul(R.neg(x.c), di), R.mul(x.a, di)};
}

Mat2 neg(const FiniteRing& R, const Mat2& x) { return {R.neg(x.a), R.neg(x.b), R.neg(x.c), R.neg(x.d)}; }

Mat2 scale(const FiniteRing& R, i64 s, const Mat2& x) {
    return {R.mul(s, x.a), R.mul(s, x.b), R.mul(s, x.c), R.mul(s, x.d)};
}

Mat2 pow(const FiniteRing& R, Mat2 x, i64 e) {
    if (e < 0) return pow(R, inv(R, x), -e);
    Mat2 r = identity(R);
    while (e) {
        if (e & 1) r = mul(R, r, x);
        x = mul(R, x, x);
        e >>= 1;
    }
    return r;
}

Mat2 frobenius(const FiniteRing& R, const Mat2& x, int j) {
    return {R.frobenius(x.a, j), R.frobenius(x.b, j), R.frobenius(x.c, j), R.frobenius(x.d, j)};
}

Mat2 reduce(const FiniteRing& from, const FiniteRing& to, const Mat2& x) {
    if (from == to) return x;
    if (from.p() != to.p() || from.kind() != FiniteRing::Kind::Residue || to.size() > from.size() ||
        (to.kind() == FiniteRing::Kind::Field && to.n() != 1))
        throw Error(ErrorCode::InvalidArgument, "cannot reduce " + from.describe() + " to " + to.describe());
    return {x.a % to.size(), x.b % to.size(), x.c % to.size(), x.d % to.size()};
}

bool is_scalar(const Mat2& x) { return x.b == 0 && x.c == 0 && x.a == x.d; }

Mat2 psl2_canonical(const FiniteRing& R, const Mat2& x) { return std::min(x, neg(R, x)); }

std::string to_string(const Mat2& x) {
    return "[[" + std::to_string(x.a) + "," + std::to_string(x.b) + "],[" + std::to_string(x.c) + "," +
           std::to_string(x.d) + "]]";
}

}  // namespace mat

std::string tag_name(AmbientTag t) {
    switch (t) {
    case AmbientTag::GL2: return "GL2";
    case AmbientTag::SL2: return "SL2";
    case AmbientTag::PSL2: return "PSL2";
    case AmbientTag::GL1: return "GL1";
    }
    return "?";
}

i64 factor_order(const Factor& f) {
    const FiniteRing& R = f.ring;
    i64 q = R.residue_size();
    i64 lift = R.size() / q;  // p^(n-1) for Z/p^n, 1 for fields
    i64 units = (q - 1) * lift;
    i64 gl2 = (q * q - 1) * (q * q - q) * lift * lift * lift * lift;
    switch (f.tag) {
    case AmbientTag::GL2: return gl2;
    case AmbientTag::SL2: return gl2 / units;
    case AmbientTag::PSL2: return R.p() == 2 ? gl2 / units : gl2 / units / 2;
    case AmbientTag::GL1: return units;
    }
    return 0;
}

i64 ambient_order(const Ambient& amb) {
    i64 r = 1;
    for (auto& f : amb) r *= factor_order(f);
    return r;
}

namespace elem {

Elem identity(const Ambient& amb) {
    Elem e;
    e.reserve(amb.size());
    for (auto& f : amb) e.push_back(mat::identity(f.ring));
    return e;
}

Elem mul(const Ambient& amb, const Elem& x, const Elem& y) {
    Elem r(amb.size());
    for (std::size_t i = 0; i < amb.size(); ++i) {
        r[i] = mat::mul(amb[i].ring, x[i], y[i]);
        if (amb[i].tag == AmbientTag::PSL2) r[i] = mat::psl2_canonical(amb[i].ring, r[i]);
    }
    return r;
}

Elem inv(const Ambient& amb, const Elem& x) {
    Elem r(amb.size());
    for (std::size_t i = 0; i < amb.size(); ++i) {
        r[i] = mat::inv(amb[i].ring, x[i]);
        if (amb[i].tag == AmbientTag::PSL2) r[i] = mat::psl2_canonical(amb[i].ring, r[i]);
    }
    return r;
}

Elem canonical(const Ambient& amb, Elem x) {
    for (std::size_t i = 0; i < amb.size(); ++i)
        if (amb[i].tag == AmbientTag::PSL2) x[i] = mat::psl2_canonical(amb[i].ring, x[i]);
    return x;
}

std::string key(const Elem& x) {
    std::string k(x.size() * 16, '\0');
    char* out = k.data();
    for (const Mat2& m : x) {
        for (i64 v : {m.a, m.b, m.c, m.d}) {
            auto w = static_cast<std::uint32_t>(v);
            std::memcpy(out, &w, 4);
            out += 4;
        }
    }
    return k;
}

bool valid(const Ambient& amb, const Elem& x) {
    if (x.size() != amb.size()) return false;
    for (std::size_t i = 0; i < amb.size(); ++i) {
        const FiniteRing& R = amb[i].ring;
        const Mat2& m = x[i];
        for (i64 v : {m.a, m.b, m.c, m.d})
            if (v < 0 || v >= R.size()) return false;
        i64 dt = mat::det(R, m);
        switch (amb[i].tag) {
        case AmbientTag::GL2:
            if (!R.is_unit(dt)) return false;
            break;
        case AmbientTag::SL2:
        case AmbientTag::PSL2:
            if (dt != R.from_int(1)) return false;
            break;
        case AmbientTag::GL1:
            if (m.b != 0 || m.c != 0 || m.d != R.from_int(1) || !R.is_unit(m.a)) return false;
            break;
        }
    }
    return true;
}

}  // namespace elem

SubgroupClosure::SubgroupClosure(Ambient ambient, std::vector<Elem> generators, i64 bound)
    : ambient_(std::move(ambient)), gens_(std::move(generators)), bound_(bound) {
    if (bound_ < 1) throw Error(ErrorCode::InvalidArgument, "closure bound must be >= 1");
    for (std::size_t i = 0; i < gens_.size(); ++i) {
        if (!elem::valid(ambient_, gens_[i]))
            throw Error(ErrorCode::InvalidGenerator, "generator " + std::to_string(i) + " violates the ambient constraint");
        gens_[i] = elem::canonical(ambient_, gens_[i]);
    }
}

const std::vector<Elem>& SubgroupClosure::elements() const {
    if (elements_.empty()) throw Error(ErrorCode::NotEnumerated, "subgroup not enumerated");
    return elements_;
}

i64 SubgroupClosure::order() const { return static_cast<i64>(elements().size()); }

std::optional<std::size_t> SubgroupClosure::index_of(const Elem& x) const {
    if (elements_.empty()) throw Error(ErrorCode::NotEnumerated, "subgroup not enumerated");
    auto it = index_.find(elem::key(elem::canonical(ambient_, x)));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool SubgroupClosure::contains(const Elem& x) const { return index_of(x).has_value(); }

void SubgroupClosure::enumerate() {
    if (!elements_.empty()) return;
    Elem id = elem::identity(ambient_);
    elements_.push_back(id);
    index_.emplace(elem::key(id), 0);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        for (const Elem& g : gens_) {
            Elem x = elem::mul(ambient_, elements_[i], g);
            std::string k = elem::key(x);
            if (index_.count(k)) continue;
            if (static_cast<i64>(elements_.size()) >= bound_) {
                elements_.clear();
                index_.clear();
                throw Error(ErrorCode::OverflowBound, "closure exceeds " + std::to_string(bound_) + " elements");
            }
            index_.emplace(std::move(k), elements_.size());
            elements_.push_back(std::move(x));
        }
    }
}

SubgroupClosure closure(const std::vector<Elem>& gens, const Ambient& ambient, i64 bound) {
    SubgroupClosure s(ambient, gens, bound);
    s.enumerate();
    return s;
}

bool is_full_sl2_lift(const std::vector<Elem>& gens, const std::vector<FiniteRing>& rings, i64 bound) {
    if (rings.empty()) throw Error(ErrorCode::InvalidArgument, "no rings");
    i64 p = rings[0].p();
    for (auto& R : rings) {
        if (R.p() != p) throw Error(ErrorCode::MixedCharacteristic, "rings must share the prime");
        if (R.kind() != FiniteRing::Kind::Residue) throw Error(ErrorCode::InvalidArgument, "lifting check needs Z/p^n rings");
    }
    if (p < 5) throw Error(ErrorCode::SmallPrime, "lifting lemma needs p >= 5");
    FiniteRing Fp = FiniteRing::residue(p, 1);
    Ambient amb;
    for (std::size_t i = 0; i < rings.size(); ++i) amb.push_back({Fp, AmbientTag::PSL2});
    std::vector<Elem> red;
    for (auto& g : gens) {
        if (g.size() != rings.size()) throw Error(ErrorCode::InvalidGenerator, "generator arity");
        for (std::size_t i = 0; i < rings.size(); ++i)
            if (mat::det(rings[i], g[i]) != rings[i].from_int(1))
                throw Error(ErrorCode::InvalidGenerator, "generator not in SL2");
        Elem r(rings.size());
        for (std::size_t i = 0; i < rings.size(); ++i) r[i] = mat::reduce(rings[i], Fp, g[i]);
        red.push_back(r);
    }
    auto c = closure(red, amb, bound);
    return c.order() == ambient_order(amb);
}

i64 psl2_order(i64 q) { return q * (q * q - 1) / (q % 2 ? 2 : 1); }
i64 pgl2_order(i64 q) { return q * (q * q - 1); }

std::string Psl2Class::name() const {
    switch (tag) {
    case Psl2Tag::Cyclic: return "Cyclic";
    case Psl2Tag::Dihedral: return "Dihedral";
    case Psl2Tag::A4: return "A4";
    case Psl2Tag::S4: return "S4";
    case Psl2Tag::A5: return "A5";
    case Psl2Tag::PSL2Subfield: return "PSL2-subfield(" + std::to_string(subfield_q) + ")";
    case Psl2Tag::PGL2Subfield: return "PGL2-subfield(" + std::to_string(subfield_q) + ")";
    case Psl2Tag::BorelContained: return "Borel-contained";
    case Psl2Tag::Full: return "Full";
    }
    return "?";
}

namespace {

i64 psl2_elem_order(const FiniteRing& R, const Mat2& m) {
    Mat2 id = mat::identity(R), mid = mat::neg(R, id), x = m;
    i64 k = 1;
    while (x != id && x != mid) x = mat::mul(R, x, m), ++k;
    return k;
}

i64 pgl2_elem_order(const FiniteRing& R, const Mat2& m) {
    Mat2 x = m;
    i64 k = 1;
    while (!mat::is_scalar(x)) x = mat::mul(R, x, m), ++k;
    return k;
}

std::map<i64, i64> psl2_subfield_histogram(i64 p, int f) {
    FiniteRing F = FiniteRing::field_of_degree(p, f);
    std::vector<Elem> gens{{mat::from_ints(F, 1, 1, 0, 1)}, {mat::from_ints(F, 1, 0, 1, 1)}};
    if (f > 1) {
        i64 x = p;  // the class of the polynomial variable
        gens.push_back({Mat2{1, x, 0, 1}});
        gens.push_back({Mat2{1, 0, x, 1}});
    }
    auto c = closure(gens, Ambient{{F, AmbientTag::PSL2}});
    return psl2_order_histogram(c);
}

std::map<i64, i64> pgl2_histogram(i64 p, int f) {
    FiniteRing F = FiniteRing::field_of_degree(p, f);
    i64 q = F.size();
    std::map<i64, i64> h;
    for (i64 a = 0; a < q; ++a)
        for (i64 b = 0; b < q; ++b)
            for (i64 c = 0; c < q; ++c)
                for (i64 d = 0; d < q; ++d) {
                    // normalised: first nonzero entry equals 1
                    i64 first = a ? a : b ? b : c ? c : d;
                    if (first != 1) continue;
                    Mat2 m{a, b, c, d};
                    if (mat::det(F, m) == 0) continue;
                    ++h[pgl2_elem_order(F, m)];
                }
    return h;
}

bool fixes_point(const FiniteRing& R, const Mat2& m, i64 u, i64 v) {
    i64 x = R.add(R.mul(m.a, u), R.mul(m.b, v));
    i64 y = R.add(R.mul(m.c, u), R.mul(m.d, v));
    return R.sub(R.mul(x, v), R.mul(y, u)) == 0;
}

}  // namespace

std::map<i64, i64> psl2_order_histogram(const SubgroupClosure& sub) {
    if (sub.ambient().size() != 1 || sub.ambient()[0].tag != AmbientTag::PSL2)
        throw Error(ErrorCode::InvalidArgument, "histogram needs a PSL2 ambient");
    const FiniteRing& R = sub.ambient()[0].ring;
    std::map<i64, i64> h;
    for (auto& e : sub.elements()) ++h[psl2_elem_order(R, e[0])];
    return h;
}

Psl2Class dickson_classify(const SubgroupClosure& sub) {
    if (!sub.enumerated()) throw Error(ErrorCode::NotEnumerated, "dickson_classify needs an enumerated subgroup");
    if (sub.ambient().size() != 1 || sub.ambient()[0].tag != AmbientTag::PSL2 || !sub.ambient()[0].ring.is_field())
        throw Error(ErrorCode::InvalidArgument, "dickson_classify needs a subgroup of PSL2 over one finite field");
    const FiniteRing& R = sub.ambient()[0].ring;
    i64 p = R.p(), q = R.size();
    int f = R.kind() == FiniteRing::Kind::Field ? R.n() : 1;
    if (p < 5) throw Error(ErrorCode::SmallPrime, "classification needs p >= 5");
    i64 n = sub.order();
    Psl2Class out{Psl2Tag::Full, 0, n};
    if (n == psl2_order(q)) return out;

    auto hist = psl2_order_histogram(sub);
    i64 maxord = hist.rbegin()->first;
    if (maxord == n) return out.tag = Psl2Tag::Cyclic, out;

    // dihedral groups of order 2m with p | m sit in a Borel
    if (n % 2 == 0 && n >= 4 && (n / 2) % p != 0) {
        i64 m = n / 2;
        const Mat2* c = nullptr;
        for (auto& e : sub.elements())
            if (psl2_elem_order(R, e[0]) == m) { c = &e[0]; break; }
        if (c) {
            std::set<Mat2> cyc;
            Mat2 x = mat::identity(R);
            for (i64 i = 0; i < m; ++i) cyc.insert(mat::psl2_canonical(R, x)), x = mat::mul(R, x, *c);
            bool dihedral = true;
            for (auto& e : sub.elements())
                if (!cyc.count(e[0]) && psl2_elem_order(R, e[0]) != 2) { dihedral = false; break; }
            if (dihedral) return out.tag = Psl2Tag::Dihedral, out;
        }
    }

    for (int fs = 1; fs < f; ++fs) {
        if (f % fs) continue;
        i64 qs = ipow(p, static_cast<unsigned>(fs));
        if (n == psl2_order(qs) && psl2_subfield_histogram(p, fs) == hist) {
            out.tag = Psl2Tag::PSL2Subfield, out.subfield_q = qs;
            return out;
        }
    }
    for (int fs = 1; 2 * fs <= f; ++fs) {
        if (f % (2 * fs)) continue;
        i64 qs = ipow(p, static_cast<unsigned>(fs));
        if (n == pgl2_order(qs) && pgl2_histogram(p, fs) == hist) {
            out.tag = Psl2Tag::PGL2Subfield, out.subfield_q = qs;
            return out;
        }
    }

    auto only = [&](std::set<i64> allowed) {
        for (auto& [o, cnt] : hist)
            if (!allowed.count(o)) return false;
        return true;
    };
    if (n == 12 && only({1, 2, 3})) return out.tag = Psl2Tag::A4, out;
    if (n == 24 && only({1, 2, 3, 4}) && hist.count(4)) return out.tag = Psl2Tag::S4, out;
    if (n == 60 && only({1, 2, 3, 5})) return out.tag = Psl2Tag::A5, out;

    auto all_fix = [&](i64 u, i64 v) {
        for (auto& g : sub.generators())
            if (!fixes_point(R, g[0], u, v)) return false;
        return true;
    };
    if (all_fix(1, 0)) return out.tag = Psl2Tag::BorelContained, out;
    for (i64 x = 0; x < q; ++x)
        if (all_fix(x, 1)) return out.tag = Psl2Tag::BorelContained, out;

    throw Error(ErrorCode::Unsupported, "subgroup of order " + std::to_string(n) + " matches no class");
}

RMatrix kron_minus_identity(const FiniteRing& R, const Mat2& a, const Mat2& b) {
    i64 A[2][2] = {{a.a, a.b}, {a.c, a.d}};
    i64 B[2][2] = {{b.a, b.b}, {b.c, b.d}};
    RMatrix m(4, std::vector<i64>(4));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    i64 v = R.mul(A[i][j], B[k][l]);
                    if (2 * i + k == 2 * j + l) v = R.sub(v, R.from_int(1));
                    m[2 * i + k][2 * j + l] = v;
                }
    return m;
}

std::string smith_profile_string(const std::vector<int>& vals) {
    std::string s = "(";
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) s += ",";
        if (vals[i] < 0) s += "0";
        else if (vals[i] == 0) s += "1";
        else if (vals[i] == 1) s += "p";
        else s += "p^" + std::to_string(vals[i]);
    }
    return s + ")";
}

std::string TensorCertificate::profile() const { return smith_profile_string(smith_valuations); }

TensorCertificate tensor_coker_certificate(const FiniteRing& ra, const Mat2& a0, const FiniteRing& rb, const Mat2& b0) {
    if (ra.p() != rb.p()) throw Error(ErrorCode::MixedCharacteristic, ra.describe() + " vs " + rb.describe());
    FiniteRing R = ra;
    Mat2 a = a0, b = b0;
    if (ra != rb) {
        if (ra.kind() != FiniteRing::Kind::Residue || rb.kind() != FiniteRing::Kind::Residue)
            throw Error(ErrorCode::Unsupported, "tensor certificate across different fields");
        R = ra.size() < rb.size() ? ra : rb;
        a = mat::reduce(ra, R, a0);
        b = mat::reduce(rb, R, b0);
    }
    RMatrix m = kron_minus_identity(R, a, b);
    TensorCertificate cert;
    cert.p = R.p();
    if (R.is_field()) {
        cert.residue_rank = rank_over_field(R, m);
        for (int i = 0; i < 4; ++i) cert.smith_valuations.push_back(i < cert.residue_rank ? 0 : -1);
    } else {
        FiniteRing Fp = FiniteRing::residue(R.p(), 1);
        RMatrix r = m;
        for (auto& row : r)
            for (auto& v : row) v %= R.p();
        cert.residue_rank = rank_over_field(Fp, r);
        cert.smith_valuations = local_smith_valuations(R, m);
    }
    cert.free_rank_one = cert.smith_valuations == std::vector<int>{0, 0, 0, -1};
    return cert;
}

}  // namespace adelic
