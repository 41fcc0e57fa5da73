#include "adelic/newforms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "adelic/error.hpp"

namespace adelic {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

i64 get_int(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer()) schema(std::string("missing integer field '") + key + "'");
    return j[key].get<i64>();
}

mpq_class parse_rational(const json& v) {
    std::string s;
    if (v.is_string()) s = v.get<std::string>();
    else if (v.is_number_integer()) s = std::to_string(v.get<i64>());
    else schema("coordinate is not a rational string");
    mpq_class q;
    if (s.empty() || q.set_str(s, 10) != 0) schema("bad rational '" + s + "'");
    if (q.get_den() == 0) schema("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

// complex roots of the defining polynomial (Durand-Kerner)
std::vector<std::complex<long double>> complex_roots(const ZPoly& f) {
    using C = std::complex<long double>;
    int d = static_cast<int>(f.size()) - 1;
    std::vector<C> z(d);
    for (int i = 0; i < d; ++i) z[i] = std::pow(C(0.4L, 0.9L), i);
    auto eval = [&](C x) {
        C r = 0;
        for (int i = d; i >= 0; --i) r = r * x + C(f[i].get_d(), 0);
        return r;
    };
    for (int it = 0; it < 500; ++it) {
        for (int i = 0; i < d; ++i) {
            C den = 1;
            for (int j = 0; j < d; ++j)
                if (j != i) den *= z[i] - z[j];
            z[i] -= eval(z[i]) / den;
        }
    }
    return z;
}

}  // namespace

const QElem& Newform::a(i64 l) const {
    auto it = ap.find(l);
    if (it == ap.end()) throw Error(ErrorCode::BoundTooLarge, "no coefficient for l = " + std::to_string(l));
    return it->second;
}

QElem Newform::value(const RootOfUnity& z) const {
    if (zeta_order % z.order) throw Error(ErrorCode::InvalidArgument, "root of unity " + z.str() + " not in the coefficient field");
    return field.pow(zeta, z.exp * (zeta_order / z.order));
}

QElem Newform::an(i64 n) const {
    QElem r = field.one();
    for (auto [p, e] : factorize(n)) {
        const QElem& a1 = a(p);
        QElem prev = field.one(), cur = a1;
        if (level % p == 0) {
            cur = field.pow(a1, e);
        } else {
            QElem c = field.scale(mpq_class(mpz_class(static_cast<long>(p)) * 0 + 1), char_value(character, p));
            mpz_class pk = 1;
            for (int i = 1; i < weight; ++i) pk *= static_cast<long>(p);
            c = field.scale(mpq_class(pk), c);
            for (int i = 1; i < e; ++i) {
                QElem next = field.sub(field.mul(a1, cur), field.mul(c, prev));
                prev = cur;
                cur = next;
            }
        }
        r = field.mul(r, cur);
    }
    return r;
}

DirichletCharacter character_from_json(const json& j) {
    if (!j.is_object()) schema("character must be an object");
    i64 n = get_int(j, "modulus");
    if (n < 1) schema("character modulus must be positive");
    if (!j.contains("gen_images") || !j["gen_images"].is_array()) schema("character needs gen_images");
    auto g = unit_group(n);
    if (j["gen_images"].size() != g->generators().size()) schema("gen_images length does not match (Z/" + std::to_string(n) + ")^x");
    std::vector<RootOfUnity> im;
    for (auto& x : j["gen_images"]) {
        i64 o = get_int(x, "order"), e = get_int(x, "exp");
        if (o < 1) schema("root of unity order must be positive");
        im.push_back(RootOfUnity::make(o, e));
    }
    try {
        return DirichletCharacter(g, im);
    } catch (const Error& e) {
        schema(e.what());
    }
}

json character_to_json(const DirichletCharacter& chi) {
    json imgs = json::array();
    for (auto& z : chi.images()) imgs.push_back({{"order", z.order}, {"exp", z.exp}});
    return {{"modulus", chi.modulus()}, {"gen_images", imgs}};
}

QElem qelem_from_json(const json& j, int degree) {
    if (!j.is_array() || static_cast<int>(j.size()) != degree) schema("coordinate vector must have length " + std::to_string(degree));
    QElem r;
    for (auto& v : j) r.push_back(parse_rational(v));
    return r;
}

json qelem_to_json(const QElem& a) {
    json r = json::array();
    for (auto& x : a) r.push_back(x.get_str());
    return r;
}

Newform newform_from_json(const json& j) {
    if (!j.is_object()) schema("newform must be a JSON object");
    Newform f;
    if (!j.contains("label") || !j["label"].is_string()) schema("missing label");
    f.label = j["label"].get<std::string>();
    f.level = get_int(j, "level");
    f.weight = static_cast<int>(get_int(j, "weight"));
    if (f.level < 1 || f.weight < 1) schema("level and weight must be positive");
    if (!j.contains("power_basis") || !j["power_basis"].is_boolean()) schema("missing power_basis flag");
    if (!j["power_basis"].get<bool>())
        throw Error(ErrorCode::NotPowerBasis, f.label + ": coefficients are not given in the power basis");
    if (!j.contains("char")) schema("missing char");
    f.character = character_from_json(j["char"]);
    if (f.level % f.character.modulus()) schema("character modulus does not divide the level");

    if (!j.contains("field_poly") || !j["field_poly"].is_array() || j["field_poly"].size() < 2) schema("missing field_poly");
    ZPoly poly;
    for (auto& c : j["field_poly"]) {
        if (!c.is_number_integer()) schema("field_poly entries must be integers");
        poly.push_back(mpz_class(static_cast<long>(c.get<i64>())));
    }
    if (poly.back() != 1) schema("field_poly must be monic");
    try {
        f.field = NumberFieldQ(poly);
    } catch (const Error& e) {
        schema(std::string("field_poly: ") + e.what());
    }
    int d = f.field.degree();

    if (!j.contains("ap") || !j["ap"].is_array() || j["ap"].empty()) schema("missing ap table");
    for (auto& e : j["ap"]) {
        i64 l = get_int(e, "l");
        if (!is_prime(l)) schema("ap index " + std::to_string(l) + " is not prime");
        if (!e.contains("coords")) schema("ap entry without coords");
        f.ap[l] = qelem_from_json(e["coords"], d);
    }
    f.bound = f.ap.rbegin()->first;
    for (i64 l : primes_upto(f.bound))
        if (!f.ap.count(l)) schema("ap table misses l = " + std::to_string(l));

    if (j.contains("zeta")) {
        f.zeta_order = get_int(j["zeta"], "order");
        if (!j["zeta"].contains("coords")) schema("zeta needs coords");
        f.zeta = qelem_from_json(j["zeta"]["coords"], d);
    } else {
        f.zeta_order = 2;
        f.zeta = f.field.from_rational(-1);
    }
    if (f.zeta_order < 2 || f.zeta_order % 2) schema("zeta order must be even");
    if (f.field.pow(f.zeta, f.zeta_order) != f.field.one()) schema("zeta is not a root of unity of the stated order");
    for (auto [q, e] : factorize(f.zeta_order))
        if (f.field.pow(f.zeta, f.zeta_order / q) == f.field.one()) schema("zeta has smaller order than stated");
    if (f.zeta_order % f.character.order()) schema("character values are not in the coefficient field; supply zeta");

    f.automorphisms.clear();
    if (j.contains("automorphisms")) {
        for (auto& a : j["automorphisms"]) f.automorphisms.push_back({qelem_from_json(a, d)});
    }
    auto id = identity_automorphism(f.field);
    if (std::find(f.automorphisms.begin(), f.automorphisms.end(), id) == f.automorphisms.end())
        f.automorphisms.insert(f.automorphisms.begin(), id);
    try {
        for (auto& a : f.automorphisms) verify_automorphism(f.field, a);
        check_group(f.field, f.automorphisms);
    } catch (const Error& e) {
        schema(std::string("automorphisms: ") + e.what());
    }

    if (j.contains("inner_twists")) {
        for (auto& t : j["inner_twists"]) {
            if (!t.contains("auto_image") || !t.contains("char")) schema("inner twist needs auto_image and char");
            f.listed_twists.push_back({{qelem_from_json(t["auto_image"], d)}, character_from_json(t["char"])});
        }
    }
    if (j.contains("cm_disc") && !j["cm_disc"].is_null()) {
        if (!j["cm_disc"].is_number_integer()) schema("cm_disc must be an integer");
        f.cm_disc = j["cm_disc"].get<i64>();
    }

    // advisory Ramanujan bound under every complex embedding
    auto roots = complex_roots(f.field.poly());
    for (auto& [l, a] : f.ap) {
        if (f.level % l == 0) continue;
        long double bound = 2.0L * std::pow(static_cast<long double>(l), (f.weight - 1) / 2.0L) + 1e-6L;
        for (auto& z : roots) {
            std::complex<long double> v = 0, pw = 1;
            for (int i = 0; i < d; ++i) v += pw * static_cast<long double>(a[i].get_d()), pw *= z;
            if (std::abs(v) > bound) {
                f.warnings.push_back("Ramanujan bound exceeded at l = " + std::to_string(l));
                break;
            }
        }
        if (f.warnings.size() > 5) break;
    }
    return f;
}

json newform_to_json(const Newform& f) {
    json ap = json::array();
    for (auto& [l, a] : f.ap) ap.push_back({{"l", l}, {"coords", qelem_to_json(a)}});
    json poly = json::array();
    for (auto& c : f.field.poly()) poly.push_back(c.get_si());
    json autos = json::array();
    for (auto& a : f.automorphisms) autos.push_back(qelem_to_json(a.image));
    json j = {{"label", f.label},
              {"level", f.level},
              {"weight", f.weight},
              {"char", character_to_json(f.character)},
              {"field_poly", poly},
              {"power_basis", true},
              {"zeta", {{"order", f.zeta_order}, {"coords", qelem_to_json(f.zeta)}}},
              {"automorphisms", autos},
              {"ap", ap}};
    if (!f.listed_twists.empty()) {
        json tw = json::array();
        for (auto& t : f.listed_twists)
            tw.push_back({{"auto_image", qelem_to_json(t.gamma.image)}, {"char", character_to_json(t.chi)}});
        j["inner_twists"] = tw;
    }
    if (f.cm_disc) j["cm_disc"] = *f.cm_disc;
    return j;
}

Newform load_newform_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::SchemaError, "cannot read " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
    }
    return newform_from_json(j);
}

std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("ADELIC_IMAGE_CACHE"); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "adelic-image";
    return std::filesystem::path(".cache") / "adelic-image";
}

void atomic_write(const std::filesystem::path& path, const std::string& data) {
    std::filesystem::create_directories(path.parent_path());
    static std::atomic<unsigned> counter{0};
    auto tmp = path;
    tmp += ".tmp" + std::to_string(counter++) + "_" +
           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000);
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::FetchError, "cannot write " + tmp.string());
        out << data;
        if (!out) throw Error(ErrorCode::FetchError, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

LmfdbClient::LmfdbClient(std::filesystem::path cache_dir, bool offline, std::shared_ptr<Transport> transport,
                         std::chrono::milliseconds delay)
    : cache_dir_(std::move(cache_dir)), offline_(offline), transport_(std::move(transport)),
      delay_(std::max(delay, std::chrono::milliseconds(500))) {}

std::string LmfdbClient::request(const std::string& path) {
    std::lock_guard lock(mu_);
    if (offline_) throw Error(ErrorCode::OfflineMiss, "network access refused in offline mode");
    if (!transport_) throw Error(ErrorCode::FetchError, "no transport configured");
    auto now = std::chrono::steady_clock::now();
    if (last_.time_since_epoch().count() != 0 && now - last_ < delay_) std::this_thread::sleep_for(delay_ - (now - last_));
    HttpResponse r = transport_->get("www.lmfdb.org", path);
    last_ = std::chrono::steady_clock::now();
    if (r.status != 200) throw Error(ErrorCode::FetchError, "HTTP status " + std::to_string(r.status) + " for " + path);
    return r.body;
}

std::filesystem::path LmfdbClient::fetch(const std::string& label) {
    for (char c : label)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.'))
            throw Error(ErrorCode::FetchError, "malformed label '" + label + "'");
    auto path = cache_dir_ / (label + ".json");
    if (std::filesystem::exists(path)) return path;
    if (offline_) throw Error(ErrorCode::OfflineMiss, label + " is not cached and --offline is set");
    std::string nf_body = request("/api/mf_newforms/?label=" + label + "&_format=json");
    std::string hk_body = request("/api/mf_hecke_nf/?label=" + label + "&_format=json");
    atomic_write(cache_dir_ / "raw" / (label + ".mf_newforms.json"), nf_body);
    atomic_write(cache_dir_ / "raw" / (label + ".mf_hecke_nf.json"), hk_body);
    json nf, hk;
    try {
        nf = json::parse(nf_body);
        hk = json::parse(hk_body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FetchError, std::string("unparseable response: ") + e.what());
    }
    if (!nf.contains("data") || nf["data"].empty() || !hk.contains("data") || hk["data"].empty())
        throw Error(ErrorCode::FetchError, "no record for '" + label + "' (HTTP status 200, empty data)");
    json converted = convert_lmfdb_records(nf["data"][0], hk["data"][0]);
    newform_from_json(converted);  // validate before caching
    atomic_write(path, converted.dump(1));
    return path;
}

namespace {

// roots of unity of a field of degree <= 2 in the power basis
std::pair<i64, QElem> quadratic_roots_of_unity(const NumberFieldQ& L) {
    if (L.degree() == 1) return {2, L.from_rational(-1)};
    // sqrt(D) = 2 theta + c1 for theta^2 + c1 theta + c0
    const ZPoly& f = L.poly();
    mpz_class D = f[1] * f[1] - 4 * f[0];
    QElem s = L.add(L.scale(2, L.gen()), L.from_rational(mpq_class(f[1])));
    for (i64 m : {3, 1}) {
        // sqrt(-m) = s / r with r^2 = D / (-m)
        mpz_class t = D / (-m);
        if (D % m != 0 || t <= 0 || !mpz_perfect_square_p(t.get_mpz_t())) continue;
        mpz_class r;
        mpz_sqrt(r.get_mpz_t(), t.get_mpz_t());
        QElem root = L.scale(mpq_class(1, 1) / mpq_class(r), s);
        if (m == 1) return {4, root};
        return {6, L.scale(mpq_class(1, 2), L.add(L.one(), root))};
    }
    return {2, L.from_rational(-1)};
}

}  // namespace

json convert_lmfdb_records(const json& nf, const json& hk) {
    auto need = [&](const json& j, const char* key) -> const json& {
        if (!j.contains(key) || j[key].is_null()) throw Error(ErrorCode::SchemaError, std::string("LMFDB record lacks ") + key);
        return j[key];
    };
    if (!need(nf, "hecke_ring_power_basis").get<bool>())
        throw Error(ErrorCode::NotPowerBasis, "LMFDB coefficients use a non-power integral basis");
    if (hk.contains("hecke_ring_cyclotomic_generator") && hk["hecke_ring_cyclotomic_generator"].is_number_integer() &&
        hk["hecke_ring_cyclotomic_generator"].get<i64>() != 0)
        throw Error(ErrorCode::NotPowerBasis, "LMFDB coefficients use a cyclotomic representation");
    i64 level = need(nf, "level").get<i64>();
    ZPoly poly;
    json fp = json::array();
    for (auto& c : need(nf, "field_poly")) {
        poly.push_back(mpz_class(static_cast<long>(c.get<i64>())));
        fp.push_back(c.get<i64>());
    }
    NumberFieldQ L(poly);
    int d = L.degree();
    auto [w, zeta] = quadratic_roots_of_unity(L);
    std::vector<FieldAutomorphism> autos{identity_automorphism(L)};
    if (d == 2) autos.push_back({L.sub(L.from_rational(mpq_class(-poly[1])), L.gen())});

    auto coords = [&](const json& c) {
        QElem r = L.zero();
        for (std::size_t i = 0; i < c.size() && i < static_cast<std::size_t>(d); ++i)
            r[i] = mpq_class(static_cast<long>(c[i].get<i64>()));
        return r;
    };

    // character: values on LMFDB's generators, spread over the group by BFS
    auto G = unit_group(level);
    std::map<i64, i64> val;  // u -> exponent of zeta
    val[1 % level] = 0;
    if (hk.contains("hecke_ring_character_values") && hk["hecke_ring_character_values"].is_array()) {
        std::vector<std::pair<i64, i64>> gens;
        for (auto& gv : hk["hecke_ring_character_values"]) {
            i64 g = gv[0].get<i64>();
            QElem v = coords(gv[1]), z = L.one();
            i64 k = 0;
            while (k < w && z != v) z = L.mul(z, zeta), ++k;
            if (k == w) throw Error(ErrorCode::SchemaError, "character value is not a root of unity in mu(L)");
            gens.emplace_back(mod(g, level), k);
        }
        std::vector<i64> queue{1 % level};
        for (std::size_t i = 0; i < queue.size(); ++i)
            for (auto [g, k] : gens) {
                i64 u = mulmod(queue[i], g, level);
                if (val.count(u)) continue;
                val[u] = (val[queue[i]] + k) % w;
                queue.push_back(u);
            }
    }
    json imgs = json::array();
    for (i64 x : G->generators()) {
        i64 e = val.count(x) ? val[x] : 0;
        auto z = RootOfUnity::make(w, e);
        imgs.push_back({{"order", z.order}, {"exp", z.exp}});
    }

    json ap = json::array();
    auto primes = primes_upto(100000);
    const json& aps = need(hk, "ap");
    for (std::size_t i = 0; i < aps.size() && i < primes.size(); ++i)
        ap.push_back({{"l", primes[i]}, {"coords", qelem_to_json(coords(aps[i]))}});

    json autos_j = json::array();
    for (auto& a : autos) autos_j.push_back(qelem_to_json(a.image));
    json out = {{"label", need(nf, "label").get<std::string>()},
                {"level", level},
                {"weight", need(nf, "weight").get<i64>()},
                {"char", {{"modulus", level}, {"gen_images", imgs}}},
                {"field_poly", fp},
                {"power_basis", true},
                {"zeta", {{"order", w}, {"coords", qelem_to_json(zeta)}}},
                {"automorphisms", autos_j},
                {"ap", ap}};
    if (nf.contains("cm_discs") && nf["cm_discs"].is_array() && !nf["cm_discs"].empty())
        out["cm_disc"] = nf["cm_discs"][0].get<i64>();
    return out;
}

i64 twist_modulus(i64 n) { return n % 2 ? n : 4 * n; }

TwistCheck verify_inner_twist(const Newform& f, const InnerTwist& t, i64 B) {
    if (B > f.bound) throw Error(ErrorCode::BoundTooLarge, "bound " + std::to_string(B) + " exceeds the coefficient table");
    i64 M = twist_modulus(f.level);
    i64 cond = char_conductor(t.chi);
    if (M % cond)
        throw Error(ErrorCode::ConductorViolation, "conductor " + std::to_string(cond) + " does not divide " + std::to_string(M));
    i64 bad = f.level * t.chi.modulus();
    for (i64 l : primes_upto(B)) {
        if (bad % l == 0) continue;
        const QElem& a = f.a(l);
        RootOfUnity z = t.chi(l);
        QElem lhs = apply(f.field, t.gamma, a);
        if (!f.has_value(z)) {
            if (!f.field.is_zero(a)) return {false, l};
            continue;
        }
        if (lhs != f.field.mul(f.value(z), a)) return {false, l};
    }
    return {true, std::nullopt};
}

bool same_twist(const InnerTwist& a, const InnerTwist& b) {
    return a.gamma == b.gamma && same_character(a.chi, b.chi);
}

InnerTwist twist_product(const Newform& f, const InnerTwist& a, const InnerTwist& b) {
    i64 t = automorphism_exponent(f.field, b.gamma, f.zeta, f.zeta_order);
    DirichletCharacter chi_s = char_conjugate_by(a.chi, t);
    return {compose(f.field, a.gamma, b.gamma), char_mul(chi_s, b.chi)};
}

namespace {

bool twist_less(const InnerTwist& a, const InnerTwist& b) {
    if (a.gamma.image != b.gamma.image) {
        return std::lexicographical_compare(a.gamma.image.begin(), a.gamma.image.end(), b.gamma.image.begin(),
                                            b.gamma.image.end());
    }
    auto key = [](const DirichletCharacter& c) {
        std::vector<std::pair<i64, i64>> k;
        for (auto& z : c.images()) k.emplace_back(z.order, z.exp);
        return k;
    };
    return key(a.chi) < key(b.chi);
}

}  // namespace

InnerTwistGroup::InnerTwistGroup(const Newform& f, std::vector<InnerTwist> elems)
    : field_(&f.field), modulus_(twist_modulus(f.level)) {
    for (auto& t : elems) {
        InnerTwist e{t.gamma, t.chi.modulus() == modulus_ ? t.chi : t.chi.extend(lcm(t.chi.modulus(), modulus_))};
        if (e.chi.modulus() != modulus_) throw Error(ErrorCode::ConductorViolation, "twist character modulus");
        bool dup = false;
        for (auto& x : elems_) dup = dup || same_twist(x, e);
        if (!dup) elems_.push_back(e);
    }
    InnerTwist idt{identity_automorphism(f.field), DirichletCharacter::trivial(modulus_)};
    std::sort(elems_.begin(), elems_.end(), [&](const InnerTwist& a, const InnerTwist& b) {
        bool ia = same_twist(a, idt), ib = same_twist(b, idt);
        if (ia != ib) return ia;
        return twist_less(a, b);
    });
    if (elems_.empty() || !same_twist(elems_[0], idt)) throw Error(ErrorCode::NotClosed, "identity twist missing");
    std::size_t n = elems_.size();
    table_.assign(n, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            InnerTwist pr = twist_product(f, elems_[i], elems_[j]);
            auto k = find(pr);
            if (!k) throw Error(ErrorCode::NotClosed, "product of twists " + std::to_string(i) + " and " + std::to_string(j) + " missing");
            table_[i][j] = *k;
        }
}

std::optional<std::size_t> InnerTwistGroup::find(const InnerTwist& t) const {
    for (std::size_t i = 0; i < elems_.size(); ++i)
        if (same_twist(elems_[i], t)) return i;
    return std::nullopt;
}

bool InnerTwistGroup::in_H(i64 u) const {
    for (auto& t : elems_)
        if (!t.chi(u).is_one()) return false;
    return true;
}

std::vector<FieldAutomorphism> InnerTwistGroup::automorphisms() const {
    std::vector<FieldAutomorphism> out;
    for (auto& t : elems_)
        if (std::find(out.begin(), out.end(), t.gamma) == out.end()) out.push_back(t.gamma);
    return out;
}

void check_twist_bound(i64 level, i64 B) {
    i64 need = euler_phi(4 * level), have = 0;
    for (i64 l : primes_upto(B))
        if (l > 2 && level % l) ++have;
    if (have < need)
        throw Error(ErrorCode::BoundTooSmall, "bound " + std::to_string(B) + " gives " + std::to_string(have) +
                                                  " usable primes, need " + std::to_string(need));
}

InnerTwistGroup detect_inner_twists(const Newform& f, const std::vector<FieldAutomorphism>& candidates, i64 B) {
    check_twist_bound(f.level, B);
    if (B > f.bound) throw Error(ErrorCode::BoundTooLarge, "bound exceeds the coefficient table");
    i64 M = twist_modulus(f.level);
    std::vector<FieldAutomorphism> cands;
    for (auto& c : candidates) {
        verify_automorphism(f.field, c);
        if (std::find(cands.begin(), cands.end(), c) == cands.end()) cands.push_back(c);
    }
    std::vector<InnerTwist> found;
    for (auto& chi : all_characters(M)) {
        if (f.zeta_order % chi.order()) continue;
        if (M % char_conductor(chi)) continue;
        for (auto& g : cands) {
            InnerTwist t{g, chi};
            if (verify_inner_twist(f, t, B).ok) found.push_back(t);
        }
    }
    return InnerTwistGroup(f, found);
}

std::optional<DirichletCharacter> detect_self_twist(const Newform& f, i64 B) {
    check_twist_bound(f.level, B);
    if (B > f.bound) throw Error(ErrorCode::BoundTooLarge, "bound exceeds the coefficient table");
    i64 M = 4 * f.level;
    std::optional<DirichletCharacter> best;
    i64 best_cond = 0;
    auto primes = primes_upto(B);
    for (auto& chi : all_characters(M)) {
        if (chi.order() != 2) continue;
        bool ok = true;
        for (i64 l : primes) {
            if (M % l == 0) continue;
            if (quadratic_sign(chi(l)) == -1 && !f.field.is_zero(f.a(l))) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        i64 c = char_conductor(chi);
        if (!best || c < best_cond) best = chi, best_cond = c;
    }
    return best;
}

std::optional<FieldAutomorphism> complex_conjugation(const Newform& f) {
    auto roots = complex_roots(f.field.poly());
    const auto z = roots[0];
    for (auto& a : f.automorphisms) {
        std::complex<long double> v = 0, pw = 1;
        for (int i = 0; i < f.field.degree(); ++i) v += pw * static_cast<long double>(a.image[i].get_d()), pw *= z;
        if (std::abs(v - std::conj(z)) < 1e-6L * (1 + std::abs(z))) return a;
    }
    return std::nullopt;
}

i64 quadratic_discriminant(const DirichletCharacter& chi) {
    if (chi.order() != 2) throw Error(ErrorCode::InvalidArgument, "not a quadratic character");
    i64 c = char_conductor(chi);
    return chi.is_odd() ? -c : c;
}

QElem embed(const NumberFieldQ& from, const QElem& a, const NumberFieldQ& to, const QElem& root_image) {
    QElem r = to.zero(), pw = to.one();
    for (int i = 0; i < from.degree(); ++i) {
        if (a[i] != 0) r = to.add(r, to.scale(a[i], pw));
        if (from.degree() > 1) pw = to.mul(pw, root_image);
    }
    return r;
}

std::optional<CompositeField> default_composite(const Newform& f, const Newform& g) {
    const NumberFieldQ &Lf = f.field, &Lg = g.field;
    if (Lf == Lg) return CompositeField{Lf, Lf.gen(), Lf.gen()};
    if (Lg.degree() == 1) return CompositeField{Lf, Lf.gen(), Lf.from_rational(mpq_class(-Lg.poly()[0]))};
    if (Lf.degree() == 1) return CompositeField{Lg, Lg.from_rational(mpq_class(-Lf.poly()[0])), Lg.gen()};
    return std::nullopt;
}

CompositeField composite_from_json(const json& j, const Newform& f, const Newform& g) {
    ZPoly poly;
    for (auto& c : j.at("field_poly")) poly.push_back(mpz_class(static_cast<long>(c.get<i64>())));
    NumberFieldQ K(poly);
    CompositeField c{K, qelem_from_json(j.at("embed_f"), K.degree()), qelem_from_json(j.at("embed_g"), K.degree())};
    if (!K.is_zero(K.eval(f.field.poly(), c.embed_f)) || !K.is_zero(K.eval(g.field.poly(), c.embed_g)))
        throw Error(ErrorCode::IncompatibleFields, "composite presentation does not embed both fields");
    return c;
}

TwistEvidence twist_relation_evidence(const Newform& f, const Newform& g, const FieldAutomorphism& gamma, i64 B,
                                      const std::optional<CompositeField>& composite) {
    auto comp = composite ? composite : default_composite(f, g);
    if (!comp) throw Error(ErrorCode::IncompatibleFields, "coefficient fields differ and no composite presentation was supplied");
    const NumberFieldQ& K = comp->field;
    verify_automorphism(g.field, gamma);
    TwistEvidence ev{gamma, 0, 0, std::nullopt};
    i64 top = std::min({B, f.bound, g.bound});
    for (i64 l : primes_upto(top)) {
        if ((f.level * g.level) % l == 0) continue;
        QElem af = embed(f.field, f.a(l), K, comp->embed_f);
        QElem ag = embed(g.field, apply(g.field, gamma, g.a(l)), K, comp->embed_g);
        QElem ef = embed(f.field, f.char_value(f.character, l), K, comp->embed_f);
        QElem eg = embed(g.field, g.char_value(g.character, l), K, comp->embed_g);
        mpz_class lkg = 1, lkf = 1;
        for (int i = 1; i < g.weight; ++i) lkg *= static_cast<long>(l);
        for (int i = 1; i < f.weight; ++i) lkf *= static_cast<long>(l);
        QElem lhs = K.scale(mpq_class(lkg), K.mul(K.mul(af, af), eg));
        QElem rhs = K.scale(mpq_class(lkf), K.mul(K.mul(ag, ag), ef));
        ++ev.tested;
        if (lhs == rhs) ++ev.matched;
        else if (!ev.counterexample) ev.counterexample = l;
    }
    return ev;
}

}  // namespace adelic
