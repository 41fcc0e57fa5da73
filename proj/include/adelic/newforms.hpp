#pragma once
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "adelic/characters.hpp"
#include "adelic/numberfields.hpp"
#include "json.hpp"

namespace adelic {

struct InnerTwist {
    FieldAutomorphism gamma;
    DirichletCharacter chi;
};

struct Newform {
    std::string label;
    i64 level = 0;
    int weight = 0;
    DirichletCharacter character = DirichletCharacter::trivial(1);
    NumberFieldQ field = NumberFieldQ::rationals();
    std::map<i64, QElem> ap;  // primes up to `bound`
    i64 bound = 0;
    i64 zeta_order = 2;
    QElem zeta;  // generator of mu(L), exp(2 pi i / w) under the value embedding
    std::vector<FieldAutomorphism> automorphisms;
    std::vector<InnerTwist> listed_twists;
    std::optional<i64> cm_disc;
    std::vector<std::string> warnings;

    const QElem& a(i64 l) const;
    // a_n from the prime table via the Hecke recursion
    QElem an(i64 n) const;
    // value of a root of unity as an element of L
    QElem value(const RootOfUnity& z) const;
    QElem char_value(const DirichletCharacter& chi, i64 u) const { return value(chi(u)); }
    // does mu(L) contain the root of unity
    bool has_value(const RootOfUnity& z) const { return zeta_order % z.order == 0; }
};

DirichletCharacter character_from_json(const nlohmann::json& j);
nlohmann::json character_to_json(const DirichletCharacter& chi);
QElem qelem_from_json(const nlohmann::json& j, int degree);
nlohmann::json qelem_to_json(const QElem& a);

Newform newform_from_json(const nlohmann::json& j);
nlohmann::json newform_to_json(const Newform& f);
Newform load_newform_file(const std::filesystem::path& path);

// HTTP transport; swapped for a recording stub in tests
struct HttpResponse {
    int status = 0;
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& host, const std::string& path) = 0;
};

std::unique_ptr<Transport> make_https_transport();

std::filesystem::path default_cache_dir();

class LmfdbClient {
public:
    LmfdbClient(std::filesystem::path cache_dir, bool offline, std::shared_ptr<Transport> transport,
                std::chrono::milliseconds delay = std::chrono::milliseconds(500));

    // cached newform JSON in the repository schema; fetches on a cold cache
    std::filesystem::path fetch(const std::string& label);
    Newform load(const std::string& label) { return load_newform_file(fetch(label)); }
    const std::filesystem::path& cache_dir() const { return cache_dir_; }

private:
    std::filesystem::path cache_dir_;
    bool offline_;
    std::shared_ptr<Transport> transport_;
    std::chrono::milliseconds delay_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point last_{};
    std::string request(const std::string& path);
};

// LMFDB API records (mf_newforms and mf_hecke_nf rows) to the repository schema
nlohmann::json convert_lmfdb_records(const nlohmann::json& newform, const nlohmann::json& hecke);

void atomic_write(const std::filesystem::path& path, const std::string& data);

// the twist modulus: N if odd, 4N otherwise
i64 twist_modulus(i64 n);

struct TwistCheck {
    bool ok;
    std::optional<i64> first_failure;
};

TwistCheck verify_inner_twist(const Newform& f, const InnerTwist& t, i64 B);

class InnerTwistGroup {
public:
    InnerTwistGroup(const Newform& f, std::vector<InnerTwist> elems);

    const std::vector<InnerTwist>& elements() const { return elems_; }
    std::size_t order() const { return elems_.size(); }
    // index of the product (i)(j) under (g, chi)(s, mu) = (g s, chi^s mu)
    std::size_t product(std::size_t i, std::size_t j) const { return table_[i][j]; }
    const std::vector<std::vector<std::size_t>>& table() const { return table_; }
    std::optional<std::size_t> find(const InnerTwist& t) const;
    i64 modulus() const { return modulus_; }
    // u in the kernel of every chi_gamma
    bool in_H(i64 u) const;
    std::vector<FieldAutomorphism> automorphisms() const;

private:
    const NumberFieldQ* field_;
    std::vector<InnerTwist> elems_;
    std::vector<std::vector<std::size_t>> table_;
    i64 modulus_;
};

InnerTwist twist_product(const Newform& f, const InnerTwist& a, const InnerTwist& b);
bool same_twist(const InnerTwist& a, const InnerTwist& b);

InnerTwistGroup detect_inner_twists(const Newform& f, const std::vector<FieldAutomorphism>& candidates, i64 B);
// throws BoundTooSmall unless enough odd primes below B are coprime to N
void check_twist_bound(i64 level, i64 B);

// the listed automorphism acting as complex conjugation (L is totally real or CM)
std::optional<FieldAutomorphism> complex_conjugation(const Newform& f);

std::optional<DirichletCharacter> detect_self_twist(const Newform& f, i64 B);
// discriminant of the quadratic field cut out by a quadratic character
i64 quadratic_discriminant(const DirichletCharacter& chi);

// explicit common field for the coefficients of two forms
struct CompositeField {
    NumberFieldQ field;
    QElem embed_f;  // image of the power-basis root of L_f
    QElem embed_g;
};

std::optional<CompositeField> default_composite(const Newform& f, const Newform& g);
CompositeField composite_from_json(const nlohmann::json& j, const Newform& f, const Newform& g);
QElem embed(const NumberFieldQ& from, const QElem& a, const NumberFieldQ& to, const QElem& root_image);

struct TwistEvidence {
    FieldAutomorphism gamma;
    i64 matched = 0;
    i64 tested = 0;
    std::optional<i64> counterexample;
};

TwistEvidence twist_relation_evidence(const Newform& f, const Newform& g, const FieldAutomorphism& gamma, i64 B,
                                      const std::optional<CompositeField>& composite = std::nullopt);

}  // namespace adelic
