#pragma once
// Fixture loading and a recording HTTP transport shared by the tests.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "adelic/newforms.hpp"
#include "json.hpp"

namespace fixtures {

using namespace adelic;
using nlohmann::json;

inline std::filesystem::path data_dir() { return std::filesystem::path(ADELIC_SOURCE_DIR) / "tests" / "data"; }
inline std::filesystem::path path_of(const std::string& label) { return data_dir() / (label + ".json"); }
inline Newform load(const std::string& label) { return load_newform_file(path_of(label)); }
inline json raw(const std::string& label) {
    std::ifstream in(path_of(label));
    return json::parse(in);
}

inline const std::vector<std::string>& labels() {
    static const std::vector<std::string> l{"11.2.a.a", "13.2.e.a",  "15.3.d.b",  "174.2.a.e", "176.2.a.b", "23.1.b.a",
                                            "23.2.a.a", "26.2.a.b",  "32.2.a.a",  "37.2.a.a",  "7.3.b.a"};
    return l;
}

// fresh empty directory under the system temp dir
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    auto p = std::filesystem::temp_directory_path() /
             ("adelic-test-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

// answers from a fixed table; records every request
class RecordingTransport : public Transport {
public:
    std::map<std::string, HttpResponse> table;
    std::vector<std::string> calls;
    HttpResponse get(const std::string& host, const std::string& path) override {
        std::lock_guard lock(mu_);
        calls.push_back(host + path);
        auto it = table.find(path);
        if (it == table.end()) return {404, "not found"};
        return it->second;
    }

private:
    std::mutex mu_;
};

// LMFDB-shaped records for a rational trivial-character fixture
inline void add_lmfdb_records(RecordingTransport& t, const std::string& label) {
    json f = raw(label);
    json ap = json::array();
    for (auto& e : f["ap"]) ap.push_back(json::array({std::stoll(e["coords"][0].get<std::string>())}));
    json nf = {{"data",
                {{{"label", label},
                  {"level", f["level"]},
                  {"weight", f["weight"]},
                  {"field_poly", {0, 1}},
                  {"hecke_ring_power_basis", true},
                  {"cm_discs", json::array()}}}}};
    json hk = {{"data", {{{"label", label}, {"ap", ap}, {"hecke_ring_character_values", json::array()}}}}};
    t.table["/api/mf_newforms/?label=" + label + "&_format=json"] = {200, nf.dump()};
    t.table["/api/mf_hecke_nf/?label=" + label + "&_format=json"] = {200, hk.dump()};
}

// g with a_l(g) = chi_d(l) a_l(f) for a rational trivial-character f and a fundamental discriminant d
inline json quadratic_twist_json(const std::string& label, i64 d) {
    json f = raw(label);
    i64 level = f["level"].get<i64>();
    i64 M = lcm(level, std::abs(d) * std::abs(d));
    json g = f;
    g["label"] = label + ".twist" + std::to_string(d);
    g["level"] = M;
    json imgs = json::array();
    for (std::size_t i = 0; i < unit_group(M)->generators().size(); ++i) imgs.push_back({{"order", 1}, {"exp", 0}});
    g["char"] = {{"modulus", M}, {"gen_images", imgs}};
    g.erase("inner_twists");
    for (auto& e : g["ap"]) {
        i64 l = e["l"].get<i64>();
        int s = kronecker(d, l);
        mpq_class a(e["coords"][0].get<std::string>());
        e["coords"][0] = mpq_class(a * s).get_str();
    }
    return g;
}

}  // namespace fixtures
