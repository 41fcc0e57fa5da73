#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "adelic/cli.hpp"
#include "adelic/error.hpp"
#include "fixtures.hpp"

using namespace adelic;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args, std::shared_ptr<Transport> t = nullptr) {
    if (!t) t = std::make_shared<fixtures::RecordingTransport>();
    args.insert(args.begin(), "adelic-image");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, t);
    return {code, out.str(), err.str()};
}

std::string fx(const std::string& label) { return fixtures::path_of(label).string(); }

}  // namespace

TEST_CASE("offline cold cache: no network calls and the OfflineMiss exit code") {
    auto t = std::make_shared<fixtures::RecordingTransport>();
    auto dir = fixtures::temp_dir("cli-offline");
    auto r = run({"--offline", "--cache-dir", dir.string(), "fetch", "11.2.a.a"}, t);
    CHECK(r.code == exit_code(ErrorCode::OfflineMiss));
    CHECK(r.code == 22);
    CHECK(t->calls.empty());
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("fetch through the recording transport, then served from cache") {
    auto t = std::make_shared<fixtures::RecordingTransport>();
    fixtures::add_lmfdb_records(*t, "37.2.a.a");
    auto dir = fixtures::temp_dir("cli-fetch");
    auto r = run({"--cache-dir", dir.string(), "fetch", "37.2.a.a"}, t);
    REQUIRE(r.code == 0);
    CHECK(t->calls.size() == 2);
    CHECK(t->calls[0].rfind("www.lmfdb.org/api/mf_newforms/", 0) == 0);
    auto j = json::parse(r.out);
    CHECK(j["label"] == "37.2.a.a");
    Newform g = load_newform_file(j["path"].get<std::string>());
    Newform want = fixtures::load("37.2.a.a");
    CHECK(g.ap == want.ap);
    auto again = run({"--offline", "--cache-dir", dir.string(), "fetch", "37.2.a.a"}, t);
    CHECK(again.code == 0);
    CHECK(t->calls.size() == 2);

    auto missing = run({"--cache-dir", dir.string(), "fetch", "999.2.a.z"}, t);
    CHECK(missing.code == exit_code(ErrorCode::FetchError));
    auto bad = run({"--cache-dir", dir.string(), "fetch", "../etc"}, t);
    CHECK(bad.code == exit_code(ErrorCode::FetchError));
}

TEST_CASE("corrupted form file gives the SchemaError exit code") {
    auto dir = fixtures::temp_dir("cli-corrupt");
    json j = fixtures::raw("11.2.a.a");
    j.erase("ap");
    fixtures::write_file(dir / "broken.json", j.dump());
    auto r = run({"--offline", "--cache-dir", dir.string(), "analyze", (dir / "broken.json").string()});
    CHECK(r.code == exit_code(ErrorCode::SchemaError));
    CHECK(r.code == 19);
    fixtures::write_file(dir / "garbage.json", "{not json");
    CHECK(run({"--offline", "analyze", (dir / "garbage.json").string()}).code == exit_code(ErrorCode::SchemaError));
}

TEST_CASE("argument errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"pair", "11.2.a.a"}).code == 2);
    CHECK(run({"analyze", fx("11.2.a.a"), "--primes", "9..3"}).code == 2);
    CHECK(run({"selftest", "nope"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    auto low = run({"--offline", "analyze", fx("11.2.a.a"), "--bound", "30"});
    CHECK(low.code == exit_code(ErrorCode::InvalidArgument));
}

TEST_CASE("selftest exit status") {
    auto r = run({"selftest", "papier"});
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["failures"] == 0);
    CHECK(run({"selftest", "counterexample"}).code == 0);
}

TEST_CASE("analyze report") {
    auto r = run({"--offline", "analyze", fx("13.2.e.a"), "--primes", "5..20"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["command"] == "analyze");
    CHECK(j["tool"]["name"] == "adelic-image");
    CHECK(j["inner_twists"]["order"] == 2);
    CHECK(j["conjugate_twist"]["verified"] == true);
    int compared = 0;
    for (auto& e : j["primes"]) {
        if (!e.contains("dagger") || !e["dagger"].contains("bruteforce_order")) continue;
        CHECK(e["dagger"]["bruteforce_order"] == e["dagger"]["order"]);
        ++compared;
    }
    CHECK(compared >= 3);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
    auto dir = fixtures::temp_dir("cli-det");
    std::vector<std::string> base{"--offline", "--cache-dir", dir.string()};
    auto go = [&](const std::string& w, std::vector<std::string> rest) {
        auto a = base;
        a.push_back("--workers");
        a.push_back(w);
        a.insert(a.end(), rest.begin(), rest.end());
        return run(a);
    };
    std::vector<std::string> an{"analyze", fx("13.2.e.a"), "--primes", "5..40"};
    auto a1 = go("1", an), a2 = go("3", an), a3 = go("1", an);
    REQUIRE(a1.code == 0);
    CHECK(a1.out == a2.out);
    CHECK(a1.out == a3.out);
    std::vector<std::string> pr{"pair", fx("11.2.a.a"), fx("37.2.a.a"), "--primes", "5..13", "--hyp"};
    auto p1 = go("1", pr), p2 = go("2", pr);
    REQUIRE(p1.code == 0);
    CHECK(p1.out == p2.out);
    // --json writes the same document
    auto file = dir / "out.json";
    auto withfile = pr;
    withfile.push_back("--json");
    withfile.push_back(file.string());
    auto p3 = go("1", withfile);
    CHECK(json::parse(fixtures::read_file(file)) == json::parse(p1.out));
    CHECK(p3.code == 0);
}

TEST_CASE("a form against its own quadratic twist is twist-degenerate") {
    auto dir = fixtures::temp_dir("cli-twist");
    auto path = dir / "twist.json";
    fixtures::write_file(path, fixtures::quadratic_twist_json("11.2.a.a", -3).dump());
    auto r = run({"--offline", "--cache-dir", dir.string(), "pair", fx("11.2.a.a"), path.string(), "--primes", "5..7"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["headline"].get<std::string>().rfind("twist-degenerate", 0) == 0);

    auto gen = run({"--offline", "pair", fx("11.2.a.a"), fx("37.2.a.a"), "--primes", "5..7"});
    REQUIRE(gen.code == 0);
    CHECK(json::parse(gen.out)["headline"].get<std::string>().rfind("open", 0) == 0);
}

TEST_CASE("weight one g fills the weight-one criterion") {
    auto r = run({"--offline", "pair", fx("11.2.a.a"), fx("23.1.b.a"), "--primes", "5..7", "--hyp"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    REQUIRE(!j["primes"].empty());
    for (auto& e : j["primes"]) {
        REQUIRE(e.contains("hyp"));
        CHECK(e["hyp"].contains("weight_one"));
        CHECK(e["hyp"].contains("cm"));
        CHECK(e["hyp"]["weight_one"]["holds_V"] == "Yes");
    }
    CHECK(j["negative_check"]["violations"] == 0);
}
