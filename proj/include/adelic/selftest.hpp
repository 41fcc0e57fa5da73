#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace adelic {

struct SuiteResult {
    std::string suite;
    std::int64_t cases = 0;
    std::int64_t failures = 0;
    nlohmann::json details = nlohmann::json::object();
    nlohmann::json to_json() const;
};

const std::vector<std::string>& selftest_suites();
SuiteResult run_selftest(const std::string& suite, std::uint64_t seed);

// individual suites
SuiteResult selftest_lifting(std::uint64_t seed, int samples = 200);
SuiteResult selftest_lifting_product(std::uint64_t seed, int samples = 50);
SuiteResult selftest_goursat();
SuiteResult selftest_negative_hyp();
SuiteResult selftest_counterexample();
SuiteResult selftest_dagger_orders();
SuiteResult selftest_papier();

}  // namespace adelic
