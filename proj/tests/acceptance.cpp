#include <cstdio>
#include <limitshape/verify.hpp>
#include <map>

using namespace limitshape::verify;

int main() {
    const Options opt;
    std::map<int, std::vector<const SuiteResult*>> by_criterion;
    std::vector<SuiteResult> results;
    results.reserve(suites().size());
    for (const auto& s : suites()) {
        results.push_back(run_suite(s, opt));
        std::fflush(stdout);
    }
    for (const auto& r : results)
        for (int c : r.criteria) by_criterion[c].push_back(&r);

    int failed = 0;
    for (const auto& [c, rs] : by_criterion) {
        for (const auto* r : rs) {
            // a suite covering two criteria reports its checks under both
            bool pass = r->pass();
            std::string detail;
            if (!r->error.empty()) detail = " error: " + r->error;
            for (const auto& k : r->checks) {
                char buf[256];
                std::snprintf(buf, sizeof buf, " %s=%.3g%s%.3g%s", k.name.c_str(), k.value, k.upper ? "<=" : ">=", k.tol,
                              k.pass() ? "" : "(!)");
                detail += buf;
            }
            std::printf("criterion %2d [%s] %s (%.2fs)%s\n", c, r->suite.c_str(), pass ? "PASS" : "FAIL", r->seconds,
                        detail.c_str());
            if (!pass) ++failed;
        }
    }
    std::printf("%s: %d of %zu criteria failed\n", failed ? "FAIL" : "PASS", failed, by_criterion.size());
    return failed ? 1 : 0;
}
