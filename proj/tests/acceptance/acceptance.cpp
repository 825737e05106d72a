// Runs the full validation suite at the default configuration and prints one
// line per acceptance criterion. Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "conslaw/experiments.hpp"

using namespace conslaw;

int main(int argc, char** argv) {
    const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_out";
    const std::vector<std::string> criteria{"chernoff_quadratic",     "chernoff_quartic",     "airy_identity",
                                            "cross_method_density",   "j_consistency",        "generator_end_to_end",
                                            "psi_monotone_stationary", "shock_discreteness",  "determinism"};
    ExperimentResult res;
    try {
        std::filesystem::create_directories(out);
        res = run_validate(Config(default_config()), out);
    } catch (const std::exception& e) {
        std::printf("ERROR validation suite aborted: %s\n", e.what());
        for (const auto& c : criteria) std::printf("FAIL %s (not run)\n", c.c_str());
        return 1;
    }

    std::map<std::string, std::vector<const Check*>> by_criterion;
    for (const Check& c : res.checks) by_criterion[c.name.substr(0, c.name.find('.'))].push_back(&c);

    int failed = 0;
    for (const auto& name : criteria) {
        const auto it = by_criterion.find(name);
        bool pass = it != by_criterion.end() && !it->second.empty();
        std::string detail;
        if (it != by_criterion.end()) {
            for (const Check* c : it->second) {
                pass = pass && c->pass;
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s%s=%.4g%s", detail.empty() ? "" : ", ",
                              c->name.substr(c->name.find('.') + 1).c_str(), c->value, c->pass ? "" : "(fail)");
                detail += buf;
            }
        } else {
            detail = "no checks reported";
        }
        failed += !pass;
        std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
