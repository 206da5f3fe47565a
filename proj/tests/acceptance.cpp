#include <cstdio>
#include <cstring>
#include <string>

#include "forcelab/suites.hpp"

int main(int argc, char** argv) {
  forcelab::SuiteOptions opt;
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::stoi(argv[++i]);
  int failures = 0;
  for (const auto& c : forcelab::acceptance_criteria()) {
    if (only && c.number != only) continue;
    forcelab::ReportRow r = c.run(opt);
    bool pass = r.status == forcelab::Status::Pass;
    if (!pass) ++failures;
    std::printf("criterion %d [%s] %s: %s (%zu checks, %.0f ms)", c.number, r.anchor.c_str(), c.title.c_str(),
                pass ? "PASS" : "FAIL", r.checks, r.runtime_ms);
    if (r.counterexample) std::printf(" -- %s", r.counterexample->c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
