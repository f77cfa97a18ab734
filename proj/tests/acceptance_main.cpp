// Acceptance suite: runs every criterion at its stated budget and prints one
// pass/fail line per criterion. Exit status 0 iff all pass.

#include "l2sp/validate.hpp"

#include <cstdio>
#include <set>
#include <string>
#include <thread>

int main() {
  const std::uint64_t seed = 42;
  const int threads = static_cast<int>(std::thread::hardware_concurrency());
  const auto results = l2sp::run_validation(l2sp::Preset::Full, seed, threads);
  std::set<std::string> ids;
  for (const auto& r : results) {
    std::printf("[%s] %-26s measured=%-12.6g tol=%-8g %s (%.2fs)\n",
                r.pass ? "PASS" : "FAIL", r.id.c_str(), r.measured,
                r.tolerance, r.cmp.c_str(), r.seconds);
    if (!r.detail.empty()) std::printf("       %s\n", r.detail.c_str());
    ids.insert(r.id);
  }
  bool ok = l2sp::all_pass(results);
  if (ids.size() != results.size()) {
    std::printf("[FAIL] duplicate criterion ids in the report\n");
    ok = false;
  }
  std::printf("acceptance: %zu criteria, %s\n", results.size(),
              ok ? "all passed" : "FAILURES present");
  return ok ? 0 : 1;
}
