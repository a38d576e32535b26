// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 on any failure.
// Optional arguments select criteria by id; --json FILE writes the full results.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "ssde/harness/acceptance.hpp"

int main(int argc, char** argv) {
  std::set<int> only;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--json" && i + 1 < argc) {
      json_path = argv[++i];
    } else {
      only.insert(std::atoi(a.c_str()));
    }
  }
  const auto results = ssde::harness::run_acceptance(only, [](const ssde::harness::CriterionResult& r) {
    std::cout << ssde::harness::format_result(r) << "  (" << static_cast<int>(r.seconds + 0.5) << " s)" << std::endl;
  });
  int failed = 0;
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : results) {
    failed += r.pass ? 0 : 1;
    all.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"seconds", r.seconds},
                   {"data", r.data}});
  }
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  if (!json_path.empty()) std::ofstream(json_path) << all.dump(2) << "\n";
  return failed ? 1 : 0;
}
