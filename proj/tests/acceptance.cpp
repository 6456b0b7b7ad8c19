// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <filesystem>
#include <iostream>

#include "cfseir/verification.hpp"

int main() {
  const std::filesystem::path scratch = std::filesystem::temp_directory_path() / "cfseir_acceptance";
  std::filesystem::create_directories(scratch);
  bool all = true;
  cfseir::run_acceptance(scratch, [&](const cfseir::CheckResult& r) {
    std::cout << cfseir::format_check(r) << std::endl;
    all = all && r.pass;
  });
  std::filesystem::remove_all(scratch);
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
  return all ? 0 : 1;
}
