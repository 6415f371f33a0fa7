// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status 0 only when all of them pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "tipo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tipo;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::map<int, std::string> kTitles{
    {1, "gradient fidelity"},     {2, "initialization identity"}, {3, "gate nullification"},
    {4, "reduction identity"},    {5, "alignment oracle"},        {6, "weight function"},
    {7, "metric maxima"},         {8, "end-to-end trend"},        {9, "determinism"},
    {10, "split hygiene"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string out = (fs::temp_directory_path() / "tipo_acceptance").string();
  bool verbose = false;
  app.add_option("--out", out, "scratch directory for reproduce outputs");
  app.add_flag("-v,--verbose", verbose, "print every sub-check");
  CLI11_PARSE(app, argc, argv);

  const RunConfig cfg;
  const std::vector<std::uint64_t> seeds{7, 13, 42};
  std::vector<AcceptanceCheck> checks;

  const auto t0 = std::chrono::steady_clock::now();
  const auto r = reproduce(cfg, seeds, fs::path(out) / "reproduce");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  checks = r.all_checks();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f s", secs);
  checks.push_back({"reproduce runtime < 120 s", secs < 120.0, buf, 8});

  const auto a = fs::path(out) / "determinism_a", b = fs::path(out) / "determinism_b";
  reproduce(cfg, {7}, a, false);
  reproduce(cfg, {7}, b, false);
  const bool same = slurp(a / "summary.csv") == slurp(b / "summary.csv") && !slurp(a / "summary.csv").empty();
  checks.push_back({"reproduce --seed 7 twice", same,
                    same ? "summary.csv byte-identical" : "summary.csv differs", 9});

  bool all = true;
  for (const auto& [id, title] : kTitles) {
    bool ok = true;
    int n = 0;
    std::string first_fail, detail;
    for (const auto& c : checks) {
      if (c.criterion != id) continue;
      ++n;
      if (!c.passed && first_fail.empty()) first_fail = c.name + ": " + c.detail;
      ok = ok && c.passed;
      detail += (detail.empty() ? "" : "; ") + c.name + ": " + c.detail;
    }
    ok = ok && n > 0;
    all = all && ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << title << " ("
              << (n == 0 ? "not run" : ok ? (n > 1 ? detail : detail.substr(detail.find(": ") + 2)) : first_fail)
              << ")\n";
    if (verbose)
      for (const auto& c : checks)
        if (c.criterion == id)
          std::cout << "    " << (c.passed ? "ok   " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  }
  return all ? 0 : 1;
}
