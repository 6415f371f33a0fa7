#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "tipo/core.hpp"

namespace testing {

// Fresh scratch directory under TIPO_TEST_TMP (or the system temp dir).
inline std::filesystem::path scratch(const std::string& name) {
  const char* base = std::getenv("TIPO_TEST_TMP");
  auto dir = (base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "tipo_tests") / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline tipo::Step step(int index, tipo::ActionType a, tipo::Args args = {}) {
  return tipo::Step{index, a, args, tipo::describe(a, args)};
}

inline tipo::Trajectory traj(std::initializer_list<tipo::ActionType> actions,
                             tipo::Persona p = tipo::Persona::PrivacyFirst,
                             const std::string& id = "task_0000") {
  tipo::Trajectory t{id, p, {}};
  int i = 0;
  for (auto a : actions) t.steps.push_back(step(i++, a));
  return t;
}

}  // namespace testing
