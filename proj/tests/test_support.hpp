#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "pool.hpp"

#define CHECK_CODE(expr, ecode)                         \
  do {                                                  \
    bool thrown_ = false;                               \
    try {                                               \
      (void)(expr);                                     \
    } catch (const am::Error& e_) {                     \
      thrown_ = true;                                   \
      CHECK_MESSAGE(e_.code() == (ecode), e_.what());   \
    }                                                   \
    CHECK_MESSAGE(thrown_, "expected an am::Error");    \
  } while (0)

namespace testing {

inline std::shared_ptr<const am::UnitPool> sim_pool(const std::vector<double>& values) {
  std::vector<am::Unit> units;
  for (std::size_t i = 0; i < values.size(); ++i)
    units.push_back({"u" + std::to_string(i), "ref" + std::to_string(i), values[i]});
  return std::make_shared<const am::UnitPool>(std::move(units));
}

inline std::shared_ptr<const am::UnitPool> live_pool(std::size_t n) {
  std::vector<am::Unit> units;
  for (std::size_t i = 0; i < n; ++i) units.push_back({"u" + std::to_string(i), "ref" + std::to_string(i), {}});
  return std::make_shared<const am::UnitPool>(std::move(units));
}

inline am::UnitPool parse(const std::string& text) {
  std::istringstream in(text);
  return am::parse_pool(in);
}

}  // namespace testing
