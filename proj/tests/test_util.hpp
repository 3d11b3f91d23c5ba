#ifndef QOESEQ_TESTS_TEST_UTIL_HPP_
#define QOESEQ_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "qoeseq/error.hpp"

// Checks that `expr` throws qoeseq::Error carrying `expected_code`.
#define CHECK_ERROR_CODE(expr, expected_code)                                  \
  do {                                                                         \
    bool thrown_ = false;                                                      \
    try {                                                                      \
      (void)(expr);                                                            \
    } catch (const qoeseq::Error& e_) {                                        \
      thrown_ = true;                                                          \
      CHECK_MESSAGE(e_.code() == (expected_code),                              \
                    "got " << qoeseq::error_code_name(e_.code()) << ": "       \
                           << e_.what());                                      \
    }                                                                          \
    CHECK_MESSAGE(thrown_, "expected " #expected_code " from " #expr);         \
  } while (0)

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qoeseq_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

#endif  // QOESEQ_TESTS_TEST_UTIL_HPP_
