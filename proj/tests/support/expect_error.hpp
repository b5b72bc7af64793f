#pragma once

#include <gtest/gtest.h>

#include "multishape/error.hpp"

#define EXPECT_ERROR_CODE(statement, expected)                                   \
  do {                                                                           \
    try {                                                                        \
      statement;                                                                 \
      ADD_FAILURE() << "expected " << ::multishape::to_string(expected);         \
    } catch (const ::multishape::Error& e_) {                                    \
      EXPECT_EQ(e_.code(), expected) << e_.what();                               \
    }                                                                            \
  } while (false)
