#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <vector>

#include "expect_error.hpp"
#include "multishape/mask.hpp"
#include "multishape/netpbm.hpp"
#include "oracles.hpp"

namespace ms = multishape;
namespace mt = multishape::testing;

TEST(Mask, UnionWithItselfIsIdempotent) {
  const auto a = mt::disk_mask({20, 20}, {10, 10}, 6);
  const std::vector<ms::BinaryMask> list{a, a};
  EXPECT_EQ(ms::union_masks(list), a);
}

TEST(Mask, UnionOfDisjointMasksAddsAreas) {
  const auto a = mt::rect_mask({20, 20}, 0, 0, 4, 4);
  const auto b = mt::rect_mask({20, 20}, 10, 10, 14, 16);
  const std::vector<ms::BinaryMask> list{a, b};
  EXPECT_EQ(ms::union_masks(list).count(), a.count() + b.count());
}

TEST(Mask, UnionOfEmptyListIsAnError) {
  EXPECT_ERROR_CODE(ms::union_masks({}), ms::ErrorCode::kEmptyInput);
}

TEST(Mask, UnionRejectsMixedDimensions) {
  const std::vector<ms::BinaryMask> list{ms::BinaryMask(4, 4), ms::BinaryMask(5, 4)};
  EXPECT_ERROR_CODE(ms::union_masks(list), ms::ErrorCode::kDimensionMismatch);
}

TEST(Mask, UnionContainsEveryOperand) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<ms::BinaryMask> list{mt::random_mask({9, 7}, rng, 0.3),
                                           mt::random_mask({9, 7}, rng, 0.5)};
    const auto u = ms::union_masks(list);
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 9; ++x) {
        if (list[0].at(x, y) || list[1].at(x, y)) {
          EXPECT_TRUE(u.at(x, y));
        } else {
          EXPECT_FALSE(u.at(x, y));
        }
      }
    }
  }
}

TEST(Mask, CountsAgreeWithPixelLoops) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = mt::random_mask({13, 6}, rng, 0.4);
    const auto b = mt::random_mask({13, 6}, rng, 0.6);
    long both = 0, diff = 0;
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 13; ++x) {
        both += a.at(x, y) && b.at(x, y);
        diff += a.at(x, y) != b.at(x, y);
      }
    }
    EXPECT_EQ(static_cast<long>(a.count()), mt::naive_count(a));
    EXPECT_EQ(static_cast<long>(ms::intersection_count(a, b)), both);
    EXPECT_EQ(static_cast<long>(ms::symmetric_difference_count(a, b)), diff);
  }
}

TEST(Mask, OutOfRangeTestReadsBackground) {
  const auto m = mt::rect_mask({3, 3}, 0, 0, 2, 2);
  EXPECT_TRUE(m.test(0, 0));
  EXPECT_FALSE(m.test(-1, 0));
  EXPECT_FALSE(m.test(0, 3));
}

TEST(Netpbm, P5RoundTripIsExact) {
  std::mt19937 rng(3);
  const auto m = mt::random_mask({17, 9}, rng, 0.5);
  const std::string bytes = ms::encode_pgm(m);
  EXPECT_EQ(bytes.rfind("P5\n17 9\n255\n", 0), 0u);
  EXPECT_EQ(bytes.size(), std::string("P5\n17 9\n255\n").size() + 17 * 9);
  EXPECT_EQ(ms::decode_pgm(bytes), m);
}

TEST(Netpbm, ReadsAsciiP2WithCommentsAndAnyNonzeroAsForeground) {
  const std::string text = "P2\n# a comment\n3 2\n# another\n9\n0 1 9\n 0 0 4\n";
  const auto m = ms::decode_pgm(text);
  ASSERT_EQ(m.dims(), (ms::Dims{3, 2}));
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_TRUE(m.at(1, 0));
  EXPECT_TRUE(m.at(2, 0));
  EXPECT_FALSE(m.at(1, 1));
  EXPECT_TRUE(m.at(2, 1));
}

TEST(Netpbm, ReadsSixteenBitP5) {
  std::string bytes = "P5\n2 1\n65535\n";
  bytes += std::string("\x00\x00\x01\x00", 4);
  const auto m = ms::decode_pgm(bytes);
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_TRUE(m.at(1, 0));
}

TEST(Netpbm, RejectsMalformedInput) {
  EXPECT_ERROR_CODE(ms::decode_pgm("P6\n1 1\n255\n\x01"), ms::ErrorCode::kIoError);
  EXPECT_ERROR_CODE(ms::decode_pgm("P5\n4 4\n255\nab"), ms::ErrorCode::kIoError);
  EXPECT_ERROR_CODE(ms::decode_pgm("P2\n2 1\n255\n1 x"), ms::ErrorCode::kIoError);
}

TEST(Netpbm, MissingFileNamesThePath) {
  try {
    ms::read_pgm("/nonexistent/dir/mask.pgm");
    FAIL();
  } catch (const ms::Error& e) {
    EXPECT_EQ(e.code(), ms::ErrorCode::kIoError);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/mask.pgm"), std::string::npos);
  }
}

TEST(Netpbm, FileRoundTripLeavesNoTemporary) {
  const auto dir = std::filesystem::temp_directory_path() / "multishape_netpbm_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto m = mt::disk_mask({30, 20}, {15, 10}, 7);
  ms::write_pgm(dir / "m.pgm", m);
  EXPECT_EQ(ms::read_pgm(dir / "m.pgm"), m);
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
  std::filesystem::remove_all(dir);
}

TEST(Netpbm, PpmHeaderAndPayload) {
  ms::RgbImage img({2, 1});
  img.at(1, 0) = {1, 2, 3};
  const std::string bytes = ms::encode_ppm(img);
  EXPECT_EQ(bytes, std::string("P6\n2 1\n255\n") + std::string("\x00\x00\x00\x01\x02\x03", 6));
}
