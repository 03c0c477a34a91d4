// Copyright 2026 The freqdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <gtest/gtest.h>

#include "freqdiff/signalio.hpp"
#include "freqdiff/transform.hpp"
#include "test_util.hpp"

namespace freqdiff {
namespace {

using testing::TempDir;
using testing::read_file;
using testing::write_file;

TEST(LoadMotionCsv, ParsesRowsAsFrames) {
  TempDir dir;
  write_file(dir / "m.csv", "0,0\n1,1\n2,2");
  const auto m = load_motion_csv(dir / "m.csv", false);
  ASSERT_EQ(m.frames(), 3);
  ASSERT_EQ(m.dims(), 2);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(m(i, 0), i);
    EXPECT_EQ(m(i, 1), i);
  }
}

TEST(LoadMotionCsv, SkipsHeaderRow) {
  TempDir dir;
  write_file(dir / "m.csv", "x,y\n1.5,-2e3\n");
  const auto m = load_motion_csv(dir / "m.csv", true);
  ASSERT_EQ(m.frames(), 1);
  EXPECT_DOUBLE_EQ(m(0, 1), -2000.0);
}

TEST(LoadMotionCsv, EmptyFileHasNoRows) {
  TempDir dir;
  write_file(dir / "m.csv", "");
  try {
    load_motion_csv(dir / "m.csv", false);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("no rows"), std::string::npos);
  }
  write_file(dir / "h.csv", "a,b\n");
  EXPECT_THROW(load_motion_csv(dir / "h.csv", true), ParseError);
}

TEST(LoadMotionCsv, RaggedRowReportsLine) {
  TempDir dir;
  write_file(dir / "m.csv", "1,2\n3,4,5\n");
  try {
    load_motion_csv(dir / "m.csv", false);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("ragged row at line 2"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadMotionCsv, NonNumericCellReportsRowAndColumn) {
  TempDir dir;
  write_file(dir / "m.csv", "1,2\n3,abc\n");
  try {
    load_motion_csv(dir / "m.csv", false);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 2u);
  }
  write_file(dir / "inf.csv", "1,inf\n");
  EXPECT_THROW(load_motion_csv(dir / "inf.csv", false), ParseError);
}

TEST(LoadMotionCsv, MissingFileIsIoError) {
  EXPECT_THROW(load_motion_csv("/nonexistent/freqdiff/m.csv", false), IoError);
}

TEST(GenPowerlawMotion, CoefficientPowerIsExact) {
  const auto m = gen_powerlaw_motion(64, 3, 2.0, RngSeed(7));
  const SpectrumBatch coeffs = dct_batch(m);
  for (Eigen::Index d = 0; d < 3; ++d)
    for (Eigen::Index k = 0; k < 64; ++k)
      EXPECT_NEAR(coeffs(k, d) * coeffs(k, d), std::pow(k + 1.0, -2.0), 1e-12) << "k=" << k << " d=" << d;
}

TEST(GenPowerlawMotion, DeterministicPerSeed) {
  const auto a = gen_powerlaw_motion(64, 2, 2.0, RngSeed(7));
  const auto b = gen_powerlaw_motion(64, 2, 2.0, RngSeed(7));
  const auto c = gen_powerlaw_motion(64, 2, 2.0, RngSeed(8));
  EXPECT_EQ(a.data(), b.data());
  EXPECT_NE(a.data(), c.data());
}

TEST(GenPowerlawMotion, LowFrequencyEnergyFraction) {
  // sum_{k<16} (k+1)^-2 / sum_{k<64} (k+1)^-2, evaluated in exact rationals.
  constexpr double kExpected = 0.9723314569569438;
  const auto m = gen_powerlaw_motion(64, 1, 2.0, RngSeed(7));
  const Vector energy = spectral_energy(dct_batch(m));
  const double fraction = energy.head(16).sum() / energy.sum();
  EXPECT_NEAR(fraction, kExpected, 1e-12);
  EXPECT_GT(fraction, 0.90);
}

TEST(GenPowerlawMotion, RejectsBadArguments) {
  EXPECT_THROW(gen_powerlaw_motion(64, 1, 0.0, RngSeed(1)), InvalidArgument);
  EXPECT_THROW(gen_powerlaw_motion(64, 1, -1.0, RngSeed(1)), InvalidArgument);
  EXPECT_THROW(gen_powerlaw_motion(1, 1, 2.0, RngSeed(1)), InvalidArgument);
}

TEST(SaveTable, SingleColumnFormat) {
  TempDir dir;
  save_table(dir / "t.csv", Table{{"x", {1.5}}});
  EXPECT_EQ(read_file(dir / "t.csv"), "x\n1.5\n");
}

TEST(SaveTable, RejectsUnequalColumnsAndNoColumns) {
  TempDir dir;
  EXPECT_THROW(save_table(dir / "t.csv", Table{{"a", {1, 2}}, {"b", {1, 2, 3}}}), InvalidArgument);
  try {
    save_table(dir / "t.csv", Table{});
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("no columns"), std::string::npos);
  }
  EXPECT_THROW(save_table("/nonexistent/freqdiff/t.csv", Table{{"a", {1}}}), IoError);
}

TEST(SaveTable, RoundTripsValues) {
  TempDir dir;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> exponent(-300.0, 300.0);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  Table table{{"a", {}}, {"b", {}}};
  for (int i = 0; i < 500; ++i) {
    table[0].values.push_back(mantissa(gen) * std::pow(10.0, exponent(gen)));
    table[1].values.push_back(1.0 / (i + 3.0));
  }
  save_table(dir / "t.csv", table);
  const Table back = load_table(dir / "t.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "a");
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 500; ++i) {
      const double want = table[c].values[i];
      EXPECT_LE(std::abs(back[c].values[i] - want), 1e-12 * std::abs(want));
    }
}

TEST(MotionCsv, SaveLoadRoundTrip) {
  TempDir dir;
  const auto m = gen_powerlaw_motion(32, 4, 1.5, RngSeed(11));
  save_motion_csv(dir / "m.csv", m);
  EXPECT_EQ(load_motion_csv(dir / "m.csv", false).data(), m.data());
}

TEST(RngSeed, StreamsAreDistinctAndStable) {
  const RngSeed s(42);
  EXPECT_EQ(s.stream(3), RngSeed(42).stream(3));
  EXPECT_NE(s.stream(0), s.stream(1));
  EXPECT_NE(s.stream(0), RngSeed(43).stream(0));
  auto a = s.stream(5).engine();
  auto b = s.stream(5).engine();
  EXPECT_EQ(a(), b());
}

TEST(MotionSequence, RejectsInvalidData) {
  EXPECT_THROW(MotionSequence(Matrix(0, 2)), InvalidArgument);
  EXPECT_THROW(MotionSequence(Matrix(2, 0)), InvalidArgument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(MotionSequence{bad}, InvalidArgument);
  EXPECT_THROW(MotionSequence(Matrix::Zero(2, 2), -30.0), InvalidArgument);
  EXPECT_EQ(MotionSequence(Matrix::Zero(2, 2), 30.0).frame_rate_hz(), 30.0);
}

}  // namespace
}  // namespace freqdiff
