#include <algorithm>
#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ncslice/rlnc_codec.hpp"

using namespace ncslice;
using rlnc::Bytes;

namespace {

rlnc::Generation make_generation(std::uint32_t id, std::size_t k, std::size_t len, std::mt19937& rng) {
  rlnc::Generation g(id, k);
  for (std::size_t i = 0; i < k; ++i) {
    Bytes p(len);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    g.add(p);
  }
  g.seal();
  return g;
}

}  // namespace

TEST(CodedHeader, BigEndianLayout) {
  const rlnc::CodedHeader h{0xAB, 0x1234};
  const auto bytes = h.serialize();
  EXPECT_EQ(bytes[0], 0xAB);
  EXPECT_EQ(bytes[1], 0x12);
  EXPECT_EQ(bytes[2], 0x34);
  EXPECT_EQ(rlnc::CodedHeader::parse(bytes), h);
  const Bytes short_buf{1, 2};
  EXPECT_THROW(rlnc::CodedHeader::parse(short_buf), std::invalid_argument);
}

TEST(CodedPacket, WireRoundTrip) {
  rlnc::CodedPacket p{{7, 65535}, {1, 2, 3, 4}};
  const auto wire = p.to_wire();
  ASSERT_EQ(wire.size(), rlnc::kHeaderSize + 4);
  EXPECT_EQ(rlnc::CodedPacket::from_wire(wire), p);
}

TEST(Coefficients, DeterministicNonZeroAndSeedSensitive) {
  const auto a = rlnc::derive_coefficients(1, 3, 9, 16);
  EXPECT_EQ(a, rlnc::derive_coefficients(1, 3, 9, 16));
  EXPECT_NE(a, rlnc::derive_coefficients(2, 3, 9, 16));
  EXPECT_NE(a, rlnc::derive_coefficients(1, 4, 9, 16));
  EXPECT_NE(a, rlnc::derive_coefficients(1, 3, 10, 16));
  for (std::uint16_t s = 0; s < 2000; ++s) {
    const auto c = rlnc::derive_coefficients(5, 0, s, 1);  // k = 1 exercises the zero redraw
    ASSERT_NE(c[0], 0);
  }
}

TEST(Generation, SealPadsAndGuards) {
  rlnc::Generation g(1, 2);
  EXPECT_THROW(g.seal(), StateError);
  const Bytes a{1, 2, 3}, b{9};
  g.add(a);
  g.add(b);
  EXPECT_THROW(g.add(a), StateError);
  g.seal();
  EXPECT_EQ(g.payload_length(), 3U);
  EXPECT_EQ(g.payloads()[1], (Bytes{9, 0, 0}));
  EXPECT_THROW(g.add(a), StateError);
  EXPECT_THROW(rlnc::Generation(0, 0), ConfigError);
}

TEST(Encode, Guards) {
  rlnc::Generation g(1, 1);
  EXPECT_THROW(rlnc::encode(g, 0, 1), StateError);
  const Bytes a{1};
  g.add(a);
  g.seal();
  EXPECT_NO_THROW(rlnc::encode(g, 0xFFFF, 1));
  EXPECT_THROW(rlnc::encode(g, 0x10000, 1), ContractViolation);
}

TEST(Decoder, UnitVectorsRecoverSource) {
  std::mt19937 rng(1);
  const auto g = make_generation(300, 4, 10, rng);
  rlnc::DecoderState d(300, 4, 10, 0);
  for (std::size_t i = 0; i < 4; ++i) {
    Bytes e(4, 0);
    e[3 - i] = 1;
    const auto pkt = rlnc::encode_with_coefficients(g, static_cast<std::uint32_t>(i), e);
    EXPECT_TRUE(d.ingest_row(e, pkt.payload).innovative);
  }
  ASSERT_TRUE(d.complete());
  EXPECT_EQ(d.extract(), g.payloads());
}

TEST(Decoder, DuplicatesAreNotInnovative) {
  std::mt19937 rng(2);
  const auto g = make_generation(5, 3, 8, rng);
  rlnc::DecoderState d(5, 3, 8, 77);
  const auto p = rlnc::encode(g, 0, 77);
  EXPECT_TRUE(d.ingest(p).innovative);
  EXPECT_FALSE(d.ingest(p).innovative);
  EXPECT_EQ(d.rank(), 1U);
  EXPECT_EQ(rlnc::missing_dof(d), 2U);
  try {
    (void)d.extract();
    FAIL() << "extract should refuse a rank-deficient generation";
  } catch (const NotDecodableError& e) {
    EXPECT_EQ(e.missing_dof(), 2U);
  }
}

TEST(Decoder, RoutingByGenerationByte) {
  std::mt19937 rng(3);
  const auto g = make_generation(2, 2, 4, rng);
  rlnc::DecoderState d(258, 2, 4, 1);  // same id byte as 2
  EXPECT_NO_THROW(d.ingest(rlnc::encode(g, 0, 1)));
  rlnc::DecoderState other(3, 2, 4, 1);
  EXPECT_THROW(other.ingest(rlnc::encode(g, 0, 1)), RoutingError);
}

TEST(Decoder, RandomRoundTrips) {
  std::mt19937 rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 1 + rng() % 32, len = rng() % 200;
    const auto g = make_generation(static_cast<std::uint32_t>(t), k, len, rng);
    rlnc::DecoderState d(static_cast<std::uint32_t>(t), k, g.payload_length(), 1234);
    std::uint32_t seq = 0;
    while (!d.complete()) {
      if (rng() % 4 == 0) {  // drop some packets on the floor
        ++seq;
        continue;
      }
      d.ingest(rlnc::CodedPacket::from_wire(rlnc::encode(g, seq++, 1234).to_wire()));
    }
    ASSERT_EQ(d.extract(), g.payloads());
    // Rows stay fully reduced: each coefficient row is a distinct unit vector.
    const auto c = d.coefficient_matrix();
    std::vector<int> hit(k, 0);
    for (std::size_t r = 0; r < k; ++r) {
      std::size_t ones = 0, col = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (c(r, j) == 1) ++ones, col = j;
        else ASSERT_EQ(c(r, j), 0);
      }
      ASSERT_EQ(ones, 1U);
      ++hit[col];
    }
    ASSERT_EQ(std::count(hit.begin(), hit.end(), 1), static_cast<std::ptrdiff_t>(k));
  }
}

TEST(Decoder, SixPacketsUsuallyDecodeFive) {
  std::mt19937 rng(5);
  const auto g = make_generation(0, 5, 1, rng);
  int ok = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    rlnc::DecoderState d(0, 5, 1, static_cast<std::uint64_t>(t));
    for (std::uint32_t s = 0; s < 6; ++s) d.ingest(rlnc::encode(g, s, static_cast<std::uint64_t>(t)));
    ok += d.complete();
  }
  // Exact full-rank probability for 6 uniform vectors in GF(256)^5 is ~1 - 1.5e-5.
  EXPECT_GE(static_cast<double>(ok) / trials, 0.996);
}
