#pragma once

// Block RLNC over GF(2^8): generations, seed-identified coded packets and an
// incremental Gauss-Jordan decoder.
//
// Wire image of a coded packet:
//   [generation id mod 256 : 1 byte][seq : 2 bytes, big endian][payload : L bytes]
// The receiver regenerates the coefficient vector from (global seed, id byte, seq).

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncslice/errors.hpp"
#include "ncslice/field_matrix.hpp"
#include "ncslice/gf256.hpp"
#include "ncslice/prng.hpp"

namespace ncslice::rlnc {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kHeaderSize = 3;
inline constexpr std::uint32_t kMaxSeq = 0xFFFF;

struct CodedHeader {
  std::uint8_t generation_byte = 0;
  std::uint16_t seq = 0;

  std::array<std::uint8_t, kHeaderSize> serialize() const noexcept {
    return {generation_byte, static_cast<std::uint8_t>(seq >> 8U),
            static_cast<std::uint8_t>(seq & 0xFFU)};
  }

  static CodedHeader parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw std::invalid_argument("coded header needs 3 bytes");
    return {bytes[0], static_cast<std::uint16_t>((bytes[1] << 8U) | bytes[2])};
  }

  friend bool operator==(const CodedHeader&, const CodedHeader&) = default;
};

struct CodedPacket {
  CodedHeader header;
  Bytes payload;

  Bytes to_wire() const {
    Bytes out(kHeaderSize + payload.size());
    const auto h = header.serialize();
    std::copy(h.begin(), h.end(), out.begin());
    std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
    return out;
  }

  static CodedPacket from_wire(std::span<const std::uint8_t> wire) {
    CodedPacket p;
    p.header = CodedHeader::parse(wire);
    p.payload.assign(wire.begin() + kHeaderSize, wire.end());
    return p;
  }

  friend bool operator==(const CodedPacket&, const CodedPacket&) = default;
};

// Coefficient vector for (global seed, generation id byte, seq). A draw that
// comes out all-zero is rejected and redrawn with the next draw counter.
inline Bytes derive_coefficients(std::uint64_t global_seed, std::uint8_t generation_byte,
                                 std::uint16_t seq, std::size_t k) {
  Bytes coeffs(k, 0);
  for (std::uint64_t draw = 0;; ++draw) {
    SplitMix64 g(mix_seed({global_seed, generation_byte, seq, draw}));
    std::size_t i = 0;
    while (i < k) {
      std::uint64_t word = g();
      for (int b = 0; b < 8 && i < k; ++b, ++i) {
        coeffs[i] = static_cast<std::uint8_t>(word & 0xFFU);
        word >>= 8U;
      }
    }
    if (std::any_of(coeffs.begin(), coeffs.end(), [](std::uint8_t c) { return c != 0; }))
      return coeffs;
  }
}

class Generation {
 public:
  Generation(std::uint32_t generation_id, std::size_t size_k)
      : id_(generation_id), size_k_(size_k) {
    if (size_k_ == 0) throw ConfigError("generation size must be at least 1");
    payloads_.reserve(size_k_);
  }

  void add(std::span<const std::uint8_t> payload) {
    if (sealed_) throw StateError("generation already sealed");
    if (payloads_.size() == size_k_) throw StateError("generation is full");
    payloads_.emplace_back(payload.begin(), payload.end());
  }

  // Pads every payload with zeros to the longest one.
  void seal() {
    if (sealed_) return;
    if (payloads_.size() != size_k_)
      throw StateError("sealing needs exactly " + std::to_string(size_k_) + " payloads");
    length_ = 0;
    for (const auto& p : payloads_) length_ = std::max(length_, p.size());
    for (auto& p : payloads_) p.resize(length_, 0);
    sealed_ = true;
  }

  std::uint32_t id() const noexcept { return id_; }
  std::uint8_t id_byte() const noexcept { return static_cast<std::uint8_t>(id_ & 0xFFU); }
  std::size_t size() const noexcept { return size_k_; }
  bool sealed() const noexcept { return sealed_; }
  std::size_t payload_length() const noexcept { return length_; }
  const std::vector<Bytes>& payloads() const noexcept { return payloads_; }

 private:
  std::uint32_t id_;
  std::size_t size_k_;
  std::vector<Bytes> payloads_;
  std::size_t length_ = 0;
  bool sealed_ = false;
};

// Linear combination with explicit coefficients. Test hook for forced vectors.
inline CodedPacket encode_with_coefficients(const Generation& gen, std::uint32_t seq,
                                            std::span<const std::uint8_t> coeffs) {
  if (!gen.sealed()) throw StateError("encode requires a sealed generation");
  if (seq > kMaxSeq) throw ContractViolation("seq must fit in 16 bits");
  if (coeffs.size() != gen.size()) throw std::invalid_argument("coefficient count != k");
  CodedPacket pkt;
  pkt.header = {gen.id_byte(), static_cast<std::uint16_t>(seq)};
  pkt.payload.assign(gen.payload_length(), 0);
  for (std::size_t i = 0; i < gen.size(); ++i)
    gf256::axpy(pkt.payload, coeffs[i], gen.payloads()[i]);
  return pkt;
}

inline CodedPacket encode(const Generation& gen, std::uint32_t seq, std::uint64_t global_seed) {
  if (!gen.sealed()) throw StateError("encode requires a sealed generation");
  if (seq > kMaxSeq) throw ContractViolation("seq must fit in 16 bits");
  const Bytes coeffs =
      derive_coefficients(global_seed, gen.id_byte(), static_cast<std::uint16_t>(seq), gen.size());
  return encode_with_coefficients(gen, seq, coeffs);
}

struct IngestResult {
  bool innovative = false;
  std::size_t rank = 0;
};

// Per-generation decoder. Rows are kept in reduced row-echelon form, each row
// being [coefficients | payload].
class DecoderState {
 public:
  DecoderState(std::uint32_t generation_id, std::size_t size_k, std::size_t payload_length,
               std::uint64_t global_seed)
      : id_(generation_id), k_(size_k), length_(payload_length), seed_(global_seed),
        rows_(0, size_k + payload_length) {
    if (k_ == 0) throw ConfigError("generation size must be at least 1");
  }

  IngestResult ingest(const CodedPacket& pkt) {
    if (pkt.header.generation_byte != static_cast<std::uint8_t>(id_ & 0xFFU))
      throw RoutingError("coded packet for generation byte " +
                         std::to_string(pkt.header.generation_byte) + " routed to generation " +
                         std::to_string(id_));
    const Bytes coeffs = derive_coefficients(seed_, pkt.header.generation_byte, pkt.header.seq, k_);
    return ingest_row(coeffs, pkt.payload);
  }

  IngestResult ingest_row(std::span<const std::uint8_t> coeffs,
                          std::span<const std::uint8_t> payload) {
    if (coeffs.size() != k_) throw std::invalid_argument("coefficient count != k");
    if (rank_ == k_) return {false, rank_};
    Bytes v(k_ + length_, 0);
    std::copy(coeffs.begin(), coeffs.end(), v.begin());
    std::copy_n(payload.begin(), std::min(payload.size(), length_), v.begin() + k_);

    for (std::size_t r = 0; r < rank_; ++r) {
      const std::uint8_t f = v[pivots_[r]];
      if (f != 0) gf256::axpy(v, f, rows_.row(r));
    }
    std::size_t col = 0;
    while (col < k_ && v[col] == 0) ++col;
    if (col == k_) return {false, rank_};

    gf256::scale(v, gf256::inv(v[col]));
    for (std::size_t r = 0; r < rank_; ++r) {
      const std::uint8_t f = rows_(r, col);
      if (f != 0) gf256::axpy(rows_.row(r), f, v);
    }
    rows_.append_row(v);
    pivots_.push_back(col);
    ++rank_;
    return {true, rank_};
  }

  std::size_t rank() const noexcept { return rank_; }
  std::size_t missing_dof() const noexcept { return k_ - rank_; }
  bool complete() const noexcept { return rank_ == k_; }
  std::uint32_t generation_id() const noexcept { return id_; }
  std::size_t size() const noexcept { return k_; }

  gf256::FieldMatrix coefficient_matrix() const {
    gf256::FieldMatrix m(rank_, k_);
    for (std::size_t r = 0; r < rank_; ++r)
      for (std::size_t c = 0; c < k_; ++c) m(r, c) = rows_(r, c);
    return m;
  }

  std::vector<Bytes> extract() const {
    if (rank_ < k_) throw NotDecodableError(k_ - rank_);
    std::vector<Bytes> out(k_);
    for (std::size_t r = 0; r < rank_; ++r) {
      const auto row = rows_.row(r);
      out[pivots_[r]].assign(row.begin() + static_cast<std::ptrdiff_t>(k_), row.end());
    }
    return out;
  }

 private:
  std::uint32_t id_;
  std::size_t k_;
  std::size_t length_;
  std::uint64_t seed_;
  gf256::FieldMatrix rows_;
  std::vector<std::size_t> pivots_;
  std::size_t rank_ = 0;
};

inline std::size_t missing_dof(const DecoderState& state) noexcept { return state.missing_dof(); }

}  // namespace ncslice::rlnc
