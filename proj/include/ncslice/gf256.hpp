#pragma once

// Arithmetic in GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace ncslice::gf256 {

inline constexpr unsigned kPolynomial = 0x11B;
inline constexpr std::uint8_t kGenerator = 0x03;

namespace detail {

// Carry-less multiply with on-the-fly reduction.
constexpr std::uint8_t shift_reduce_mul(std::uint8_t a, std::uint8_t b) noexcept {
  unsigned x = a;
  unsigned y = b;
  unsigned acc = 0;
  while (y != 0) {
    if (y & 1U) acc ^= x;
    y >>= 1U;
    x <<= 1U;
    if (x & 0x100U) x ^= kPolynomial;
  }
  return static_cast<std::uint8_t>(acc);
}

struct LogTables {
  std::array<std::uint8_t, 512> exp{};  // doubled so exp[log a + log b] needs no mod
  std::array<std::uint8_t, 256> log{};  // log[0] unused
};

constexpr LogTables make_log_tables() noexcept {
  LogTables t{};
  std::uint8_t x = 1;
  for (unsigned i = 0; i < 255; ++i) {
    t.exp[i] = x;
    t.exp[i + 255] = x;
    t.log[x] = static_cast<std::uint8_t>(i);
    x = shift_reduce_mul(x, kGenerator);
  }
  t.exp[510] = t.exp[0];
  t.exp[511] = t.exp[1];
  return t;
}

inline constexpr LogTables kLog = make_log_tables();

constexpr std::uint8_t log_mul(std::uint8_t a, std::uint8_t b) noexcept {
  if (a == 0 || b == 0) return 0;
  return kLog.exp[static_cast<unsigned>(kLog.log[a]) + kLog.log[b]];
}

struct MulTable {
  std::array<std::array<std::uint8_t, 256>, 256> rows{};
};

constexpr MulTable make_mul_table() noexcept {
  MulTable t{};
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b)
      t.rows[a][b] = log_mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
  return t;
}

inline constexpr MulTable kMul = make_mul_table();

constexpr std::array<std::uint8_t, 256> make_inv_table() noexcept {
  std::array<std::uint8_t, 256> inv{};
  for (unsigned a = 1; a < 256; ++a)
    inv[a] = kLog.exp[(255U - kLog.log[a]) % 255U];
  return inv;
}

inline constexpr std::array<std::uint8_t, 256> kInv = make_inv_table();

}  // namespace detail

constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>(a ^ b);
}

// Full 256x256 product table.
constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept {
  return detail::kMul.rows[a][b];
}

// Same product through log/antilog tables; kept as an independent path.
constexpr std::uint8_t mul_log(std::uint8_t a, std::uint8_t b) noexcept {
  return detail::log_mul(a, b);
}

inline std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::domain_error("gf256: zero has no multiplicative inverse");
  return detail::kInv[a];
}

inline std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }

// dst[i] ^= c * src[i]
inline void axpy(std::span<std::uint8_t> dst, std::uint8_t c,
                 std::span<const std::uint8_t> src) noexcept {
  if (c == 0) return;
  const auto& row = detail::kMul.rows[c];
  const std::size_t n = dst.size() < src.size() ? dst.size() : src.size();
  for (std::size_t i = 0; i < n; ++i) dst[i] ^= row[src[i]];
}

inline void scale(std::span<std::uint8_t> v, std::uint8_t c) noexcept {
  const auto& row = detail::kMul.rows[c];
  for (auto& x : v) x = row[x];
}

// Value type for code that wants operator syntax.
class Element {
 public:
  constexpr Element() noexcept = default;
  constexpr explicit Element(std::uint8_t v) noexcept : value_(v) {}

  constexpr std::uint8_t value() const noexcept { return value_; }

  friend constexpr Element operator+(Element a, Element b) noexcept {
    return Element(add(a.value_, b.value_));
  }
  friend constexpr Element operator-(Element a, Element b) noexcept { return a + b; }
  friend constexpr Element operator*(Element a, Element b) noexcept {
    return Element(mul(a.value_, b.value_));
  }
  friend Element operator/(Element a, Element b) { return Element(div(a.value_, b.value_)); }
  friend constexpr bool operator==(Element, Element) noexcept = default;

  Element inverse() const { return Element(inv(value_)); }

 private:
  std::uint8_t value_ = 0;
};

}  // namespace ncslice::gf256
