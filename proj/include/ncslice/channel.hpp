#pragma once

// Time-slotted erasure links grouped into slices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ncslice/errors.hpp"
#include "ncslice/prng.hpp"

namespace ncslice::channel {

using Slot = std::int64_t;

struct Link {
  std::size_t link_id = 0;
  double erasure_prob = 0.0;
  Slot rtt_slots = 1;

  // Odd RTTs: the forward half rounds up and the return half gets the rest,
  // but never less than one slot.
  Slot forward_delay() const noexcept { return (rtt_slots + 1) / 2; }
  Slot feedback_delay() const noexcept { return std::max<Slot>(1, rtt_slots - forward_delay()); }
};

struct Slice {
  std::size_t slice_id = 1;
  std::vector<Link> links;

  std::size_t size() const noexcept { return links.size(); }
  bool empty() const noexcept { return links.empty(); }

  double average_erasure() const noexcept {
    if (links.empty()) return 0.0;
    double s = 0.0;
    for (const auto& l : links) s += l.erasure_prob;
    return s / static_cast<double>(links.size());
  }

  Slot max_rtt() const noexcept {
    Slot m = 1;
    for (const auto& l : links) m = std::max(m, l.rtt_slots);
    return m;
  }
};

enum class ChannelMode { fixed, randomized };

inline std::string to_string(ChannelMode m) { return m == ChannelMode::fixed ? "fixed" : "randomized"; }

struct ChannelSpec {
  ChannelMode mode = ChannelMode::fixed;
  double rtt_mean = 16.0;
  double rtt_stddev = 3.2;         // randomized only; default 20% of the mean
  double erasure_mean = 0.1;
  double erasure_halfwidth = 0.05;  // randomized only; default 50% of the mean

  static ChannelSpec fixed(double rtt, double erasure) {
    return {ChannelMode::fixed, rtt, 0.0, erasure, 0.0};
  }
  static ChannelSpec randomized(double rtt, double erasure) {
    return {ChannelMode::randomized, rtt, 0.2 * rtt, erasure, 0.5 * erasure};
  }

  void validate() const {
    if (!(rtt_mean >= 1.0)) throw ConfigError("rtt_mean must be >= 1 slot");
    if (!(erasure_mean >= 0.0 && erasure_mean <= 1.0))
      throw ConfigError("erasure_mean must lie in [0, 1]");
    if (rtt_stddev < 0.0 || erasure_halfwidth < 0.0)
      throw ConfigError("randomization spreads must be non-negative");
  }
};

// Link parameters for all n links. Randomized specs draw each link once.
inline std::vector<Link> build_links(const ChannelSpec& spec, std::size_t n_links, std::uint64_t seed) {
  spec.validate();
  std::vector<Link> links(n_links);
  std::mt19937_64 eng(mix_seed({seed, 0x4C494E4BULL}));
  const Slot fixed_rtt = std::max<Slot>(1, std::llround(spec.rtt_mean));
  for (std::size_t i = 0; i < n_links; ++i) {
    Link& l = links[i];
    l.link_id = i;
    l.rtt_slots = fixed_rtt;
    l.erasure_prob = spec.erasure_mean;
    if (spec.mode != ChannelMode::randomized) continue;
    if (spec.rtt_stddev > 0.0) {
      std::normal_distribution<double> rtt(spec.rtt_mean, spec.rtt_stddev);
      l.rtt_slots = std::max<Slot>(1, std::llround(rtt(eng)));
    }
    if (spec.erasure_halfwidth > 0.0) {
      const double lo = std::max(0.0, spec.erasure_mean - spec.erasure_halfwidth);
      const double hi = std::min(1.0, spec.erasure_mean + spec.erasure_halfwidth);
      l.erasure_prob = lo + (hi - lo) * uniform01(eng);
    }
  }
  return links;
}

// Slice 1 gets the first `slicing_index` links, slice 2 the rest (possibly none).
inline std::pair<Slice, Slice> build_slices(const ChannelSpec& spec, std::size_t n_links,
                                            std::size_t slicing_index, std::uint64_t seed) {
  if (n_links == 0) throw ConfigError("network needs at least one link");
  if (slicing_index < 1 || slicing_index > n_links)
    throw ConfigError("slicing index " + std::to_string(slicing_index) + " outside [1, " +
                      std::to_string(n_links) + "]");
  auto links = build_links(spec, n_links, seed);
  Slice first{1, {links.begin(), links.begin() + static_cast<std::ptrdiff_t>(slicing_index)}};
  Slice second{2, {links.begin() + static_cast<std::ptrdiff_t>(slicing_index), links.end()}};
  return {std::move(first), std::move(second)};
}

template <class Frame>
struct Delivery {
  Slot slot = 0;  // arrival slot at the far end
  std::size_t link = 0;
  bool erased = false;
  Frame frame{};
};

// Run-time view of one slice: per-link erasure streams and send bookkeeping.
class SliceChannel {
 public:
  SliceChannel(const Slice& slice, std::uint64_t seed) : links_(slice.links), last_tx_(slice.size(), -1) {
    streams_.reserve(links_.size());
    for (const auto& l : links_) streams_.emplace_back(mix_seed({seed, l.link_id, 0xE7A5E7A5ULL}));
  }

  std::size_t size() const noexcept { return links_.size(); }
  const Link& link(std::size_t i) const { return links_.at(i); }
  const std::vector<Link>& links() const noexcept { return links_; }

  // One packet per link per slot. The outcome is drawn at the caller's
  // effective erasure probability.
  template <class Frame>
  Delivery<Frame> transmit(std::size_t link_index, Slot slot, Frame frame, double effective_erasure) {
    if (last_tx_.at(link_index) == slot)
      throw ContractViolation("second transmission on link " + std::to_string(link_index) +
                              " in slot " + std::to_string(slot));
    last_tx_[link_index] = slot;
    const bool erased = uniform01(streams_[link_index]) < effective_erasure;
    return {slot + links_[link_index].forward_delay(), link_index, erased, std::move(frame)};
  }

  // Feedback is never lost.
  Slot feedback_arrival(std::size_t link_index, Slot slot) const {
    return slot + links_.at(link_index).feedback_delay();
  }

 private:
  std::vector<Link> links_;
  std::vector<std::mt19937_64> streams_;
  std::vector<Slot> last_tx_;
};

}  // namespace ncslice::channel
