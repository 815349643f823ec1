#pragma once

// Sender/receiver state machines for the two reliability schemes:
//   * baseline: HARQ rounds nested inside ARQ retransmissions,
//   * block RLNC with an FEC round and at most one feedback-triggered repair round.
// Both are driven slot by slot by sim_engine.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ncslice/channel.hpp"
#include "ncslice/errors.hpp"
#include "ncslice/rlnc_codec.hpp"

namespace ncslice::protocols {

using channel::Slot;

inline constexpr Slot kPendingSlot = -1;

// Ceiling that ignores floating-point noise, so 5 * 1.2 gives 6 and not 7.
inline std::size_t ceil_count(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

struct RlncConfig {
  std::size_t generation_size = 5;
  double fec_rate = 1.0 / 0.9;  // gamma1
  double fb_rate = 2.0 / 0.9;   // gamma2

  // gamma1 = 1/(1-p), gamma2 = 2/(1-p).
  static RlncConfig for_erasure(double p_bar, std::size_t k) {
    if (!(p_bar >= 0.0 && p_bar < 1.0))
      throw ConfigError("default coding rates need an average erasure probability in [0, 1)");
    return {k, 1.0 / (1.0 - p_bar), 2.0 / (1.0 - p_bar)};
  }

  void validate() const {
    if (generation_size < 1) throw ConfigError("generation size must be >= 1");
    if (!(fec_rate >= 1.0) || !std::isfinite(fec_rate)) throw ConfigError("FEC rate must be >= 1");
    if (!(fb_rate >= 1.0) || !std::isfinite(fb_rate)) throw ConfigError("FB rate must be >= 1");
  }

  std::size_t initial_packets(std::size_t k) const { return ceil_count(static_cast<double>(k) * fec_rate); }
  std::size_t repair_packets(std::size_t missing) const {
    return ceil_count(static_cast<double>(missing) * fb_rate);
  }
};

enum class ErasureModel {
  halving,   // every HARQ attempt halves the erasure probability
  constant,  // plain ARQ: no combining gain
};

struct BaselineConfig {
  std::size_t max_harq_tx = 4;
  std::size_t max_retx_threshold = 8;
  ErasureModel erasure_model = ErasureModel::halving;
  bool any_link_retransmission = false;

  std::size_t total_budget() const noexcept { return max_harq_tx * max_retx_threshold; }

  void validate() const {
    if (max_harq_tx < 1 || max_retx_threshold < 1) throw ConfigError("HARQ/ARQ limits must be >= 1");
    if (total_budget() > std::numeric_limits<std::uint16_t>::max())
      throw ConfigError("transmission budget too large");
  }
};

// Effective erasure probability of HARQ attempt `attempt` (1-based, restarted
// at every ARQ round).
inline double harq_effective_prob(double base_p, std::size_t attempt, std::size_t max_harq_tx = 4,
                                  ErasureModel model = ErasureModel::halving) {
  if (attempt < 1 || attempt > max_harq_tx)
    throw ContractViolation("HARQ attempt " + std::to_string(attempt) + " outside [1, " +
                            std::to_string(max_harq_tx) + "]");
  if (model == ErasureModel::constant) return base_p;
  return std::ldexp(base_p, 1 - static_cast<int>(attempt));
}

enum class PacketStatus { pending, delivered, failed };

struct PacketRecord {
  std::uint32_t packet_id = 0;
  Slot first_tx_slot = kPendingSlot;
  Slot delivered_slot = kPendingSlot;
  Slot in_order_slot = kPendingSlot;
  Slot terminal_slot = kPendingSlot;
  PacketStatus status = PacketStatus::pending;
};

// Per-packet outcome table shared by a sender/receiver pair within one run.
class PacketLedger {
 public:
  explicit PacketLedger(std::size_t n) : records_(n) {
    for (std::size_t i = 0; i < n; ++i) records_[i].packet_id = static_cast<std::uint32_t>(i);
  }

  void mark_first_tx(std::size_t id, Slot t) {
    auto& r = records_.at(id);
    if (r.first_tx_slot == kPendingSlot) r.first_tx_slot = t;
  }

  void mark_delivered(std::size_t id, Slot t) {
    auto& r = records_.at(id);
    if (r.status != PacketStatus::pending) return;
    r.status = PacketStatus::delivered;
    r.delivered_slot = t;
    r.terminal_slot = t;
    ++delivered_;
    ++terminal_;
    last_delivery_ = std::max(last_delivery_, t);
    advance_in_order(t);
  }

  void mark_failed(std::size_t id, Slot t) {
    auto& r = records_.at(id);
    if (r.status != PacketStatus::pending) return;
    r.status = PacketStatus::failed;
    r.terminal_slot = t;
    ++failed_;
    ++terminal_;
    advance_in_order(t);
  }

  std::size_t size() const noexcept { return records_.size(); }
  bool all_terminal() const noexcept { return terminal_ == records_.size(); }
  std::size_t delivered() const noexcept { return delivered_; }
  std::size_t failed() const noexcept { return failed_; }
  Slot last_delivery() const noexcept { return last_delivery_; }
  const PacketRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<PacketRecord>& records() const noexcept { return records_; }

 private:
  // A failed packet releases the in-order queue at its failure slot.
  void advance_in_order(Slot t) {
    while (next_in_order_ < records_.size() &&
           records_[next_in_order_].status != PacketStatus::pending) {
      auto& r = records_[next_in_order_];
      if (r.status == PacketStatus::delivered) r.in_order_slot = t;
      ++next_in_order_;
    }
  }

  std::vector<PacketRecord> records_;
  std::size_t next_in_order_ = 0;
  std::size_t delivered_ = 0;
  std::size_t failed_ = 0;
  std::size_t terminal_ = 0;
  Slot last_delivery_ = kPendingSlot;
};

// ---------------------------------------------------------------------------
// Baseline: HARQ within ARQ

struct BaselineFrame {
  std::uint32_t packet_id = 0;
  std::uint16_t attempt = 0;  // 0-based over the whole budget
};

struct BaselineFeedback {
  std::uint32_t packet_id = 0;
  std::uint16_t attempt = 0;
  bool success = false;
};

// Attempts and successes per HARQ attempt index (slot 0 = first attempt of a round).
struct AttemptStats {
  std::vector<std::uint64_t> attempts;
  std::vector<std::uint64_t> successes;

  explicit AttemptStats(std::size_t n = 0) : attempts(n, 0), successes(n, 0) {}

  void merge(const AttemptStats& o) {
    if (attempts.size() < o.attempts.size()) {
      attempts.resize(o.attempts.size(), 0);
      successes.resize(o.successes.size(), 0);
    }
    for (std::size_t i = 0; i < o.attempts.size(); ++i) {
      attempts[i] += o.attempts[i];
      successes[i] += o.successes[i];
    }
  }
};

class BaselineSender {
 public:
  BaselineSender(const BaselineConfig& cfg, const channel::SliceChannel& ch, PacketLedger& ledger)
      : cfg_(cfg), ch_(ch), ledger_(ledger), attempts_(ledger.size(), 0),
        per_link_retx_(ch.size()), stats_(cfg.max_harq_tx), link_stats_(ch.size(), AttemptStats(cfg.max_harq_tx)) {
    cfg_.validate();
  }

  void on_feedback(Slot t, std::size_t link, const BaselineFeedback& fb) {
    const std::size_t harq_index = fb.attempt % cfg_.max_harq_tx;
    ++stats_.attempts[harq_index];
    ++link_stats_[link].attempts[harq_index];
    if (fb.success) {
      ++stats_.successes[harq_index];
      ++link_stats_[link].successes[harq_index];
      return;
    }
    if (attempts_[fb.packet_id] >= cfg_.total_budget()) {
      ledger_.mark_failed(fb.packet_id, t);
      return;
    }
    if (cfg_.any_link_retransmission)
      shared_retx_.push_back(fb.packet_id);
    else
      per_link_retx_[link].push_back(fb.packet_id);
  }

  // Every idle link sends: due retransmissions first, then new packets in order.
  template <class Send>
  void transmit(Slot t, Send&& send) {
    for (std::size_t l = 0; l < ch_.size(); ++l) {
      std::uint32_t pid = 0;
      if (!per_link_retx_[l].empty()) {
        pid = per_link_retx_[l].front();
        per_link_retx_[l].pop_front();
      } else if (!shared_retx_.empty()) {
        pid = shared_retx_.front();
        shared_retx_.pop_front();
      } else if (next_new_ < ledger_.size()) {
        pid = static_cast<std::uint32_t>(next_new_++);
        ledger_.mark_first_tx(pid, t);
      } else {
        continue;
      }
      const auto attempt = static_cast<std::uint16_t>(attempts_[pid]++);
      const double p = harq_effective_prob(ch_.link(l).erasure_prob, attempt % cfg_.max_harq_tx + 1,
                                           cfg_.max_harq_tx, cfg_.erasure_model);
      send(l, BaselineFrame{pid, attempt}, p);
    }
  }

  const AttemptStats& stats() const noexcept { return stats_; }
  const std::vector<AttemptStats>& link_stats() const noexcept { return link_stats_; }

 private:
  BaselineConfig cfg_;
  const channel::SliceChannel& ch_;
  PacketLedger& ledger_;
  std::vector<std::uint16_t> attempts_;
  std::vector<std::deque<std::uint32_t>> per_link_retx_;
  std::deque<std::uint32_t> shared_retx_;
  std::size_t next_new_ = 0;
  AttemptStats stats_;
  std::vector<AttemptStats> link_stats_;
};

// ACK/NACK per attempt; an erased attempt is reported when its slot passes.
class BaselineReceiver {
 public:
  explicit BaselineReceiver(PacketLedger& ledger) : ledger_(ledger) {}

  template <class Emit>
  void on_arrival(Slot t, const channel::Delivery<BaselineFrame>& d, Emit&& emit) {
    if (!d.erased) ledger_.mark_delivered(d.frame.packet_id, t);
    emit(d.link, BaselineFeedback{d.frame.packet_id, d.frame.attempt, !d.erased});
  }

 private:
  PacketLedger& ledger_;
};

// ---------------------------------------------------------------------------
// Block RLNC

struct RlncFrame {
  std::uint32_t generation = 0;
  std::uint8_t round = 0;  // 0 = initial FEC block, 1 = repair block
  std::uint16_t block_size = 0;
  rlnc::CodedPacket packet;
};

struct RlncFeedback {
  std::uint32_t generation = 0;
  std::uint8_t round = 0;
  std::uint32_t missing_dof = 0;
};

// Consecutive packet ids [first, first + size) form one generation; the last
// one may be short.
struct GenerationLayout {
  std::size_t n_packets = 0;
  std::size_t k = 1;

  std::size_t count() const noexcept { return (n_packets + k - 1) / k; }
  std::size_t first(std::size_t g) const noexcept { return g * k; }
  std::size_t size(std::size_t g) const noexcept { return std::min(k, n_packets - g * k); }
};

// Deterministic synthetic content for source packet `id`.
inline rlnc::Bytes synthetic_payload(std::size_t id, std::size_t length) {
  rlnc::Bytes b(length);
  for (std::size_t j = 0; j < length; ++j)
    b[j] = static_cast<std::uint8_t>((id * 131U + j * 7U + 0x5AU) ^ (id >> 8U));
  return b;
}

inline constexpr std::size_t kMaxGenerationsInFlight = 255;

class RlncSender {
 public:
  RlncSender(const RlncConfig& cfg, const channel::SliceChannel& ch, PacketLedger& ledger,
             std::uint64_t coding_seed, std::size_t payload_bytes)
      : cfg_(cfg), ch_(ch), ledger_(ledger), layout_{ledger.size(), cfg.generation_size},
        seed_(coding_seed), payload_bytes_(payload_bytes), gens_(layout_.count()) {
    cfg_.validate();
  }

  void on_feedback(Slot t, std::size_t /*link*/, const RlncFeedback& fb) {
    auto& g = gens_.at(fb.generation);
    if (g.resolved) return;
    if (fb.round == 0) {
      if (fb.missing_dof == 0) {
        resolve(g);
        return;
      }
      repairs_.push_back({fb.generation, cfg_.repair_packets(fb.missing_dof)});
      g.repair_block = static_cast<std::uint16_t>(repairs_.back().remaining);
      return;
    }
    if (fb.missing_dof != 0) {
      const std::size_t first = layout_.first(fb.generation);
      for (std::size_t i = 0; i < layout_.size(fb.generation); ++i) ledger_.mark_failed(first + i, t);
      ++generations_failed_;
    }
    resolve(g);
  }

  // Links are filled in index order; repair packets preempt new generations.
  template <class Send>
  void transmit(Slot t, Send&& send) {
    for (std::size_t l = 0; l < ch_.size(); ++l) {
      auto frame = next_frame(t);
      if (!frame) return;
      send(l, std::move(*frame), ch_.link(l).erasure_prob);
    }
  }

  std::size_t generations_failed() const noexcept { return generations_failed_; }
  const GenerationLayout& layout() const noexcept { return layout_; }

 private:
  struct GenState {
    std::optional<rlnc::Generation> data;
    std::uint32_t next_seq = 0;
    std::uint16_t initial_block = 0;
    std::uint16_t initial_sent = 0;
    std::uint16_t repair_block = 0;
    bool resolved = false;
  };

  struct Repair {
    std::uint32_t generation;
    std::size_t remaining;
  };

  void resolve(GenState& g) {
    g.resolved = true;
    g.data.reset();
    --in_flight_;
  }

  void start_generation(std::size_t gi, Slot t) {
    auto& g = gens_[gi];
    const std::size_t k = layout_.size(gi);
    rlnc::Generation gen(static_cast<std::uint32_t>(gi), k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t id = layout_.first(gi) + i;
      gen.add(synthetic_payload(id, payload_bytes_));
      ledger_.mark_first_tx(id, t);
    }
    gen.seal();
    g.data = std::move(gen);
    g.initial_block = static_cast<std::uint16_t>(cfg_.initial_packets(k));
    ++in_flight_;
  }

  rlnc::CodedPacket code(GenState& g) { return rlnc::encode(*g.data, g.next_seq++, seed_); }

  std::optional<RlncFrame> next_frame(Slot t) {
    if (!repairs_.empty()) {
      auto& r = repairs_.front();
      auto& g = gens_[r.generation];
      RlncFrame f{r.generation, 1, g.repair_block, code(g)};
      if (--r.remaining == 0) repairs_.pop_front();
      return f;
    }
    if (cursor_ >= gens_.size()) return std::nullopt;
    auto* g = &gens_[cursor_];
    if (!g->data && !g->resolved) {
      if (in_flight_ >= kMaxGenerationsInFlight) return std::nullopt;
      start_generation(cursor_, t);
      g = &gens_[cursor_];
    }
    RlncFrame f{static_cast<std::uint32_t>(cursor_), 0, g->initial_block, code(*g)};
    if (++g->initial_sent == g->initial_block) ++cursor_;
    return f;
  }

  RlncConfig cfg_;
  const channel::SliceChannel& ch_;
  PacketLedger& ledger_;
  GenerationLayout layout_;
  std::uint64_t seed_;
  std::size_t payload_bytes_;
  std::vector<GenState> gens_;
  std::deque<Repair> repairs_;
  std::size_t cursor_ = 0;
  std::size_t in_flight_ = 0;
  std::size_t generations_failed_ = 0;
};

// Feeds arrivals into per-generation decoders and reports missing degrees of
// freedom once every packet of a block has arrived or been lost.
class RlncReceiver {
 public:
  RlncReceiver(const RlncConfig& cfg, PacketLedger& ledger, std::uint64_t coding_seed,
               std::size_t payload_bytes, bool verify_payloads = false)
      : layout_{ledger.size(), cfg.generation_size}, ledger_(ledger), seed_(coding_seed),
        payload_bytes_(payload_bytes), verify_(verify_payloads), gens_(layout_.count()),
        missing_hist_(cfg.generation_size + 1, 0) {}

  template <class Emit>
  void on_arrival(Slot t, const channel::Delivery<RlncFrame>& d, Emit&& emit) {
    const std::uint32_t gi = d.frame.generation;
    if (d.frame.packet.header.generation_byte != static_cast<std::uint8_t>(gi & 0xFFU))
      throw RoutingError("generation byte does not match frame routing");
    auto& g = gens_.at(gi);
    if (!d.erased && !g.decoded) {
      if (!g.decoder)
        g.decoder.emplace(gi, layout_.size(gi), payload_bytes_, seed_);
      g.decoder->ingest(d.frame.packet);
      if (g.decoder->complete()) {
        g.decoded = true;
        if (verify_) check_payloads(gi, *g.decoder);
        g.decoder.reset();
        const std::size_t first = layout_.first(gi);
        for (std::size_t i = 0; i < layout_.size(gi); ++i) ledger_.mark_delivered(first + i, t);
      }
    }
    auto& seen = d.frame.round == 0 ? g.seen_initial : g.seen_repair;
    if (++seen == d.frame.block_size) {
      const std::size_t missing = g.decoded ? 0 : (g.decoder ? g.decoder->missing_dof() : layout_.size(gi));
      if (d.frame.round == 0) ++missing_hist_.at(missing);
      emit(d.link, RlncFeedback{gi, d.frame.round, static_cast<std::uint32_t>(missing)});
    }
  }

  std::size_t payload_mismatches() const noexcept { return mismatches_; }
  // Missing degrees of freedom at the end of each initial block.
  const std::vector<std::uint64_t>& missing_histogram() const noexcept { return missing_hist_; }

 private:
  struct GenState {
    std::optional<rlnc::DecoderState> decoder;
    std::uint16_t seen_initial = 0;
    std::uint16_t seen_repair = 0;
    bool decoded = false;
  };

  void check_payloads(std::uint32_t gi, const rlnc::DecoderState& dec) {
    const auto out = dec.extract();
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i] != synthetic_payload(layout_.first(gi) + i, payload_bytes_)) ++mismatches_;
  }

  GenerationLayout layout_;
  PacketLedger& ledger_;
  std::uint64_t seed_;
  std::size_t payload_bytes_;
  bool verify_;
  std::vector<GenState> gens_;
  std::size_t mismatches_ = 0;
  std::vector<std::uint64_t> missing_hist_;
};

}  // namespace ncslice::protocols
