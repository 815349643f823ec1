#pragma once

// Deterministic slot-driven simulation. Within a slot the order is fixed:
// arrivals -> receiver -> feedback delivery -> sender transmissions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ncslice/channel.hpp"
#include "ncslice/errors.hpp"
#include "ncslice/prng.hpp"
#include "ncslice/protocols.hpp"

namespace ncslice::sim {

using channel::Slot;

enum class Protocol { rlnc, baseline };
enum class GoodputMode { busy, elapsed };

inline std::string to_string(Protocol p) { return p == Protocol::rlnc ? "rlnc" : "baseline"; }
inline std::string to_string(GoodputMode m) { return m == GoodputMode::busy ? "busy" : "elapsed"; }

inline constexpr Slot kDefaultSlotCap = 10'000'000;

// Ring of per-slot event buckets; the horizon must exceed the longest delay.
template <class Event>
class SlotCalendar {
 public:
  explicit SlotCalendar(std::size_t horizon) : buckets_(horizon) {}

  void schedule(Slot at, Event e) { buckets_[index(at)].push_back(std::move(e)); }

  std::vector<Event> take(Slot at) {
    std::vector<Event> out;
    out.swap(buckets_[index(at)]);
    return out;
  }

 private:
  std::size_t index(Slot at) const { return static_cast<std::size_t>(at) % buckets_.size(); }
  std::vector<std::vector<Event>> buckets_;
};

struct SlotLoopStats {
  Slot busy_slots = 0;
  Slot elapsed_slots = 0;
};

template <class Feedback>
struct FeedbackEvent {
  std::size_t link = 0;
  Feedback msg{};
};

// Runs one sender/receiver pair until every packet is terminal.
template <class Frame, class Feedback, class Sender, class Receiver>
SlotLoopStats run_slot_loop(channel::SliceChannel& ch, Sender& sender, Receiver& receiver,
                            const protocols::PacketLedger& ledger, Slot slot_cap) {
  const auto horizon = static_cast<std::size_t>(
      std::max_element(ch.links().begin(), ch.links().end(),
                       [](const auto& a, const auto& b) { return a.rtt_slots < b.rtt_slots; })
          ->rtt_slots + 2);
  SlotCalendar<channel::Delivery<Frame>> forward(horizon);
  SlotCalendar<FeedbackEvent<Feedback>> backward(horizon);
  SlotLoopStats stats;

  for (Slot t = 0; !ledger.all_terminal(); ++t) {
    if (t >= slot_cap)
      throw RunAbortError("simulation exceeded the slot cap of " + std::to_string(slot_cap) +
                          " slots with packets still pending");
    for (auto& d : forward.take(t)) {
      receiver.on_arrival(t, d, [&](std::size_t link, Feedback fb) {
        backward.schedule(ch.feedback_arrival(link, t), {link, std::move(fb)});
      });
    }
    for (auto& fb : backward.take(t)) sender.on_feedback(t, fb.link, fb.msg);

    bool busy = false;
    sender.transmit(t, [&](std::size_t link, Frame frame, double p) {
      busy = true;
      auto d = ch.transmit(link, t, std::move(frame), p);
      const Slot at = d.slot;
      forward.schedule(at, std::move(d));
    });
    if (busy) ++stats.busy_slots;
    stats.elapsed_slots = t + 1;
  }
  return stats;
}

// Everything one iteration produces, already reduced.
struct IterationSummary {
  std::size_t packets = 0;
  std::size_t delivered = 0;
  std::size_t failed = 0;
  double sum_ppd = 0.0;
  double sum_iod = 0.0;
  double sum_iod_sq = 0.0;
  double goodput = 0.0;
  Slot completion_time = 0;
  Slot busy_slots = 0;
  Slot elapsed_slots = 0;
  double p_bar = 0.0;
  std::size_t links = 0;
  std::map<Slot, std::uint64_t> ppd_histogram;
  protocols::AttemptStats harq;              // baseline only
  std::vector<double> harq_expected;         // per attempt index, from each link's own p
  std::vector<std::uint64_t> missing_dof;    // rlnc only
  std::size_t generations_failed = 0;        // rlnc only
  std::size_t payload_mismatches = 0;        // rlnc only, when verification is on

  double mean_ppd() const { return delivered ? sum_ppd / static_cast<double>(delivered) : 0.0; }
  double mean_iod() const { return delivered ? sum_iod / static_cast<double>(delivered) : 0.0; }
};

struct IterationOptions {
  std::size_t n_packets = 10'000;
  Slot slot_cap = kDefaultSlotCap;
  GoodputMode goodput_mode = GoodputMode::busy;
  std::size_t payload_bytes = 0;
  bool verify_payloads = false;
};

inline IterationSummary summarize(const protocols::PacketLedger& ledger, const SlotLoopStats& loop,
                                  const channel::Slice& slice, GoodputMode mode) {
  IterationSummary s;
  s.packets = ledger.size();
  s.delivered = ledger.delivered();
  s.failed = ledger.failed();
  s.busy_slots = loop.busy_slots;
  s.elapsed_slots = loop.elapsed_slots;
  s.completion_time = std::max<Slot>(0, ledger.last_delivery());
  s.p_bar = slice.average_erasure();
  s.links = slice.size();
  for (const auto& r : ledger.records()) {
    if (r.status != protocols::PacketStatus::delivered) continue;
    const Slot ppd = r.delivered_slot - r.first_tx_slot;
    const auto iod = static_cast<double>(r.in_order_slot - r.first_tx_slot);
    s.sum_ppd += static_cast<double>(ppd);
    s.sum_iod += iod;
    s.sum_iod_sq += iod * iod;
    ++s.ppd_histogram[ppd];
  }
  const Slot denom = mode == GoodputMode::busy ? loop.busy_slots : loop.elapsed_slots;
  s.goodput = denom > 0 ? static_cast<double>(s.delivered) / static_cast<double>(denom) : 0.0;
  return s;
}

inline IterationSummary run_baseline_iteration(const channel::Slice& slice,
                                               const protocols::BaselineConfig& cfg,
                                               std::uint64_t channel_seed,
                                               const IterationOptions& opt) {
  if (slice.empty()) throw ConfigError("cannot simulate an empty slice");
  channel::SliceChannel ch(slice, channel_seed);
  protocols::PacketLedger ledger(opt.n_packets);
  protocols::BaselineSender sender(cfg, ch, ledger);
  protocols::BaselineReceiver receiver(ledger);
  const auto loop = run_slot_loop<protocols::BaselineFrame, protocols::BaselineFeedback>(
      ch, sender, receiver, ledger, opt.slot_cap);
  auto s = summarize(ledger, loop, slice, opt.goodput_mode);
  s.harq = sender.stats();
  s.harq_expected.assign(cfg.max_harq_tx, 0.0);
  for (std::size_t l = 0; l < ch.size(); ++l) {
    const auto& ls = sender.link_stats()[l];
    for (std::size_t i = 0; i < cfg.max_harq_tx; ++i)
      s.harq_expected[i] += static_cast<double>(ls.attempts[i]) *
                            (1.0 - protocols::harq_effective_prob(ch.link(l).erasure_prob, i + 1,
                                                                  cfg.max_harq_tx, cfg.erasure_model));
  }
  return s;
}

inline IterationSummary run_rlnc_iteration(const channel::Slice& slice, const protocols::RlncConfig& cfg,
                                           std::uint64_t channel_seed, std::uint64_t coding_seed,
                                           const IterationOptions& opt) {
  if (slice.empty()) throw ConfigError("cannot simulate an empty slice");
  channel::SliceChannel ch(slice, channel_seed);
  protocols::PacketLedger ledger(opt.n_packets);
  protocols::RlncSender sender(cfg, ch, ledger, coding_seed, opt.payload_bytes);
  protocols::RlncReceiver receiver(cfg, ledger, coding_seed, opt.payload_bytes, opt.verify_payloads);
  const auto loop = run_slot_loop<protocols::RlncFrame, protocols::RlncFeedback>(
      ch, sender, receiver, ledger, opt.slot_cap);
  auto s = summarize(ledger, loop, slice, opt.goodput_mode);
  s.missing_dof = receiver.missing_histogram();
  s.generations_failed = sender.generations_failed();
  s.payload_mismatches = receiver.payload_mismatches();
  return s;
}

// ---------------------------------------------------------------------------

struct MetricsRecord {
  double mean_ppd = 0.0;
  double mean_iod = 0.0;
  double iod_stddev = 0.0;
  double goodput = 0.0;
  double completion_time = 0.0;
  std::size_t failures = 0;    // summed over iterations
  std::size_t packets = 0;     // per iteration
  std::size_t iterations = 0;
};

struct RunSpec {
  Protocol protocol = Protocol::baseline;
  channel::ChannelSpec channel{};
  std::size_t n_links = 20;
  std::size_t slicing_index = 20;
  int slice = 1;  // which slice of the partition to simulate
  protocols::RlncConfig rlnc{};
  protocols::BaselineConfig baseline{};
  std::size_t n_packets = 10'000;
  std::size_t iterations = 10;
  std::uint64_t seed = 1;
  Slot slot_cap = kDefaultSlotCap;
  GoodputMode goodput_mode = GoodputMode::busy;
  std::size_t payload_bytes = 0;
  bool verify_payloads = false;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (n_packets < 1) throw ConfigError("n_packets must be >= 1");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (slice != 1 && slice != 2) throw ConfigError("slice must be 1 or 2");
    channel.validate();
    rlnc.validate();
    baseline.validate();
  }
};

// Everything a run produces: the aggregate record plus pooled diagnostics.
struct RunReport {
  MetricsRecord metrics;
  std::vector<IterationSummary> iterations;
  std::map<Slot, std::uint64_t> ppd_histogram;
  protocols::AttemptStats harq;
  std::vector<double> harq_expected;
  std::vector<std::uint64_t> missing_dof;
  std::size_t delivered = 0;
  std::size_t generations_failed = 0;
  std::size_t payload_mismatches = 0;
  double mean_p_bar = 0.0;
  std::size_t links = 0;
};

// Sub-seeds depend on (seed, iteration) only, so both protocols and every
// slicing index see the same network realisation.
inline std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iteration) {
  return mix_seed({seed, 0x49544552ULL, iteration});
}
inline std::uint64_t link_parameter_seed(std::uint64_t it_seed) { return mix_seed({it_seed, 1}); }
inline std::uint64_t erasure_seed(std::uint64_t it_seed) { return mix_seed({it_seed, 2}); }
inline std::uint64_t coding_seed(std::uint64_t it_seed) { return mix_seed({it_seed, 3}); }

inline IterationSummary run_iteration(const RunSpec& spec, std::size_t iteration) {
  const std::uint64_t it_seed = iteration_seed(spec.seed, iteration);
  auto [first, second] =
      channel::build_slices(spec.channel, spec.n_links, spec.slicing_index, link_parameter_seed(it_seed));
  const channel::Slice& slice = spec.slice == 1 ? first : second;
  IterationOptions opt{spec.n_packets, spec.slot_cap, spec.goodput_mode, spec.payload_bytes,
                       spec.verify_payloads};
  if (spec.protocol == Protocol::baseline)
    return run_baseline_iteration(slice, spec.baseline, erasure_seed(it_seed), opt);
  return run_rlnc_iteration(slice, spec.rlnc, erasure_seed(it_seed), coding_seed(it_seed), opt);
}

inline MetricsRecord aggregate(const std::vector<IterationSummary>& its, std::size_t n_packets) {
  MetricsRecord m;
  m.iterations = its.size();
  m.packets = n_packets;
  double n = 0.0, sum = 0.0, sum_sq = 0.0;
  for (const auto& s : its) {
    m.mean_ppd += s.mean_ppd();
    m.mean_iod += s.mean_iod();
    m.goodput += s.goodput;
    m.completion_time += static_cast<double>(s.completion_time);
    m.failures += s.failed;
    n += static_cast<double>(s.delivered);
    sum += s.sum_iod;
    sum_sq += s.sum_iod_sq;
  }
  const auto k = static_cast<double>(its.size());
  if (k > 0) {
    m.mean_ppd /= k;
    m.mean_iod /= k;
    m.goodput /= k;
    m.completion_time /= k;
  }
  if (n > 1.0) {
    const double mean = sum / n;
    m.iod_stddev = std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)));
  }
  return m;
}

inline RunReport run_report(const RunSpec& spec) {
  spec.validate();
  std::vector<IterationSummary> its(spec.iterations);
  unsigned threads = spec.threads ? spec.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.iterations));
  if (threads <= 1) {
    for (std::size_t i = 0; i < spec.iterations; ++i) its[i] = run_iteration(spec, i);
  } else {
    std::vector<std::future<void>> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < spec.iterations; i += threads) its[i] = run_iteration(spec, i);
      }));
    }
    for (auto& f : workers) f.get();
  }

  RunReport r;
  r.metrics = aggregate(its, spec.n_packets);
  for (const auto& s : its) {
    for (const auto& [d, c] : s.ppd_histogram) r.ppd_histogram[d] += c;
    r.harq.merge(s.harq);
    if (r.harq_expected.size() < s.harq_expected.size()) r.harq_expected.resize(s.harq_expected.size(), 0.0);
    for (std::size_t i = 0; i < s.harq_expected.size(); ++i) r.harq_expected[i] += s.harq_expected[i];
    if (r.missing_dof.size() < s.missing_dof.size()) r.missing_dof.resize(s.missing_dof.size(), 0);
    for (std::size_t i = 0; i < s.missing_dof.size(); ++i) r.missing_dof[i] += s.missing_dof[i];
    r.delivered += s.delivered;
    r.generations_failed += s.generations_failed;
    r.payload_mismatches += s.payload_mismatches;
    r.mean_p_bar += s.p_bar;
    r.links = s.links;
  }
  r.mean_p_bar /= static_cast<double>(its.size());
  r.iterations = std::move(its);
  return r;
}

inline MetricsRecord run(const RunSpec& spec) { return run_report(spec).metrics; }

struct SweepRow {
  std::size_t slicing_index = 0;
  int slice = 1;
  Protocol protocol = Protocol::baseline;
  std::size_t links_in_slice = 0;
  double p_bar = 0.0;
  MetricsRecord metrics;
};

// One row per (index, slice, protocol). Slice 2 rows are skipped when empty.
inline std::vector<SweepRow> run_slicing_sweep(const RunSpec& base, const std::vector<std::size_t>& indices,
                                               const std::vector<Protocol>& protocols
                                               = {Protocol::rlnc, Protocol::baseline},
                                               bool include_slice2 = false) {
  std::vector<SweepRow> rows;
  for (std::size_t idx : indices) {
    if (idx < 1 || idx > base.n_links)
      throw ConfigError("sweep index " + std::to_string(idx) + " outside [1, " +
                        std::to_string(base.n_links) + "]");
    for (int slice = 1; slice <= (include_slice2 ? 2 : 1); ++slice) {
      const std::size_t links = slice == 1 ? idx : base.n_links - idx;
      if (links == 0) continue;
      for (Protocol p : protocols) {
        RunSpec spec = base;
        spec.slicing_index = idx;
        spec.slice = slice;
        spec.protocol = p;
        const RunReport rep = run_report(spec);
        rows.push_back({idx, slice, p, links, rep.mean_p_bar, rep.metrics});
      }
    }
  }
  return rows;
}

}  // namespace ncslice::sim
