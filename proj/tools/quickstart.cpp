// Minimal tour of the library: code one generation by hand, then simulate
// both schemes on a small slice and print the closed-form predictions next
// to the measured values.

#include <cstdio>
#include <string>

#include "ncslice/ncslice.hpp"

using namespace ncslice;

int main() {
  const std::uint64_t seed = 2024;

  rlnc::Generation gen(7, 4);
  for (std::string s : {"alpha", "bravo", "charlie", "delta"}) gen.add({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  gen.seal();

  rlnc::DecoderState dec(7, 4, gen.payload_length(), seed);
  std::uint32_t seq = 0;
  while (!dec.complete()) {
    const auto wire = rlnc::encode(gen, seq++, seed).to_wire();
    dec.ingest(rlnc::CodedPacket::from_wire(wire));
  }
  std::printf("decoded after %u coded packets:", seq);
  for (const auto& p : dec.extract()) std::printf(" %s", std::string(p.begin(), p.end()).c_str());
  std::printf("\n\n");

  sim::RunSpec spec;
  spec.channel = channel::ChannelSpec::fixed(16, 0.1);
  spec.n_links = 4;
  spec.slicing_index = 4;
  spec.n_packets = 20'000;
  spec.iterations = 2;
  spec.rlnc = protocols::RlncConfig::for_erasure(0.1, 5);

  for (auto proto : {sim::Protocol::rlnc, sim::Protocol::baseline}) {
    spec.protocol = proto;
    const auto m = sim::run(spec);
    std::printf("%-8s ppd %.2f  iod %.2f (sd %.2f)  goodput %.3f  failures %zu\n", sim::to_string(proto).c_str(),
                m.mean_ppd, m.mean_iod, m.iod_stddev, m.goodput, m.failures);
  }

  const analytic::RlncAnalyticInputs in{5, spec.rlnc.fec_rate, spec.rlnc.fb_rate, 0.1, 4, 16};
  const auto base = analytic::baseline_delay_pmf(0.1, 16);
  std::printf("\nmodel:   rlnc delay %.2f  rlnc goodput %.3f  baseline delay %.2f  baseline goodput %.3f\n",
              analytic::rlnc_expected_delay(in), analytic::rlnc_expected_goodput(in), base.mean_delivered(),
              analytic::baseline_expected_goodput({0.1, 0.1, 0.1, 0.1}, analytic::attempt_mix(0.1)));
  return 0;
}
