#include <benchmark/benchmark.h>

#include "chartduel/binomial.hpp"
#include "chartduel/protocol.hpp"
#include "chartduel/series.hpp"
#include "chartduel/store.hpp"
#include "chartduel/synthetic.hpp"

using namespace chartduel;

static void BM_BinomialTail(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(stats::binomial_tail(n, n * 5 / 9));
}
BENCHMARK(BM_BinomialTail)->Arg(35)->Arg(910)->Arg(10'000)->Arg(100'000);

static void BM_BuildSurrogate(benchmark::State& state) {
  const auto data = synthetic::generate("iid", static_cast<std::size_t>(state.range(0)), 1);
  SplitMix64 rng(2);
  for (auto _ : state) {
    const auto perm = series::sample_permutation(data.size(), rng);
    benchmark::DoNotOptimize(series::build_surrogate(data, perm));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildSurrogate)->Arg(80)->Arg(2'000)->Arg(100'000);

static void BM_TickEncodeDecode(benchmark::State& state) {
  protocol::Message m{protocol::Kind::kTick, 17,
                      {{"trial_id", "lynx-s3-t12"}, {"slot", "top"}, {"point_index", 4}, {"price", 101.25}}};
  for (auto _ : state) {
    const auto line = protocol::encode(m);
    benchmark::DoNotOptimize(protocol::decode(line, protocol::Direction::kServerToClient));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TickEncodeDecode);

static void BM_EventCodec(benchmark::State& state) {
  engine::GuessEvent e;
  e.timestamp = 1'700'000'000'000;
  e.contest_id = "lynx";
  e.session_id = "lynx-s3";
  e.subject_id = "alice";
  e.trial_id = "lynx-s3-t12";
  e.choice = engine::Choice::kTop;
  e.outcome = engine::Outcome::kCorrect;
  for (auto _ : state) benchmark::DoNotOptimize(store::decode_event(store::encode_event(e)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EventCodec);
BENCHMARK_MAIN();
