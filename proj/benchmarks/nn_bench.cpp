#include <benchmark/benchmark.h>

#include "headalign/nn/headingnet.hpp"
#include "headalign/random.hpp"

namespace {

using namespace headalign;

nn::Tensor random_input(std::size_t width, Rng& rng) {
  nn::Tensor t({1, nn::kInputRows, width});
  for (double& v : t.values()) v = rng.normal();
  return t;
}

void BM_HeadingNetForward(benchmark::State& state) {
  const int t_align = static_cast<int>(state.range(0));
  const nn::HeadingNet net = nn::HeadingNet::build(t_align, 1);
  Rng rng(2);
  const nn::Tensor h1 = random_input(net.config().input_width(), rng);
  const nn::Tensor h2 = random_input(net.config().input_width(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(h1, h2, false, nullptr));
}
BENCHMARK(BM_HeadingNetForward)->Arg(10)->Arg(30)->Arg(60)->Arg(90)->Arg(120)->Unit(benchmark::kMillisecond);

// One training step's worth of work for a single window.
void BM_HeadingNetForwardBackward(benchmark::State& state) {
  const int t_align = static_cast<int>(state.range(0));
  const nn::HeadingNet net = nn::HeadingNet::build(t_align, 1);
  Rng rng(2);
  const nn::Tensor h1 = random_input(net.config().input_width(), rng);
  const nn::Tensor h2 = random_input(net.config().input_width(), rng);
  std::vector<nn::Tensor> grads = net.zero_grads();
  nn::Tape tape;
  for (auto _ : state) {
    net.forward(h1, h2, true, &rng, &tape);
    net.backward(tape, 1.0, grads);
  }
}
BENCHMARK(BM_HeadingNetForwardBackward)->Arg(10)->Arg(30)->Arg(60)->Arg(90)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace
