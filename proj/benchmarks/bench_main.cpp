#include <benchmark/benchmark.h>

#include <cmath>

#include "udw/detector_dynamics.hpp"
#include "udw/gaussian_state.hpp"
#include "udw/quadrature.hpp"
#include "udw/response.hpp"
#include "udw/teleport.hpp"

namespace {

void BM_AdaptiveOscillatory(benchmark::State& state) {
  auto f = [](double s) { return s == 0.0 ? 10.0 : std::sin(10.0 * s) / s; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(udw::integrate(f, 0.0, 50.0).value);
  }
}
BENCHMARK(BM_AdaptiveOscillatory);

void BM_TransitionRateUniform(benchmark::State& state) {
  const udw::WightmanKernel k4(4);
  const udw::Worldline hyp = udw::Worldline::uniform_acceleration(4, 6.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        udw::transition_rate(4, hyp, 2.3, 0.0, 12.0, k4).value);
  }
}
BENCHMARK(BM_TransitionRateUniform);

void BM_ResponseFunctionD4(benchmark::State& state) {
  const udw::WightmanKernel k4(4);
  const udw::Worldline hyp = udw::Worldline::uniform_acceleration(4, 2.0);
  const udw::SwitchingFunction chi(0.0, 2.0, 0.1);
  udw::QuadratureOptions opt;
  opt.rel_tol = 1e-6;
  opt.abs_tol = 1e-9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        udw::response_function(4, chi, hyp, 1.5, k4, opt));
  }
}
BENCHMARK(BM_ResponseFunctionD4);

void BM_SelfNoiseSeries(benchmark::State& state) {
  const udw::DetectorParams p = udw::DetectorParams::from_omega(2.3, 1e-3);
  const udw::Worldline hyp = udw::Worldline::uniform_acceleration(4, 6.0);
  const double eta_max = static_cast<double>(state.range(0));
  for (auto _ : state) {
    udw::SelfNoise noise(p, hyp, eta_max);
    benchmark::DoNotOptimize(noise.at(eta_max));
  }
}
BENCHMARK(BM_SelfNoiseSeries)->Arg(100)->Arg(1000);

void BM_LogNegativity(benchmark::State& state) {
  const udw::GaussianState tms =
      udw::GaussianState::two_mode_squeezed("a", "b", 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(udw::log_negativity(tms, {"a"}));
  }
}
BENCHMARK(BM_LogNegativity);

void BM_TeleportMoment(benchmark::State& state) {
  udw::TeleportScenario sc;
  sc.a = 1.0;
  sc.b = 2.0;
  sc.r1 = 0.7;
  sc.detector = udw::DetectorParams::from_omega(2.3, 0.02);
  sc.t1_grid = {5.0};
  const udw::TeleportEngine eng(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eng.moment(3.0, 2.0).f_av);
  }
}
BENCHMARK(BM_TeleportMoment);

}  // namespace

BENCHMARK_MAIN();
