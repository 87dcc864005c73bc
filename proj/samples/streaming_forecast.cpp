// Fits PairNet_222 on a synthetic rate series, then forecasts 100 new days
// one at a time, learning from each as it arrives.

#include <cstdio>

#include "pairnet/pairnet.hpp"

using namespace pairnet;

int main() {
  dataio::SynthParams params;
  params.mean = 4.5;
  params.phi = 0.999;
  params.sigma = 0.15;
  params.start = 4.5;
  params.floor = 0.1;
  const auto series = dataio::synth_series(dataio::SynthKind::ar1, 3000, 7, params);
  const auto windowed = dataio::window(series, 3);
  const auto split = dataio::split(windowed, {2800, {100}});

  const auto spec = even_partition(std::vector<double>(3, split.train_min), std::vector<double>(3, split.train_max),
                                   std::vector<std::size_t>{2, 2, 2});
  ModelBank bank = fit_bank(split.train, spec);
  std::printf("trained on %zu samples, %zu of %zu subspaces populated\n", split.train.size(),
              populated_subspaces(bank), bank.locals.size());

  double sse = 0.0;
  for (const auto& day : split.test) {
    const double forecast = predict(bank, day.x).value;
    sse += (forecast - day.y) * (forecast - day.y);
    update(bank, day);
  }
  std::printf("average squared error over %zu streamed days: %.5f\n", split.test.size(),
              sse / static_cast<double>(split.test.size()));

  io::save_model(bank, "streaming_forecast_model.json");
  std::printf("model saved to streaming_forecast_model.json\n");
}
