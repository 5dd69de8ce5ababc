#include <superdiff/eval.hpp>
#include <superdiff/experiments.hpp>
#include <superdiff/spectral.hpp>
#include <superdiff/train.hpp>
#include <superdiff_tools/synth.hpp>

#include <benchmark/benchmark.h>

namespace sd = superdiff;

namespace {

sd::ImageSample sample_image(int rows, int cols) {
  sd::tools::SynthParams p;
  p.rows = rows;
  p.cols = cols;
  const auto img = sd::tools::synth_image(p, 0);
  return {"bench", img.pixels, img.mask, {}};
}

const sd::SuperpixelSegmentation& default_segmentation() {
  static const sd::SuperpixelSegmentation seg = sd::segment(sample_image(150, 200));
  return seg;
}

}  // namespace

static void BM_Segment(benchmark::State& state) {
  const auto sample = sample_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0) * 4 / 3));
  for (auto _ : state) benchmark::DoNotOptimize(sd::segment(sample));
  state.SetItemsProcessed(state.iterations() * sample.pixels.rows * sample.pixels.cols);
}
BENCHMARK(BM_Segment)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_Decompose(benchmark::State& state) {
  sd::SlicParams params;
  params.n_target = static_cast<int>(state.range(0));
  const auto seg = sd::segment(sample_image(300, 400), params);
  const auto g = sd::build_graph(seg, sd::ColorSpace::Lab, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(sd::decompose_rw_tilde(g));
  state.counters["nodes"] = seg.n_nodes;
}
BENCHMARK(BM_Decompose)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_ColumnBank(benchmark::State& state) {
  const auto& seg = default_segmentation();
  sd::GridSettings grid;
  for (auto _ : state) benchmark::DoNotOptimize(sd::build_column_bank(seg, grid));
}
BENCHMARK(BM_ColumnBank)->Unit(benchmark::kMillisecond);

static void BM_AdaptedOmp(benchmark::State& state) {
  const auto& seg = default_segmentation();
  const sd::Matrix a = sd::comparison_matrix(seg, sd::MatrixChoice::Refined, {});
  sd::Vector gt = sd::Vector::Zero(seg.n_nodes);
  for (int i = 0; i < seg.n_nodes; i += 3) gt(i) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(sd::adapted_omp(a, gt));
}
BENCHMARK(BM_AdaptedOmp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
