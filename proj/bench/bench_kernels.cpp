// Parallel kernels vs the serial reference on a 640x480 frame.
//
//   ./build/bench_kernels --benchmark_filter=dilate

#include "roboaug/kernels.hpp"
#include "roboaug/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace roboaug;

namespace {

constexpr Dims dims{640, 480};

struct Inputs {
    std::vector<std::uint8_t> fg, bg, mask;
    std::vector<double> alpha;

    Inputs()
    {
        Rng rng(7);
        const std::size_t n = dims.area();
        fg.resize(n * 3);
        bg.resize(n * 3);
        for (auto& v : fg)
            v = static_cast<std::uint8_t>(rng.uniform_index(256));
        for (auto& v : bg)
            v = static_cast<std::uint8_t>(rng.uniform_index(256));
        mask.resize(n);
        alpha.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            mask[i] = rng.uniform_index(4) == 0 ? 1 : 0;
            alpha[i] = rng.uniform01();
        }
    }
};

const Inputs& inputs()
{
    static const Inputs in;
    return in;
}

template <bool Parallel>
void BM_select(benchmark::State& state)
{
    const auto& in = inputs();
    std::vector<std::uint8_t> out(in.fg.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::select(in.fg, in.mask, in.bg, out);
        else
            reference::select(in.fg, in.mask, in.bg, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_blend(benchmark::State& state)
{
    const auto& in = inputs();
    std::vector<std::uint8_t> out(in.fg.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::blend(in.fg, in.alpha, in.bg, out);
        else
            reference::blend(in.fg, in.alpha, in.bg, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_dilate(benchmark::State& state)
{
    const auto& in = inputs();
    const int r = static_cast<int>(state.range(0));
    std::vector<std::uint8_t> out(in.mask.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::dilate(in.mask, dims, r, out);
        else
            reference::dilate(in.mask, dims, r, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_box_mean(benchmark::State& state)
{
    const auto& in = inputs();
    const int r = static_cast<int>(state.range(0));
    std::vector<double> out(in.mask.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::box_mean(in.mask, dims, r, out);
        else
            reference::box_mean(in.mask, dims, r, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_or_into(benchmark::State& state)
{
    const auto& in = inputs();
    std::vector<std::uint8_t> acc(in.mask.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::or_into(acc, in.mask);
        else
            reference::or_into(acc, in.mask);
        benchmark::DoNotOptimize(acc.data());
    }
}

template <bool Parallel>
void BM_chroma_key(benchmark::State& state)
{
    const auto& in = inputs();
    std::vector<std::uint8_t> out(in.mask.size());
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::chroma_key(in.fg, {0, 255, 0}, 40, out);
        else
            reference::chroma_key(in.fg, {0, 255, 0}, 40, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_render_scene(benchmark::State& state)
{
    const NoiseScene scene{42, 200, {200, 190, 170}, {150, 140, 130}, {90, 70, 50}, {60, 45, 30}};
    std::vector<std::uint8_t> out(dims.area() * 3);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::render_scene(scene, dims, out);
        else
            reference::render_scene(scene, dims, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_resample(benchmark::State& state)
{
    const auto& in = inputs();
    const Dims dst{320, 240};
    std::vector<std::uint8_t> out(dst.area() * 3);
    const auto mode = state.range(0) == 0 ? Resample::nearest : Resample::bilinear;
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::resample(in.fg, dims, out, dst, {0.5, 0, 0}, mode);
        else
            reference::resample(in.fg, dims, out, dst, {0.5, 0, 0}, mode);
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_select<true>);
BENCHMARK(BM_select<false>);
BENCHMARK(BM_blend<true>);
BENCHMARK(BM_blend<false>);
BENCHMARK(BM_dilate<true>)->Arg(1)->Arg(4)->Arg(8);
BENCHMARK(BM_dilate<false>)->Arg(1)->Arg(4)->Arg(8);
BENCHMARK(BM_box_mean<true>)->Arg(2)->Arg(8);
BENCHMARK(BM_box_mean<false>)->Arg(2)->Arg(8);
BENCHMARK(BM_or_into<true>);
BENCHMARK(BM_or_into<false>);
BENCHMARK(BM_chroma_key<true>);
BENCHMARK(BM_chroma_key<false>);
BENCHMARK(BM_render_scene<true>);
BENCHMARK(BM_render_scene<false>);
BENCHMARK(BM_resample<true>)->Arg(0)->Arg(1);
BENCHMARK(BM_resample<false>)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
