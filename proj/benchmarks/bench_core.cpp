// Microbenchmarks for the training-loop hot path at MNIST shapes:
// 784-256-10 network, batches of 128.
#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "srt/dataset.hpp"
#include "srt/mlp.hpp"
#include "srt/rng.hpp"
#include "srt/selection.hpp"
#include "srt/transform.hpp"

namespace {

using namespace srt;

constexpr Eigen::Index kIn = 784;
constexpr Eigen::Index kHidden = 256;
constexpr Eigen::Index kClasses = 10;
constexpr Eigen::Index kBatch = 128;

SampleMatrix random_batch(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    RngStream rng(mix_seed(seed));
    SampleMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform_real(0.0, 1.0);
    return m;
}

Eigen::MatrixXd random_one_hot(Eigen::Index rows, std::uint64_t seed) {
    RngStream rng(mix_seed(seed));
    Eigen::MatrixXd labels = Eigen::MatrixXd::Zero(rows, kClasses);
    for (Eigen::Index i = 0; i < rows; ++i)
        labels(i, Eigen::Index(rng.uniform_int(0, std::int64_t(kClasses) - 1))) = 1.0;
    return labels;
}

void BM_forward(benchmark::State& state) {
    const ModelParams params = init_params(kIn, kHidden, kClasses, 1);
    const SampleMatrix x = random_batch(kBatch, kIn, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_log_proba(params, x));
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_forward);

void BM_loss_and_grad(benchmark::State& state) {
    const ModelParams params = init_params(kIn, kHidden, kClasses, 1);
    const SampleMatrix plain = random_batch(kBatch, kIn, 2);
    const ViewPair views{random_batch(kBatch, kIn, 3), random_batch(kBatch, kIn, 4)};
    const Eigen::MatrixXd labels = random_one_hot(kBatch, 5);
    Gradients grads;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loss_and_grad(params, plain, views, labels, 0.9, grads));
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_loss_and_grad);

void BM_view_pair(benchmark::State& state) {
    const SampleMatrix x = random_batch(kBatch, kIn, 2);
    const TransformSpec spec = TransformSpec::mnist();
    RngStream rng(mix_seed(7));
    for (auto _ : state) {
        benchmark::DoNotOptimize(make_view_pair(x, spec, rng));
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_view_pair);

void BM_acquisition(benchmark::State& state) {
    const auto members = state.range(0);
    SnapshotBuffer buffer(static_cast<std::size_t>(members));
    for (int k = 1; k <= members; ++k)
        buffer.push(ParameterSnapshot{init_params(kIn, kHidden, kClasses, std::uint64_t(k)), k});

    MiniBatch batch;
    batch.indices.resize(std::size_t(kBatch));
    std::iota(batch.indices.begin(), batch.indices.end(), Eigen::Index(0));
    batch.features = random_batch(kBatch, kIn, 2);
    batch.labels = random_one_hot(kBatch, 5);

    const AcquisitionConfig cfg;
    const TransformSpec spec = TransformSpec::mnist();
    RngStream rng(mix_seed(9));
    for (auto _ : state) {
        benchmark::DoNotOptimize(acquisition(batch, buffer, cfg, spec, rng));
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_acquisition)->Arg(1)->Arg(2)->Arg(4);

void BM_filter_batch(benchmark::State& state) {
    MiniBatch batch;
    batch.indices.resize(std::size_t(kBatch));
    std::iota(batch.indices.begin(), batch.indices.end(), Eigen::Index(0));
    batch.features = random_batch(kBatch, kIn, 2);
    batch.labels = random_one_hot(kBatch, 5);

    RngStream rng(mix_seed(11));
    std::vector<AcquisitionScore> scores(static_cast<std::size_t>(kBatch));
    for (Eigen::Index i = 0; i < kBatch; ++i) {
        scores[std::size_t(i)].sample_index = i;
        scores[std::size_t(i)].value = rng.uniform_real(0.0, 3.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(filter_batch(batch, scores, 0.5));
    }
    state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_filter_batch);

} // namespace

BENCHMARK_MAIN();
