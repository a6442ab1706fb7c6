// Benchmark: serial reference vs OpenMP batch kernels on a synthetic corpus.
//
// Usage: atex_bench [sentences] [tokens_per_sentence] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "atex/batch.hpp"
#include "atex/deptree.hpp"
#include "atex/model.hpp"
#include "atex/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

atex::Dataset synthetic_dataset(int sentences, int tokens, atex::Rng& rng,
                                const std::vector<std::string>& vocab) {
  atex::Dataset data;
  for (int s = 0; s < sentences; ++s) {
    atex::DataSentence ds;
    ds.sentence_id = "bench-" + std::to_string(s);
    for (int t = 0; t < tokens; ++t) {
      ds.tokens.push_back(vocab[rng.below(vocab.size())]);
      ds.labels.push_back(atex::Label::O);
      ds.upos.emplace_back(atex::kUposTags[rng.below(atex::kUposTags.size())]);
      ds.levels.push_back(static_cast<int>(rng.below(8)));
    }
    data.push_back(std::move(ds));
  }
  return data;
}

template <class Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int sentences = argc > 1 ? std::atoi(argv[1]) : 256;
  const int tokens = argc > 2 ? std::atoi(argv[2]) : 14;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

  std::vector<std::string> vocab;
  for (int i = 0; i < 500; ++i) vocab.push_back("w" + std::to_string(i));

  atex::Rng rng(7);
  const atex::Dataset data = synthetic_dataset(sentences, tokens, rng, vocab);

  atex::ModelConfig mcfg;
  mcfg.position_mode = atex::PositionMode::tree;
  const atex::TaggerModel model = atex::build_model(mcfg, vocab);

  std::printf("decode benchmark: %d sentences x %d tokens, H=%d, D_in=%d, best of %d\n",
              sentences, tokens, mcfg.hidden_dim, mcfg.input_dim(), repeats);

  std::vector<atex::Prediction> serial_out, parallel_out;
  const double serial = best_of(repeats, [&] {
    serial_out = atex::predict_batch_serial(model, data);
  });
  std::printf("  %-22s %8.3f s\n", "predict serial", serial);

  const int max_threads = omp_get_max_threads();
  for (int jobs = 1; jobs <= max_threads; jobs *= 2) {
    const double parallel = best_of(repeats, [&] {
      parallel_out = atex::predict_batch(model, data, nullptr, jobs);
    });
    bool identical = parallel_out.size() == serial_out.size();
    for (std::size_t i = 0; identical && i < serial_out.size(); ++i) {
      identical = serial_out[i].labels == parallel_out[i].labels;
    }
    std::printf("  predict omp x%-2d        %8.3f s  speedup %5.2f  %s\n", jobs, parallel,
                serial / parallel, identical ? "outputs identical" : "OUTPUT MISMATCH");
    if (!identical) return 1;
  }

  const double loss_serial = best_of(repeats, [&] {
    (void)atex::dataset_loss_serial(model, data);
  });
  std::printf("  %-22s %8.3f s\n", "loss serial", loss_serial);
  const double loss_parallel = best_of(repeats, [&] {
    (void)atex::dataset_loss(model, data, nullptr, max_threads);
  });
  std::printf("  loss omp x%-2d           %8.3f s  speedup %5.2f\n", max_threads,
              loss_parallel, loss_serial / loss_parallel);
  return 0;
}
