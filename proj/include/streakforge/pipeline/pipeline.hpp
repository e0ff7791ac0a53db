#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "streakforge/corpus.hpp"
#include "streakforge/impact.hpp"
#include "streakforge/pipeline/config.hpp"

namespace streakforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Stage names in execution order.
inline const std::vector<std::string> kStages{"ingest", "detect", "classify", "metrics", "fit", "stats", "report"};

struct RunResult {
  int exit_code = kExitOk;
  std::string failed_stage;
  std::string message;
  std::size_t authors = 0;
};

/// Runs the named stages (any of kStages, or "all"); every stage loads the
/// corpus through the on-disk cache first. Writes outputs and manifest.json
/// under config.out_dir. Errors are reported through the result, not thrown.
RunResult run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages);

struct PreparedCorpus {
  CorpusStore store;
  FieldYearBaseline baseline;
  bool from_cache = false;
};

/// Ingest, C10, fields, filter and normalization, with the snapshot cache
/// under out_dir/cache (set use_cache = false to bypass it).
PreparedCorpus prepare_corpus(const PipelineConfig& config, bool use_cache = true);

/// Impact values handed to the pulse fitter: log10(c10_norm + 1) or linear.
std::vector<double> fit_input(const AuthorCareer& career, ImpactScale scale);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception by index is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t count = std::min(workers, n);
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace streakforge
