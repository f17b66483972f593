#pragma once

// Shared plumbing: error types, a dense row-major matrix, content
// fingerprints, and a deterministic chunked parallel loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace topicflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// User-supplied configuration or input is unusable.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage was invoked before its predecessor produced its artifact.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Runs fn(begin, end, chunk_index) over n_threads contiguous chunks of
// [0, n). Chunk boundaries depend only on (n, n_threads), so per-chunk
// results merged in chunk order are reproducible. n_threads <= 1 runs inline.
inline void parallel_chunks(std::size_t n, unsigned n_threads,
                            const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
  if (n == 0) return;
  if (n_threads == 0) n_threads = 1;
  if (n_threads > n) n_threads = static_cast<unsigned>(n);
  if (n_threads == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  const std::size_t base = n / n_threads;
  const std::size_t rem = n % n_threads;
  std::size_t begin = 0;
  for (unsigned t = 0; t < n_threads; ++t) {
    const std::size_t len = base + (t < rem ? 1 : 0);
    const std::size_t end = begin + len;
    workers.emplace_back([&fn, begin, end, t] { fn(begin, end, t); });
    begin = end;
  }
  for (auto& w : workers) w.join();
}

}  // namespace topicflow
