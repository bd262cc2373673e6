// Copyright 2026 The MSASB Vocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

namespace msasb {

// Real-input DFT of a fixed power-of-two size backed by FFTW. Owns its
// aligned buffers and both plans. Not thread-safe per instance; use
// RealFftFor() to get a per-thread instance.
class RealFft {
 public:
  explicit RealFft(std::size_t size) : size_(size) {
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * size_));
    spectrum_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * bins()));
    // FFTW's planner is not reentrant.
    std::lock_guard<std::mutex> lock(PlannerMutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), real_, spectrum_,
                                    FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), spectrum_, real_,
                                    FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  ~RealFft() {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spectrum_);
  }

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  std::span<double> time() { return {real_, size_}; }
  std::span<std::complex<double>> freq() {
    return {reinterpret_cast<std::complex<double>*>(spectrum_), bins()};
  }

  // time() -> freq()
  void Forward() { fftw_execute(forward_); }

  // freq() -> time(), scaled by 1/size so Inverse(Forward(x)) == x.
  // Clobbers freq().
  void Inverse() {
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) real_[i] *= scale;
  }

 private:
  static std::mutex& PlannerMutex() {
    static std::mutex mutex;
    return mutex;
  }

  std::size_t size_;
  double* real_ = nullptr;
  fftw_complex* spectrum_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline RealFft& RealFftFor(std::size_t size) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[size];
  if (!slot) slot = std::make_unique<RealFft>(size);
  return *slot;
}

constexpr bool IsPowerOfTwo(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace msasb
