/*
 * Copyright 2026 The reljudge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RELJUDGE_UTIL_H_
#define RELJUDGE_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reljudge {

// Caller supplied a value outside an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input records violate a data invariant (e.g. citations > forwards).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relevance labels are the integers 0 (irrelevant), 1 (partially relevant)
// and 2 (highly relevant).
inline constexpr int kNumLabels = 3;
inline bool IsValidLabel(int label) { return label >= 0 && label < kNumLabels; }
void CheckLabel(int label, std::string_view what);

std::string_view TrimWhitespace(std::string_view s);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);

// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t StableHash(std::string_view data);
std::string HexDigest(std::uint64_t value);

// Deterministic random source. The engine is std::mt19937_64 (fully
// specified by the standard); the distributions below are implemented here
// because the standard library ones are not portable bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t Below(std::uint64_t n);
  double Normal();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Writes `contents` to `path` through a sibling temp file and a rename, so
// readers never observe a partial file.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);
std::string ReadFile(const std::filesystem::path& path);
std::vector<std::string> ReadLines(const std::filesystem::path& path);

}  // namespace reljudge

#endif  // RELJUDGE_UTIL_H_
