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

// Tag grammar for judge outputs.
//
// A turn is a fixed sequence of tagged fields such as
//
//   <think> ... </think>
//   <extract> ... </extract>
//   <score> 2 </score>
//
// Whitespace is allowed before, between and after the tags and is trimmed
// from field bodies. Every tag of the grammar must occur exactly once, in
// order, with nothing but whitespace around it. The first closing tag ends a
// field, so field bodies cannot contain the tag strings themselves.

#ifndef RELJUDGE_TAGPARSE_H_
#define RELJUDGE_TAGPARSE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace reljudge {

enum class ParseFailureKind {
  kMissingTag,       // a required open or close tag never occurs
  kDuplicateTag,     // a required open or close tag occurs more than once
  kWrongOrder,       // tags out of sequence, nested, or separated by text
  kTrailingContent,  // non-whitespace after the final closing tag
  kBadScoreToken,    // score body is not exactly 0, 1 or 2
  kEmptyField,       // a field body is empty after trimming
};

std::string_view ToString(ParseFailureKind kind);

struct ParseFailure {
  ParseFailureKind kind;
  std::size_t position = 0;  // byte offset where the violation was detected
  std::string tag;           // tag involved, when there is one

  std::string Describe() const;
  bool operator==(const ParseFailure&) const = default;
};

template <typename T>
class ParseResult {
 public:
  ParseResult(T value) : state_(std::move(value)) {}  // NOLINT
  ParseResult(ParseFailure failure) : state_(std::move(failure)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }
  const T& value() const { return std::get<T>(state_); }
  const T& operator*() const { return value(); }
  const T* operator->() const { return &value(); }
  const ParseFailure& failure() const { return std::get<ParseFailure>(state_); }

 private:
  std::variant<T, ParseFailure> state_;
};

// The extract field: a verbatim fragment of the candidate document, or the
// none-sentinel when the document holds nothing relevant.
class Extraction {
 public:
  static Extraction None() { return Extraction(); }
  static Extraction Fragment(std::string text) {
    Extraction e;
    e.fragment_ = std::move(text);
    return e;
  }

  bool is_none() const { return !fragment_.has_value(); }
  const std::string& fragment() const { return fragment_.value(); }
  bool operator==(const Extraction&) const = default;

 private:
  std::optional<std::string> fragment_;
};

// Rendered spelling of the none-sentinel. Parsing accepts any casing.
inline constexpr std::string_view kNoneSentinel = "none";

struct Round1Output {
  std::string think;
  std::string intent;
  bool operator==(const Round1Output&) const = default;
};

struct Round2Output {
  std::string think;
  Extraction extract;
  int score = 0;
  bool operator==(const Round2Output&) const = default;
};

ParseResult<Round1Output> ParseRound1(std::string_view text);
ParseResult<Round2Output> ParseRound2(std::string_view text);

// True iff `extract` is the none-sentinel, or its text (with outer whitespace
// trimmed) occurs byte-for-byte as a contiguous substring of `document`.
bool ValidateExtract(const Extraction& extract, std::string_view document);

std::string RenderRound1(const Round1Output& out);
std::string RenderRound2(const Round2Output& out);

// --- Generic grammar, used by the ablation protocols. ---

enum class Tag { kThink, kIntent, kExtract, kScore };
std::string_view TagName(Tag tag);

struct TurnFields {
  std::string think;
  std::optional<std::string> intent;
  std::optional<Extraction> extract;
  std::optional<int> score;
  bool operator==(const TurnFields&) const = default;
};

// Parses `text` against the ordered tag list `grammar`. Fields whose tag is
// not in the grammar are left empty.
ParseResult<TurnFields> ParseTurn(std::string_view text,
                                  std::span<const Tag> grammar);
std::string RenderTurn(const TurnFields& fields, std::span<const Tag> grammar);

// Interaction protocol. kTwoRound is the full method; the others are the
// ablations: no intent tag, no extract tag, and one combined round.
// Removing the auxiliary documents is an input change, not a protocol.
enum class Protocol { kTwoRound, kNoIntent, kNoExtract, kSingleRound };

std::string_view ToString(Protocol protocol);
Protocol ProtocolFromString(std::string_view name);

std::vector<Tag> Round1Grammar(Protocol protocol);
// Empty for kSingleRound.
std::vector<Tag> Round2Grammar(Protocol protocol);

}  // namespace reljudge

#endif  // RELJUDGE_TAGPARSE_H_
