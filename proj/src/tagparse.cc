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

#include "reljudge/tagparse.h"

#include <array>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

std::string_view ToString(ParseFailureKind kind) {
  switch (kind) {
    case ParseFailureKind::kMissingTag:
      return "MissingTag";
    case ParseFailureKind::kDuplicateTag:
      return "DuplicateTag";
    case ParseFailureKind::kWrongOrder:
      return "WrongOrder";
    case ParseFailureKind::kTrailingContent:
      return "TrailingContent";
    case ParseFailureKind::kBadScoreToken:
      return "BadScoreToken";
    case ParseFailureKind::kEmptyField:
      return "EmptyField";
  }
  return "Unknown";
}

std::string ParseFailure::Describe() const {
  if (tag.empty()) return fmt::format("{} at {}", ToString(kind), position);
  return fmt::format("{} <{}> at {}", ToString(kind), tag, position);
}

std::string_view TagName(Tag tag) {
  switch (tag) {
    case Tag::kThink:
      return "think";
    case Tag::kIntent:
      return "intent";
    case Tag::kExtract:
      return "extract";
    case Tag::kScore:
      return "score";
  }
  return "";
}

namespace {

constexpr std::array<Tag, 2> kRound1Tags = {Tag::kThink, Tag::kIntent};
constexpr std::array<Tag, 3> kRound2Tags = {Tag::kThink, Tag::kExtract,
                                            Tag::kScore};

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::size_t SkipSpace(std::string_view text, std::size_t pos) {
  while (pos < text.size() && IsSpace(text[pos])) ++pos;
  return pos;
}

std::string OpenTag(Tag tag) { return fmt::format("<{}>", TagName(tag)); }
std::string CloseTag(Tag tag) { return fmt::format("</{}>", TagName(tag)); }

// Checks the exactly-once rule for one marker. Returns a failure or nullopt.
std::optional<ParseFailure> CheckOnce(std::string_view text,
                                      std::string_view marker, Tag tag) {
  const std::size_t first = text.find(marker);
  if (first == std::string_view::npos) {
    return ParseFailure{ParseFailureKind::kMissingTag, text.size(),
                        std::string(TagName(tag))};
  }
  const std::size_t second = text.find(marker, first + 1);
  if (second != std::string_view::npos) {
    return ParseFailure{ParseFailureKind::kDuplicateTag, second,
                        std::string(TagName(tag))};
  }
  return std::nullopt;
}

std::optional<int> ParseScoreToken(std::string_view body) {
  if (body == "0") return 0;
  if (body == "1") return 1;
  if (body == "2") return 2;
  return std::nullopt;
}

}  // namespace

ParseResult<TurnFields> ParseTurn(std::string_view text,
                                  std::span<const Tag> grammar) {
  for (Tag tag : grammar) {
    if (auto f = CheckOnce(text, OpenTag(tag), tag)) return *f;
    if (auto f = CheckOnce(text, CloseTag(tag), tag)) return *f;
  }

  TurnFields fields;
  std::size_t pos = SkipSpace(text, 0);
  for (Tag tag : grammar) {
    const std::string open = OpenTag(tag);
    const std::string close = CloseTag(tag);
    const std::string name(TagName(tag));
    if (text.compare(pos, open.size(), open) != 0) {
      return ParseFailure{ParseFailureKind::kWrongOrder, pos, name};
    }
    const std::size_t body_start = pos + open.size();
    const std::size_t close_pos = text.find(close, body_start);
    if (close_pos == std::string_view::npos) {
      return ParseFailure{ParseFailureKind::kWrongOrder, body_start, name};
    }
    const std::string_view body =
        TrimWhitespace(text.substr(body_start, close_pos - body_start));
    if (body.empty()) {
      return ParseFailure{ParseFailureKind::kEmptyField, body_start, name};
    }
    switch (tag) {
      case Tag::kThink:
        fields.think = std::string(body);
        break;
      case Tag::kIntent:
        fields.intent = std::string(body);
        break;
      case Tag::kExtract:
        fields.extract = EqualsIgnoreCase(body, kNoneSentinel)
                             ? Extraction::None()
                             : Extraction::Fragment(std::string(body));
        break;
      case Tag::kScore: {
        auto score = ParseScoreToken(body);
        if (!score) {
          return ParseFailure{ParseFailureKind::kBadScoreToken, body_start,
                              name};
        }
        fields.score = *score;
        break;
      }
    }
    pos = SkipSpace(text, close_pos + close.size());
  }
  if (pos != text.size()) {
    return ParseFailure{ParseFailureKind::kTrailingContent, pos, {}};
  }
  return fields;
}

std::string RenderTurn(const TurnFields& fields,
                       std::span<const Tag> grammar) {
  std::string out;
  for (Tag tag : grammar) {
    std::string body;
    switch (tag) {
      case Tag::kThink:
        body = fields.think;
        break;
      case Tag::kIntent:
        body = fields.intent.value_or("");
        break;
      case Tag::kExtract:
        if (!fields.extract || fields.extract->is_none()) {
          body = std::string(kNoneSentinel);
        } else {
          body = fields.extract->fragment();
        }
        break;
      case Tag::kScore:
        body = std::to_string(fields.score.value_or(0));
        break;
    }
    out += OpenTag(tag);
    out += body;
    out += CloseTag(tag);
  }
  return out;
}

ParseResult<Round1Output> ParseRound1(std::string_view text) {
  auto parsed = ParseTurn(text, kRound1Tags);
  if (!parsed) return parsed.failure();
  return Round1Output{parsed->think, *parsed->intent};
}

ParseResult<Round2Output> ParseRound2(std::string_view text) {
  auto parsed = ParseTurn(text, kRound2Tags);
  if (!parsed) return parsed.failure();
  return Round2Output{parsed->think, *parsed->extract, *parsed->score};
}

bool ValidateExtract(const Extraction& extract, std::string_view document) {
  if (extract.is_none()) return true;
  const std::string_view fragment = TrimWhitespace(extract.fragment());
  if (fragment.empty()) return false;
  return document.find(fragment) != std::string_view::npos;
}

std::string RenderRound1(const Round1Output& out) {
  TurnFields fields;
  fields.think = out.think;
  fields.intent = out.intent;
  return RenderTurn(fields, kRound1Tags);
}

std::string RenderRound2(const Round2Output& out) {
  TurnFields fields;
  fields.think = out.think;
  fields.extract = out.extract;
  fields.score = out.score;
  return RenderTurn(fields, kRound2Tags);
}

std::string_view ToString(Protocol protocol) {
  switch (protocol) {
    case Protocol::kTwoRound:
      return "two-round";
    case Protocol::kNoIntent:
      return "no-intent";
    case Protocol::kNoExtract:
      return "no-extract";
    case Protocol::kSingleRound:
      return "single-round";
  }
  return "";
}

Protocol ProtocolFromString(std::string_view name) {
  for (Protocol p : {Protocol::kTwoRound, Protocol::kNoIntent,
                     Protocol::kNoExtract, Protocol::kSingleRound}) {
    if (ToString(p) == name) return p;
  }
  throw InputError(fmt::format("unknown protocol '{}'", name));
}

std::vector<Tag> Round1Grammar(Protocol protocol) {
  switch (protocol) {
    case Protocol::kTwoRound:
    case Protocol::kNoExtract:
      return {Tag::kThink, Tag::kIntent};
    case Protocol::kNoIntent:
      return {Tag::kThink};
    case Protocol::kSingleRound:
      return {Tag::kThink, Tag::kIntent, Tag::kExtract, Tag::kScore};
  }
  return {};
}

std::vector<Tag> Round2Grammar(Protocol protocol) {
  switch (protocol) {
    case Protocol::kTwoRound:
    case Protocol::kNoIntent:
      return {Tag::kThink, Tag::kExtract, Tag::kScore};
    case Protocol::kNoExtract:
      return {Tag::kThink, Tag::kScore};
    case Protocol::kSingleRound:
      return {};
  }
  return {};
}

}  // namespace reljudge
