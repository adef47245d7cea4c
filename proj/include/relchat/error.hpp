// Copyright 2026 The relchat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relchat {

// Base of every error the library raises. Callers that do not care about the
// specific failure catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. line() is 1-based; 0 when the failure is not tied
// to a line (e.g. a whole-file JSON document).
class ParseError : public Error {
 public:
  ParseError(const std::string& origin, std::size_t line, const std::string& what)
      : Error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

#define RELCHAT_DEFINE_ERROR(Name)      \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

RELCHAT_DEFINE_ERROR(ConfigError)
RELCHAT_DEFINE_ERROR(DuplicateId)
RELCHAT_DEFINE_ERROR(UnknownSource)
RELCHAT_DEFINE_ERROR(UnknownEntity)
RELCHAT_DEFINE_ERROR(DanglingEdge)
RELCHAT_DEFINE_ERROR(OntologyCycle)
RELCHAT_DEFINE_ERROR(DuplicateDocId)
RELCHAT_DEFINE_ERROR(EmptyText)
RELCHAT_DEFINE_ERROR(OutOfOrderTurn)
RELCHAT_DEFINE_ERROR(NoAntecedent)
RELCHAT_DEFINE_ERROR(SentimentRange)
RELCHAT_DEFINE_ERROR(NoFocusEntity)
RELCHAT_DEFINE_ERROR(NoOpinion)
RELCHAT_DEFINE_ERROR(NoStory)
RELCHAT_DEFINE_ERROR(EmptyPool)
RELCHAT_DEFINE_ERROR(InsufficientData)
RELCHAT_DEFINE_ERROR(MalformedTranscript)
RELCHAT_DEFINE_ERROR(EmptyList)
RELCHAT_DEFINE_ERROR(UnknownSession)
RELCHAT_DEFINE_ERROR(EmptyInput)

#undef RELCHAT_DEFINE_ERROR

class MissingSlot : public Error {
 public:
  explicit MissingSlot(std::string slot)
      : Error("missing slot: " + slot), slot_(std::move(slot)) {}

  const std::string& slot() const { return slot_; }

 private:
  std::string slot_;
};

}  // namespace relchat
