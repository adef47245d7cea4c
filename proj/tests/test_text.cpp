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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "relchat/relchat.hpp"

namespace relchat {
namespace {

using Sentences = std::vector<std::string>;

struct SplitCase {
  std::string text;
  Sentences expected;
};

TEST(SentenceSplitter, HandLabeledSuite) {
  const std::vector<SplitCase> cases = {
      {"Dr. Who aired in 1963. It continues.", {"Dr. Who aired in 1963.", "It continues."}},
      {"One sentence only", {"One sentence only"}},
      {"Hello world. Goodbye world.", {"Hello world.", "Goodbye world."}},
      {"Is it? Yes! Fine.", {"Is it?", "Yes!", "Fine."}},
      {"Mr. Smith met Mrs. Jones. They talked.", {"Mr. Smith met Mrs. Jones.", "They talked."}},
      {"Prices rose 3.5 percent. Analysts cheered.", {"Prices rose 3.5 percent.", "Analysts cheered."}},
      {"He said \"Stop.\" Then he left.", {"He said \"Stop.\"", "Then he left."}},
      {"It was cheap (about 5 dollars.) Everyone bought one.",
       {"It was cheap (about 5 dollars.)", "Everyone bought one."}},
      {"Wait... What happened?", {"Wait...", "What happened?"}},
      {"lowercase after. this stays together.", {"lowercase after. this stays together."}},
      {"Compare apples vs. Oranges today. Done.", {"Compare apples vs. Oranges today.", "Done."}},
      {"Use a tool, e.g. A hammer. Then stop.", {"Use a tool, e.g. A hammer.", "Then stop."}},
      {"  Leading and trailing spaces.   Second one.  ", {"Leading and trailing spaces.", "Second one."}},
      {"She lives on St. Mark's Place. Nice!", {"She lives on St. Mark's Place.", "Nice!"}},
      {"Really?! Yes.", {"Really?!", "Yes."}},
  };
  ASSERT_EQ(cases.size(), 15u);
  for (const auto& c : cases) EXPECT_EQ(sentences_of(c.text), c.expected) << c.text;
}

TEST(SentenceSplitter, SpansIndexIntoSource) {
  std::string text = "First one.  Second one! Third?";
  auto spans = split_sentences(text);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[1].view(text), "Second one!");
  EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(FirstSentence, SynopsisOpening) {
  std::string synopsis =
      "The CIA's most dangerous former operative is drawn out of hiding to uncover more explosive truths "
      "about his past. Bourne returns.";
  EXPECT_EQ(first_sentence(synopsis),
            "The CIA's most dangerous former operative is drawn out of hiding to uncover more explosive truths "
            "about his past.");
  EXPECT_EQ(first_sentence("One sentence only"), "One sentence only");
  EXPECT_EQ(first_sentence("Dr. Who aired in 1963. It continues."), "Dr. Who aired in 1963.");
}

TEST(FirstSentence, EmptyTextThrows) {
  EXPECT_THROW(first_sentence(""), EmptyText);
  EXPECT_THROW(first_sentence("  \n "), EmptyText);
}

TEST(FirstSentence, IsPrefixAfterWhitespaceNormalization) {
  for (std::string text : {"A  b.  C d.", "No split here", "Mr. X went.   Y followed.", "Why?\nBecause."}) {
    std::string norm = collapse_whitespace(text);
    std::string first = collapse_whitespace(first_sentence(text));
    EXPECT_EQ(norm.rfind(first, 0), 0u) << text;
  }
}

TEST(Text, NormalizeAndTokenize) {
  EXPECT_EQ(normalize("  The Hitchhiker's   GUIDE!! "), "the hitchhikers guide");
  EXPECT_EQ(tokenize("Jason Bourne, 2016: rated 4/5."),
            (std::vector<std::string>{"jason", "bourne", "2016", "rated", "4", "5"}));
  EXPECT_TRUE(tokenize("?!...").empty());
  EXPECT_EQ(trim("  x y \t"), "x y");
  EXPECT_EQ(collapse_whitespace(" a \n\t b  "), "a b");
}

TEST(Text, EditDistanceAndSimilarity) {
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("same", "same"), 0u);
  EXPECT_DOUBLE_EQ(similarity("abcd", "abcd"), 1.0);
  EXPECT_DOUBLE_EQ(similarity("abcd", "abce"), 0.75);
}

TEST(Text, StableHashIsDeterministic) {
  EXPECT_EQ(stable_hash("opinion:magneto"), stable_hash("opinion:magneto"));
  EXPECT_NE(stable_hash("opinion:magneto"), stable_hash("opinion:aliens"));
}

TEST(Text, WordListSkipsCommentsAndBlanks) {
  auto path = std::filesystem::temp_directory_path() / "relchat_words.txt";
  {
    std::ofstream out(path);
    out << "# header\nThe\n\n  and \n";
  }
  auto words = load_word_list(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(words.size(), 2u);
  EXPECT_TRUE(words.count("the"));
  EXPECT_TRUE(words.count("and"));
}

TEST(Acts, NamesRoundTrip) {
  for (const auto& [act, name] : detail::kActNames) {
    EXPECT_EQ(to_string(act), name);
    EXPECT_EQ(parse_act(name), act);
  }
  for (const auto& [rel, name] : detail::kRelationNames) EXPECT_EQ(parse_relation(name), rel);
  EXPECT_EQ(parse_source("search"), ContentSource::search);
  EXPECT_EQ(parse_speaker("system"), Speaker::system);
  EXPECT_THROW(parse_act("SHOUTING"), Error);
}

TEST(Acts, QuestionActs) {
  EXPECT_TRUE(is_question(DialogueAct::WHY_QUESTION));
  EXPECT_TRUE(is_question(DialogueAct::YN_QUESTION));
  EXPECT_FALSE(is_question(DialogueAct::AGREEMENT));
}

}  // namespace
}  // namespace relchat
