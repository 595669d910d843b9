#include "destructure/text.h"

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "destructure/error.h"
#include "test_support.h"

namespace destructure {
namespace {

TokenList toks(std::initializer_list<const char*> words) { return TokenList(words.begin(), words.end()); }

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("The cat sat."), toks({"the", "cat", "sat"}));
  EXPECT_EQ(tokenize(""), TokenList{});
  EXPECT_EQ(tokenize("TextRank-based, 2-step"), toks({"textrank", "based", "2", "step"}));
}

TEST(Tokenize, KeepsUnicodeLetters) {
  EXPECT_EQ(tokenize("Émile visited Zürich «twice»!"), toks({"émile", "visited", "zürich", "twice"}));
  EXPECT_EQ(tokenize("naïve café"), toks({"naïve", "café"}));
}

TEST(Tokenize, InvalidUtf8IsASeparator) {
  EXPECT_EQ(tokenize(std::string("ab\xff" "cd")), toks({"ab", "cd"}));
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "aZ9 .,-!?'\tQx";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const auto len = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    const auto once = tokenize(text);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(tokenize(joined), once) << text;
  }
}

TEST(SegmentSentences, SplitsOnTerminators) {
  const auto two = segment_sentences("A cat. A dog!");
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], Sentence(0, "A cat."));
  EXPECT_EQ(two[1], Sentence(1, "A dog!"));

  const auto one = segment_sentences("No terminator");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].text, "No terminator");

  EXPECT_EQ(segment_sentences("Hi! Bye? Ok.").size(), 3u);
}

TEST(SegmentSentences, TerminatorMustBeFollowedBySpace) {
  const auto s = segment_sentences("Version 2.5 shipped. Done");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "Version 2.5 shipped.");
  EXPECT_TRUE(segment_sentences("   \n ").empty());
}

TEST(ParseSectionedDocument, AssignsGlobalIds) {
  const auto doc = parse_sectioned_document("== A ==\nOne. Two.\n== B ==\nThree.", "d");
  ASSERT_EQ(doc.sections.size(), 2u);
  EXPECT_EQ(doc.sections[0].title, "A");
  EXPECT_EQ(doc.sections[0].sentence_ids, (std::vector<SentenceId>{0, 1}));
  EXPECT_EQ(doc.sections[1].title, "B");
  EXPECT_EQ(doc.sections[1].sentence_ids, (std::vector<SentenceId>{2}));
  EXPECT_EQ(doc.sentences[2].text, "Three.");
}

TEST(ParseSectionedDocument, JoinsBodyLines) {
  const auto doc = parse_sectioned_document("== A ==\nThe first\nline ends here.\n\nNext one.", "d");
  ASSERT_EQ(doc.sentences.size(), 2u);
  EXPECT_EQ(doc.sentences[0].text, "The first line ends here.");
}

TEST(ParseSectionedDocument, Errors) {
  try {
    parse_sectioned_document("no headings here.", "d");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSections);
  }
  try {
    parse_sectioned_document("== A ==\n\n== B ==\nX.", "d");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySection);
  }
}

TEST(ParseSectionedDocument, LeadTextBecomesUntitledSection) {
  const auto doc = parse_sectioned_document("Intro text.\n== A ==\nBody.", "d");
  ASSERT_EQ(doc.sections.size(), 2u);
  EXPECT_EQ(doc.sections[0].title, "");
  EXPECT_EQ(doc.sections[1].sentence_ids, (std::vector<SentenceId>{1}));
}

TEST(ParseJsonl, ReadsCorpusAndRejectsGarbage) {
  const auto corpus = parse_jsonl_corpus(
      R"({"doc_id": "x", "sections": [{"title": "T", "sentences": ["One.", "Two."]}, {"title": "U", "sentences": ["Three."]}]})"
      "\n\n"
      R"({"doc_id": "y", "sections": [{"title": "V", "sentences": ["Four."]}]})");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].sections[1].sentence_ids, (std::vector<SentenceId>{2}));
  EXPECT_EQ(corpus[1].sentences[0].tokens, toks({"four"}));

  EXPECT_THROW(parse_jsonl_corpus("{not json}"), Error);
  EXPECT_THROW(parse_jsonl_corpus(R"({"doc_id": 3, "sections": []})"), Error);
  try {
    parse_jsonl_corpus(R"({"doc_id": "z", "sections": [{"title": "E", "sentences": []}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySection);
  }
}

TEST(ParseJsonl, RoundTripsThroughSerializer) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto doc = testing::random_document(rng, "doc" + std::to_string(i));
    const auto back = parse_jsonl_corpus(document_to_jsonl(doc));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].sections, doc.sections);
    EXPECT_EQ(back[0].sentences, doc.sentences);
  }
}

TEST(SplitMix64, MatchesReferenceSequence) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

// Golden permutations from tests/oracles/reference.py.
TEST(Shuffle, GoldenPermutations) {
  EXPECT_EQ(shuffled_order(5, 42), (std::vector<SentenceId>{1, 2, 0, 4, 3}));
  EXPECT_EQ(shuffled_order(10, 0), (std::vector<SentenceId>{6, 3, 2, 9, 8, 1, 4, 7, 0, 5}));
  EXPECT_EQ(shuffled_order(8, 12345), (std::vector<SentenceId>{2, 4, 1, 5, 7, 6, 3, 0}));
  EXPECT_EQ(shuffled_order(1, 987), (std::vector<SentenceId>{0}));
}

TEST(Shuffle, IsADeterministicPermutationThatRoundTrips) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto doc = testing::random_document(rng, "d");
    const std::uint64_t seed = rng();
    const auto flat = shuffle_document(doc, seed);
    EXPECT_EQ(flat.order, shuffle_document(doc, seed).order);

    auto sorted = flat.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<SentenceId> expected(doc.sentences.size());
    std::iota(expected.begin(), expected.end(), SentenceId{0});
    ASSERT_EQ(sorted, expected);

    std::vector<Sentence> restored;
    for (SentenceId id : sorted) restored.push_back(flat.sentences[id]);
    EXPECT_EQ(restored, doc.sentences);
  }
}

TEST(Stopwords, BundledListIsLoaded) {
  const auto& words = english_stopwords();
  EXPECT_GE(words.size(), 140u);
  EXPECT_TRUE(words.contains("the"));
  EXPECT_FALSE(words.contains("river"));
}

}  // namespace
}  // namespace destructure
