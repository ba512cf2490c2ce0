#include <sstream>

#include <gtest/gtest.h>

#include "pubrank/errors.hpp"
#include "pubrank/run.hpp"
#include "pubrank/text.hpp"

using namespace pubrank;

TEST(Text, SplitsOnUnicodeWhitespace) {
  // U+00A0 no-break space and U+3000 ideographic space both separate tokens.
  auto toks = text::split_whitespace("a\xC2\xA0" "b\xE3\x80\x80 c\t\nd");
  ASSERT_EQ(toks.size(), 4u);
  EXPECT_EQ(toks[0], "a");
  EXPECT_EQ(toks[3], "d");
  EXPECT_TRUE(text::split_whitespace("  \t ").empty());
}

TEST(Text, CollapseAndTrim) {
  EXPECT_EQ(text::collapse_whitespace("  TNF-\xCE\xB1   levels \n rise "), "TNF-\xCE\xB1 levels rise");
  EXPECT_EQ(text::trim("\t x y \n"), "x y");
}

TEST(Text, Utf8PrefixNeverSplitsASequence) {
  std::string s = "a\xCE\xB1" "b";  // a, alpha, b
  EXPECT_EQ(text::utf8_length(s), 3u);
  EXPECT_EQ(text::utf8_prefix(s, 2), "a\xCE\xB1");
  EXPECT_EQ(text::utf8_prefix(s, 1), "a");
  EXPECT_EQ(text::utf8_prefix(s, 10), s);
}

TEST(Text, NormalizeAnswer) {
  EXPECT_EQ(text::normalize_answer("  TREM2. "), "trem2");
  EXPECT_EQ(text::normalize_answer("\"Amyloid   beta\""), "amyloid beta");
}

TEST(Text, Sha256KnownVector) {
  EXPECT_EQ(text::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, PmidOrderingIsNumeric) {
  EXPECT_TRUE(pmid_less("9", "10"));
  EXPECT_FALSE(pmid_less("10", "9"));
  EXPECT_TRUE(pmid_less("007", "8"));
  EXPECT_TRUE(is_valid_pmid("123"));
  EXPECT_FALSE(is_valid_pmid(""));
  EXPECT_FALSE(is_valid_pmid("12a"));
}

TEST(Run, SortTiesBySmallerPmid) {
  std::vector<RunItem> items{{"30", 0.5}, {"4", 0.5}, {"100", 0.9}, {"25", 0.5}};
  sort_by_score(items);
  EXPECT_EQ(items[0].pmid, "100");
  EXPECT_EQ(items[1].pmid, "4");
  EXPECT_EQ(items[2].pmid, "25");
  EXPECT_EQ(items[3].pmid, "30");
}

TEST(Run, RoundTripThroughJsonl) {
  RankedRun a{"q1", Stage::crossencoder, {{"1", 0.25}, {"2", 0.125}}};
  RankedRun b{"q2", Stage::fused, {}};
  std::stringstream ss;
  write_runs(ss, {a, b});
  auto back = read_runs(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], a);
  EXPECT_EQ(back[1], b);
}

TEST(Run, DuplicatePmidIsADataError) {
  RankedRun r{"q9", Stage::retrieval, {{"1", 1}, {"1", 0.5}}};
  try {
    require_unique_pmids(r);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("q9"), std::string::npos);
  }
}

TEST(Run, Truncated) {
  RankedRun r{"q", Stage::retrieval, {{"1", 3}, {"2", 2}, {"3", 1}}};
  EXPECT_EQ(truncated(r, 2).size(), 2u);
  EXPECT_EQ(truncated(r, 10).size(), 3u);
}
