#include "projlens/error.hpp"
#include "projlens/npy.hpp"
#include "projlens/vocab.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace projlens;
using namespace projlens::testing;

TEST(Vocab, Builds) {
  Rng rng(1);
  const VocabTable v({"a", "b", "c"}, DenseMatrix(random_matrix(rng, 3, 4)));
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.dim(), 4u);
  EXPECT_EQ(v.find("b"), 1u);
  EXPECT_FALSE(v.find("z").has_value());
}

TEST(Vocab, CountMismatch) {
  Rng rng(1);
  try {
    VocabTable({"a", "b", "c"}, DenseMatrix(random_matrix(rng, 2, 4)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CountMismatch);
  }
}

TEST(Vocab, DuplicateTokenReportsBothLines) {
  std::vector<std::string> tokens;
  for (int i = 1; i <= 10; ++i) tokens.push_back("t" + std::to_string(i));
  tokens[4] = "cat";
  tokens[8] = "cat";
  Rng rng(2);
  try {
    VocabTable(tokens, DenseMatrix(random_matrix(rng, 10, 3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateToken);
    EXPECT_NE(std::string(e.what()).find("lines 5 and 9"), std::string::npos) << e.what();
  }
}

TEST(Vocab, NormalizedRowsHaveUnitNorm) {
  Rng rng(3);
  const VocabTable v = VocabTable({"x", "y", "z", "w"}, DenseMatrix(random_matrix(rng, 4, 6) * 3.0)).normalized();
  EXPECT_TRUE(v.unit_normalized());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v.row(i).norm(), 1.0, 1e-12);
}

TEST(Vocab, TokenLinesKeepSpacesAndStripCR) {
  const auto t = parse_token_lines("a\r\n\xE2\x96\x81the\n b\n");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], "a");
  EXPECT_EQ(t[1], "\xE2\x96\x81the");
  EXPECT_EQ(t[2], " b");
}

TEST(Vocab, SaveLoadRoundtrip) {
  Rng rng(4);
  TempDir dir("vocab");
  const VocabTable v({"cat", "dog", "TV"}, DenseMatrix(random_matrix(rng, 3, 5)));
  save_vocab(v, dir / "e.npy", dir / "t.txt");
  const VocabTable back = load_vocab(dir / "e.npy", dir / "t.txt");
  EXPECT_EQ(back.tokens(), v.tokens());
  EXPECT_EQ(back.embeddings(), v.embeddings());
}
