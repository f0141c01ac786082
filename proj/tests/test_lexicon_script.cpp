#include <fstream>
#include <string>

#include <doctest.h>

#include "artsep/common.hpp"
#include "artsep/lexicon.hpp"
#include "artsep/script.hpp"
#include "testutil.hpp"

using namespace artsep;

TEST_SUITE("lexicon") {

TEST_CASE("manner names round trip") {
  for (Manner m : kMannerOrder) {
    const auto back = manner_from_string(to_string(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(!manner_from_string("XXX").has_value());
}

TEST_CASE("report order is alphabetical") {
  for (std::size_t i = 1; i < kReportOrder.size(); ++i)
    CHECK(std::string(to_string(kReportOrder[i - 1])) < to_string(kReportOrder[i]));
}

TEST_CASE("builtin lexicon covers every manner class") {
  const Lexicon lex = Lexicon::builtin_demo();
  CHECK(lex.words().size() > 100);
  bool seen[kNumManners] = {};
  for (const auto& [ph, m] : lex.manner_table()) seen[static_cast<int>(m)] = true;
  for (int c = 0; c < kNumManners; ++c) CHECK(seen[c]);
}

TEST_CASE("normalize strips punctuation and case, keeps inner apostrophes") {
  CHECK(normalize_word("Hello,") == "hello");
  CHECK(normalize_word("\"WATER\"") == "water");
  CHECK(normalize_word("don't") == "don't");
  CHECK(normalize_word("...") == "");
}

TEST_CASE("tokenize splits, folds and reports unknown words") {
  const Lexicon lex = Lexicon::builtin_demo();
  const auto pr = lex.tokenize("The Water");
  REQUIRE(pr.size() == 2);
  CHECK(pr[0].word == "the");
  CHECK(pr[1].word == "water");
  CHECK_THROWS_AS(lex.tokenize("the zzyzzx"), DataError);
  try {
    lex.tokenize("the zzyzzx");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("zzyzzx") != std::string::npos);
  }
}

TEST_CASE("tokens_for_text flattens pronunciations in order") {
  const Lexicon lex = Lexicon::builtin_demo();
  const auto toks = lex.tokens_for_text("the cat");
  REQUIRE(toks.size() >= 4);  // D @ k { t
  CHECK(toks[0].manner == Manner::FRC);   // D
  CHECK(toks[1].manner == Manner::VWL);   // @
  CHECK(toks[2].manner == Manner::STP);   // k
  CHECK(toks.back().manner == Manner::STP);  // t
}

TEST_CASE("custom lexicon text parsing") {
  const Lexicon lex = Lexicon::from_text("# comment\nfoo\tf u\nbar\tb a r\n",
                                         "f\tFRC\nu\tVWL\nb\tSTP\na\tVWL\nr\tAPR\n");
  const auto toks = lex.tokens_for_text("foo bar");
  REQUIRE(toks.size() == 5);
  CHECK(toks[0].phoneme == "f");
  CHECK(toks[0].manner == Manner::FRC);
  CHECK(toks[4].manner == Manner::APR);
  CHECK_THROWS_AS(lex.manner_of("zz"), DataError);
}

TEST_CASE("consecutive same-class phonemes stay separate tokens") {
  const Lexicon lex = Lexicon::from_text("aa\ta a\n", "a\tVWL\n");
  const auto toks = lex.tokens_for_text("aa");
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].manner == Manner::VWL);
  CHECK(toks[1].manner == Manner::VWL);
}

}  // TEST_SUITE

TEST_SUITE("script") {

TEST_CASE("json round trip") {
  testutil::TempDir tmp("script");
  std::vector<ScriptLine> lines{{0.5, 2.0, "the water is cold", 0},
                               {3.25, 5.75, "sing a summer song", 1}};
  save_script_json(tmp.file("s.json"), lines);
  const auto back = load_script_json(tmp.file("s.json"));
  REQUIRE(back.size() == 2);
  CHECK(back[0] == lines[0]);
  CHECK(back[1] == lines[1]);
}

TEST_CASE("validation enforces ordering and bounds") {
  std::vector<ScriptLine> ok{{0.0, 1.0, "a", 0}, {1.5, 2.0, "b", 0}};
  validate_script(ok, 2.5, "test");
  CHECK(ok[1].line_id == 1);  // ids assigned sequentially

  std::vector<ScriptLine> neg{{-0.1, 1.0, "a", 0}};
  CHECK_THROWS_AS(validate_script(neg, 2.0, "test"), DataError);
  std::vector<ScriptLine> inverted{{1.0, 0.5, "a", 0}};
  CHECK_THROWS_AS(validate_script(inverted, 2.0, "test"), DataError);
  std::vector<ScriptLine> past{{0.0, 3.0, "a", 0}};
  CHECK_THROWS_AS(validate_script(past, 2.0, "test"), DataError);
}

TEST_CASE("malformed json raises DataError") {
  testutil::TempDir tmp("scriptbad");
  {
    std::ofstream f(tmp.file("bad.json"));
    f << "{not json";
  }
  CHECK_THROWS_AS(load_script_json(tmp.file("bad.json")), DataError);
  CHECK_THROWS_AS(load_script_json(tmp.file("missing.json")), DataError);
}

}  // TEST_SUITE
