#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "dglstm/data.hpp"
#include "dglstm/errors.hpp"

using namespace dglstm;

namespace {

std::string temp_path(const std::string& stem) {
  return "/tmp/dglstm_data_test_" + stem + "_" + std::to_string(::getpid());
}

}  // namespace

TEST_CASE("level names round-trip") {
  CHECK(parse_level("char") == Level::Char);
  CHECK(parse_level("word") == Level::Word);
  CHECK(std::string(level_name(Level::Word)) == "word");
  CHECK_THROWS_AS(parse_level("byte"), UsageError);
}

TEST_CASE("char tokenization handles multi-byte characters") {
  auto toks = tokenize("ab", Level::Char);
  CHECK(toks == std::vector<std::string>{"a", "b"});
  toks = tokenize("a\xc3\xa9z", Level::Char);  // 'a', U+00E9, 'z'
  REQUIRE(toks.size() == 3);
  CHECK(toks[1] == "\xc3\xa9");
  toks = tokenize("\xe2\x82\xac" "5", Level::Char);  // euro sign, '5'
  REQUIRE(toks.size() == 2);
  CHECK(toks[0] == "\xe2\x82\xac");
  // a stray continuation byte falls back to a single-byte token
  toks = tokenize("\xa9x", Level::Char);
  REQUIRE(toks.size() == 2);
  CHECK(toks[0] == "\xa9");
  CHECK(tokenize("", Level::Char).empty());
  // spaces are ordinary char tokens
  toks = tokenize("a b", Level::Char);
  CHECK(toks == std::vector<std::string>{"a", " ", "b"});
}

TEST_CASE("word tokenization splits on ascii whitespace") {
  auto toks = tokenize("  the cat\tsat \r\n", Level::Word);
  CHECK(toks == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(tokenize("   ", Level::Word).empty());
  CHECK(tokenize("one", Level::Word) == std::vector<std::string>{"one"});
}

TEST_CASE("vocabulary construction") {
  const std::vector<std::string> lines = {"b a a", "c b a", "d"};
  SUBCASE("frequency order with lexicographic ties") {
    Vocabulary v = build_vocab(lines, Level::Word);
    REQUIRE(v.size() == 3 + 4);
    CHECK(v.tokens[0] == "<unk>");
    CHECK(v.tokens[1] == "<s>");
    CHECK(v.tokens[2] == "</s>");
    CHECK(v.tokens[3] == "a");  // count 3
    CHECK(v.tokens[4] == "b");  // count 2
    CHECK(v.tokens[5] == "c");  // count 1, before "d"
    CHECK(v.tokens[6] == "d");
    CHECK(v.id_of("a") == 3);
    CHECK(v.id_of("zebra") == Vocabulary::kUnk);
    CHECK(v.token(4) == "b");
    CHECK_THROWS_AS(v.token(7), IndexError);
    CHECK_THROWS_AS(v.token(-1), IndexError);
  }
  SUBCASE("min_count filters rare tokens") {
    Vocabulary v = build_vocab(lines, Level::Word, 2);
    CHECK(v.size() == 3 + 2);  // only "a" and "b" survive
    CHECK(v.id_of("c") == Vocabulary::kUnk);
  }
  SUBCASE("max_size caps the table including reserved entries") {
    Vocabulary v = build_vocab(lines, Level::Word, 1, 5);
    CHECK(v.size() == 5);
    CHECK(v.tokens[3] == "a");
    CHECK(v.tokens[4] == "b");
  }
  SUBCASE("reserved markers in the text are not duplicated") {
    Vocabulary v = build_vocab({"<s> a </s> <unk>"}, Level::Word);
    CHECK(v.size() == 4);  // reserved three plus "a"
    CHECK(v.id_of("a") == 3);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(build_vocab({}, Level::Word), UsageError);
    CHECK_THROWS_AS(build_vocab({"", "  "}, Level::Word), UsageError);
    CHECK_THROWS_AS(build_vocab(lines, Level::Word, 0), UsageError);
  }
  SUBCASE("char level") {
    Vocabulary v = build_vocab({"aab"}, Level::Char);
    CHECK(v.size() == 5);
    CHECK(v.tokens[3] == "a");
    CHECK(v.tokens[4] == "b");
  }
}

TEST_CASE("encode wraps with sentence markers") {
  Vocabulary v = build_vocab({"a b"}, Level::Word);
  auto ids = encode(v, "b a q", Level::Word);
  CHECK(ids == std::vector<int>{1, v.id_of("b"), v.id_of("a"), 0, 2});
  CHECK(encode(v, "", Level::Word) == std::vector<int>{1, 2});
  CHECK(decode(v, ids, Level::Word) == "b a <unk>");

  Vocabulary c = build_vocab({"hi"}, Level::Char);
  auto cids = encode(c, "hi", Level::Char);
  CHECK(decode(c, cids, Level::Char) == "hi");
}

TEST_CASE("corpus drops blank lines and counts targets") {
  Vocabulary v = build_vocab({"a b c"}, Level::Word);
  Corpus corpus = make_corpus({"a b", "", "c", "   "}, v, Level::Word);
  REQUIRE(corpus.sequences.size() == 2);
  CHECK(corpus.sequences[0].size() == 4);  // <s> a b </s>
  CHECK(corpus.sequences[1].size() == 3);  // <s> c </s>
  CHECK(corpus.total_targets() == 3 + 2);
}

TEST_CASE("batches are shifted-by-one chunks") {
  Vocabulary v = build_vocab({"a b c d e"}, Level::Word);
  Corpus corpus = make_corpus({"a b c d e"}, v, Level::Word);
  REQUIRE(corpus.sequences.size() == 1);
  const auto& seq = corpus.sequences[0];  // length 7: <s> a b c d e </s>

  SUBCASE("whole sequence in one batch") {
    auto batches = make_batches(corpus, 100, 1);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].inputs == std::vector<int>(seq.begin(), seq.end() - 1));
    CHECK(batches[0].targets == std::vector<int>(seq.begin() + 1, seq.end()));
    CHECK(!batches[0].continues_previous);
  }
  SUBCASE("chunking marks continuation") {
    auto batches = make_batches(corpus, 4, 1);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].inputs.size() == 4);
    CHECK(batches[1].inputs.size() == 2);
    CHECK(!batches[0].continues_previous);
    CHECK(batches[1].continues_previous);
    // concatenation reproduces the full shifted pair
    std::vector<int> in = batches[0].inputs, tg = batches[0].targets;
    in.insert(in.end(), batches[1].inputs.begin(), batches[1].inputs.end());
    tg.insert(tg.end(), batches[1].targets.begin(), batches[1].targets.end());
    CHECK(in == std::vector<int>(seq.begin(), seq.end() - 1));
    CHECK(tg == std::vector<int>(seq.begin() + 1, seq.end()));
    // inputs and targets stay aligned within each chunk
    for (const Batch& b : batches)
      for (size_t k = 0; k + 1 < b.inputs.size(); ++k) CHECK(b.targets[k] == b.inputs[k + 1]);
  }
  SUBCASE("bptt_len must be positive") {
    CHECK_THROWS_AS(make_batches(corpus, 0, 1), UsageError);
  }
}

TEST_CASE("batch shuffling is deterministic and conserves tokens") {
  std::vector<std::string> lines;
  for (int i = 0; i < 26; ++i) lines.push_back(std::string(1 + i % 5, static_cast<char>('a' + i)));
  Vocabulary v = build_vocab(lines, Level::Char);
  Corpus corpus = make_corpus(lines, v, Level::Char);

  auto b1 = make_batches(corpus, 3, 7);
  auto b2 = make_batches(corpus, 3, 7);
  auto b3 = make_batches(corpus, 3, 8);
  REQUIRE(b1.size() == b2.size());
  bool same = true;
  for (size_t k = 0; k < b1.size(); ++k)
    same = same && b1[k].inputs == b2[k].inputs && b1[k].targets == b2[k].targets &&
           b1[k].continues_previous == b2[k].continues_previous;
  CHECK(same);

  auto order_signature = [](const std::vector<Batch>& bs) {
    std::vector<int> sig;
    for (const Batch& b : bs)
      if (!b.continues_previous) sig.push_back(b.inputs[1]);
    return sig;
  };
  CHECK(order_signature(b1) != order_signature(b3));  // different seed, different order

  // every target token of the corpus appears exactly once per epoch
  long total = 0;
  std::map<int, long> counts;
  for (const Batch& b : b3) {
    total += static_cast<long>(b.targets.size());
    for (int t : b.targets) ++counts[t];
  }
  CHECK(total == corpus.total_targets());
  std::map<int, long> expected;
  for (const auto& seq : corpus.sequences)
    for (size_t k = 1; k < seq.size(); ++k) ++expected[seq[k]];
  CHECK(counts == expected);
}

TEST_CASE("file io") {
  const std::string path = temp_path("io");
  SUBCASE("write then read round-trips lines") {
    write_file_atomic(path, "alpha\nbeta\n");
    auto lines = read_lines(path);
    CHECK(lines == std::vector<std::string>{"alpha", "beta"});
    std::remove(path.c_str());
  }
  SUBCASE("carriage returns are stripped") {
    write_file_atomic(path, "alpha\r\nbeta\r\n");
    auto lines = read_lines(path);
    CHECK(lines == std::vector<std::string>{"alpha", "beta"});
    std::remove(path.c_str());
  }
  SUBCASE("missing file is a usage error") {
    CHECK_THROWS_AS(read_lines("/nonexistent/nowhere.txt"), UsageError);
  }
  SUBCASE("unwritable destination is a usage error") {
    CHECK_THROWS_AS(write_file_atomic("/nonexistent/dir/file.txt", "x"), UsageError);
  }
}

TEST_CASE("vocabulary files") {
  const std::string path = temp_path("vocab");
  Vocabulary v = build_vocab({"the cat sat", "the mat"}, Level::Word);
  save_vocab(path, v);

  SUBCASE("round-trip") {
    Vocabulary w = load_vocab(path);
    CHECK(w.tokens == v.tokens);
    CHECK(w.id_of("the") == v.id_of("the"));
  }
  SUBCASE("missing reserved entries rejected") {
    write_file_atomic(path, "<unk>\n<s>\nthe\n");
    CHECK_THROWS_AS(load_vocab(path), ParseError);
  }
  SUBCASE("duplicate tokens rejected with the line number") {
    write_file_atomic(path, "<unk>\n<s>\n</s>\nthe\nthe\n");
    try {
      load_vocab(path);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("5") != std::string::npos);
    }
  }
  std::remove(path.c_str());
}
