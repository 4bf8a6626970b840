#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace dglstm {

enum class Level { Char, Word };

const char* level_name(Level level);
Level parse_level(const std::string& name);  // "char" | "word"

// Token table with three fixed entries: <unk>=0, <s>=1, </s>=2. Ids are
// dense; the vocab file is just the tokens in id order, one per line.
struct Vocabulary {
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(tokens.size()); }
  int id_of(const std::string& token) const;  // kUnk for unknown tokens
  const std::string& token(int id) const;     // IndexError outside [0, size)
};

// Word level splits on ASCII whitespace; char level yields one token per
// Unicode scalar value (malformed UTF-8 bytes become single-byte tokens).
std::vector<std::string> tokenize(const std::string& line, Level level);

// Tokens with frequency >= min_count, most frequent first, ties broken
// lexicographically, truncated so the table (reserved entries included) has
// at most max_size entries (0 = unlimited).
Vocabulary build_vocab(const std::vector<std::string>& lines, Level level,
                       int min_count = 1, int max_size = 0);

// <s> + mapped ids (unknown -> <unk>) + </s>
std::vector<int> encode(const Vocabulary& vocab, const std::string& line, Level level);
// Inverse for display: drops <s>/</s>, joins char tokens directly and word
// tokens with single spaces.
std::string decode(const Vocabulary& vocab, const std::vector<int>& ids, Level level);

struct Corpus {
  std::vector<std::vector<int>> sequences;  // each wrapped <s> ... </s>
  Level level = Level::Char;

  long total_targets() const;  // sum of (length - 1)
};

// Encodes every non-blank line as one sequence.
Corpus make_corpus(const std::vector<std::string>& lines, const Vocabulary& vocab,
                   Level level);

struct Batch {
  std::vector<int> inputs;
  std::vector<int> targets;
  // True when this chunk continues the previous batch's sequence and the
  // recurrent state must be carried over.
  bool continues_previous = false;
};

// Shift-by-one pairs per sequence, split into chunks of at most bptt_len
// steps; sequence order is shuffled deterministically by seed.
std::vector<Batch> make_batches(const Corpus& corpus, int bptt_len, uint64_t seed);

std::vector<std::string> read_lines(const std::string& path);
// Writes via a temporary file and renames, so failures never leave a partial
// file at `path`.
void write_file_atomic(const std::string& path, const std::string& content);

void save_vocab(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocab(const std::string& path);

}  // namespace dglstm
