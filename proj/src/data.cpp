#include "dglstm/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dglstm/errors.hpp"
#include "dglstm/rng.hpp"

namespace dglstm {

namespace {

const char* kReserved[] = {"<unk>", "<s>", "</s>"};

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

// Length of the UTF-8 sequence led by byte b; 0 for continuation/invalid
// lead bytes.
int utf8_len(unsigned char b) {
  if (b < 0x80) return 1;
  if ((b & 0xE0) == 0xC0) return 2;
  if ((b & 0xF0) == 0xE0) return 3;
  if ((b & 0xF8) == 0xF0) return 4;
  return 0;
}

}  // namespace

const char* level_name(Level level) {
  return level == Level::Char ? "char" : "word";
}

Level parse_level(const std::string& name) {
  if (name == "char") return Level::Char;
  if (name == "word") return Level::Word;
  throw UsageError("level must be 'char' or 'word', got '" + name + "'");
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    std::ostringstream os;
    os << "Vocabulary: id " << id << " outside [0, " << size() << ")";
    throw IndexError(os.str());
  }
  return tokens[id];
}

std::vector<std::string> tokenize(const std::string& line, Level level) {
  std::vector<std::string> out;
  if (level == Level::Word) {
    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_ascii_space(line[i])) ++i;
      size_t start = i;
      while (i < line.size() && !is_ascii_space(line[i])) ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
  }
  size_t i = 0;
  while (i < line.size()) {
    int len = utf8_len(static_cast<unsigned char>(line[i]));
    if (len == 0) len = 1;  // stray continuation byte: emit it alone
    if (i + len > line.size()) len = 1;
    for (int k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(line[i + k]) & 0xC0) != 0x80) {
        len = 1;  // sequence cut short: fall back to single bytes
        break;
      }
    }
    out.push_back(line.substr(i, len));
    i += len;
  }
  return out;
}

Vocabulary build_vocab(const std::vector<std::string>& lines, Level level,
                       int min_count, int max_size) {
  if (min_count < 1) throw UsageError("build_vocab: min_count must be at least 1");
  if (lines.empty()) throw UsageError("build_vocab: empty input");

  // std::map keeps tokens sorted, which settles frequency ties.
  std::map<std::string, long> counts;
  long total = 0;
  for (const auto& line : lines) {
    for (auto& tok : tokenize(line, level)) {
      ++counts[tok];
      ++total;
    }
  }
  if (total == 0) throw UsageError("build_vocab: input contains no tokens");

  Vocabulary vocab;
  for (const char* r : kReserved) {
    vocab.index[r] = vocab.size();
    vocab.tokens.push_back(r);
  }

  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, n] : counts) {
    if (n < min_count) continue;
    if (vocab.index.count(tok)) continue;  // literal reserved token in the text
    kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  long room = max_size > 0 ? std::max<long>(0, max_size - vocab.size())
                           : static_cast<long>(kept.size());
  for (const auto& [tok, n] : kept) {
    if (room-- <= 0) break;
    vocab.index[tok] = vocab.size();
    vocab.tokens.push_back(tok);
  }
  return vocab;
}

std::vector<int> encode(const Vocabulary& vocab, const std::string& line, Level level) {
  std::vector<int> ids;
  ids.push_back(Vocabulary::kBos);
  for (auto& tok : tokenize(line, level)) ids.push_back(vocab.id_of(tok));
  ids.push_back(Vocabulary::kEos);
  return ids;
}

std::string decode(const Vocabulary& vocab, const std::vector<int>& ids, Level level) {
  std::string out;
  bool first = true;
  for (int id : ids) {
    if (id == Vocabulary::kBos || id == Vocabulary::kEos) continue;
    if (level == Level::Word && !first) out += ' ';
    out += vocab.token(id);
    first = false;
  }
  return out;
}

long Corpus::total_targets() const {
  long total = 0;
  for (const auto& s : sequences) total += static_cast<long>(s.size()) - 1;
  return total;
}

Corpus make_corpus(const std::vector<std::string>& lines, const Vocabulary& vocab,
                   Level level) {
  Corpus corpus;
  corpus.level = level;
  for (const auto& line : lines) {
    auto ids = encode(vocab, line, level);
    if (ids.size() <= 2) continue;  // blank line: nothing to model
    corpus.sequences.push_back(std::move(ids));
  }
  return corpus;
}

std::vector<Batch> make_batches(const Corpus& corpus, int bptt_len, uint64_t seed) {
  if (bptt_len < 1) throw UsageError("make_batches: bptt_len must be at least 1");
  std::vector<size_t> order(corpus.sequences.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_int(static_cast<int>(i))]);

  std::vector<Batch> batches;
  for (size_t idx : order) {
    const auto& seq = corpus.sequences[idx];
    const long n = static_cast<long>(seq.size()) - 1;  // predicted positions
    for (long start = 0; start < n; start += bptt_len) {
      const long len = std::min<long>(bptt_len, n - start);
      Batch b;
      b.continues_previous = start > 0;
      b.inputs.assign(seq.begin() + start, seq.begin() + start + len);
      b.targets.assign(seq.begin() + start + 1, seq.begin() + start + 1 + len);
      batches.push_back(std::move(b));
    }
  }
  return batches;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write file: " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw UsageError("write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw UsageError("cannot replace file: " + path);
  }
}

void save_vocab(const std::string& path, const Vocabulary& vocab) {
  std::string content;
  for (const auto& tok : vocab.tokens) {
    content += tok;
    content += '\n';
  }
  write_file_atomic(path, content);
}

Vocabulary load_vocab(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.size() < 3)
    throw ParseError("vocab file " + path + ": fewer than the 3 reserved tokens");
  Vocabulary vocab;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i < 3 && lines[i] != kReserved[i]) {
      std::ostringstream os;
      os << "vocab file " << path << " line " << (i + 1) << ": expected '" << kReserved[i]
         << "', found '" << lines[i] << "'";
      throw ParseError(os.str());
    }
    if (vocab.index.count(lines[i])) {
      std::ostringstream os;
      os << "vocab file " << path << " line " << (i + 1) << ": duplicate token '"
         << lines[i] << "'";
      throw ParseError(os.str());
    }
    vocab.index[lines[i]] = vocab.size();
    vocab.tokens.push_back(lines[i]);
  }
  return vocab;
}

}  // namespace dglstm
