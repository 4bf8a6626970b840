#include "dglstm/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dglstm/errors.hpp"

namespace dglstm {

namespace {

constexpr const char* kHeader = "DGLSTM-CKPT v1";

std::string bool_str(bool v) { return v ? "true" : "false"; }

std::string dims_str(const std::vector<int>& dims) {
  std::string out;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dims[i]);
  }
  return out;
}

[[noreturn]] void fail(size_t line, const std::string& what) {
  throw ParseError("checkpoint line " + std::to_string(line) + ": " + what);
}

bool parse_bool(const std::string& v, size_t line, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, "key '" + key + "' expects true|false, got '" + v + "'");
}

long parse_int(const std::string& v, size_t line, const std::string& key) {
  char* end = nullptr;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail(line, "key '" + key + "' expects an integer, got '" + v + "'");
  return n;
}

std::vector<int> parse_dims(const std::string& v, size_t line, const std::string& key) {
  std::vector<int> dims;
  std::string part;
  std::istringstream in(v);
  while (std::getline(in, part, ','))
    dims.push_back(static_cast<int>(parse_int(part, line, key)));
  if (dims.empty()) fail(line, "key '" + key + "' is empty");
  return dims;
}

// Whitespace tokenizer over the tensor section that remembers which line each
// token came from, for error messages.
class TokenReader {
 public:
  TokenReader(const std::string& text, size_t offset, size_t start_line)
      : text_(text), pos_(offset), line_(start_line) {}

  bool next(std::string& token) {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    const size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    token.assign(text_, start, pos_ - start);
    return true;
  }

  size_t line() const { return line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  }
  const std::string& text_;
  size_t pos_;
  size_t line_;
};

}  // namespace

std::string serialize_checkpoint(const NetworkSpec& spec, Level level,
                                 const ModelParams& params) {
  spec.validate();
  std::string out = kHeader;
  out += '\n';
  // keys emitted in sorted order
  out += "cell=" + std::string(cell_kind_name(spec.cell));
  out += " depth=" + std::to_string(spec.depth);
  out += " embed_dim=" + std::to_string(spec.embed_dim);
  out += " first_layer_gate=" + bool_str(spec.first_layer_gate);
  out += " hidden_dims=" + dims_str(spec.hidden_dims);
  out += " interlayer_affine=" + bool_str(spec.interlayer_affine);
  out += " level=" + std::string(level_name(level));
  out += " peephole=" + std::string(peephole_mode_name(spec.peephole));
  out += " tie_forget=" + bool_str(spec.tie_forget);
  out += " untie_first_layer_proj=" + bool_str(spec.untie_first_proj);
  out += " vocab_size=" + std::to_string(spec.vocab_size);
  out += '\n';

  char buf[40];
  params.for_each_param([&](const std::string& name, const Tensor& t) {
    out += name;
    out += ' ';
    out += std::to_string(t.rows());
    out += ' ';
    out += std::to_string(t.cols());
    out += '\n';
    for (int r = 0; r < t.rows(); ++r) {
      for (int c = 0; c < t.cols(); ++c) {
        if (c) out += ' ';
        std::snprintf(buf, sizeof(buf), "%.17g", t(r, c));
        out += buf;
      }
      out += '\n';
    }
  });
  return out;
}

Checkpoint parse_checkpoint(const std::string& content) {
  // line 1: header
  size_t eol1 = content.find('\n');
  std::string line1 = content.substr(0, eol1 == std::string::npos ? content.size() : eol1);
  if (!line1.empty() && line1.back() == '\r') line1.pop_back();
  if (line1 != kHeader)
    fail(1, "expected header '" + std::string(kHeader) + "', found '" + line1 + "'");
  if (eol1 == std::string::npos) fail(1, "file ends after the header");

  // line 2: key=value spec
  size_t eol2 = content.find('\n', eol1 + 1);
  std::string line2 =
      content.substr(eol1 + 1, (eol2 == std::string::npos ? content.size() : eol2) - eol1 - 1);
  if (!line2.empty() && line2.back() == '\r') line2.pop_back();

  std::map<std::string, std::string> kv;
  {
    std::istringstream in(line2);
    std::string pair;
    while (in >> pair) {
      const size_t eq = pair.find('=');
      if (eq == std::string::npos) fail(2, "expected key=value, found '" + pair + "'");
      const std::string key = pair.substr(0, eq);
      if (kv.count(key)) fail(2, "duplicate key '" + key + "'");
      kv[key] = pair.substr(eq + 1);
    }
  }
  const char* required[] = {"cell",   "depth",    "embed_dim",  "first_layer_gate",
                            "hidden_dims", "interlayer_affine", "level", "peephole",
                            "tie_forget",  "untie_first_layer_proj", "vocab_size"};
  for (const char* key : required)
    if (!kv.count(key)) fail(2, std::string("missing key '") + key + "'");
  for (const auto& [key, value] : kv) {
    bool known = false;
    for (const char* r : required) known = known || key == r;
    if (!known) fail(2, "unknown key '" + key + "'");
  }

  Checkpoint ckpt;
  try {
    ckpt.spec.cell = parse_cell_kind(kv["cell"]);
    ckpt.spec.peephole = parse_peephole_mode(kv["peephole"]);
    ckpt.level = parse_level(kv["level"]);
  } catch (const UsageError& e) {
    fail(2, e.what());
  }
  ckpt.spec.depth = static_cast<int>(parse_int(kv["depth"], 2, "depth"));
  ckpt.spec.embed_dim = static_cast<int>(parse_int(kv["embed_dim"], 2, "embed_dim"));
  ckpt.spec.vocab_size = static_cast<int>(parse_int(kv["vocab_size"], 2, "vocab_size"));
  ckpt.spec.hidden_dims = parse_dims(kv["hidden_dims"], 2, "hidden_dims");
  ckpt.spec.interlayer_affine = parse_bool(kv["interlayer_affine"], 2, "interlayer_affine");
  ckpt.spec.tie_forget = parse_bool(kv["tie_forget"], 2, "tie_forget");
  ckpt.spec.untie_first_proj =
      parse_bool(kv["untie_first_layer_proj"], 2, "untie_first_layer_proj");
  ckpt.spec.first_layer_gate = parse_bool(kv["first_layer_gate"], 2, "first_layer_gate");
  try {
    ckpt.spec.validate();
    ckpt.params = make_model(ckpt.spec);
  } catch (const UsageError& e) {
    fail(2, e.what());
  }

  auto expected = named_tensors(ckpt.params);
  const size_t total = expected.size();
  TokenReader reader(content, eol2 == std::string::npos ? content.size() : eol2 + 1, 3);
  std::string tok;
  size_t found = 0;
  auto truncated = [&]() -> ParseError {
    return ParseError("checkpoint truncated: expected " + std::to_string(total) +
                      " tensors, found " + std::to_string(found));
  };
  for (size_t k = 0; k < total; ++k) {
    if (!reader.next(tok)) throw truncated();
    const size_t header_line = reader.line();
    if (tok != expected[k].first)
      fail(header_line,
           "expected tensor '" + expected[k].first + "', found '" + tok + "'");
    std::string rows_tok, cols_tok;
    if (!reader.next(rows_tok) || !reader.next(cols_tok)) throw truncated();
    Tensor& t = *expected[k].second;
    const long rows = parse_int(rows_tok, header_line, expected[k].first);
    const long cols = parse_int(cols_tok, header_line, expected[k].first);
    if (rows != t.rows() || cols != t.cols()) {
      std::ostringstream os;
      os << "tensor '" << expected[k].first << "' expected " << t.shape_str()
         << ", found [" << rows << "x" << cols << "]";
      fail(header_line, os.str());
    }
    for (long i = 0; i < t.size(); ++i) {
      if (!reader.next(tok)) throw truncated();
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        fail(reader.line(),
             "bad value '" + tok + "' in tensor '" + expected[k].first + "'");
      t[i] = v;
    }
    ++found;
  }
  if (reader.next(tok))
    fail(reader.line(), "unexpected trailing content '" + tok + "'");
  return ckpt;
}

void save_checkpoint(const std::string& path, const NetworkSpec& spec, Level level,
                     const ModelParams& params) {
  write_file_atomic(path, serialize_checkpoint(spec, level, params));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

}  // namespace dglstm
