#include "dglstm/sample.hpp"

#include "dglstm/errors.hpp"
#include "dglstm/rng.hpp"

namespace dglstm {

std::vector<int> sample_tokens(const ModelParams& params, const NetworkSpec& spec,
                               int length, uint64_t seed, double temperature) {
  if (length < 0) throw UsageError("sample_tokens: length must be non-negative");
  if (temperature < 0.0) throw UsageError("sample_tokens: temperature must be >= 0");
  Rng rng(seed);
  auto states = zero_states(params);
  int prev = Vocabulary::kBos;
  std::vector<int> out;
  out.reserve(length);
  for (int k = 0; k < length; ++k) {
    Tensor logits = step_logits(params, spec, prev, states);
    int tok = 0;
    if (temperature == 0.0) {
      for (long i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[tok]) tok = static_cast<int>(i);
    } else {
      if (temperature != 1.0) logits = (1.0 / temperature) * logits;
      Tensor probs = softmax(logits);
      const double u = rng.uniform();
      double acc = 0.0;
      tok = static_cast<int>(probs.size()) - 1;  // guards against rounding in the CDF
      for (long i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
          tok = static_cast<int>(i);
          break;
        }
      }
    }
    out.push_back(tok);
    if (tok == Vocabulary::kEos || tok == Vocabulary::kBos) {
      states = zero_states(params);
      prev = Vocabulary::kBos;
    } else {
      prev = tok;
    }
  }
  return out;
}

std::string render_tokens(const Vocabulary& vocab, const std::vector<int>& ids,
                          Level level) {
  std::string out;
  bool need_space = false;
  for (int id : ids) {
    if (id == Vocabulary::kBos) continue;
    if (id == Vocabulary::kEos) {
      out += '\n';
      need_space = false;
      continue;
    }
    if (level == Level::Word && need_space) out += ' ';
    out += vocab.token(id);
    need_space = (level == Level::Word);
  }
  return out;
}

}  // namespace dglstm
