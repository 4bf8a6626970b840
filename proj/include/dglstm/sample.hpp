#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dglstm/data.hpp"
#include "dglstm/network.hpp"

namespace dglstm {

// Draws `length` tokens autoregressively starting from <s>; after an </s>
// the recurrent state resets and the next draw restarts from <s>.
// temperature 0 means argmax (ties go to the lowest id) and consumes no
// randomness; otherwise logits are divided by the temperature before the
// softmax draw.
std::vector<int> sample_tokens(const ModelParams& params, const NetworkSpec& spec,
                               int length, uint64_t seed, double temperature = 1.0);

// Text rendering of sampled ids: </s> becomes a newline, <s> nothing; word
// tokens are space-separated within a sentence, char tokens concatenated.
std::string render_tokens(const Vocabulary& vocab, const std::vector<int>& ids,
                          Level level);

}  // namespace dglstm
