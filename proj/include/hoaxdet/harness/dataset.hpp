#pragma once

#include <vector>

#include "hoaxdet/core/ops.hpp"
#include "hoaxdet/text/article.hpp"

namespace hoaxdet::harness {

struct LabeledExample {
  std::vector<ad::TokenId> ids;
  Label label = Label::valid;
};

using LabeledSet = std::vector<LabeledExample>;

/// Class index used by the two-unit output: valid 0, fake 1.
inline int class_index(Label label) { return label == Label::fake ? 1 : 0; }
inline Label class_label(int index) { return index == 1 ? Label::fake : Label::valid; }

}  // namespace hoaxdet::harness
