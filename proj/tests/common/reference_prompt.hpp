#pragma once

#include <string>
#include <vector>

#include "gptopt/dataset/prompt.hpp"

namespace gptopt::fixtures {

// Published 2-D example: ten random steps and the first eight response steps.
inline const std::vector<std::string> kReferenceRandomTokens = {
    "Step 1:[765,488]:210,True", "Step 2:[192,128]:251,False", "Step 3:[136,651]:611,False",
    "Step 4:[350,526]:220,False", "Step 5:[370,666]:226,False", "Step 6:[160,924]:999,False",
    "Step 7:[20,451]:760,False", "Step 8:[576,854]:209,True",  "Step 9:[686,983]:227,False",
    "Step 10:[667,414]:207,True"};

inline const std::vector<std::string> kReferenceResponseTokens = {
    "Step 1:[422,581]:208,False", "Step 2:[684,642]:211,False", "Step 3:[257,276]:235,False",
    "Step 4:[446,640]:206,True",  "Step 5:[738,266]:269,False", "Step 6:[462,736]:207,False",
    "Step 7:[440,616]:206,False", "Step 8:[449,682]:207,False"};

inline constexpr int kReferenceDeclaredSteps = 20;

struct ReferenceStep {
  int a, b, code;
  bool best;
};

inline const std::vector<ReferenceStep> kReferenceRandom = {
    {765, 488, 210, true},  {192, 128, 251, false}, {136, 651, 611, false}, {350, 526, 220, false},
    {370, 666, 226, false}, {160, 924, 999, false}, {20, 451, 760, false},  {576, 854, 209, true},
    {686, 983, 227, false}, {667, 414, 207, true}};

inline const std::vector<ReferenceStep> kReferenceResponse = {
    {422, 581, 208, false}, {684, 642, 211, false}, {257, 276, 235, false}, {446, 640, 206, true},
    {738, 266, 269, false}, {462, 736, 207, false}, {440, 616, 206, false}, {449, 682, 207, false}};

/// Expected text assembled by hand from the literal tokens.
inline std::string reference_prompt_text() {
  std::string s =
      "### Instruction:\nThis problem is a synthetic 2D black-box optimization problem. We will begin by "
      "initializing with 10 random steps, after which you must optimize the objective with 20 additional "
      "steps. Random Steps: ";
  for (std::size_t i = 0; i < kReferenceRandomTokens.size(); ++i) {
    if (i) s += "; ";
    s += kReferenceRandomTokens[i];
  }
  s += ". \n### Response:\nOptimization Steps: ";
  for (const auto& t : kReferenceResponseTokens) s += t + "; ";
  return s;
}

/// The same prompt built from actions decoded to [-1,1] and re-encoded.
inline dataset::TokenizedPrompt reference_prompt_from_decoded() {
  dataset::TokenizedPrompt p;
  p.dim = 2;
  p.n_random = 10;
  p.n_opt = kReferenceDeclaredSteps;
  auto step = [](const ReferenceStep& r) {
    const std::vector<int> codes{r.a, r.b};
    const auto x = dataset::decode_actions(codes);
    return dataset::TokenizedStep{dataset::discretize_actions(x), r.code, r.best};
  };
  for (const auto& r : kReferenceRandom) p.random_steps.push_back(step(r));
  for (const auto& r : kReferenceResponse) p.response_steps.push_back(step(r));
  return p;
}

}  // namespace gptopt::fixtures
