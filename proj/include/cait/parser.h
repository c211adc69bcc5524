// Arc-eager transition parser with a greedy averaged-perceptron scorer.
//
// The stack starts empty and there is no artificial root token: parsing ends
// when the buffer is exhausted, and tokens still without a head are joined
// in cleanup (the first becomes the root, the rest attach to it as "dep").

#ifndef CAIT_PARSER_H_
#define CAIT_PARSER_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cait/conllu.h"
#include "cait/perceptron.h"

namespace cait {

struct Transition {
  enum class Kind { kShift, kReduce, kLeftArc, kRightArc };
  Kind kind = Kind::kShift;
  std::string deprel;  // arcs only

  std::string Name() const;  // SHIFT, REDUCE, LEFT:x, RIGHT:x
  bool operator==(const Transition&) const = default;
};

// Parser configuration. Heads are -1 until assigned.
struct ParserState {
  std::vector<int> stack;
  int buffer = 1;  // next token id; > n when exhausted
  int n = 0;
  std::vector<int> heads;  // index 1..n
  std::vector<std::string> deprels;

  explicit ParserState(int n_tokens);
  bool Terminal() const { return buffer > n; }
  bool CanApply(const Transition& t) const;
  // Throws std::logic_error for an inapplicable transition.
  void Apply(const Transition& t);
};

class NonProjectiveError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Projectivity with an implicit root at position 0. Heads are 1-based ids
// indexed from heads[0] for token 1.
bool IsProjective(const std::vector<int>& heads);

// Next transition of the canonical arc-eager derivation of `gold`. Throws
// NonProjectiveError for crossing arcs.
Transition StaticOracle(const Sentence& gold, const ParserState& state);

// Full canonical derivation of `gold` from the initial state.
std::vector<Transition> OracleSequence(const Sentence& gold);

struct ParserModel {
  static constexpr int kVersion = 1;
  std::vector<std::string> labels;  // sorted; excludes "root"
  AveragedPerceptron perceptron;
  int64_t skipped_nonprojective = 0;

  // Class index layout: 0 SHIFT, 1 REDUCE, 2+2i LEFT(labels[i]),
  // 3+2i RIGHT(labels[i]).
  int ClassOf(const Transition& t) const;
  Transition TransitionOf(int cls) const;
  std::vector<std::string> ClassNames() const;

  void Save(std::ostream& out) const;
  static ParserModel Load(std::istream& in);
};

// Feature strings for a configuration.
std::vector<std::string> ParserFeatures(const Sentence& sentence, const ParserState& state);

struct TrainOptions {
  int epochs = 10;
  uint64_t seed = 1;
};

// Throws std::invalid_argument on an empty treebank or when every sentence
// is non-projective.
ParserModel TrainParser(const Treebank& tb, const TrainOptions& options);

// Untrained model over `labels`.
ParserModel ZeroParserModel(std::vector<std::string> labels);

// Fills heads and deprels. Throws std::invalid_argument on an empty
// sentence.
Sentence Parse(const ParserModel& model, const Sentence& sentence);
Treebank ParseTreebank(const ParserModel& model, const Treebank& tb, int jobs = 1);

// Fisher-Yates shuffle. Uses its own bounded draw so that the permutation
// for a given engine state is the same on every standard library.
void Shuffle(std::vector<size_t>& v, std::mt19937_64& rng);

}  // namespace cait

#endif  // CAIT_PARSER_H_
