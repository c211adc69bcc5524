// Greedy left-to-right averaged-perceptron UPOS tagger with a tag
// dictionary for frequent unambiguous words.

#ifndef CAIT_TAGGER_H_
#define CAIT_TAGGER_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cait/conllu.h"
#include "cait/parser.h"
#include "cait/perceptron.h"

namespace cait {

struct TaggerModel {
  static constexpr int kVersion = 1;
  std::vector<std::string> tags;  // sorted
  AveragedPerceptron perceptron;
  // Lowercased word -> tag, for words seen often with a single tag.
  std::map<std::string, std::string> tag_dict;

  void Save(std::ostream& out) const;
  static TaggerModel Load(std::istream& in);
};

// Features for position i (0-based) given the two previous predicted tags.
std::vector<std::string> TaggerFeatures(const std::vector<std::string>& words, size_t i,
                                        const std::string& prev, const std::string& prev2);

// Words occurring at least `min_count` times with one tag in at least
// `min_ratio` of occurrences enter the tag dictionary.
struct TagDictOptions {
  int min_count = 20;
  double min_ratio = 0.97;
};

// Throws std::invalid_argument on an empty treebank or one with no UPOS.
TaggerModel TrainTagger(const Treebank& tb, const TrainOptions& options,
                        const TagDictOptions& dict = {});

// Fills UPOS only. Throws std::invalid_argument on an empty sentence.
Sentence Tag(const TaggerModel& model, const Sentence& sentence);
Treebank TagTreebankUpos(const TaggerModel& model, const Treebank& tb, int jobs = 1);

}  // namespace cait

#endif  // CAIT_TAGGER_H_
