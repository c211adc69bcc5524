#include "cait/tagger.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include "cait/parallel.h"
#include "model_io.h"

namespace cait {
namespace {

constexpr const char* kStart = "<s>";
constexpr const char* kStart2 = "<s2>";
constexpr const char* kEnd = "</s>";

std::string Shape(const std::string& form) {
  std::string shape;
  for (unsigned char c : form) {
    char k = std::isupper(c) ? 'X' : std::islower(c) ? 'x' : std::isdigit(c) ? 'd' : c;
    if (shape.empty() || shape.back() != k) shape += k;
  }
  return shape;
}

std::vector<std::string> Words(const Sentence& s) {
  std::vector<std::string> words;
  for (const Token& t : s.tokens) words.push_back(t.form);
  return words;
}

int TagIndex(const TaggerModel& m, const std::string& tag) {
  auto it = std::lower_bound(m.tags.begin(), m.tags.end(), tag);
  return it != m.tags.end() && *it == tag ? static_cast<int>(it - m.tags.begin()) : -1;
}

}  // namespace

std::vector<std::string> TaggerFeatures(const std::vector<std::string>& words, size_t i,
                                        const std::string& prev, const std::string& prev2) {
  auto word = [&](long j) -> std::string {
    if (j < 0) return j == -1 ? kStart : kStart2;
    if (j >= static_cast<long>(words.size())) return kEnd;
    return AsciiLower(words[j]);
  };
  const long k = static_cast<long>(i);
  const std::string w = word(k);
  std::vector<std::string> f = {
      "bias",
      "w=" + w,
      "shape=" + Shape(words[i]),
      "t-1=" + prev,
      "t-2,t-1=" + prev2 + "/" + prev,
      "t-1,w=" + prev + "/" + w,
      "w-1=" + word(k - 1),
      "w-2=" + word(k - 2),
      "w+1=" + word(k + 1),
      "w+2=" + word(k + 2),
  };
  for (size_t n = 1; n <= 3 && n <= w.size(); ++n) {
    f.push_back("pre" + std::to_string(n) + "=" + w.substr(0, n));
    f.push_back("suf" + std::to_string(n) + "=" + w.substr(w.size() - n));
  }
  return f;
}

void TaggerModel::Save(std::ostream& out) const {
  model_io::WriteHeader(out, "tagger", kVersion);
  model_io::WriteTable(out, tags, perceptron);
  out << "tagdict\t" << tag_dict.size() << '\n';
  for (const auto& [w, t] : tag_dict) out << w << '\t' << t << '\n';
  out << "end\n";
  if (!out) throw std::runtime_error("failed to write tagger model");
}

TaggerModel TaggerModel::Load(std::istream& in) {
  model_io::Reader r(in);
  r.ReadHeader("tagger", kVersion);
  TaggerModel m;
  m.perceptron = r.ReadTable(&m.tags);
  if (!std::is_sorted(m.tags.begin(), m.tags.end())) r.Fail("tags not sorted");
  const int n = r.ExpectInt("tagdict");
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> cols = Split(r.Line(), '\t');
    if (cols.size() != 2 || TagIndex(m, cols[1]) < 0) r.Fail("malformed tagdict line");
    m.tag_dict[cols[0]] = cols[1];
  }
  if (r.Line() != "end") r.Fail("missing end marker");
  return m;
}

TaggerModel TrainTagger(const Treebank& tb, const TrainOptions& options,
                        const TagDictOptions& dict) {
  if (tb.sentences.empty()) throw std::invalid_argument("training treebank is empty");
  if (options.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  std::set<std::string> tag_set;
  std::map<std::string, std::map<std::string, int>> counts;
  std::vector<size_t> order;
  for (size_t i = 0; i < tb.sentences.size(); ++i) {
    const Sentence& s = tb.sentences[i];
    bool tagged = !s.tokens.empty();
    for (const Token& t : s.tokens) tagged &= t.upos != "_";
    if (!tagged) continue;
    order.push_back(i);
    for (const Token& t : s.tokens) {
      tag_set.insert(t.upos);
      ++counts[AsciiLower(t.form)][t.upos];
    }
  }
  if (order.empty()) throw std::invalid_argument("no UPOS-annotated training sentences");

  TaggerModel m;
  m.tags.assign(tag_set.begin(), tag_set.end());
  for (const auto& [w, by_tag] : counts) {
    int total = 0, best = 0;
    std::string best_tag;
    for (const auto& [tag, c] : by_tag) {
      total += c;
      if (c > best) {
        best = c;
        best_tag = tag;
      }
    }
    if (total >= dict.min_count && best >= dict.min_ratio * total) m.tag_dict[w] = best_tag;
  }
  m.perceptron = AveragedPerceptron(static_cast<int>(m.tags.size()));
  std::mt19937_64 rng(options.seed);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Shuffle(order, rng);
    for (size_t idx : order) {
      const Sentence& s = tb.sentences[idx];
      const std::vector<std::string> words = Words(s);
      std::string prev = kStart, prev2 = kStart2;
      for (size_t i = 0; i < words.size(); ++i) {
        std::string guess_tag;
        auto it = m.tag_dict.find(AsciiLower(words[i]));
        if (it != m.tag_dict.end()) {
          guess_tag = it->second;
        } else {
          const std::vector<std::string> feats = TaggerFeatures(words, i, prev, prev2);
          const int truth = TagIndex(m, s.tokens[i].upos);
          const int guess = m.perceptron.Predict(feats);
          m.perceptron.Update(truth, guess, feats);
          m.perceptron.Advance();
          guess_tag = m.tags[guess];
        }
        prev2 = prev;
        prev = guess_tag;
      }
    }
  }
  m.perceptron.Finalize();
  return m;
}

Sentence Tag(const TaggerModel& model, const Sentence& sentence) {
  if (sentence.tokens.empty()) throw std::invalid_argument("cannot tag an empty sentence");
  if (model.tags.empty()) throw std::invalid_argument("tagger model has no tags");
  Sentence out = sentence;
  const std::vector<std::string> words = Words(sentence);
  std::string prev = kStart, prev2 = kStart2;
  for (size_t i = 0; i < words.size(); ++i) {
    auto it = model.tag_dict.find(AsciiLower(words[i]));
    std::string tag = it != model.tag_dict.end()
                          ? it->second
                          : model.tags[model.perceptron.Predict(
                                TaggerFeatures(words, i, prev, prev2))];
    out.tokens[i].upos = tag;
    prev2 = prev;
    prev = std::move(tag);
  }
  return out;
}

Treebank TagTreebankUpos(const TaggerModel& model, const Treebank& tb, int jobs) {
  Treebank out = tb;
  out.provenance = Provenance::kPredicted;
  ParallelFor(out.sentences.size(), jobs,
              [&](size_t i) { out.sentences[i] = Tag(model, tb.sentences[i]); });
  return out;
}

}  // namespace cait
