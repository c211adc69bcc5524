// Line-based model table shared by the parser and tagger model files:
//
//   CAITB1
//   kind <TAB> parser|tagger
//   version <TAB> N
//   classes <TAB> K        followed by K class names, one per line
//   weights <TAB> M        followed by M "feature TAB class TAB weight" lines
//   ...kind-specific sections...
//   end

#ifndef CAIT_SRC_MODEL_IO_H_
#define CAIT_SRC_MODEL_IO_H_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cait/conllu.h"
#include "cait/perceptron.h"
#include "cait/text.h"

namespace cait::model_io {

inline constexpr const char* kMagic = "CAITB1";

inline void WriteHeader(std::ostream& out, const std::string& kind, int version) {
  out << kMagic << '\n' << "kind\t" << kind << '\n' << "version\t" << version << '\n';
}

inline void WriteTable(std::ostream& out, const std::vector<std::string>& classes,
                       const AveragedPerceptron& p) {
  out << "classes\t" << classes.size() << '\n';
  for (const std::string& c : classes) out << c << '\n';
  const auto weights = p.NonZeroWeights();
  size_t n = 0;
  for (const auto& [f, row] : weights) n += row.size();
  out << "weights\t" << n << '\n';
  for (const auto& [f, row] : weights) {
    for (const auto& [c, w] : row) {
      out << f << '\t' << classes[c] << '\t' << FormatShortest(w) << '\n';
    }
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string Line() {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError(line_no_ + 1, "unexpected end of model");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  // "key TAB value" -> value.
  std::string Expect(const std::string& key) {
    std::string line = Line();
    if (!line.starts_with(key + "\t")) Fail("expected '" + key + "'");
    return line.substr(key.size() + 1);
  }
  int ExpectInt(const std::string& key) {
    int v = 0;
    if (!ParseInt(Expect(key), &v) || v < 0) Fail("bad count for '" + key + "'");
    return v;
  }
  [[noreturn]] void Fail(const std::string& what) { throw FormatError(line_no_, what); }

  void ReadHeader(const std::string& kind, int version) {
    if (Line() != kMagic) Fail("missing CAITB1 header");
    if (Expect("kind") != kind) Fail("model kind is not " + kind);
    if (ExpectInt("version") != version) Fail("unsupported model version");
  }

  AveragedPerceptron ReadTable(std::vector<std::string>* classes) {
    const int k = ExpectInt("classes");
    classes->clear();
    for (int i = 0; i < k; ++i) classes->push_back(Line());
    std::map<std::string, int> index;
    for (int i = 0; i < k; ++i) index[(*classes)[i]] = i;
    const int m = ExpectInt("weights");
    std::map<std::string, std::map<int, double>> weights;
    for (int i = 0; i < m; ++i) {
      std::vector<std::string> cols = Split(Line(), '\t');
      double w = 0;
      if (cols.size() != 3 || !index.count(cols[1]) || !ParseDouble(cols[2], &w)) {
        Fail("malformed weight line");
      }
      weights[cols[0]][index[cols[1]]] = w;
    }
    return AveragedPerceptron::FromWeights(k, weights);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace cait::model_io

#endif  // CAIT_SRC_MODEL_IO_H_
