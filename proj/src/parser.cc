#include "cait/parser.h"

#include <algorithm>
#include <set>

#include "cait/parallel.h"
#include "model_io.h"

namespace cait {
namespace {

constexpr const char* kNone = "<none>";

std::string Word(const Sentence& s, int id) {
  return id >= 1 && id <= static_cast<int>(s.size()) ? AsciiLower(s.at(id).form) : kNone;
}

std::string Pos(const Sentence& s, int id) {
  return id >= 1 && id <= static_cast<int>(s.size()) ? s.at(id).upos : kNone;
}

// Labels of the leftmost and rightmost dependents attached so far.
std::pair<std::string, std::string> ChildLabels(const ParserState& st, int id) {
  std::string left = kNone, right = kNone;
  if (id < 1) return {left, right};
  for (int d = 1; d <= st.n; ++d) {
    if (st.heads[d] != id) continue;
    if (d < id && left == kNone) left = st.deprels[d];
    if (d > id) right = st.deprels[d];
  }
  return {left, right};
}

std::string DistanceBucket(int d) {
  if (d <= 0) return kNone;
  if (d <= 4) return std::to_string(d);
  return d <= 7 ? "5" : "8";
}

uint64_t BoundedDraw(std::mt19937_64& rng, uint64_t bound) {
  // Rejection sampling over the largest multiple of `bound`.
  const uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<bool> AllowedMask(const ParserModel& model, const ParserState& st) {
  const int k = 2 + 2 * static_cast<int>(model.labels.size());
  std::vector<bool> allowed(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) allowed[c] = st.CanApply(model.TransitionOf(c));
  return allowed;
}

void Cleanup(const ParserState& st, Sentence& out) {
  int root = 0;
  for (int id = 1; id <= st.n; ++id) {
    Token& t = out.at(id);
    if (st.heads[id] >= 1) {
      t.head = st.heads[id];
      t.deprel = st.deprels[id];
    } else if (root == 0) {
      root = id;
      t.head = 0;
      t.deprel = "root";
    }
  }
  for (int id = 1; id <= st.n; ++id) {
    if (st.heads[id] < 1 && id != root) {
      out.at(id).head = root;
      out.at(id).deprel = "dep";
    }
  }
}

}  // namespace

std::string Transition::Name() const {
  switch (kind) {
    case Kind::kShift: return "SHIFT";
    case Kind::kReduce: return "REDUCE";
    case Kind::kLeftArc: return "LEFT:" + deprel;
    case Kind::kRightArc: return "RIGHT:" + deprel;
  }
  return "?";
}

ParserState::ParserState(int n_tokens)
    : n(n_tokens), heads(static_cast<size_t>(n_tokens) + 1, -1),
      deprels(static_cast<size_t>(n_tokens) + 1) {}

bool ParserState::CanApply(const Transition& t) const {
  switch (t.kind) {
    case Transition::Kind::kShift: return buffer <= n;
    case Transition::Kind::kReduce: return !stack.empty() && heads[stack.back()] >= 1;
    case Transition::Kind::kLeftArc:
      return !stack.empty() && buffer <= n && heads[stack.back()] < 1;
    case Transition::Kind::kRightArc: return !stack.empty() && buffer <= n;
  }
  return false;
}

void ParserState::Apply(const Transition& t) {
  if (!CanApply(t)) throw std::logic_error("transition " + t.Name() + " not applicable");
  switch (t.kind) {
    case Transition::Kind::kShift:
      stack.push_back(buffer++);
      break;
    case Transition::Kind::kReduce:
      stack.pop_back();
      break;
    case Transition::Kind::kLeftArc:
      heads[stack.back()] = buffer;
      deprels[stack.back()] = t.deprel;
      stack.pop_back();
      break;
    case Transition::Kind::kRightArc:
      heads[buffer] = stack.back();
      deprels[buffer] = t.deprel;
      stack.push_back(buffer++);
      break;
  }
}

bool IsProjective(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  auto head = [&](int id) { return heads[id - 1]; };
  for (int d = 1; d <= n; ++d) {
    const int h = head(d);
    const int lo = std::min(h, d), hi = std::max(h, d);
    for (int k = lo + 1; k < hi; ++k) {
      // k must be dominated by h.
      int a = k;
      int steps = 0;
      while (a != 0 && a != h && steps++ <= n) a = head(a);
      if (a != h) return false;
    }
  }
  return true;
}

Transition StaticOracle(const Sentence& gold, const ParserState& st) {
  using K = Transition::Kind;
  if (st.Terminal()) throw std::logic_error("oracle called on a terminal state");
  if (st.stack.empty()) return {K::kShift, ""};
  const int s0 = st.stack.back();
  const int b = st.buffer;
  const Token& s0t = gold.at(s0);
  const Token& bt = gold.at(b);
  if (s0t.head == b) return {K::kLeftArc, s0t.deprel};
  if (bt.head == s0) return {K::kRightArc, bt.deprel};
  if (st.heads[s0] >= 1) {
    for (size_t i = 0; i + 1 < st.stack.size(); ++i) {
      const int k = st.stack[i];
      if (gold.at(k).head == b || bt.head == k) return {K::kReduce, ""};
    }
  }
  return {K::kShift, ""};
}

std::vector<Transition> OracleSequence(const Sentence& gold) {
  std::vector<int> heads;
  for (const Token& t : gold.tokens) heads.push_back(t.head);
  if (!IsProjective(heads)) {
    throw NonProjectiveError("sentence " + gold.sent_id + " is non-projective");
  }
  ParserState st(static_cast<int>(gold.size()));
  std::vector<Transition> seq;
  while (!st.Terminal()) {
    seq.push_back(StaticOracle(gold, st));
    st.Apply(seq.back());
  }
  return seq;
}

int ParserModel::ClassOf(const Transition& t) const {
  switch (t.kind) {
    case Transition::Kind::kShift: return 0;
    case Transition::Kind::kReduce: return 1;
    default: break;
  }
  auto it = std::lower_bound(labels.begin(), labels.end(), t.deprel);
  if (it == labels.end() || *it != t.deprel) {
    throw std::out_of_range("unknown label " + t.deprel);
  }
  const int i = static_cast<int>(it - labels.begin());
  return t.kind == Transition::Kind::kLeftArc ? 2 + 2 * i : 3 + 2 * i;
}

Transition ParserModel::TransitionOf(int cls) const {
  if (cls == 0) return {Transition::Kind::kShift, ""};
  if (cls == 1) return {Transition::Kind::kReduce, ""};
  const int i = (cls - 2) / 2;
  return {cls % 2 == 0 ? Transition::Kind::kLeftArc : Transition::Kind::kRightArc,
          labels.at(static_cast<size_t>(i))};
}

std::vector<std::string> ParserModel::ClassNames() const {
  std::vector<std::string> names;
  for (int c = 0; c < 2 + 2 * static_cast<int>(labels.size()); ++c) {
    names.push_back(TransitionOf(c).Name());
  }
  return names;
}

void ParserModel::Save(std::ostream& out) const {
  model_io::WriteHeader(out, "parser", kVersion);
  out << "labels\t" << labels.size() << '\n';
  for (const std::string& l : labels) out << l << '\n';
  model_io::WriteTable(out, ClassNames(), perceptron);
  out << "end\n";
  if (!out) throw std::runtime_error("failed to write parser model");
}

ParserModel ParserModel::Load(std::istream& in) {
  model_io::Reader r(in);
  r.ReadHeader("parser", kVersion);
  ParserModel m;
  const int n = r.ExpectInt("labels");
  for (int i = 0; i < n; ++i) m.labels.push_back(r.Line());
  if (!std::is_sorted(m.labels.begin(), m.labels.end())) r.Fail("labels not sorted");
  std::vector<std::string> classes;
  m.perceptron = r.ReadTable(&classes);
  if (classes != m.ClassNames()) r.Fail("transition classes do not match labels");
  if (r.Line() != "end") r.Fail("missing end marker");
  return m;
}

std::vector<std::string> ParserFeatures(const Sentence& s, const ParserState& st) {
  const int s0 = st.stack.empty() ? 0 : st.stack.back();
  const int s1 = st.stack.size() >= 2 ? st.stack[st.stack.size() - 2] : 0;
  const int b0 = st.Terminal() ? 0 : st.buffer;
  const int b1 = b0 != 0 && b0 < st.n ? b0 + 1 : 0;
  const std::string s0w = Word(s, s0), s0p = Pos(s, s0);
  const std::string s1w = Word(s, s1), s1p = Pos(s, s1);
  const std::string b0w = Word(s, b0), b0p = Pos(s, b0);
  const std::string b1w = Word(s, b1), b1p = Pos(s, b1);
  const auto [s0l, s0r] = ChildLabels(st, s0);
  const auto [b0l, b0r] = ChildLabels(st, b0);
  const std::string dist = s0 && b0 ? DistanceBucket(b0 - s0) : kNone;
  const std::string s0h = s0 && st.heads[s0] >= 1 ? "1" : "0";
  return {
      "bias",
      "s0w=" + s0w,
      "s0p=" + s0p,
      "s0wp=" + s0w + "/" + s0p,
      "s1w=" + s1w,
      "s1p=" + s1p,
      "b0w=" + b0w,
      "b0p=" + b0p,
      "b0wp=" + b0w + "/" + b0p,
      "b1w=" + b1w,
      "b1p=" + b1p,
      "s0p,b0p=" + s0p + "/" + b0p,
      "s0w,b0w=" + s0w + "/" + b0w,
      "s0w,b0p=" + s0w + "/" + b0p,
      "s0p,b0w=" + s0p + "/" + b0w,
      "s0p,b0p,b1p=" + s0p + "/" + b0p + "/" + b1p,
      "s1p,s0p,b0p=" + s1p + "/" + s0p + "/" + b0p,
      "s0l=" + s0l,
      "s0r=" + s0r,
      "b0l=" + b0l,
      "s0p,s0l,s0r=" + s0p + "/" + s0l + "/" + s0r,
      "dist,s0p,b0p=" + dist + "/" + s0p + "/" + b0p,
      "dist=" + dist,
      "s0h=" + s0h,
      "s0h,s0p,b0p=" + s0h + "/" + s0p + "/" + b0p,
  };
}

void Shuffle(std::vector<size_t>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[BoundedDraw(rng, i)]);
  }
}

ParserModel ZeroParserModel(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  ParserModel m;
  m.labels = std::move(labels);
  m.perceptron = AveragedPerceptron(2 + 2 * static_cast<int>(m.labels.size()));
  m.perceptron.Finalize();
  return m;
}

ParserModel TrainParser(const Treebank& tb, const TrainOptions& options) {
  if (tb.sentences.empty()) throw std::invalid_argument("training treebank is empty");
  if (options.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  std::vector<size_t> order;
  std::set<std::string> label_set;
  int64_t skipped = 0;
  for (size_t i = 0; i < tb.sentences.size(); ++i) {
    const Sentence& s = tb.sentences[i];
    if (!Validate(s).empty()) {
      throw std::invalid_argument("training sentence " + s.sent_id + " is not a valid tree");
    }
    std::vector<int> heads;
    for (const Token& t : s.tokens) heads.push_back(t.head);
    if (!IsProjective(heads)) {
      ++skipped;
      continue;
    }
    order.push_back(i);
    for (const Token& t : s.tokens) {
      if (t.head != 0) label_set.insert(t.deprel);
    }
  }
  if (order.empty()) throw std::invalid_argument("every training sentence is non-projective");

  ParserModel m;
  m.labels.assign(label_set.begin(), label_set.end());
  m.skipped_nonprojective = skipped;
  m.perceptron = AveragedPerceptron(2 + 2 * static_cast<int>(m.labels.size()));
  std::mt19937_64 rng(options.seed);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Shuffle(order, rng);
    for (size_t idx : order) {
      const Sentence& s = tb.sentences[idx];
      ParserState st(static_cast<int>(s.size()));
      while (!st.Terminal()) {
        const Transition gold = StaticOracle(s, st);
        const std::vector<std::string> feats = ParserFeatures(s, st);
        const int truth = m.ClassOf(gold);
        const int guess = m.perceptron.Predict(feats, AllowedMask(m, st));
        m.perceptron.Update(truth, guess, feats);
        m.perceptron.Advance();
        st.Apply(gold);
      }
    }
  }
  m.perceptron.Finalize();
  return m;
}

Sentence Parse(const ParserModel& model, const Sentence& sentence) {
  if (sentence.tokens.empty()) throw std::invalid_argument("cannot parse an empty sentence");
  ParserState st(static_cast<int>(sentence.size()));
  while (!st.Terminal()) {
    const int cls =
        model.perceptron.Predict(ParserFeatures(sentence, st), AllowedMask(model, st));
    st.Apply(model.TransitionOf(cls));
  }
  Sentence out = sentence;
  Cleanup(st, out);
  return out;
}

Treebank ParseTreebank(const ParserModel& model, const Treebank& tb, int jobs) {
  Treebank out = tb;
  out.provenance = Provenance::kPredicted;
  ParallelFor(out.sentences.size(), jobs,
              [&](size_t i) { out.sentences[i] = Parse(model, tb.sentences[i]); });
  return out;
}

}  // namespace cait
