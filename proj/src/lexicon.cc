#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "cait/cxntag.h"
#include "cait/text.h"

namespace cait {
namespace {

constexpr const char* kSeedPatterns[] = {
    "hello", "hi", "hiya", "hey", "hello there", "hi there", "bye", "bye bye",
    "goodbye", "see you", "see you later", "see you soon", "night night",
    "good night", "good morning", "good afternoon", "good evening", "thank you",
    "thank you very much", "thanks", "thanks very much", "no thank you",
    "no thanks", "please", "yes please", "you're welcome", "oops", "whoops",
    "oopsie", "uh oh", "oh dear", "oh no", "ouch", "ow", "wow", "yay", "hooray",
    "yummy", "yum yum", "bless you", "excuse me", "sorry", "i'm sorry", "pardon",
    "pardon me", "good boy", "good girl", "well done", "clever girl", "clever boy",
    "there you go", "there you are", "here you go", "here you are", "okay dokey",
    "okey dokey", "peekaboo", "boo", "cheers", "ta",
};

bool AttachesLeft(std::string_view form) {
  return form.starts_with('\'') || form.starts_with("\xE2\x80\x99") ||
         AsciiLower(form) == "n't";
}

}  // namespace

const FormulaicLexicon& FormulaicLexicon::BuiltIn() {
  static const FormulaicLexicon* lexicon = [] {
    auto* lex = new FormulaicLexicon;
    for (const char* p : kSeedPatterns) lex->patterns_.insert(Normalize(p));
    return lex;
  }();
  return *lexicon;
}

FormulaicLexicon FormulaicLexicon::FromStream(std::istream& in) {
  FormulaicLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view t = Trim(line);
    if (t.empty() || t.starts_with('#')) continue;
    std::string norm = Normalize(t);
    if (!norm.empty()) lex.patterns_.insert(std::move(norm));
  }
  if (lex.patterns_.empty()) {
    throw std::invalid_argument("formulaic lexicon has no patterns");
  }
  return lex;
}

FormulaicLexicon FormulaicLexicon::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon " + path);
  return FromStream(in);
}

FormulaicLexicon FormulaicLexicon::Resolve(const std::optional<std::string>& flag_path) {
  if (flag_path) return FromFile(*flag_path);
  if (const char* env = std::getenv("CAIT_LEXICON"); env != nullptr && *env != '\0') {
    return FromFile(env);
  }
  return BuiltIn();
}

std::string FormulaicLexicon::Normalize(std::string_view utterance) {
  std::string folded;
  folded.reserve(utterance.size());
  for (size_t i = 0; i < utterance.size(); ++i) {
    // U+2019 right single quotation mark.
    if (utterance.substr(i).starts_with("\xE2\x80\x99")) {
      folded += '\'';
      i += 2;
      continue;
    }
    unsigned char c = static_cast<unsigned char>(utterance[i]);
    if (c == '-' || c == '_' || std::isspace(c)) {
      folded += ' ';
    } else if (c < 0x80 && std::ispunct(c) && c != '\'') {
      continue;
    } else {
      folded += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    }
  }
  std::string out;
  for (const std::string& word : Split(folded, ' ')) {
    if (word.find_first_not_of('\'') == std::string::npos) continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string FormulaicLexicon::NormalizeSentence(const Sentence& sentence) {
  std::string joined;
  for (const Token& t : sentence.tokens) {
    if (!joined.empty() && !AttachesLeft(t.form)) joined += ' ';
    joined += t.form;
  }
  return Normalize(joined);
}

bool FormulaicLexicon::Contains(std::string_view normalized) const {
  return patterns_.count(std::string(normalized)) > 0;
}

bool FormulaicLexicon::Matches(const Sentence& sentence) const {
  std::string norm = NormalizeSentence(sentence);
  return !norm.empty() && Contains(norm);
}

}  // namespace cait
