#include "ncomp/tagging.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "ncomp/errors.hpp"
#include "ncomp/model.hpp"

namespace ncomp {
namespace {

char fold(std::uint8_t b) {
  return static_cast<char>(b >= 'A' && b <= 'Z' ? b + 32 : b);
}

std::string fold_word(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) out.push_back(fold(static_cast<std::uint8_t>(c)));
  return out;
}

struct WordTagLine {
  std::string word;  // case-folded
  std::uint8_t tag = 0;
  std::size_t line = 0;
};

// Shared parser for the "word<TAB>tagname" format used by both lexicon and
// tag files. Blank lines are skipped; a trailing CR is tolerated.
std::vector<WordTagLine> parse_word_tag_file(const std::string& path, const TagSet& tags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tag file: " + path);
  std::vector<WordTagLine> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path + " line " + std::to_string(lineno) +
                        ": expected word<TAB>tagname");
    }
    const std::string word = line.substr(0, tab);
    const std::string tagname = line.substr(tab + 1);
    const auto id = tags.id_of(tagname);
    if (!id) {
      throw FormatError(path + " line " + std::to_string(lineno) + ": unknown tag '" +
                        tagname + "'");
    }
    entries.push_back({fold_word(word), *id, lineno});
  }
  return entries;
}

}  // namespace

TagSet::TagSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() != static_cast<std::size_t>(kTagAlphabetSize)) {
    throw std::invalid_argument("TagSet: expected exactly 49 names, got " +
                                std::to_string(names_.size()));
  }
  if (names_.front() != "UNKNOWN") {
    throw std::invalid_argument("TagSet: id 0 must be UNKNOWN");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], static_cast<std::uint8_t>(i)).second) {
      throw std::invalid_argument("TagSet: duplicate name '" + names_[i] + "'");
    }
  }
}

const TagSet& TagSet::penn() {
  static const TagSet instance{{
      "UNKNOWN",
      // word-level Penn Treebank tags
      "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN",
      "NNP", "NNPS", "NNS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS",
      "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT",
      "WP", "WP$", "WRB",
      // punctuation tags
      "#", "$", "''", "(", ")", ",", ".", ":", "``",
      // spare ids, never emitted
      "RESERVED1", "RESERVED2", "RESERVED3",
  }};
  return instance;
}

std::string_view TagSet::name(std::uint8_t id) const {
  if (id >= names_.size()) {
    throw std::invalid_argument("TagSet: id " + std::to_string(id) + " out of range");
  }
  return names_[id];
}

std::optional<std::uint8_t> TagSet::id_of(std::string_view name) const {
  const auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

LexiconTagger::LexiconTagger(std::map<std::string, std::uint8_t, std::less<>> lexicon,
                             std::vector<SuffixRule> rules)
    : lexicon_(std::move(lexicon)), rules_(std::move(rules)) {
  for (const auto& [word, tag] : lexicon_) {
    if (tag >= kTagAlphabetSize) {
      throw std::invalid_argument("LexiconTagger: tag id out of range for '" + word + "'");
    }
  }
  for (const SuffixRule& r : rules_) {
    if (r.suffix.empty() || r.tag >= kTagAlphabetSize) {
      throw std::invalid_argument("LexiconTagger: bad suffix rule");
    }
  }
}

const LexiconTagger& LexiconTagger::english() {
  static const LexiconTagger instance = [] {
    const TagSet& ts = TagSet::penn();
    const auto tid = [&ts](std::string_view n) { return *ts.id_of(n); };
    std::map<std::string, std::uint8_t, std::less<>> lex;
    const auto add = [&lex](std::initializer_list<const char*> words, std::uint8_t id) {
      for (const char* w : words) lex.emplace(w, id);
    };
    add({"the", "a", "an", "this", "that", "these", "those", "no", "every", "some", "all",
         "any", "each", "another", "both", "such"},
        tid("DT"));
    add({"and", "or", "but", "nor", "yet"}, tid("CC"));
    add({"of", "in", "on", "at", "by", "with", "from", "for", "as", "into", "over", "under",
         "after", "before", "between", "through", "during", "against", "about", "above",
         "below", "off", "than", "like", "without", "whether", "if", "because", "while",
         "though", "although"},
        tid("IN"));
    add({"to"}, tid("TO"));
    add({"is", "has", "does"}, tid("VBZ"));
    add({"are", "have", "do", "am"}, tid("VBP"));
    add({"was", "were", "had", "did", "said", "went", "came", "saw", "thought", "took",
         "found", "began"},
        tid("VBD"));
    add({"be", "go", "come", "take", "make", "get", "see", "know", "think", "say", "find"},
        tid("VB"));
    add({"been", "done", "gone", "made", "seen", "known", "taken", "given", "found"},
        tid("VBN"));
    add({"being", "going", "doing", "having"}, tid("VBG"));
    add({"will", "would", "can", "could", "shall", "should", "may", "might", "must"},
        tid("MD"));
    add({"not", "n't", "now", "then", "here", "very", "so", "just", "only", "also", "never",
         "always", "often", "again", "too", "quite", "rather", "down", "up", "out", "once",
         "still", "even"},
        tid("RB"));
    add({"there"}, tid("EX"));
    add({"i", "you", "he", "she", "it", "we", "they", "him", "them", "me", "us", "himself",
         "herself", "itself", "themselves", "myself", "yourself"},
        tid("PRP"));
    add({"my", "your", "his", "her", "its", "our", "their"}, tid("PRP$"));
    add({"who", "whom", "what"}, tid("WP"));
    add({"which"}, tid("WDT"));
    add({"whose"}, tid("WP$"));
    add({"when", "where", "why", "how"}, tid("WRB"));
    add({"oh", "ah", "yes", "alas"}, tid("UH"));
    add({"one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
         "hundred", "thousand", "first", "second"},
        tid("CD"));
    add({"time", "way", "day", "man", "thing", "world", "head", "house", "door", "voice",
         "moment", "place", "hand", "room", "word", "water", "king", "queen"},
        tid("NN"));

    // Applied in this order; first match wins, stem must be non-empty.
    std::vector<SuffixRule> rules = {
        {"'s", tid("POS")},  {"ness", tid("NN")}, {"ment", tid("NN")},
        {"tion", tid("NN")}, {"sion", tid("NN")}, {"ity", tid("NN")},
        {"ous", tid("JJ")},  {"ful", tid("JJ")},  {"ish", tid("JJ")},
        {"ive", tid("JJ")},  {"able", tid("JJ")}, {"ible", tid("JJ")},
        {"less", tid("JJ")}, {"ing", tid("VBG")}, {"ed", tid("VBD")},
        {"ly", tid("RB")},   {"iest", tid("JJS")},{"est", tid("JJS")},
        {"ies", tid("NNS")}, {"er", tid("JJR")},  {"s", tid("NNS")},
    };
    return LexiconTagger(std::move(lex), std::move(rules));
  }();
  return instance;
}

LexiconTagger LexiconTagger::from_file(const std::string& path, const TagSet& tags) {
  std::map<std::string, std::uint8_t, std::less<>> lex;
  for (const WordTagLine& e : parse_word_tag_file(path, tags)) {
    lex.insert_or_assign(e.word, e.tag);  // later lines win
  }
  return LexiconTagger(std::move(lex), english().rules());
}

std::uint8_t LexiconTagger::tag_word(std::string_view word) const {
  const std::string folded = fold_word(word);
  const auto it = lexicon_.find(folded);
  if (it != lexicon_.end()) return it->second;
  for (const SuffixRule& r : rules_) {
    if (folded.size() > r.suffix.size() && folded.ends_with(r.suffix)) return r.tag;
  }
  return 0;
}

std::vector<std::uint8_t> tag_prefix(const LexiconTagger& tagger,
                                     std::span<const std::uint8_t> text) {
  std::vector<std::uint8_t> out(text.size(), 0);
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string word;
    while (j < text.size() && is_word_byte(text[j])) {
      word.push_back(fold(text[j]));
      ++j;
    }
    if (j < text.size()) {
      // terminated, so the word is complete
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(i),
                out.begin() + static_cast<std::ptrdiff_t>(j), tagger.tag_word(word));
    }
    i = j;
  }
  return out;
}

void IncrementalTagger::push(std::uint8_t byte) {
  if (is_word_byte(byte)) {
    if (word_.empty()) run_start_ = tags_.size();
    word_.push_back(fold(byte));
    tags_.push_back(0);  // provisional until the word completes
    return;
  }
  if (!word_.empty()) {
    const std::uint8_t tag = tagger_->tag_word(word_);
    std::fill(tags_.begin() + static_cast<std::ptrdiff_t>(run_start_), tags_.end(), tag);
    word_.clear();
  }
  tags_.push_back(0);
}

void IncrementalTagger::clear() {
  tags_.clear();
  word_.clear();
  run_start_ = 0;
}

bool causal_consistency_check(const TagStreamFn& tag_fn, std::span<const std::uint8_t> text) {
  const std::vector<std::uint8_t> full = tag_fn(text);
  if (full.size() != text.size()) return false;
  for (std::size_t len = 0; len <= text.size(); ++len) {
    const std::vector<std::uint8_t> pre = tag_fn(text.first(len));
    if (pre.size() != len) return false;
    // Positions inside the prefix's trailing unterminated word run are
    // provisional and may legitimately differ.
    std::size_t open = len;
    while (open > 0 && is_word_byte(text[open - 1])) --open;
    for (std::size_t j = 0; j < open; ++j) {
      if (pre[j] != full[j]) return false;
    }
  }
  return true;
}

bool causal_consistency_check(const LexiconTagger& tagger, std::span<const std::uint8_t> text) {
  return causal_consistency_check(
      [&tagger](std::span<const std::uint8_t> t) { return tag_prefix(tagger, t); }, text);
}

std::vector<std::uint8_t> load_tag_file(const std::string& path,
                                        std::span<const std::uint8_t> text,
                                        const TagSet& tags) {
  const std::vector<WordTagLine> entries = parse_word_tag_file(path, tags);
  std::vector<std::uint8_t> out(text.size(), 0);
  std::size_t next = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string word;
    while (j < text.size() && is_word_byte(text[j])) {
      word.push_back(fold(text[j]));
      ++j;
    }
    if (next >= entries.size()) {
      throw FormatError(path + ": file ends before text word '" + word + "' (after line " +
                        std::to_string(entries.empty() ? 0 : entries.back().line) + ")");
    }
    const WordTagLine& e = entries[next++];
    if (e.word != word) {
      throw FormatError(path + " line " + std::to_string(e.line) + ": word '" + e.word +
                        "' does not match text word '" + word + "'");
    }
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(i),
              out.begin() + static_cast<std::ptrdiff_t>(j), e.tag);
    i = j;
  }
  if (next != entries.size()) {
    throw FormatError(path + " line " + std::to_string(entries[next].line) +
                      ": no matching word left in text");
  }
  return out;
}

}  // namespace ncomp
