#ifndef NCOMP_TAGGING_HPP
#define NCOMP_TAGGING_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncomp {

// The 49-entry tag inventory: UNKNOWN (id 0), the 45 Penn Treebank tags,
// and 3 reserved ids.
class TagSet {
 public:
  explicit TagSet(std::vector<std::string> names);

  static const TagSet& penn();

  std::size_t size() const { return names_.size(); }
  std::string_view name(std::uint8_t id) const;
  std::optional<std::uint8_t> id_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::uint8_t, std::less<>> ids_;
};

// Bytes that can be part of a word: ASCII letters and the apostrophe.
inline bool is_word_byte(std::uint8_t b) {
  const std::uint8_t lower = b | 0x20;
  return (lower >= 'a' && lower <= 'z') || b == '\'';
}

struct SuffixRule {
  std::string suffix;
  std::uint8_t tag = 0;
};

// Word-local tagger: case-folded lexicon lookup, then suffix rules in
// declared order, then UNKNOWN. Because a word's tag depends on nothing but
// the word itself, tagging is causal: completed words never change tag as
// more text arrives.
class LexiconTagger {
 public:
  LexiconTagger(std::map<std::string, std::uint8_t, std::less<>> lexicon,
                std::vector<SuffixRule> rules);

  // Built-in tagger: common English function words plus a small ordered
  // suffix table.
  static const LexiconTagger& english();

  // Reads "word<TAB>tagname" lines into a lexicon, keeping the built-in
  // suffix rules. Unknown tag names are rejected with the line number.
  static LexiconTagger from_file(const std::string& path, const TagSet& tags = TagSet::penn());

  std::uint8_t tag_word(std::string_view word) const;

  const std::map<std::string, std::uint8_t, std::less<>>& lexicon() const { return lexicon_; }
  const std::vector<SuffixRule>& rules() const { return rules_; }

 private:
  std::map<std::string, std::uint8_t, std::less<>> lexicon_;
  std::vector<SuffixRule> rules_;
};

// Tags every byte of text: each maximal word run gets its word's tag
// replicated over its characters; other bytes get 0. A trailing run not yet
// terminated by a non-word byte is still provisional and tagged 0.
std::vector<std::uint8_t> tag_prefix(const LexiconTagger& tagger,
                                     std::span<const std::uint8_t> text);

// Same stream as tag_prefix, maintained byte-by-byte in amortized constant
// time. After push(b) the stream equals tag_prefix over everything pushed so
// far, which is what makes decode-side retagging possible.
class IncrementalTagger {
 public:
  explicit IncrementalTagger(const LexiconTagger& tagger) : tagger_(&tagger) {}

  void push(std::uint8_t byte);
  const std::vector<std::uint8_t>& tags() const { return tags_; }
  void clear();

 private:
  const LexiconTagger* tagger_;
  std::vector<std::uint8_t> tags_;
  std::string word_;             // open (unterminated) run, case-folded
  std::size_t run_start_ = 0;
};

using TagStreamFn = std::function<std::vector<std::uint8_t>(std::span<const std::uint8_t>)>;

// Verifies that for every prefix of text, tagging the prefix agrees with
// tagging the whole text on all positions outside the prefix's trailing
// unterminated word run. Any word-local tagger passes; a tagger that peeks
// at following context fails.
bool causal_consistency_check(const TagStreamFn& tag_fn, std::span<const std::uint8_t> text);
bool causal_consistency_check(const LexiconTagger& tagger, std::span<const std::uint8_t> text);

// Reads a pre-computed "word<TAB>tagname" file (one line per word of text,
// in document order) and replicates each tag over its word's characters.
// Word or count mismatches and unknown tag names are rejected with the line
// number.
std::vector<std::uint8_t> load_tag_file(const std::string& path,
                                        std::span<const std::uint8_t> text,
                                        const TagSet& tags = TagSet::penn());

}  // namespace ncomp

#endif  // NCOMP_TAGGING_HPP
