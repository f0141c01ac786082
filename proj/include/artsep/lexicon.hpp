#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artsep {

// Manner-of-articulation classes: six consonant manners plus one vowel class.
// The index order is fixed system-wide; articulation matrices, projectors and
// per-category metrics all use it.
enum class Manner : int { NAS = 0, APR = 1, FLP = 2, STP = 3, FRC = 4, AFR = 5, VWL = 6 };

inline constexpr int kNumManners = 7;

inline constexpr std::array<Manner, kNumManners> kMannerOrder = {
    Manner::NAS, Manner::APR, Manner::FLP, Manner::STP,
    Manner::FRC, Manner::AFR, Manner::VWL};

const char* to_string(Manner m);
std::optional<Manner> manner_from_string(std::string_view s);

// Alphabetical order used by result tables (AFR..VWL columns).
inline constexpr std::array<Manner, kNumManners> kReportOrder = {
    Manner::AFR, Manner::APR, Manner::FLP, Manner::FRC,
    Manner::NAS, Manner::STP, Manner::VWL};

struct Pronunciation {
  std::string word;
  std::vector<std::string> phonemes;  // SAMPA symbols
};

struct MannerToken {
  Manner manner;
  std::string phoneme;
};

// Word -> SAMPA pronunciations plus the phoneme -> manner table.
// Immutable after load; all lookups are read-only.
class Lexicon {
public:
  // Small built-in demo lexicon (~200 words) used by tests and the toy corpus.
  static Lexicon builtin_demo();

  // TSV formats: "word<TAB>phoneme phoneme ..." and "phoneme<TAB>class".
  // Lines starting with '#' are comments.
  static Lexicon load(const std::string& lexicon_path, const std::string& manner_path);

  static Lexicon from_text(std::string_view lexicon_tsv, std::string_view manner_tsv);

  // Whitespace-split, punctuation-stripped, case-folded lookup. Unknown words
  // raise DataError listing each one.
  std::vector<Pronunciation> tokenize(std::string_view text) const;

  Manner manner_of(const std::string& phoneme) const;

  // One token per phoneme; consecutive same-class phonemes stay separate.
  std::vector<MannerToken> to_manner_tokens(const std::vector<std::string>& phonemes) const;

  // tokenize + pronunciation flattening + manner lookup in one call.
  std::vector<MannerToken> tokens_for_text(std::string_view text) const;

  const std::map<std::string, std::vector<std::string>>& words() const { return words_; }
  const std::map<std::string, Manner>& manner_table() const { return manners_; }

private:
  std::map<std::string, std::vector<std::string>> words_;
  std::map<std::string, Manner> manners_;
};

// Lowercases and strips leading/trailing punctuation; keeps internal
// apostrophes ("don't"). Returns empty if nothing remains.
std::string normalize_word(std::string_view raw);

}  // namespace artsep
