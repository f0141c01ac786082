#include "artsep/lexicon.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "artsep/common.hpp"

namespace artsep {

namespace detail {
extern const char* kBuiltinMannerTsv;
extern const char* kBuiltinLexiconTsv;
}  // namespace detail

const char* to_string(Manner m) {
  switch (m) {
    case Manner::NAS: return "NAS";
    case Manner::APR: return "APR";
    case Manner::FLP: return "FLP";
    case Manner::STP: return "STP";
    case Manner::FRC: return "FRC";
    case Manner::AFR: return "AFR";
    case Manner::VWL: return "VWL";
  }
  return "?";
}

std::optional<Manner> manner_from_string(std::string_view s) {
  for (Manner m : kMannerOrder)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

std::string normalize_word(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '\'')
      out.push_back(static_cast<char>(std::tolower(u)));
  }
  // Trim apostrophes left at the edges (quoting, possessive-final).
  std::size_t b = 0, e = out.size();
  while (b < e && out[b] == '\'') ++b;
  while (e > b && out[e - 1] == '\'') --e;
  return out.substr(b, e - b);
}

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void parse_lexicon_tsv(std::string_view text, std::map<std::string, std::vector<std::string>>& out) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("lexicon line " + std::to_string(lineno) + " has no tab separator");
    std::string word = normalize_word(line.substr(0, tab));
    auto phones = split_ws(line.substr(tab + 1));
    if (word.empty() || phones.empty())
      throw DataError("lexicon line " + std::to_string(lineno) + " has an empty word or pronunciation");
    out[word] = std::move(phones);
  }
}

void parse_manner_tsv(std::string_view text, std::map<std::string, Manner>& out) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_ws(line);
    if (fields.size() != 2)
      throw DataError("manner table line " + std::to_string(lineno) + " is not 'phoneme<TAB>class'");
    auto m = manner_from_string(fields[1]);
    if (!m)
      throw DataError("manner table line " + std::to_string(lineno) + ": unknown class '" +
                      fields[1] + "'");
    out[fields[0]] = *m;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Lexicon Lexicon::from_text(std::string_view lexicon_tsv, std::string_view manner_tsv) {
  Lexicon lex;
  parse_manner_tsv(manner_tsv, lex.manners_);
  parse_lexicon_tsv(lexicon_tsv, lex.words_);
  // Every phoneme used in an entry must have a manner mapping.
  for (const auto& [word, phones] : lex.words_)
    for (const auto& p : phones)
      if (!lex.manners_.count(p))
        throw DataError("lexicon entry '" + word + "' uses phoneme '" + p +
                        "' with no manner mapping");
  return lex;
}

Lexicon Lexicon::builtin_demo() {
  return from_text(detail::kBuiltinLexiconTsv, detail::kBuiltinMannerTsv);
}

Lexicon Lexicon::load(const std::string& lexicon_path, const std::string& manner_path) {
  return from_text(read_file(lexicon_path), read_file(manner_path));
}

std::vector<Pronunciation> Lexicon::tokenize(std::string_view text) const {
  std::vector<Pronunciation> out;
  std::vector<std::string> oov;
  for (const auto& raw : split_ws(text)) {
    std::string word = normalize_word(raw);
    if (word.empty()) continue;
    auto it = words_.find(word);
    if (it == words_.end()) {
      oov.push_back(word);
      continue;
    }
    out.push_back({word, it->second});
  }
  if (!oov.empty()) {
    std::string msg = "out-of-vocabulary word(s):";
    for (const auto& w : oov) msg += " '" + w + "'";
    throw DataError(msg);
  }
  return out;
}

Manner Lexicon::manner_of(const std::string& phoneme) const {
  auto it = manners_.find(phoneme);
  if (it == manners_.end())
    throw DataError("phoneme '" + phoneme + "' has no manner mapping");
  return it->second;
}

std::vector<MannerToken> Lexicon::to_manner_tokens(const std::vector<std::string>& phonemes) const {
  std::vector<MannerToken> out;
  out.reserve(phonemes.size());
  for (const auto& p : phonemes) out.push_back({manner_of(p), p});
  return out;
}

std::vector<MannerToken> Lexicon::tokens_for_text(std::string_view text) const {
  std::vector<std::string> phones;
  for (const auto& pron : tokenize(text))
    phones.insert(phones.end(), pron.phonemes.begin(), pron.phonemes.end());
  return to_manner_tokens(phones);
}

}  // namespace artsep
