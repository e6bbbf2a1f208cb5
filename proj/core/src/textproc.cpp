#include "topicreg/textproc.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "topicreg/error.hpp"
#include "topicreg/log.hpp"

namespace topicreg {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

bool looks_like_url(std::string_view chunk) {
  return starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
         starts_with_ci(chunk, "www.");
}

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

std::vector<std::string> TokenizerConfig::default_stopwords() {
  return {"a",  "an",  "and", "are", "at",  "be",   "but", "for", "in",   "is",
          "it", "me",  "my",  "of",  "on",  "or",   "the", "that", "this", "to",
          "was", "we", "with", "you", "your", "rt", "amp"};
}

void to_json(nlohmann::json& j, const TokenizerConfig& cfg) {
  j = nlohmann::json{{"stopwords", cfg.stopwords},
                     {"min_len", cfg.min_len},
                     {"min_df", cfg.min_df},
                     {"strip_urls", cfg.strip_urls}};
}

void from_json(const nlohmann::json& j, TokenizerConfig& cfg) {
  if (j.contains("stopwords")) cfg.stopwords = j.at("stopwords").get<std::vector<std::string>>();
  if (j.contains("min_len")) cfg.min_len = j.at("min_len").get<std::size_t>();
  if (j.contains("min_df")) cfg.min_df = j.at("min_df").get<std::size_t>();
  if (j.contains("strip_urls")) cfg.strip_urls = j.at("strip_urls").get<bool>();
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& rules) {
  const std::unordered_set<std::string_view> stop(rules.stopwords.begin(), rules.stopwords.end());
  std::vector<std::string> tokens;

  auto emit = [&](std::string& word) {
    if (!word.empty() && code_points(word) >= rules.min_len && !stop.contains(word)) {
      tokens.push_back(word);
    }
    word.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string_view chunk = text.substr(pos, end - pos);
    pos = end;
    if (chunk.empty() || (rules.strip_urls && looks_like_url(chunk))) continue;

    std::string word;
    for (char ch : chunk) {
      const auto c = static_cast<unsigned char>(ch);
      if (is_word_byte(c)) {
        word.push_back(static_cast<char>(std::tolower(c)));
      } else if (c == '\'') {
        continue;
      } else {
        emit(word);
      }
    }
    emit(word);
  }
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) {
      throw DataError("duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::lookup(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& t : terms_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

std::size_t Corpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

std::vector<std::size_t> Corpus::empty_docs() const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty()) out.push_back(d);
  }
  return out;
}

void Corpus::validate() const {
  if (docs.size() != doc_ids.size()) throw DataError("corpus docs and ids are misaligned");
  for (const auto& d : docs) {
    for (auto w : d) {
      if (w >= vocab.size()) throw DataError("token id out of vocabulary range");
    }
  }
}

Corpus build_corpus(const std::vector<Tweet>& tweets, const TokenizerConfig& rules) {
  if (rules.min_df < 1) throw UsageError("min_df must be >= 1");
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(tweets.size());
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& t : tweets) {
    tokenized.push_back(tokenize(t.text, rules));
    std::unordered_set<std::string_view> distinct(tokenized.back().begin(),
                                                  tokenized.back().end());
    for (auto tok : distinct) ++df[std::string(tok)];
  }

  std::vector<std::string> terms;
  for (const auto& [term, count] : df) {
    if (count >= rules.min_df) terms.push_back(term);
  }
  if (terms.empty()) throw DataError("no tokens survive filtering");

  Corpus corpus;
  corpus.vocab = Vocabulary(std::move(terms));
  corpus.docs.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    std::vector<std::uint32_t> ids;
    for (const auto& tok : tokenized[i]) {
      if (auto id = corpus.vocab.lookup(tok)) ids.push_back(static_cast<std::uint32_t>(*id));
    }
    corpus.docs.push_back(std::move(ids));
    corpus.doc_ids.push_back(tweets[i].id);
  }
  if (auto empties = corpus.empty_docs(); !empties.empty()) {
    warn(std::to_string(empties.size()) + " document(s) have no tokens after filtering");
  }
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  nlohmann::json j;
  j["vocab"] = corpus.vocab.terms();
  j["doc_ids"] = corpus.doc_ids;
  j["docs"] = corpus.docs;
  j["empty_docs"] = corpus.empty_docs();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump() << '\n';
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed corpus file " + path.string() + ": " + e.what());
  }
  Corpus c;
  c.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
  c.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  c.docs = j.at("docs").get<std::vector<std::vector<std::uint32_t>>>();
  c.validate();
  return c;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace topicreg
