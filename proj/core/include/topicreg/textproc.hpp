#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topicreg/ingest.hpp"

namespace topicreg {

struct TokenizerConfig {
  std::vector<std::string> stopwords = default_stopwords();
  std::size_t min_len = 2;  // in code points
  std::size_t min_df = 2;
  bool strip_urls = true;

  static std::vector<std::string> default_stopwords();
};

void to_json(nlohmann::json& j, const TokenizerConfig& cfg);
void from_json(const nlohmann::json& j, TokenizerConfig& cfg);

/// Lowercases ASCII, drops URLs, strips '@'/'#' prefixes and punctuation
/// (apostrophes are deleted, other punctuation separates words), then
/// removes short tokens and stopwords. Bytes >= 0x80 are word characters.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& rules);

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t id) const { return terms_.at(id); }
  std::optional<std::size_t> lookup(std::string_view term) const;

  /// FNV-1a over the newline-joined terms; identifies the vocabulary a
  /// model was trained on.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Corpus {
  std::vector<std::vector<std::uint32_t>> docs;
  std::vector<std::string> doc_ids;
  Vocabulary vocab;

  std::size_t num_docs() const { return docs.size(); }
  std::size_t num_tokens() const;
  /// Indices of documents with no surviving tokens.
  std::vector<std::size_t> empty_docs() const;
  /// Throws DataError unless ids < V and docs align with doc_ids.
  void validate() const;
};

/// Vocabulary is the lexicographically sorted set of tokens that occur in at
/// least `min_df` documents. Every tweet yields one (possibly empty) doc.
Corpus build_corpus(const std::vector<Tweet>& tweets, const TokenizerConfig& rules);

void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

}  // namespace topicreg
