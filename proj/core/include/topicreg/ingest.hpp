#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topicreg/timeutil.hpp"

namespace topicreg {

struct Tweet {
  std::string id;
  std::string text;
  Timestamp created_at;
  std::int64_t likes = 0;
};

struct FollowerSnapshot {
  Timestamp observed_at;
  std::int64_t count = 0;
};

enum class Party { Democratic, Republican };

std::string_view to_string(Party party);

struct DebateEntry {
  std::chrono::sys_days date;
  Party party;
};

/// Debate dates in the configured local calendar. Construction rejects
/// duplicate (date, party) pairs.
class DebateSchedule {
 public:
  DebateSchedule() = default;
  explicit DebateSchedule(std::vector<DebateEntry> entries);

  const std::vector<DebateEntry>& entries() const { return entries_; }

  /// True on a debate day of `party` or the day after.
  bool in_window(std::chrono::sys_days local_date, Party party) const;

 private:
  std::vector<DebateEntry> entries_;
};

/// Per-tweet covariates derived from the posting time.
struct CovariateFlags {
  int local_hour = 0;
  bool is_weekend = false;
  bool dem_debate = false;
  bool rep_debate = false;
};

struct AnalysisRow {
  Tweet tweet;
  std::optional<double> followers_millions;  // absent when no snapshot qualified
  int local_hour = 0;
  bool is_weekend = false;
  bool dem_debate = false;
  bool rep_debate = false;
};

struct JoinedTweet {
  Tweet tweet;
  std::optional<double> followers_millions;
};

enum class TweetFormat { Jsonl, Csv };

/// Guesses the format from the extension (`.csv` vs anything else).
TweetFormat tweet_format_for(const std::filesystem::path& path);

std::vector<Tweet> load_tweets(const std::filesystem::path& path, TweetFormat format);
std::vector<FollowerSnapshot> load_snapshots(const std::filesystem::path& path);
DebateSchedule load_debates(const std::filesystem::path& path);

void save_tweets_jsonl(const std::filesystem::path& path, const std::vector<Tweet>& tweets);
void save_snapshots(const std::filesystem::path& path, const std::vector<FollowerSnapshot>& snaps);
void save_debates(const std::filesystem::path& path, const DebateSchedule& schedule);

/// Pairs each tweet with count/1e6 of the most recent snapshot at or before
/// its timestamp. A snapshot older than `max_staleness` yields no value.
/// Snapshots need not be sorted.
std::vector<JoinedTweet> join_followers(const std::vector<Tweet>& tweets,
                                        std::vector<FollowerSnapshot> snapshots,
                                        std::chrono::seconds max_staleness);

CovariateFlags flag_covariates(const Tweet& tweet, const DebateSchedule& schedule,
                               UtcOffset offset);

/// join_followers + flag_covariates for every tweet, in input order.
std::vector<AnalysisRow> build_rows(const std::vector<Tweet>& tweets,
                        std::vector<FollowerSnapshot> snapshots,
                        const DebateSchedule& schedule, UtcOffset offset,
                        std::chrono::seconds max_staleness);

/// Rows that carry a follower value; the rest are excluded from regression.
std::vector<AnalysisRow> complete_rows(const std::vector<AnalysisRow>& rows);

/// Analysis rows persisted as CSV (tweet text omitted).
void save_rows(const std::filesystem::path& path, const std::vector<AnalysisRow>& rows);
std::vector<AnalysisRow> load_rows(const std::filesystem::path& path);

inline constexpr std::chrono::seconds kDefaultMaxStaleness = std::chrono::hours{48};

}  // namespace topicreg
