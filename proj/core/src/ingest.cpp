#include "topicreg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "topicreg/csv.hpp"
#include "topicreg/error.hpp"
#include "topicreg/log.hpp"

namespace topicreg {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

[[noreturn]] void record_error(std::size_t line, std::string_view field, std::string_view what) {
  throw DataError(std::string(what) + ", line " + std::to_string(line) + " (field '" +
                  std::string(field) + "')");
}

std::int64_t parse_count(std::string_view text, std::size_t line, std::string_view field) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    record_error(line, field, "invalid integer '" + std::string(text) + "'");
  }
  if (value < 0) {
    throw DataError("negative count, line " + std::to_string(line) + " (field '" +
                    std::string(field) + "')");
  }
  return value;
}

Timestamp parse_time_field(std::string_view text, std::size_t line, std::string_view field) {
  auto ts = parse_iso8601(text);
  if (!ts) record_error(line, field, "invalid ISO-8601 timestamp '" + std::string(text) + "'");
  return *ts;
}

Tweet tweet_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) record_error(line, "<record>", "expected a JSON object");
  auto require = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) record_error(line, key, "missing field");
    return *it;
  };
  Tweet t;
  const json& id = require("id");
  if (id.is_string()) {
    t.id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    t.id = std::to_string(id.get<std::int64_t>());
  } else {
    record_error(line, "id", "expected string");
  }
  const json& text = require("text");
  if (!text.is_string()) record_error(line, "text", "expected string");
  t.text = text.get<std::string>();
  const json& created = require("created_at");
  if (!created.is_string()) record_error(line, "created_at", "expected string");
  t.created_at = parse_time_field(created.get_ref<const std::string&>(), line, "created_at");
  const json& likes = require("likes");
  if (likes.is_number_integer()) {
    t.likes = likes.get<std::int64_t>();
    if (t.likes < 0) {
      throw DataError("negative count, line " + std::to_string(line) + " (field 'likes')");
    }
  } else if (likes.is_string()) {
    t.likes = parse_count(likes.get_ref<const std::string&>(), line, "likes");
  } else {
    record_error(line, "likes", "expected integer");
  }
  return t;
}

std::vector<Tweet> load_jsonl(std::istream& in) {
  std::vector<Tweet> tweets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("malformed JSON, line " + std::to_string(lineno) + ": " + e.what());
    }
    tweets.push_back(tweet_from_json(obj, lineno));
  }
  return tweets;
}

struct HeaderIndex {
  std::vector<int> column;  // position of each requested name

  HeaderIndex(const csv::Record& header, std::initializer_list<std::string_view> names) {
    for (auto name : names) {
      auto it = std::find(header.fields.begin(), header.fields.end(), name);
      if (it == header.fields.end()) {
        throw DataError("missing column '" + std::string(name) + "' in header, line " +
                        std::to_string(header.line));
      }
      column.push_back(static_cast<int>(it - header.fields.begin()));
    }
  }

  const std::string& get(const csv::Record& rec, std::size_t i, std::string_view name) const {
    const auto col = static_cast<std::size_t>(column[i]);
    if (col >= rec.fields.size()) record_error(rec.line, name, "missing field");
    return rec.fields[col];
  }
};

std::vector<Tweet> load_csv_tweets(std::istream& in) {
  csv::Reader reader(in);
  csv::Record rec;
  std::vector<Tweet> tweets;
  if (!reader.next(rec)) return tweets;
  const HeaderIndex idx(rec, {"id", "text", "created_at", "likes"});
  while (reader.next(rec)) {
    if (csv::is_blank(rec)) continue;
    Tweet t;
    t.id = idx.get(rec, 0, "id");
    if (t.id.empty()) record_error(rec.line, "id", "missing field");
    t.text = idx.get(rec, 1, "text");
    t.created_at = parse_time_field(idx.get(rec, 2, "created_at"), rec.line, "created_at");
    t.likes = parse_count(idx.get(rec, 3, "likes"), rec.line, "likes");
    tweets.push_back(std::move(t));
  }
  return tweets;
}

}  // namespace

std::string_view to_string(Party party) {
  return party == Party::Democratic ? "Democratic" : "Republican";
}

DebateSchedule::DebateSchedule(std::vector<DebateEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (entries_[i].date == entries_[j].date && entries_[i].party == entries_[j].party) {
        throw DataError("duplicate debate entry " + format_date(entries_[i].date) + " " +
                        std::string(to_string(entries_[i].party)));
      }
    }
  }
}

bool DebateSchedule::in_window(std::chrono::sys_days local_date, Party party) const {
  using std::chrono::days;
  return std::any_of(entries_.begin(), entries_.end(), [&](const DebateEntry& e) {
    return e.party == party && (local_date == e.date || local_date == e.date + days{1});
  });
}

TweetFormat tweet_format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? TweetFormat::Csv : TweetFormat::Jsonl;
}

std::vector<Tweet> load_tweets(const std::filesystem::path& path, TweetFormat format) {
  auto in = open_input(path);
  auto tweets = format == TweetFormat::Jsonl ? load_jsonl(in) : load_csv_tweets(in);
  std::unordered_set<std::string> seen;
  for (const auto& t : tweets) {
    if (!seen.insert(t.id).second) throw DataError("duplicate tweet id '" + t.id + "'");
  }
  return tweets;
}

std::vector<FollowerSnapshot> load_snapshots(const std::filesystem::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  csv::Record rec;
  std::vector<FollowerSnapshot> snaps;
  if (!reader.next(rec)) return snaps;
  const HeaderIndex idx(rec, {"observed_at", "count"});
  while (reader.next(rec)) {
    if (csv::is_blank(rec)) continue;
    FollowerSnapshot s;
    s.observed_at = parse_time_field(idx.get(rec, 0, "observed_at"), rec.line, "observed_at");
    s.count = parse_count(idx.get(rec, 1, "count"), rec.line, "count");
    snaps.push_back(s);
  }
  return snaps;
}

DebateSchedule load_debates(const std::filesystem::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  csv::Record rec;
  std::vector<DebateEntry> entries;
  if (!reader.next(rec)) return DebateSchedule{};
  const HeaderIndex idx(rec, {"date", "party"});
  while (reader.next(rec)) {
    if (csv::is_blank(rec)) continue;
    auto date = parse_date(idx.get(rec, 0, "date"));
    if (!date) record_error(rec.line, "date", "invalid date");
    std::string party = idx.get(rec, 1, "party");
    std::transform(party.begin(), party.end(), party.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    Party p;
    if (party == "democratic" || party == "d" || party == "dem") {
      p = Party::Democratic;
    } else if (party == "republican" || party == "r" || party == "rep") {
      p = Party::Republican;
    } else {
      record_error(rec.line, "party", "unknown party '" + party + "'");
    }
    entries.push_back({*date, p});
  }
  return DebateSchedule(std::move(entries));
}

void save_tweets_jsonl(const std::filesystem::path& path, const std::vector<Tweet>& tweets) {
  auto out = open_output(path);
  for (const auto& t : tweets) {
    json obj = {{"id", t.id},
                {"text", t.text},
                {"created_at", format_iso8601(t.created_at)},
                {"likes", t.likes}};
    out << obj.dump() << '\n';
  }
}

void save_snapshots(const std::filesystem::path& path,
                    const std::vector<FollowerSnapshot>& snaps) {
  auto out = open_output(path);
  csv::write_row(out, {"observed_at", "count"});
  for (const auto& s : snaps) {
    csv::write_row(out, {format_iso8601(s.observed_at), std::to_string(s.count)});
  }
}

void save_debates(const std::filesystem::path& path, const DebateSchedule& schedule) {
  auto out = open_output(path);
  csv::write_row(out, {"date", "party"});
  for (const auto& e : schedule.entries()) {
    csv::write_row(out, {format_date(e.date), std::string(to_string(e.party))});
  }
}

std::vector<JoinedTweet> join_followers(const std::vector<Tweet>& tweets,
                                        std::vector<FollowerSnapshot> snapshots,
                                        std::chrono::seconds max_staleness) {
  if (snapshots.empty() && !tweets.empty()) {
    warn("no follower snapshots; every tweet lacks a follower count");
  }
  std::stable_sort(snapshots.begin(), snapshots.end(),
                   [](const auto& a, const auto& b) { return a.observed_at < b.observed_at; });

  std::vector<JoinedTweet> joined;
  joined.reserve(tweets.size());
  for (const auto& t : tweets) {
    JoinedTweet j{t, std::nullopt};
    // First snapshot strictly after the tweet; its predecessor is the match.
    auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t.created_at,
                               [](Timestamp ts, const auto& s) { return ts < s.observed_at; });
    if (it != snapshots.begin()) {
      const auto& prior = *std::prev(it);
      if (t.created_at - prior.observed_at <= max_staleness) {
        j.followers_millions = static_cast<double>(prior.count) / 1e6;
      }
    }
    joined.push_back(std::move(j));
  }
  return joined;
}

CovariateFlags flag_covariates(const Tweet& tweet, const DebateSchedule& schedule,
                               UtcOffset offset) {
  using std::chrono::Saturday;
  using std::chrono::Sunday;
  const LocalTime local = to_local(tweet.created_at, offset);
  CovariateFlags f;
  f.local_hour = local.hour;
  f.is_weekend = local.weekday == Saturday || local.weekday == Sunday;
  f.dem_debate = schedule.in_window(local.date, Party::Democratic);
  f.rep_debate = schedule.in_window(local.date, Party::Republican);
  return f;
}

std::vector<AnalysisRow> build_rows(const std::vector<Tweet>& tweets,
                                    std::vector<FollowerSnapshot> snapshots,
                                    const DebateSchedule& schedule, UtcOffset offset,
                                    std::chrono::seconds max_staleness) {
  std::vector<AnalysisRow> rows;
  rows.reserve(tweets.size());
  for (auto& j : join_followers(tweets, std::move(snapshots), max_staleness)) {
    const CovariateFlags f = flag_covariates(j.tweet, schedule, offset);
    rows.push_back(AnalysisRow{std::move(j.tweet), j.followers_millions, f.local_hour,
                               f.is_weekend, f.dem_debate, f.rep_debate});
  }
  return rows;
}

std::vector<AnalysisRow> complete_rows(const std::vector<AnalysisRow>& rows) {
  std::vector<AnalysisRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [](const AnalysisRow& r) { return r.followers_millions.has_value(); });
  return out;
}

void save_rows(const std::filesystem::path& path, const std::vector<AnalysisRow>& rows) {
  auto out = open_output(path);
  csv::write_row(out, {"id", "created_at", "likes", "followers_millions", "local_hour",
                       "is_weekend", "dem_debate", "rep_debate"});
  for (const auto& r : rows) {
    char followers[32] = "";
    if (r.followers_millions) {
      std::snprintf(followers, sizeof followers, "%.17g", *r.followers_millions);
    }
    csv::write_row(out, {r.tweet.id, format_iso8601(r.tweet.created_at),
                         std::to_string(r.tweet.likes), followers, std::to_string(r.local_hour),
                         r.is_weekend ? "1" : "0", r.dem_debate ? "1" : "0",
                         r.rep_debate ? "1" : "0"});
  }
}

std::vector<AnalysisRow> load_rows(const std::filesystem::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  csv::Record rec;
  std::vector<AnalysisRow> rows;
  if (!reader.next(rec)) return rows;
  const HeaderIndex idx(rec, {"id", "created_at", "likes", "followers_millions", "local_hour",
                              "is_weekend", "dem_debate", "rep_debate"});
  auto flag = [&](std::size_t i, std::string_view name) {
    const auto& v = idx.get(rec, i, name);
    if (v != "0" && v != "1") record_error(rec.line, name, "expected 0 or 1");
    return v == "1";
  };
  while (reader.next(rec)) {
    if (csv::is_blank(rec)) continue;
    AnalysisRow r;
    r.tweet.id = idx.get(rec, 0, "id");
    r.tweet.created_at = parse_time_field(idx.get(rec, 1, "created_at"), rec.line, "created_at");
    r.tweet.likes = parse_count(idx.get(rec, 2, "likes"), rec.line, "likes");
    if (const auto& f = idx.get(rec, 3, "followers_millions"); !f.empty()) {
      try {
        r.followers_millions = std::stod(f);
      } catch (const std::exception&) {
        record_error(rec.line, "followers_millions", "invalid number");
      }
    }
    r.local_hour = static_cast<int>(parse_count(idx.get(rec, 4, "local_hour"), rec.line,
                                                "local_hour"));
    if (r.local_hour > 23) record_error(rec.line, "local_hour", "hour out of range");
    r.is_weekend = flag(5, "is_weekend");
    r.dem_debate = flag(6, "dem_debate");
    r.rep_debate = flag(7, "rep_debate");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace topicreg
