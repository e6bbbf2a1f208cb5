#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "topicreg/csv.hpp"
#include "topicreg/error.hpp"
#include "topicreg/ingest.hpp"
#include "topicreg/timeutil.hpp"

using namespace topicreg;
using namespace std::chrono;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

Timestamp at(std::int64_t s) { return Timestamp{seconds{s}}; }

Tweet tweet_at(std::string id, Timestamp ts) {
  Tweet t;
  t.id = std::move(id);
  t.created_at = ts;
  return t;
}

Timestamp parse(std::string_view s) {
  auto t = parse_iso8601(s);
  EXPECT_TRUE(t.has_value()) << s;
  return t.value_or(Timestamp{});
}

}  // namespace

TEST(TimeUtil, ParsesZonesAndFractions) {
  EXPECT_EQ(format_iso8601(parse("2015-10-14T12:30:00Z")), "2015-10-14T12:30:00Z");
  EXPECT_EQ(format_iso8601(parse("2015-10-14T12:30:00+02:00")), "2015-10-14T10:30:00Z");
  EXPECT_EQ(format_iso8601(parse("2015-10-14T12:30:00-0500")), "2015-10-14T17:30:00Z");
  EXPECT_EQ(format_iso8601(parse("2015-10-14 12:30:59.999")), "2015-10-14T12:30:59Z");
  EXPECT_EQ(format_iso8601(parse("2015-10-14T12:30")), "2015-10-14T12:30:00Z");
  EXPECT_FALSE(parse_iso8601("2015-13-01T00:00:00Z"));
  EXPECT_FALSE(parse_iso8601("yesterday"));
  EXPECT_FALSE(parse_iso8601("2015-10-14T12:30:00Zjunk"));
}

TEST(TimeUtil, UtcOffsets) {
  EXPECT_EQ(parse_utc_offset("+05:30")->minutes.count(), 330);
  EXPECT_EQ(parse_utc_offset("-0400")->minutes.count(), -240);
  EXPECT_EQ(parse_utc_offset("UTC")->minutes.count(), 0);
  EXPECT_EQ(parse_utc_offset("-300")->minutes.count(), -300);
  EXPECT_FALSE(parse_utc_offset("+25:00"));
  EXPECT_EQ(format_utc_offset(UtcOffset{minutes{-300}}), "-05:00");
}

TEST(TimeUtil, LocalCalendarCrossesMidnight) {
  const LocalTime lt = to_local(parse("2015-10-14T02:00:00Z"), UtcOffset{minutes{-300}});
  EXPECT_EQ(format_date(lt.date), "2015-10-13");
  EXPECT_EQ(lt.hour, 21);
  EXPECT_EQ(lt.weekday, Tuesday);
}

TEST(Csv, QuotedFieldsAndEmbeddedNewlines) {
  std::istringstream in("a,b\r\n\"x, y\",\"he said \"\"hi\"\"\nbye\"\n\nlast,\n");
  csv::Reader r(in);
  csv::Record rec;
  ASSERT_TRUE(r.next(rec));
  EXPECT_EQ(rec.fields, (std::vector<std::string>{"a", "b"}));
  ASSERT_TRUE(r.next(rec));
  EXPECT_EQ(rec.line, 2u);
  EXPECT_EQ(rec.fields, (std::vector<std::string>{"x, y", "he said \"hi\"\nbye"}));
  ASSERT_TRUE(r.next(rec));
  EXPECT_TRUE(csv::is_blank(rec));
  ASSERT_TRUE(r.next(rec));
  EXPECT_EQ(rec.line, 5u);
  EXPECT_EQ(rec.fields, (std::vector<std::string>{"last", ""}));
  EXPECT_FALSE(r.next(rec));
}

TEST(Csv, UnterminatedQuoteIsDataError) {
  std::istringstream in("\"open,field\n");
  csv::Reader r(in);
  csv::Record rec;
  EXPECT_THROW(r.next(rec), DataError);
}

TEST(Csv, EscapeRoundTrip) {
  std::ostringstream out;
  const std::vector<std::string> row{"plain", "with,comma", "with\"quote", "multi\nline", ""};
  csv::write_row(out, row);
  std::istringstream in(out.str());
  csv::Reader r(in);
  csv::Record rec;
  ASSERT_TRUE(r.next(rec));
  EXPECT_EQ(rec.fields, row);
  EXPECT_EQ(csv::escape("plain"), "plain");
}

TEST(LoadTweets, EmptyFile) {
  TempDir dir;
  write_file(dir / "t.jsonl", "");
  EXPECT_TRUE(load_tweets(dir / "t.jsonl", TweetFormat::Jsonl).empty());
}

TEST(LoadTweets, JsonlAndCsvAgree) {
  TempDir dir;
  write_file(dir / "t.jsonl",
             R"({"id":"1","text":"Hello, world","created_at":"2015-10-14T12:00:00Z","likes":5})"
             "\n\n"
             R"({"id":"2","text":"again","created_at":"2015-10-15T01:02:03-05:00","likes":"7"})"
             "\n");
  write_file(dir / "t.csv",
             "likes,id,created_at,text\n5,1,2015-10-14T12:00:00Z,\"Hello, world\"\n"
             "7,2,2015-10-15T01:02:03-05:00,again\n");
  const auto a = load_tweets(dir / "t.jsonl", TweetFormat::Jsonl);
  const auto b = load_tweets(dir / "t.csv", tweet_format_for(dir / "t.csv"));
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_EQ(a[i].created_at, b[i].created_at);
    EXPECT_EQ(a[i].likes, b[i].likes);
  }
  EXPECT_EQ(a[1].likes, 7);
  EXPECT_EQ(format_iso8601(a[1].created_at), "2015-10-15T06:02:03Z");
}

TEST(LoadTweets, NegativeLikesNamesLine) {
  TempDir dir;
  write_file(dir / "t.jsonl",
             R"({"id":"1","text":"a","created_at":"2015-10-14T12:00:00Z","likes":1})"
             "\n"
             R"({"id":"2","text":"b","created_at":"2015-10-14T12:00:00Z","likes":"-3"})"
             "\n");
  try {
    load_tweets(dir / "t.jsonl", TweetFormat::Jsonl);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("negative count, line 2"), std::string::npos) << e.what();
  }
}

TEST(LoadTweets, MissingFieldNamesLineAndField) {
  TempDir dir;
  write_file(dir / "t.jsonl", R"({"id":"1","text":"a","likes":1})" "\n");
  try {
    load_tweets(dir / "t.jsonl", TweetFormat::Jsonl);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("created_at"), std::string::npos) << msg;
  }
}

TEST(LoadTweets, DuplicateIdRejected) {
  TempDir dir;
  write_file(dir / "t.csv",
             "id,text,created_at,likes\n1,a,2015-10-14T12:00:00Z,1\n1,b,2015-10-14T12:00:00Z,2\n");
  EXPECT_THROW(load_tweets(dir / "t.csv", TweetFormat::Csv), DataError);
}

TEST(LoadTweets, BadTimestampRejected) {
  TempDir dir;
  write_file(dir / "t.csv", "id,text,created_at,likes\n1,a,not-a-time,1\n");
  EXPECT_THROW(load_tweets(dir / "t.csv", TweetFormat::Csv), DataError);
}

TEST(LoadTweets, ManyRecordsRoundTrip) {
  TempDir dir;
  std::vector<Tweet> tweets;
  for (int i = 0; i < 2120; ++i) {
    Tweet t = tweet_at("id" + std::to_string(i), at(1444780800 + i * 60));
    t.text = "tweet \"" + std::to_string(i) + "\"\nline";
    t.likes = i;
    tweets.push_back(t);
  }
  save_tweets_jsonl(dir / "t.jsonl", tweets);
  const auto back = load_tweets(dir / "t.jsonl", TweetFormat::Jsonl);
  ASSERT_EQ(back.size(), 2120u);
  EXPECT_EQ(back[2119].text, tweets[2119].text);
  EXPECT_EQ(back[2119].created_at, tweets[2119].created_at);
}

TEST(JoinFollowers, MostRecentPrior) {
  const std::vector<FollowerSnapshot> snaps{{at(200), 4'600'000}, {at(100), 4'500'000}};
  const std::vector<Tweet> tweets{tweet_at("a", at(150)), tweet_at("b", at(50)), tweet_at("c", at(200))};
  const auto joined = join_followers(tweets, snaps, seconds::max());
  ASSERT_EQ(joined.size(), 3u);
  EXPECT_DOUBLE_EQ(*joined[0].followers_millions, 4.5);
  EXPECT_FALSE(joined[1].followers_millions.has_value());
  EXPECT_DOUBLE_EQ(*joined[2].followers_millions, 4.6);
}

TEST(JoinFollowers, StalenessLimit) {
  const std::vector<FollowerSnapshot> snaps{{at(100), 4'500'000}};
  const auto joined = join_followers({tweet_at("a", at(160)), tweet_at("b", at(161))}, snaps, seconds{60});
  EXPECT_TRUE(joined[0].followers_millions.has_value());
  EXPECT_FALSE(joined[1].followers_millions.has_value());
}

TEST(JoinFollowers, EmptySnapshotsWarn) {
  testsupport::CaptureWarnings w;
  const auto joined = join_followers({tweet_at("a", at(1))}, {}, kDefaultMaxStaleness);
  EXPECT_FALSE(joined[0].followers_millions.has_value());
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(JoinFollowers, MonotoneInTimestamp) {
  std::mt19937_64 rng(5);
  std::vector<FollowerSnapshot> snaps;
  std::int64_t count = 1'000'000;
  for (int i = 0; i < 50; ++i) {
    count += static_cast<std::int64_t>(rng() % 5000);
    snaps.push_back({at(i * 1000 + static_cast<std::int64_t>(rng() % 500)), count});
  }
  std::shuffle(snaps.begin(), snaps.end(), rng);
  std::vector<Tweet> tweets;
  for (int t = 0; t < 60'000; t += 97) tweets.push_back(tweet_at(std::to_string(t), at(t)));
  const auto joined = join_followers(tweets, snaps, seconds::max());
  std::optional<double> prev;
  for (const auto& j : joined) {
    if (prev) {
      ASSERT_TRUE(j.followers_millions.has_value());
      EXPECT_GE(*j.followers_millions, *prev);
    }
    if (j.followers_millions) prev = j.followers_millions;
  }
}

TEST(DebateSchedule, RejectsDuplicates) {
  const auto d = sys_days{year{2015} / 10 / 13};
  EXPECT_THROW(DebateSchedule({{d, Party::Democratic}, {d, Party::Democratic}}), DataError);
  EXPECT_NO_THROW(DebateSchedule({{d, Party::Democratic}, {d, Party::Republican}}));
}

TEST(FlagCovariates, DebateWindowAndWeekend) {
  const DebateSchedule schedule({{sys_days{year{2015} / 10 / 13}, Party::Democratic}});
  const auto on_day_after = flag_covariates(tweet_at("a", parse("2015-10-14T23:59:00Z")), schedule, {});
  EXPECT_TRUE(on_day_after.dem_debate);
  EXPECT_FALSE(on_day_after.rep_debate);
  const auto two_days_after = flag_covariates(tweet_at("b", parse("2015-10-15T00:00:00Z")), schedule, {});
  EXPECT_FALSE(two_days_after.dem_debate);
  // 2015-10-17 is a Saturday.
  const auto sat = flag_covariates(tweet_at("c", parse("2015-10-17T14:07:00Z")), schedule, {});
  EXPECT_TRUE(sat.is_weekend);
  EXPECT_EQ(sat.local_hour, 14);
  EXPECT_FALSE(sat.dem_debate);
}

TEST(FlagCovariates, OffsetShiftsLocalDate) {
  const DebateSchedule schedule({{sys_days{year{2015} / 10 / 13}, Party::Republican}});
  // 03:00 UTC on the 15th is 23:00 on the 14th at UTC-4.
  const auto f = flag_covariates(tweet_at("a", parse("2015-10-15T03:00:00Z")), schedule,
                                 UtcOffset{minutes{-240}});
  EXPECT_TRUE(f.rep_debate);
  EXPECT_EQ(f.local_hour, 23);
}

TEST(FlagCovariates, SameLocalDateSharesFlags) {
  const DebateSchedule schedule({{sys_days{year{2015} / 10 / 13}, Party::Democratic},
                                 {sys_days{year{2015} / 10 / 14}, Party::Republican}});
  for (int day = 10; day < 20; ++day) {
    const std::string date = "2015-10-" + std::to_string(day);
    const auto first = flag_covariates(tweet_at("x", parse(date + "T00:00:00Z")), schedule, {});
    for (int h = 1; h < 24; ++h) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%sT%02d:59:59Z", date.c_str(), h);
      const auto f = flag_covariates(tweet_at("y", parse(buf)), schedule, {});
      EXPECT_EQ(f.dem_debate, first.dem_debate);
      EXPECT_EQ(f.rep_debate, first.rep_debate);
    }
  }
}

TEST(BuildRows, ExclusionAccounting) {
  std::vector<Tweet> tweets;
  for (int i = 0; i < 100; ++i) tweets.push_back(tweet_at(std::to_string(i), at(i * 3600)));
  const std::vector<FollowerSnapshot> snaps{{at(10 * 3600), 100}, {at(70 * 3600), 200}};
  const auto rows = build_rows(tweets, snaps, DebateSchedule{}, UtcOffset{}, hours{48});
  const auto complete = complete_rows(rows);
  std::size_t absent = 0;
  for (const auto& r : rows) absent += !r.followers_millions.has_value();
  EXPECT_EQ(complete.size() + absent, tweets.size());
  // hours 0-9 precede any snapshot; 59-69 are more than 48 h after the first.
  EXPECT_EQ(absent, 10u + 11u);
}

TEST(Files, SnapshotsDebatesAndRowsRoundTrip) {
  TempDir dir;
  const std::vector<FollowerSnapshot> snaps{{at(100), 4'500'000}, {at(200), 4'600'000}};
  save_snapshots(dir / "s.csv", snaps);
  const auto s2 = load_snapshots(dir / "s.csv");
  ASSERT_EQ(s2.size(), 2u);
  EXPECT_EQ(s2[1].count, 4'600'000);

  const DebateSchedule schedule({{sys_days{year{2015} / 10 / 13}, Party::Democratic},
                                 {sys_days{year{2015} / 10 / 28}, Party::Republican}});
  save_debates(dir / "d.csv", schedule);
  EXPECT_EQ(load_debates(dir / "d.csv").entries().size(), 2u);

  write_file(dir / "d2.csv", "date,party\n2015-10-13,D\n2015-10-28,rep\n");
  const auto d2 = load_debates(dir / "d2.csv");
  EXPECT_TRUE(d2.in_window(sys_days{year{2015} / 10 / 29}, Party::Republican));
  write_file(dir / "d3.csv", "date,party\n2015-10-13,green\n");
  EXPECT_THROW(load_debates(dir / "d3.csv"), DataError);

  std::vector<Tweet> tweets{tweet_at("a", at(150)), tweet_at("b", at(50))};
  tweets[0].likes = 12;
  const auto rows = build_rows(tweets, snaps, schedule, UtcOffset{}, hours{48});
  save_rows(dir / "rows.csv", rows);
  const auto back = load_rows(dir / "rows.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].tweet.likes, 12);
  EXPECT_EQ(back[0].followers_millions, rows[0].followers_millions);
  EXPECT_FALSE(back[1].followers_millions.has_value());
}

TEST(Files, MissingColumnIsDataError) {
  TempDir dir;
  write_file(dir / "s.csv", "observed_at\n2015-10-13T00:00:00Z\n");
  EXPECT_THROW(load_snapshots(dir / "s.csv"), DataError);
  EXPECT_THROW(load_snapshots(dir / "nope.csv"), DataError);
}
