#include "iolab/event_log.hpp"
#include "iolab/log_io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

namespace iolab {
namespace {

using testing::make_event;
using testing::make_log;
using testing::TempDir;

TEST(ValidateEventLog, EmptyLogIsValid) {
    EXPECT_TRUE(validate_event_log(EventLog{}).empty());
}

TEST(ValidateEventLog, ForeignDeleteIsOneViolation) {
    auto log = make_log(2, {make_event(0, 10, 0, EventKind::post, std::nullopt, {1, 2}),
                            make_event(1, 20, 1, EventKind::del, 0)});
    const auto v = validate_event_log(log);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].event_id, 1u);
    EXPECT_EQ(v[0].rule, rules::kDeleteForeign);
}

TEST(ValidateEventLog, DefaultSimulationIsValid) {
    EXPECT_TRUE(validate_event_log(testing::default_simulation(0).scenario.log).empty());
}

TEST(ValidateEventLog, ReportsEachRule) {
    auto log = make_log(2, {make_event(0, 10, 0, EventKind::post, std::nullopt, {1}),
                            make_event(1, 5, 0, EventKind::post, std::nullopt, {1}),
                            make_event(2, 20, 7, EventKind::post, std::nullopt, {1}),
                            make_event(3, 30, 0, EventKind::repost),
                            make_event(4, 40, 0, EventKind::reply, 99, {1}),
                            make_event(5, 50, 1, EventKind::mention, 5, {1}),
                            make_event(6, 60, 0, EventKind::post, 0, {1})});
    std::vector<std::string> found;
    for (const auto& v : validate_event_log(log)) found.push_back(v.rule);
    for (const char* rule : {rules::kTimestampOrder, rules::kUnknownAuthor, rules::kMissingTarget,
                             rules::kTargetNotEarlier, rules::kInvalidMention, rules::kUnexpectedTarget}) {
        EXPECT_NE(std::find(found.begin(), found.end(), rule), found.end()) << rule;
    }
}

TEST(ValidateEventLog, VerdictIgnoresStorageOrder) {
    auto log = make_log(2, {make_event(0, 10, 0, EventKind::post, std::nullopt, {1}),
                            make_event(1, 20, 1, EventKind::del, 0),
                            make_event(2, 30, 1, EventKind::post, std::nullopt, {2}),
                            make_event(3, 30, 0, EventKind::repost, 2)});
    const auto base = validate_event_log(log);
    ASSERT_EQ(base.size(), 1u);
    EXPECT_EQ(validate_event_log(log), base);
    std::mt19937 rng(3);
    for (int i = 0; i < 10; ++i) {
        auto shuffled = log;
        std::shuffle(shuffled.events.begin(), shuffled.events.end(), rng);
        sort_canonical(shuffled.events);
        EXPECT_EQ(validate_event_log(shuffled), base);
    }
}

TEST(LogIo, RoundTripIsIdentity) {
    TempDir dir("roundtrip");
    auto log = make_log(2, {make_event(0, 10, 0, EventKind::post, std::nullopt, {1, 2, 3}, 4),
                            make_event(1, 20, 1, EventKind::repost, 0, {}, 2),
                            make_event(2, 30, 1, EventKind::mention, 0, {5}),
                            make_event(3, 40, 0, EventKind::profile_change)});
    log.events[2].geo = "geo:xa";
    log.accounts[1].profile = {7, 8};
    write_event_log(log, dir.path() / "e.jsonl", dir.path() / "a.jsonl");
    EXPECT_EQ(read_event_log(dir.path() / "e.jsonl", dir.path() / "a.jsonl"), log);
}

TEST(LogIo, NonRecordLineNamesLine) {
    TempDir dir("badline");
    auto log = make_log(1, {make_event(0, 10, 0, EventKind::post, std::nullopt, {1})});
    write_event_log(log, dir.path() / "e.jsonl", dir.path() / "a.jsonl");
    {
        std::ofstream out(dir.path() / "e.jsonl", std::ios::app);
        out << "this is not a record\n";
    }
    try {
        read_event_log(dir.path() / "e.jsonl", dir.path() / "a.jsonl");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(LogIo, InvalidLogRaisesInvariantError) {
    TempDir dir("invariant");
    auto log = make_log(2, {make_event(0, 10, 0, EventKind::post, std::nullopt, {1}),
                            make_event(1, 20, 1, EventKind::del, 0)});
    write_event_log(log, dir.path() / "e.jsonl", dir.path() / "a.jsonl");
    EXPECT_THROW(read_event_log(dir.path() / "e.jsonl", dir.path() / "a.jsonl"), InvariantError);
}

TEST(LogIo, GeneratedLogRewriteIsByteIdentical) {
    TempDir dir("bytes");
    auto log = testing::default_simulation(0).scenario.log;
    log.events.resize(10000);
    // Truncation can orphan nothing: targets always point backwards.
    ASSERT_TRUE(validate_event_log(log).empty());
    write_event_log(log, dir.path() / "e1.jsonl", dir.path() / "a1.jsonl");
    const auto back = read_event_log(dir.path() / "e1.jsonl", dir.path() / "a1.jsonl");
    EXPECT_EQ(back, log);
    write_event_log(back, dir.path() / "e2.jsonl", dir.path() / "a2.jsonl");
    EXPECT_EQ(read_text_file(dir.path() / "e1.jsonl"), read_text_file(dir.path() / "e2.jsonl"));
    EXPECT_EQ(read_text_file(dir.path() / "a1.jsonl"), read_text_file(dir.path() / "a2.jsonl"));
}

TEST(LogIo, GroundTruthRoundTrip) {
    GroundTruth t;
    t.operators = {{200, roles::kBridge, 0, -1, 1}, {201, roles::kDegrade, 1, 0, -1}};
    t.windows = {{roles::kBridge, 100, 200}};
    t.communities = {0, 1, 1};
    t.topics = {{0.25, 0.75}, {0.5, 0.5}};
    EXPECT_EQ(parse_ground_truth(format_ground_truth(t)), t);
}

}  // namespace
}  // namespace iolab
