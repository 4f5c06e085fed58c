#include "iolab/content.hpp"
#include "iolab/harness.hpp"
#include "iolab/stats.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <random>

namespace iolab {
namespace {

using testing::make_event;
using testing::make_log;

// Injected scenario with a fitted topic model, cached per scenario name.
struct Fitted {
    ScenarioConfig cfg;
    Scenario scenario;
    Corpus corpus;
    TopicModel model;
    std::unique_ptr<EventTopics> topics;
};

const Fitted& fitted(const std::string& name) {
    static std::map<std::string, std::unique_ptr<Fitted>> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        auto f = std::make_unique<Fitted>();
        f->cfg = bundled_scenario(name);
        f->scenario = inject_playbooks(f->cfg, simulate(f->cfg));
        f->corpus = Corpus::from_log(f->scenario.log, f->cfg.discourse.vocab_size);
        f->model = fit_topic_model(f->corpus, f->cfg.detectors.lda, 0);
        f->topics = std::make_unique<EventTopics>(f->scenario.log, f->corpus, f->model);
        it = cache.emplace(name, std::move(f)).first;
    }
    return *it->second;
}

// Tiny log with one-token documents so a one-topic model is exact.
struct Toy {
    EventLog log;
    Corpus corpus;
    TopicModel model;
};

Toy toy_without_reposts() {
    Toy t;
    std::vector<Event> events;
    for (EventId i = 0; i < 40; ++i) {
        events.push_back(make_event(i, static_cast<Timestamp>(i) * 3600, i % 4, EventKind::post, std::nullopt, {0}));
    }
    t.log = make_log(4, events);
    t.corpus = Corpus::from_log(t.log, 2);
    LdaParams p;
    p.num_topics = 1;
    p.iterations = 5;
    t.model = fit_topic_model(t.corpus, p, 0);
    return t;
}

TEST(Narrative, NoRepostsScoresZero) {
    const auto t = toy_without_reposts();
    const EventTopics topics(t.log, t.corpus, t.model);
    const auto scores = narrative_scores(t.log, topics);
    ASSERT_FALSE(scores.empty());
    for (const auto& s : scores) {
        EXPECT_EQ(s.reposts, 0.0);
        EXPECT_EQ(s.score, 0.0);
    }
}

TEST(Narrative, InfiniteThresholdFlagsNothing) {
    const auto& f = fitted("fig1-left");
    NarrativeParams p;
    p.theta_amp = std::numeric_limits<double>::infinity();
    EXPECT_TRUE(detect_narrative_onset(f.scenario.log, *f.topics, p).empty());
}

TEST(Narrative, AmplifiedTopicStandsOut) {
    const auto& f = fitted("fig1-left");
    // The topic operators repost most is the amplified one.
    const auto ops = f.scenario.truth.operator_set();
    std::map<TopicId, std::size_t> op_reposts;
    for (const auto& e : f.scenario.log.events) {
        if (e.kind == EventKind::repost && ops.count(e.author)) {
            if (auto k = f.topics->of(e.id)) ++op_reposts[*k];
        }
    }
    ASSERT_FALSE(op_reposts.empty());
    const TopicId amplified =
        std::max_element(op_reposts.begin(), op_reposts.end(),
                         [](const auto& a, const auto& b) { return a.second < b.second; })
            ->first;
    double amplified_score = 0.0;
    std::vector<double> others;
    for (const auto& s : narrative_scores(f.scenario.log, *f.topics)) {
        if (s.topic == amplified) amplified_score = s.score;
        else others.push_back(s.score);
    }
    ASSERT_FALSE(others.empty());
    EXPECT_GE(amplified_score, 2.0 * median(others));
}

TEST(Pivot, StationaryOrganicAccountsScoreLow) {
    const auto& f = fitted("organic-baseline");
    const auto& log = f.scenario.log;
    std::set<AccountId> touched;
    for (const auto& e : log.events) {
        if (e.kind == EventKind::del || e.kind == EventKind::profile_change) touched.insert(e.author);
    }
    const PivotScanner scanner(log, *f.topics);
    std::size_t checked = 0;
    for (const auto& acc : log.accounts) {
        if (touched.count(acc.id)) continue;
        const auto out = scanner.scan(acc.id);
        if (!out.score) continue;
        EXPECT_LT(out.score->composite, 0.2) << "account " << acc.id;
        EXPECT_NE(out.status, PivotStatus::flagged);
        ++checked;
    }
    EXPECT_GE(checked, 20u);
}

TEST(Pivot, OperatorsFlaggedNearPivot) {
    const auto& f = fitted("pivot-default");
    const auto& truth = f.scenario.truth;
    Timestamp pivot_time = -1;
    for (const auto& w : truth.windows) {
        if (w.playbook == roles::kPumpAndPivot) pivot_time = w.start;
    }
    ASSERT_GE(pivot_time, 0);
    const PivotScanner scanner(f.scenario.log, *f.topics);
    std::size_t flagged = 0;
    const auto ops = truth.operators_with_role(roles::kPumpAndPivot);
    for (AccountId id : ops) {
        const auto out = scanner.scan(id);
        if (out.status != PivotStatus::flagged) continue;
        ++flagged;
        EXPECT_LE(std::abs(out.score->change_point - pivot_time), 2 * kSecondsPerDay) << "account " << id;
        EXPECT_TRUE(out.score->profile_changed);
    }
    EXPECT_GE(static_cast<double>(flagged), 0.8 * static_cast<double>(ops.size()));
}

// Posts alternate over a fixed set of single-token topics.
Toy toy_posts(const std::vector<TokenId>& sequence, std::size_t vocab) {
    Toy t;
    std::vector<Event> events;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        events.push_back(make_event(i, static_cast<Timestamp>(i) * 3600, 0, EventKind::post, std::nullopt,
                                    {sequence[i], sequence[i], sequence[i]}));
    }
    t.log = make_log(1, events);
    t.corpus = Corpus::from_log(t.log, vocab);
    // Hand-built model: topic k puts all mass on token k.
    t.model.num_topics = vocab;
    t.model.vocab_size = vocab;
    t.model.alpha = 0.1;
    t.model.beta = 0.01;
    t.model.topic_word.assign(vocab, std::vector<double>(vocab, 1e-6));
    for (std::size_t k = 0; k < vocab; ++k) {
        t.model.topic_word[k][k] = 1.0 - 1e-6 * static_cast<double>(vocab - 1);
    }
    return t;
}

TEST(Pivot, IdenticalTopicsScoreZero) {
    std::vector<TokenId> seq(30, 1);
    const auto t = toy_posts(seq, 3);
    const EventTopics topics(t.log, t.corpus, t.model);
    const auto out = detect_pivot(t.log, topics, 0);
    ASSERT_TRUE(out.score);
    EXPECT_EQ(out.score->composite, 0.0);
    EXPECT_EQ(out.status, PivotStatus::not_flagged);
}

TEST(Pivot, TopicRelabelingInvariant) {
    std::vector<TokenId> seq;
    for (int i = 0; i < 15; ++i) seq.push_back(i % 3 == 0 ? 1 : 0);
    for (int i = 0; i < 15; ++i) seq.push_back(2);
    std::vector<TokenId> relabeled;
    for (auto w : seq) relabeled.push_back(static_cast<TokenId>((w + 1) % 3));
    const auto a = toy_posts(seq, 3);
    const auto b = toy_posts(relabeled, 3);
    const EventTopics ta(a.log, a.corpus, a.model), tb(b.log, b.corpus, b.model);
    const auto sa = detect_pivot(a.log, ta, 0), sb = detect_pivot(b.log, tb, 0);
    ASSERT_TRUE(sa.score && sb.score);
    EXPECT_NEAR(sa.score->composite, sb.score->composite, 1e-12);
    EXPECT_EQ(sa.score->change_point, sb.score->change_point);
    EXPECT_EQ(sa.score->change_point, 15 * 3600);
}

TEST(Pivot, TooFewPosts) {
    std::vector<TokenId> seq(9, 0);
    const auto t = toy_posts(seq, 2);
    const EventTopics topics(t.log, t.corpus, t.model);
    const auto out = detect_pivot(t.log, topics, 0);
    EXPECT_EQ(out.status, PivotStatus::too_few_posts);
    EXPECT_FALSE(out.score);
}

TEST(Amplification, OriginalOnlyAccountsScoreLow) {
    // Independent accounts posting originals at uniform random times.
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Timestamp> when(0, 30 * kSecondsPerDay);
    std::vector<Event> events;
    for (AccountId a = 0; a < 40; ++a) {
        for (int i = 0; i < 20; ++i) events.push_back(make_event(0, when(rng), a, EventKind::post, std::nullopt, {1}));
    }
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) { return x.ts < y.ts; });
    for (std::size_t i = 0; i < events.size(); ++i) events[i].id = i;
    const auto log = make_log(40, events);
    const AmplificationScorer scorer(log);
    for (AccountId a = 0; a < 40; ++a) {
        const auto s = scorer.score(a);
        ASSERT_TRUE(s);
        EXPECT_EQ(s->repost_share, 0.0);
        EXPECT_LT(s->score, 0.3) << "account " << a;
    }
}

TEST(Amplification, StackedCoreEmbedOperatorsScoreHigh) {
    const auto& f = fitted("stack-default");
    const AmplificationScorer scorer(f.scenario.log);
    for (AccountId id : f.scenario.truth.operators_with_role(roles::kCoreEmbed)) {
        const auto s = scorer.score(id);
        ASSERT_TRUE(s) << "account " << id;
        EXPECT_GT(s->score, 0.6) << "account " << id;
    }
}

TEST(Amplification, TooFewEvents) {
    std::vector<Event> events;
    for (EventId i = 0; i < 4; ++i) events.push_back(make_event(i, i * 10, 0, EventKind::post, std::nullopt, {1}));
    const auto log = make_log(1, events);
    EXPECT_FALSE(score_amplification(log, 0));
    events.push_back(make_event(4, 50, 0, EventKind::post, std::nullopt, {1}));
    EXPECT_TRUE(score_amplification(make_log(1, events), 0));
}

}  // namespace
}  // namespace iolab
