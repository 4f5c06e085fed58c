#include "iolab/content.hpp"

#include "iolab/event_log.hpp"
#include "iolab/stats.hpp"
#include "iolab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace iolab {

std::vector<NarrativeScore> narrative_scores(const EventLog& log, const EventTopics& topics,
                                             const NarrativeParams& params) {
    const auto n_windows = window_count(log, params.window_len);
    const auto K = topics.num_topics();
    struct Cell {
        double volume = 0, reposts = 0, originals = 0;
    };
    std::vector<std::vector<Cell>> cells(K, std::vector<Cell>(n_windows));
    for (const auto& e : log.events) {
        const auto t = topics.of(e.id);
        if (!t || *t >= K) continue;
        auto& c = cells[*t][static_cast<std::size_t>(std::max<Timestamp>(e.ts, 0) / params.window_len)];
        c.volume += 1.0;
        if (e.kind == EventKind::repost) {
            c.reposts += 1.0;
        } else {
            c.originals += 1.0;
        }
    }

    std::vector<NarrativeScore> out;
    for (TopicId t = 0; t < K; ++t) {
        const auto& series = cells[t];
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Cell& c) { return c.volume > params.noise_floor; });
        if (it == series.end()) continue;
        const auto w = static_cast<std::size_t>(it - series.begin());
        NarrativeScore s;
        s.topic = t;
        s.onset_window = w;
        s.reposts = series[w].reposts;
        s.originals = series[w].originals;
        s.growth = 1.0;
        if (w + 1 < n_windows) {
            s.reposts += series[w + 1].reposts;
            s.originals += series[w + 1].originals;
            s.growth = series[w + 1].volume / series[w].volume;
        }
        s.score = s.originals > 0.0 ? s.reposts / s.originals * s.growth : 0.0;
        out.push_back(s);
    }
    return out;
}

std::vector<NarrativeScore> detect_narrative_onset(const EventLog& log, const EventTopics& topics,
                                                   const NarrativeParams& params) {
    auto all = narrative_scores(log, topics, params);
    std::erase_if(all, [&](const NarrativeScore& s) { return !(s.score >= params.theta_amp); });
    return all;
}

void PivotParams::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InvalidArgument("pivot weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("pivot weights must sum to 1");
    if (min_posts < 2) throw InvalidArgument("pivot min_posts must be at least 2");
}

PivotScanner::PivotScanner(const EventLog& log, const EventTopics& topics) : num_topics_(topics.num_topics()) {
    const EventIndex index(log);
    for (const auto& e : log.events) {
        if (is_authored_content(e.kind)) {
            if (auto t = topics.of(e.id)) posts_[e.author].push_back({e.ts, e.id, *t});
        } else if (e.kind == EventKind::del && e.target) {
            const Event* target = index.find(*e.target);
            if (target != nullptr && target->author == e.author) deleted_[e.author].push_back(*e.target);
        } else if (e.kind == EventKind::profile_change) {
            profile_changed_[e.author] = true;
        }
    }
    for (auto& [_, ids] : deleted_) std::sort(ids.begin(), ids.end());
}

PivotOutcome PivotScanner::scan(AccountId account, const PivotParams& params) const {
    params.validate();
    PivotOutcome outcome;
    auto pit = posts_.find(account);
    const std::size_t n = pit == posts_.end() ? 0 : pit->second.size();
    if (n < params.min_posts) return outcome;
    const auto& posts = pit->second;

    const std::size_t min_seg = std::min(
        n / 2, std::max(params.min_segment,
                        static_cast<std::size_t>(std::ceil(params.min_segment_share * static_cast<double>(n)))));
    std::vector<double> before(num_topics_, 0.0), after(num_topics_, 0.0);
    for (const auto& p : posts) after[p.topic] += 1.0;
    for (std::size_t i = 0; i < min_seg; ++i) {
        before[posts[i].topic] += 1.0;
        after[posts[i].topic] -= 1.0;
    }
    double best = -1.0;
    std::size_t best_i = min_seg;
    for (std::size_t i = min_seg; i + min_seg <= n; ++i) {
        const double js = normalized_js_divergence(before, after);
        if (js > best + 1e-12) {
            best = js;
            best_i = i;
        }
        before[posts[i].topic] += 1.0;
        after[posts[i].topic] -= 1.0;
    }

    PivotScore s;
    s.account = account;
    s.change_point = posts[best_i].ts;
    s.divergence = std::clamp(best, 0.0, 1.0);
    auto dit = deleted_.find(account);
    std::size_t removed = 0;
    if (dit != deleted_.end()) {
        for (std::size_t i = 0; i < best_i; ++i) {
            if (std::binary_search(dit->second.begin(), dit->second.end(), posts[i].id)) ++removed;
        }
    }
    s.deletion_fraction = static_cast<double>(removed) / static_cast<double>(best_i);
    s.profile_changed = profile_changed_.contains(account);
    s.composite = params.weights[0] * s.divergence + params.weights[1] * s.deletion_fraction +
                  params.weights[2] * (s.profile_changed ? 1.0 : 0.0);
    outcome.status = s.composite >= params.theta_pivot ? PivotStatus::flagged : PivotStatus::not_flagged;
    outcome.score = s;
    return outcome;
}

PivotOutcome detect_pivot(const EventLog& log, const EventTopics& topics, AccountId account,
                          const PivotParams& params) {
    return PivotScanner(log, topics).scan(account, params);
}

AmplificationScorer::AmplificationScorer(const EventLog& log, const AmplificationParams& params)
    : params_(params) {
    timeline_.reserve(log.events.size());
    for (const auto& e : log.events) timeline_.push_back({e.ts, e.author, e.kind == EventKind::repost});
    std::stable_sort(timeline_.begin(), timeline_.end(),
                     [](const Stamp& a, const Stamp& b) { return a.ts < b.ts; });
    for (std::size_t i = 0; i < timeline_.size(); ++i) by_account_[timeline_[i].author].push_back(i);
}

std::optional<AmplificationScore> AmplificationScorer::score(AccountId account) const {
    auto it = by_account_.find(account);
    if (it == by_account_.end() || it->second.size() < params_.min_events) return std::nullopt;
    const auto& mine = it->second;
    const double n = static_cast<double>(mine.size());

    AmplificationScore s;
    s.account = account;
    double reposts = 0.0;
    for (auto i : mine) reposts += timeline_[i].repost ? 1.0 : 0.0;
    s.repost_share = reposts / n;

    std::vector<double> gaps;
    for (std::size_t k = 1; k < mine.size(); ++k) {
        gaps.push_back(static_cast<double>(timeline_[mine[k]].ts - timeline_[mine[k - 1]].ts));
    }
    const auto cv = coefficient_of_variation(gaps);
    s.regularity = cv ? std::max(0.0, 1.0 - *cv) : 1.0;

    // For each other account, how many of ours have one of theirs close by.
    std::map<AccountId, double> coincident;
    std::set<AccountId> near;
    for (auto i : mine) {
        const Timestamp t = timeline_[i].ts;
        near.clear();
        auto lo = std::lower_bound(timeline_.begin(), timeline_.end(), t - params_.sync_window,
                                   [](const Stamp& a, Timestamp v) { return a.ts < v; });
        for (auto p = lo; p != timeline_.end() && p->ts <= t + params_.sync_window; ++p) {
            if (p->author != account) near.insert(p->author);
        }
        for (auto b : near) coincident[b] += 1.0;
    }
    double best = 0.0;
    for (const auto& [_, c] : coincident) best = std::max(best, c);
    s.synchrony = best / n;

    s.score = params_.weights[0] * s.repost_share + params_.weights[1] * s.regularity +
              params_.weights[2] * s.synchrony;
    s.score = std::clamp(s.score, 0.0, 1.0);
    return s;
}

std::vector<AmplificationScore> AmplificationScorer::score_all() const {
    std::vector<AmplificationScore> out;
    for (const auto& [a, _] : by_account_) {
        if (auto s = score(a)) out.push_back(*s);
    }
    return out;
}

std::optional<AmplificationScore> score_amplification(const EventLog& log, AccountId account,
                                                      const AmplificationParams& params) {
    return AmplificationScorer(log, params).score(account);
}

}  // namespace iolab
