#include "iolab/topic_model.hpp"

#include "iolab/event_log.hpp"
#include "iolab/rng.hpp"
#include "iolab/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace iolab {

std::size_t Corpus::num_tokens() const {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.size();
    return n;
}

std::size_t Corpus::num_distinct_tokens() const {
    std::set<TokenId> seen;
    for (const auto& d : docs) seen.insert(d.begin(), d.end());
    return seen.size();
}

Corpus Corpus::from_log(const EventLog& log, std::size_t vocab_size) {
    Corpus c;
    TokenId max_token = 0;
    for (const auto& e : log.events) {
        if (!is_authored_content(e.kind) || e.tokens.empty()) continue;
        c.docs.push_back(e.tokens);
        c.event_ids.push_back(e.id);
        for (TokenId t : e.tokens) max_token = std::max(max_token, t);
    }
    const std::size_t needed = c.docs.empty() ? 0 : static_cast<std::size_t>(max_token) + 1;
    if (vocab_size != 0 && vocab_size < needed) {
        throw InvalidArgument("corpus holds token ids beyond the vocabulary");
    }
    c.vocab_size = vocab_size != 0 ? vocab_size : needed;
    return c;
}

TopicId TopicModel::classify(std::span<const TokenId> tokens) const {
    return classify_tokens(tokens, topic_word);
}

TopicModel fit_topic_model(const Corpus& corpus, const LdaParams& params, std::uint64_t seed) {
    if (corpus.docs.empty()) throw InvalidArgument("fit_topic_model: empty corpus");
    if (params.iterations < 1) throw InvalidArgument("fit_topic_model: iterations must be >= 1");
    if (params.num_topics < 1) throw InvalidArgument("fit_topic_model: need at least one topic");
    if (params.alpha <= 0.0 || params.beta <= 0.0) {
        throw InvalidArgument("fit_topic_model: concentrations must be positive");
    }
    if (params.num_topics > corpus.num_distinct_tokens()) {
        throw InvalidArgument("fit_topic_model: more topics than distinct tokens");
    }

    const std::size_t K = params.num_topics;
    const std::size_t V = corpus.vocab_size;
    const std::size_t D = corpus.docs.size();
    const double alpha = params.alpha;
    const double beta = params.beta;
    const double vbeta = static_cast<double>(V) * beta;

    Rng rng = make_rng(seed, "lda");
    std::vector<std::vector<std::uint32_t>> z(D);
    std::vector<std::vector<std::uint32_t>> ndk(D, std::vector<std::uint32_t>(K, 0));
    std::vector<std::uint32_t> nkw(K * V, 0);
    std::vector<std::uint32_t> nk(K, 0);

    std::uniform_int_distribution<std::uint32_t> pick_topic(0, static_cast<std::uint32_t>(K - 1));
    for (std::size_t d = 0; d < D; ++d) {
        z[d].resize(corpus.docs[d].size());
        for (std::size_t i = 0; i < corpus.docs[d].size(); ++i) {
            const auto k = pick_topic(rng);
            const auto w = corpus.docs[d][i];
            z[d][i] = k;
            ++ndk[d][k];
            ++nkw[k * V + w];
            ++nk[k];
        }
    }

    const std::size_t averaged = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(params.burn_out_share * static_cast<double>(params.iterations))));
    const std::size_t first_avg = params.iterations - std::min(averaged, params.iterations);

    TopicModel model;
    model.num_topics = K;
    model.vocab_size = V;
    model.alpha = alpha;
    model.beta = beta;
    model.topic_word.assign(K, std::vector<double>(V, 0.0));
    model.doc_topic.assign(D, std::vector<double>(K, 0.0));
    model.loglik.reserve(params.iterations);

    const double lg_beta = std::lgamma(beta);
    const double lg_vbeta = std::lgamma(vbeta);
    std::vector<double> p(K);

    for (std::size_t it = 0; it < params.iterations; ++it) {
        for (std::size_t d = 0; d < D; ++d) {
            const auto& doc = corpus.docs[d];
            for (std::size_t i = 0; i < doc.size(); ++i) {
                const auto w = doc[i];
                auto k = z[d][i];
                --ndk[d][k];
                --nkw[k * V + w];
                --nk[k];
                double total = 0.0;
                for (std::size_t t = 0; t < K; ++t) {
                    total += (ndk[d][t] + alpha) * (nkw[t * V + w] + beta) / (nk[t] + vbeta);
                    p[t] = total;
                }
                const double u = uniform01(rng) * total;
                k = static_cast<std::uint32_t>(std::upper_bound(p.begin(), p.end(), u) - p.begin());
                if (k >= K) k = static_cast<std::uint32_t>(K - 1);
                z[d][i] = k;
                ++ndk[d][k];
                ++nkw[k * V + w];
                ++nk[k];
            }
        }

        double ll = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            ll += lg_vbeta - std::lgamma(nk[k] + vbeta);
            for (std::size_t w = 0; w < V; ++w) {
                if (nkw[k * V + w] != 0) ll += std::lgamma(nkw[k * V + w] + beta) - lg_beta;
            }
        }
        model.loglik.push_back(ll);

        if (it >= first_avg) {
            for (std::size_t k = 0; k < K; ++k) {
                const double denom = nk[k] + vbeta;
                for (std::size_t w = 0; w < V; ++w) model.topic_word[k][w] += (nkw[k * V + w] + beta) / denom;
            }
            for (std::size_t d = 0; d < D; ++d) {
                const double denom = static_cast<double>(corpus.docs[d].size()) + static_cast<double>(K) * alpha;
                for (std::size_t k = 0; k < K; ++k) model.doc_topic[d][k] += (ndk[d][k] + alpha) / denom;
            }
        }
    }

    auto normalize = [](std::vector<double>& row) {
        double s = 0.0;
        for (double x : row) s += x;
        for (double& x : row) x /= s;
    };
    for (auto& row : model.topic_word) normalize(row);
    for (auto& row : model.doc_topic) normalize(row);
    return model;
}

void save_topic_model(const TopicModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    out << model.num_topics << ' ' << model.vocab_size << ' ' << model.alpha << ' ' << model.beta << '\n';
    for (const auto& row : model.topic_word) {
        for (std::size_t w = 0; w < row.size(); ++w) out << (w ? " " : "") << row[w];
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

TopicModel load_topic_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    TopicModel m;
    if (!(in >> m.num_topics >> m.vocab_size >> m.alpha >> m.beta)) {
        throw Error("malformed topic model header in " + path.string());
    }
    m.topic_word.assign(m.num_topics, std::vector<double>(m.vocab_size));
    for (auto& row : m.topic_word) {
        for (auto& x : row) {
            if (!(in >> x)) throw Error("truncated topic model in " + path.string());
        }
    }
    std::string extra;
    if (in >> extra) throw Error("trailing data in topic model " + path.string());
    return m;
}

EventTopics::EventTopics(const EventLog& log, const Corpus& corpus, const TopicModel& model)
    : num_topics_(model.num_topics) {
    std::unordered_map<EventId, std::size_t> doc_of;
    if (model.doc_topic.size() == corpus.docs.size()) {
        for (std::size_t d = 0; d < corpus.event_ids.size(); ++d) doc_of.emplace(corpus.event_ids[d], d);
    }
    const EventIndex index(log);
    for (const auto& e : log.events) {
        if (!is_authored_content(e.kind) || e.tokens.empty()) continue;
        auto it = doc_of.find(e.id);
        if (it != doc_of.end()) {
            const auto& row = model.doc_topic[it->second];
            topic_[e.id] = static_cast<TopicId>(std::max_element(row.begin(), row.end()) - row.begin());
        } else {
            topic_[e.id] = model.classify(e.tokens);
        }
    }
    for (const auto& e : log.events) {
        if (e.kind != EventKind::repost) continue;
        const Event* origin = index.content_origin(e);
        if (origin == nullptr) continue;
        auto it = topic_.find(origin->id);
        if (it != topic_.end()) topic_[e.id] = it->second;
    }
}

std::optional<TopicId> EventTopics::of(EventId id) const {
    auto it = topic_.find(id);
    if (it == topic_.end()) return std::nullopt;
    return it->second;
}

}  // namespace iolab
