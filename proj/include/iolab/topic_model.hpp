#pragma once

#include "iolab/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace iolab {

// Bag-of-tokens documents, one per authored content event.
struct Corpus {
    std::vector<std::vector<TokenId>> docs;
    std::vector<EventId> event_ids;  // parallel to docs
    std::size_t vocab_size = 0;

    std::size_t num_tokens() const;
    std::size_t num_distinct_tokens() const;

    // vocab_size 0 means max token id + 1.
    static Corpus from_log(const EventLog& log, std::size_t vocab_size = 0);
};

struct TopicModel {
    std::size_t num_topics = 0;
    std::size_t vocab_size = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::vector<double>> topic_word;  // K x V
    std::vector<std::vector<double>> doc_topic;   // D x K, empty after load
    std::vector<double> loglik;                   // per iteration, log p(w | z)

    // Most likely topic of a bag of tokens under topic_word.
    TopicId classify(std::span<const TokenId> tokens) const;
};

struct LdaParams {
    std::size_t num_topics = 5;
    double alpha = 0.1;
    double beta = 0.05;
    std::size_t iterations = 500;
    // Share of final iterations averaged into the posterior mean.
    double burn_out_share = 0.2;
};

// Collapsed Gibbs sampling, single seeded chain.
TopicModel fit_topic_model(const Corpus& corpus, const LdaParams& params, std::uint64_t seed);

void save_topic_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_topic_model(const std::filesystem::path& path);

// Hard topic per event: argmax of the document mixture for corpus members,
// the content origin's topic for reposts, naive Bayes for the rest.
class EventTopics {
public:
    EventTopics(const EventLog& log, const Corpus& corpus, const TopicModel& model);

    std::optional<TopicId> of(EventId id) const;
    std::size_t num_topics() const { return num_topics_; }

private:
    std::unordered_map<EventId, TopicId> topic_;
    std::size_t num_topics_ = 0;
};

}  // namespace iolab
