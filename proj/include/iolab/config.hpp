#pragma once

#include "iolab/content.hpp"
#include "iolab/inject.hpp"
#include "iolab/stack.hpp"
#include "iolab/structure.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iolab {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct DetectorConfig {
    BrigadingParams brigading;
    FloodParams flood;
    LdaParams lda{.iterations = 300};
    NarrativeParams narrative;
    PivotParams pivot;
    AmplificationParams amplification;
    StackParams stack;
    // The most suspicious stack cluster is flagged at or above this score.
    double theta_suspicion = 0.7;
};

struct ScenarioConfig {
    std::string name = "custom";
    std::uint64_t seed = 0;
    SbmParams sbm;
    DiscourseParams discourse;
    ClientCatalog catalog = ClientCatalog::defaults();
    std::size_t mix_spread = 3;
    std::vector<Playbook> playbooks;
    std::optional<OperatorStackPolicy> stack_policy;
    DetectorConfig detectors;

    // Throws ConfigError.
    void validate() const;
};

// Missing keys take defaults; unknown keys are errors.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Canonical rendering with every field spelled out.
std::string config_to_json(const ScenarioConfig& cfg);

// Hex FNV-1a of the canonical rendering.
std::string config_digest(const ScenarioConfig& cfg);

std::vector<std::string> bundled_scenario_names();
// Throws ConfigError for unknown names.
ScenarioConfig bundled_scenario(const std::string& name);

}  // namespace iolab
