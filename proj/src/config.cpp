#include "iolab/config.hpp"

#include "iolab/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace iolab {

using ojson = nlohmann::ordered_json;

namespace {

template <class T>
struct is_optional : std::false_type {};
template <class T>
struct is_optional<std::optional<T>> : std::true_type {};

// Reads the fields named by a visit() into a struct, tracking which keys of
// the object were consumed so that leftovers can be reported.
class Reader {
public:
    Reader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <class T>
    void operator()(const char* key, T& value) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        read(*it, value, path_ + "." + key);
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.contains(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
        }
    }

    template <class T>
    static void read(const ojson& v, T& value, const std::string& where) {
        if constexpr (is_optional<T>::value) {
            if (v.is_null()) {
                value.reset();
            } else {
                typename T::value_type inner{};
                read(v, inner, where);
                value = inner;
            }
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
            value = v.get<bool>();
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
            value = v.get<T>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
            value = v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
                value = std::numeric_limits<T>::infinity();
                return;
            }
            if (!v.is_number()) throw ConfigError(where + ": expected a number");
            value = v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where + ": expected a string");
            value = v.get<std::string>();
        } else {
            // Sequences: vectors, arrays and pairs.
            if (!v.is_array()) throw ConfigError(where + ": expected a list");
            try {
                T tmp = v.get<T>();
                value = std::move(tmp);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
    }

private:
    const ojson& j_;
    std::string path_;
    std::set<std::string> seen_;
};

class Writer {
public:
    template <class T>
    void operator()(const char* key, const T& value) {
        if constexpr (is_optional<T>::value) {
            if (value) {
                write(key, *value);
            } else {
                j[key] = nullptr;
            }
        } else {
            write(key, value);
        }
    }

    ojson j = ojson::object();

private:
    template <class T>
    void write(const char* key, const T& value) {
        if constexpr (std::is_floating_point_v<T>) {
            if (std::isinf(value)) {
                j[key] = "inf";
                return;
            }
        }
        j[key] = value;
    }
};

// One field list per struct, shared by parsing and rendering.
template <class V, class S>
void visit(V& v, S& p) {
    using T = std::remove_const_t<S>;
    if constexpr (std::is_same_v<T, SbmParams>) {
        v("block_sizes", p.block_sizes);
        v("p_intra", p.p_intra);
        v("p_inter", p.p_inter);
    } else if constexpr (std::is_same_v<T, DiscourseParams>) {
        v("num_topics", p.num_topics);
        v("vocab_size", p.vocab_size);
        v("doc_topic_concentration", p.doc_topic_concentration);
        v("topic_word_concentration", p.topic_word_concentration);
        v("horizon", p.horizon);
        v("post_rate", p.post_rate);
        v("repost_fraction", p.repost_fraction);
        v("intra_bias", p.intra_bias);
        v("mention_fraction", p.mention_fraction);
        v("reply_fraction", p.reply_fraction);
        v("delete_fraction", p.delete_fraction);
        v("community_topic_boost", p.community_topic_boost);
        v("min_tokens", p.min_tokens);
        v("max_tokens", p.max_tokens);
        v("profile_tokens", p.profile_tokens);
    } else if constexpr (std::is_same_v<T, CoreEmbed>) {
        v("ops_per_community", p.ops_per_community);
        v("amplify_factor", p.amplify_factor);
    } else if constexpr (std::is_same_v<T, Bridge>) {
        v("num_bridges", p.num_bridges);
        v("shared_topic", p.shared_topic);
        v("cross_rate", p.cross_rate);
        v("start", p.start);
        v("end", p.end);
        v("reaction_rate", p.reaction_rate);
        v("side_a", p.side_a);
        v("side_b", p.side_b);
    } else if constexpr (std::is_same_v<T, PumpAndPivot>) {
        v("num_ops", p.num_ops);
        v("pivot_time", p.pivot_time);
        v("pre_topic", p.pre_topic);
        v("post_topic", p.post_topic);
        v("deletion_fraction", p.deletion_fraction);
        v("profile_change", p.profile_change);
        v("induced_repost_rate", p.induced_repost_rate);
    } else if constexpr (std::is_same_v<T, Flood>) {
        v("target_community", p.target_community);
        v("start", p.start);
        v("end", p.end);
        v("rate_multiplier", p.rate_multiplier);
        v("num_accounts", p.num_accounts);
        v("low_entropy_tokens", p.low_entropy_tokens);
        v("mention_share", p.mention_share);
    } else if constexpr (std::is_same_v<T, Bolster>) {
        v("target_community", p.target_community);
        v("amplify_factor", p.amplify_factor);
        v("num_ops", p.num_ops);
        v("start", p.start);
        v("end", p.end);
    } else if constexpr (std::is_same_v<T, Degrade>) {
        v("target_community", p.target_community);
        v("divisive_topic_pair", p.divisive_topic_pair);
        v("ops_per_faction", p.ops_per_faction);
        v("start", p.start);
        v("end", p.end);
        v("action_rate", p.action_rate);
        v("max_chain", p.max_chain);
    } else if constexpr (std::is_same_v<T, OperatorStackPolicy>) {
        v("restricted_client", p.restricted_client);
        v("controller_fanout", p.controller_fanout);
        v("timing_jitter", p.timing_jitter);
        v("geo_tags", p.geo_tags);
        v("sync_slot", p.sync_slot);
        v("restricted_share", p.restricted_share);
    } else if constexpr (std::is_same_v<T, BrigadingParams>) {
        v("window_len", p.window_len);
        v("theta_rate", p.theta_rate);
        v("theta_discourse", p.theta_discourse);
        v("baseline_windows", p.baseline_windows);
        v("min_account_interactions", p.min_account_interactions);
    } else if constexpr (std::is_same_v<T, FloodParams>) {
        v("window_len", p.window_len);
        v("theta_vol", p.theta_vol);
        v("theta_entropy", p.theta_entropy);
        v("baseline_windows", p.baseline_windows);
    } else if constexpr (std::is_same_v<T, LdaParams>) {
        v("num_topics", p.num_topics);
        v("alpha", p.alpha);
        v("beta", p.beta);
        v("iterations", p.iterations);
        v("burn_out_share", p.burn_out_share);
    } else if constexpr (std::is_same_v<T, NarrativeParams>) {
        v("window_len", p.window_len);
        v("theta_amp", p.theta_amp);
        v("noise_floor", p.noise_floor);
    } else if constexpr (std::is_same_v<T, PivotParams>) {
        v("weights", p.weights);
        v("theta_pivot", p.theta_pivot);
        v("min_posts", p.min_posts);
        v("min_segment", p.min_segment);
        v("min_segment_share", p.min_segment_share);
    } else if constexpr (std::is_same_v<T, AmplificationParams>) {
        v("weights", p.weights);
        v("sync_window", p.sync_window);
        v("min_events", p.min_events);
        v("theta", p.theta);
    } else if constexpr (std::is_same_v<T, PruneParams>) {
        v("ubiquity_cut", p.ubiquity_cut);
        v("promiscuity_cut", p.promiscuity_cut);
    } else if constexpr (std::is_same_v<T, ClusterParams>) {
        v("dim", p.dim);
        v("k_min", p.k_min);
        v("k_max", p.k_max);
        v("min_silhouette", p.min_silhouette);
        v("min_separation", p.min_separation);
    } else if constexpr (std::is_same_v<T, SuspicionParams>) {
        v("w_exclusivity", p.w_exclusivity);
        v("w_restricted", p.w_restricted);
        v("w_cosine", p.w_cosine);
    } else {
        static_assert(sizeof(T) == 0, "no field list");
    }
}

template <class S>
void read_struct(const ojson& j, S& s, const std::string& path) {
    Reader r(j, path);
    visit(r, s);
    r.finish();
}

template <class S>
ojson write_struct(const S& s) {
    Writer w;
    visit(w, s);
    return std::move(w.j);
}

ojson write_stack_params(const StackParams& p) {
    ojson j = ojson::object();
    j["prune"] = write_struct(p.prune);
    j["cluster"] = write_struct(p.cluster);
    j["suspicion"] = write_struct(p.suspicion);
    return j;
}

void read_stack_params(const ojson& j, StackParams& p, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "prune") {
            read_struct(value, p.prune, path + ".prune");
        } else if (key == "cluster") {
            read_struct(value, p.cluster, path + ".cluster");
        } else if (key == "suspicion") {
            read_struct(value, p.suspicion, path + ".suspicion");
        } else {
            throw ConfigError(path + ": unknown key '" + key + "'");
        }
    }
}

ojson write_detectors(const DetectorConfig& d) {
    ojson j = ojson::object();
    j["brigading"] = write_struct(d.brigading);
    j["flood"] = write_struct(d.flood);
    j["lda"] = write_struct(d.lda);
    j["narrative"] = write_struct(d.narrative);
    j["pivot"] = write_struct(d.pivot);
    j["amplification"] = write_struct(d.amplification);
    j["stack"] = write_stack_params(d.stack);
    j["theta_suspicion"] = d.theta_suspicion;
    return j;
}

void read_detectors(const ojson& j, DetectorConfig& d) {
    const std::string path = "detectors";
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        const std::string sub = path + "." + key;
        if (key == "brigading") {
            read_struct(value, d.brigading, sub);
        } else if (key == "flood") {
            read_struct(value, d.flood, sub);
        } else if (key == "lda") {
            read_struct(value, d.lda, sub);
        } else if (key == "narrative") {
            read_struct(value, d.narrative, sub);
        } else if (key == "pivot") {
            read_struct(value, d.pivot, sub);
        } else if (key == "amplification") {
            read_struct(value, d.amplification, sub);
        } else if (key == "stack") {
            read_stack_params(value, d.stack, sub);
        } else if (key == "theta_suspicion") {
            Reader::read(value, d.theta_suspicion, sub);
        } else {
            throw ConfigError(path + ": unknown key '" + key + "'");
        }
    }
}

ojson write_playbook(const Playbook& pb) {
    return std::visit(
        [&](const auto& p) {
            ojson j = ojson::object();
            j["type"] = playbook_tag(pb);
            const ojson fields = write_struct(p);
            for (const auto& [k, v] : fields.items()) j[k] = v;
            return j;
        },
        pb);
}

template <class T>
Playbook read_playbook_as(const ojson& j, const std::string& path) {
    T p;
    ojson rest = j;
    rest.erase("type");
    read_struct(rest, p, path);
    return p;
}

Playbook read_playbook(const ojson& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find("type");
    if (it == j.end() || !it->is_string()) throw ConfigError(path + ": missing playbook type");
    const auto type = it->get<std::string>();
    if (type == playbook_tag(CoreEmbed{})) return read_playbook_as<CoreEmbed>(j, path);
    if (type == playbook_tag(Bridge{})) return read_playbook_as<Bridge>(j, path);
    if (type == playbook_tag(PumpAndPivot{})) return read_playbook_as<PumpAndPivot>(j, path);
    if (type == playbook_tag(Flood{})) return read_playbook_as<Flood>(j, path);
    if (type == playbook_tag(Bolster{})) return read_playbook_as<Bolster>(j, path);
    if (type == playbook_tag(Degrade{})) return read_playbook_as<Degrade>(j, path);
    throw ConfigError(path + ": unknown playbook type '" + type + "'");
}

ojson write_catalog(const ClientCatalog& c) {
    ojson arr = ojson::array();
    for (const auto& spec : c.clients) {
        ojson j = ojson::object();
        j["id"] = spec.id;
        j["name"] = spec.name;
        j["weight"] = spec.weight;
        j["class"] = std::string(to_string(spec.cls));
        arr.push_back(std::move(j));
    }
    return arr;
}

ClientCatalog read_catalog(const ojson& j) {
    if (!j.is_array()) throw ConfigError("clients.catalog: expected a list");
    ClientCatalog c;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "clients.catalog[" + std::to_string(i) + "]";
        const auto& e = j[i];
        if (!e.is_object()) throw ConfigError(path + ": expected an object");
        ClientSpec spec;
        std::string cls = "first_party";
        for (const auto& [key, value] : e.items()) {
            if (key == "id") {
                Reader::read(value, spec.id, path + ".id");
            } else if (key == "name") {
                Reader::read(value, spec.name, path + ".name");
            } else if (key == "weight") {
                Reader::read(value, spec.weight, path + ".weight");
            } else if (key == "class") {
                Reader::read(value, cls, path + ".class");
            } else {
                throw ConfigError(path + ": unknown key '" + key + "'");
            }
        }
        try {
            spec.cls = parse_client_class(cls);
        } catch (const Error& err) {
            throw ConfigError(path + ".class: " + err.what());
        }
        c.clients.push_back(std::move(spec));
    }
    return c;
}

ojson to_json(const ScenarioConfig& cfg) {
    ojson j = ojson::object();
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    j["sbm"] = write_struct(cfg.sbm);
    j["discourse"] = write_struct(cfg.discourse);
    j["clients"] = ojson::object();
    j["clients"]["mix_spread"] = cfg.mix_spread;
    j["clients"]["catalog"] = write_catalog(cfg.catalog);
    j["playbooks"] = ojson::array();
    for (const auto& pb : cfg.playbooks) j["playbooks"].push_back(write_playbook(pb));
    j["stack_policy"] = cfg.stack_policy ? write_struct(*cfg.stack_policy) : ojson(nullptr);
    j["detectors"] = write_detectors(cfg.detectors);
    return j;
}

std::size_t num_communities(const ScenarioConfig& cfg) { return cfg.sbm.block_sizes.size(); }

void check_topic(const ScenarioConfig& cfg, std::optional<TopicId> t, const std::string& what) {
    if (t && *t >= cfg.discourse.num_topics) {
        throw ConfigError(what + ": topic " + std::to_string(*t) + " does not exist");
    }
}

void check_community(const ScenarioConfig& cfg, CommunityId c, const std::string& what) {
    if (c >= num_communities(cfg)) {
        throw ConfigError(what + ": community " + std::to_string(c) + " does not exist");
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    try {
        sbm.validate();
        discourse.validate();
        catalog.validate();
        if (stack_policy) stack_policy->validate();
        detectors.pivot.validate();
        detectors.stack.prune.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (mix_spread < 1) throw ConfigError("clients.mix_spread must be >= 1");
    for (std::size_t i = 0; i < playbooks.size(); ++i) {
        const std::string what = "playbooks[" + std::to_string(i) + "]";
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, Bridge>) {
                    check_topic(*this, p.shared_topic, what);
                    check_community(*this, p.side_a, what);
                    check_community(*this, p.side_b, what);
                } else if constexpr (std::is_same_v<T, PumpAndPivot>) {
                    check_topic(*this, p.pre_topic, what);
                    check_topic(*this, p.post_topic, what);
                } else if constexpr (std::is_same_v<T, Flood> || std::is_same_v<T, Bolster>) {
                    check_community(*this, p.target_community, what);
                } else if constexpr (std::is_same_v<T, Degrade>) {
                    check_community(*this, p.target_community, what);
                    check_topic(*this, p.divisive_topic_pair.first, what);
                    check_topic(*this, p.divisive_topic_pair.second, what);
                }
            },
            playbooks[i]);
    }
    if (stack_policy) {
        if (!catalog.contains(stack_policy->restricted_client)) {
            throw ConfigError("stack_policy.restricted_client is not in the catalog");
        }
        if (catalog.at(stack_policy->restricted_client).cls != ClientClass::restricted) {
            throw ConfigError("stack_policy.restricted_client is not a restricted-class client");
        }
    }
    if (detectors.lda.num_topics < 1 || detectors.lda.iterations < 1) {
        throw ConfigError("detectors.lda needs at least one topic and one iteration");
    }
}

ScenarioConfig parse_config(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be an object");
    ScenarioConfig cfg;
    bool has_seed = false;
    for (const auto& [key, value] : j.items()) {
        if (key == "name") {
            Reader::read(value, cfg.name, "name");
        } else if (key == "seed") {
            Reader::read(value, cfg.seed, "seed");
            has_seed = true;
        } else if (key == "sbm") {
            read_struct(value, cfg.sbm, "sbm");
        } else if (key == "discourse") {
            read_struct(value, cfg.discourse, "discourse");
        } else if (key == "clients") {
            if (!value.is_object()) throw ConfigError("clients: expected an object");
            for (const auto& [ck, cv] : value.items()) {
                if (ck == "mix_spread") {
                    Reader::read(cv, cfg.mix_spread, "clients.mix_spread");
                } else if (ck == "catalog") {
                    cfg.catalog = read_catalog(cv);
                } else {
                    throw ConfigError("clients: unknown key '" + ck + "'");
                }
            }
        } else if (key == "playbooks") {
            if (!value.is_array()) throw ConfigError("playbooks: expected a list");
            for (std::size_t i = 0; i < value.size(); ++i) {
                cfg.playbooks.push_back(read_playbook(value[i], "playbooks[" + std::to_string(i) + "]"));
            }
        } else if (key == "stack_policy") {
            if (value.is_null()) {
                cfg.stack_policy.reset();
            } else {
                OperatorStackPolicy p;
                read_struct(value, p, "stack_policy");
                cfg.stack_policy = p;
            }
        } else if (key == "detectors") {
            read_detectors(value, cfg.detectors);
        } else {
            throw ConfigError("unknown top-level key '" + key + "'");
        }
    }
    if (!has_seed) throw ConfigError("config must set a seed");
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_digest(const ScenarioConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
    return buf;
}

std::vector<std::string> bundled_scenario_names() {
    return {"fig1-left", "fig1-right", "pivot-default", "flood-default", "stack-default", "organic-baseline"};
}

ScenarioConfig bundled_scenario(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    if (name == "fig1-left") {
        cfg.playbooks.push_back(CoreEmbed{});
    } else if (name == "fig1-right") {
        cfg.playbooks.push_back(Bridge{});
    } else if (name == "pivot-default") {
        cfg.playbooks.push_back(PumpAndPivot{});
    } else if (name == "flood-default") {
        cfg.playbooks.push_back(Flood{});
    } else if (name == "stack-default") {
        cfg.playbooks.push_back(CoreEmbed{.ops_per_community = 5});
        cfg.stack_policy = OperatorStackPolicy{};
    } else if (name != "organic-baseline") {
        throw ConfigError("unknown scenario '" + name + "'");
    }
    cfg.validate();
    return cfg;
}

}  // namespace iolab
