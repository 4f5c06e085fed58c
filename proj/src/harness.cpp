#include "iolab/harness.hpp"

#include "iolab/export.hpp"
#include "iolab/log_io.hpp"
#include "iolab/rng.hpp"
#include "iolab/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace iolab {

using ojson = nlohmann::ordered_json;

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

const std::vector<std::string> kAccountDetectors = {"amplification", "brigading", "flood", "pivot", "stack"};
const std::vector<std::string> kWindowDetectors = {"brigading", "flood"};

std::vector<std::pair<Timestamp, Timestamp>> planted_windows(const std::string& detector, const GroundTruth& truth) {
    const std::string role = detector == "brigading" ? roles::kBridge : roles::kFlood;
    std::vector<std::pair<Timestamp, Timestamp>> out;
    for (const auto& w : truth.windows) {
        if (w.playbook == role) out.emplace_back(w.start, w.end);
    }
    return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Simulation simulate(const ScenarioConfig& cfg) {
    return stage("simulate", [&] {
        cfg.validate();
        Simulation sim;
        sim.social = generate_social_graph(cfg.sbm, derive_seed(cfg.seed, "sbm"));
        Discourse d = generate_discourse(sim.social, cfg.discourse, derive_seed(cfg.seed, "discourse"));
        sim.topics = d.topics;
        sim.usage = assign_clients(d.log.num_accounts(), cfg.catalog, cfg.mix_spread, derive_seed(cfg.seed, "clients"));
        assign_event_clients(d.log, sim.usage, derive_seed(cfg.seed, "clients.events"));
        sim.scenario.log = std::move(d.log);
        sim.scenario.truth.communities = sim.social.labels;
        sim.scenario.truth.topics = sim.topics;
        return sim;
    });
}

Scenario inject_playbooks(const ScenarioConfig& cfg, const Simulation& sim) {
    return stage("inject", [&] {
        Scenario s = sim.scenario;
        const std::size_t num_organic = s.log.num_accounts();
        const EventId first_injected = s.log.events.empty() ? 0 : max_event_id(s.log) + 1;
        InjectionContext ctx{&sim.social.graph, s.truth.communities, num_organic, sim.topics, cfg.discourse};
        for (std::size_t i = 0; i < cfg.playbooks.size(); ++i) {
            Injection inj = inject(s.log, ctx, cfg.playbooks[i], derive_seed(cfg.seed, "inject", i));
            s.log = std::move(inj.log);
            merge_truth(s.truth, inj.truth);
            ctx.labels = s.truth.communities;
        }
        if (!cfg.playbooks.empty()) {
            // Operators draw clients the same way organic accounts do; the
            // organic prefix of this assignment matches the simulation's.
            const auto usage = assign_clients(s.log.num_accounts(), cfg.catalog, cfg.mix_spread,
                                              derive_seed(cfg.seed, "clients"));
            assign_event_clients(s.log, usage, derive_seed(cfg.seed, "clients.injected"), first_injected);
        }
        if (cfg.stack_policy) {
            StackedLog stacked = apply_operator_stack(s.log, s.truth, *cfg.stack_policy, cfg.catalog,
                                                      derive_seed(cfg.seed, "stack_policy"));
            s.log = std::move(stacked.log);
            s.truth = std::move(stacked.truth);
        }
        const auto violations = validate_event_log(s.log);
        if (!violations.empty()) {
            throw InvariantError(violations, "injected log violates " + violations.front().rule + " at event " +
                                                 std::to_string(violations.front().event_id));
        }
        return s;
    });
}

Findings detect(const ScenarioConfig& cfg, const EventLog& log) {
    return stage("detect", [&] {
        const auto& d = cfg.detectors;
        Findings f;
        f.graph = build_interaction_graph(log);
        if (!f.graph.empty()) f.partition = detect_communities(f.graph, derive_seed(cfg.seed, "detect.louvain"));
        f.brigading = detect_brigading(log, f.partition, d.brigading);
        f.flood = detect_flood(log, f.partition, d.flood);

        const Corpus corpus = Corpus::from_log(log, cfg.discourse.vocab_size);
        f.topic_model = fit_topic_model(corpus, d.lda, derive_seed(cfg.seed, "detect.lda"));
        const EventTopics topics(log, corpus, f.topic_model);
        f.narrative = narrative_scores(log, topics, d.narrative);

        const PivotScanner scanner(log, topics);
        for (const auto& acc : log.accounts) {
            const auto outcome = scanner.scan(acc.id, d.pivot);
            if (outcome.status == PivotStatus::too_few_posts) {
                ++f.pivot_too_few;
                continue;
            }
            ++f.pivot_scanned;
            if (outcome.status == PivotStatus::flagged) f.pivot.push_back(*outcome.score);
        }

        f.amplification = AmplificationScorer(log, d.amplification).score_all();

        f.stack = analyze_stack(log, cfg.catalog, d.stack, derive_seed(cfg.seed, "detect.stack"));
        if (const auto* top = f.stack.most_suspicious(); top != nullptr && top->suspicion >= d.theta_suspicion) {
            f.stack_flagged = static_cast<std::size_t>(top - f.stack.scored.data());
        }
        return f;
    });
}

FlagSummary summarize(const ScenarioConfig& cfg, const Findings& f) {
    FlagSummary s;
    for (const auto& name : kAccountDetectors) s.accounts[name];
    for (const auto& name : kWindowDetectors) s.windows[name];
    for (const auto& w : f.brigading) {
        s.accounts["brigading"].insert(w.accounts.begin(), w.accounts.end());
        s.windows["brigading"].emplace_back(w.start, w.end);
    }
    for (const auto& w : f.flood) {
        s.accounts["flood"].insert(w.accounts.begin(), w.accounts.end());
        s.windows["flood"].emplace_back(w.start, w.end);
    }
    for (const auto& p : f.pivot) s.accounts["pivot"].insert(p.account);
    for (const auto& a : f.amplification) {
        if (a.score >= cfg.detectors.amplification.theta) s.accounts["amplification"].insert(a.account);
    }
    if (f.stack_flagged) {
        const auto& users = f.stack.scored[*f.stack_flagged].users;
        s.accounts["stack"].insert(users.begin(), users.end());
    }
    for (std::size_t i = 0; i < f.partition.nodes.size(); ++i) {
        s.partition.emplace_back(f.partition.nodes[i], f.partition.labels[i]);
    }
    s.stack_users = f.stack.graph.users;
    return s;
}

AccountMetrics score_accounts(const std::set<AccountId>& flagged, const std::set<AccountId>& truth) {
    AccountMetrics m;
    m.flagged = flagged.size();
    m.positives = truth.size();
    for (AccountId a : flagged) {
        if (truth.contains(a)) {
            ++m.true_positives;
        } else {
            ++m.false_positives;
        }
    }
    m.false_negatives = m.positives - m.true_positives;
    if (m.positives > 0) {
        m.recall = ratio(m.true_positives, m.positives);
        if (m.flagged > 0) m.precision = ratio(m.true_positives, m.flagged);
    }
    if (m.precision && m.recall) {
        const double sum = *m.precision + *m.recall;
        m.f1 = sum > 0.0 ? 2.0 * *m.precision * *m.recall / sum : 0.0;
    }
    return m;
}

WindowMetrics score_windows(const std::vector<std::pair<Timestamp, Timestamp>>& flagged,
                            const std::vector<std::pair<Timestamp, Timestamp>>& planted) {
    WindowMetrics m;
    m.flagged = flagged.size();
    m.planted = planted.size();
    std::vector<bool> found(planted.size(), false);
    for (const auto& [fs, fe] : flagged) {
        bool hit = false;
        for (std::size_t i = 0; i < planted.size(); ++i) {
            const auto [ps, pe] = planted[i];
            const Timestamp overlap = std::max<Timestamp>(0, std::min(fe, pe) - std::max(fs, ps));
            if (fe > fs && 2 * overlap >= fe - fs) {
                hit = true;
                found[i] = true;
            }
        }
        if (hit) ++m.hits;
    }
    m.detected = static_cast<std::size_t>(std::count(found.begin(), found.end(), true));
    m.false_positives = m.flagged - m.hits;
    if (m.planted > 0) {
        m.recall = ratio(m.detected, m.planted);
        if (m.flagged > 0) m.precision = ratio(m.hits, m.flagged);
    }
    return m;
}

std::set<AccountId> relevant_operators(const std::string& detector, const GroundTruth& truth) {
    if (detector == "brigading") return truth.operators_with_role(roles::kBridge);
    if (detector == "flood") return truth.operators_with_role(roles::kFlood);
    if (detector == "pivot") return truth.operators_with_role(roles::kPumpAndPivot);
    if (detector == "amplification") {
        auto out = truth.operators_with_role(roles::kCoreEmbed);
        const auto bolster = truth.operators_with_role(roles::kBolster);
        out.insert(bolster.begin(), bolster.end());
        return out;
    }
    if (detector == "stack") {
        std::set<AccountId> out;
        for (const auto& op : truth.operators) {
            if (op.controller >= 0) out.insert(op.id);
        }
        return out;
    }
    throw InvalidArgument("unknown detector '" + detector + "'");
}

Evaluation evaluate_detections(const FlagSummary& flags, const GroundTruth& truth, std::size_t num_accounts) {
    auto check = [&](AccountId a) {
        if (a >= num_accounts) {
            throw InvalidArgument("flagged account " + std::to_string(a) + " is outside the log's accounts");
        }
    };
    Evaluation ev;
    for (const auto& [name, flagged] : flags.accounts) {
        for (AccountId a : flagged) check(a);
        ev.accounts[name] = score_accounts(flagged, relevant_operators(name, truth));
    }
    for (const auto& [name, windows] : flags.windows) {
        ev.windows[name] = score_windows(windows, planted_windows(name, truth));
    }

    std::vector<int> found, planted;
    for (const auto& [a, l] : flags.partition) {
        check(a);
        if (a >= truth.communities.size()) continue;
        found.push_back(static_cast<int>(l));
        planted.push_back(static_cast<int>(truth.communities[a]));
    }
    if (found.size() >= 2) ev.partition_ari = adjusted_rand_index(found, planted);

    const auto stack_ops = relevant_operators("stack", truth);
    if (!stack_ops.empty() && flags.stack_users.size() >= 2) {
        const auto& flagged = flags.accounts.at("stack");
        std::vector<int> in_cluster, is_op;
        for (AccountId u : flags.stack_users) {
            check(u);
            in_cluster.push_back(flagged.contains(u) ? 1 : 0);
            is_op.push_back(stack_ops.contains(u) ? 1 : 0);
        }
        ev.stack_ari = adjusted_rand_index(in_cluster, is_op);
    }
    return ev;
}

namespace {

ojson opt(const std::optional<double>& x) { return x ? ojson(*x) : ojson(nullptr); }

ojson window_json(const WindowFinding& w) {
    ojson j = ojson::object();
    j["window"] = w.window_index;
    j["start"] = w.start;
    j["end"] = w.end;
    if (w.community) j["community"] = *w.community;
    j["observed"] = w.observed;
    j["baseline"] = w.baseline;
    j["score"] = w.score;
    j["accounts"] = w.accounts;
    return j;
}

ojson evaluation_json(const Evaluation& ev) {
    ojson j = ojson::object();
    ojson acc = ojson::object();
    for (const auto& [name, m] : ev.accounts) {
        ojson e = ojson::object();
        e["flagged"] = m.flagged;
        e["positives"] = m.positives;
        e["true_positives"] = m.true_positives;
        e["false_positives"] = m.false_positives;
        e["false_negatives"] = m.false_negatives;
        e["precision"] = opt(m.precision);
        e["recall"] = opt(m.recall);
        e["f1"] = opt(m.f1);
        acc[name] = std::move(e);
    }
    j["accounts"] = std::move(acc);
    ojson win = ojson::object();
    for (const auto& [name, m] : ev.windows) {
        ojson e = ojson::object();
        e["flagged"] = m.flagged;
        e["planted"] = m.planted;
        e["hits"] = m.hits;
        e["detected"] = m.detected;
        e["false_positives"] = m.false_positives;
        e["precision"] = opt(m.precision);
        e["recall"] = opt(m.recall);
        win[name] = std::move(e);
    }
    j["windows"] = std::move(win);
    j["partition_ari"] = opt(ev.partition_ari);
    j["stack_ari"] = opt(ev.stack_ari);
    return j;
}

ojson flags_json(const FlagSummary& s) {
    ojson j = ojson::object();
    ojson acc = ojson::object();
    for (const auto& [name, set] : s.accounts) acc[name] = std::vector<AccountId>(set.begin(), set.end());
    j["accounts"] = std::move(acc);
    ojson win = ojson::object();
    for (const auto& [name, ws] : s.windows) {
        ojson arr = ojson::array();
        for (const auto& [a, b] : ws) arr.push_back({a, b});
        win[name] = std::move(arr);
    }
    j["windows"] = std::move(win);
    return j;
}

ojson parse_report(const std::string& report) {
    try {
        return ojson::parse(report);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report is not valid JSON: ") + e.what());
    }
}

}  // namespace

std::string render_report(const ScenarioConfig& cfg, const Scenario& scenario, const Findings& f,
                          const std::optional<Evaluation>& eval) {
    ojson r = ojson::object();
    ojson meta = ojson::object();
    meta["scenario"] = cfg.name;
    meta["seed"] = cfg.seed;
    meta["config_digest"] = config_digest(cfg);
    meta["version"] = kVersion;
    meta["accounts"] = scenario.log.num_accounts();
    meta["events"] = scenario.log.events.size();
    meta["operators"] = scenario.truth.operators.size();
    r["meta"] = std::move(meta);

    ojson fj = ojson::object();
    ojson comm = ojson::object();
    comm["count"] = f.partition.num_communities();
    comm["modularity"] = f.partition.modularity;
    ojson labels = ojson::array();
    for (std::size_t i = 0; i < f.partition.nodes.size(); ++i) labels.push_back({f.partition.nodes[i], f.partition.labels[i]});
    comm["labels"] = std::move(labels);
    fj["communities"] = std::move(comm);

    fj["brigading"] = ojson::array();
    for (const auto& w : f.brigading) fj["brigading"].push_back(window_json(w));
    fj["flood"] = ojson::array();
    for (const auto& w : f.flood) fj["flood"].push_back(window_json(w));

    ojson topics = ojson::object();
    topics["loglik_first"] = f.topic_model.loglik.empty() ? ojson(nullptr) : ojson(f.topic_model.loglik.front());
    topics["loglik_last"] = f.topic_model.loglik.empty() ? ojson(nullptr) : ojson(f.topic_model.loglik.back());
    ojson narr = ojson::array();
    for (const auto& n : f.narrative) {
        ojson e = ojson::object();
        e["topic"] = n.topic;
        e["onset_window"] = n.onset_window;
        e["reposts"] = n.reposts;
        e["originals"] = n.originals;
        e["growth"] = n.growth;
        e["score"] = n.score;
        e["flagged"] = n.score >= cfg.detectors.narrative.theta_amp;
        narr.push_back(std::move(e));
    }
    topics["narratives"] = std::move(narr);
    fj["topics"] = std::move(topics);

    ojson pivot = ojson::object();
    pivot["scanned"] = f.pivot_scanned;
    pivot["too_few_posts"] = f.pivot_too_few;
    pivot["flagged"] = ojson::array();
    for (const auto& p : f.pivot) {
        ojson e = ojson::object();
        e["account"] = p.account;
        e["change_point"] = p.change_point;
        e["divergence"] = p.divergence;
        e["deletion_fraction"] = p.deletion_fraction;
        e["profile_changed"] = p.profile_changed;
        e["composite"] = p.composite;
        pivot["flagged"].push_back(std::move(e));
    }
    fj["pivot"] = std::move(pivot);

    ojson amp = ojson::array();
    for (const auto& a : f.amplification) {
        ojson e = ojson::object();
        e["account"] = a.account;
        e["repost_share"] = a.repost_share;
        e["regularity"] = a.regularity;
        e["synchrony"] = a.synchrony;
        e["score"] = a.score;
        amp.push_back(std::move(e));
    }
    fj["amplification"] = std::move(amp);

    ojson stack = ojson::object();
    stack["users"] = f.stack.graph.users.size();
    stack["clients"] = f.stack.graph.clients.size();
    stack["components"] = ojson::array();
    for (std::size_t c = 0; c < f.stack.clusters.size(); ++c) {
        const auto& cl = f.stack.clusters[c];
        ojson e = ojson::object();
        e["users"] = cl.users.size();
        e["clients"] = cl.clients;
        e["rank"] = cl.rank;
        e["dim"] = cl.dim;
        e["dim_clamped"] = cl.dim_clamped;
        e["user_silhouette"] = cl.user_silhouette;
        e["client_labels"] = cl.client_labels;
        stack["components"].push_back(std::move(e));
    }
    stack["clusters"] = ojson::array();
    for (const auto& s : f.stack.scored) {
        ojson e = ojson::object();
        e["component"] = s.component;
        e["label"] = s.label;
        e["size"] = s.users.size();
        e["suspicion"] = s.suspicion;
        e["users"] = s.users;
        stack["clusters"].push_back(std::move(e));
    }
    stack["flagged_cluster"] = f.stack_flagged ? ojson(*f.stack_flagged) : ojson(nullptr);
    fj["stack"] = std::move(stack);

    const FlagSummary summary = summarize(cfg, f);
    fj["flags"] = flags_json(summary);
    ojson stack_users = ojson(summary.stack_users);
    fj["stack_users"] = std::move(stack_users);
    r["findings"] = std::move(fj);
    r["evaluation"] = eval ? evaluation_json(*eval) : ojson(nullptr);
    return r.dump(1) + "\n";
}

std::string attach_evaluation(const std::string& report, const Evaluation& eval) {
    ojson r = parse_report(report);
    r["evaluation"] = evaluation_json(eval);
    return r.dump(1) + "\n";
}

FlagSummary summary_from_report(const std::string& report) {
    const ojson r = parse_report(report);
    FlagSummary s;
    try {
        const auto& f = r.at("findings");
        for (const auto& [name, ids] : f.at("flags").at("accounts").items()) {
            auto& set = s.accounts[name];
            for (const auto& id : ids) set.insert(id.get<AccountId>());
        }
        for (const auto& [name, ws] : f.at("flags").at("windows").items()) {
            auto& v = s.windows[name];
            for (const auto& w : ws) v.emplace_back(w.at(0).get<Timestamp>(), w.at(1).get<Timestamp>());
        }
        for (const auto& p : f.at("communities").at("labels")) {
            s.partition.emplace_back(p.at(0).get<AccountId>(), p.at(1).get<CommunityId>());
        }
        s.stack_users = f.at("stack_users").get<std::vector<AccountId>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report is missing findings: ") + e.what());
    }
    return s;
}

std::string report_digest(const std::string& report) {
    const ojson r = parse_report(report);
    try {
        return r.at("meta").at("config_digest").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw Error("report has no config digest");
    }
}

std::string render_metrics_csv(const Evaluation& ev) {
    std::ostringstream os;
    os.precision(17);
    os << "detector,metric,value\n";
    auto row = [&](const std::string& d, const char* m, const std::optional<double>& v) {
        os << d << ',' << m << ',';
        if (v) os << *v;
        os << '\n';
    };
    auto count = [&](const std::string& d, const char* m, std::size_t v) { os << d << ',' << m << ',' << v << '\n'; };
    for (const auto& [name, m] : ev.accounts) {
        count(name, "flagged", m.flagged);
        count(name, "positives", m.positives);
        count(name, "true_positives", m.true_positives);
        count(name, "false_positives", m.false_positives);
        count(name, "false_negatives", m.false_negatives);
        row(name, "precision", m.precision);
        row(name, "recall", m.recall);
        row(name, "f1", m.f1);
    }
    for (const auto& [name, m] : ev.windows) {
        const std::string d = name + "_windows";
        count(d, "flagged", m.flagged);
        count(d, "planted", m.planted);
        count(d, "hits", m.hits);
        count(d, "detected", m.detected);
        count(d, "false_positives", m.false_positives);
        row(d, "precision", m.precision);
        row(d, "recall", m.recall);
    }
    row("communities", "ari", ev.partition_ari);
    row("stack", "ari", ev.stack_ari);
    return os.str();
}

void write_scenario(const Scenario& s, const RunPaths& paths, const std::string& stage_name) {
    write_event_log(s.log, paths.events(stage_name), paths.accounts(stage_name));
    write_ground_truth(s.truth, paths.truth(stage_name));
}

Scenario read_scenario(const RunPaths& paths, const std::string& stage_name) {
    Scenario s;
    s.log = read_event_log(paths.events(stage_name), paths.accounts(stage_name));
    s.truth = read_ground_truth(paths.truth(stage_name));
    return s;
}

void write_exports(const ScenarioConfig& cfg, const Scenario& s, const Findings& f, const RunPaths& paths) {
    const auto dir = paths.exports();
    write_text_file(dir / "interaction.graphml", interaction_graphml(f.graph, &f.partition, &s.truth));
    write_text_file(dir / "interaction.dot", interaction_dot(f.graph, &f.partition, &s.truth));
    write_text_file(dir / "interaction.csv", interaction_csv(f.graph));
    write_text_file(dir / "stack.graphml", stack_graphml(f.stack.graph, &f.stack, &cfg.catalog));
    write_text_file(dir / "stack.dot", stack_dot(f.stack.graph, &f.stack));
    write_text_file(dir / "stack_clusters.csv", stack_clusters_csv(f.stack));
}

RunResult run_scenario(const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
    std::optional<RunPaths> paths;
    if (out_dir) {
        paths = RunPaths{*out_dir};
        stage("setup", [&] {
            write_text_file(paths->config(), config_to_json(cfg));
            return 0;
        });
    }
    const Simulation sim = simulate(cfg);
    if (paths) stage("simulate", [&] { write_scenario(sim.scenario, *paths, "simulated"); return 0; });

    RunResult out;
    out.scenario = inject_playbooks(cfg, sim);
    if (paths) stage("inject", [&] { write_scenario(out.scenario, *paths, "injected"); return 0; });

    out.findings = detect(cfg, out.scenario.log);
    if (paths) {
        stage("detect", [&] {
            save_topic_model(out.findings.topic_model, paths->topic_model());
            write_text_file(paths->report(), render_report(cfg, out.scenario, out.findings, std::nullopt));
            return 0;
        });
    }

    out.evaluation = stage("evaluate", [&] {
        return evaluate_detections(summarize(cfg, out.findings), out.scenario.truth, out.scenario.log.num_accounts());
    });
    out.report = render_report(cfg, out.scenario, out.findings, out.evaluation);
    if (paths) {
        stage("report", [&] {
            write_text_file(paths->report(), out.report);
            write_text_file(paths->metrics(), render_metrics_csv(out.evaluation));
            write_exports(cfg, out.scenario, out.findings, *paths);
            return 0;
        });
    }
    return out;
}

}  // namespace iolab
