#include "iolab/log_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace iolab {

using ojson = nlohmann::ordered_json;

bool GroundTruth::is_operator(AccountId id) const { return find_operator(id) != nullptr; }

const OperatorRecord* GroundTruth::find_operator(AccountId id) const {
    for (const auto& op : operators) {
        if (op.id == id) return &op;
    }
    return nullptr;
}

std::set<AccountId> GroundTruth::operator_set() const {
    std::set<AccountId> out;
    for (const auto& op : operators) out.insert(op.id);
    return out;
}

std::set<AccountId> GroundTruth::operators_with_role(const std::string& role) const {
    std::set<AccountId> out;
    for (const auto& op : operators) {
        if (op.role == role) out.insert(op.id);
    }
    return out;
}

namespace {

constexpr std::string_view kEventFields[] = {"event_id", "ts",     "author", "kind",
                                             "target",   "client", "tokens", "geo"};
constexpr std::string_view kAccountFields[] = {"id", "created_at", "profile"};

template <std::size_t N>
void check_fields(const ojson& j, const std::string_view (&fields)[N], std::size_t line_no) {
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    if (j.size() != N) throw ParseError(line_no, "expected " + std::to_string(N) + " fields");
    std::size_t i = 0;
    for (const auto& [key, _] : j.items()) {
        if (key != fields[i]) {
            throw ParseError(line_no, "expected field '" + std::string(fields[i]) + "', got '" +
                                          key + "'");
        }
        ++i;
    }
}

std::uint64_t get_uint(const ojson& j, const char* key, std::size_t line_no) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ParseError(line_no, std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::vector<TokenId> get_tokens(const ojson& j, const char* key, std::size_t line_no) {
    const auto& v = j.at(key);
    if (!v.is_array()) throw ParseError(line_no, std::string("field '") + key + "' must be an array");
    std::vector<TokenId> out;
    out.reserve(v.size());
    for (const auto& t : v) {
        if (!t.is_number_unsigned()) {
            throw ParseError(line_no, std::string("field '") + key + "' holds a non-token value");
        }
        out.push_back(t.get<TokenId>());
    }
    return out;
}

ojson parse_json_line(std::string_view line, std::size_t line_no) {
    try {
        return ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
}

}  // namespace

std::string format_event(const Event& e) {
    ojson j;
    j["event_id"] = e.id;
    j["ts"] = e.ts;
    j["author"] = e.author;
    j["kind"] = std::string(to_string(e.kind));
    j["target"] = e.target ? ojson(*e.target) : ojson(nullptr);
    j["client"] = e.client;
    j["tokens"] = e.tokens;
    j["geo"] = e.geo ? ojson(*e.geo) : ojson(nullptr);
    return j.dump();
}

Event parse_event(std::string_view line, std::size_t line_no) {
    const ojson j = parse_json_line(line, line_no);
    check_fields(j, kEventFields, line_no);
    Event e;
    e.id = get_uint(j, "event_id", line_no);
    if (!j["ts"].is_number_integer()) throw ParseError(line_no, "field 'ts' must be an integer");
    e.ts = j["ts"].get<Timestamp>();
    e.author = static_cast<AccountId>(get_uint(j, "author", line_no));
    if (!j["kind"].is_string()) throw ParseError(line_no, "field 'kind' must be a string");
    auto kind = parse_event_kind(j["kind"].get<std::string>());
    if (!kind) throw ParseError(line_no, "unknown kind '" + j["kind"].get<std::string>() + "'");
    e.kind = *kind;
    if (!j["target"].is_null()) e.target = get_uint(j, "target", line_no);
    e.client = static_cast<ClientId>(get_uint(j, "client", line_no));
    e.tokens = get_tokens(j, "tokens", line_no);
    if (!j["geo"].is_null()) {
        if (!j["geo"].is_string()) throw ParseError(line_no, "field 'geo' must be a string or null");
        e.geo = j["geo"].get<std::string>();
    }
    return e;
}

std::string format_account(const Account& a) {
    ojson j;
    j["id"] = a.id;
    j["created_at"] = a.created_at;
    j["profile"] = a.profile;
    return j.dump();
}

Account parse_account(std::string_view line, std::size_t line_no) {
    const ojson j = parse_json_line(line, line_no);
    check_fields(j, kAccountFields, line_no);
    Account a;
    a.id = static_cast<AccountId>(get_uint(j, "id", line_no));
    if (!j["created_at"].is_number_integer()) {
        throw ParseError(line_no, "field 'created_at' must be an integer");
    }
    a.created_at = j["created_at"].get<Timestamp>();
    a.profile = get_tokens(j, "profile", line_no);
    return a;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_event_log(const EventLog& log, const std::filesystem::path& events_path,
                     const std::filesystem::path& accounts_path) {
    std::string events;
    for (const auto& e : log.events) {
        events += format_event(e);
        events += '\n';
    }
    std::string accounts;
    for (const auto& a : log.accounts) {
        accounts += format_account(a);
        accounts += '\n';
    }
    write_text_file(events_path, events);
    write_text_file(accounts_path, accounts);
}

namespace {

template <class Fn>
void for_each_line(const std::string& text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, line_no);
        start = end + 1;
    }
}

}  // namespace

EventLog read_event_log(const std::filesystem::path& events_path,
                        const std::filesystem::path& accounts_path) {
    EventLog log;
    for_each_line(read_text_file(accounts_path), [&](std::string_view line, std::size_t n) {
        log.accounts.push_back(parse_account(line, n));
    });
    for_each_line(read_text_file(events_path), [&](std::string_view line, std::size_t n) {
        log.events.push_back(parse_event(line, n));
    });
    auto violations = validate_event_log(log);
    if (!violations.empty()) {
        const auto& v = violations.front();
        throw InvariantError(std::move(violations), "event log invalid: event " +
                                                        std::to_string(v.event_id) + " " + v.rule);
    }
    return log;
}

std::string format_ground_truth(const GroundTruth& truth) {
    ojson j;
    j["operators"] = ojson::array();
    for (const auto& op : truth.operators) {
        ojson o;
        o["id"] = op.id;
        o["role"] = op.role;
        o["community"] = op.community;
        o["faction"] = op.faction;
        o["controller"] = op.controller;
        j["operators"].push_back(std::move(o));
    }
    j["windows"] = ojson::array();
    for (const auto& w : truth.windows) {
        ojson o;
        o["playbook"] = w.playbook;
        o["start"] = w.start;
        o["end"] = w.end;
        j["windows"].push_back(std::move(o));
    }
    j["communities"] = truth.communities;
    j["topics"] = truth.topics;
    return j.dump(1) + "\n";
}

GroundTruth parse_ground_truth(std::string_view text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("malformed ground truth: ") + e.what());
    }
    GroundTruth t;
    try {
        for (const auto& o : j.at("operators")) {
            OperatorRecord op;
            op.id = o.at("id").get<AccountId>();
            op.role = o.at("role").get<std::string>();
            op.community = o.value("community", -1);
            op.faction = o.value("faction", -1);
            op.controller = o.value("controller", -1);
            t.operators.push_back(std::move(op));
        }
        for (const auto& o : j.at("windows")) {
            t.windows.push_back(InjectionWindow{o.at("playbook").get<std::string>(),
                                                o.at("start").get<Timestamp>(),
                                                o.at("end").get<Timestamp>()});
        }
        t.communities = j.at("communities").get<std::vector<CommunityId>>();
        t.topics = j.at("topics").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("ground truth schema: ") + e.what());
    }
    return t;
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    write_text_file(path, format_ground_truth(truth));
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
    return parse_ground_truth(read_text_file(path));
}

}  // namespace iolab
