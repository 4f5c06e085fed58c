#pragma once

#include "iolab/event_log.hpp"
#include "iolab/ground_truth.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iolab {

// A record that does not parse; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Records parse but the assembled log breaks an invariant.
class InvariantError : public Error {
public:
    InvariantError(std::vector<Violation> violations, const std::string& what)
        : Error(what), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

// One JSON object per line, fields in fixed order:
//   event_id, ts, author, kind, target, client, tokens, geo
std::string format_event(const Event& e);
Event parse_event(std::string_view line, std::size_t line_no);

// One JSON object per line: id, created_at, profile.
std::string format_account(const Account& a);
Account parse_account(std::string_view line, std::size_t line_no);

void write_event_log(const EventLog& log, const std::filesystem::path& events_path,
                     const std::filesystem::path& accounts_path);
EventLog read_event_log(const std::filesystem::path& events_path,
                        const std::filesystem::path& accounts_path);

std::string format_ground_truth(const GroundTruth& truth);
GroundTruth parse_ground_truth(std::string_view text);
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

// Small helpers shared by the writers.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace iolab
