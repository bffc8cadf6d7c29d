#ifndef EXPRESSLANE_IO_HPP
#define EXPRESSLANE_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "expresslane/analysis.hpp"
#include "expresslane/equilibrium.hpp"
#include "expresslane/network.hpp"
#include "expresslane/policies.hpp"

namespace expresslane {

std::string_view version();

/// Reads a file into a string; throws ParseError naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Parse errors carry "<source>: <field path>: <message>".
LatencyFn parse_latency(const nlohmann::json& j, const std::string& source, const std::string& path);
Network parse_network(const nlohmann::json& j, const std::string& source = "<network>");
Scenario parse_scenario(const nlohmann::json& j, const std::string& source = "<scenario>");

nlohmann::json parse_json(const std::string& text, const std::string& source);
Network load_network(const std::string& path);
Scenario load_scenario(const std::string& path);

nlohmann::json latency_to_json(const LatencyFn& fn);
nlohmann::json network_to_json(const Network& net);
nlohmann::json scenario_to_json(const Scenario& sc);
nlohmann::json result_to_json(const EquilibriumResult& result, const std::vector<UserGroup>& groups);

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Comma-separated table with provenance comment lines.
class CsvTable {
public:
    CsvTable(std::vector<std::string> header, std::string digest);

    /// Extra "# ..." line placed after the provenance lines.
    void add_comment(const std::string& line);
    void add_row(const std::vector<std::string>& cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::string digest_;
    std::vector<std::string> comments_;
    std::string body_;
};

}  // namespace expresslane

#endif
