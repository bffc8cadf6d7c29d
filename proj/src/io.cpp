#include "expresslane/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "expresslane/errors.hpp"

namespace expresslane {

using nlohmann::json;

std::string_view version()
{
    return EXPRESSLANE_VERSION;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::ParseError, path + ": cannot open file for writing");
    out << content;
    if (!out)
        throw Error(ErrorCode::ParseError, path + ": write failed");
}

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& path, const std::string& msg)
{
    throw Error(ErrorCode::ParseError, source + ": " + (path.empty() ? "<root>" : path) + ": " + msg);
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

std::string join(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

const json& field(const json& obj, const std::string& key, const std::string& source, const std::string& path)
{
    if (!obj.is_object())
        fail(source, path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        fail(source, join(path, key), "missing required field");
    return *it;
}

double number(const json& j, const std::string& source, const std::string& path)
{
    if (!j.is_number())
        fail(source, path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v))
        fail(source, path, "expected a finite number");
    return v;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& source,
                 const std::string& path)
{
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, source, join(path, key));
}

std::string text(const json& j, const std::string& source, const std::string& path)
{
    if (!j.is_string())
        fail(source, path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& source, const std::string& path)
{
    if (!j.is_array())
        fail(source, path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], source, join(path, i)));
    return out;
}

std::vector<std::string> names(const json& j, const std::string& source, const std::string& path)
{
    if (j.is_string())
        return {j.get<std::string>()};
    if (!j.is_array())
        fail(source, path, "expected a string or an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(text(j[i], source, join(path, i)));
    return out;
}

EdgeTimeTable table(const json& j, const std::string& source, const std::string& path)
{
    if (!j.is_array())
        fail(source, path, "expected an array indexed [edge][time]");
    EdgeTimeTable out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(numbers(j[i], source, join(path, i)));
    return out;
}

// Prefixes library errors with the file and field, keeping their code.
template <class F>
auto guarded(const std::string& source, const std::string& path, F f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError)
            throw;
        throw Error(e.code(), source + ": " + path + ": " + e.what());
    }
}

}  // namespace

json parse_json(const std::string& text_in, const std::string& source)
{
    try {
        return json::parse(text_in);
    } catch (const json::parse_error& e) {
        fail(source, "", std::string("invalid JSON: ") + e.what());
    }
}

LatencyFn parse_latency(const json& j, const std::string& source, const std::string& path)
{
    std::string form = text(field(j, "form", source, path), source, join(path, "form"));
    return guarded(source, path, [&] {
        if (form == "monomial") {
            double b = number(field(j, "b", source, path), source, join(path, "b"));
            double p = number(field(j, "p", source, path), source, join(path, "p"));
            return LatencyFn::monomial(b, p, number_or(j, "a", 0.0, source, path));
        }
        if (form == "bpr") {
            return LatencyFn::bpr(number(field(j, "a", source, path), source, join(path, "a")),
                                  number(field(j, "b", source, path), source, join(path, "b")),
                                  number(field(j, "c", source, path), source, join(path, "c")),
                                  number(field(j, "p", source, path), source, join(path, "p")));
        }
        if (form == "polynomial") {
            return LatencyFn::polynomial(
                numbers(field(j, "coefficients", source, path), source, join(path, "coefficients")));
        }
        fail(source, join(path, "form"), "unknown latency form '" + form + "'");
    });
}

Network parse_network(const json& j, const std::string& source)
{
    Network net;
    const json& nodes = field(j, "nodes", source, "");
    net.nodes = names(nodes, source, "nodes");
    const json& edges = field(j, "edges", source, "");
    if (!edges.is_array())
        fail(source, "edges", "expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::string p = join("edges", i);
        const json& e = edges[i];
        Edge edge{
            e.contains("id") ? text(e["id"], source, join(p, "id")) : "e" + std::to_string(i),
            text(field(e, "tail", source, p), source, join(p, "tail")),
            text(field(e, "head", source, p), source, join(p, "head")),
            parse_latency(field(e, "express", source, p), source, join(p, "express")),
            parse_latency(field(e, "general", source, p), source, join(p, "general")),
        };
        net.edges.push_back(std::move(edge));
    }
    net.origins = names(field(j, "origin", source, ""), source, "origin");
    net.destinations = names(field(j, "destination", source, ""), source, "destination");
    return net;
}

Scenario parse_scenario(const json& j, const std::string& source)
{
    Scenario sc;
    const json& h = field(j, "horizon", source, "");
    if (!h.is_number_integer() || h.get<long long>() < 1)
        fail(source, "horizon", "expected an integer >= 1");
    sc.horizon = h.get<std::size_t>();

    const json& groups = field(j, "groups", source, "");
    if (!groups.is_array() || groups.empty())
        fail(source, "groups", "expected a nonempty array");
    for (std::size_t i = 0; i < groups.size(); ++i) {
        std::string p = join("groups", i);
        const json& g = groups[i];
        UserGroup grp;
        grp.id = g.contains("id") ? text(g["id"], source, join(p, "id")) : "g" + std::to_string(i);
        const json& el = field(g, "eligible", source, p);
        if (!el.is_boolean())
            fail(source, join(p, "eligible"), "expected true or false");
        grp.eligible = el.get<bool>();
        grp.demand = number_or(g, "demand", 1.0, source, p);
        const json& vot = field(g, "vot", source, p);
        if (vot.is_number())
            grp.vot.assign(sc.horizon, number(vot, source, join(p, "vot")));
        else
            grp.vot = numbers(vot, source, join(p, "vot"));
        sc.groups.push_back(std::move(grp));
    }
    guarded(source, "groups", [&] {
        check_groups(sc.groups, sc.horizon);
        return 0;
    });

    const json& pol = field(j, "policy", source, "");
    std::string kind = text(field(pol, "kind", source, "policy"), source, "policy.kind");
    EdgeTimeTable tolls = table(field(pol, "tolls", source, "policy"), source, "policy.tolls");
    if (kind == "dbcp") {
        sc.policy = DbcpPolicy{tolls, table(field(pol, "discounts", source, "policy"), source, "policy.discounts")};
    } else if (kind == "cbcp") {
        sc.policy = CbcpPolicy{tolls, number(field(pol, "budget", source, "policy"), source, "policy.budget")};
    } else {
        fail(source, "policy.kind", "expected \"dbcp\" or \"cbcp\", got '" + kind + "'");
    }
    guarded(source, "policy", [&] {
        check_policy(sc.policy, tolls.size(), sc.horizon);
        return 0;
    });
    return sc;
}

Network load_network(const std::string& path)
{
    return parse_network(parse_json(read_file(path), path), path);
}

Scenario load_scenario(const std::string& path)
{
    return parse_scenario(parse_json(read_file(path), path), path);
}

json latency_to_json(const LatencyFn& fn)
{
    switch (fn.form()) {
    case LatencyForm::Monomial:
        return {{"form", "monomial"}, {"a", fn.free_flow()}, {"b", fn.scale()}, {"p", fn.exponent()}};
    case LatencyForm::Bpr:
        return {{"form", "bpr"}, {"a", fn.free_flow()}, {"b", fn.scale()}, {"c", fn.capacity()}, {"p", fn.exponent()}};
    case LatencyForm::Polynomial:
        return {{"form", "polynomial"}, {"coefficients", fn.coefficients()}};
    }
    return {};
}

json network_to_json(const Network& net)
{
    json edges = json::array();
    for (const auto& e : net.edges)
        edges.push_back({{"id", e.id},
                         {"tail", e.tail},
                         {"head", e.head},
                         {"express", latency_to_json(e.express)},
                         {"general", latency_to_json(e.general)}});
    json o = net.origins.size() == 1 ? json(net.origins[0]) : json(net.origins);
    json d = net.destinations.size() == 1 ? json(net.destinations[0]) : json(net.destinations);
    return {{"nodes", net.nodes}, {"edges", edges}, {"origin", o}, {"destination", d}};
}

json scenario_to_json(const Scenario& sc)
{
    json groups = json::array();
    for (const auto& g : sc.groups)
        groups.push_back({{"id", g.id}, {"eligible", g.eligible}, {"demand", g.demand}, {"vot", g.vot}});
    json pol;
    if (const auto* d = std::get_if<DbcpPolicy>(&sc.policy))
        pol = {{"kind", "dbcp"}, {"tolls", d->tolls}, {"discounts", d->discounts}};
    else {
        const auto& c = std::get<CbcpPolicy>(sc.policy);
        pol = {{"kind", "cbcp"}, {"tolls", c.tolls}, {"budget", c.budget}};
    }
    return {{"groups", groups}, {"policy", pol}, {"horizon", sc.horizon}};
}

json result_to_json(const EquilibriumResult& r, const std::vector<UserGroup>& groups)
{
    json flows = json::array();
    for (std::size_t g = 0; g < r.flows.groups(); ++g) {
        json per_t = json::array();
        for (std::size_t t = 0; t < r.flows.horizon(); ++t) {
            json per_e = json::array();
            for (std::size_t e = 0; e < r.flows.edges(); ++e)
                per_e.push_back({r.flows.at(g, t, e, FlowSlot::ExpressCredit), r.flows.at(g, t, e, FlowSlot::ExpressPaid),
                                 r.flows.at(g, t, e, FlowSlot::General)});
            per_t.push_back(per_e);
        }
        flows.push_back(per_t);
    }
    json agg = json::array();
    for (std::size_t t = 0; t < r.aggregate.horizon(); ++t) {
        json per_e = json::array();
        for (std::size_t e = 0; e < r.aggregate.edges(); ++e)
            per_e.push_back({r.aggregate.at(t, e, Lane::Express), r.aggregate.at(t, e, Lane::General)});
        agg.push_back(per_e);
    }
    json ids = json::array();
    for (const auto& g : groups)
        ids.push_back(g.id);
    return {
        {"kind", r.kind == PolicyKind::Dbcp ? "dbcp" : "cbcp"},
        {"converged", r.converged},
        {"iterations", r.iterations},
        {"vi_gap", r.vi_gap},
        {"fw_gap", r.fw_gap},
        {"objective", r.objective},
        {"total_cost", r.total_cost},
        {"groups", ids},
        {"per_group_cost", r.per_group_cost},
        {"budget_spent", r.budget_spent},
        {"flow_layout", "[group][time][edge][credit, paid, general]"},
        {"flows", flows},
        {"aggregate_layout", "[time][edge][express, general]"},
        {"aggregate", agg},
    };
}

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

CsvTable::CsvTable(std::vector<std::string> header, std::string digest)
    : header_(std::move(header)), digest_(std::move(digest))
{
}

void CsvTable::add_comment(const std::string& line)
{
    comments_.push_back(line);
}

void CsvTable::add_row(const std::vector<std::string>& cells)
{
    if (cells.size() != header_.size())
        throw Error(ErrorCode::InvalidArgument, "CSV row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

std::string CsvTable::str() const
{
    std::string out = "# expresslane " + std::string(version()) + "\n";
    out += "# config-digest " + digest_ + "\n";
    for (const auto& c : comments_)
        out += "# " + c + "\n";
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i)
            out += ',';
        out += header_[i];
    }
    out += '\n';
    return out + body_;
}

}  // namespace expresslane
