#include "cli_app.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "expresslane/analysis.hpp"
#include "expresslane/equilibrium.hpp"
#include "expresslane/errors.hpp"
#include "expresslane/io.hpp"
#include "expresslane/network.hpp"
#include "expresslane/single_edge.hpp"

namespace expresslane::cli {

namespace {

using nlohmann::json;

struct Common {
    std::string network;
    std::string scenario;
    std::string out;
    unsigned jobs = 1;
    std::uint64_t seed = 0;
    double gap_tol = 1e-6;
    std::uint64_t max_iters = 200000;
};

struct EdgeParams {
    double a = 0.0;
    double b = 0.25;
    double p = 2.0;
    double tau = 0.4;
    double ve = 1.0;
    std::optional<double> vi;
    double alpha_step = 0.01;

    LatencyFn latency() const { return LatencyFn::monomial(b, p, a); }
    json to_json() const
    {
        json j{{"a", a}, {"b", b}, {"p", p}, {"tau", tau}, {"ve", ve}, {"alpha_step", alpha_step}};
        if (vi)
            j["vi"] = *vi;
        return j;
    }
};

void add_common(CLI::App* cmd, Common& c, bool solver)
{
    cmd->add_option("--network", c.network, "Network JSON file");
    cmd->add_option("--scenario", c.scenario, "Scenario JSON file");
    cmd->add_option("--out", c.out, "Output file (stdout when omitted)");
    if (!solver)
        return;
    cmd->add_option("--jobs", c.jobs, "Worker threads for independent solves")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Seed for randomized work");
    cmd->add_option("--gap-tol", c.gap_tol, "Relative VI gap tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", c.max_iters, "Solver sweep limit")->check(CLI::PositiveNumber);
}

void add_edge_params(CLI::App* cmd, EdgeParams& e, bool with_vi)
{
    cmd->add_option("--a", e.a, "Latency free-flow term a in a + b x^p");
    cmd->add_option("--b", e.b, "Latency scale b");
    cmd->add_option("--p", e.p, "Latency exponent p");
    cmd->add_option("--tau", e.tau, "Toll");
    cmd->add_option("--ve", e.ve, "Eligible value of time");
    if (with_vi)
        cmd->add_option("--vi", e.vi, "Ineligible value of time (omit for eligible-only)");
    cmd->add_option("--alpha-step", e.alpha_step, "Step of the alpha grid on [0, 1]")->check(CLI::PositiveNumber);
}

SolverOptions solver_options(const Common& c)
{
    SolverOptions o;
    o.gap_tol = c.gap_tol;
    o.max_iters = c.max_iters;
    o.seed = c.seed;
    return o;
}

json common_json(const Common& c)
{
    return {{"seed", c.seed}, {"gap_tol", c.gap_tol}, {"max_iters", c.max_iters}};
}

std::string digest(const json& config)
{
    return hex64(fnv1a64(config.dump()));
}

json provenance(const std::string& dig)
{
    return {{"tool", "expresslane"}, {"version", std::string(version())}, {"config_digest", dig}};
}

void emit(const Common& c, const std::string& content, std::ostream& out)
{
    if (c.out.empty())
        out << content;
    else
        write_file(c.out, content);
}

void require_path(const std::string& value, const char* flag)
{
    if (value.empty())
        throw Error(ErrorCode::ParseError, std::string(flag) + " is required for this command");
}

std::vector<double> parse_list(const std::string& text, const char* flag)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, std::string(flag) + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty())
        throw Error(ErrorCode::ParseError, std::string(flag) + ": empty list");
    return out;
}

// "lo:hi:step" or a comma list.
std::vector<double> parse_range(const std::string& text, const char* flag)
{
    if (text.find(':') == std::string::npos)
        return parse_list(text, flag);
    std::string joined = text;
    std::replace(joined.begin(), joined.end(), ':', ',');
    auto parts = parse_list(joined, flag);
    if (parts.size() != 3)
        throw Error(ErrorCode::ParseError, std::string(flag) + ": expected lo:hi:step");
    return linear_grid(parts[0], parts[1], parts[2]);
}

double total_demand(const Scenario& sc)
{
    double d = 0.0;
    for (const auto& g : sc.groups)
        d += g.demand;
    return d > 0.0 ? d : 1.0;
}

int cmd_validate(const Common& c, std::ostream& out, std::ostream& err)
{
    require_path(c.network, "--network");
    Network net = load_network(c.network);
    std::optional<Scenario> sc;
    if (!c.scenario.empty())
        sc = load_scenario(c.scenario);
    json config{{"command", "validate"}, {"network", network_to_json(net)}};
    if (sc)
        config["scenario"] = scenario_to_json(*sc);
    std::string dig = digest(config);

    auto violations = find_violations(net, sc ? total_demand(*sc) : 1.0);
    if (violations.empty() && sc) {
        try {
            check_policy(sc->policy, net.edges.size(), sc->horizon);
        } catch (const Error& e) {
            violations.push_back({e.code(), e.what()});
        }
    }
    json report{{"provenance", provenance(dig)}, {"valid", violations.empty()}};
    if (!violations.empty()) {
        json list = json::array();
        for (const auto& v : violations) {
            err << to_string(v.code) << ": " << v.detail << "\n";
            list.push_back({{"code", std::string(to_string(v.code))}, {"detail", v.detail}});
        }
        report["violations"] = list;
        if (!c.out.empty())
            write_file(c.out, report.dump(2) + "\n");
        return kValidationFailure;
    }
    ValidatedNetwork vn = validate(net, sc ? total_demand(*sc) : 1.0);
    report["topological_order"] = vn.topological_names();
    emit(c, report.dump(2) + "\n", out);
    return kOk;
}

int cmd_solve(const Common& c, std::ostream& out, std::ostream& err)
{
    require_path(c.network, "--network");
    require_path(c.scenario, "--scenario");
    Network net = load_network(c.network);
    Scenario sc = load_scenario(c.scenario);
    json config{{"command", "solve"},
                {"network", network_to_json(net)},
                {"scenario", scenario_to_json(sc)},
                {"options", common_json(c)}};
    ValidatedNetwork vn = validate(net, total_demand(sc));
    EquilibriumResult r = solve(vn, sc, solver_options(c));
    json doc{{"provenance", provenance(digest(config))}, {"result", result_to_json(r, sc.groups)}};
    emit(c, doc.dump(2) + "\n", out);
    if (!r.converged) {
        err << "NotConverged: vi_gap " << format_double(r.vi_gap) << " after " << r.iterations << " iterations\n";
        return kNotConverged;
    }
    return kOk;
}

std::string fmt_thresholds(const std::vector<double>& t)
{
    std::string s;
    for (double v : t)
        s += (s.empty() ? "" : " ") + format_double(v);
    return s;
}

int cmd_curves(const Common& c, const EdgeParams& p, std::ostream& out)
{
    LatencyFn l = p.latency();
    json config{{"command", "curves"}, {"params", p.to_json()}};
    CsvTable csv({"alpha", "yC", "yD", "yC_credit", "yC_pocket"}, digest(config));
    std::vector<double> alphas = linear_grid(0.0, 1.0, p.alpha_step);
    if (p.vi) {
        RegimeReport rep = classify_regime(l, p.tau, p.ve, *p.vi);
        csv.add_comment("regime " + std::string(to_string(rep.regime)) + " thresholds " +
                        fmt_thresholds(rep.thresholds));
        for (double a : alphas) {
            double yc = yC_case2(a);
            double yd = yD_case2(a, l, p.tau, p.ve, *p.vi);
            csv.add_row({format_double(a), format_double(yc), format_double(yd), format_double(yc), "0"});
        }
    } else {
        RegimeReport rep = single_group_report(l, p.tau, p.ve);
        csv.add_comment("regime " + std::string(to_string(rep.regime)) + " thresholds " +
                        fmt_thresholds(rep.thresholds));
        for (double a : alphas) {
            CreditSplit yc = yC_case1(a, l, p.tau, p.ve);
            double yd = yD_case1(a, l, p.tau, p.ve);
            csv.add_row({format_double(a), format_double(yc.total), format_double(yd), format_double(yc.credit),
                         format_double(yc.pocket)});
        }
    }
    emit(c, csv.str(), out);
    return kOk;
}

struct GridArgs {
    std::string tolls = "0:20:1";
    std::string budgets = "0:90:5";
    std::string weights = "1,1,1";
    std::string kind;
};

int cmd_grid(const Common& c, const GridArgs& g, std::ostream& out, std::ostream& err)
{
    require_path(c.network, "--network");
    require_path(c.scenario, "--scenario");
    Network net = load_network(c.network);
    Scenario sc = load_scenario(c.scenario);
    PolicyKind kind = kind_of(sc.policy);
    if (g.kind == "dbcp")
        kind = PolicyKind::Dbcp;
    else if (g.kind == "cbcp")
        kind = PolicyKind::Cbcp;
    else if (!g.kind.empty())
        throw Error(ErrorCode::ParseError, "--kind: expected dbcp or cbcp");
    auto w = parse_list(g.weights, "--weights");
    if (w.size() != 3)
        throw Error(ErrorCode::ParseError, "--weights: expected three values lambda_E,lambda_I,lambda_R");
    SocietalWeights weights{w[0], w[1], w[2]};
    auto tolls = parse_range(g.tolls, "--tolls");
    auto budgets = parse_range(g.budgets, "--budgets");

    json config{{"command", "grid"},
                {"network", network_to_json(net)},
                {"scenario", scenario_to_json(sc)},
                {"options", common_json(c)},
                {"tolls", tolls},
                {"budgets", budgets},
                {"weights", w},
                {"kind", kind == PolicyKind::Dbcp ? "dbcp" : "cbcp"}};
    ValidatedNetwork vn = validate(net, total_demand(sc));
    GridSearchReport rep =
        pareto_grid_search(vn, sc.groups, tolls, budgets, weights, kind, solver_options(c), c.jobs);

    CsvTable csv({"tau", "budget", "f_lambda", "pct_express_all", "pct_express_eligible", "pct_express_ineligible",
                  "tt_express", "tt_general", "converged"},
                 digest(config));
    csv.add_comment(std::string("kind ") + (kind == PolicyKind::Dbcp ? "dbcp" : "cbcp") + " weights " +
                    format_double(w[0]) + " " + format_double(w[1]) + " " + format_double(w[2]));
    if (rep.best) {
        const GridRow& b = rep.rows[*rep.best];
        csv.add_comment("best tau " + format_double(b.toll) + " budget " + format_double(b.budget) + " f_lambda " +
                        format_double(b.f_lambda));
    }
    bool all_converged = true;
    for (const auto& row : rep.rows) {
        all_converged = all_converged && row.converged;
        csv.add_row({format_double(row.toll), format_double(row.budget), format_double(row.f_lambda),
                     format_double(row.pct_express_all), format_double(row.pct_express_eligible),
                     format_double(row.pct_express_ineligible), format_double(row.tt_express),
                     format_double(row.tt_general), row.converged ? "1" : "0"});
    }
    emit(c, csv.str(), out);
    if (!all_converged) {
        err << "NotConverged: some grid points did not reach the gap tolerance\n";
        return kNotConverged;
    }
    return kOk;
}

struct SweepArgs {
    std::string vi_bar = "1.25,1.5,1.75,2";
    double delta = 0.1;
    std::size_t horizon = 5;
    std::string di = "0,0.5,1,1.5";
    double vi = 1.25;
};

SolverOptions sweep_options(const Common& c, const CLI::App* cmd)
{
    SolverOptions o = VotSweep::tight_options();
    if (cmd->count("--gap-tol"))
        o.gap_tol = c.gap_tol;
    o.max_iters = c.max_iters;
    return o;
}

int cmd_sensitivity_vot(const Common& c, const EdgeParams& p, const SweepArgs& s, const CLI::App* cmd,
                        std::ostream& out, std::ostream& err)
{
    auto bars = parse_list(s.vi_bar, "--vi-bar");
    SolverOptions opt = sweep_options(c, cmd);
    json config{{"command", "sensitivity-vot"}, {"params", p.to_json()},  {"vi_bar", bars},
                {"delta", s.delta},             {"horizon", s.horizon},   {"seed", c.seed},
                {"gap_tol", opt.gap_tol},       {"max_iters", opt.max_iters}};
    CsvTable csv({"alpha", "yC", "yD", "vI_bar"}, digest(config));
    bool ok = true;
    for (double bar : bars) {
        VotSweep sw;
        sw.latency = p.latency();
        sw.toll = p.tau;
        sw.vot_eligible = p.ve;
        sw.vi_bar = bar;
        sw.delta = s.delta;
        sw.horizon = s.horizon;
        sw.seed = c.seed;
        sw.alphas = linear_grid(0.0, 1.0, p.alpha_step);
        sw.options = opt;
        sw.jobs = c.jobs;
        for (const auto& pt : sensitivity_vot(sw)) {
            ok = ok && pt.converged;
            csv.add_row({format_double(pt.alpha), format_double(pt.yC), format_double(pt.yD), format_double(bar)});
        }
    }
    emit(c, csv.str(), out);
    if (!ok) {
        err << "NotConverged: some sweep points did not reach the gap tolerance\n";
        return kNotConverged;
    }
    return kOk;
}

int cmd_sensitivity_demand(const Common& c, const EdgeParams& p, const SweepArgs& s, const CLI::App* cmd,
                           std::ostream& out, std::ostream& err)
{
    DemandSweep sw;
    sw.latency = p.latency();
    sw.toll = p.tau;
    sw.vot_eligible = p.ve;
    sw.vot_ineligible = s.vi;
    sw.demands = parse_list(s.di, "--di");
    sw.alphas = linear_grid(0.0, 1.0, p.alpha_step);
    sw.options = sweep_options(c, cmd);
    sw.jobs = c.jobs;
    json config{{"command", "sensitivity-demand"}, {"params", p.to_json()},       {"vi", s.vi},
                {"di", sw.demands},                {"gap_tol", sw.options.gap_tol}, {"max_iters", sw.options.max_iters}};
    CsvTable csv({"alpha", "yC", "yD", "dI"}, digest(config));
    bool ok = true;
    for (const auto& curve : sensitivity_demand(sw))
        for (const auto& pt : curve.points) {
            ok = ok && pt.converged;
            csv.add_row({format_double(pt.alpha), format_double(pt.yC), format_double(pt.yD),
                         format_double(curve.demand_ineligible)});
        }
    emit(c, csv.str(), out);
    if (!ok) {
        err << "NotConverged: some sweep points did not reach the gap tolerance\n";
        return kNotConverged;
    }
    return kOk;
}

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ParseError:
        return kIoError;
    case ErrorCode::NotConverged:
        return kNotConverged;
    default:
        return kValidationFailure;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Congestion-pricing equilibrium engine for express-lane networks", "expresslane"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    Common common;
    EdgeParams edge;
    GridArgs grid;
    SweepArgs sweep;

    auto* validate_cmd = app.add_subcommand("validate", "Check a network (and optionally a scenario)");
    add_common(validate_cmd, common, false);

    auto* solve_cmd = app.add_subcommand("solve", "Compute the equilibrium of a scenario");
    add_common(solve_cmd, common, true);

    auto* curves_cmd = app.add_subcommand("curves", "Single-edge y^C and y^D curves from the closed forms");
    add_common(curves_cmd, common, false);
    add_edge_params(curves_cmd, edge, true);

    auto* grid_cmd = app.add_subcommand("grid", "Pareto-weighted toll and budget grid search");
    add_common(grid_cmd, common, true);
    grid_cmd->add_option("--tolls", grid.tolls, "Toll grid lo:hi:step or list");
    grid_cmd->add_option("--budgets", grid.budgets, "Budget grid lo:hi:step or list");
    grid_cmd->add_option("--weights", grid.weights, "lambda_E,lambda_I,lambda_R");
    grid_cmd->add_option("--kind", grid.kind, "dbcp or cbcp (defaults to the scenario policy)");

    auto* vot_cmd = app.add_subcommand("sensitivity-vot", "Curves under perturbed ineligible VoT");
    add_common(vot_cmd, common, true);
    add_edge_params(vot_cmd, edge, false);
    vot_cmd->add_option("--vi-bar", sweep.vi_bar, "Mean ineligible VoT values, comma separated");
    vot_cmd->add_option("--delta", sweep.delta, "VoT perturbation half-width");
    vot_cmd->add_option("--horizon", sweep.horizon, "Number of periods")->check(CLI::PositiveNumber);

    auto* demand_cmd = app.add_subcommand("sensitivity-demand", "Curves for several ineligible demands");
    add_common(demand_cmd, common, true);
    add_edge_params(demand_cmd, edge, false);
    demand_cmd->add_option("--vi", sweep.vi, "Ineligible VoT");
    demand_cmd->add_option("--di", sweep.di, "Ineligible demands, comma separated");

    edge.alpha_step = 0.01;
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kIoError;
    }

    try {
        if (*validate_cmd)
            return cmd_validate(common, out, err);
        if (*solve_cmd)
            return cmd_solve(common, out, err);
        if (*curves_cmd)
            return cmd_curves(common, edge, out);
        if (*grid_cmd)
            return cmd_grid(common, grid, out, err);
        if (*vot_cmd) {
            if (!vot_cmd->count("--alpha-step"))
                edge.alpha_step = 0.05;
            return cmd_sensitivity_vot(common, edge, sweep, vot_cmd, out, err);
        }
        if (*demand_cmd) {
            if (!demand_cmd->count("--alpha-step"))
                edge.alpha_step = 0.05;
            return cmd_sensitivity_demand(common, edge, sweep, demand_cmd, out, err);
        }
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations())
            err << to_string(v.code) << ": " << v.detail << "\n";
        return kValidationFailure;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    }
    return kIoError;
}

}  // namespace expresslane::cli
