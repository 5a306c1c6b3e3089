#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epl/counterexample.hpp"
#include "epl/inequalities.hpp"
#include "epl/positivity.hpp"
#include "epl/report.hpp"

namespace epl::cli {

enum ExitCode : int { kSuccess = 0, kInternal = 1, kFinding = 2, kUsage = 64 };

/// Invalid flags, config keys or parameter combinations.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Flat `key = value` lines; blank lines and lines starting with '#' are ignored.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(key, value);
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline std::vector<ShapeKind> parse_shapes(const std::string& s)
{
    std::vector<ShapeKind> out;
    for (const auto& name : split_list(s)) {
        try {
            out.push_back(parse_shape_kind(name));
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
    }
    if (out.empty()) throw UsageError("at least one shape is required");
    return out;
}

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw UsageError(msg);
}

/// Scalar divergence-form operators selectable by name.
inline ScalarDivForm scalar_operator(const std::string& name, int n, double scale)
{
    if (name == "laplace") return ScalarDivForm::laplacian(n);
    if (name == "sin")
        return ScalarDivForm::scaled_isotropic(
            n, [](const Point& x) { return 1.0 + 0.5 * std::sin(x[0]); }, 0.5, 1.5, "sin");
    if (name == "scaled") {
        require(scale > 0.0, "--scale must be positive");
        return ScalarDivForm::scaled_isotropic(n, [scale](const Point&) { return scale; }, scale, scale,
                                               "scaled:" + epl::detail::fmt17(scale));
    }
    throw UsageError("unknown scalar operator '" + name + "' (expected laplace, sin or scaled)");
}

inline void write_text(const std::string& path, const std::string& text)
{
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f) throw Error("write failed for " + path);
}

inline void validate_grid(int nodes, int dim)
{
    require(nodes >= 5, "--grid must be at least 5");
    require(dim >= 3 && dim <= kMaxDim, "--n must lie in [3, 7]");
    double total = 1.0;
    for (int a = 0; a < dim; ++a) total *= nodes;
    require(total <= 5e7, "grid too large: " + std::to_string(nodes) + "^" + std::to_string(dim) + " nodes");
}

// Usage errors raised by library validation are reported as such.
template <class Fn>
void as_usage(Fn&& fn)
{
    try {
        fn();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

}  // namespace detail

/// A subcommand: CLI11 registration plus the runner invoked after parsing.
struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    std::function<int(std::ostream&)> run;
};

// ---------------------------------------------------------------------------------------------

struct PositivityOptions {
    std::string op = "lame";
    double alpha = 0.5;
    int n = 3;
    int m = 1;
    int grid = 17;
    std::string shape = "ball";
    int puncture = 2;
    std::string expect = "none";
    double sign_tolerance = 1e-6;
    int iters = 300;
    std::uint64_t seed = 7;
};

inline int cmd_verify_positivity(const PositivityOptions& o, std::ostream& out)
{
    detail::require(o.op == "lame" || o.op == "laplace" || o.op == "polyharmonic",
                    "--op must be lame, laplace or polyharmonic");
    detail::require(o.expect == "none" || o.expect == "nonneg" || o.expect == "neg",
                    "--expect must be none, nonneg or neg");
    const int dim = o.op == "lame" ? 3 : o.n;
    detail::validate_grid(o.grid, dim);
    detail::require(o.puncture >= 1, "--puncture must be at least 1");
    detail::require(2 * o.puncture + 2 < o.grid, "--puncture does not fit in the grid");
    detail::require(o.iters >= 1, "--iters must be positive");
    detail::require(o.sign_tolerance >= 0.0, "--tolerance must be non-negative");
    OperatorSpec op;
    std::optional<WeightEvaluator> w;
    detail::as_usage([&] {
        if (o.op == "lame") {
            op = Lame3D{o.alpha};
            w = WeightEvaluator::lame(o.alpha);
        } else if (o.op == "laplace") {
            op = ScalarDivForm::laplacian(dim);
            w = WeightEvaluator::laplace(dim);
        } else {
            op = Polyharmonic{o.m, dim};
            w = WeightEvaluator::polyharmonic(o.m, dim);
        }
        validate(op);
        parse_shape_kind(o.shape);
    });

    const DomainPtr dom = build_domain(DomainShape::standard(parse_shape_kind(o.shape)), o.grid, dim);
    const PunctureSpec punct{center_node(*dom), o.puncture};
    RayleighConfig rc;
    rc.iters = o.iters;
    rc.seed = o.seed;
    const RayleighResult r = min_rayleigh(op, *w, *dom, punct, rc);
    const bool nonneg = r.min_eig >= -o.sign_tolerance;
    const bool match = o.expect == "none" || (o.expect == "nonneg") == nonneg;

    nlohmann::ordered_json j;
    j["command"] = "verify-positivity";
    j["operator"] = describe(op);
    if (o.op == "lame") j["alpha"] = o.alpha;
    j["dim"] = dim;
    j["grid"] = o.grid;
    j["shape"] = o.shape;
    j["puncture"] = o.puncture;
    j["min_eig"] = r.min_eig;
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["admissible_dim"] = r.admissible_dim;
    j["sign"] = nonneg ? "nonneg" : "neg";
    j["expect"] = o.expect;
    j["match"] = match;
    out << j.dump(2) << '\n';
    return match ? kSuccess : kFinding;
}

// ---------------------------------------------------------------------------------------------

struct SweepOptions {
    std::vector<int> grids{17};
    std::string shape = "ball";
    int puncture = 2;
    std::vector<double> lower{-0.9, 0.0};
    std::vector<double> upper{1.0, 5.0};
    double tol = 0.05;
    double sign_tolerance = 1e-6;
    std::string out_path;
};

inline int cmd_sweep_alpha(const SweepOptions& o, std::ostream& out)
{
    detail::require(!o.grids.empty(), "at least one --grid is required");
    for (int g : o.grids) detail::validate_grid(g, 3);
    detail::require(o.lower.size() == 2 && o.upper.size() == 2, "--lower and --upper take two values lo,hi");
    detail::require(o.lower[0] < o.lower[1] && o.upper[0] < o.upper[1], "brackets must be increasing");
    detail::require(o.lower[0] > -1.0 && o.upper[0] > -1.0, "brackets must satisfy alpha > -1");
    detail::require(o.tol > 0.0, "--tol must be positive");
    detail::require(o.puncture >= 1, "--puncture must be at least 1");
    for (int g : o.grids) detail::require(2 * o.puncture + 2 < g, "--puncture does not fit in the grid");
    detail::as_usage([&] { parse_shape_kind(o.shape); });

    AlphaSearchConfig cfg;
    cfg.radius_cells = o.puncture;
    cfg.sign_tolerance = o.sign_tolerance;
    std::vector<AlphaRow> table;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    bool all_found = true;
    for (int g : o.grids) {
        const DomainPtr dom = build_domain(DomainShape::standard(parse_shape_kind(o.shape)), g, 3);
        std::vector<AlphaRow> rows;
        nlohmann::ordered_json res;
        res["grid"] = g;
        auto one = [&](const std::vector<double>& br, bool left_nonneg, const char* key) {
            try {
                res[key] = alpha_threshold_bisect(*dom, {br[0], br[1]}, left_nonneg, o.tol, cfg, rows);
            } catch (const BracketError& e) {
                res[key] = nullptr;
                res[std::string(key) + "_diagnostic"] = e.what();
                all_found = false;
            }
        };
        one(o.lower, false, "alpha_minus");
        one(o.upper, true, "alpha_plus");
        std::stable_sort(rows.begin(), rows.end(), [](const AlphaRow& a, const AlphaRow& b) { return a.alpha < b.alpha; });
        table.insert(table.end(), rows.begin(), rows.end());
        results.push_back(res);
    }
    detail::write_text(o.out_path, alpha_table_csv(table));

    nlohmann::ordered_json j;
    j["command"] = "sweep-alpha";
    j["shape"] = o.shape;
    j["puncture"] = o.puncture;
    j["lower"] = o.lower;
    j["upper"] = o.upper;
    j["tol"] = o.tol;
    j["results"] = results;
    j["complete"] = all_found;
    out << j.dump(2) << '\n';
    return all_found ? kSuccess : kFinding;
}

// ---------------------------------------------------------------------------------------------

struct InequalityOptions {
    std::string case_name = "thm1";
    int n = 3;
    double s = 2.0;
    double q = 2.0;
    double alpha = 0.0;
    int m = 2;
    std::string op = "laplace";
    double scale = 1.0;
    int trials = 10;
    std::string shapes = "ball";
    int grid = 33;
    std::uint64_t seed = 1;
    std::optional<double> allowance;
    int order = 3;
    std::string out_path;
};

inline int cmd_check_inequality(const InequalityOptions& o, std::ostream& out)
{
    InequalityCase c;
    if (o.case_name == "thm1") {
        c = InequalityCase::thm1(o.n, o.s);
        if (o.n >= 3 && o.s >= static_cast<double>(o.n) / (o.n - 2))
            throw UsageError("thm1 needs s < n/(n-2); the critical exponent is covered by the counterexample command");
    } else if (o.case_name == "lame") {
        c = InequalityCase::lame(o.alpha, o.q);
    } else if (o.case_name == "higher") {
        c = InequalityCase::higher(o.m, o.n, o.q);
    } else {
        throw UsageError("--case must be thm1, lame or higher");
    }
    detail::as_usage([&] { c.validate(); });
    detail::validate_grid(o.grid, c.n);
    detail::require(o.trials >= 1, "--trials must be positive");
    detail::require(o.order >= std::max(2, c.k() + 1), "--order must be at least max(2, k + 1)");
    const auto shapes = detail::parse_shapes(o.shapes);
    const double allowance = o.allowance.value_or(c.n >= 5 ? 0.10 : 0.05);
    detail::require(allowance >= 0.0, "--allowance must be non-negative");

    OperatorSpec op;
    std::optional<ScalarDivForm> scalar;
    if (c.kind == CaseKind::Thm1) {
        scalar = detail::scalar_operator(o.op, c.n, o.scale);
        op = *scalar;
    } else if (c.kind == CaseKind::Lame) {
        op = Lame3D{c.alpha};
    } else {
        op = Polyharmonic{c.m, c.n};
    }

    nlohmann::ordered_json j;
    j["command"] = "check-inequality";
    j["case"] = to_string(c.kind);
    j["operator"] = describe(op);
    if (scalar && !scalar->identity) {
        // The Green constant of a variable operator is measured at the center of the ball.
        const DomainPtr ball = build_domain(DomainShape::ball(1.0), o.grid, c.n);
        const GreenBounds gb = green_sandwich_check(*scalar, center_node(*ball), ball);
        c.c2 = gb.c2;
        j["c2_source"] = "green_sandwich";
    }
    TrialConfig tc;
    tc.shapes = shapes;
    tc.nodes = o.grid;
    tc.trials = o.trials;
    tc.seed = o.seed;
    tc.function.order = o.order;
    const std::vector<RatioReport> reps = ratio_trials(c, op, tc);
    detail::write_text(o.out_path, ratio_csv(reps));

    const double mx = max_ratio(reps);
    nlohmann::ordered_json exps = {{"p", c.p()}, {"q", c.q}, {"k", c.k()}};
    if (c.kind == CaseKind::Thm1) exps["s"] = c.s;
    if (c.kind == CaseKind::Lame) exps["alpha"] = c.alpha;
    j["exponents"] = exps;
    if (c.c2) j["c2"] = *c.c2;
    j["constant"] = reps.front().constant;
    j["grid"] = o.grid;
    j["shapes"] = o.shapes;
    j["seed"] = o.seed;
    j["trials"] = o.trials;
    nlohmann::ordered_json per_shape = nlohmann::ordered_json::object();
    for (const auto& r : reps) {
        const double prev = per_shape.contains(r.shape) ? per_shape[r.shape].get<double>() : 0.0;
        per_shape[r.shape] = std::max(prev, r.normalized_ratio);
    }
    j["max_ratio_by_shape"] = per_shape;
    j["max_ratio"] = mx;
    j["allowance"] = allowance;
    j["passed"] = mx <= 1.0 + allowance;
    out << j.dump(2) << '\n';
    return mx <= 1.0 + allowance ? kSuccess : kFinding;
}

// ---------------------------------------------------------------------------------------------

struct CounterexampleOptions {
    int levels = 4;
    int base_grid = 17;
    double kappa = 1.0;
    std::string out_path;
};

inline int cmd_counterexample(const CounterexampleOptions& o, std::ostream& out)
{
    detail::require(o.levels >= 3, "--levels must be at least 3");
    detail::require(o.levels <= 5, "--levels must be at most 5");
    CutoffSpec cut;
    cut.base_nodes = o.base_grid;
    cut.kappa = o.kappa;
    detail::as_usage([&] { cut.validate(); });
    detail::require((static_cast<double>(o.base_grid - 1) * (1 << (o.levels - 1)) + 1) <= 300,
                    "finest level exceeds 300 nodes per axis");
    const ExperimentReport rep = counterexample_suite(o.levels, cut);
    detail::write_text(o.out_path, to_csv(rep));
    nlohmann::ordered_json j = to_json(rep);
    j["table"] = nlohmann::ordered_json::array();
    for (const auto& row : rep.rows) {
        nlohmann::ordered_json r;
        for (std::size_t c = 0; c < rep.columns.size(); ++c) r[rep.columns[c]] = row[c];
        j["table"].push_back(r);
    }
    out << j.dump(2) << '\n';
    return rep.passed() ? kSuccess : kFinding;
}

// ---------------------------------------------------------------------------------------------

struct HardyOptions {
    double q = 2.0;
    int n = 3;
    int k = 1;
    int trials = 50;
    std::optional<int> grid;
    std::optional<double> min_radius_cells;
    std::string shape = "ball";
    std::uint64_t seed = 1;
    double allowance = 0.05;
    std::string out_path;
};

inline int cmd_hardy(const HardyOptions& o, std::ostream& out)
{
    detail::require(o.n >= 3 && o.n <= kMaxDim, "--n must lie in [3, 7]");
    detail::require(o.q >= 1.0, "--q must be at least 1");
    detail::require(o.k >= 1, "--k must be at least 1");
    detail::require(o.k * o.q < o.n, "Hardy inequality needs k q < n");
    detail::require(o.trials >= 1, "--trials must be positive");
    detail::require(o.allowance >= 0.0, "--allowance must be non-negative");
    // Coarser default grids in high dimension keep the node count near a few million.
    static constexpr int kDefaultGrid[] = {0, 0, 0, 33, 25, 21, 13, 9};
    const int grid = o.grid.value_or(kDefaultGrid[o.n]);
    detail::validate_grid(grid, o.n);
    // The 2h-wide gradient stencil underestimates |Du| on thin bumps, which inflates the ratio.
    static constexpr double kDefaultCells[] = {0, 0, 0, 2, 4, 4, 4, 2};
    const double min_cells = o.min_radius_cells.value_or(kDefaultCells[o.n]);
    detail::require(min_cells > 0.0, "--min-radius-cells must be positive");
    const auto shapes = detail::parse_shapes(o.shape);
    detail::require(shapes.size() == 1, "hardy takes a single --shape");

    const DomainPtr dom = build_domain(DomainShape::standard(shapes.front()), grid, o.n);
    const std::size_t center = center_node(*dom);
    detail::require(dom->interior(center), "the grid center is not an interior node of this shape");
    std::vector<double> ratios(o.trials);
    std::vector<std::uint64_t> seeds(o.trials);
    parallel_for(ratios.size(), [&](std::size_t t) {
        TestFnSpec spec;
        spec.seed = trial_seed(o.seed, static_cast<int>(t));
        spec.order = std::max(3, o.k + 1);
        spec.min_radius_cells = min_cells;
        const GridFunction u = generate_test_function(dom, spec);
        seeds[t] = spec.seed;
        ratios[t] = o.k == 1 ? hardy_ratio(u, center, o.q, o.n) : hardy_chain_ratio(u, center, o.q, o.k, o.n);
    });
    std::string csv = "seed,ratio\n";
    double mx = 0.0;
    for (std::size_t t = 0; t < ratios.size(); ++t) {
        csv += std::to_string(seeds[t]) + "," + epl::detail::fmt17(ratios[t]) + "\n";
        mx = std::max(mx, ratios[t]);
    }
    detail::write_text(o.out_path, csv);

    nlohmann::ordered_json j;
    j["command"] = "hardy";
    j["kind"] = o.k == 1 ? "single" : "chain";
    j["n"] = o.n;
    j["q"] = o.q;
    j["k"] = o.k;
    j["grid"] = grid;
    j["min_radius_cells"] = min_cells;
    j["shape"] = o.shape;
    j["seed"] = o.seed;
    j["trials"] = o.trials;
    j["max_ratio"] = mx;
    j["allowance"] = o.allowance;
    j["passed"] = mx <= 1.0 + o.allowance;
    out << j.dump(2) << '\n';
    return mx <= 1.0 + o.allowance ? kSuccess : kFinding;
}

// ---------------------------------------------------------------------------------------------

struct GreenOptions {
    std::string op = "laplace";
    double scale = 1.0;
    int grid = 33;
    int n = 3;
    std::optional<double> bound;
};

inline int cmd_green_bounds(const GreenOptions& o, std::ostream& out)
{
    detail::validate_grid(o.grid, o.n);
    const ScalarDivForm op = detail::scalar_operator(o.op, o.n, o.scale);
    // Whole-space comparison: G <= c_n / lambda |x - y|^{2-n} up to a 10% discretization allowance.
    const double bound = o.bound.value_or(1.1 * laplace_amplitude(o.n) / op.lambda);
    detail::require(bound > 0.0, "--bound must be positive");
    const DomainPtr dom = build_domain(DomainShape::ball(1.0), o.grid, o.n);
    const GreenBounds gb = green_sandwich_check(op, center_node(*dom), dom);
    const bool ok = gb.c1 > 0.0 && gb.c2 <= bound;
    nlohmann::ordered_json j;
    j["command"] = "green-bounds";
    j["operator"] = describe(OperatorSpec{op});
    j["grid"] = o.grid;
    j["n"] = o.n;
    j["c1_emp"] = gb.c1;
    j["c2_emp"] = gb.c2;
    j["bound"] = bound;
    j["window_nodes"] = gb.window_nodes;
    j["window"] = {gb.inner_radius, gb.outer_radius};
    j["passed"] = ok;
    out << j.dump(2) << '\n';
    return ok ? kSuccess : kFinding;
}

// ---------------------------------------------------------------------------------------------

/// Parses argv and runs the selected subcommand. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical laboratory for weighted positivity and pointwise multiplicative inequalities", "epl"};
    app.require_subcommand(1);
    std::vector<Command> commands;
    auto add = [&](const std::string& name, const std::string& help) -> Command& {
        Command& c = commands.emplace_back();
        c.app = app.add_subcommand(name, help);
        c.app->add_option("--config", c.config_path, "flat key = value file; flags override it");
        return c;
    };
    commands.reserve(6);

    PositivityOptions pos;
    {
        Command& c = add("verify-positivity", "minimum eigenvalue of the weighted form");
        auto* a = c.app;
        a->add_option("--op", pos.op, "lame, laplace or polyharmonic");
        a->add_option("--alpha", pos.alpha, "Lame parameter");
        a->add_option("--n", pos.n, "dimension (laplace, polyharmonic)");
        a->add_option("--m", pos.m, "polyharmonic order");
        a->add_option("--grid", pos.grid, "nodes per axis");
        a->add_option("--shape", pos.shape, "ball, cube, lshape or slit");
        a->add_option("--puncture", pos.puncture, "puncture radius in cells");
        a->add_option("--expect", pos.expect, "none, nonneg or neg");
        a->add_option("--tolerance", pos.sign_tolerance, "sign tolerance");
        a->add_option("--iters", pos.iters, "Lanczos step budget");
        a->add_option("--seed", pos.seed, "start-vector seed");
        c.run = [&](std::ostream& o) { return cmd_verify_positivity(pos, o); };
    }
    SweepOptions sweep;
    {
        Command& c = add("sweep-alpha", "bisection for the ends of the Lame positivity window");
        auto* a = c.app;
        sweep.grids.clear();
        a->add_option("--grid", sweep.grids, "nodes per axis (repeatable)");
        a->add_option("--shape", sweep.shape, "domain shape");
        a->add_option("--puncture", sweep.puncture, "puncture radius in cells");
        a->add_option("--lower", sweep.lower, "lower bracket lo,hi")->delimiter(',')->expected(2);
        a->add_option("--upper", sweep.upper, "upper bracket lo,hi")->delimiter(',')->expected(2);
        a->add_option("--tol", sweep.tol, "bracket width at which bisection stops");
        a->add_option("--tolerance", sweep.sign_tolerance, "sign tolerance");
        a->add_option("--out", sweep.out_path, "CSV table path");
        c.run = [&](std::ostream& o) {
            if (sweep.grids.empty()) sweep.grids = {17};
            return cmd_sweep_alpha(sweep, o);
        };
    }
    InequalityOptions ineq;
    {
        Command& c = add("check-inequality", "seeded ratio trials for a multiplicative inequality");
        auto* a = c.app;
        a->add_option("--case", ineq.case_name, "thm1, lame or higher");
        a->add_option("--n", ineq.n, "dimension");
        a->add_option("--s", ineq.s, "thm1 exponent s");
        a->add_option("--q", ineq.q, "derivative exponent q (lame, higher)");
        a->add_option("--alpha", ineq.alpha, "Lame parameter");
        a->add_option("--m", ineq.m, "polyharmonic order");
        a->add_option("--op", ineq.op, "thm1 operator: laplace, sin or scaled");
        a->add_option("--scale", ineq.scale, "coefficient for --op scaled");
        a->add_option("--trials", ineq.trials, "trials per shape");
        a->add_option("--shapes", ineq.shapes, "comma-separated shapes");
        a->add_option("--grid", ineq.grid, "nodes per axis");
        a->add_option("--seed", ineq.seed, "base seed");
        a->add_option("--allowance", ineq.allowance, "ratio allowance above 1");
        a->add_option("--order", ineq.order, "bump smoothness order");
        a->add_option("--out", ineq.out_path, "per-trial CSV path");
        c.run = [&](std::ostream& o) { return cmd_check_inequality(ineq, o); };
    }
    CounterexampleOptions cex;
    {
        Command& c = add("counterexample", "critical-exponent refinement study");
        auto* a = c.app;
        a->add_option("--levels", cex.levels, "dyadic levels");
        a->add_option("--base-grid", cex.base_grid, "nodes per axis on the coarsest level");
        a->add_option("--kappa", cex.kappa, "pole regularization in cells");
        a->add_option("--out", cex.out_path, "per-level CSV path");
        c.run = [&](std::ostream& o) { return cmd_counterexample(cex, o); };
    }
    HardyOptions hardy;
    {
        Command& c = add("hardy", "single and chained Hardy ratios");
        auto* a = c.app;
        a->add_option("--q", hardy.q, "exponent");
        a->add_option("--n", hardy.n, "dimension");
        a->add_option("--k", hardy.k, "chain length");
        a->add_option("--trials", hardy.trials, "trials");
        a->add_option("--grid", hardy.grid, "nodes per axis");
        a->add_option("--min-radius-cells", hardy.min_radius_cells, "smallest bump radius in grid cells");
        a->add_option("--shape", hardy.shape, "domain shape");
        a->add_option("--seed", hardy.seed, "base seed");
        a->add_option("--allowance", hardy.allowance, "ratio allowance above 1");
        a->add_option("--out", hardy.out_path, "per-trial CSV path");
        c.run = [&](std::ostream& o) { return cmd_hardy(hardy, o); };
    }
    GreenOptions green;
    {
        Command& c = add("green-bounds", "empirical two-sided Green function constants");
        auto* a = c.app;
        a->add_option("--op", green.op, "laplace, sin or scaled");
        a->add_option("--scale", green.scale, "coefficient for --op scaled");
        a->add_option("--grid", green.grid, "nodes per axis");
        a->add_option("--n", green.n, "dimension");
        a->add_option("--bound", green.bound, "upper bound for c2");
        c.run = [&](std::ostream& o) { return cmd_green_bounds(green, o); };
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    for (Command& c : commands) {
        if (!c.app->parsed()) continue;
        try {
            if (!c.config_path.empty()) {
                for (const auto& [key, value] : read_config_file(c.config_path)) {
                    CLI::Option* opt = key == "config" ? nullptr : c.app->get_option_no_throw("--" + key);
                    if (!opt) throw UsageError("unknown config key '" + key + "' for " + c.app->get_name());
                    if (opt->count() > 0) continue;
                    opt->add_result(value);
                    opt->run_callback();
                }
            }
        } catch (const UsageError& e) {
            err << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << '\n';
            return kUsage;
        }
        try {
            return c.run(out);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const InvalidArgument& e) {
            // Parameter combinations only detectable on the grid, e.g. supports that do not fit.
            err << "error: " << e.what() << '\n';
            return kUsage;
        } catch (const std::exception& e) {
            err << "internal error: " << e.what() << '\n';
            return kInternal;
        }
    }
    return kUsage;
}

}  // namespace epl::cli
