// Command-line front end: weight tables, operator application, inequality
// verification sweeps, distance experiments, and quadrature error reports,
// emitting CSV or JSON.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 numerical budget exhaustion.

#include <qbern/qbern.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

using nlohmann::json;
using namespace qbern;

namespace {

constexpr int kSchemaVersion = 1;

struct BudgetExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    f << content;
}

json make_report(const std::string& command, json config, json result) {
    return json{{"schema_version", kSchemaVersion},
                {"command", command},
                {"config", std::move(config)},
                {"result", std::move(result)}};
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> g;
    g.reserve(n);
    for (int i = 0; i < n; ++i)
        g.push_back(a + (b - a) * i / (n - 1));
    return g;
}

// ---------------------------------------------------------------- weights

int cmd_weights(double qv, double x, double eps, std::size_t max_terms,
                long max_k, const std::string& out, const std::string& format) {
    const TruncationPolicy pol{eps, max_terms};
    const WeightSeries ws = weight_series(QParam(qv), x, pol);
    if (ws.cap_hit)
        throw BudgetExhausted("weights: truncation budget exhausted before eps_tail was met");
    const std::size_t rows = max_k < 0 ? ws.weights.size()
                                       : std::min<std::size_t>(ws.weights.size(),
                                                               static_cast<std::size_t>(max_k) + 1);
    if (format == "csv") {
        std::string csv = "k,p_k,cumulative_sum\n";
        NeumaierSum cum;
        for (std::size_t k = 0; k < rows; ++k) {
            cum.add(ws.weights[k]);
            csv += std::to_string(k) + "," + fmt17(ws.weights[k]) + "," +
                   fmt17(cum.value()) + "\n";
        }
        write_output(out, csv);
    } else {
        json result{{"weights", std::vector<double>(ws.weights.begin(), ws.weights.begin() + rows)},
                    {"computed_terms", ws.weights.size()},
                    {"tail_mass", ws.tail_mass},
                    {"tail_err", ws.tail_err},
                    {"partial_sum", ws.partial_sum()},
                    {"total", ws.total()}};
        json config{{"q", qv}, {"x", x}, {"eps", eps}, {"max_terms", max_terms}, {"max_k", max_k}};
        write_output(out, make_report("weights", config, result).dump(2) + "\n");
    }
    return 0;
}

// --------------------------------------------------------------- bq-apply

int cmd_bq_apply(double qv, double x, const std::string& fn_path, double eps,
                 std::size_t max_terms, const std::string& out, const std::string& format) {
    std::ifstream in(fn_path);
    if (!in)
        throw std::runtime_error("cannot open function file: " + fn_path);
    const PiecewiseLinearFn f = read_piecewise_linear(in);
    const TruncationPolicy pol{eps, max_terms};
    const BqResult res = apply_Bq_report(f, QParam(qv), x, pol);
    if (res.cap_hit)
        throw BudgetExhausted("bq-apply: truncation budget exhausted");
    if (format == "csv") {
        write_output(out, "q,x,value,tail_bound\n" + fmt17(qv) + "," + fmt17(x) + "," +
                              fmt17(res.value) + "," + fmt17(res.tail_bound) + "\n");
    } else {
        json result{{"value", res.value},
                    {"tail_bound", res.tail_bound},
                    {"fn_sup_norm", f.sup_norm()},
                    {"fn_breakpoints", f.breakpoints().size()}};
        json config{{"q", qv}, {"x", x}, {"fn", fn_path}, {"eps", eps}, {"max_terms", max_terms}};
        write_output(out, make_report("bq-apply", config, result).dump(2) + "\n");
    }
    return 0;
}

// ----------------------------------------------------------------- verify

struct SuiteReport {
    long cases = 0;
    json failures = json::array();
    double worst_margin = std::numeric_limits<double>::infinity();

    void record(double margin, json detail) {
        ++cases;
        worst_margin = std::min(worst_margin, margin);
        if (margin < 0.0) {
            detail["margin"] = margin;
            failures.push_back(std::move(detail));
        }
    }
};

SuiteReport run_suite_fedja(const TruncationPolicy& pol) {
    SuiteReport rep;
    const double tol = 1e-12;
    const std::vector<int> ms{2, 3, 4, 5, 8};
    const std::vector<double> xs = linspace(0.0, 1.0, 200);
    for (int qi = 1; qi <= 19; ++qi) {
        const QParam q(qi * 0.05);
        for (int m : ms)
            for (int k = 0; k <= 30; ++k)
                for (double x : xs) {
                    const double margin = fedja_margin(q, m, k, x, pol) + tol;
                    rep.record(margin, json{{"q", q.value()}, {"m", m}, {"k", k}, {"x", x}});
                }
    }
    return rep;
}

SuiteReport run_suite_moments(const TruncationPolicy&) {
    SuiteReport rep;
    for (int m = 2; m <= 16; ++m)
        for (int j = 0; j <= 2; ++j) {
            const double closed = kernel_moment(m, 1.0, j);
            const double quad = kernel_moment_integral(m, 1.0, j).value;
            rep.record(1e-10 - std::abs(closed - quad),
                       json{{"check", "closed_vs_integral"}, {"m", m}, {"j", j},
                            {"closed", closed}, {"integral", quad}});
        }
    for (int m = 2; m <= 64; ++m) {
        const WeightedKernelCheck c =
            weighted_kernel_inequality(m, 1.0, KernelWeight::inverse_square);
        rep.record(c.margin, json{{"check", "moment_inequality"}, {"m", m},
                                  {"lhs", c.lhs}, {"rhs", c.rhs}});
    }
    return rep;
}

SuiteReport run_suite_theta(const TruncationPolicy&) {
    SuiteReport rep;
    const double floor = theta(2.0);
    rep.record(floor - 0.007, json{{"check", "floor_positive"}, {"theta2", floor}});
    double prev = floor;
    for (int i = 1; i <= 2500; ++i) {
        const double mv = 2.0 + i * 0.4; // steps of 0.4 through m = 1002
        const double cur = theta(mv);
        rep.record(cur - prev, json{{"check", "increasing"}, {"m", mv}});
        rep.record(cur - floor, json{{"check", "above_theta2"}, {"m", mv}, {"theta", cur}});
        prev = cur;
    }
    return rep;
}

SuiteReport run_suite_rho(const TruncationPolicy&) {
    SuiteReport rep;
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i)
        grid.push_back(1e-3 * std::pow(1e4, i / 40.0)); // log-spaced (0,10]
    for (double s : grid)
        for (double t : grid) {
            const double lhs = rho(s + t);
            const double rhs = std::exp(-s) * rho(t);
            rep.record(rhs - lhs + 1e-12 * rhs,
                       json{{"s", s}, {"t", t}, {"lhs", lhs}, {"rhs", rhs}});
        }
    return rep;
}

SuiteReport run_suite_decay(const TruncationPolicy& pol) {
    SuiteReport rep;
    const std::vector<double> sa{0.25, 0.5, 1.0, 2.0};
    const std::vector<double> hs{0.25, 0.5, 2.0 * std::numbers::ln2};
    for (double s : sa)
        for (double a : sa)
            for (int m : {2, 3})
                for (double h : hs) {
                    const DecayCheck c = composite_error_decay(s, a, m, h, pol);
                    rep.record(c.rhs - c.lhs + 1e-10,
                               json{{"s", s}, {"a", a}, {"m", m}, {"h", h},
                                    {"lhs", c.lhs}, {"rhs", c.rhs}});
                }
    return rep;
}

SuiteReport run_suite_tail(const TruncationPolicy&) {
    SuiteReport rep;
    std::vector<double> grid;
    for (int i = 0; i <= 11; ++i)
        grid.push_back(0.01 * std::pow(2000.0, i / 11.0)); // log-spaced 0.01..20
    for (double S : grid)
        for (double T : grid) {
            const TailAreaCheck c = tail_area_inequality(S, T);
            rep.record(c.lhs - c.rhs + 1e-12,
                       json{{"S", S}, {"T", T}, {"lhs", c.lhs}, {"rhs", c.rhs}});
        }
    return rep;
}

SuiteReport run_suite_envelope(const TruncationPolicy& pol) {
    SuiteReport rep;
    const std::vector<double> xs{0.0, 0.25, 0.5, 0.9, 1.0 - 1e-3, 1.0 - 1e-6};
    for (double qv : {0.3, 0.5, 0.8}) {
        const QParam q(qv);
        for (int m : {2, 3, 5}) {
            for (double x : xs) {
                const StridedSum s = strided_sum(q, m, x, pol);
                const double slack = 1e-12 + s.tail_err;
                rep.record(std::min(s.value - s.lower_env, s.upper_env - s.value) + slack,
                           json{{"check", "sandwich"}, {"q", qv}, {"m", m}, {"x", x},
                                {"value", s.value}, {"lower", s.lower_env}, {"upper", s.upper_env}});
            }
            const StridedSum near1 = strided_sum(q, m, 1.0 - 1e-6, pol);
            const double target = 1.0 / m;
            rep.record(1e-3 - std::abs(near1.lower_env - target),
                       json{{"check", "lower_env_near_limit"}, {"q", qv}, {"m", m},
                            {"lower_env", near1.lower_env}, {"target", target}});
            rep.record(1e-3 - std::abs(near1.upper_env - target),
                       json{{"check", "upper_env_near_limit"}, {"q", qv}, {"m", m},
                            {"upper_env", near1.upper_env}, {"target", target}});
        }
    }
    return rep;
}

int cmd_verify(const std::string& suite, double eps, std::size_t max_terms,
               const std::string& out, const std::string&) {
    const TruncationPolicy pol{eps, max_terms};
    SuiteReport rep;
    if (suite == "fedja")
        rep = run_suite_fedja(pol);
    else if (suite == "moments")
        rep = run_suite_moments(pol);
    else if (suite == "theta")
        rep = run_suite_theta(pol);
    else if (suite == "rho")
        rep = run_suite_rho(pol);
    else if (suite == "decay")
        rep = run_suite_decay(pol);
    else if (suite == "tail")
        rep = run_suite_tail(pol);
    else if (suite == "envelope")
        rep = run_suite_envelope(pol);
    else
        throw std::invalid_argument("unknown verify suite: " + suite);

    json result{{"cases", rep.cases},
                {"failures", rep.failures},
                {"failure_count", rep.failures.size()},
                {"worst_margin", rep.worst_margin},
                {"pass", rep.failures.empty()}};
    json config{{"suite", suite}, {"eps", eps}, {"max_terms", max_terms}};
    write_output(out, make_report("verify", config, result).dump(2) + "\n");
    return rep.failures.empty() ? 0 : 1;
}

// --------------------------------------------------------------- distance

int cmd_distance(double qv, double rv, int N, int grid_depth, int per_octave,
                 double eps, std::size_t max_terms, const std::string& out,
                 const std::string&) {
    const TruncationPolicy pol{eps, max_terms};
    const QParam q(qv), r(rv);
    const double delta_min = std::pow(10.0, -grid_depth);
    const std::vector<double> grid = geometric_grid(0.5, delta_min, per_octave);
    const DistanceEstimate est = distance_lower_bound(q, r, N, grid, pol);
    if (est.cap_hit)
        throw BudgetExhausted("distance: truncation budget exhausted");

    std::string regime = "incommensurable";
    if (qv == rv)
        regime = "identical";
    else if (est.relation)
        regime = "commensurable";

    json result{{"regime", regime},
                {"lower_bound", est.lower_bound},
                {"witness_x", est.witness_x},
                {"depth", est.depth},
                {"grid_points", grid.size()}};
    if (est.relation)
        result["relation"] = json{{"j", est.relation->j},
                                  {"m", est.relation->m},
                                  {"residual", est.relation->residual}};
    else
        result["relation"] = nullptr;
    if (est.closed_form)
        result["closed_form"] = *est.closed_form;
    else
        result["closed_form"] = nullptr;
    if (est.relation && est.relation->j == 1 && est.relation->m >= 2) {
        result["envelope_at_finest"] =
            distance_upper_envelope(q, est.relation->m, {grid.back()}, pol);
    } else if (est.relation && est.relation->m == 1 && est.relation->j >= 2) {
        result["envelope_at_finest"] =
            distance_upper_envelope(r, est.relation->j, {grid.back()}, pol);
    } else {
        result["envelope_at_finest"] = nullptr;
    }

    json config{{"q", qv},   {"r", rv},   {"N", N},
                {"grid_depth", grid_depth}, {"per_octave", per_octave},
                {"eps", eps}, {"max_terms", max_terms}};
    write_output(out, make_report("distance", config, result).dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------- quad-error

int cmd_quad_error(const std::string& fname, double a, const std::string& b_str,
                   int n, double h, int m, const std::string& method, double eps,
                   std::size_t max_terms, const std::string& out, const std::string&) {
    const TruncationPolicy pol{eps, max_terms};
    std::function<double(double)> f, fpp;
    if (fname == "t2") {
        f = [](double t) { return t * t; };
        fpp = [](double) { return 2.0; };
    } else if (fname == "t3") {
        f = [](double t) { return t * t * t; };
        fpp = [](double t) { return 6.0 * t; };
    } else if (fname == "expneg") {
        f = [](double t) { return std::exp(-t); };
        fpp = [](double t) { return std::exp(-t); };
    } else if (fname == "neglog1mexp") {
        f = [](double t) { return neglog1mexp(t); };
        fpp = [](double t) { return rho(t); };
    } else {
        throw std::invalid_argument("unknown function: " + fname +
                                    " (expected t2|t3|expneg|neglog1mexp)");
    }

    const bool seminf = b_str == "inf";
    auto run = [&](ErrorMethod em) {
        return seminf ? composite_error_seminf(f, fpp, a, h, m, em, pol)
                      : composite_error(f, fpp, a, std::stod(b_str), n, m, em);
    };
    json result;
    auto to_json = [](const ErrorReport& r) {
        return json{{"integral", r.value_integral},
                    {"quadrature", r.value_quadrature},
                    {"error", r.error},
                    {"converged", r.converged}};
    };
    if (method == "direct" || method == "both") {
        const ErrorReport r = run(ErrorMethod::direct);
        if (r.cap_hit)
            throw BudgetExhausted("quad-error: semi-infinite truncation budget exhausted");
        result["direct"] = to_json(r);
    }
    if (method == "peano" || method == "both") {
        const ErrorReport r = run(ErrorMethod::peano);
        if (r.cap_hit)
            throw BudgetExhausted("quad-error: semi-infinite truncation budget exhausted");
        result["peano"] = to_json(r);
    }
    if (method == "both")
        result["method_agreement"] = std::abs(result["direct"]["error"].get<double>() -
                                              result["peano"]["error"].get<double>());

    json config{{"f", fname}, {"a", a}, {"b", b_str}, {"n", n},
                {"h", h},     {"m", m}, {"method", method}, {"eps", eps}};
    write_output(out, make_report("quad-error", config, result).dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- moments

int cmd_moments(int m, double h, int j_max, const std::string& out,
                const std::string& format) {
    if (format == "csv") {
        std::string csv = "j,closed_form,integral,abs_diff\n";
        for (int j = 0; j <= j_max; ++j) {
            const double closed = kernel_moment(m, h, j);
            const double quad = kernel_moment_integral(m, h, j).value;
            csv += std::to_string(j) + "," + fmt17(closed) + "," + fmt17(quad) + "," +
                   fmt17(std::abs(closed - quad)) + "\n";
        }
        write_output(out, csv);
    } else {
        json rows = json::array();
        for (int j = 0; j <= j_max; ++j) {
            const double closed = kernel_moment(m, h, j);
            const double quad = kernel_moment_integral(m, h, j).value;
            rows.push_back(json{{"j", j}, {"closed_form", closed}, {"integral", quad},
                                {"abs_diff", std::abs(closed - quad)}});
        }
        const WeightedKernelCheck c = weighted_kernel_inequality(m, h, KernelWeight::inverse_square);
        json result{{"moments", rows},
                    {"inequality", json{{"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin}}}};
        json config{{"m", m}, {"h", h}, {"j_max", j_max}};
        write_output(out, make_report("moments", config, result).dump(2) + "\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for the limit q-Bernstein operator"};
    app.require_subcommand(1);
    // --help only (no -h): frees the single-letter name for the --h step-width
    // option; subcommands inherit this flag.
    app.set_help_flag("--help", "print help and exit");

    double q = 0.5, r = 0.25, x = 0.5, eps = 1e-14, h = 0.25, a = 0.1;
    std::size_t max_terms = 1000000;
    long max_k = -1;
    int N = 60, grid_depth = 8, per_octave = 8, m = 2, n = 4, j_max = 2;
    std::string out, format, fn_path, suite, fname = "t2", b_str = "1";
    std::string method = "both";

    // format default: csv for the tabular commands, json for the rest
    auto fmt_or = [&](const char* def) { return format.empty() ? def : format; };

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--eps", eps, "absolute tail budget")->check(CLI::PositiveNumber);
        sub->add_option("--max-terms", max_terms, "hard cap on series terms");
        sub->add_option("--out", out, "output file (default stdout)");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    int rc = 0;

    CLI::App* w = app.add_subcommand("weights", "table of weights p_k(q;x) with cumulative sums");
    w->add_option("--q", q, "parameter in (0,1)")->required();
    w->add_option("--x", x, "evaluation point in [0,1]")->required();
    w->add_option("--max-k", max_k, "largest k to print (-1 = all computed)");
    add_common(w);
    w->callback([&] { rc = cmd_weights(q, x, eps, max_terms, max_k, out, fmt_or("csv")); });

    CLI::App* ba = app.add_subcommand("bq-apply", "apply the operator to a piecewise-linear function");
    ba->add_option("--q", q, "parameter in (0,1)")->required();
    ba->add_option("--x", x, "evaluation point in [0,1]")->required();
    ba->add_option("--fn", fn_path, "piecewise-linear function file (x,y lines)")->required();
    add_common(ba);
    ba->callback([&] { rc = cmd_bq_apply(q, x, fn_path, eps, max_terms, out, fmt_or("json")); });

    CLI::App* vf = app.add_subcommand("verify", "run an inequality verification sweep");
    vf->add_option("suite", suite, "fedja|moments|theta|rho|decay|tail|envelope")
        ->required()
        ->check(CLI::IsMember({"fedja", "moments", "theta", "rho", "decay", "tail", "envelope"}));
    add_common(vf);
    vf->callback([&] { rc = cmd_verify(suite, eps, max_terms, out, fmt_or("json")); });

    CLI::App* di = app.add_subcommand("distance", "lower bound for the operator distance");
    di->add_option("--q", q, "first parameter")->required();
    di->add_option("--r", r, "second parameter")->required();
    di->add_option("--N", N, "extremal node depth");
    di->add_option("--grid-depth", grid_depth, "finest grid point 1 - 10^{-depth}");
    di->add_option("--per-octave", per_octave, "grid points per factor-2 refinement");
    add_common(di);
    di->callback([&] {
        rc = cmd_distance(q, r, N, grid_depth, per_octave, eps, max_terms, out, fmt_or("json"));
    });

    CLI::App* qe = app.add_subcommand("quad-error", "composite quadrature error, direct and Peano");
    qe->add_option("--f", fname, "t2|t3|expneg|neglog1mexp");
    qe->add_option("--a", a, "left endpoint");
    qe->add_option("--b", b_str, "right endpoint or 'inf'");
    qe->add_option("--n", n, "panel count (finite b)");
    qe->add_option("--h", h, "panel width (b = inf)");
    qe->add_option("--m", m, "points per panel rule");
    qe->add_option("--method", method, "direct|peano|both")
        ->check(CLI::IsMember({"direct", "peano", "both"}));
    add_common(qe);
    qe->callback([&] {
        rc = cmd_quad_error(fname, a, b_str, n, h, m, method, eps, max_terms, out, fmt_or("json"));
    });

    CLI::App* mo = app.add_subcommand("moments", "kernel moments I_j: closed form vs integral");
    mo->add_option("--m", m, "points per panel rule")->required();
    mo->add_option("--h", h, "kernel period");
    mo->add_option("--j-max", j_max, "largest moment index");
    add_common(mo);
    mo->callback([&] { rc = cmd_moments(m, h, j_max, out, fmt_or("csv")); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const BudgetExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NodeCollisionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
