// Command-line front end. run() is kept in a header so tests can drive it
// in-process with captured streams.
//
// Exit codes: 0 success, 1 physics or convergence failure, 2 usage or
// configuration error. Every run with an output directory leaves a
// manifest.json there, written before any result and rewritten at the end.

#pragma once

#include "softmps/criticality.hpp"
#include "softmps/io.hpp"
#include "softmps/model_params.hpp"
#include "softmps/observables.hpp"
#include "softmps/optimizer.hpp"
#include "softmps/oracle_suite.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef SOFTMPS_VERSION
#define SOFTMPS_VERSION "unknown"
#endif

namespace softmps::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kOutEnv = "SOFTMPS_OUT";
inline constexpr const char* kSweepHeader =
    "alpha,M,sx,spin_entropy,energy,sz,occupation_1,e_loc,e_int,e_chain,converged,iterations,error";
inline constexpr const char* kSweepSitesHeader = "alpha,site,occupation,entropy,cutoff";
inline constexpr const char* kChainHeader = "site,omega,t";

// Configuration problems detected after parsing; mapped to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    double s{0.5};
    double alpha{0.0};
    double delta{0.1};
    double omega_c{1.0};
    std::string scheme{"linear"};
    double lambda{1.5};
    int n{10};
    int chi{2};
    std::string field{"real"};

    int restarts{4};
    int max_iter{50000};
    double gtol{1e-8};
    double xtol{1e-10};
    double init_scale{0.1};
    double warm_jitter{1e-2};
    std::optional<std::uint64_t> seed;
    int jobs{1};
    std::string warm;

    bool observables{false};
    int entropy_sites{-1};
    double tail_tol{1e-10};
    std::string save;

    std::vector<double> grid;
    bool no_warm_chain{false};
    std::vector<double> bracket;
    double threshold{0.01};
    double tol{2e-4};

    std::string input;
    double alpha_c{0.0};
    std::vector<double> window{0.01, 0.3};

    int instances{200};
    int cutoff{30};

    std::string out;
};

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Reads a headed CSV; lines starting with '#' are skipped.
inline std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file " + path.string());
    std::vector<std::string> header;
    std::vector<std::map<std::string, std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (header.empty()) {
            header = cells;
            continue;
        }
        if (cells.size() != header.size())
            throw ConfigError(path.string() + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(header.size()));
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    if (header.empty()) throw ConfigError(path.string() + ": missing header");
    return rows;
}

inline double cell_number(const std::map<std::string, std::string>& row, const std::string& key) {
    const auto it = row.find(key);
    if (it == row.end()) throw ConfigError("input CSV lacks column '" + key + "'");
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("input CSV column '" + key + "' holds a non-number: '" + it->second + "'");
    }
}

inline json fit_to_json(const FitResult& f) {
    json params = json::object();
    for (const auto& p : f.parameters)
        params[p.name] = {{"value", p.value}, {"stderr", std::isfinite(p.stderr_) ? json(p.stderr_) : json(nullptr)}};
    return {{"parameters", params}, {"residual", f.residual}, {"n_points", f.n_points}};
}

inline json observables_to_json(const ObservableSet& o) {
    return {{"magnetization", o.magnetization},
            {"sz", o.sz},
            {"sx", o.coherence},
            {"occupations", o.occupations},
            {"spin_entropy", o.spin_entropy},
            {"site_entropies", o.site_entropies},
            {"site_cutoffs", o.site_cutoffs},
            {"entropy_log", "natural"},
            {"energy", io::energy_to_json(o.energy)}};
}

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(int argc, const char* const* argv) {
        CLI::App app{"Ground states of the sub-ohmic spin-boson model with a truncation-free MPS", "softmps"};
        app.set_version_flag("--version", SOFTMPS_VERSION);
        app.set_config("--config", "", "TOML-like key = value file; [subcommand] sections; flags override it");
        app.allow_config_extras(CLI::config_extras_mode::error);
        app.require_subcommand(1);
        app.fallthrough();
        app.option_defaults()->always_capture_default();

        auto* chain = app.add_subcommand("chain", "Print chain coefficients as CSV");
        add_model(chain, false);
        add_chain(chain);
        add_output(chain);

        auto* ground = app.add_subcommand("ground", "Variational ground state at one coupling");
        add_model(ground, true);
        add_chain(ground);
        add_solver(ground);
        ground->add_flag("--observables", opt_.observables, "Emit the full observable set");
        ground->add_option("--entropy-sites", opt_.entropy_sites, "Sites with reported entropy (-1 for all)");
        ground->add_option("--tail-tol", opt_.tail_tol, "Fock tail tolerance for site density matrices");
        ground->add_option("--save", opt_.save, "Ground-state JSON path (default <out>/ground.json)");
        add_output(ground);

        auto* sweep = app.add_subcommand("sweep", "Ground states over an alpha grid (CSV)");
        add_model(sweep, false);
        add_chain(sweep);
        add_solver(sweep);
        sweep->add_option("--grid", opt_.grid, "Strictly increasing alpha values")->delimiter(',')->required();
        sweep->add_flag("--no-warm-chain", opt_.no_warm_chain, "Solve every point from cold restarts only");
        sweep->add_option("--entropy-sites", opt_.entropy_sites, "Sites with reported entropy (-1 for all)");
        sweep->add_option("--tail-tol", opt_.tail_tol, "Fock tail tolerance for site density matrices");
        add_output(sweep);

        auto* critical = app.add_subcommand("critical", "Bisect the critical coupling (JSON)");
        add_model(critical, false);
        add_chain(critical);
        add_solver(critical);
        critical->add_option("--bracket", opt_.bracket, "lo,hi with M(lo) <= threshold < M(hi)")->delimiter(',');
        critical->add_option("--threshold", opt_.threshold, "Magnetization threshold");
        critical->add_option("--tol", opt_.tol, "Final bracket width");
        add_output(critical);

        auto* extrap = app.add_subcommand("extrapolate", "Fit alpha_c(N) = a exp(b/N) to a CSV with N,alpha_c");
        extrap->add_option("--input", opt_.input, "CSV file with columns N,alpha_c")->required();
        add_output(extrap);

        auto* expo = app.add_subcommand("exponent", "Fit the critical exponent from a sweep CSV");
        expo->add_option("--input", opt_.input, "Sweep CSV (columns alpha,M)")->required();
        expo->add_option("--alpha-c", opt_.alpha_c, "Critical coupling")->required();
        expo->add_option("--window", opt_.window, "lo,hi range of (alpha - alpha_c)/alpha_c")->delimiter(',');
        add_output(expo);

        auto* polaron = app.add_subcommand("polaron", "Closed-form polaron estimate of alpha_c");
        polaron->add_option("--s", opt_.s, "Bath exponent");
        polaron->add_option("--delta", opt_.delta, "Tunnelling amplitude");
        polaron->add_option("--omega-c", opt_.omega_c, "Cut-off frequency");
        add_output(polaron);

        auto* oracle = app.add_subcommand("oracle-check", "Transfer calculus versus dense Fock reference");
        oracle->add_option("--instances", opt_.instances, "Number of random states");
        oracle->add_option("--cutoff", opt_.cutoff, "Fock cutoff per mode");
        oracle->add_option("--seed", seed_raw_, "Seed (random if omitted)");
        oracle->add_option("--field", opt_.field, "real or complex");
        add_output(oracle);

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            out_ << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp& e) {
            out_ << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::CallForVersion& e) {
            out_ << SOFTMPS_VERSION << '\n';
            return 0;
        } catch (const CLI::ParseError& e) {
            err_ << "error: " << e.what() << '\n';
            return 2;
        }

        CLI::App* sub = app.get_subcommands().front();
        command_ = sub->get_name();
        for (const CLI::Option* o : sub->get_options()) {
            if (o->get_lnames().empty() || o->get_lnames().front() == "help") continue;
            const auto& res = o->results();
            std::string v = o->count() > 0 ? CLI::detail::join(res, ",") : o->get_default_str();
            if (o->get_items_expected_max() == 0) v = o->count() > 0 ? "true" : "false";
            config_[o->get_lnames().front()] = v;
        }
        for (int i = 0; i < argc; ++i) argv_.emplace_back(argv[i]);

        try {
            resolve_output();
            validate();
        } catch (const std::exception& e) {
            return finish(2, "config_error", e.what());
        }
        write_manifest("running");

        try {
            if (command_ == "chain") return run_chain();
            if (command_ == "ground") return dispatch_field([&](auto tag) { return run_ground<decltype(tag)>(); });
            if (command_ == "sweep") return dispatch_field([&](auto tag) { return run_sweep<decltype(tag)>(); });
            if (command_ == "critical") return dispatch_field([&](auto tag) { return run_critical<decltype(tag)>(); });
            if (command_ == "extrapolate") return run_extrapolate();
            if (command_ == "exponent") return run_exponent();
            if (command_ == "polaron") return run_polaron();
            if (command_ == "oracle-check") return dispatch_field([&](auto tag) { return run_oracle<decltype(tag)>(); });
        } catch (const ConfigError& e) {
            return finish(2, "config_error", e.what());
        } catch (const std::invalid_argument& e) {
            return finish(2, "invalid_argument", e.what());
        } catch (const Error& e) {
            return finish(1, e.code(), e.what());
        } catch (const std::exception& e) {
            return finish(1, "internal_error", e.what());
        }
        return finish(2, "config_error", "unknown subcommand " + command_);
    }

private:
    std::ostream& out_;
    std::ostream& err_;
    Options opt_;
    std::string seed_raw_;
    std::string command_;
    json config_ = json::object();
    std::vector<std::string> argv_;
    fs::path out_dir_;
    std::string started_{utc_now()};
    json outputs_ = json::array();
    json extra_ = json::object();

    void add_model(CLI::App* app, bool single_alpha) {
        app->add_option("--s", opt_.s, "Bath exponent, 0 < s < 1");
        if (single_alpha) app->add_option("--alpha", opt_.alpha, "Coupling strength");
        app->add_option("--delta", opt_.delta, "Tunnelling amplitude");
        app->add_option("--omega-c", opt_.omega_c, "Cut-off frequency");
    }

    void add_chain(CLI::App* app) {
        app->add_option("--n", opt_.n, "Number of chain sites");
        app->add_option("--scheme", opt_.scheme, "Discretization: linear or log");
        app->add_option("--lambda", opt_.lambda, "Logarithmic discretization parameter");
        if (app->get_name() == "chain") app->add_option("--alpha", opt_.alpha, "Coupling strength");
    }

    void add_solver(CLI::App* app) {
        app->add_option("--chi", opt_.chi, "Bond dimension");
        app->add_option("--field", opt_.field, "real or complex");
        app->add_option("--restarts", opt_.restarts, "Cold restarts per solve");
        app->add_option("--max-iter", opt_.max_iter, "Iteration cap per restart");
        app->add_option("--gtol", opt_.gtol, "Gradient tolerance");
        app->add_option("--xtol", opt_.xtol, "Step tolerance");
        app->add_option("--init-scale", opt_.init_scale, "Standard deviation of random initial entries");
        app->add_option("--warm-jitter", opt_.warm_jitter, "Relative Gaussian jitter on warm starts");
        app->add_option("--seed", seed_raw_, "Seed (random if omitted)");
        app->add_option("--jobs", opt_.jobs, "Threads for restarts");
        app->add_option("--warm", opt_.warm, "State or ground-state JSON used as warm start");
    }

    void add_output(CLI::App* app) {
        app->add_option("--out", opt_.out, std::string("Output directory (default $") + kOutEnv + " or softmps_out)");
    }

    void resolve_output() {
        if (!opt_.out.empty()) {
            out_dir_ = opt_.out;
        } else if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') {
            out_dir_ = env;
        } else {
            out_dir_ = "softmps_out";
        }
        fs::create_directories(out_dir_);
    }

    void validate() {
        if (!seed_raw_.empty()) {
            std::size_t used = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(seed_raw_, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != seed_raw_.size() || seed_raw_.front() == '-') throw ConfigError("--seed must be a non-negative integer");
            opt_.seed = v;
        }
        if (opt_.field != "real" && opt_.field != "complex") throw ConfigError("--field must be real or complex");
        if (command_ == "extrapolate" || command_ == "exponent") return;
        if (command_ == "polaron") {
            if (!(opt_.s > 0.0 && opt_.s < 1.0)) throw ConfigError("--s must lie in (0, 1)");
            if (!(opt_.delta > 0.0) || !(opt_.omega_c > 0.0)) throw ConfigError("--delta and --omega-c must be > 0");
            return;
        }
        if (command_ == "oracle-check") {
            if (opt_.instances < 1 || opt_.cutoff < 2) throw ConfigError("--instances >= 1 and --cutoff >= 2 required");
            ensure_seed();
            return;
        }
        params().validate();
        if (opt_.scheme != "linear" && opt_.scheme != "log") throw ConfigError("--scheme must be linear or log");
        if (opt_.n < 1) throw ConfigError("--n must be >= 1");
        if (opt_.scheme == "log" && !(opt_.lambda > 1.0)) throw ConfigError("--lambda must be > 1");
        if (command_ == "chain") return;
        if (opt_.chi < 1) throw ConfigError("--chi must be >= 1");
        solver_options<double>().validate();
        if (!(opt_.tail_tol > 0.0)) throw ConfigError("--tail-tol must be > 0");
        if (command_ == "sweep") {
            for (std::size_t i = 0; i < opt_.grid.size(); ++i) {
                if (!(opt_.grid[i] >= 0.0)) throw ConfigError("--grid values must be >= 0");
                if (i > 0 && !(opt_.grid[i] > opt_.grid[i - 1])) throw ConfigError("--grid must be strictly increasing");
            }
        }
        if (command_ == "critical") {
            if (opt_.bracket.empty()) throw ConfigError("critical requires --bracket lo,hi");
            if (opt_.bracket.size() != 2 || !(opt_.bracket[0] < opt_.bracket[1]) || opt_.bracket[0] < 0.0)
                throw ConfigError("--bracket must be two values 0 <= lo < hi");
            if (!(opt_.tol > 0.0)) throw ConfigError("--tol must be > 0");
        }
        ensure_seed();
    }

    void ensure_seed() {
        if (!opt_.seed) {
            std::random_device rd;
            opt_.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            err_ << "seed: " << *opt_.seed << '\n';
        }
    }

    SbmParams params() const {
        SbmParams p;
        p.s = opt_.s;
        p.alpha = opt_.alpha;
        p.delta = opt_.delta;
        p.omega_c = opt_.omega_c;
        return p;
    }

    ChainScheme scheme() const { return opt_.scheme == "log" ? ChainScheme::Logarithmic : ChainScheme::Linear; }

    template <class T>
    OptimizerOptions<T> solver_options() const {
        OptimizerOptions<T> o;
        o.max_iterations = opt_.max_iter;
        o.gradient_tolerance = opt_.gtol;
        o.step_tolerance = opt_.xtol;
        o.restarts = opt_.restarts;
        o.init_scale = opt_.init_scale;
        o.warm_jitter = opt_.warm_jitter;
        o.seed = opt_.seed.value_or(0);
        o.jobs = opt_.jobs;
        if (!opt_.warm.empty()) {
            const json doc = io::read_json(opt_.warm);
            auto st = io::state_from_json<T>(doc);
            if (st.n_sites != opt_.n) throw ConfigError("--warm state has a different number of sites");
            if (st.chi > opt_.chi) throw ConfigError("--warm state has a larger chi than --chi");
            o.warm_start = embed(st, opt_.chi);
        }
        return o;
    }

    ObservableOptions observable_options() const {
        ObservableOptions o;
        o.rdm.tail_tolerance = opt_.tail_tol;
        o.entropy_sites = opt_.entropy_sites;
        return o;
    }

    SweepSettings sweep_settings() const {
        SweepSettings cfg;
        cfg.base = params();
        cfg.scheme = scheme();
        cfg.lambda = opt_.lambda;
        cfg.n_sites = opt_.n;
        cfg.chi = opt_.chi;
        cfg.warm_chain = !opt_.no_warm_chain;
        cfg.observables = observable_options();
        return cfg;
    }

    template <class F>
    int dispatch_field(F&& f) {
        if (opt_.field == "complex") return f(std::complex<double>{});
        return f(double{});
    }

    fs::path output(const std::string& name) {
        outputs_.push_back(name);
        return out_dir_ / name;
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream f(output(name));
        if (!f) throw Error("io_error", "cannot write " + (out_dir_ / name).string());
        f << text;
    }

    void write_manifest(const std::string& status, const std::string& code = "", const std::string& message = "") {
        json m;
        m["artifact"] = "softmps";
        m["version"] = SOFTMPS_VERSION;
        m["command"] = command_;
        m["argv"] = argv_;
        m["config"] = {{"section", command_}, {"values", config_}};
        m["seed"] = opt_.seed ? json(*opt_.seed) : json(nullptr);
        m["started"] = started_;
        if (status != "running") m["finished"] = utc_now();
        m["status"] = status;
        m["error"] = code.empty() ? json(nullptr) : json{{"code", code}, {"message", message}};
        m["outputs"] = outputs_;
        if (!extra_.empty()) m["details"] = extra_;
        io::write_json(out_dir_ / "manifest.json", m);
    }

    int finish(int code, const std::string& error_code = "", const std::string& message = "") {
        if (code != 0) err_ << "error [" << error_code << "]: " << message << '\n';
        if (!out_dir_.empty()) {
            try {
                write_manifest(code == 0 ? "ok" : (code == 2 ? "config_error" : "failed"), error_code, message);
            } catch (const std::exception& e) {
                err_ << "error [io_error]: manifest not written: " << e.what() << '\n';
            }
        }
        return code;
    }

    int run_chain() {
        const auto c = make_chain(params(), opt_.n, scheme(), opt_.lambda);
        std::ostringstream csv;
        csv << "# c0=" << fmt(c.c0) << ",scheme=" << to_string(c.scheme);
        if (c.scheme == ChainScheme::Logarithmic) csv << ",lambda=" << fmt(c.lambda);
        csv << '\n' << kChainHeader << '\n';
        for (int m = 1; m <= c.n_sites(); ++m)
            csv << m << ',' << fmt(c.omega[m - 1]) << ',' << (m < c.n_sites() ? fmt(c.t[m - 1]) : "") << '\n';
        write_text("chain.csv", csv.str());
        out_ << csv.str();
        return finish(0);
    }

    template <class T>
    int run_ground() {
        const auto p = params();
        const auto chain = make_chain(p, opt_.n, scheme(), opt_.lambda);
        const auto gs = ground_state(p, chain, opt_.chi, solver_options<T>());
        const fs::path save = opt_.save.empty() ? output("ground.json") : fs::path(opt_.save);
        if (!opt_.save.empty()) outputs_.push_back(save.string());
        io::save_ground(save, gs);

        json result;
        if (opt_.observables) {
            result = observables_to_json(compute_observables(gs.state, chain, p.delta, observable_options()));
        } else {
            const auto sb = spin_block(gs.state);
            result = {{"magnetization", sb.magnetization}, {"sz", sb.sz}, {"sx", sb.coherence},
                      {"energy", io::energy_to_json(gs.energy)}};
        }
        result["converged"] = gs.converged;
        result["iterations"] = gs.iterations;
        result["best_restart"] = gs.best_restart;
        result["seed"] = gs.seed;
        io::write_json(output("result.json"), result);
        out_ << result.dump(2) << '\n';
        if (!gs.converged) return finish(1, "not_converged", "no restart met the convergence tolerances");
        return finish(0);
    }

    template <class T>
    int run_sweep() {
        const auto cfg = sweep_settings();
        const auto res = sweep_alpha<T>(cfg, opt_.grid, solver_options<T>());
        std::ostringstream rows, sites;
        rows << kSweepHeader << '\n';
        sites << kSweepSitesHeader << '\n';
        int failures = 0;
        for (const auto& r : res.records) {
            const auto& o = r.observables;
            const bool have = r.ground.has_value();
            if (!r.ok) ++failures;
            auto num = [&](double v) { return have ? fmt(v) : std::string("nan"); };
            rows << fmt(r.alpha) << ',' << num(o.magnetization) << ',' << num(o.coherence) << ','
                 << num(o.spin_entropy) << ',' << num(o.energy.total) << ',' << num(o.sz) << ','
                 << num(o.occupations.empty() ? std::nan("") : o.occupations[0]) << ',' << num(o.energy.e_loc) << ','
                 << num(o.energy.e_int) << ',' << num(o.energy.e_chain) << ',' << (r.ok ? 1 : 0) << ','
                 << (have ? r.ground->iterations : 0) << ',' << r.error << '\n';
            if (!have) continue;
            for (std::size_t m = 0; m < o.occupations.size(); ++m) {
                sites << fmt(r.alpha) << ',' << m + 1 << ',' << fmt(o.occupations[m]) << ',';
                if (m < o.site_entropies.size())
                    sites << fmt(o.site_entropies[m]) << ',' << o.site_cutoffs[m];
                else
                    sites << "nan,0";
                sites << '\n';
            }
        }
        write_text("sweep.csv", rows.str());
        write_text("sweep_sites.csv", sites.str());
        out_ << rows.str();
        if (failures > 0)
            return finish(1, "sweep_incomplete", std::to_string(failures) + " grid point(s) failed or did not converge");
        return finish(0);
    }

    template <class T>
    int run_critical() {
        const auto cfg = sweep_settings();
        const auto det = detect_alpha_c<T>(cfg, {opt_.bracket[0], opt_.bracket[1]}, opt_.threshold, opt_.tol,
                                           solver_options<T>());
        json probes = json::array();
        for (const auto& [a, m] : det.probes) probes.push_back({{"alpha", a}, {"M", m}});
        json result = {{"alpha_c", det.alpha_c}, {"lo", det.lo},       {"hi", det.hi},
                       {"threshold", opt_.threshold}, {"tol", opt_.tol}, {"n_sites", opt_.n},
                       {"chi", opt_.chi},        {"s", opt_.s},        {"probes", probes}};
        io::write_json(output("critical.json"), result);
        out_ << result.dump(2) << '\n';
        return finish(0);
    }

    int run_extrapolate() {
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : read_csv(opt_.input)) pts.emplace_back(cell_number(row, "N"), cell_number(row, "alpha_c"));
        const json result = fit_to_json(extrapolate_alpha_c(pts));
        io::write_json(output("extrapolate.json"), result);
        out_ << result.dump(2) << '\n';
        return finish(0);
    }

    int run_exponent() {
        if (opt_.window.size() != 2 || !(opt_.window[0] > 0.0) || !(opt_.window[0] < opt_.window[1]))
            throw ConfigError("--window must be two values 0 < lo < hi");
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : read_csv(opt_.input)) {
            const auto conv = row.find("converged");
            if (conv != row.end() && conv->second == "0") continue;
            pts.emplace_back(cell_number(row, "alpha"), cell_number(row, "M"));
        }
        const json result = fit_to_json(fit_critical_exponent(pts, opt_.alpha_c, {opt_.window[0], opt_.window[1]}));
        io::write_json(output("exponent.json"), result);
        out_ << result.dump(2) << '\n';
        return finish(0);
    }

    int run_polaron() {
        const double v = polaron_alpha_c(opt_.s, opt_.delta, opt_.omega_c);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        write_text("polaron.txt", std::string(buf) + '\n');
        extra_["alpha_c"] = v;
        out_ << buf << '\n';
        return finish(0);
    }

    template <class T>
    int run_oracle() {
        oracle::SuiteOptions so;
        so.instances = opt_.instances;
        so.cutoff = opt_.cutoff;
        so.seed = *opt_.seed;
        const auto rep = oracle::equivalence_suite<T>(so);
        std::ostringstream table;
        table << std::left << std::setw(12) << "quantity" << std::setw(10) << "passed" << std::setw(14) << "worst_rel"
              << "result\n";
        json rows = json::array();
        for (const auto& q : rep.quantities) {
            const bool ok = q.passed == q.total;
            table << std::setw(12) << q.name << std::setw(10) << (std::to_string(q.passed) + "/" + std::to_string(q.total))
                  << std::setw(14) << std::setprecision(3) << std::scientific << q.worst << (ok ? "PASS" : "FAIL") << '\n';
            rows.push_back({{"quantity", q.name}, {"passed", q.passed}, {"total", q.total}, {"worst", q.worst}});
        }
        io::write_json(output("oracle_check.json"), {{"instances", rep.instances}, {"tolerance", so.tolerance}, {"rows", rows}});
        write_text("oracle_check.txt", table.str());
        out_ << table.str();
        if (!rep.passed()) return finish(1, "oracle_mismatch", "transfer calculus disagrees with the dense reference");
        return finish(0);
    }
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Runner r(out, err);
    return r.run(argc, argv);
}

}  // namespace softmps::cli
