#ifndef ECHELON_HARNESS_HPP
#define ECHELON_HARNESS_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "echelon/centralized.hpp"
#include "echelon/costs.hpp"
#include "echelon/decentralized.hpp"
#include "echelon/demand.hpp"
#include "echelon/rng.hpp"
#include "echelon/trace.hpp"

namespace echelon {

enum class RunMode { centralized, decentralized, both };

/*
    Experiment description, loadable from a key=value file. Repeated demand/
    costs keys accumulate into scenario lists; every (demand, costs, mode)
    combination is run for `trials` seeds.
*/
struct ExperimentConfig {
    long T = 131072;
    long trials = 16;
    RunMode mode = RunMode::both;
    std::vector<DemandModel> demands;
    std::vector<CostParams> costs;
    double delta = 0.0;      // 0 means the 1/T^2 default
    double c1 = 1.0;
    double c3 = 1.0;
    bool eta_doubled = true; // learner step 2B; false gives B
    double ogd_eta = 0.0;    // 0 means the bounded-gradient rule
    std::uint64_t seed_base = 1;
    std::string out_dir = "out";
    std::vector<long> checkpoints; // empty means powers of two from 1024 up to T
    bool trace_dump = false;

    double delta_effective() const {
        return delta > 0.0 ? delta : 1.0 / (static_cast<double>(T) * static_cast<double>(T));
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

inline double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse number '" + s + "' for " + what);
    }
}

inline long parse_long(const std::string& s, const std::string& what) {
    const double v = parse_num(s, what);
    if (v != std::floor(v)) throw std::invalid_argument(what + " must be an integer");
    return static_cast<long>(v);
}

// file-name-safe version of a scenario label
inline std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return out;
}

} // namespace detail

inline DemandModel parse_demand_spec(const std::string& text) {
    const auto f = detail::split_ws(text);
    if (f.empty()) throw std::invalid_argument("empty demand spec");
    const auto num = [&](std::size_t i) { return detail::parse_num(f.at(i), "demand spec"); };
    if (f[0] == "uniform" && f.size() == 3) return make_uniform_demand(num(1), num(2));
    if (f[0] == "tgauss" && f.size() == 5)
        return make_truncated_gaussian_demand(num(1), num(2), num(3), num(4));
    if (f[0] == "texp" && f.size() == 4)
        return make_truncated_exponential_demand(num(1), num(2), num(3));
    if (f[0] == "discrete" && f.size() >= 3 && f.size() % 2 == 1) {
        std::vector<double> atoms, weights;
        for (std::size_t i = 1; i + 1 < f.size(); i += 2) {
            atoms.push_back(num(i));
            weights.push_back(num(i + 1));
        }
        return make_discrete_demand(atoms, weights);
    }
    throw std::invalid_argument(
        "demand spec must be 'uniform d D', 'tgauss d D mu sigma', 'texp d D rate', "
        "or 'discrete a1 w1 a2 w2 ...'; got '" + text + "'");
}

inline CostParams parse_costs_spec(const std::string& text) {
    const auto f = detail::split_ws(text);
    if (f.size() != 3 && f.size() != 4)
        throw std::invalid_argument("costs spec must be 'h1 h2 p1 [alpha]'; got '" + text + "'");
    const auto num = [&](std::size_t i) { return detail::parse_num(f.at(i), "costs spec"); };
    return make_costs(num(0), num(1), num(2), f.size() == 4 ? num(3) : 1.0);
}

inline std::string costs_label(const CostParams& cp) {
    std::string s = detail::label_num(cp.h1) + ":" + detail::label_num(cp.h2) + ":"
                    + detail::label_num(cp.p1);
    if (cp.alpha != 1.0) s += ":a" + detail::label_num(cp.alpha);
    return s;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no)
                                        + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key == "T") {
            cfg.T = detail::parse_long(val, "T");
            if (cfg.T < 1) throw std::invalid_argument("T must be >= 1");
        } else if (key == "trials") {
            cfg.trials = detail::parse_long(val, "trials");
            if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
        } else if (key == "mode") {
            if (val == "centralized") cfg.mode = RunMode::centralized;
            else if (val == "decentralized") cfg.mode = RunMode::decentralized;
            else if (val == "both") cfg.mode = RunMode::both;
            else throw std::invalid_argument("mode must be centralized, decentralized, or both");
        } else if (key == "demand") {
            cfg.demands.push_back(parse_demand_spec(val));
        } else if (key == "costs") {
            cfg.costs.push_back(parse_costs_spec(val));
        } else if (key == "delta") {
            if (val == "auto") cfg.delta = 0.0;
            else {
                cfg.delta = detail::parse_num(val, "delta");
                if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
                    throw std::invalid_argument("delta must lie in (0,1)");
            }
        } else if (key == "c1") {
            cfg.c1 = detail::parse_num(val, "c1");
            if (!(cfg.c1 >= 0.0)) throw std::invalid_argument("c1 must be >= 0");
        } else if (key == "c3") {
            cfg.c3 = detail::parse_num(val, "c3");
            if (!(cfg.c3 > 0.0)) throw std::invalid_argument("c3 must be > 0");
        } else if (key == "eta_rule") {
            if (val == "2b") cfg.eta_doubled = true;
            else if (val == "b") cfg.eta_doubled = false;
            else throw std::invalid_argument("eta_rule must be 2b or b");
        } else if (key == "ogd_eta") {
            cfg.ogd_eta = detail::parse_num(val, "ogd_eta");
            if (cfg.ogd_eta < 0.0) throw std::invalid_argument("ogd_eta must be >= 0");
        } else if (key == "seed") {
            const double v = detail::parse_num(val, "seed");
            if (v < 0.0 || v != std::floor(v))
                throw std::invalid_argument("seed must be a nonnegative integer");
            cfg.seed_base = static_cast<std::uint64_t>(v);
        } else if (key == "out") {
            if (val.empty()) throw std::invalid_argument("out must not be empty");
            cfg.out_dir = val;
        } else if (key == "checkpoints") {
            if (val == "auto") cfg.checkpoints.clear();
            else {
                cfg.checkpoints.clear();
                for (const auto& tok : detail::split_ws(val)) {
                    const long c = detail::parse_long(tok, "checkpoints");
                    if (c < 1) throw std::invalid_argument("checkpoints must be >= 1");
                    cfg.checkpoints.push_back(c);
                }
                if (cfg.checkpoints.empty())
                    throw std::invalid_argument("checkpoints list must not be empty");
            }
        } else if (key == "trace") {
            if (val == "0" || val == "false") cfg.trace_dump = false;
            else if (val == "1" || val == "true") cfg.trace_dump = true;
            else throw std::invalid_argument("trace must be 0/1/true/false");
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    if (cfg.demands.empty()) cfg.demands.push_back(make_uniform_demand(1.0, 4.0));
    if (cfg.costs.empty()) cfg.costs.push_back(make_costs(0.3, 0.1, 0.5));
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline std::vector<long> default_checkpoints(long T) {
    std::vector<long> out;
    for (long c = 1024; c <= T; c *= 2) out.push_back(c);
    if (out.empty() || out.back() != T) out.push_back(T);
    return out;
}

// shortest round-trip decimal text for a double
inline std::string csv_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// least-squares slope of log(value) against log(t)
inline double fit_growth(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 3) throw std::invalid_argument("growth fit needs at least 3 checkpoints");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [t, v] : pts) {
        if (!(t > 0.0) || !(v > 0.0))
            throw std::invalid_argument("growth fit needs positive checkpoints and values");
        const double x = std::log(t), y = std::log(v);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t scenario,
                                 std::uint64_t mode, std::uint64_t trial) {
    std::uint64_t s = base;
    s ^= 0x9e3779b97f4a7c15ULL * (scenario + 1);
    splitmix64_next(s);
    s ^= 0x9e3779b97f4a7c15ULL * (mode + 1);
    splitmix64_next(s);
    s ^= 0x9e3779b97f4a7c15ULL * (trial + 1);
    return splitmix64_next(s);
}

// one-pass mean/variance accumulator
struct RunningStat {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        n += 1;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double sd() const { return n < 2 ? 0.0 : std::sqrt(m2 / static_cast<double>(n - 1)); }
};

struct TrialMetrics {
    std::vector<double> regret; // cumulative chain loss minus t * optimal rate
    std::vector<double> s1_err;
    std::vector<double> s2_err;
    std::vector<double> omega_err; // 0 in centralized runs (no contract)
};

// checkpoint snapshots of one trace against the analytic optimum
inline TrialMetrics trial_metrics(const RunTrace& tr, const std::vector<long>& checkpoints,
                                  const OptimalLevels& opt, bool decentralized) {
    TrialMetrics out;
    std::size_t ei = 0;
    double cum = 0.0;
    long done = 0;
    for (long cpt : checkpoints) {
        for (; done < cpt && done < static_cast<long>(tr.loss_central.size()); ++done)
            cum += tr.loss_central[done];
        while (ei + 1 < tr.epochs.size() && tr.epochs[ei + 1].start <= cpt) ++ei;
        out.regret.push_back(cum - static_cast<double>(cpt) * opt.h_star);
        out.s1_err.push_back(std::abs(tr.epochs[ei].s1 - opt.s1));
        out.s2_err.push_back(std::abs(tr.target2[cpt - 1] - opt.s2));
        out.omega_err.push_back(decentralized ? std::abs(tr.omega[cpt - 1] - opt.omega) : 0.0);
    }
    return out;
}

inline void write_trace_csv(const RunTrace& tr, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
    out << "t,d,level1,level2,order1,order2,omega,loss_central,loss_agent1,loss_agent2\n";
    for (std::size_t t = 0; t < tr.d.size(); ++t) {
        out << (t + 1) << ',' << csv_number(tr.d[t]) << ',' << csv_number(tr.level1[t]) << ','
            << csv_number(tr.level2[t]) << ',' << csv_number(tr.order1[t]) << ','
            << csv_number(tr.order2[t]) << ',' << csv_number(tr.omega[t]) << ','
            << csv_number(tr.loss_central[t]) << ',' << csv_number(tr.loss_agent1[t]) << ','
            << csv_number(tr.loss_agent2[t]) << '\n';
    }
}

/*
    Runs every (demand, costs, mode) scenario for the configured number of
    seeds, in waves of hardware threads, and writes the per-checkpoint summary
    CSV. Aggregation is in trial order, so output bytes depend only on the
    config. Returns the summary path.
*/
inline std::string run_trials(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const std::string summary_path = (fs::path(cfg.out_dir) / "summary.csv").string();
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary file '" + summary_path + "'");
    out << "scenario,mode,t,regret_mean,regret_std,s1_err_mean,s2_err_mean,omega_err_mean\n";

    const std::vector<long> checkpoints =
        cfg.checkpoints.empty() ? default_checkpoints(cfg.T) : cfg.checkpoints;
    for (long c : checkpoints)
        if (c > cfg.T) throw std::invalid_argument("checkpoint beyond horizon T");

    std::vector<RunMode> modes;
    if (cfg.mode == RunMode::both)
        modes = {RunMode::centralized, RunMode::decentralized};
    else
        modes = {cfg.mode};

    const unsigned pool = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t scenario_idx = 0;
    for (const auto& model : cfg.demands) {
        for (const auto& costs : cfg.costs) {
            const OptimalLevels opt = optimal_levels(costs, model);
            const std::string scenario = model.label + "/" + costs_label(costs);
            for (RunMode mode : modes) {
                const bool dec = mode == RunMode::decentralized;
                const std::string mode_name = dec ? "decentralized" : "centralized";
                std::vector<TrialMetrics> metrics(cfg.trials);
                for (long wave = 0; wave < cfg.trials; wave += pool) {
                    const long hi = std::min<long>(cfg.trials, wave + pool);
                    std::vector<std::future<TrialMetrics>> fut;
                    for (long k = wave; k < hi; ++k) {
                        fut.push_back(std::async(std::launch::async, [&, k] {
                            RunParams rp;
                            rp.model = model;
                            rp.costs = costs;
                            rp.T = cfg.T;
                            rp.delta = cfg.delta_effective();
                            rp.c1 = cfg.c1;
                            rp.c3 = cfg.c3;
                            rp.eta_doubled = cfg.eta_doubled;
                            rp.ogd_eta = cfg.ogd_eta;
                            rp.seed = derive_seed(cfg.seed_base, scenario_idx, dec ? 1 : 0,
                                                  static_cast<std::uint64_t>(k));
                            const RunTrace tr = dec ? run_decentralized(rp) : run_centralized(rp);
                            if (cfg.trace_dump) {
                                const std::string name = "trace_" + detail::sanitize(scenario)
                                                         + "_" + mode_name + "_trial"
                                                         + std::to_string(k) + ".csv";
                                write_trace_csv(tr, (fs::path(cfg.out_dir) / name).string());
                            }
                            return trial_metrics(tr, checkpoints, opt, dec);
                        }));
                    }
                    for (long k = wave; k < hi; ++k)
                        metrics[k] = fut[k - wave].get();
                }
                for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
                    RunningStat reg, e1, e2, ew;
                    for (const auto& tm : metrics) {
                        reg.add(tm.regret[ci]);
                        e1.add(tm.s1_err[ci]);
                        e2.add(tm.s2_err[ci]);
                        ew.add(tm.omega_err[ci]);
                    }
                    out << scenario << ',' << mode_name << ',' << checkpoints[ci] << ','
                        << csv_number(reg.mean) << ',' << csv_number(reg.sd()) << ','
                        << csv_number(e1.mean) << ',' << csv_number(e2.mean) << ','
                        << csv_number(ew.mean) << '\n';
                }
            }
            ++scenario_idx;
        }
    }
    return summary_path;
}

} // namespace echelon

#endif // ECHELON_HARNESS_HPP
