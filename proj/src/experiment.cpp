#include "relayarq/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "relayarq/engine.hpp"
#include "relayarq/metrics.hpp"

namespace relayarq {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* section,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        for (const char* a : allowed)
            if (key == a) goto next;
        throw ConfigError(std::string("config: unknown key \"") + key + "\" in " + section);
    next:;
    }
}

std::vector<double> number_or_array(const json& j, const char* what) {
    std::vector<double> out;
    if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError(std::string("config: ") + what + " must be numeric");
            out.push_back(v.get<double>());
        }
    } else {
        throw ConfigError(std::string("config: ") + what + " must be a number or array");
    }
    if (out.empty()) throw ConfigError(std::string("config: ") + what + " is empty");
    return out;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

InrMode parse_inr_mode(const std::string& s) {
    if (s == "exact2d") return InrMode::Exact2D;
    if (s == "low_snr") return InrMode::LowSnrApprox;
    if (s == "lower_bound_t1") return InrMode::LowerBoundT1;
    if (s == "upper_bound_t2") return InrMode::UpperBoundT2;
    throw ConfigError("config: engine.mode must be one of auto, mc, exact2d, low_snr, "
                      "lower_bound_t1, upper_bound_t2");
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    reject_unknown(j, "top level",
                   {"channel", "protocol", "powers", "feedback", "mc", "engine", "opt",
                    "coverage"});
    ExperimentConfig cfg;
    cfg.raw = j.dump();

    if (!j.contains("channel") || !j.contains("protocol"))
        throw ConfigError("config: channel and protocol sections are required");

    {
        const json& c = j["channel"];
        reject_unknown(c, "channel", {"lambda_sr", "lambda_sd", "lambda_rd", "delta", "fading"});
        cfg.channel.lambda_sr = c.value("lambda_sr", 1.0);
        cfg.channel.lambda_sd = c.value("lambda_sd", 1.0);
        cfg.channel.lambda_rd = c.value("lambda_rd", 1.0);
        if (c.contains("delta")) cfg.deltas = number_or_array(c["delta"], "channel.delta");
        const std::string fading = c.value("fading", "quasi_static");
        if (fading == "quasi_static")
            cfg.channel.fading = FadingMode::QuasiStatic;
        else if (fading == "fast")
            cfg.channel.fading = FadingMode::FastFading;
        else
            throw ConfigError("config: channel.fading must be quasi_static or fast");
    }
    {
        const json& p = j["protocol"];
        reject_unknown(p, "protocol", {"type", "m_max", "r1", "rates", "rate_units", "coding"});
        const std::string type = p.value("type", "rtd");
        Protocol proto;
        if (type == "rtd")
            proto = Protocol::Rtd;
        else if (type == "inr")
            proto = Protocol::Inr;
        else
            throw ConfigError("config: protocol.type must be rtd or inr");
        double unit = 1.0;
        const std::string units = p.value("rate_units", "nats");
        if (units == "bits")
            unit = std::log(2.0);
        else if (units != "nats")
            throw ConfigError("config: protocol.rate_units must be nats or bits");
        if (p.contains("rates")) {
            std::vector<double> ladder;
            for (double r : number_or_array(p["rates"], "protocol.rates"))
                ladder.push_back(r * unit);
            cfg.protocol = ProtocolConfig::variable_length(proto, ladder);
            if (p.value("coding", "variable_length") != "variable_length")
                throw ConfigError("config: an explicit rates ladder implies variable_length");
        } else {
            const int m_max = p.value("m_max", 0);
            const double r1 = p.value("r1", 1.0) * unit;
            cfg.protocol = ProtocolConfig::fixed_length(proto, m_max, r1);
            if (p.value("coding", "fixed_length") != "fixed_length")
                throw ConfigError("config: variable_length coding requires a rates ladder");
        }
    }
    if (j.contains("powers")) {
        const json& p = j["powers"];
        reject_unknown(p, "powers", {"snr_db", "allocation", "p_source", "p_relay"});
        if (p.contains("p_source") || p.contains("p_relay")) {
            if (p.contains("snr_db") || p.contains("allocation"))
                throw ConfigError("config: powers: give either snr_db or explicit vectors");
            cfg.explicit_powers = true;
            cfg.powers.p_source = number_or_array(p["p_source"], "powers.p_source");
            cfg.powers.p_relay = number_or_array(p["p_relay"], "powers.p_relay");
        } else {
            if (p.contains("snr_db")) cfg.snr_db = number_or_array(p["snr_db"], "powers.snr_db");
            if (p.value("allocation", "uniform") != "uniform")
                throw ConfigError("config: powers.allocation supports only uniform");
        }
    }
    if (j.contains("feedback")) {
        const json& f = j["feedback"];
        reject_unknown(f, "feedback", {"p_sd", "p_rd", "p_sr", "p_all"});
        if (f.contains("p_all")) {
            const double p = f["p_all"].get<double>();
            cfg.feedback = {p, p, p};
        } else {
            cfg.feedback.p_sd = f.value("p_sd", 0.0);
            cfg.feedback.p_rd = f.value("p_rd", 0.0);
            cfg.feedback.p_sr = f.value("p_sr", 0.0);
        }
        cfg.feedback.validate();
    }
    if (j.contains("mc")) {
        const json& m = j["mc"];
        reject_unknown(m, "mc", {"packets", "seed", "antithetic"});
        cfg.mc.n_packets = m.value("packets", std::uint64_t{1000000});
        cfg.mc.seed = m.value("seed", std::uint64_t{0});
        cfg.mc.antithetic = m.value("antithetic", false);
    }
    if (j.contains("engine")) {
        const json& e = j["engine"];
        reject_unknown(e, "engine", {"mode"});
        const std::string mode = e.value("mode", "auto");
        if (mode == "mc")
            cfg.engine_mc = true;
        else if (mode != "auto")
            cfg.inr_mode = parse_inr_mode(mode);
    }
    if (j.contains("opt")) {
        const json& o = j["opt"];
        reject_unknown(o, "opt",
                       {"objective", "scenario", "phi_total_db", "phi_s_db", "phi_r_db",
                        "r1_sweep", "free_rates", "grid", "multistarts",
                        "polish_iterations"});
        const std::string obj = o.value("objective", "min_outage");
        if (obj == "min_outage")
            cfg.objective = Objective::MinOutage;
        else if (obj == "max_throughput")
            cfg.objective = Objective::MaxThroughput;
        else
            throw ConfigError("config: opt.objective must be min_outage or max_throughput");
        const std::string scen = o.value("scenario", "sum_power");
        if (scen == "individual")
            cfg.scenario_individual = true;
        else if (scen != "sum_power")
            throw ConfigError("config: opt.scenario must be sum_power or individual");
        if (cfg.scenario_individual) {
            if (o.contains("phi_s_db")) cfg.budget_db = number_or_array(o["phi_s_db"], "opt.phi_s_db");
            cfg.phi_r_db = o.value("phi_r_db", 10.0);
        } else if (o.contains("phi_total_db")) {
            cfg.budget_db = number_or_array(o["phi_total_db"], "opt.phi_total_db");
        }
        if (o.contains("r1_sweep")) cfg.r1_sweep = number_or_array(o["r1_sweep"], "opt.r1_sweep");
        cfg.free_rates = o.value("free_rates", false);
        if (o.contains("grid")) {
            const json& g = o["grid"];
            reject_unknown(g, "opt.grid", {"span_db", "step_db", "max_evaluations"});
            cfg.grid.span_db = g.value("span_db", 20.0);
            cfg.grid.step_db = g.value("step_db", 0.5);
            cfg.grid.max_grid_evaluations = g.value("max_evaluations", std::uint64_t{200000});
        }
        cfg.multistarts = o.value("multistarts", 8);
        cfg.polish_iterations = o.value("polish_iterations", 400);
    }
    if (cfg.feedback.any() && !cfg.engine_mc) {
        // The closed forms cover noisy feedback only for RTD M=1 (library
        // path); the general-M noisy engine is the simulator.
        if (j.contains("engine") && j["engine"].value("mode", "auto") != "auto" &&
            j["engine"].value("mode", "auto") != "mc")
            throw ConfigError(
                "config: noisy feedback needs engine.mode auto or mc "
                "(analytical engines model noiseless feedback)");
        cfg.engine_mc = true;
    }
    if (j.contains("coverage")) {
        const json& c = j["coverage"];
        reject_unknown(c, "coverage", {"eps", "lambda_lo", "lambda_hi", "rel_tol", "m_sweep"});
        cfg.eps = c.value("eps", 1e-2);
        cfg.coverage_lambda_lo = c.value("lambda_lo", 1e-9);
        cfg.coverage_lambda_hi = c.value("lambda_hi", 1e6);
        cfg.coverage_rel_tol = c.value("rel_tol", 1e-3);
        if (c.contains("m_sweep"))
            for (const auto& v : c["m_sweep"]) cfg.coverage_m_sweep.push_back(v.get<int>());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string CsvTable::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += header[i];
        out += i + 1 < header.size() ? ',' : '\n';
    }
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += row[i];
            out += i + 1 < row.size() ? ',' : '\n';
        }
    return out;
}

namespace {

const char* fading_name(FadingMode f) {
    return f == FadingMode::QuasiStatic ? "quasi_static" : "fast";
}
const char* protocol_name(Protocol p) { return p == Protocol::Rtd ? "rtd" : "inr"; }

std::vector<EvalPoint> build_points(const ExperimentConfig& cfg) {
    std::vector<EvalPoint> pts;
    for (double snr : cfg.snr_db)
        for (double delta : cfg.deltas) {
            EvalPoint pt;
            pt.channel = cfg.channel;
            pt.channel.delta = delta;
            pt.protocol = cfg.protocol;
            pt.snr_db = snr;
            if (cfg.explicit_powers)
                pt.powers = cfg.powers;
            else
                pt.powers = PowerAllocation::uniform(cfg.protocol.rounds(), db_to_linear(snr));
            pts.push_back(std::move(pt));
        }
    return pts;
}

template <typename Fn>
void for_each_indexed(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(threads, n);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

CsvTable run_evaluate(const ExperimentConfig& cfg, bool validate, int threads) {
    std::vector<EvalPoint> pts = build_points(cfg);
    CsvTable t;
    t.header = {"snr_db", "protocol", "fading", "delta",  "M",        "R1",
                "throughput", "outage", "phi_s", "phi_r", "phi_total", "engine_mode"};
    if (validate || cfg.engine_mc) {
        for (const char* m : {"mc_throughput", "mc_outage", "mc_phi_s", "mc_phi_r",
                              "mc_phi_total"})
            t.header.push_back(m);
    }
    if (validate) {
        for (const char* m : {"z_throughput", "z_outage", "z_phi_s", "z_phi_r", "z_phi_total"})
            t.header.push_back(m);
    }
    t.rows.resize(pts.size());
    const bool mc_needed = validate || cfg.engine_mc;
    const int inner_threads = pts.size() == 1 ? threads : 1;

    for_each_indexed(pts.size(), threads, [&](std::size_t i) {
        const EvalPoint& pt = pts[i];
        Metrics an;
        std::string engine = cfg.engine_mc ? "mc" : engine_name(pt.channel, pt.protocol, cfg.inr_mode);
        if (!cfg.engine_mc) an = analytic_metrics(pt.channel, pt.protocol, pt.powers, cfg.inr_mode);

        McResult mc;
        if (mc_needed) {
            McConfig m = cfg.mc;
            m.threads = inner_threads;
            mc = simulate(pt.channel, pt.protocol, pt.powers, cfg.feedback, m);
            if (cfg.engine_mc) an = mc.metrics;
        }
        // With explicit power vectors the sweep axis is absent; report the
        // achieved average total power instead.
        const double snr_col =
            cfg.explicit_powers ? 10.0 * std::log10(an.phi_total) : pt.snr_db;
        std::vector<std::string> row{
            format_double(snr_col),
            protocol_name(pt.protocol.protocol),
            fading_name(pt.channel.fading),
            format_double(pt.channel.delta),
            std::to_string(pt.protocol.m_max),
            format_double(pt.protocol.rates[0]),
            format_double(an.throughput),
            format_double(an.outage),
            format_double(an.phi_s),
            format_double(an.phi_r),
            format_double(an.phi_total),
            engine};
        if (mc_needed)
            for (double v : {mc.metrics.throughput, mc.metrics.outage, mc.metrics.phi_s,
                             mc.metrics.phi_r, mc.metrics.phi_total})
                row.push_back(format_double(v));
        if (validate) {
            auto z = [](double a, double m, double se) {
                if (se <= 0.0)
                    return std::abs(a - m) <= 1e-9 * std::max(1.0, std::abs(m)) ? 0.0
                                                                                : INFINITY;
                return (a - m) / se;
            };
            row.push_back(format_double(z(an.throughput, mc.metrics.throughput,
                                          mc.std_errors.throughput)));
            row.push_back(format_double(z(an.outage, mc.metrics.outage, mc.std_errors.outage)));
            row.push_back(format_double(z(an.phi_s, mc.metrics.phi_s, mc.std_errors.phi_s)));
            row.push_back(format_double(z(an.phi_r, mc.metrics.phi_r, mc.std_errors.phi_r)));
            row.push_back(format_double(
                z(an.phi_total, mc.metrics.phi_total, mc.std_errors.phi_total)));
        }
        t.rows[i] = std::move(row);
    });
    return t;
}

namespace {

OptProblem make_problem(const ExperimentConfig& cfg, double budget_db, int threads) {
    OptProblem p;
    p.objective = cfg.objective;
    if (cfg.scenario_individual)
        p.scenario = IndividualConstraint{db_to_linear(budget_db), db_to_linear(cfg.phi_r_db)};
    else
        p.scenario = SumPowerConstraint{db_to_linear(budget_db)};
    p.channel = cfg.channel;
    p.channel.delta = cfg.deltas.front();
    p.protocol = cfg.protocol;
    p.inr_mode = cfg.inr_mode;
    p.free_rates = cfg.free_rates;
    p.grid = cfg.grid;
    p.multistarts = cfg.multistarts;
    p.polish_iterations = cfg.polish_iterations;
    p.threads = threads;
    return p;
}

std::string join_semicolon(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += format_double(v[i]);
    }
    return out;
}

}  // namespace

CsvTable run_optimize(const ExperimentConfig& cfg, int threads) {
    CsvTable t;
    t.header = {"snr_db", "protocol", "fading", "delta", "M", "R1", "objective",
                "objective_value", "throughput", "outage", "phi_s", "phi_r", "phi_total",
                "p_source", "p_relay", "rates", "evaluations", "engine_mode"};
    // one row per (budget, initial rate) pair; an r1 sweep at fixed budget
    // traces the throughput-vs-outage trade-off
    struct Job {
        double budget;
        ProtocolConfig protocol;
    };
    std::vector<Job> jobs;
    for (double budget : cfg.budget_db) {
        if (cfg.r1_sweep.empty()) {
            jobs.push_back({budget, cfg.protocol});
        } else {
            for (double r1 : cfg.r1_sweep)
                jobs.push_back({budget, ProtocolConfig::fixed_length(
                                            cfg.protocol.protocol, cfg.protocol.m_max, r1)});
        }
    }
    t.rows.resize(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const double budget = jobs[i].budget;
        ExperimentConfig local = cfg;
        local.protocol = jobs[i].protocol;
        const OptProblem p = make_problem(local, budget, threads);
        const OptResult r = optimize(p);
        t.rows[i] = {format_double(budget),
                     protocol_name(local.protocol.protocol),
                     fading_name(p.channel.fading),
                     format_double(p.channel.delta),
                     std::to_string(local.protocol.m_max),
                     format_double(r.rates[0]),
                     cfg.objective == Objective::MinOutage ? "min_outage" : "max_throughput",
                     format_double(r.objective_value),
                     format_double(r.metrics.throughput),
                     format_double(r.metrics.outage),
                     format_double(r.metrics.phi_s),
                     format_double(r.metrics.phi_r),
                     format_double(r.metrics.phi_total),
                     join_semicolon(r.powers.p_source),
                     join_semicolon(r.powers.p_relay),
                     join_semicolon(r.rates),
                     std::to_string(r.evaluations),
                     engine_name(p.channel, local.protocol, cfg.inr_mode)};
    }
    return t;
}

CsvTable run_coverage(const ExperimentConfig& cfg, int threads) {
    CsvTable t;
    t.header = {"snr_db", "protocol", "fading", "delta", "M", "R1", "eps",
                "lambda_threshold", "baseline_lambda", "coverage_ratio", "engine_mode"};
    struct Cell {
        double snr, delta;
        int m_max;
    };
    std::vector<Cell> cells;
    const std::vector<int> ms =
        cfg.coverage_m_sweep.empty() ? std::vector<int>{cfg.protocol.m_max} : cfg.coverage_m_sweep;
    for (double snr : cfg.snr_db)
        for (double delta : cfg.deltas)
            for (int m : ms) cells.push_back({snr, delta, m});

    t.rows.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        ExperimentConfig local = cfg;
        local.deltas = {c.delta};
        local.protocol = cfg.protocol.coding == Coding::FixedLength
                             ? ProtocolConfig::fixed_length(cfg.protocol.protocol, c.m_max,
                                                            cfg.protocol.rates[0])
                             : cfg.protocol;
        OptProblem p = make_problem(local, c.snr, threads);
        const double lam = coverage_lambda_threshold(p, cfg.eps, cfg.coverage_lambda_lo,
                                                     cfg.coverage_lambda_hi,
                                                     cfg.coverage_rel_tol);
        OptProblem base = p;
        base.channel.lambda_sr = INFINITY;
        base.channel.lambda_rd = INFINITY;
        base.channel.delta = 0.0;
        base.protocol = ProtocolConfig::fixed_length(Protocol::Rtd, 0, cfg.protocol.rates[0]);
        base.free_rates = false;
        if (cfg.scenario_individual)
            base.scenario = SumPowerConstraint{db_to_linear(c.snr)};
        const double lam_base = coverage_lambda_threshold(base, cfg.eps, cfg.coverage_lambda_lo,
                                                          cfg.coverage_lambda_hi,
                                                          cfg.coverage_rel_tol);
        t.rows[i] = {format_double(c.snr),
                     protocol_name(cfg.protocol.protocol),
                     fading_name(p.channel.fading),
                     format_double(c.delta),
                     std::to_string(c.m_max),
                     format_double(cfg.protocol.rates[0]),
                     format_double(cfg.eps),
                     format_double(lam),
                     format_double(lam_base),
                     format_double(lam / lam_base),
                     engine_name(p.channel, local.protocol, cfg.inr_mode)};
    }
    return t;
}

std::string provenance_json(const ExperimentConfig& cfg, const std::string& command,
                            const CsvTable& table) {
    // FNV-1a over the canonical config dump.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : cfg.raw) {
        h ^= c;
        h *= 1099511628211ull;
    }
    json j;
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(h));
    j["config_hash_fnv1a"] = hash;
    j["command"] = command;
    j["seed"] = cfg.mc.seed;
    j["engine_mode"] = cfg.engine_mc ? "mc" : inr_mode_name(cfg.inr_mode);
    j["version"] = "1.0.0";
    j["columns"] = table.header;
    j["rows"] = table.rows.size();
    return j.dump(2) + "\n";
}

}  // namespace relayarq
