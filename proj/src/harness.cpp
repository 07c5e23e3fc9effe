// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"

#include "iscsc/semantics.hpp"
#include "iscsc/sensing.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace iscsc::harness {

namespace fs = std::filesystem;
using nlohmann::json;

ExitCode exit_code(opt::RunStatus s) {
    switch (s) {
        case opt::RunStatus::Optimal: return ExitCode::Ok;
        case opt::RunStatus::Infeasible: return ExitCode::Infeasible;
        case opt::RunStatus::NumericalLimit: return ExitCode::NumericalLimit;
    }
    return ExitCode::NumericalLimit;
}

std::optional<double> solver_tol_from_env() {
    const char* v = std::getenv("ISCSC_SOLVER_TOL");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const double tol = std::strtod(v, &end);
    if (errno != 0 || *end != '\0' || !(tol > 0.0) || !std::isfinite(tol))
        throw UsageError(std::string("ISCSC_SOLVER_TOL must be a positive number, got '") + v + "'");
    return tol;
}

namespace {

// shortest decimal that reads back to the same double
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

json cvec_json(const CVec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
    return a;
}

json cmat_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(cvec_json(m.row(r).transpose()));
    return rows;
}

CVec cvec_from(const json& a) {
    CVec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = {a[i][0].get<double>(), a[i][1].get<double>()};
    return v;
}

CMat cmat_from(const json& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    CMat m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) m.row(r) = cvec_from(rows[static_cast<std::size_t>(r)]).transpose();
    return m;
}

json trace_json(const opt::TraceRecord& t) {
    return {{"outer", t.outer},
            {"step", t.step},
            {"objective", t.objective},
            {"inner_iters", t.inner_iters},
            {"solver_iterations", t.solver_iterations},
            {"solver_status", t.solver_status},
            {"power_slack_w", t.power_slack_w},
            {"qos_slack", t.qos_slack},
            {"seconds", t.seconds}};
}

json metrics_json(const opt::Metrics& m) {
    json cus = json::array();
    for (std::size_t k = 0; k < m.sinr.size(); ++k)
        cus.push_back({{"sinr", m.sinr[k]},
                       {"semantic_rate", m.semantic_rate[k]},
                       {"ssr", m.ssr[k]},
                       {"rho", m.rho[k]},
                       {"lambda", m.lambda[k]}});
    json targets = json::array();
    for (std::size_t l = 0; l < m.crb.size(); ++l)
        targets.push_back({{"crb", m.crb[l]}, {"rcrb", m.rcrb[l]}, {"lambda_margin", m.lambda_margin[l]}});
    return {{"cus", cus},
            {"targets", targets},
            {"power", {{"comp_w", m.power.comp_w}, {"cs_w", m.power.cs_w}, {"budget_w", m.power.budget_w}}}};
}

std::vector<CMat> outer_products(const std::vector<CVec>& beams) {
    std::vector<CMat> w;
    for (const auto& b : beams) w.push_back(b * b.adjoint());
    return w;
}

struct Comparer {
    double tol;
    Verification& v;

    void operator()(const std::string& field, double stored, double recomputed) const {
        double err = std::abs(stored - recomputed) / std::max(1.0, std::abs(stored));
        if (std::isinf(stored) && stored == recomputed) err = 0.0;
        if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
        if (err > v.worst_error || v.worst_field.empty()) {
            v.worst_error = err;
            v.worst_field = field;
        }
        if (err > tol) v.ok = false;
    }
};

}  // namespace

json make_report(const ScenarioConfig& cfg, std::uint64_t seed, const opt::RunResult& result) {
    const auto& sol = result.solution;
    const auto& rep = result.report;
    json j = metrics_json(sol.metrics);
    j["schema"] = "iscsc.report/1";
    j["digest"] = scenario_digest(cfg, seed);
    j["seed"] = seed;
    j["mode"] = opt::to_string(rep.mode);
    j["status"] = opt::to_string(rep.status);
    j["message"] = rep.message;
    j["config"] = scenario_to_json(cfg);
    j["totals"] = {{"sum_semantic_rate", sol.metrics.sum_semantic_rate},
                   {"sum_ssr", sol.metrics.sum_ssr},
                   {"sum_rcrb", sol.metrics.sum_rcrb},
                   {"objective", sol.metrics.objective},
                   {"sdr_objective", sol.sdr_objective},
                   {"sdr_gap", sol.sdr_gap}};
    j["solver"] = {{"outer_iterations", rep.outer_iterations},
                   {"sdp_solves", rep.sdp_solves},
                   {"newton_steps", rep.newton_steps},
                   {"converged", rep.converged},
                   {"wall_seconds", rep.wall_seconds}};
    json trace = json::array();
    for (const auto& t : rep.trace) trace.push_back(trace_json(t));
    j["trace"] = trace;

    json beams = json::array();
    for (const auto& b : sol.beams) beams.push_back(cvec_json(b));
    json r_mats = json::array();
    for (const auto& r : sol.r_mats) r_mats.push_back(cmat_json(r));
    j["solution"] = {{"beams", beams},
                     {"r_mats", r_mats},
                     {"rho", sol.rho},
                     {"lambda", sol.lambda},
                     {"rank_one_residual", sol.rank_one_residual}};
    return j;
}

Verification verify_report(const json& report, double tol) {
    Verification v;
    const ScenarioConfig cfg = scenario_from_json(report.at("config"));
    const auto seed = report.at("seed").get<std::uint64_t>();
    v.digest_ok = scenario_digest(cfg, seed) == report.at("digest").get<std::string>();
    if (!v.digest_ok) v.ok = false;

    const opt::Mode mode = opt::parse_mode(report.at("mode").get<std::string>());
    const ChannelSet ch = synthesize_channels(cfg, seed);
    const opt::Design d = opt::make_design(cfg, ch, mode);
    const auto& sol = report.at("solution");
    std::vector<CVec> beams;
    for (const auto& b : sol.at("beams")) beams.push_back(cvec_from(b));
    std::vector<CMat> r_mats;
    for (const auto& r : sol.at("r_mats")) r_mats.push_back(cmat_from(r));
    const auto rho = sol.at("rho").get<std::vector<double>>();
    const auto lambda = sol.at("lambda").get<std::vector<double>>();
    const std::vector<CMat> w = outer_products(beams);

    const Comparer cmp{tol, v};
    // the stored lambda must still be the certified worst case
    CMat r_sum = CMat::Zero(ch.n_antennas, ch.n_antennas);
    for (const auto& r : r_mats) r_sum += r;
    for (int k = 0; k < d.k(); ++k) {
        double lam = 0.0;
        for (int l = 0; l < d.l(); ++l)
            lam = std::max(lam, opt::certify_lambda(w[k], r_sum, ch.target_channels_est[l], ch.error_radius[l],
                                                    ch.noise_sense_w)
                                    .lambda);
        cmp("solution.lambda[" + std::to_string(k) + "]", lambda[k], lam);
    }

    const opt::Metrics m = opt::evaluate_metrics(d, w, r_mats, rho, lambda);
    const json fresh = metrics_json(m);
    for (const char* group : {"cus", "targets"}) {
        const auto& stored = report.at(group);
        const auto& again = fresh.at(group);
        if (stored.size() != again.size()) {
            v.ok = false;
            v.worst_field = group;
            v.worst_error = std::numeric_limits<double>::infinity();
            return v;
        }
        for (std::size_t i = 0; i < stored.size(); ++i)
            for (const auto& [key, value] : again[i].items())
                cmp(std::string(group) + "[" + std::to_string(i) + "]." + key, stored[i].at(key).get<double>(),
                    value.get<double>());
    }
    for (const auto& [key, value] : fresh.at("power").items())
        cmp("power." + key, report.at("power").at(key).get<double>(), value.get<double>());
    const auto& totals = report.at("totals");
    cmp("totals.sum_semantic_rate", totals.at("sum_semantic_rate").get<double>(), m.sum_semantic_rate);
    cmp("totals.sum_ssr", totals.at("sum_ssr").get<double>(), m.sum_ssr);
    cmp("totals.sum_rcrb", totals.at("sum_rcrb").get<double>(), m.sum_rcrb);
    // the normalized objective depends on scales fixed at the start of the run
    if (!cfg.normalize_objective) cmp("totals.objective", totals.at("objective").get<double>(), m.objective);
    return v;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

namespace {

void write_text(const std::string& text, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

void write_json(const json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw IoError("directory is not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

SolveOutput cmd_solve(const ScenarioConfig& cfg_in, opt::Mode mode, std::uint64_t seed, const fs::path& out_dir,
                      const opt::RunOptions& options) {
    ensure_writable_dir(out_dir);
    ScenarioConfig cfg = cfg_in;
    cfg.seed = seed;
    const ChannelSet ch = synthesize_channels(cfg, seed);
    SolveOutput out;
    out.result = opt::run_algorithm1(cfg, ch, mode, options);
    out.report = make_report(cfg, seed, out.result);
    write_json(out.report, out_dir / "report.json");
    return out;
}

// ---- sweep table ---------------------------------------------------------------

namespace {

bool key_less(const SweepRow& a, const SweepRow& b) {
    if (a.mode != b.mode) return static_cast<int>(a.mode) < static_cast<int>(b.mode);
    if (a.power_dbm != b.power_dbm) return a.power_dbm < b.power_dbm;
    return a.seed < b.seed;
}

bool same_key(const SweepRow& a, double power, opt::Mode mode, std::uint64_t seed) {
    return a.mode == mode && a.seed == seed && std::abs(a.power_dbm - power) <= 1e-9;
}

std::string clean_status(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = c == ',' ? ';' : ' ';
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw IoError("malformed number in sweep table: '" + s + "'");
    return v;
}

}  // namespace

bool SweepTable::upsert(const SweepRow& row, bool replace) {
    for (auto& r : rows_) {
        if (same_key(r, row.power_dbm, row.mode, row.seed)) {
            if (!replace) return false;
            r = row;
            return true;
        }
    }
    rows_.insert(std::upper_bound(rows_.begin(), rows_.end(), row, key_less), row);
    return true;
}

const SweepRow* SweepTable::find(double power_dbm, opt::Mode mode, std::uint64_t seed) const {
    for (const auto& r : rows_)
        if (same_key(r, power_dbm, mode, seed)) return &r;
    return nullptr;
}

std::string SweepTable::to_csv() const {
    std::ostringstream os;
    os << kHeader << "\n";
    for (const auto& r : rows_)
        os << num(r.power_dbm) << ',' << opt::to_string(r.mode) << ',' << r.seed << ',' << num(r.sum_semantic_rate)
           << ',' << num(r.sum_ssr) << ',' << num(r.sum_rcrb) << ',' << num(r.p_comp_w) << ',' << num(r.p_cs_w)
           << ',' << r.iters << ',' << clean_status(r.status) << "\n";
    return os.str();
}

SweepTable SweepTable::from_csv(const std::string& text) {
    SweepTable t;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) return t;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) throw IoError("unexpected sweep table header: " + line);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 10) throw IoError("sweep table row with " + std::to_string(f.size()) + " fields");
        SweepRow r;
        r.power_dbm = parse_double(f[0]);
        try {
            r.mode = opt::parse_mode(f[1]);
        } catch (const ConfigError& e) {
            throw IoError(std::string("sweep table: ") + e.what());
        }
        r.seed = static_cast<std::uint64_t>(parse_double(f[2]));
        r.sum_semantic_rate = parse_double(f[3]);
        r.sum_ssr = parse_double(f[4]);
        r.sum_rcrb = parse_double(f[5]);
        r.p_comp_w = parse_double(f[6]);
        r.p_cs_w = parse_double(f[7]);
        r.iters = static_cast<int>(parse_double(f[8]));
        r.status = f[9];
        t.upsert(r, true);
    }
    return t;
}

SweepTable SweepTable::load(const fs::path& path) {
    if (!fs::exists(path)) return {};
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_csv(ss.str());
}

void SweepTable::save(const fs::path& path) const { write_text(to_csv(), path); }

// ---- sweeps ----------------------------------------------------------------------

namespace {

struct SweepKey {
    double power;
    opt::Mode mode;
    std::uint64_t seed;
};

std::string report_name(const SweepKey& k) {
    return std::string(opt::to_string(k.mode)) + "_" + num(k.power) + "dBm_seed" + std::to_string(k.seed) + ".json";
}

SweepRow run_key(const ScenarioConfig& base, const SweepKey& key, const SweepOptions& options,
                 const fs::path& report_dir) {
    SweepRow row;
    row.power_dbm = key.power;
    row.mode = key.mode;
    row.seed = key.seed;
    try {
        ScenarioConfig cfg = base;
        cfg.power_budget_dbm = key.power;
        cfg.seed = key.seed;
        const ChannelSet ch = synthesize_channels(cfg, key.seed);
        const opt::RunResult res = opt::run_algorithm1(cfg, ch, key.mode, options.run);
        const auto& m = res.solution.metrics;
        row.sum_semantic_rate = m.sum_semantic_rate;
        row.sum_ssr = m.sum_ssr;
        row.sum_rcrb = m.sum_rcrb;
        row.p_comp_w = m.power.comp_w;
        row.p_cs_w = m.power.cs_w;
        row.iters = res.report.outer_iterations;
        row.status = opt::to_string(res.report.status);
        if (options.write_reports) write_json(make_report(cfg, key.seed, res), report_dir / report_name(key));
    } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
    }
    return row;
}

}  // namespace

SweepTable cmd_sweep(const ScenarioConfig& base, const SweepOptions& options, const fs::path& out_dir) {
    if (options.powers_dbm.empty()) throw UsageError("the power list is empty");
    if (options.modes.empty()) throw UsageError("the mode list is empty");
    if (options.seeds.empty()) throw UsageError("the seed list is empty");
    if (options.jobs < 1) throw UsageError("--jobs must be at least 1");
    validate(base);
    ensure_writable_dir(out_dir);
    const fs::path report_dir = out_dir / "reports";
    if (options.write_reports) ensure_writable_dir(report_dir);
    const fs::path table_path = out_dir / "sweep.csv";

    SweepTable table = SweepTable::load(table_path);
    std::vector<SweepKey> keys;
    std::set<std::tuple<int, long long, std::uint64_t>> seen;
    for (auto mode : options.modes)
        for (double p : options.powers_dbm)
            for (auto seed : options.seeds) {
                const auto id = std::make_tuple(static_cast<int>(mode), std::llround(p * 1e9), seed);
                if (!seen.insert(id).second) continue;
                if (!options.force && table.find(p, mode, seed)) continue;
                keys.push_back({p, mode, seed});
            }

    std::mutex write_lock;
    std::atomic<std::size_t> next{0};
    std::exception_ptr write_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < keys.size(); i = next++) {
            const SweepRow row = run_key(base, keys[i], options, report_dir);
            std::lock_guard lock(write_lock);
            if (write_error) return;
            try {
                table.upsert(row, true);
                table.save(table_path);
                if (options.on_row) options.on_row(row);
            } catch (...) {
                write_error = std::current_exception();
                return;
            }
        }
    };
    const int width = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(1, keys.size())));
    if (width <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < width; ++i) pool.emplace_back(worker);
    }
    if (write_error) std::rethrow_exception(write_error);
    if (keys.empty() && !fs::exists(table_path)) table.save(table_path);
    write_plot_data(table, out_dir);
    return table;
}

// ---- plot data ---------------------------------------------------------------------

namespace {

struct Figure {
    const char* stem;
    const char* label;
    double SweepRow::*field;
};

constexpr Figure kFigures[] = {
    {"fig_rate", "sum semantic rate", &SweepRow::sum_semantic_rate},
    {"fig_ssr", "sum semantic secrecy rate", &SweepRow::sum_ssr},
    {"fig_rcrb", "sum RCRB (rad)", &SweepRow::sum_rcrb},
};

bool usable(const SweepRow& r) { return r.status.rfind("error", 0) != 0 && r.status != "infeasible"; }

/// mode -> power -> mean over seeds
std::map<opt::Mode, std::map<double, double>> series(const SweepTable& t, double SweepRow::*field) {
    std::map<opt::Mode, std::map<double, std::pair<double, int>>> acc;
    for (const auto& r : t.rows()) {
        if (!usable(r)) continue;
        auto& cell = acc[r.mode][r.power_dbm];
        cell.first += r.*field;
        cell.second += 1;
    }
    std::map<opt::Mode, std::map<double, double>> out;
    for (const auto& [mode, by_power] : acc)
        for (const auto& [p, cell] : by_power) out[mode][p] = cell.first / cell.second;
    return out;
}

}  // namespace

void write_plot_data(const SweepTable& table, const fs::path& out_dir) {
    std::set<double> powers;
    std::set<opt::Mode> modes;
    for (const auto& r : table.rows()) {
        powers.insert(r.power_dbm);
        modes.insert(r.mode);
    }
    for (const auto& fig : kFigures) {
        const auto s = series(table, fig.field);
        std::ostringstream os;
        os << "power_dbm";
        for (auto m : modes) os << ',' << opt::to_string(m);
        os << "\n";
        for (double p : powers) {
            os << num(p);
            for (auto m : modes) {
                os << ',';
                auto it = s.find(m);
                if (it != s.end() && it->second.count(p)) os << num(it->second.at(p));
            }
            os << "\n";
        }
        write_text(os.str(), out_dir / (std::string(fig.stem) + ".csv"));
    }
}

void write_plots(const SweepTable& table, const fs::path& out_dir) {
    ensure_writable_dir(out_dir);
    constexpr double W = 640, H = 420, L = 80, R = 140, T = 40, B = 60;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (const auto& fig : kFigures) {
        const auto s = series(table, fig.field);
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (const auto& [mode, pts] : s)
            for (const auto& [p, v] : pts) {
                x0 = std::min(x0, p);
                x1 = std::max(x1, p);
                y0 = std::min(y0, v);
                y1 = std::max(y1, v);
            }
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
           << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
           << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (s.empty()) {
            os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
            write_text(os.str(), out_dir / (std::string(fig.stem) + ".svg"));
            continue;
        }
        if (x1 <= x0) x1 = x0 + 1.0;
        if (y1 <= y0) {
            const double pad = std::max(1e-12, std::abs(y0) * 0.05);
            y0 -= pad;
            y1 += pad;
        }
        const double pw = W - L - R, ph = H - T - B;
        auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
        auto sy = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

        os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
           << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double yv = y0 + (y1 - y0) * i / 4.0;
            os << "<text x=\"" << L - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
        }
        std::set<double> xs;
        for (const auto& [mode, pts] : s)
            for (const auto& [p, v] : pts) xs.insert(p);
        for (double xv : xs)
            os << "<text x=\"" << sx(xv) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">" << num(xv)
               << "</text>\n";
        os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">power budget (dBm)</text>\n"
           << "<text x=\"20\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
           << T + ph / 2 << ")\">" << fig.label << "</text>\n";
        int ci = 0;
        for (const auto& [mode, pts] : s) {
            const char* color = colors[ci % 4];
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (const auto& [p, v] : pts) os << sx(p) << ',' << sy(v) << ' ';
            os << "\"/>\n";
            for (const auto& [p, v] : pts)
                os << "<circle cx=\"" << sx(p) << "\" cy=\"" << sy(v) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            const double ly = T + 16 + 18 * ci;
            os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
               << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
               << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << opt::to_string(mode) << "</text>\n";
            ++ci;
        }
        os << "</svg>\n";
        write_text(os.str(), out_dir / (std::string(fig.stem) + ".svg"));
    }
}

// ---- MSE versus CRB ------------------------------------------------------------------

std::vector<sensing::MseCrbRow> cmd_mse_crb(const ScenarioConfig& cfg, const std::vector<double>& snr_db, int trials,
                                            const fs::path& out_dir) {
    if (trials < 100) throw UsageError("mse-crb needs at least 100 trials");
    if (snr_db.empty()) throw UsageError("the SNR list is empty");
    ensure_writable_dir(out_dir);
    sensing::MseCrbSetup setup;
    setup.n_antennas = cfg.n_antennas;
    setup.spacing_ratio = cfg.spacing_ratio;
    if (cfg.num_targets() > 0) {
        setup.theta_rad = deg_to_rad(cfg.target_angles[0]);
        if (!cfg.pathloss_roundtrip.empty() && std::abs(cfg.pathloss_roundtrip[0]) > 0.0)
            setup.beta = cfg.pathloss_roundtrip[0];
    }
    setup.seed = cfg.seed;
    const auto rows = sensing::mse_vs_crb(setup, snr_db, trials);
    std::ostringstream os;
    os << "snr_db,mse,crb,ratio,trials\n";
    for (const auto& r : rows)
        os << num(r.snr_db) << ',' << num(r.mse) << ',' << num(r.crb) << ',' << num(r.mse / r.crb) << ',' << r.trials
           << "\n";
    write_text(os.str(), out_dir / "mse_crb.csv");
    return rows;
}

}  // namespace iscsc::harness
