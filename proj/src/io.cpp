#include "biharm/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // keep doubles recognisable as such after a round trip
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

void dump(const json& j, std::ostringstream& os, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << json(it.key()).dump() << ": ";
            dump(it.value(), os, indent + 2);
        }
        os << "\n" << close << "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ",\n";
            os << pad;
            dump(j[i], os, indent + 2);
        }
        os << "\n" << close << "]";
        return;
    }
    case json::value_t::number_float:
        os << fmt_double(j.get<double>());
        return;
    default:
        os << j.dump();
    }
}

}  // namespace

json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string canonical_json(const json& j) {
    std::ostringstream os;
    dump(j, os, 0);
    os << "\n";
    return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = fs::path(path + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string field_csv(const RadialField& u) {
    std::string out = "r,u\n";
    char buf[96];
    for (int i = 0; i < u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.grid->nodes[i], u[i]);
        out += buf;
    }
    return out;
}

void save_field_csv(const std::string& path, const RadialField& u) { write_atomic(path, field_csv(u)); }

RadialField parse_field_csv(const std::string& text, int dimension) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("empty field file", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "r,u") throw parse_error("field file must start with the header r,u", 0);
    std::vector<double> r, u;
    int lineno = 1;
    std::size_t offset = static_cast<std::size_t>(in.tellg());
    std::size_t line_start = offset;
    while (std::getline(in, line)) {
        ++lineno;
        line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw parse_error("line " + std::to_string(lineno) + ": expected r,u", line_start);
        char* end = nullptr;
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        const double rv = std::strtod(a.c_str(), &end);
        if (end == a.c_str() || *end) throw parse_error("line " + std::to_string(lineno) + ": bad radius", line_start);
        const double uv = std::strtod(b.c_str(), &end);
        if (end == b.c_str() || *end) throw parse_error("line " + std::to_string(lineno) + ": bad value", line_start);
        r.push_back(rv);
        u.push_back(uv);
    }
    if (r.size() < 2) throw parse_error("field file has too few rows", text.size());
    GridPtr g = build_grid(r.back(), static_cast<int>(r.size()), dimension);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (std::abs(r[i] - g->nodes[static_cast<Eigen::Index>(i)]) > 1e-12 * g->r_max)
            throw parse_error("field file radii are not a uniform grid starting at 0", 0);
    return RadialField(g, Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size())));
}

RadialField load_field_csv(const std::string& path, int dimension) {
    return parse_field_csv(read_file(path), dimension);
}

json to_json(const FunctionalReport& r) {
    const MassTerms& m = r.mass_terms;
    return json{{"energy_I", number(r.energy_I)},
                {"pohozaev_G", number(r.pohozaev_G)},
                {"nehari_N", number(r.nehari_N)},
                {"mass_terms",
                 {{"l2_sq", number(m.l2_sq)},
                  {"lap_l2_sq", number(m.lap_l2_sq)},
                  {"pot_l2_sq", number(m.pot_l2_sq)},
                  {"exp_mass", number(m.exp_mass)},
                  {"exp_weighted", number(m.exp_weighted)},
                  {"F_mass", number(m.F_mass)},
                  {"fu_mass", number(m.fu_mass)}}}};
}

json to_json(const SolveReport& r, bool with_trace) {
    json j{{"mode", r.mode},
           {"objective", number(r.objective)},
           {"residual_weak", number(r.residual_weak)},
           {"constraint_residual", number(r.constraint_residual)},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"stop_reason", r.stop_reason},
           {"grid", {{"r_max", r.field.grid ? r.field.grid->r_max : 0.0}, {"n_points", r.field.size()}}}};
    if (r.mode == "pohozaev") {
        j["lagrange_theta"] = number(r.lagrange_theta);
        j["kkt_residual"] = number(r.kkt_residual);
        j["gauge_multiplier"] = number(r.gauge_multiplier);
        j["rearrangements_accepted"] = r.rearrangements_accepted;
        j["rearrangements_rejected"] = r.rearrangements_rejected;
        if (r.recovered) {
            j["recovered"] = {{"r_max", r.recovered->grid->r_max},
                              {"residual_weak", number(r.recovered_residual_weak)},
                              {"energy_I", number(r.recovered_energy)}};
        }
    }
    if (with_trace) {
        json tr = json::array();
        for (const TraceEntry& e : r.trace)
            tr.push_back({{"iteration", e.iteration},
                          {"objective", number(e.objective)},
                          {"constraint_residual", number(e.constraint_residual)},
                          {"residual", number(e.residual)}});
        j["trace"] = std::move(tr);
    }
    return j;
}

json to_json(const GapReport& r) {
    return json{{"m_V", number(r.m_V)},
                {"m_infty", number(r.m_infty)},
                {"gap", number(r.gap)},
                {"both_positive", r.both_positive},
                {"comparison_level", number(r.comparison_level)},
                {"comparison_scale", number(r.comparison_scale)},
                {"solve_V", to_json(r.solve_V, false)},
                {"solve_infty", to_json(r.solve_infty, false)}};
}

json to_json(const AdamsRatioReport& r) {
    json samples = json::array();
    for (const RatioSample& s : r.samples)
        samples.push_back({{"family", s.family}, {"param", number(s.param)}, {"ratio", number(s.ratio)}});
    return json{{"L", number(r.L)},
                {"ratio_lower_bound", number(r.ratio_lower_bound)},
                {"argmax", {{"family", r.argmax_family}, {"param", number(r.argmax_param)}, {"amplitude", number(r.argmax_amplitude)}}},
                {"threshold_R", number(r.threshold_R)},
                {"verdict", to_string(r.verdict)},
                {"moser_tail_slope", number(r.moser_tail_slope)},
                {"samples", std::move(samples)}};
}

json to_json(const GrowthClassification& c) {
    return json{{"K", number(c.K)},
                {"limsup_infinity", number(c.limsup_infinity)},
                {"limsup_origin", number(c.limsup_origin)},
                {"slope_infinity", number(c.slope_infinity)},
                {"slope_origin", number(c.slope_origin)},
                {"rate_gap", number(c.rate_gap)},
                {"rate_class", to_string(c.rate_class)},
                {"t_max_used", number(c.t_max_used)},
                {"bounded_verdict", to_string(c.bounded_verdict)},
                {"compact_verdict", to_string(c.compact_verdict)}};
}

json to_json(const ConditionReport& c) {
    return json{{"ar_mu", number(c.ar_mu)},
                {"ar_worst_ratio", number(c.ar_worst_ratio)},
                {"ar_worst_at", number(c.ar_worst_at)},
                {"ar_above_two", c.ar_above_two},
                {"ar_holds", c.ar_holds},
                {"ar_boundary", c.ar_boundary},
                {"m0", number(c.m0)},
                {"t0", number(c.t0)},
                {"cond_ii_holds", c.cond_ii_holds},
                {"alpha0_estimate", number(c.alpha0_estimate)},
                {"critical", c.critical}};
}

json to_json(const RearrangeChecks& c) {
    return json{{"l2_u", number(c.l2_u)},
                {"l2_w", number(c.l2_w)},
                {"mass_rel_err", number(c.mass_rel_err)},
                {"lap_u", number(c.lap_u)},
                {"lap_w", number(c.lap_w)},
                {"exp_u", number(c.exp_u)},
                {"exp_w", number(c.exp_w)},
                {"mass_ok", c.mass_ok},
                {"lap_ok", c.lap_ok},
                {"exp_ok", c.exp_ok},
                {"flagged", c.flagged},
                {"escalate", c.escalate}};
}

json to_json(const WitnessReport& w) {
    json rows = json::array();
    for (const WitnessRow& r : w.rows)
        rows.push_back({{"k", r.k},
                        {"a_k", number(r.a_k)},
                        {"b_k", number(r.b_k)},
                        {"R_k", number(r.R_k)},
                        {"S_k", number(r.S_k)},
                        {"c_k", number(r.c_k)},
                        {"l2_sq", number(r.l2_sq)},
                        {"lap_l2_sq", number(r.lap_l2_sq)},
                        {"G", number(r.G)},
                        {"ratio", number(r.ratio)}});
    return json{{"mode", to_string(w.mode)},
                {"K", number(w.K)},
                {"pattern", w.pattern},
                {"pattern_holds", w.pattern_holds},
                {"rows", std::move(rows)}};
}

}  // namespace biharm
