#include "ranhpp/io.hpp"

#include "ranhpp/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace ranhpp {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw IoError("cannot format number");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) throw IoError("malformed number '" + text + "'");
    return v;
}

void write_comment_metadata(std::ostream& out, const Metadata& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << ": " << v << '\n';
}

namespace {

ordered_json meta_json(const Metadata& meta) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

Metadata meta_from_json(const json& j) {
    Metadata meta;
    if (!j.is_object()) return meta;
    for (const auto& [k, v] : j.items()) meta.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    return meta;
}

// JSON has no infinities; they are stored as strings so the file round-trips.
ordered_json num(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double get_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_double(j.get<std::string>());
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    throw IoError("expected a number, got " + j.dump());
}

const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
    return j.at(key);
}

// Splits leading "# key: value" lines off a stream; returns the rest.
std::string split_comments(std::istream& in, Metadata& meta) {
    std::string line;
    std::ostringstream rest;
    bool body = false;
    while (std::getline(in, line)) {
        if (!body && !line.empty() && line.front() == '#') {
            std::string s = line.substr(1);
            if (!s.empty() && s.front() == ' ') s.erase(0, 1);
            const auto colon = s.find(": ");
            if (colon != std::string::npos) meta.emplace_back(s.substr(0, colon), s.substr(colon + 2));
            continue;
        }
        body = true;
        rest << line << '\n';
    }
    return rest.str();
}

ordered_json convergence_json(const ConvergenceReport& c) {
    ordered_json j;
    j["converged"] = c.converged;
    j["method"] = c.method;
    j["status"] = c.status;
    j["iterations"] = c.iterations;
    j["simplex_size"] = num(c.simplex_size);
    j["gradient_norm"] = num(c.gradient_norm);
    return j;
}

ConvergenceReport convergence_from_json(const json& j) {
    ConvergenceReport c;
    if (!j.is_object()) return c;
    c.converged = j.value("converged", false);
    c.method = j.value("method", "");
    c.status = j.value("status", "");
    c.iterations = j.value("iterations", std::size_t{0});
    if (j.contains("simplex_size")) c.simplex_size = get_num(j.at("simplex_size"));
    if (j.contains("gradient_norm")) c.gradient_norm = get_num(j.at("gradient_norm"));
    return c;
}

ordered_json candidates_json(const std::vector<CandidateScore>& cands) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : cands) {
        ordered_json j;
        j["name"] = c.name;
        j["log_lik"] = num(c.log_lik);
        j["k"] = c.k;
        j["aic"] = num(c.aic);
        j["converged"] = c.converged;
        if (!c.error.empty()) j["error"] = c.error;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<CandidateScore> candidates_from_json(const json& arr) {
    std::vector<CandidateScore> out;
    if (!arr.is_array()) return out;
    for (const auto& j : arr) {
        CandidateScore c;
        c.name = j.value("name", "");
        c.log_lik = get_num(j.value("log_lik", json()));
        c.k = j.value("k", 0);
        c.aic = get_num(j.value("aic", json()));
        c.converged = j.value("converged", false);
        c.error = j.value("error", "");
        out.push_back(std::move(c));
    }
    return out;
}

ordered_json params_json(const ProcessParams& p) {
    ordered_json j;
    j["intensity"] = {{"kind", to_string(p.intensity.kind())}, {"gamma", p.intensity.gamma()}};
    if (p.intensity.kind() != IntensityKind::Homogeneous) j["intensity"]["eta"] = p.intensity.eta();
    j["beta"] = p.risk.beta;
    j["mu"] = p.cost_rate;
    j["copula"] = {{"family", to_string(p.copula.family())}};
    if (p.copula.family() != CopulaFamily::Independence) j["copula"]["theta"] = p.copula.theta();
    j["copula"]["tau"] = p.copula.tau();
    return j;
}

ProcessParams params_from(const json& j) {
    try {
        const json& in = member(j, "intensity");
        const IntensityKind kind = parse_intensity_kind(member(in, "kind").get<std::string>());
        const double gamma = get_num(member(in, "gamma"));
        const double eta = kind == IntensityKind::Homogeneous ? 1.0 : get_num(member(in, "eta"));
        RiskModel risk;
        for (const auto& b : member(j, "beta")) risk.beta.push_back(get_num(b));
        const json& cj = member(j, "copula");
        const CopulaFamily family = parse_copula_family(member(cj, "family").get<std::string>());
        const CopulaSpec copula = family == CopulaFamily::Independence
                                      ? CopulaSpec::independence()
                                      : (cj.contains("theta") ? CopulaSpec::make(family, get_num(cj.at("theta")))
                                                              : CopulaSpec::from_tau(family, get_num(member(cj, "tau"))));
        ProcessParams p{IntensityModel::make(kind, gamma, eta), std::move(risk), get_num(member(j, "mu")), copula};
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed parameters: ") + e.what());
    } catch (const ConfigError& e) {
        throw IoError(std::string("malformed parameters: ") + e.what());
    }
}

ordered_json encoding_json(const EncodingMap& enc) {
    ordered_json j;
    j["strategy"] = to_string(enc.strategy);
    ordered_json factors = ordered_json::object();
    for (std::size_t k = 0; k < kRiskFactors; ++k) factors[kFactorNames[k]] = enc.categories[k];
    j["factors"] = std::move(factors);
    return j;
}

EncodingMap encoding_from(const json& j) {
    EncodingMap enc;
    try {
        enc.strategy = parse_encoding_strategy(member(j, "strategy").get<std::string>());
        const json& f = member(j, "factors");
        for (std::size_t k = 0; k < kRiskFactors; ++k) {
            enc.categories[k] = member(f, kFactorNames[k].c_str()).get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed encoding: ") + e.what());
    } catch (const ConfigError& e) {
        throw IoError(std::string("malformed encoding: ") + e.what());
    }
    return enc;
}

json parse_json(std::istream& in, const std::string& what) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("cannot parse " + what + ": " + e.what());
    }
}

ordered_json result_json(const RunLengthResult& r) {
    return {{"arl", num(r.arl)}, {"se", num(r.std_error)}, {"n_reps", r.n_reps}, {"n_capped", r.n_capped}};
}

} // namespace

void write_events_csv(std::ostream& out, std::span<const FailureEvent> events, std::size_t dimension,
                      const Metadata& meta) {
    write_comment_metadata(out, meta);
    out << "i,t,x,y";
    for (std::size_t k = 1; k <= dimension; ++k) out << ",z" << k;
    out << '\n';
    for (const auto& e : events) {
        if (e.z.size() != dimension) throw DimensionError("event covariate length differs from the header");
        out << e.index << ',' << format_double(e.t) << ',' << format_double(e.x) << ',' << format_double(e.y);
        for (double z : e.z) out << ',' << format_double(z);
        out << '\n';
    }
}

EventsFile read_events_csv(std::istream& in) {
    EventsFile file;
    std::istringstream body(split_comments(in, file.meta));
    const CsvTable table = read_csv(body);
    const auto& h = table.header;
    if (h.size() < 4 || h[0] != "i" || h[1] != "t" || h[2] != "x" || h[3] != "y") {
        throw IoError("events file must start with columns i,t,x,y");
    }
    file.dimension = h.size() - 4;
    for (std::size_t k = 0; k < file.dimension; ++k) {
        if (h[4 + k] != "z" + std::to_string(k + 1)) throw IoError("unexpected column '" + h[4 + k] + "'");
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != h.size()) {
            throw IoError("events file line " + std::to_string(table.lines[r]) + ": expected " +
                          std::to_string(h.size()) + " fields");
        }
        FailureEvent e;
        std::size_t idx = 0;
        const auto [ptr, ec] = std::from_chars(row[0].data(), row[0].data() + row[0].size(), idx);
        if (ec != std::errc() || ptr != row[0].data() + row[0].size()) {
            throw IoError("events file line " + std::to_string(table.lines[r]) + ": bad index '" + row[0] + "'");
        }
        e.index = idx;
        e.t = parse_double(row[1]);
        e.x = parse_double(row[2]);
        e.y = parse_double(row[3]);
        for (std::size_t k = 0; k < file.dimension; ++k) e.z.push_back(parse_double(row[4 + k]));
        file.events.push_back(std::move(e));
    }
    return file;
}

EventsFile read_events_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_events_csv(in);
}

void write_chart_csv(std::ostream& out, std::span<const ChartPoint> points, const Metadata& meta) {
    write_comment_metadata(out, meta);
    out << "i,t,x,y,w,lcl,ucl,signal\n";
    for (const auto& p : points) {
        out << p.index << ',' << format_double(p.t) << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
            << format_double(p.w) << ',' << format_double(p.lcl) << ',' << format_double(p.ucl) << ','
            << to_string(p.signal) << '\n';
    }
}

void write_chart_json(std::ostream& out, std::span<const ChartPoint> points, ChartMode mode, const Metadata& meta) {
    ordered_json j;
    j["meta"] = meta_json(meta);
    j["mode"] = to_string(mode);
    const SignalSummary s = summarize(points);
    j["summary"] = {{"points", s.points}, {"below_lcl", s.below_lcl}, {"above_ucl", s.above_ucl}};
    ordered_json arr = ordered_json::array();
    for (const auto& p : points) {
        arr.push_back({{"i", p.index},
                       {"t", num(p.t)},
                       {"x", num(p.x)},
                       {"y", num(p.y)},
                       {"w", num(p.w)},
                       {"lcl", num(p.lcl)},
                       {"ucl", num(p.ucl)},
                       {"signal", to_string(p.signal)}});
    }
    j["points"] = std::move(arr);
    out << j.dump(2) << '\n';
}

void write_chart_svg(std::ostream& out, std::span<const ChartPoint> points, ChartMode mode, const Metadata& meta,
                     bool log_scale) {
    constexpr double width = 960, height = 480, left = 80, right = 20, top = 40, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : points) {
        for (double v : {p.w, p.lcl, p.ucl}) {
            if (!std::isfinite(v) || (log_scale && v <= 0.0)) continue;
            const double s = log_scale ? std::log10(v) : v;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const std::size_t n = points.size();
    const double i0 = n ? static_cast<double>(points.front().index) : 0.0;
    const double i1 = n ? static_cast<double>(points.back().index) : 1.0;
    const double span_i = i1 > i0 ? i1 - i0 : 1.0;
    auto px = [&](double i) { return left + (n > 1 ? (i - i0) / span_i * plot_w : plot_w / 2); };
    auto py = [&](double v) {
        const double s = log_scale ? std::log10(v) : v;
        return top + (hi - s) / (hi - lo) * plot_h;
    };
    auto drawable = [&](double v) { return std::isfinite(v) && (!log_scale || v > 0.0); };

    out << std::fixed << std::setprecision(2);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n";
    for (const auto& [k, v] : meta) {
        std::string safe = v;
        for (std::size_t pos; (pos = safe.find("--")) != std::string::npos;) safe.replace(pos, 2, "- -");
        out << "  " << k << ": " << safe << '\n';
    }
    out << "-->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    const std::string stat = mode == ChartMode::AC ? "W = Y/X" : (mode == ChartMode::TCOnly ? "Y" : "X");
    const SignalSummary s = summarize(points);
    out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << to_string(mode) << " chart: " << stat << ", "
        << s.below_lcl << " below LCL, " << s.above_ucl << " above UCL</text>\n";
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">event index</text>\n";
    out << "<text transform=\"translate(18," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << (log_scale ? "log10 " : "") << stat << "</text>\n";

    // Vertical ticks: integer decades on a log axis, five even steps otherwise.
    std::vector<double> ticks;
    if (log_scale) {
        for (double d = std::ceil(lo); d <= hi; d += 1.0) ticks.push_back(d);
    } else {
        for (int k = 0; k <= 4; ++k) ticks.push_back(lo + (hi - lo) * k / 4.0);
    }
    for (double tk : ticks) {
        const double y = top + (hi - tk) / (hi - lo) * plot_h;
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">";
        if (log_scale) {
            out << "1e" << static_cast<int>(tk);
        } else {
            out << std::setprecision(3) << std::defaultfloat << tk << std::fixed << std::setprecision(2);
        }
        out << "</text>\n";
    }
    if (n > 0) {
        for (double iv : {i0, i1}) {
            out << "<text x=\"" << px(iv) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
                << static_cast<std::size_t>(iv) << "</text>\n";
        }
    }

    auto polyline = [&](auto value, const char* colour, const char* dash) {
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\"" << dash << " points=\"";
        for (const auto& p : points) {
            const double v = value(p);
            if (drawable(v)) out << px(static_cast<double>(p.index)) << ',' << py(v) << ' ';
        }
        out << "\"/>\n";
    };
    polyline([](const ChartPoint& p) { return p.ucl; }, "#b03030", " stroke-dasharray=\"6 3\"");
    polyline([](const ChartPoint& p) { return p.lcl; }, "#b03030", " stroke-dasharray=\"6 3\"");
    polyline([](const ChartPoint& p) { return p.w; }, "#3050a0", "");
    for (const auto& p : points) {
        if (!drawable(p.w)) continue;
        const bool sig = p.signal != Signal::InControl;
        out << "<circle cx=\"" << px(static_cast<double>(p.index)) << "\" cy=\"" << py(p.w) << "\" r=\""
            << (sig ? 4.0 : 2.0) << "\" fill=\"" << (sig ? "#d02020" : "#3050a0") << "\"/>\n";
    }
    out << "</svg>\n";
    out << std::defaultfloat << std::setprecision(6);
}

void write_model_json(std::ostream& out, const FitResult& fit, const std::optional<EncodingMap>& encoding,
                      const Metadata& meta) {
    ordered_json j;
    j["meta"] = meta_json(meta);
    ordered_json m = params_json(fit.params);
    m["hazard_ratios"] = fit.hazard_ratios;
    m["log_lik"] = {{"tbe", num(fit.log_lik_x)},
                    {"cost", num(fit.log_lik_y)},
                    {"copula", num(fit.log_lik_c)},
                    {"total", num(fit.log_lik_x + fit.log_lik_y + fit.log_lik_c)}};
    m["k"] = fit.k;
    m["aic"] = num(fit.aic);
    m["n_events"] = fit.n_events;
    m["convergence"] = {{"intensity", convergence_json(fit.convergence)},
                        {"copula", convergence_json(fit.copula_convergence)}};
    m["candidates"] = {{"intensity", candidates_json(fit.intensity_candidates)},
                       {"copula", candidates_json(fit.copula_candidates)}};
    j["model"] = std::move(m);
    if (encoding) j["encoding"] = encoding_json(*encoding);
    out << j.dump(2) << '\n';
}

ModelFile read_model_json(std::istream& in) {
    const json j = parse_json(in, "model file");
    ModelFile file;
    try {
        file.meta = meta_from_json(j.value("meta", json::object()));
        const json& m = member(j, "model");
        file.fit.params = params_from(m);
        file.fit.hazard_ratios = m.value("hazard_ratios", std::vector<double>{});
        if (m.contains("log_lik")) {
            const json& ll = m.at("log_lik");
            file.fit.log_lik_x = get_num(ll.value("tbe", json(0.0)));
            file.fit.log_lik_y = get_num(ll.value("cost", json(0.0)));
            file.fit.log_lik_c = get_num(ll.value("copula", json(0.0)));
        }
        file.fit.k = m.value("k", 0);
        file.fit.aic = get_num(m.value("aic", json()));
        file.fit.n_events = m.value("n_events", std::size_t{0});
        if (m.contains("convergence")) {
            file.fit.convergence = convergence_from_json(m.at("convergence").value("intensity", json()));
            file.fit.copula_convergence = convergence_from_json(m.at("convergence").value("copula", json()));
        }
        if (m.contains("candidates")) {
            file.fit.intensity_candidates = candidates_from_json(m.at("candidates").value("intensity", json()));
            file.fit.copula_candidates = candidates_from_json(m.at("candidates").value("copula", json()));
        }
        if (j.contains("encoding")) file.encoding = encoding_from(j.at("encoding"));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed model file: ") + e.what());
    }
    return file;
}

ModelFile read_model_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_model_json(in);
}

std::string params_to_json(const ProcessParams& params) { return params_json(params).dump(2); }

ProcessParams params_from_json(const std::string& text) {
    std::istringstream in(text);
    const json j = parse_json(in, "parameters");
    // A full model file carries its parameters under "model".
    return params_from(j.is_object() && j.contains("model") ? j.at("model") : j);
}

void write_grid_csv(std::ostream& out, std::span<const GridCell> cells, const Metadata& meta) {
    write_comment_metadata(out, meta);
    out << "tau,beta,delta_gamma,delta_eta,delta_mu,arl,se,n_reps,n_capped\n";
    for (const auto& c : cells) {
        out << format_double(c.tau) << ',' << format_double(c.beta) << ',' << format_double(c.shift.delta_gamma) << ','
            << format_double(c.shift.delta_eta) << ',' << format_double(c.shift.delta_mu) << ','
            << format_double(c.result.arl) << ',' << format_double(c.result.std_error) << ',' << c.result.n_reps
            << ',' << c.result.n_capped << '\n';
    }
}

void write_grid_json(std::ostream& out, std::span<const GridCell> cells, const Metadata& meta) {
    ordered_json j;
    j["meta"] = meta_json(meta);
    ordered_json arr = ordered_json::array();
    for (const auto& c : cells) {
        ordered_json row = {{"tau", c.tau},
                            {"beta", c.beta},
                            {"delta_gamma", c.shift.delta_gamma},
                            {"delta_eta", c.shift.delta_eta},
                            {"delta_mu", c.shift.delta_mu}};
        row.update(result_json(c.result));
        arr.push_back(std::move(row));
    }
    j["cells"] = std::move(arr);
    out << j.dump(2) << '\n';
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows, const Metadata& meta) {
    write_comment_metadata(out, meta);
    out << "delta_gamma,delta_eta,arl_risk_adjusted,se_risk_adjusted,arl_no_risk,se_no_risk,n_capped_risk_adjusted,"
           "n_capped_no_risk\n";
    for (const auto& r : rows) {
        out << format_double(r.delta_gamma) << ',' << format_double(r.delta_eta) << ','
            << format_double(r.risk_adjusted.arl) << ',' << format_double(r.risk_adjusted.std_error) << ','
            << format_double(r.unadjusted.arl) << ',' << format_double(r.unadjusted.std_error) << ','
            << r.risk_adjusted.n_capped << ',' << r.unadjusted.n_capped << '\n';
    }
}

void write_comparison_json(std::ostream& out, std::span<const ComparisonRow> rows, const Metadata& meta) {
    ordered_json j;
    j["meta"] = meta_json(meta);
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back({{"delta_gamma", r.delta_gamma},
                       {"delta_eta", r.delta_eta},
                       {"risk_adjusted", result_json(r.risk_adjusted)},
                       {"no_risk", result_json(r.unadjusted)}});
    }
    j["rows"] = std::move(arr);
    out << j.dump(2) << '\n';
}

} // namespace ranhpp
