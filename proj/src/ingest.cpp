#include "ranhpp/ingest.hpp"

#include "ranhpp/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace ranhpp {

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;
    bool have_header = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record.front().empty();
        if (!blank) {
            if (!have_header) {
                table.header = std::move(record);
                have_header = true;
            } else {
                table.rows.push_back(std::move(record));
                table.lines.push_back(record_line);
            }
        }
        record.clear();
    };

    char ch;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (field_started && !field.empty()) throw IoError("stray quote on line " + std::to_string(line));
            in_quotes = true;
            field_started = true;
            break;
        case ',': end_field(); break;
        case '\r':
            if (in.peek() == '\n') break;
            [[fallthrough]];
        case '\n':
            end_record();
            ++line;
            record_line = line;
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes) throw IoError("unterminated quoted field starting on line " + std::to_string(record_line));
    if (field_started || !record.empty()) end_record();
    if (!have_header) throw IoError("CSV input has no header row");
    return table;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Days from 1970-01-01 to the given proleptic Gregorian date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool valid_date(int y, int m, int d) {
    static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12 || d < 1 || d > kDays[m - 1]) return false;
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return !(m == 2 && d == 29 && !leap);
}

// Reads an unsigned integer at `pos`, advancing it.
bool read_int(const std::string& s, std::size_t& pos, int& out) {
    const char* begin = s.data() + pos;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr == begin || out < 0) return false;
    pos += static_cast<std::size_t>(ptr - begin);
    return true;
}

bool expect(const std::string& s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

// Parses "H:MM[:SS][ AM|PM]" from `pos` to the end of the string.
bool parse_clock(const std::string& s, std::size_t pos, bool allow_meridiem, double& seconds) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == 'T')) ++pos;
    if (pos >= s.size()) {
        seconds = 0.0;
        return true;
    }
    int h = 0, mi = 0, sec = 0;
    if (!read_int(s, pos, h) || !expect(s, pos, ':') || !read_int(s, pos, mi)) return false;
    if (expect(s, pos, ':') && !read_int(s, pos, sec)) return false;
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos < s.size()) {
        std::string mer = s.substr(pos);
        std::transform(mer.begin(), mer.end(), mer.begin(), [](unsigned char c) { return std::toupper(c); });
        if (!allow_meridiem || (mer != "AM" && mer != "PM")) return false;
        if (h < 1 || h > 12) return false;
        if (mer == "AM" && h == 12) h = 0;
        if (mer == "PM" && h != 12) h += 12;
    }
    if (h > 23 || mi > 59 || sec > 60) return false;
    seconds = h * 3600.0 + mi * 60.0 + sec;
    return true;
}

bool parse_iso(const std::string& s, double& out) {
    std::size_t pos = 0;
    int y = 0, m = 0, d = 0;
    if (!read_int(s, pos, y) || !expect(s, pos, '-') || !read_int(s, pos, m) || !expect(s, pos, '-') ||
        !read_int(s, pos, d) || !valid_date(y, m, d)) {
        return false;
    }
    double clock = 0.0;
    if (!parse_clock(s, pos, false, clock)) return false;
    out = static_cast<double>(days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))) * 86400.0 + clock;
    return true;
}

bool parse_us(const std::string& s, double& out) {
    std::size_t pos = 0;
    int y = 0, m = 0, d = 0;
    if (!read_int(s, pos, m) || !expect(s, pos, '/') || !read_int(s, pos, d) || !expect(s, pos, '/') ||
        !read_int(s, pos, y) || !valid_date(y, m, d)) {
        return false;
    }
    double clock = 0.0;
    if (!parse_clock(s, pos, true, clock)) return false;
    out = static_cast<double>(days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))) * 86400.0 + clock;
    return true;
}

bool parse_cost(const std::string& text, double& out) {
    std::string s;
    for (char c : text) {
        if (c != '$' && c != ',' && c != ' ') s.push_back(c);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
    const auto it = std::find_if(table.header.begin(), table.header.end(),
                                 [&](const std::string& h) { return trim(h) == name; });
    if (it == table.header.end()) throw IoError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
}

} // namespace

double parse_timestamp(const std::string& text, DateFormat format) {
    const std::string s = trim(text);
    double out = 0.0;
    const bool ok = format == DateFormat::Iso  ? parse_iso(s, out)
                    : format == DateFormat::Us ? parse_us(s, out)
                                               : (parse_iso(s, out) || parse_us(s, out));
    if (!ok) throw DomainError("unrecognised date '" + text + "'");
    return out;
}

double RawAccident::total_cost() const {
    double sum = 0.0;
    for (double c : costs) sum += c;
    return sum;
}

LoadReport load_accidents(std::istream& in, const IngestConfig& config) {
    const CsvTable table = read_csv(in);
    const std::size_t date_col = column_index(table, config.columns.date);
    std::array<std::size_t, kCostFields> cost_cols{};
    for (std::size_t k = 0; k < kCostFields; ++k) cost_cols[k] = column_index(table, config.columns.costs[k]);
    std::array<std::size_t, kRiskFactors> factor_cols{};
    for (std::size_t k = 0; k < kRiskFactors; ++k) factor_cols[k] = column_index(table, config.columns.factors[k]);

    LoadReport report;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 1;
        auto cell = [&](std::size_t col) { return col < row.size() ? trim(row[col]) : std::string{}; };
        RawAccident acc;
        acc.row = row_no;
        acc.date_text = cell(date_col);
        try {
            acc.timestamp = parse_timestamp(acc.date_text, config.date_format);
        } catch (const DomainError& e) {
            report.rejects.push_back({row_no, e.what()});
            continue;
        }
        bool bad = false;
        for (std::size_t k = 0; k < kCostFields && !bad; ++k) {
            const std::string text = cell(cost_cols[k]);
            if (text.empty()) {
                acc.costs[k] = 0.0;
                report.warnings.push_back("row " + std::to_string(row_no) + ": missing '" + config.columns.costs[k] +
                                          "' counted as 0");
            } else if (!parse_cost(text, acc.costs[k])) {
                report.rejects.push_back({row_no, "unparseable cost '" + text + "' in '" + config.columns.costs[k] + "'"});
                bad = true;
            } else if (acc.costs[k] < 0.0) {
                report.rejects.push_back({row_no, "negative cost in '" + config.columns.costs[k] + "'"});
                bad = true;
            }
        }
        if (bad) continue;
        for (std::size_t k = 0; k < kRiskFactors; ++k) {
            acc.factors[k] = cell(factor_cols[k]);
            if (acc.factors[k].empty()) {
                acc.factors[k] = "NA";
                report.warnings.push_back("row " + std::to_string(row_no) + ": empty '" + config.columns.factors[k] +
                                          "' coded as category NA");
            }
        }
        report.accidents.push_back(std::move(acc));
    }
    std::stable_sort(report.accidents.begin(), report.accidents.end(),
                     [](const RawAccident& a, const RawAccident& b) { return a.timestamp < b.timestamp; });
    return report;
}

LoadReport load_accidents(const std::string& path, const IngestConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return load_accidents(in, config);
}

std::string to_string(EncodingStrategy s) {
    return s == EncodingStrategy::Lexicographic ? "lexicographic" : "frequency";
}

EncodingStrategy parse_encoding_strategy(const std::string& name) {
    if (name == "lexicographic") return EncodingStrategy::Lexicographic;
    if (name == "frequency") return EncodingStrategy::Frequency;
    throw ConfigError("unknown encoding strategy '" + name + "'");
}

double EncodingMap::code(std::size_t factor, const std::string& category) const {
    if (factor >= kRiskFactors) throw DimensionError("factor index out of range");
    const auto& cats = categories[factor];
    const auto it = std::find(cats.begin(), cats.end(), category);
    if (it == cats.end()) {
        throw DomainError("category '" + category + "' of factor " + kFactorNames[factor] +
                          " was not seen when the encoding was built");
    }
    return static_cast<double>(it - cats.begin() + 1);
}

std::vector<double> EncodingMap::encode(const std::array<std::string, kRiskFactors>& values) const {
    std::vector<double> z(kRiskFactors);
    for (std::size_t k = 0; k < kRiskFactors; ++k) z[k] = code(k, values[k]);
    return z;
}

EncodingMap build_encoding(std::span<const RawAccident> accidents, EncodingStrategy strategy) {
    EncodingMap map;
    map.strategy = strategy;
    for (std::size_t k = 0; k < kRiskFactors; ++k) {
        std::map<std::string, std::size_t> counts;
        for (const auto& a : accidents) ++counts[a.factors[k]];
        if (counts.empty()) throw DomainError("factor " + kFactorNames[k] + " has no categories");
        std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
        if (strategy == EncodingStrategy::Frequency) {
            std::stable_sort(entries.begin(), entries.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
        }
        for (auto& [name, count] : entries) map.categories[k].push_back(name);
    }
    return map;
}

DeriveReport derive_events(std::span<const RawAccident> accidents, const EncodingMap& encoding,
                           const DeriveConfig& config) {
    DeriveReport report;
    if (accidents.empty()) return report;
    report.origin = accidents.front().timestamp;
    double prev_hours = 0.0;
    for (std::size_t i = 1; i < accidents.size(); ++i) {
        const RawAccident& a = accidents[i];
        if (a.timestamp < accidents[i - 1].timestamp) throw DomainError("accidents are not sorted by time");
        double hours = (a.timestamp - report.origin) / 3600.0;
        if (!(hours > prev_hours)) {
            if (config.ties == TiePolicy::Reject) {
                throw DomainError("rows " + std::to_string(accidents[i - 1].row) + " and " + std::to_string(a.row) +
                                  " share a timestamp");
            }
            hours = prev_hours + config.tie_epsilon_hours;
            report.warnings.push_back("row " + std::to_string(a.row) + ": timestamp tie moved " +
                                      std::to_string(config.tie_epsilon_hours) + " h after its predecessor");
        }
        FailureEvent ev;
        ev.index = i + 1;
        ev.t = hours;
        ev.x = hours - prev_hours;
        ev.y = a.total_cost();
        ev.z = encoding.encode(a.factors);
        report.events.push_back(std::move(ev));
        prev_hours = hours;
    }
    return report;
}

} // namespace ranhpp
