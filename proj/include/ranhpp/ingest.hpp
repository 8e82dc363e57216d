#pragma once

#include "ranhpp/tbe_process.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ranhpp {

/// Header plus rows of a CSV file (RFC 4180 quoting; quoted fields may span lines).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based physical line on which each row starts.
    std::vector<std::size_t> lines;
};

CsvTable read_csv(std::istream& in);

inline constexpr std::size_t kCostFields = 6;
inline constexpr std::size_t kRiskFactors = 5;

/// Short names of the five categorical risk factors, in covariate order.
inline const std::array<std::string, kRiskFactors> kFactorNames = {"PL", "PT", "LT", "AS", "CC"};

/// Source column names. Defaults follow the public pipeline-accident export.
struct ColumnMapping {
    std::string date = "Accident Date/Time";
    std::array<std::string, kCostFields> costs = {
        "Property Damage Costs",   "Lost Commodity Costs",           "Public/Private Property Damage Costs",
        "Emergency Response Costs", "Environmental Remediation Costs", "Other Costs"};
    std::array<std::string, kRiskFactors> factors = {"Pipeline Location", "Pipeline Type", "Liquid Type",
                                                     "Accident State", "Cause Category"};
};

enum class DateFormat { Auto, Iso, Us };

struct IngestConfig {
    ColumnMapping columns;
    DateFormat date_format = DateFormat::Auto;
};

/// Seconds since 1970-01-01 for "YYYY-MM-DD[ HH:MM[:SS]]" or "M/D/YYYY[ H:MM[:SS][ AM|PM]]".
/// Throws DomainError when the text matches neither.
double parse_timestamp(const std::string& text, DateFormat format = DateFormat::Auto);

struct RawAccident {
    /// 1-based data row in the source file.
    std::size_t row = 0;
    double timestamp = 0.0;
    std::string date_text;
    std::array<double, kCostFields> costs{};
    std::array<std::string, kRiskFactors> factors;

    double total_cost() const;
};

struct Reject {
    std::size_t row = 0;
    std::string reason;
};

struct LoadReport {
    /// Sorted by timestamp (stable for duplicates).
    std::vector<RawAccident> accidents;
    std::vector<Reject> rejects;
    std::vector<std::string> warnings;
};

/// Missing cost fields count as 0 with a warning; empty categories become "NA"
/// with a warning. Unparseable rows are collected in `rejects`.
LoadReport load_accidents(std::istream& in, const IngestConfig& config = {});
LoadReport load_accidents(const std::string& path, const IngestConfig& config = {});

enum class EncodingStrategy { Lexicographic, Frequency };

std::string to_string(EncodingStrategy s);
EncodingStrategy parse_encoding_strategy(const std::string& name);

/// Per-factor category tables; the code of a category is its 1-based position.
struct EncodingMap {
    EncodingStrategy strategy = EncodingStrategy::Lexicographic;
    std::array<std::vector<std::string>, kRiskFactors> categories;

    /// Throws DomainError naming the factor for an unseen category.
    double code(std::size_t factor, const std::string& category) const;
    std::vector<double> encode(const std::array<std::string, kRiskFactors>& values) const;
};

/// Lexicographic: categories sorted by byte order. Frequency: most frequent first,
/// ties broken lexicographically. Throws DomainError if a factor has no categories.
EncodingMap build_encoding(std::span<const RawAccident> accidents,
                           EncodingStrategy strategy = EncodingStrategy::Lexicographic);

enum class TiePolicy { Perturb, Reject };

struct DeriveConfig {
    TiePolicy ties = TiePolicy::Perturb;
    double tie_epsilon_hours = 0.1;
};

struct DeriveReport {
    std::vector<FailureEvent> events;
    std::vector<std::string> warnings;
    /// Timestamp of the first record, which seeds time zero.
    double origin = 0.0;
};

/// Failure times in hours since the first record, gaps as TBE, summed costs as TC,
/// encoded factors as covariates. Event indices are 1-based record positions, so
/// the first event has index 2. Non-positive gaps follow `config.ties`.
DeriveReport derive_events(std::span<const RawAccident> accidents, const EncodingMap& encoding,
                           const DeriveConfig& config = {});

} // namespace ranhpp
