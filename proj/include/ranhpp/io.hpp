#pragma once

#include "ranhpp/arl.hpp"
#include "ranhpp/chart.hpp"
#include "ranhpp/estimation.hpp"
#include "ranhpp/ingest.hpp"
#include "ranhpp/tbe_process.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ranhpp {

/// Ordered key/value pairs written at the top of every output file: "# key: value"
/// lines in CSV, a "meta" object in JSON, a comment block in SVG.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan"
/// for the non-finite values).
std::string format_double(double v);
/// Inverse of format_double. Throws IoError on malformed text.
double parse_double(const std::string& text);

/// Stream a metadata block as "# key: value" lines.
void write_comment_metadata(std::ostream& out, const Metadata& meta);

struct EventsFile {
    Metadata meta;
    std::vector<FailureEvent> events;
    /// Covariate columns declared in the header.
    std::size_t dimension = 0;
};

/// Columns i,t,x,y,z1..zp. `dimension` is used when `events` is empty.
void write_events_csv(std::ostream& out, std::span<const FailureEvent> events, std::size_t dimension,
                      const Metadata& meta = {});
/// Reads the format produced by write_events_csv. Throws IoError on malformed content.
EventsFile read_events_csv(std::istream& in);
EventsFile read_events_csv(const std::string& path);

void write_chart_csv(std::ostream& out, std::span<const ChartPoint> points, const Metadata& meta = {});
void write_chart_json(std::ostream& out, std::span<const ChartPoint> points, ChartMode mode,
                      const Metadata& meta = {});
/// Statistic and limits against the event index; log-scale vertical axis unless
/// `log_scale` is false. Signals are drawn as filled markers.
void write_chart_svg(std::ostream& out, std::span<const ChartPoint> points, ChartMode mode,
                     const Metadata& meta = {}, bool log_scale = true);

/// A fitted model as persisted on disk, with the encoding used to build its covariates.
struct ModelFile {
    Metadata meta;
    FitResult fit;
    std::optional<EncodingMap> encoding;
};

void write_model_json(std::ostream& out, const FitResult& fit, const std::optional<EncodingMap>& encoding,
                      const Metadata& meta = {});
/// Throws IoError when the document is not a model file.
ModelFile read_model_json(std::istream& in);
ModelFile read_model_json(const std::string& path);

/// Parameters only: {"intensity": {...}, "beta": [...], "mu": ..., "copula": {...}}.
std::string params_to_json(const ProcessParams& params);
/// Accepts either a parameters document or a full model file.
ProcessParams params_from_json(const std::string& text);

void write_grid_csv(std::ostream& out, std::span<const GridCell> cells, const Metadata& meta = {});
void write_grid_json(std::ostream& out, std::span<const GridCell> cells, const Metadata& meta = {});
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows, const Metadata& meta = {});
void write_comparison_json(std::ostream& out, std::span<const ComparisonRow> rows, const Metadata& meta = {});

} // namespace ranhpp
