#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ctime>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpmab/hawkes.hpp"
#include "hpmab/io.hpp"
#include "hpmab/spatial.hpp"

namespace hpmab {

/// Equal-angle partition of a bounding box into X columns and Y rows.
struct GridSpec {
    double lon_min = 0.0, lon_max = 1.0;
    double lat_min = 0.0, lat_max = 1.0;
    int X = 10;
    int Y = 10;

    void validate() const {
        if (!(lon_max > lon_min) || !(lat_max > lat_min) || X < 1 || Y < 1) {
            throw std::invalid_argument("GridSpec: need max > min per axis and X, Y >= 1");
        }
    }

    [[nodiscard]] int n_cells() const { return X * Y; }
    [[nodiscard]] int cell_index(const CellFeature& f) const { return f.y * X + f.x; }
    [[nodiscard]] CellFeature feature_of(int cell) const { return CellFeature{cell % X, cell / X}; }
    [[nodiscard]] bool contains(double lon, double lat) const {
        return lon >= lon_min && lon <= lon_max && lat >= lat_min && lat <= lat_max;
    }

    /// Maps a point to its cell; the max edge closes into the last bin.
    /// Fractional positions within 1e-9 of a bin edge snap to it first, so a
    /// point that sits exactly on an interior boundary in real arithmetic
    /// lands in the upper bin regardless of rounding noise.
    [[nodiscard]] CellFeature cell_of(double lon, double lat) const {
        if (!contains(lon, lat)) {
            throw std::invalid_argument("cell_of: point outside grid bounds");
        }
        auto bin = [](double value, double lo, double hi, int n) {
            double f = (value - lo) / (hi - lo) * n;
            const double snapped = std::round(f);
            if (std::abs(f - snapped) <= 1e-9) {
                f = snapped;
            }
            return std::min(static_cast<int>(f), n - 1);
        };
        return CellFeature{bin(lon, lon_min, lon_max, X), bin(lat, lat_min, lat_max, Y)};
    }
};

/// A time-sorted event log in (seconds from period start, lon, lat) form.
struct EventDataset {
    struct Row {
        double t = 0.0;
        double lon = 0.0;
        double lat = 0.0;
    };
    std::vector<Row> events;
    TimeWindow period{0.0, 0.0};

    void sort_by_time() {
        std::stable_sort(events.begin(), events.end(),
                         [](const Row& a, const Row& b) { return a.t < b.t; });
    }
};

/// Per visited cell: its in-window timestamps and observed-count reward.
struct Observation {
    int cell = -1;
    EventSeq times;
    double reward = 0.0;
};

/// Stateless replay of a dataset in V half-open windows [vW, (v+1)W).
/// Observations reveal exactly the recommended cells; ground-truth gains per
/// window stay available for metric evaluation.
class ReplayEnv {
public:
    ReplayEnv(const EventDataset& data, const GridSpec& grid, double window_seconds, int visits)
        : grid_(grid), window_seconds_(window_seconds), visits_(visits) {
        grid_.validate();
        if (!(window_seconds > 0.0) || visits < 1) {
            throw std::invalid_argument("ReplayEnv: need window_seconds > 0 and visits >= 1");
        }
        cell_times_.assign(static_cast<std::size_t>(visits),
                           std::vector<EventSeq>(static_cast<std::size_t>(grid.n_cells())));
        gains_.assign(static_cast<std::size_t>(visits), ScoreField(grid.X, grid.Y));
        for (const auto& row : data.events) {
            if (row.t < 0.0 || row.t >= window_seconds * visits) {
                continue;
            }
            if (!grid_.contains(row.lon, row.lat)) {
                continue;
            }
            const int v = static_cast<int>(row.t / window_seconds);
            const int cell = grid_.cell_index(grid_.cell_of(row.lon, row.lat));
            cell_times_[static_cast<std::size_t>(std::min(v, visits - 1))]
                       [static_cast<std::size_t>(cell)]
                           .push_back(row.t);
            ++total_events_;
        }
        for (int v = 0; v < visits; ++v) {
            for (int c = 0; c < grid.n_cells(); ++c) {
                auto& ts = cell_times_[static_cast<std::size_t>(v)][static_cast<std::size_t>(c)];
                std::sort(ts.begin(), ts.end());
                gains_[static_cast<std::size_t>(v)].values[static_cast<std::size_t>(c)] =
                    static_cast<double>(ts.size());
            }
        }
    }

    [[nodiscard]] int visits() const { return visits_; }
    [[nodiscard]] double window_seconds() const { return window_seconds_; }
    [[nodiscard]] int round() const { return round_; }
    [[nodiscard]] bool done() const { return round_ >= visits_; }
    [[nodiscard]] double total_events() const { return total_events_; }
    [[nodiscard]] const GridSpec& grid() const { return grid_; }

    [[nodiscard]] TimeWindow window(int v) const {
        return TimeWindow{v * window_seconds_, (v + 1) * window_seconds_};
    }

    [[nodiscard]] const ScoreField& true_gains(int v) const {
        return gains_.at(static_cast<std::size_t>(v));
    }

    std::vector<Observation> step(const std::vector<int>& recommendation) {
        if (done()) {
            throw std::out_of_range("ReplayEnv::step: episode finished");
        }
        std::vector<Observation> out;
        out.reserve(recommendation.size());
        for (int cell : recommendation) {
            if (cell < 0 || cell >= grid_.n_cells()) {
                throw std::invalid_argument("ReplayEnv::step: cell id out of range");
            }
            Observation obs;
            obs.cell = cell;
            obs.times =
                cell_times_[static_cast<std::size_t>(round_)][static_cast<std::size_t>(cell)];
            obs.reward = static_cast<double>(obs.times.size());
            out.push_back(std::move(obs));
        }
        ++round_;
        return out;
    }

private:
    GridSpec grid_;
    double window_seconds_;
    int visits_;
    int round_ = 0;
    double total_events_ = 0.0;
    std::vector<std::vector<EventSeq>> cell_times_; // [visit][cell]
    std::vector<ScoreField> gains_;
};

// ---------------------------------------------------------------------------
// Ingestion of raw delimited extracts into the canonical dataset form.

struct IngestSchema {
    char delimiter = '|';
    std::string time_col;
    std::string lat_col;
    std::string lon_col;
    std::string category_col;
    std::string time_format = "%m/%d/%Y %H:%M"; // strptime-style, parsed as UTC

    void validate() const {
        if (time_col.empty() || lat_col.empty() || lon_col.empty()) {
            throw std::invalid_argument("IngestSchema: time/lat/lon column names required");
        }
    }
};

struct IngestFilters {
    std::string category;              // empty = keep all categories
    std::string start_date;            // "%Y-%m-%d" or "%Y-%m-%d %H:%M:%S"
    std::string end_date;              // exclusive
    std::optional<Rect> bbox;          // lon in x, lat in y; defaults to the grid bounds
};

struct IngestReport {
    std::size_t rows_total = 0;
    std::size_t rows_kept = 0;
    std::size_t dropped_unparseable = 0;
    std::size_t dropped_missing = 0;
    std::size_t dropped_category = 0;
    std::size_t dropped_date = 0;
    std::size_t dropped_bbox = 0;

    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        os << "ingest report\n"
           << "  rows read:            " << rows_total << "\n"
           << "  rows kept:            " << rows_kept << "\n"
           << "  dropped (unparseable):" << dropped_unparseable << "\n"
           << "  dropped (missing):    " << dropped_missing << "\n"
           << "  dropped (category):   " << dropped_category << "\n"
           << "  dropped (date range): " << dropped_date << "\n"
           << "  dropped (bbox):       " << dropped_bbox << "\n";
        return os.str();
    }
};

namespace detail {

inline std::optional<double> parse_epoch_utc(const std::string& text, const std::string& format) {
    std::tm tm{};
    std::istringstream is(text);
    is >> std::get_time(&tm, format.c_str());
    if (is.fail()) {
        return std::nullopt;
    }
    tm.tm_isdst = 0;
    const std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1)) {
        return std::nullopt;
    }
    return static_cast<double>(t);
}

inline std::optional<double> parse_date_bound(const std::string& text) {
    if (auto full = parse_epoch_utc(text, "%Y-%m-%d %H:%M:%S")) {
        return full;
    }
    return parse_epoch_utc(text, "%Y-%m-%d");
}

} // namespace detail

/// Reads a delimited extract, applies category/date-range/bbox filters and
/// converts timestamps to seconds from the period start. Unparseable rows are
/// counted and skipped.
inline EventDataset ingest(const std::string& path, const IngestSchema& schema,
                           const IngestFilters& filters, const GridSpec& grid,
                           IngestReport* report = nullptr) {
    schema.validate();
    grid.validate();
    auto in = open_input(path);

    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw std::runtime_error("ingest: empty input file " + path);
    }
    const auto header = split_delimited(header_line, schema.delimiter);
    auto col_of = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        return std::nullopt;
    };
    const auto t_col = col_of(schema.time_col);
    const auto lat_col = col_of(schema.lat_col);
    const auto lon_col = col_of(schema.lon_col);
    const auto cat_col =
        schema.category_col.empty() ? std::nullopt : col_of(schema.category_col);
    if (!t_col || !lat_col || !lon_col ||
        (!schema.category_col.empty() && !cat_col)) {
        throw std::runtime_error("ingest: schema columns not found in header of " + path);
    }

    std::optional<double> start_epoch;
    std::optional<double> end_epoch;
    if (!filters.start_date.empty()) {
        start_epoch = detail::parse_date_bound(filters.start_date);
        if (!start_epoch) {
            throw std::invalid_argument("ingest: bad start_date " + filters.start_date);
        }
    }
    if (!filters.end_date.empty()) {
        end_epoch = detail::parse_date_bound(filters.end_date);
        if (!end_epoch) {
            throw std::invalid_argument("ingest: bad end_date " + filters.end_date);
        }
    }
    const Rect bbox = filters.bbox.value_or(
        Rect{grid.lon_min, grid.lon_max, grid.lat_min, grid.lat_max});

    IngestReport rep;
    EventDataset data;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        ++rep.rows_total;
        const auto fields = split_delimited(line, schema.delimiter);
        const std::size_t needed = std::max({*t_col, *lat_col, *lon_col,
                                             cat_col ? *cat_col : std::size_t{0}});
        if (fields.size() <= needed) {
            ++rep.dropped_unparseable;
            continue;
        }
        const std::string& t_text = fields[*t_col];
        const std::string& lat_text = fields[*lat_col];
        const std::string& lon_text = fields[*lon_col];
        if (t_text.empty() || lat_text.empty() || lon_text.empty()) {
            ++rep.dropped_missing;
            continue;
        }
        if (cat_col && !filters.category.empty() && fields[*cat_col] != filters.category) {
            ++rep.dropped_category;
            continue;
        }
        double lat = 0.0;
        double lon = 0.0;
        const auto epoch = detail::parse_epoch_utc(t_text, schema.time_format);
        if (!epoch || !parse_double(lat_text, lat) || !parse_double(lon_text, lon)) {
            ++rep.dropped_unparseable;
            continue;
        }
        if ((start_epoch && *epoch < *start_epoch) || (end_epoch && *epoch >= *end_epoch)) {
            ++rep.dropped_date;
            continue;
        }
        if (!bbox.contains(lon, lat) || !grid.contains(lon, lat)) {
            ++rep.dropped_bbox;
            continue;
        }
        const double t0 = start_epoch.value_or(0.0);
        data.events.push_back({*epoch - t0, lon, lat});
        ++rep.rows_kept;
    }
    data.sort_by_time();
    data.period.start = 0.0;
    data.period.end = (start_epoch && end_epoch) ? (*end_epoch - *start_epoch)
                      : (data.events.empty() ? 0.0 : data.events.back().t);
    if (report != nullptr) {
        *report = rep;
    }
    return data;
}

// ---------------------------------------------------------------------------
// Canonical CSV: header `t,lon,lat` (ingested) or `t,x,y` (synthetic).

inline void write_canonical_csv(const EventDataset& data, const std::string& path,
                                const char* header = "t,lon,lat") {
    auto out = open_output(path);
    out << header << "\n";
    for (const auto& row : data.events) {
        out << format_double(row.t) << ',' << format_double(row.lon) << ','
            << format_double(row.lat) << "\n";
    }
}

inline void write_synthetic_csv(const SpatioTemporalEvents& events, const std::string& path) {
    auto out = open_output(path);
    out << "t,x,y\n";
    for (const auto& ev : events.events) {
        out << format_double(ev.t) << ',' << format_double(ev.x) << ','
            << format_double(ev.y) << "\n";
    }
}

inline EventDataset read_canonical_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_canonical_csv: empty file " + path);
    }
    const auto header = split_delimited(line, ',');
    if (header.size() != 3 || header[0] != "t" ||
        !((header[1] == "lon" && header[2] == "lat") ||
          (header[1] == "x" && header[2] == "y"))) {
        throw std::runtime_error("read_canonical_csv: expected header t,lon,lat or t,x,y in " +
                                 path);
    }
    EventDataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_delimited(line, ',');
        EventDataset::Row row;
        if (fields.size() != 3 || !parse_double(fields[0], row.t) ||
            !parse_double(fields[1], row.lon) || !parse_double(fields[2], row.lat)) {
            throw std::runtime_error("read_canonical_csv: bad row at line " +
                                     std::to_string(line_no) + " of " + path);
        }
        data.events.push_back(row);
    }
    data.sort_by_time();
    data.period = TimeWindow{0.0, data.events.empty() ? 0.0 : data.events.back().t};
    return data;
}

inline EventDataset dataset_from_synthetic(const SpatioTemporalEvents& events, double horizon) {
    EventDataset data;
    data.events.reserve(events.size());
    for (const auto& ev : events.events) {
        data.events.push_back({ev.t, ev.x, ev.y});
    }
    data.period = TimeWindow{0.0, horizon};
    return data;
}

} // namespace hpmab
