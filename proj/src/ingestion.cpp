#include "drivepred/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace drivepred::ingestion {

namespace {

constexpr std::array<ChannelInfo, kChannelCount> kRegistry{{
    {1, "velocity_raw", "Raw imported vehicle speed", false, false},
    {2, "t", "Time", false, false},
    {3, "speed_raw", "Engine speed imported", false, false},
    {4, "alt_raw", "Altitude imported", false, false},
    {5, "lat_raw", "Latitude imported", false, false},
    {6, "lon_raw", "Longitude imported", false, false},
    {7, "sat_raw", "Nbr of satellite used for the measurement", false, false},
    {8, "d_integrated_raw", "Distance calculated out of the imported vehicle speed integration", false, false},
    {9, "velocity_kmh_raw", "Raw imported vehicle speed", false, true},
    {10, "d_raw", "Distance calculated out of the latitude and the longitude", false, false},
    {11, "lat", "Snapped latitude", false, false},
    {12, "lon", "Snapped longitude", false, false},
    {13, "alt", "Altitude from Here Maps", false, false},
    {14, "d", "Distance out of snapped longitude and latitude", false, false},
    {15, "here_slope", "Slope from Here Maps", false, false},
    {16, "spd_lim", "Speed limit from regulation", true, false},
    {17, "tfc_flw", "Average speed from Here Maps", true, false},
    {18, "traf_lig", "Traffic light index (until 6) to indicate the number of traffic lights", true, false},
    {19, "tfc_sgn", "Traffic sign index", true, false},
    {20, "sgn_loc", "Localisation of the traffic sign (1=Left, 2=right, 3=above)", false, false},
    {21, "conf", "Confidence value from the snapping", false, false},
    {22, "toll_booth", "Index for toll booth", true, false},
    {23, "curvature", "Road curvature in 1/m", true, false},
    {24, "curvature_rad", "Road curvature in rad", false, false},
    {25, "bearing", "Yaw of the vehicle", false, false},
    {26, "slope", "Slope calculated from the Here Maps altitude", true, false},
    {27, "alt_corr", "Corrected altitude", false, false},
}};

std::string valid_channel_names() {
    std::string out;
    for (const auto& c : kRegistry) {
        if (!out.empty()) out += ", ";
        out += c.name;
    }
    return out;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

const std::array<ChannelInfo, kChannelCount>& channel_registry() { return kRegistry; }

const ChannelInfo& channel(int id) {
    if (id < 1 || id > kChannelCount) throw UsageError("channel id out of range: " + std::to_string(id));
    return kRegistry[static_cast<std::size_t>(id - 1)];
}

std::optional<int> channel_id(std::string_view name) {
    for (const auto& c : kRegistry) {
        if (c.name == name) return c.id;
    }
    return std::nullopt;
}

bool RecordingMatrix::has_channel(int id) const {
    return std::find(channel_ids.begin(), channel_ids.end(), id) != channel_ids.end();
}

std::span<const double> RecordingMatrix::channel_row(int id) const {
    auto it = std::find(channel_ids.begin(), channel_ids.end(), id);
    if (it == channel_ids.end()) throw MissingChannelError(id, channel(id).name);
    return values.row(static_cast<std::size_t>(it - channel_ids.begin()));
}

void validate_recording(const RecordingMatrix& rec) {
    if (rec.channel_ids.size() != rec.values.rows()) {
        throw DataError("channel id count does not match matrix rows");
    }
    if (!(rec.sample_rate >= 1.0 && rec.sample_rate <= 10.0)) {
        throw DataError("sample rate must lie in [1, 10] Hz");
    }
    std::set<int> seen;
    for (int id : rec.channel_ids) {
        if (id < 1 || id > kChannelCount) throw DataError("unknown channel id " + std::to_string(id));
        if (!seen.insert(id).second) throw DataError("duplicate channel " + std::string(channel(id).name));
    }
}

RecordingMatrix load_recording(std::istream& in, double sample_rate) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty recording: header row required");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    RecordingMatrix rec;
    rec.sample_rate = sample_rate;
    for (auto cell : split_csv_line(line)) {
        const auto name = trim(cell);
        auto id = channel_id(name);
        if (!id) {
            throw SchemaError("unknown channel \"" + std::string(name) + "\"; valid channel names: " +
                              valid_channel_names());
        }
        rec.channel_ids.push_back(*id);
    }

    const std::size_t m = rec.channel_ids.size();
    std::vector<double> row_major;  // sample-major while reading
    std::size_t n = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != m) {
            throw FormatError("row " + std::to_string(line_no) + ": expected " + std::to_string(m) + " cells, found " +
                              std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < m; ++c) {
            const auto text = trim(cells[c]);
            if (text.empty()) {
                row_major.push_back(kMissing);
                continue;
            }
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
                throw FormatError("row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) + " (" +
                                  std::string(channel(rec.channel_ids[c]).name) + "): non-numeric cell \"" +
                                  std::string(text) + "\"");
            }
            row_major.push_back(value);
        }
        ++n;
    }

    rec.values = Matrix(m, n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < m; ++c) rec.values(c, s) = row_major[s * m + c];
    }
    validate_recording(rec);
    return rec;
}

RecordingMatrix load_recording_file(const std::string& path, double sample_rate) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open recording " + path);
    try {
        return load_recording(in, sample_rate);
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void write_recording(std::ostream& out, const RecordingMatrix& rec) {
    validate_recording(rec);
    for (std::size_t c = 0; c < rec.channel_ids.size(); ++c) {
        if (c) out << ',';
        out << channel(rec.channel_ids[c]).name;
    }
    out << '\n';
    char buf[32];
    for (std::size_t s = 0; s < rec.samples(); ++s) {
        for (std::size_t c = 0; c < rec.channels(); ++c) {
            if (c) out << ',';
            const double v = rec.values(c, s);
            if (is_missing(v)) continue;
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
}

std::vector<double> extract_target(const RecordingMatrix& rec) {
    auto row = rec.channel_row(kTargetChannel);
    return {row.begin(), row.end()};
}

LabeledDataset select_features(const RecordingMatrix& rec, const std::vector<Label>& labels) {
    std::vector<std::span<const double>> rows;
    for (int id : kSelectedChannels) rows.push_back(rec.channel_row(id));
    if (!rec.has_channel(kTargetChannel)) throw MissingChannelError(kTargetChannel, channel(kTargetChannel).name);
    const auto target = rec.channel_row(kTargetChannel);
    const std::size_t n = rec.samples();
    if (labels.size() != n) {
        throw DataError("label count " + std::to_string(labels.size()) + " does not match sample count " +
                        std::to_string(n));
    }
    for (std::size_t f = 0; f < rows.size(); ++f) {
        const bool all_missing = std::all_of(rows[f].begin(), rows[f].end(), is_missing);
        if (n > 0 && all_missing) throw MissingChannelError(kSelectedChannels[f], channel(kSelectedChannels[f]).name);
    }

    LabeledDataset out;
    for (int id : kSelectedChannels) out.feature_names.emplace_back(channel(id).name);
    std::vector<double> data;
    data.reserve(n * rows.size());
    for (std::size_t s = 0; s < n; ++s) {
        bool complete = labels[s] >= 0 && !is_missing(target[s]);
        for (const auto& r : rows) complete = complete && !is_missing(r[s]);
        if (!complete) continue;
        for (const auto& r : rows) data.push_back(r[s]);
        out.labels.push_back(labels[s]);
    }
    out.features = Matrix(out.labels.size(), rows.size(), std::move(data));
    return out;
}

}  // namespace drivepred::ingestion
