#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "drivepred/common.hpp"

namespace drivepred::ingestion {

/// Missing cells are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

inline constexpr int kChannelCount = 27;
inline constexpr int kTargetChannel = 9;  // velocity_kmh_raw
inline constexpr int kTimeChannel = 2;  // t
inline constexpr int kDistanceChannel = 8;  // d_integrated_raw
inline constexpr std::array<int, 7> kSelectedChannels{16, 17, 18, 19, 22, 23, 26};

struct ChannelInfo {
    int id;
    std::string_view name;
    std::string_view description;
    bool selected;
    bool target;
};

/// The fixed 27-entry registry of recorded channels, ordered by id.
const std::array<ChannelInfo, kChannelCount>& channel_registry();
const ChannelInfo& channel(int id);
/// Channel id for a header name, or nullopt for an unknown name.
std::optional<int> channel_id(std::string_view name);

class MissingChannelError : public DataError {
public:
    MissingChannelError(int id, std::string_view name)
        : DataError("missing channel " + std::to_string(id) + " (" + std::string(name) + ")"), id_(id) {}
    int id() const noexcept { return id_; }

private:
    int id_;
};

/// Header names a channel that is not in the registry.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed CSV content (ragged rows, unparsable cells).
class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// M channels by N samples. Row r holds channel channel_ids[r].
struct RecordingMatrix {
    std::vector<int> channel_ids;
    Matrix values;
    double sample_rate = 1.0;  // Hz, in [1, 10]

    std::size_t channels() const { return values.rows(); }
    std::size_t samples() const { return values.cols(); }
    bool has_channel(int id) const;
    /// Row of the given channel; throws MissingChannelError if absent.
    std::span<const double> channel_row(int id) const;
};

/// Throws DataError if the matrix breaks a RecordingMatrix invariant.
void validate_recording(const RecordingMatrix& rec);

/// Feature rows with their discretized labels; never contains missing cells.
struct LabeledDataset {
    Matrix features;  // N x F
    std::vector<Label> labels;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
};

/// Reads the CSV form: a header of Table-style channel names, then one row
/// per sample. Empty cells are missing.
RecordingMatrix load_recording(std::istream& in, double sample_rate = 1.0);
RecordingMatrix load_recording_file(const std::string& path, double sample_rate = 1.0);

/// Writes the CSV form with full (17 significant digit) precision; channel
/// columns appear in the order of rec.channel_ids.
void write_recording(std::ostream& out, const RecordingMatrix& rec);

/// Target speeds (km/h); missing cells are preserved.
std::vector<double> extract_target(const RecordingMatrix& rec);

/// Projects the seven selected channels (ascending id) and drops every sample
/// with a missing selected value or label.
/// Labels use a negative value to mark a missing target.
LabeledDataset select_features(const RecordingMatrix& rec, const std::vector<Label>& labels);

/// Label value marking a sample whose target speed was missing.
inline constexpr Label kMissingLabel = -1;

}  // namespace drivepred::ingestion
