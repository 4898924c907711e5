#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drivepred/common.hpp"
#include "drivepred/domain.hpp"
#include "drivepred/ingestion.hpp"

// Synthetic routes and driver speed profiles in the ingestion CSV format.

namespace drivepred::synthgen {

enum class ProfileKind { Highway, Urban, Mountain, Mixed };

std::string_view to_string(ProfileKind kind);
ProfileKind parse_profile_kind(std::string_view literal);

/// Route points are spaced kPointSpacing metres apart.
inline constexpr double kPointSpacing = 10.0;

/// Statistics a generated route is drawn from. Densities are events per km.
struct RouteProfile {
    ProfileKind kind = ProfileKind::Urban;
    double length = 10000.0;  // m
    std::vector<double> speed_limits;  // km/h palette
    double segment_length = 800.0;  // mean speed-limit segment length, m
    double light_density = 0.0;
    double sign_density = 0.0;
    double toll_density = 0.0;
    double slope_amplitude = 0.0;  // rise / run
    double curvature_amplitude = 0.0;  // 1/m

    friend bool operator==(const RouteProfile&, const RouteProfile&) = default;
};

/// Documented defaults per kind:
///   Highway  {100, 110, 120, 130}
///   Urban    {30, 50, 70}
///   Mountain {50, 70, 80, 100}
///   Mixed    union of the above
RouteProfile default_profile(ProfileKind kind, double length);
void validate_profile(const RouteProfile& profile);

/// Length of the zone before a stop line that carries a traffic light index.
inline constexpr double kLightZone = 100.0;
/// Length of the zone before a toll booth that carries the toll flag.
inline constexpr double kTollZone = 200.0;
/// Traffic sign codes drawn uniformly from [1, kSignCodes].
inline constexpr int kSignCodes = 42;
/// Sign codes at or below this value are hazards that lower the target speed.
inline constexpr int kHazardSignCodes = 8;
/// A sign applies for this distance past its position.
inline constexpr double kSignReach = 150.0;

/// Points are spaced kPointSpacing apart from distance 0 to profile.length.
/// Each traffic light occupies the kLightZone metres before its stop line,
/// with index counting down 6..1 towards the line; the line is the last
/// point of the zone. Toll booths use the same layout with kTollZone.
domain::Route generate_route(const RouteProfile& profile, std::uint64_t seed);

struct DriverParams {
    double compliance = 0.95;  // fraction of the limit targeted
    int reaction_lag = 1;  // samples before a speed increase is acted on
    double comfort_accel = 1.5;  // m/s^2
    double comfort_decel = 2.0;  // m/s^2
    double noise_amplitude = 0.0;  // km/h, used by humanize
    double lateral_accel = 2.0;  // m/s^2 tolerated in curves
    double stop_probability = 0.5;  // at each traffic light
    double dwell_time = 10.0;  // s standing at a stop line
    double sample_rate = 1.0;  // Hz
    std::uint64_t seed = 0;  // drives the stop decisions

    friend bool operator==(const DriverParams&, const DriverParams&) = default;
};

void validate_params(const DriverParams& params);

/// Speed the rule-based driver aims for at a route point, before braking
/// for what lies ahead: compliance * limit, capped by the curve speed
/// sqrt(lateral_accel / curvature), lowered on upslopes and near hazard signs.
double target_speed(const domain::RoutePoint& point, const DriverParams& params);

/// Speed in km/h sampled at params.sample_rate from the start of the route
/// until its end is reached. Per-sample changes never exceed the comfort
/// accelerations; stop lines are approached at 0.8 * comfort_decel.
std::vector<double> simulate_rule_based_driver(const domain::Route& route, const DriverParams& params);

/// The same run with the exact distance travelled at each sample.
struct DriveTrace {
    std::vector<double> speed;  // km/h
    std::vector<double> distance;  // m
};
DriveTrace simulate_trace(const domain::Route& route, const DriverParams& params);

/// Index of the route point under the vehicle at distance d (the last
/// point at or before d).
std::size_t point_at(const domain::Route& route, double d);

/// |humanize(p) - p| stays below this multiple of noise_amplitude for at
/// least 99% of samples.
inline constexpr double kNoiseBoundFactor = 3.0;

/// Adds AR(1) noise (sd noise_amplitude / 2), sparse overshoot and undershoot
/// episodes (up to noise_amplitude) and a slow compliance drift (up to
/// noise_amplitude / 2), all faded out below 10 km/h. Output lies in [0, 160].
std::vector<double> humanize(const std::vector<double>& profile, const DriverParams& params, std::uint64_t seed);

/// Channels written: t, d_integrated_raw, velocity_kmh_raw and the seven
/// selected channels. Distance integrates the profile (trapezoid rule) and
/// route channels come from the point under the vehicle. tfc_flw is the limit
/// times a congestion factor in [0.5, 1] drawn per speed-limit segment.
ingestion::RecordingMatrix emit_recording(const domain::Route& route, const std::vector<double>& speed_kmh,
                                          double sample_rate, std::uint64_t seed);

/// Writes the CSV; I/O failures throw DataError naming the path.
void write_recording_file(const std::string& path, const ingestion::RecordingMatrix& rec);

/// One generated route with its driver.
struct RouteJob {
    RouteProfile profile;
    DriverParams driver;
};

/// The default desk-scale benchmark: `routes` jobs cycling through Highway,
/// Urban, Mountain and Mixed with varied drivers (about 20,000 samples for 6).
std::vector<RouteJob> default_benchmark(std::size_t routes);

struct GeneratedRoute {
    RouteJob job;
    std::uint64_t seed = 0;
    domain::Route route;
    std::vector<double> rule_based;
    std::vector<double> speed;  // humanized
    ingestion::RecordingMatrix recording;
};

/// Job i draws from s = mix_seed(seed, i): the route from mix_seed(s, 1),
/// stop decisions from mix_seed(s, 2) (replacing driver.seed), noise from
/// mix_seed(s, 3) and congestion from mix_seed(s, 4). A pure function of
/// (jobs, seed).
std::vector<GeneratedRoute> generate(const std::vector<RouteJob>& jobs, std::uint64_t seed);

/// Structured text for jobs ("drivepred.synth_jobs") and the run manifest.
std::string serialize_jobs(const std::vector<RouteJob>& jobs);
std::vector<RouteJob> deserialize_jobs(std::string_view document);
std::string manifest_document(const std::vector<GeneratedRoute>& routes, const std::vector<std::string>& files,
                              std::uint64_t seed);

}  // namespace drivepred::synthgen
