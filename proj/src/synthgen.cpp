#include "drivepred/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>

#include "json_util.hpp"

namespace drivepred::synthgen {

using domain::Route;
using domain::RoutePoint;

namespace {

constexpr std::array<std::pair<ProfileKind, std::string_view>, 4> kKinds{{
    {ProfileKind::Highway, "Highway"},
    {ProfileKind::Urban, "Urban"},
    {ProfileKind::Mountain, "Mountain"},
    {ProfileKind::Mixed, "Mixed"},
}};

constexpr double kMaxSpeed = 160.0;  // km/h
constexpr double kSubsteps = 10.0;
constexpr double kEnvelopeFactor = 0.8;
constexpr double kStopMargin = 0.5;  // m short of the line
constexpr double kStopSnap = 2.0;  // m
constexpr double kMinSegment = 200.0;  // m

double kmh(double ms) { return ms * 3.6; }
double ms(double kmh) { return kmh / 3.6; }

// Low-frequency mixture of three sinusoids, normalized to [-1, 1].
struct Wave {
    std::array<double, 3> weight{}, wavelength{}, phase{};

    Wave(Rng& rng, double min_wavelength, double max_wavelength) {
        double total = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            weight[j] = rng.uniform(0.2, 1.0);
            wavelength[j] = rng.uniform(min_wavelength, max_wavelength);
            phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            total += weight[j];
        }
        for (auto& w : weight) w /= total;
    }

    double operator()(double d) const {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) s += weight[j] * std::sin(2.0 * std::numbers::pi * d / wavelength[j] + phase[j]);
        return s;
    }
};

// Stop lines at Poisson-spaced positions on the point grid, each with room for
// its zone and clear of the previous one.
std::vector<std::size_t> place_stops(const Route& route, double density, double zone, Rng& rng) {
    std::vector<std::size_t> lines;
    if (density <= 0.0) return lines;
    const double rate = density / 1000.0;
    double last = -1e300;
    double pos = 0.0;
    while (true) {
        pos += rng.exponential(rate);
        if (pos > route.length - 50.0) break;
        if (pos < zone || pos - zone < last + 50.0) continue;
        const std::size_t i = point_at(route, pos);
        lines.push_back(i);
        last = route.samples[i].distance;
    }
    return lines;
}

}  // namespace

std::string_view to_string(ProfileKind kind) {
    for (const auto& [k, s] : kKinds) {
        if (k == kind) return s;
    }
    return "?";
}

ProfileKind parse_profile_kind(std::string_view literal) {
    for (const auto& [k, s] : kKinds) {
        if (s == literal) return k;
    }
    throw UsageError("unknown route profile \"" + std::string(literal) + "\"; valid: Highway, Urban, Mountain, Mixed");
}

RouteProfile default_profile(ProfileKind kind, double length) {
    RouteProfile p;
    p.kind = kind;
    p.length = length;
    switch (kind) {
        case ProfileKind::Highway:
            p.speed_limits = {100, 110, 120, 130};
            p.segment_length = 4000.0;
            p.light_density = 0.0;
            p.sign_density = 0.5;
            p.toll_density = 0.03;
            p.slope_amplitude = 0.03;
            p.curvature_amplitude = 1.0 / 1200.0;
            break;
        case ProfileKind::Urban:
            p.speed_limits = {30, 50, 70};
            p.segment_length = 800.0;
            p.light_density = 2.0;
            p.sign_density = 3.0;
            p.slope_amplitude = 0.02;
            p.curvature_amplitude = 1.0 / 120.0;
            break;
        case ProfileKind::Mountain:
            p.speed_limits = {50, 70, 80, 100};
            p.segment_length = 1500.0;
            p.light_density = 0.2;
            p.sign_density = 1.5;
            p.slope_amplitude = 0.08;
            p.curvature_amplitude = 1.0 / 70.0;
            break;
        case ProfileKind::Mixed:
            p.speed_limits = {30, 50, 70, 80, 100, 110, 120, 130};
            p.segment_length = 1500.0;
            p.light_density = 0.8;
            p.sign_density = 1.5;
            p.toll_density = 0.01;
            p.slope_amplitude = 0.04;
            p.curvature_amplitude = 1.0 / 250.0;
            break;
    }
    return p;
}

void validate_profile(const RouteProfile& p) {
    if (!(p.length > 0.0) || !std::isfinite(p.length)) throw UsageError("route length must be positive");
    if (p.speed_limits.empty()) throw UsageError("speed limit palette is empty");
    for (double l : p.speed_limits) {
        if (!(l > 0.0 && l <= kMaxSpeed)) throw UsageError("speed limits must lie in (0, 160] km/h");
    }
    if (!(p.segment_length > 0.0)) throw UsageError("segment length must be positive");
    for (double d : {p.light_density, p.sign_density, p.toll_density}) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw UsageError("densities must be non-negative");
    }
    if (!(p.slope_amplitude >= 0.0) || !(p.curvature_amplitude >= 0.0)) {
        throw UsageError("slope and curvature amplitudes must be non-negative");
    }
}

std::size_t point_at(const Route& route, double d) {
    const auto& s = route.samples;
    auto it = std::upper_bound(s.begin(), s.end(), d, [](double v, const RoutePoint& p) { return v < p.distance; });
    if (it == s.begin()) return 0;
    return static_cast<std::size_t>(it - s.begin()) - 1;
}

Route generate_route(const RouteProfile& profile, std::uint64_t seed) {
    validate_profile(profile);
    Route route;
    route.length = profile.length;
    route.weather = domain::Weather::Clear;
    switch (profile.kind) {
        case ProfileKind::Highway: route.road_condition = domain::RoadCondition::Highway; break;
        case ProfileKind::Mountain: route.road_condition = domain::RoadCondition::Mountain; break;
        default: route.road_condition = domain::RoadCondition::Urban; break;
    }
    const auto n = static_cast<std::size_t>(std::ceil(profile.length / kPointSpacing)) + 1;
    route.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        route.samples[i].distance = std::min(static_cast<double>(i) * kPointSpacing, profile.length);
    }

    Rng limits = Rng::substream(seed, 1);
    const auto& palette = profile.speed_limits;
    double seg_end = 0.0;
    double limit = 0.0;
    for (auto& p : route.samples) {
        if (p.distance >= seg_end) {
            seg_end = p.distance + std::max(kMinSegment, limits.exponential(1.0 / profile.segment_length));
            double next = palette[limits.below(palette.size())];
            if (next == limit && palette.size() > 1) next = palette[limits.below(palette.size())];
            limit = next;
        }
        p.speed_limit = limit;
    }

    Rng shape = Rng::substream(seed, 2);
    const Wave slope(shape, 1500.0, 6000.0);
    const Wave curve(shape, 600.0, 3000.0);
    for (auto& p : route.samples) {
        p.slope = profile.slope_amplitude * slope(p.distance);
        p.curvature = profile.curvature_amplitude * std::abs(curve(p.distance));
    }

    Rng tolls = Rng::substream(seed, 3);
    for (std::size_t line : place_stops(route, profile.toll_density, kTollZone, tolls)) {
        const double at = route.samples[line].distance;
        for (std::size_t i = line + 1; i-- > 0 && at - route.samples[i].distance < kTollZone;) {
            route.samples[i].toll_booth = true;
        }
    }

    Rng lights = Rng::substream(seed, 4);
    const double step = kLightZone / domain::kMaxTrafficLightIndex;
    for (std::size_t line : place_stops(route, profile.light_density, kLightZone, lights)) {
        const double at = route.samples[line].distance;
        for (std::size_t i = line + 1; i-- > 0 && at - route.samples[i].distance < kLightZone;) {
            auto& p = route.samples[i];
            if (p.toll_booth) continue;
            const int idx = static_cast<int>(std::ceil((at - p.distance) / step));
            p.traffic_light_index = std::clamp(idx, 1, domain::kMaxTrafficLightIndex);
        }
    }

    Rng signs = Rng::substream(seed, 5);
    if (profile.sign_density > 0.0) {
        const double rate = profile.sign_density / 1000.0;
        double pos = signs.exponential(rate);
        while (pos < profile.length) {
            const int code = 1 + static_cast<int>(signs.below(kSignCodes));
            for (std::size_t i = point_at(route, pos); i < n && route.samples[i].distance < pos + kSignReach; ++i) {
                if (route.samples[i].distance >= pos) route.samples[i].traffic_sign_index = code;
            }
            pos += signs.exponential(rate);
        }
    }
    return route;
}

void validate_params(const DriverParams& p) {
    if (!(p.compliance > 0.0 && p.compliance <= 1.2)) throw UsageError("compliance must lie in (0, 1.2]");
    if (p.reaction_lag < 0) throw UsageError("reaction lag must be non-negative");
    if (!(p.comfort_accel > 0.0) || !(p.comfort_decel > 0.0)) throw UsageError("comfort accelerations must be positive");
    if (!(p.noise_amplitude >= 0.0) || !std::isfinite(p.noise_amplitude)) {
        throw UsageError("noise amplitude must be non-negative");
    }
    if (!(p.lateral_accel > 0.0)) throw UsageError("lateral acceleration must be positive");
    if (!(p.stop_probability >= 0.0 && p.stop_probability <= 1.0)) throw UsageError("stop probability must lie in [0, 1]");
    if (!(p.dwell_time >= 0.0)) throw UsageError("dwell time must be non-negative");
    if (!(p.sample_rate >= 1.0 && p.sample_rate <= 10.0)) throw UsageError("sample rate must lie in [1, 10] Hz");
}

double target_speed(const RoutePoint& point, const DriverParams& params) {
    double v = params.compliance * point.speed_limit;
    if (point.traffic_sign_index >= 1 && point.traffic_sign_index <= kHazardSignCodes) v *= 0.8;
    if (point.slope > 0.0) v *= std::max(0.5, 1.0 - 2.5 * point.slope);
    if (point.curvature > 0.0) v = std::min(v, kmh(std::sqrt(params.lateral_accel / point.curvature)));
    return v;
}

DriveTrace simulate_trace(const Route& route, const DriverParams& params) {
    validate_params(params);
    const auto valid = domain::validate_route(route);
    if (!valid.ok()) throw DataError("invalid route: " + valid.violations.front().message);

    const auto& pts = route.samples;
    const std::size_t n = pts.size();
    const double brake = kEnvelopeFactor * params.comfort_decel;

    // Highest speed (m/s) at each point from which the targets ahead remain
    // reachable at the braking rate.
    std::vector<double> envelope(n);
    for (std::size_t i = n; i-- > 0;) {
        envelope[i] = ms(target_speed(pts[i], params));
        if (i + 1 < n) {
            const double gap = pts[i + 1].distance - pts[i].distance;
            envelope[i] = std::min(envelope[i], std::sqrt(envelope[i + 1] * envelope[i + 1] + 2.0 * brake * gap));
        }
    }

    std::vector<double> stops;
    std::uint64_t light_no = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool light_line = pts[i].traffic_light_index > 0 && (i + 1 == n || pts[i + 1].traffic_light_index == 0);
        const bool toll_line = pts[i].toll_booth && (i + 1 == n || !pts[i + 1].toll_booth);
        bool stop = toll_line;
        if (light_line) stop = stop || Rng::substream(params.seed, light_no++).uniform() < params.stop_probability;
        if (stop && pts[i].distance > 0.0) stops.push_back(pts[i].distance);
    }

    const double dt = 1.0 / params.sample_rate;
    const double h = dt / kSubsteps;
    const std::size_t max_samples =
        static_cast<std::size_t>(params.sample_rate * (route.length * 20.0 + (stops.size() + 1) * (params.dwell_time + 600.0)));

    DriveTrace trace;
    double x = 0.0;
    double v = 0.0;
    double dwell = 0.0;
    std::size_t next_stop = 0;
    std::deque<double> recent;  // desired speeds at the last reaction_lag samples

    auto desired_at = [&](double pos) {
        const std::size_t i = point_at(route, pos);
        double d = envelope[i];
        if (i + 1 < n) {
            const double f = (pos - pts[i].distance) / (pts[i + 1].distance - pts[i].distance);
            d = std::min(d, envelope[i] + f * (envelope[i + 1] - envelope[i]));
        }
        if (next_stop < stops.size()) {
            d = std::min(d, std::sqrt(2.0 * brake * std::max(0.0, stops[next_stop] - pos - kStopMargin)));
        }
        return d;
    };

    trace.speed.push_back(0.0);
    trace.distance.push_back(0.0);
    while (x < route.length && trace.speed.size() < max_samples) {
        const double lagged = recent.empty() ? 1e300 : *std::min_element(recent.begin(), recent.end());
        for (int s = 0; s < static_cast<int>(kSubsteps) && x < route.length; ++s) {
            if (dwell > 0.0) {
                dwell -= h;
                if (dwell <= 0.0) ++next_stop;
                continue;
            }
            while (next_stop < stops.size() && stops[next_stop] < x - kStopSnap) ++next_stop;
            const double reach = x + (v + params.comfort_accel * h) * h;
            const double want = std::min({desired_at(x), desired_at(std::min(reach, route.length)), lagged});
            double next = std::clamp(want, v - params.comfort_decel * h, v + params.comfort_accel * h);
            next = std::max(next, 0.0);
            if (next_stop < stops.size() && stops[next_stop] - x < kStopSnap && v <= params.comfort_decel * h) {
                next = 0.0;
                v = 0.0;
                if (params.dwell_time > 0.0) {
                    dwell = params.dwell_time;
                } else {
                    ++next_stop;
                }
                continue;
            }
            x = std::min(route.length, x + 0.5 * (v + next) * h);
            v = next;
        }
        while (next_stop < stops.size() && stops[next_stop] < x - kStopSnap) ++next_stop;
        if (params.reaction_lag > 0) {
            recent.push_back(desired_at(x));
            if (recent.size() > static_cast<std::size_t>(params.reaction_lag)) recent.pop_front();
        }
        trace.speed.push_back(kmh(v));
        trace.distance.push_back(x);
    }
    return trace;
}

std::vector<double> simulate_rule_based_driver(const Route& route, const DriverParams& params) {
    return simulate_trace(route, params).speed;
}

std::vector<double> humanize(const std::vector<double>& profile, const DriverParams& params, std::uint64_t seed) {
    validate_params(params);
    const double a = params.noise_amplitude;
    std::vector<double> out(profile);
    if (a == 0.0 || profile.empty()) return out;

    Rng rng(seed);
    const double rho = 0.9;
    const double sigma = 0.5 * a;
    const double innovation = sigma * std::sqrt(1.0 - rho * rho);
    const double drift = rng.uniform(-0.5 * a, 0.5 * a);
    const double drift_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double drift_period = std::max(600.0, static_cast<double>(profile.size()));
    const double episode_rate = 1.0 / 120.0;

    double ar = sigma * rng.normal();
    std::size_t episode_left = 0;
    std::size_t episode_len = 0;
    double episode_peak = 0.0;
    for (std::size_t t = 0; t < profile.size(); ++t) {
        if (t > 0) ar = rho * ar + innovation * rng.normal();
        double episode = 0.0;
        if (episode_left == 0 && rng.uniform() < episode_rate) {
            episode_len = 5 + rng.below(16);
            episode_left = episode_len;
            episode_peak = rng.uniform(-a, a);
        }
        if (episode_left > 0) {
            const double k = static_cast<double>(episode_len - episode_left + 1);
            episode = episode_peak * std::sin(std::numbers::pi * k / static_cast<double>(episode_len + 1));
            --episode_left;
        }
        const double slow = drift * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / drift_period + drift_phase);
        const double fade = std::min(1.0, std::max(0.0, profile[t]) / 10.0);
        out[t] = std::clamp(profile[t] + fade * (ar + episode + slow), 0.0, kMaxSpeed);
    }
    return out;
}

ingestion::RecordingMatrix emit_recording(const Route& route, const std::vector<double>& speed_kmh,
                                          double sample_rate, std::uint64_t seed) {
    if (speed_kmh.empty()) throw DataError("speed profile is empty");
    if (route.samples.empty()) throw DataError("route has no points");
    if (!(sample_rate >= 1.0 && sample_rate <= 10.0)) throw UsageError("sample rate must lie in [1, 10] Hz");
    for (double v : speed_kmh) {
        if (!(v >= 0.0 && v <= kMaxSpeed)) throw DataError("speed profile values must lie in [0, 160] km/h");
    }

    // Congestion factor per run of equal speed limits.
    std::vector<double> congestion(route.samples.size());
    std::uint64_t segment = 0;
    double factor = 0.0;
    for (std::size_t i = 0; i < route.samples.size(); ++i) {
        if (i == 0 || route.samples[i].speed_limit != route.samples[i - 1].speed_limit) {
            factor = Rng::substream(seed, segment++).uniform(0.5, 1.0);
        }
        congestion[i] = factor;
    }

    ingestion::RecordingMatrix rec;
    rec.channel_ids = {ingestion::kTimeChannel, ingestion::kDistanceChannel, ingestion::kTargetChannel};
    rec.channel_ids.insert(rec.channel_ids.end(), ingestion::kSelectedChannels.begin(), ingestion::kSelectedChannels.end());
    rec.sample_rate = sample_rate;
    const std::size_t n = speed_kmh.size();
    rec.values = Matrix(rec.channel_ids.size(), n);
    double d = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) d += 0.5 * (speed_kmh[t - 1] + speed_kmh[t]) / 3.6 / sample_rate;
        const std::size_t i = point_at(route, d);
        const auto& p = route.samples[i];
        const std::array<double, 10> column{static_cast<double>(t) / sample_rate,
                                            d,
                                            speed_kmh[t],
                                            p.speed_limit,
                                            p.speed_limit * congestion[i],
                                            static_cast<double>(p.traffic_light_index),
                                            static_cast<double>(p.traffic_sign_index),
                                            p.toll_booth ? 1.0 : 0.0,
                                            p.curvature,
                                            p.slope};
        for (std::size_t c = 0; c < column.size(); ++c) rec.values(c, t) = column[c];
    }
    return rec;
}

void write_recording_file(const std::string& path, const ingestion::RecordingMatrix& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    ingestion::write_recording(out, rec);
    out.flush();
    if (!out) throw DataError("write failed for " + path);
}

std::vector<RouteJob> default_benchmark(std::size_t routes) {
    struct Entry {
        ProfileKind kind;
        double length;  // m
        double compliance;
    };
    // Compliance values keep the steady speeds of each palette clear of the
    // 10 km/h class edges; the first highway driver cruises above 140 km/h.
    static constexpr std::array<Entry, 6> kCycle{{
        {ProfileKind::Highway, 100000.0, 1.12},
        {ProfileKind::Urban, 32000.0, 0.95},
        {ProfileKind::Mountain, 58000.0, 1.06},
        {ProfileKind::Mixed, 58000.0, 1.04},
        {ProfileKind::Urban, 32000.0, 1.1},
        {ProfileKind::Highway, 100000.0, 1.04},
    }};
    std::vector<RouteJob> jobs;
    for (std::size_t i = 0; i < routes; ++i) {
        const auto& e = kCycle[i % kCycle.size()];
        RouteJob job;
        job.profile = default_profile(e.kind, e.length);
        job.driver.compliance = e.compliance;
        job.driver.reaction_lag = 1 + static_cast<int>(i % 2);
        job.driver.noise_amplitude = 1.0;
        jobs.push_back(std::move(job));
    }
    return jobs;
}

std::vector<GeneratedRoute> generate(const std::vector<RouteJob>& jobs, std::uint64_t seed) {
    for (const auto& job : jobs) {
        validate_profile(job.profile);
        validate_params(job.driver);
    }
    std::vector<GeneratedRoute> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        GeneratedRoute& g = out[i];
        g.job = jobs[i];
        g.seed = mix_seed(seed, i);
        g.job.driver.seed = mix_seed(g.seed, 2);
        g.route = generate_route(g.job.profile, mix_seed(g.seed, 1));
        g.rule_based = simulate_rule_based_driver(g.route, g.job.driver);
        g.speed = humanize(g.rule_based, g.job.driver, mix_seed(g.seed, 3));
        g.recording = emit_recording(g.route, g.speed, g.job.driver.sample_rate, mix_seed(g.seed, 4));
    });
    return out;
}

namespace {

using nlohmann::json;
using jsonutil::Reader;

json profile_json(const RouteProfile& p) {
    return {{"kind", to_string(p.kind)},
            {"length", p.length},
            {"speed_limits", p.speed_limits},
            {"segment_length", p.segment_length},
            {"light_density", p.light_density},
            {"sign_density", p.sign_density},
            {"toll_density", p.toll_density},
            {"slope_amplitude", p.slope_amplitude},
            {"curvature_amplitude", p.curvature_amplitude}};
}

json driver_json(const DriverParams& d) {
    return {{"compliance", d.compliance},
            {"reaction_lag", d.reaction_lag},
            {"comfort_accel", d.comfort_accel},
            {"comfort_decel", d.comfort_decel},
            {"noise_amplitude", d.noise_amplitude},
            {"lateral_accel", d.lateral_accel},
            {"stop_probability", d.stop_probability},
            {"dwell_time", d.dwell_time},
            {"sample_rate", d.sample_rate},
            {"seed", d.seed}};
}

RouteProfile profile_from(const Reader& r) {
    RouteProfile p;
    const std::string kind = r.string("kind");
    try {
        p.kind = parse_profile_kind(kind);
    } catch (const UsageError& e) {
        throw ParseError(e.what(), r.path("kind"));
    }
    p.length = r.number("length");
    p.speed_limits = r.numbers("speed_limits");
    p.segment_length = r.number("segment_length");
    p.light_density = r.number("light_density");
    p.sign_density = r.number("sign_density");
    p.toll_density = r.number("toll_density");
    p.slope_amplitude = r.number("slope_amplitude");
    p.curvature_amplitude = r.number("curvature_amplitude");
    return p;
}

DriverParams driver_from(const Reader& r) {
    DriverParams d;
    d.compliance = r.number("compliance");
    d.reaction_lag = static_cast<int>(r.integer("reaction_lag"));
    d.comfort_accel = r.number("comfort_accel");
    d.comfort_decel = r.number("comfort_decel");
    d.noise_amplitude = r.number("noise_amplitude");
    d.lateral_accel = r.number("lateral_accel");
    d.stop_probability = r.number("stop_probability");
    d.dwell_time = r.number("dwell_time");
    d.sample_rate = r.number("sample_rate");
    d.seed = r.unsigned_integer("seed");
    return d;
}

}  // namespace

std::string serialize_jobs(const std::vector<RouteJob>& jobs) {
    json list = json::array();
    for (const auto& j : jobs) list.push_back({{"profile", profile_json(j.profile)}, {"driver", driver_json(j.driver)}});
    json doc = {{"format", "drivepred.synth_jobs"}, {"version", 1}, {"jobs", std::move(list)}};
    return doc.dump(2) + "\n";
}

std::vector<RouteJob> deserialize_jobs(std::string_view document) {
    const json doc = jsonutil::parse(document);
    Reader root(doc, "");
    root.expect_format("drivepred.synth_jobs", 1);
    auto list = root.array("jobs");
    std::vector<RouteJob> jobs;
    for (std::size_t i = 0; i < list.size(); ++i) {
        Reader j = list.at(i);
        jobs.push_back({profile_from(j.object("profile")), driver_from(j.object("driver"))});
    }
    return jobs;
}

std::string manifest_document(const std::vector<GeneratedRoute>& routes, const std::vector<std::string>& files,
                              std::uint64_t seed) {
    json list = json::array();
    for (std::size_t i = 0; i < routes.size(); ++i) {
        const auto& g = routes[i];
        list.push_back({{"file", i < files.size() ? files[i] : std::string()},
                        {"seed", g.seed},
                        {"samples", g.recording.samples()},
                        {"profile", profile_json(g.job.profile)},
                        {"driver", driver_json(g.job.driver)}});
    }
    json doc = {{"format", "drivepred.synth_manifest"}, {"version", 1}, {"seed", seed}, {"routes", std::move(list)}};
    return doc.dump(2) + "\n";
}

}  // namespace drivepred::synthgen
