#include "drivepred/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>

#include <json.hpp>

#include "json_util.hpp"

namespace drivepred::domain {

namespace {

template <class Enum, std::size_t N>
using LiteralTable = std::array<std::pair<Enum, std::string_view>, N>;

constexpr LiteralTable<DriverAction, 3> kActions{{
    {DriverAction::Accelerating, "Accelerating"},
    {DriverAction::Decelerating, "Decelerating"},
    {DriverAction::Maintaining, "Maintaining"},
}};
constexpr LiteralTable<DrivingStyle, 4> kStyles{{
    {DrivingStyle::Normal, "Normal"},
    {DrivingStyle::Zigzag, "Zigzag"},
    {DrivingStyle::RiskyAcceleration, "RiskyAcceleration"},
    {DrivingStyle::RiskyLaneChanging, "RiskyLaneChanging"},
}};
constexpr LiteralTable<EngineType, 4> kEngines{{
    {EngineType::Petrol, "Petrol"},
    {EngineType::Diesel, "Diesel"},
    {EngineType::Hybrid, "Hybrid"},
    {EngineType::Electric, "Electric"},
}};
constexpr LiteralTable<Weather, 3> kWeather{{
    {Weather::Slipperiness, "Slipperiness"},
    {Weather::Wind, "Wind"},
    {Weather::Clear, "Clear"},
}};
constexpr LiteralTable<RoadCondition, 3> kRoads{{
    {RoadCondition::Highway, "Highway"},
    {RoadCondition::Urban, "Urban"},
    {RoadCondition::Mountain, "Mountain"},
}};
constexpr LiteralTable<FeatureKind, 3> kKinds{{
    {FeatureKind::Recorded, "Recorded"},
    {FeatureKind::Volatile, "Volatile"},
    {FeatureKind::Metric, "Metric"},
}};
constexpr LiteralTable<Algorithm, 8> kAlgorithms{{
    {Algorithm::GradientBoosting, "GradientBoosting"},
    {Algorithm::DecisionTree, "DecisionTree"},
    {Algorithm::RandomForest, "RandomForest"},
    {Algorithm::LogisticRegression, "LogisticRegression"},
    {Algorithm::KNNeighbors, "KNNeighbors"},
    {Algorithm::GaussianNB, "GaussianNB"},
    {Algorithm::LinearSVM, "LinearSVM"},
    {Algorithm::AdaBoost, "AdaBoost"},
}};

template <class Enum, std::size_t N>
std::string_view lookup(const LiteralTable<Enum, N>& table, Enum v) {
    for (const auto& [e, s] : table) {
        if (e == v) return s;
    }
    return "?";
}

template <class Enum, std::size_t N>
Enum parse_from(const LiteralTable<Enum, N>& table, std::string_view literal, const std::string& field) {
    for (const auto& [e, s] : table) {
        if (s == literal) return e;
    }
    std::string valid;
    for (const auto& [e, s] : table) {
        if (!valid.empty()) valid += ", ";
        valid += s;
    }
    throw ParseError("unknown literal \"" + std::string(literal) + "\"" + (field.empty() ? "" : " for " + field) +
                         "; valid literals: " + valid,
                     field);
}

void check(std::vector<Violation>& out, bool holds, std::string path, std::string message) {
    if (!holds) out.push_back({std::move(path), std::move(message)});
}

}  // namespace

std::string_view to_string(DriverAction v) { return lookup(kActions, v); }
std::string_view to_string(DrivingStyle v) { return lookup(kStyles, v); }
std::string_view to_string(EngineType v) { return lookup(kEngines, v); }
std::string_view to_string(Weather v) { return lookup(kWeather, v); }
std::string_view to_string(RoadCondition v) { return lookup(kRoads, v); }
std::string_view to_string(FeatureKind v) { return lookup(kKinds, v); }
std::string_view to_string(Algorithm v) { return lookup(kAlgorithms, v); }

template <>
DriverAction parse_enum<DriverAction>(std::string_view s, const std::string& f) { return parse_from(kActions, s, f); }
template <>
DrivingStyle parse_enum<DrivingStyle>(std::string_view s, const std::string& f) { return parse_from(kStyles, s, f); }
template <>
EngineType parse_enum<EngineType>(std::string_view s, const std::string& f) { return parse_from(kEngines, s, f); }
template <>
Weather parse_enum<Weather>(std::string_view s, const std::string& f) { return parse_from(kWeather, s, f); }
template <>
RoadCondition parse_enum<RoadCondition>(std::string_view s, const std::string& f) { return parse_from(kRoads, s, f); }
template <>
FeatureKind parse_enum<FeatureKind>(std::string_view s, const std::string& f) { return parse_from(kKinds, s, f); }
template <>
Algorithm parse_enum<Algorithm>(std::string_view s, const std::string& f) { return parse_from(kAlgorithms, s, f); }

const std::vector<Algorithm>& all_algorithms() {
    static const std::vector<Algorithm> order = [] {
        std::vector<Algorithm> v;
        for (const auto& [e, s] : kAlgorithms) v.push_back(e);
        return v;
    }();
    return order;
}

ValidationResult validate_route(const Route& route, const std::string& path) {
    ValidationResult r;
    auto& v = r.violations;
    check(v, !route.samples.empty(), path + ".samples", "Route.samples nonempty");
    for (std::size_t i = 0; i < route.samples.size(); ++i) {
        const auto& p = route.samples[i];
        const std::string at = path + ".samples[" + std::to_string(i) + "]";
        check(v, std::isfinite(p.distance), at + ".distance", "RoutePoint.distance finite");
        if (i > 0) {
            check(v, p.distance > route.samples[i - 1].distance, at + ".distance",
                  "Route cumulative distance strictly increasing");
        }
        check(v, p.speed_limit > 0.0, at + ".speed_limit", "RoutePoint.speed_limit > 0");
        check(v, p.traffic_light_index >= 0 && p.traffic_light_index <= kMaxTrafficLightIndex,
              at + ".traffic_light_index", "RoutePoint.traffic_light_index in [0, 6]");
        check(v, p.traffic_sign_index >= 0, at + ".traffic_sign_index", "RoutePoint.traffic_sign_index >= 0");
        check(v, p.curvature >= 0.0, at + ".curvature", "RoutePoint.curvature >= 0");
        check(v, std::isfinite(p.slope), at + ".slope", "RoutePoint.slope finite");
    }
    if (!route.samples.empty()) {
        check(v, route.length == route.samples.back().distance, path + ".length",
              "Route.length equals last cumulative distance");
    }
    return r;
}

ValidationResult validate_driving_model(const DrivingModel& model) {
    ValidationResult r;
    auto& v = r.violations;
    const auto& d = model.driver;
    check(v, d.reaction_speed > 0.0, "driver.reaction_speed", "Driver.reaction_speed > 0");
    check(v, d.target_velocity >= 0.0, "driver.target_velocity", "Driver.target_velocity >= 0");
    const auto& veh = model.vehicle;
    check(v, veh.weight > 0.0, "vehicle.weight", "Vehicle.weight > 0");
    check(v, veh.size > 0.0, "vehicle.size", "Vehicle.size > 0");
    check(v, veh.acceleration > 0.0, "vehicle.acceleration", "Vehicle.acceleration > 0");
    check(v, veh.average_emissions >= 0.0, "vehicle.average_emissions", "Vehicle.average_emissions >= 0");
    auto route = validate_route(model.route);
    v.insert(v.end(), route.violations.begin(), route.violations.end());
    return r;
}

std::vector<std::string> duplicate_feature_names(const std::vector<FeatureDescriptor>& features) {
    std::set<std::string> seen;
    std::set<std::string> dups;
    for (const auto& f : features) {
        if (!seen.insert(f.name).second) dups.insert(f.name);
    }
    return {dups.begin(), dups.end()};
}

namespace {

using nlohmann::json;
using jsonutil::Reader;

json route_to_json(const Route& route) {
    json samples = json::array();
    for (const auto& p : route.samples) {
        samples.push_back({{"distance", p.distance},
                           {"speed_limit", p.speed_limit},
                           {"slope", p.slope},
                           {"curvature", p.curvature},
                           {"traffic_light_index", p.traffic_light_index},
                           {"traffic_sign_index", p.traffic_sign_index},
                           {"toll_booth", p.toll_booth}});
    }
    return {{"length", route.length},
            {"weather", to_string(route.weather)},
            {"road_condition", to_string(route.road_condition)},
            {"samples", std::move(samples)}};
}

Route route_from_json(const Reader& r) {
    Route route;
    route.length = r.number("length");
    route.weather = parse_enum<Weather>(r.string("weather"), r.path("weather"));
    route.road_condition = parse_enum<RoadCondition>(r.string("road_condition"), r.path("road_condition"));
    auto samples = r.array("samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Reader p = samples.at(i);
        RoutePoint pt;
        pt.distance = p.number("distance");
        pt.speed_limit = p.number("speed_limit");
        pt.slope = p.number("slope");
        pt.curvature = p.number("curvature");
        pt.traffic_light_index = p.integer("traffic_light_index");
        pt.traffic_sign_index = p.integer("traffic_sign_index");
        pt.toll_booth = p.boolean("toll_booth");
        route.samples.push_back(pt);
    }
    return route;
}

}  // namespace

std::string serialize_driving_model(const DrivingModel& model) {
    const auto& d = model.driver;
    const auto& v = model.vehicle;
    json doc = {
        {"format", "drivepred.driving_model"},
        {"version", 1},
        {"driver",
         {{"reaction_speed", d.reaction_speed},
          {"target_velocity", d.target_velocity},
          {"action", to_string(d.action)},
          {"driving_style", to_string(d.driving_style)}}},
        {"vehicle",
         {{"size", v.size},
          {"weight", v.weight},
          {"engine_type", to_string(v.engine_type)},
          {"acceleration", v.acceleration},
          {"average_emissions", v.average_emissions}}},
        {"route", route_to_json(model.route)},
    };
    return doc.dump(2) + "\n";
}

DrivingModel deserialize_driving_model(std::string_view document) {
    const json doc = jsonutil::parse(document);
    Reader root(doc, "");
    root.expect_format("drivepred.driving_model", 1);
    DrivingModel m;
    Reader d = root.object("driver");
    m.driver.reaction_speed = d.number("reaction_speed");
    m.driver.target_velocity = d.number("target_velocity");
    m.driver.action = parse_enum<DriverAction>(d.string("action"), d.path("action"));
    m.driver.driving_style = parse_enum<DrivingStyle>(d.string("driving_style"), d.path("driving_style"));
    Reader v = root.object("vehicle");
    m.vehicle.size = v.number("size");
    m.vehicle.weight = v.number("weight");
    m.vehicle.engine_type = parse_enum<EngineType>(v.string("engine_type"), v.path("engine_type"));
    m.vehicle.acceleration = v.number("acceleration");
    m.vehicle.average_emissions = v.number("average_emissions");
    m.route = route_from_json(root.object("route"));
    return m;
}

}  // namespace drivepred::domain
