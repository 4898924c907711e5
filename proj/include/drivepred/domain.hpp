#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drivepred/common.hpp"

// Descriptive model of a driving scenario: who drives, in what, and where.
// Everything here is plain data; the classifiers module owns behavior.

namespace drivepred::domain {

enum class DriverAction { Accelerating, Decelerating, Maintaining };
enum class DrivingStyle { Normal, Zigzag, RiskyAcceleration, RiskyLaneChanging };
enum class EngineType { Petrol, Diesel, Hybrid, Electric };
enum class Weather { Slipperiness, Wind, Clear };
enum class RoadCondition { Highway, Urban, Mountain };
enum class FeatureKind { Recorded, Volatile, Metric };
enum class Algorithm {
    GradientBoosting,
    DecisionTree,
    RandomForest,
    LogisticRegression,
    KNNeighbors,
    GaussianNB,
    LinearSVM,
    AdaBoost,
};

/// Reaction speed and action are carried as data only; nothing in the
/// prediction pipeline reads them.
struct Driver {
    double reaction_speed = 1.0;  // s
    double target_velocity = 0.0;  // km/h
    DriverAction action = DriverAction::Maintaining;
    DrivingStyle driving_style = DrivingStyle::Normal;

    friend bool operator==(const Driver&, const Driver&) = default;
};

struct Vehicle {
    double size = 4.5;  // m
    double weight = 1400.0;  // kg
    EngineType engine_type = EngineType::Petrol;
    double acceleration = 2.5;  // m/s^2
    double average_emissions = 120.0;  // g/km

    friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

inline constexpr int kMaxTrafficLightIndex = 6;

struct RoutePoint {
    double distance = 0.0;  // m from route start
    double speed_limit = 50.0;  // km/h
    double slope = 0.0;  // rise / run
    double curvature = 0.0;  // 1/m
    int traffic_light_index = 0;
    int traffic_sign_index = 0;
    bool toll_booth = false;

    friend bool operator==(const RoutePoint&, const RoutePoint&) = default;
};

struct Route {
    double length = 0.0;  // m, equals samples.back().distance
    std::vector<RoutePoint> samples;
    Weather weather = Weather::Clear;
    RoadCondition road_condition = RoadCondition::Urban;

    friend bool operator==(const Route&, const Route&) = default;
};

struct DrivingModel {
    Driver driver;
    Vehicle vehicle;
    Route route;

    friend bool operator==(const DrivingModel&, const DrivingModel&) = default;
};

struct FeatureDescriptor {
    std::string name;
    FeatureKind kind = FeatureKind::Recorded;

    friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

struct PredictorDescriptor {
    Algorithm algorithm = Algorithm::RandomForest;
    std::map<std::string, double> hyperparameters;

    friend bool operator==(const PredictorDescriptor&, const PredictorDescriptor&) = default;
};

/// One broken invariant, e.g. {"vehicle.weight", "Vehicle.weight > 0"}.
struct Violation {
    std::string path;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
};

ValidationResult validate_driving_model(const DrivingModel& model);
ValidationResult validate_route(const Route& route, const std::string& path = "route");

/// Returns the names that occur more than once.
std::vector<std::string> duplicate_feature_names(const std::vector<FeatureDescriptor>& features);

std::string serialize_driving_model(const DrivingModel& model);
/// Throws ParseError naming the offending field (and line, for syntax errors).
DrivingModel deserialize_driving_model(std::string_view document);

// Enum <-> literal mapping shared by every document format in the project.
std::string_view to_string(DriverAction v);
std::string_view to_string(DrivingStyle v);
std::string_view to_string(EngineType v);
std::string_view to_string(Weather v);
std::string_view to_string(RoadCondition v);
std::string_view to_string(FeatureKind v);
std::string_view to_string(Algorithm v);

/// Parses an enum literal; throws ParseError listing the valid literals.
template <class Enum>
Enum parse_enum(std::string_view literal, const std::string& field = {});

/// All eight classifier families in the reporting column order.
const std::vector<Algorithm>& all_algorithms();

}  // namespace drivepred::domain
