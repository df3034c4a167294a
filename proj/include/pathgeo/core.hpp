#ifndef PATHGEO_CORE_HPP
#define PATHGEO_CORE_HPP

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pathgeo {

/// Largest chart dimension supported. Coordinates live on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Two base points are the same point when their distance is below this.
inline constexpr double kBaseTolerance = 1e-9;

inline constexpr int kDefaultStepsPerUnit = 1000;
inline constexpr std::size_t kDefaultSegments = 256;
inline constexpr std::size_t kDefaultSheetSegments = 64;
inline constexpr double kDefaultCollar = 1.0 / 16.0;
inline constexpr double kDefaultBacktrackTolerance = 1e-9;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (mismatched bases, t outside [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A geodesic or transport ODE left the chart domain.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, Vec last_point, Vec last_velocity, double last_s,
                     std::optional<std::size_t> fiber = std::nullopt)
        : Error(what), last_point_(std::move(last_point)), last_velocity_(std::move(last_velocity)),
          last_s_(last_s), fiber_(fiber) {}

    const Vec& last_point() const { return last_point_; }
    const Vec& last_velocity() const { return last_velocity_; }
    double last_s() const { return last_s_; }
    std::optional<std::size_t> fiber() const { return fiber_; }

private:
    Vec last_point_;
    Vec last_velocity_;
    double last_s_;
    std::optional<std::size_t> fiber_;
};

/// Two points are not within each other's normal neighbourhood.
class NormalNeighborhoodError : public Error {
public:
    NormalNeighborhoodError(const std::string& what, std::size_t worst_index, double worst_t,
                            double worst_distance)
        : Error(what), worst_index_(worst_index), worst_t_(worst_t), worst_distance_(worst_distance) {}

    std::size_t worst_index() const { return worst_index_; }
    double worst_t() const { return worst_t_; }
    double worst_distance() const { return worst_distance_; }

private:
    std::size_t worst_index_;
    double worst_t_;
    double worst_distance_;
};

/// Adjacent samples of a path are too far apart to be joined by a unique geodesic.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Concatenation of paths that are not constant near their ends.
class SmoothnessError : public Error {
public:
    using Error::Error;
};

/// A tangent field whose back-tracks do not coincide with those of its base path.
class TangentCompatibilityError : public Error {
public:
    TangentCompatibilityError(const std::string& what, std::size_t node) : Error(what), node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

enum class ComposabilityCondition { path_endpoint, field_endpoint, time, interval, seed, grid };

inline const char* to_string(ComposabilityCondition c) {
    switch (c) {
    case ComposabilityCondition::path_endpoint: return "path_endpoint";
    case ComposabilityCondition::field_endpoint: return "field_endpoint";
    case ComposabilityCondition::time: return "time";
    case ComposabilityCondition::interval: return "interval";
    case ComposabilityCondition::seed: return "seed";
    case ComposabilityCondition::grid: return "grid";
    }
    return "unknown";
}

class ComposabilityError : public Error {
public:
    ComposabilityError(const std::string& what, ComposabilityCondition condition)
        : Error(what), condition_(condition) {}
    ComposabilityCondition condition() const { return condition_; }

private:
    ComposabilityCondition condition_;
};

/// Malformed scenario, morphism or path input.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace pathgeo

#endif // PATHGEO_CORE_HPP
