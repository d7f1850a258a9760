#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace thermo {

enum class ScheduleKind { uniform, powered_fraction, beta_quantile, refined, explicit_points };

const char* to_string(ScheduleKind kind);

// Ordered discretisation 0 = t_0 < t_1 < ... < t_n = 1 of the temperature axis.
class TemperatureSchedule {
public:
    // The single panel [0, 1].
    TemperatureSchedule() : points_{0.0, 1.0}, kind_(ScheduleKind::uniform) {}
    // Validates the invariants (exact endpoints, strictly increasing, n >= 1).
    TemperatureSchedule(std::vector<double> points, ScheduleKind kind);

    std::span<const double> points() const { return points_; }
    double operator[](std::size_t i) const { return points_[i]; }
    std::size_t size() const { return points_.size(); }
    // Number of panels.
    std::size_t n() const { return points_.size() - 1; }
    ScheduleKind kind() const { return kind_; }

    // Index of an exact schedule point, or npos.
    std::size_t index_of(double t) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool operator==(const TemperatureSchedule&) const = default;

private:
    std::vector<double> points_;
    ScheduleKind kind_;
};

TemperatureSchedule uniform_schedule(std::size_t n);
// t_i = (i/n)^c, c >= 1: denser towards t = 0.
TemperatureSchedule powered_fraction_schedule(std::size_t n, double c);
// Beta(a, 1) quantiles of the uniform grid: t_i = (i/n)^(1/a), 0 < a <= 1.
TemperatureSchedule beta_quantile_schedule(std::size_t n, double a);
TemperatureSchedule explicit_schedule(std::vector<double> points);
// Inserts k - 1 evenly spaced points strictly between the adjacent points lo < hi.
TemperatureSchedule refine_interval(const TemperatureSchedule& schedule, double lo, double hi, std::size_t k);

}  // namespace thermo
