#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace contactlab {

/// Axis-aligned box; lower/upper may be infinite when used as a domain.
struct Box
{
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Box() = default;
    Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

    static Box unbounded(Eigen::Index dim);

    Eigen::Index dimension() const { return lower.size(); }
    bool contains(const Eigen::VectorXd& x) const;
    /// Strict interior test; used for chart domains such as z > 0.
    bool contains_open(const Eigen::VectorXd& x) const;
};

/// Uniform samples from a bounded box, reproducible from the seed.
std::vector<Eigen::VectorXd> sample_box(const Box& box, std::size_t count, std::uint64_t seed);

} // namespace contactlab
