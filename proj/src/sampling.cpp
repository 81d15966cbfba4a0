#include "contactlab/sampling.hpp"

#include "contactlab/error.hpp"

#include <cmath>
#include <limits>

namespace contactlab {

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi))
{
    if (lower.size() != upper.size())
        throw InputError("box bounds have different dimensions");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw InputError("box lower bound exceeds upper bound in dimension " + std::to_string(i));
}

Box Box::unbounded(Eigen::Index dim)
{
    const double inf = std::numeric_limits<double>::infinity();
    return Box(Eigen::VectorXd::Constant(dim, -inf), Eigen::VectorXd::Constant(dim, inf));
}

bool Box::contains(const Eigen::VectorXd& x) const
{
    if (x.size() != lower.size())
        return false;
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

bool Box::contains_open(const Eigen::VectorXd& x) const
{
    if (x.size() != lower.size())
        return false;
    return (x.array() > lower.array()).all() && (x.array() < upper.array()).all();
}

std::vector<Eigen::VectorXd> sample_box(const Box& box, std::size_t count, std::uint64_t seed)
{
    for (Eigen::Index i = 0; i < box.dimension(); ++i)
        if (!std::isfinite(box.lower[i]) || !std::isfinite(box.upper[i]))
            throw InputError("cannot sample an unbounded box");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Eigen::VectorXd x(box.dimension());
        for (Eigen::Index i = 0; i < box.dimension(); ++i)
            x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * unit(rng);
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace contactlab
