#include "attncause/ci/ci_test.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace attncause {

double fisher_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("significance level must lie in (0, 1)");
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, 1.0 - alpha / 2.0);
}

int max_conditioning_size(std::int64_t effective_sample_size) {
    return static_cast<int>(std::max<std::int64_t>(-1, effective_sample_size - 4));
}

CiDecision ci_test(const Correlation& rho, int i, int j, std::span<const int> z, double alpha) {
    const double critical = fisher_critical_value(alpha);
    const std::int64_t dof = rho.effective_sample_size - static_cast<std::int64_t>(z.size()) - 3;
    if (dof < 1) {
        throw SampleSizeError("effective sample size " + std::to_string(rho.effective_sample_size) +
                              " too small for conditioning set of size " + std::to_string(z.size()) +
                              "; cap the conditioning-set size at " +
                              std::to_string(max_conditioning_size(rho.effective_sample_size)));
    }
    CiDecision d;
    d.partial_correlation = partial_correlation(rho.values, i, j, z);
    const double r = std::clamp(d.partial_correlation, -kFisherClamp, kFisherClamp);
    d.statistic = std::sqrt(static_cast<double>(dof)) * std::abs(std::atanh(r));
    d.p_value = std::erfc(d.statistic / std::sqrt(2.0));
    d.independent = d.statistic <= critical;
    return d;
}

PartialCorrelationTest::PartialCorrelationTest(Correlation rho, double alpha) : rho_(std::move(rho)), alpha_(alpha) {
    fisher_critical_value(alpha_);
}

int PartialCorrelationTest::max_conditioning() const {
    return std::min(variables() - 2, max_conditioning_size(rho_.effective_sample_size));
}

CiDecision PartialCorrelationTest::test(int i, int j, std::span<const int> z) {
    if (i > j) std::swap(i, j);
    auto key = std::make_tuple(i, j, std::vector<int>(z.begin(), z.end()));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    CiDecision d = ci_test(rho_, i, j, z, alpha_);
    ++computed_;
    memo_.emplace(std::move(key), d);
    return d;
}

}  // namespace attncause
