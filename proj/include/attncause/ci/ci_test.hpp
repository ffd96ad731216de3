#pragma once

#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "attncause/ci/correlation.hpp"

namespace attncause {

struct CiDecision {
    bool independent = false;
    double statistic = 0.0;
    double partial_correlation = 0.0;
    double p_value = 1.0;
};

/// |ρ| is capped here before atanh so duplicated attention rows stay finite.
inline constexpr double kFisherClamp = 1.0 - 1e-12;

/// Two-sided critical value Φ⁻¹(1 − α/2).
double fisher_critical_value(double alpha);

/// Fisher-z test of ρ_ij·z = 0 on a correlation matrix with sample size N:
/// statistic √(N − |z| − 3)·|atanh ρ_ij·z| against Φ⁻¹(1 − α/2).
CiDecision ci_test(const Correlation& rho, int i, int j, std::span<const int> z, double alpha);

/// Largest conditioning-set size that keeps N − |z| − 3 ≥ 1.
int max_conditioning_size(std::int64_t effective_sample_size);

/// Abstract independence oracle consumed by structure learning.
class IndependenceTest {
public:
    virtual ~IndependenceTest() = default;
    /// `z` is sorted ascending and excludes i and j.
    virtual CiDecision test(int i, int j, std::span<const int> z) = 0;
    [[nodiscard]] virtual int variables() const = 0;
    /// Upper bound on |z| this test can evaluate.
    [[nodiscard]] virtual int max_conditioning() const { return variables() - 2; }
    /// Distinct tests evaluated so far, when the implementation counts them.
    [[nodiscard]] virtual std::size_t tests_run() const { return 0; }
};

/// Partial-correlation test over one session's correlation matrix. Results
/// are memoised per (i, j, z); an instance belongs to a single session.
class PartialCorrelationTest final : public IndependenceTest {
public:
    PartialCorrelationTest(Correlation rho, double alpha);

    CiDecision test(int i, int j, std::span<const int> z) override;
    [[nodiscard]] int variables() const override { return static_cast<int>(rho_.dim()); }
    [[nodiscard]] int max_conditioning() const override;
    [[nodiscard]] const Correlation& correlation() const { return rho_; }
    [[nodiscard]] std::size_t tests_run() const override { return computed_; }

private:
    Correlation rho_;
    double alpha_;
    std::map<std::tuple<int, int, std::vector<int>>, CiDecision> memo_;
    std::size_t computed_ = 0;
};

}  // namespace attncause
