#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ratiorules {

/// Two aligned samples, one value per dataset for each system.
class PairedSamples {
public:
    /// Throws InvalidArgument unless sizes match and are >= 2.
    PairedSamples(std::vector<double> a, std::vector<double> b);

    const std::vector<double>& a() const noexcept { return a_; }
    const std::vector<double>& b() const noexcept { return b_; }
    std::size_t size() const noexcept { return a_.size(); }

private:
    std::vector<double> a_;
    std::vector<double> b_;
};

struct TTestResult {
    double t;
    std::size_t dof;
    double p;  // P(T >= t) under H0; alternative mean(a - b) > 0
};

/// Paired t-test on d = a - b. Throws ZeroVariance when all differences
/// are equal.
TTestResult paired_ttest_one_sided(const PairedSamples& samples);

struct Summary {
    double mean;
    double sd;  // sample (n - 1) standard deviation; NaN when n = 1
};

/// Throws InvalidArgument on empty input.
Summary summary(std::span<const double> values);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with `dof` degrees of freedom.
double student_t_upper_tail(double t, double dof);

}  // namespace ratiorules
