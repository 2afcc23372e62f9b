#include "ratiorules/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ratiorules/errors.hpp"

namespace ratiorules {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceFailure("incomplete beta continued fraction did not converge", std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

PairedSamples::PairedSamples(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.size() != b_.size()) throw InvalidArgument("paired samples differ in length");
    if (a_.size() < 2) throw InvalidArgument("paired samples need at least 2 pairs");
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta requires 0 <= x <= 1");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double dof) {
    if (!(dof > 0.0)) throw InvalidArgument("degrees of freedom must be > 0");
    if (std::isnan(t)) throw InvalidArgument("t is NaN");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? tail : 1.0 - tail;
}

TTestResult paired_ttest_one_sided(const PairedSamples& samples) {
    const std::size_t n = samples.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = samples.a()[i] - samples.b()[i];
    bool all_equal = true;
    for (double v : d) all_equal = all_equal && v == d.front();
    if (all_equal) throw ZeroVariance("differences have zero variance");
    const auto s = summary(d);
    const double t = s.mean / (s.sd / std::sqrt(static_cast<double>(n)));
    return {t, n - 1, student_t_upper_tail(t, static_cast<double>(n - 1))};
}

Summary summary(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("summary of an empty sequence");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace ratiorules
