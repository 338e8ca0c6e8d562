#ifndef CHARGEOPT_UTIL_HPP
#define CHARGEOPT_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace chargeopt {

// Neumaier-compensated accumulator.  All statistics in this project reduce
// through this type in index order, which makes parallel-scored arrays
// aggregate bit-identically to a sequential pass.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);
double mean(std::span<const double> values);
// Sample standard deviation with (n-1) normalization; 0 for n < 2.
double sample_stddev(std::span<const double> values);

struct MeanStdErr {
    double mean = 0.0;
    double std_err = 0.0;
};
MeanStdErr mean_and_se(std::span<const double> values);

// FNV-1a 64-bit, used for artifact and instance checksums (stability, not
// cryptography).
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64(const std::string& s);
std::string fnv1a64_hex(const std::string& s);

// Locale-independent numeric formatting for CSV output.
std::string format_double(double v, int significant_digits = 12);

std::string read_text_file(const std::string& path);
// Write-then-rename so concurrent readers never observe a partial file.
void write_text_file_atomic(const std::string& path, const std::string& content);

bool env_flag_verbose();
void log_info(const std::string& msg);

} // namespace chargeopt

#endif
