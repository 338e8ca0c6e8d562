#include "chargeopt/util.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chargeopt/errors.hpp"

namespace chargeopt {

double compensated_sum(std::span<const double> values) {
    KahanSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    KahanSum acc;
    for (double v : values) acc.add((v - m) * (v - m));
    const double var = acc.value() / static_cast<double>(n - 1);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

MeanStdErr mean_and_se(std::span<const double> values) {
    MeanStdErr r;
    r.mean = mean(values);
    if (values.size() >= 2)
        r.std_err = sample_stddev(values) / std::sqrt(static_cast<double>(values.size()));
    return r;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(std::span<const unsigned char>(
        reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::string fnv1a64_hex(const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

std::string format_double(double v, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FileError("cannot write file: " + tmp);
        out << content;
        if (!out) throw FileError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

bool env_flag_verbose() {
    const char* v = std::getenv("CHARGEOPT_LOG");
    return v != nullptr && v[0] != '\0' && v[0] != '0';
}

void log_info(const std::string& msg) {
    if (env_flag_verbose()) std::cerr << "[chargeopt] " << msg << "\n";
}

} // namespace chargeopt
