#include "mta/rng.hpp"

#include <cmath>
#include <cstring>

namespace mta {

double Rng64::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

double Rng64::gumbel(double scale) {
    return -scale * std::log(-std::log(uniform()));
}

int Rng64::pick(const double* cw, int k) {
    const double u = uniform() * cw[k - 1];
    for (int i = 0; i < k - 1; ++i)
        if (u < cw[i]) return i;
    return k - 1;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, const char* tag, std::uint64_t index) {
    const std::uint64_t t = fnv1a64(tag, std::strlen(tag));
    return mix64(mix64(master ^ t) + index);
}

} // namespace mta
