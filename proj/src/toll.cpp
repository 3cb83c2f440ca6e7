#include "todp/toll.hpp"

#include <algorithm>
#include <cmath>

#include "todp/errors.hpp"

namespace todp {

TollProfile::TollProfile(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw InputError("toll profile needs at least one component");
    for (const auto& c : components_) {
        if (!(c.amplitude >= 0.0)) throw InputError("toll amplitude must be >= 0");
        if (!(c.width > 0.0)) throw InputError("toll width must be > 0");
    }
}

double TollProfile::operator()(double t) const {
    double toll = 0.0;
    for (const auto& c : components_) {
        const double z = (t - c.mean) / c.width;
        toll += c.amplitude * std::exp(-0.5 * z * z);
    }
    return toll;
}

void TollBounds::validate() const {
    if (!(amplitude.lo < amplitude.hi) || !(mean.lo < mean.hi) || !(width.lo < width.hi)) {
        throw ConfigError("toll bounds need lo < hi for every parameter");
    }
    if (amplitude.lo < 0.0 || width.lo <= 0.0) {
        throw ConfigError("toll bounds must keep amplitude >= 0 and width > 0");
    }
}

std::vector<double> TollBounds::lower(int k) const {
    std::vector<double> lo;
    for (int i = 0; i < k; ++i) lo.insert(lo.end(), {amplitude.lo, mean.lo, width.lo});
    return lo;
}

std::vector<double> TollBounds::upper(int k) const {
    std::vector<double> hi;
    for (int i = 0; i < k; ++i) hi.insert(hi.end(), {amplitude.hi, mean.hi, width.hi});
    return hi;
}

std::vector<double> to_vector(const TollProfile& profile) {
    std::vector<double> v;
    v.reserve(3 * profile.components().size());
    for (const auto& c : profile.components()) v.insert(v.end(), {c.amplitude, c.mean, c.width});
    return v;
}

TollProfile from_vector(std::span<const double> v, int k, const TollBounds& bounds) {
    if (k < 1 || v.size() != static_cast<std::size_t>(3 * k)) {
        throw EncodingError("decision vector length " + std::to_string(v.size()) +
                            " does not match 3K with K=" + std::to_string(k));
    }
    const auto lo = bounds.lower(k);
    const auto hi = bounds.upper(k);
    std::vector<GaussianComponent> comps;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= lo[i] && v[i] <= hi[i])) {
            throw EncodingError("decision vector entry " + std::to_string(i) + " = " +
                                std::to_string(v[i]) + " is outside its bounds");
        }
    }
    for (int c = 0; c < k; ++c) comps.push_back({v[3 * c], v[3 * c + 1], v[3 * c + 2]});
    return TollProfile(std::move(comps));
}

std::vector<double> clamp_to_bounds(std::span<const double> v, const TollBounds& bounds) {
    if (v.empty() || v.size() % 3 != 0) {
        throw EncodingError("decision vector length " + std::to_string(v.size()) +
                            " is not a positive multiple of 3");
    }
    const int k = static_cast<int>(v.size() / 3);
    const auto lo = bounds.lower(k);
    const auto hi = bounds.upper(k);
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lo[i], hi[i]);
    return out;
}

}  // namespace todp
