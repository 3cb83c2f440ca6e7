#pragma once

#include <span>
#include <vector>

#include "todp/population.hpp"

namespace todp {

struct GaussianComponent {
    double amplitude = 0.0;  // toll rate; times L_i * w gives DKK
    double mean = 0.0;       // minutes
    double width = 1.0;      // minutes

    bool operator==(const GaussianComponent&) const = default;
};

// Time-of-day toll as a sum of K >= 1 Gaussian bumps.
class TollProfile {
public:
    explicit TollProfile(std::vector<GaussianComponent> components);

    static TollProfile single(double amplitude, double mean, double width) {
        return TollProfile({GaussianComponent{amplitude, mean, width}});
    }

    double operator()(double t) const;

    const std::vector<GaussianComponent>& components() const noexcept { return components_; }
    int size() const noexcept { return static_cast<int>(components_.size()); }

    bool operator==(const TollProfile&) const = default;

private:
    std::vector<GaussianComponent> components_;
};

struct TollBounds {
    Interval amplitude{4.0, 30.0};
    Interval mean{30.0, 90.0};
    Interval width{10.0, 50.0};

    void validate() const;

    // Per-coordinate bounds of the flat [A1, xi1, s1, ..., AK, xiK, sK] vector.
    std::vector<double> lower(int k) const;
    std::vector<double> upper(int k) const;
};

inline double eval_toll(const TollProfile& profile, double t) { return profile(t); }

std::vector<double> to_vector(const TollProfile& profile);

// Throws EncodingError on a wrong length or out-of-bounds entry.
TollProfile from_vector(std::span<const double> v, int k, const TollBounds& bounds = {});

std::vector<double> clamp_to_bounds(std::span<const double> v, const TollBounds& bounds);

}  // namespace todp
