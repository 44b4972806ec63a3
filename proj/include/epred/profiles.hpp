#pragma once

#include "epred/fields.hpp"

#include <cstdint>

namespace epred {

/// Band-limited random Fourier series. Coefficients are drawn per wave
/// vector in a fixed order that does not depend on the lattice size, so the
/// same seed samples the same continuum field on every grid of a ladder.
struct FourierProfile {
    int modes = 1;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
};

/// Throws std::invalid_argument unless 1 <= modes <= floor(N/4) on every axis.
void check_profile(const Grid& grid, const FourierProfile& p);

AlgebraField fourier_algebra_field(const Grid& grid, int algebra_dim, const FourierProfile& p);
ConnectionForm fourier_connection(const Grid& grid, int algebra_dim, const FourierProfile& p);
/// exp of a Fourier algebra field.
GroupField fourier_group_field(const LieGroup& group, const Grid& grid, const FourierProfile& p);
/// gauge_act(Lambda, 0) for Lambda = fourier_group_field(p).
ConnectionForm pure_gauge(const LieGroup& group, const Grid& grid, const FourierProfile& p);

}  // namespace epred
