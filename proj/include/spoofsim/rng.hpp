// SPDX-License-Identifier: Apache-2.0
//
// spoofsim  Uplink channel estimation under pilot spoofing attacks
// Copyright (C) 2026 The spoofsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace spoofsim
{

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Counter-based streams allow every Monte
// Carlo trial to own an independent, randomly accessible stream derived
// from (master seed, trial index, grid index, purpose), which is what makes
// sweep outputs byte-identical for any number of worker threads.
struct philox4x32
{
    using counter_t = std::array<std::uint32_t, 4>;
    using key_t = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static counter_t block(counter_t ctr, key_t key)
    {
        for (int round = 0; round < 10; ++round)
        {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

// Stream purposes used by the harness; pinned so that enabling or disabling
// individual estimators never shifts any other consumer's draws.
enum class stream_purpose : std::uint32_t
{
    channel = 0,
    eve_knowledge = 1,
    snapshots = 2,
    generic = 3,
};

class rng_stream
{
  public:
    rng_stream(std::uint64_t master_seed, std::uint32_t trial_index = 0,
               std::uint32_t grid_index = 0,
               stream_purpose purpose = stream_purpose::generic)
        : key_{static_cast<std::uint32_t>(master_seed),
               static_cast<std::uint32_t>(master_seed >> 32)},
          base_{0u, trial_index, grid_index, static_cast<std::uint32_t>(purpose)}
    {
    }

    std::uint32_t next_u32()
    {
        if (pos_ == 4)
        {
            philox4x32::counter_t ctr = base_;
            ctr[0] = block_;
            buf_ = philox4x32::block(ctr, key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform()
    {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Hand-rolled on purpose:
    // std::normal_distribution's algorithm is implementation-defined, which
    // would unfreeze every stored reference value on a toolchain change.
    double gaussian()
    {
        if (have_cached_)
        {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

    // Circularly symmetric complex Gaussian CN(0, variance): independent
    // real/imaginary parts, each N(0, variance/2).
    std::complex<double> cgaussian(double variance = 1.0)
    {
        const double s = std::sqrt(variance * 0.5);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

  private:
    philox4x32::key_t key_;
    philox4x32::counter_t base_;
    philox4x32::counter_t buf_{};
    std::uint32_t block_ = 0;
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace spoofsim
