#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "bbarena/numkit/vector.hpp"

namespace bbarena {

/// Counter-based random stream (Philox4x32-10 keyed by the master seed, with
/// the stream id in the upper counter words). Draw n of the stream is a pure
/// function of (master_seed, stream_id, n), so a stream can be reconstructed
/// anywhere and distinct stream ids never share a counter block.
///
/// Every scalar draw (uniform, normal, index) consumes exactly one counter.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    /// Stream id obtained by hashing a list of integers (cell index, sample,
    /// seed, ...). Used to give every task of a grid its own stream.
    static std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts);
    /// A sibling stream of the same master seed, id = stream_key({stream_id, sub}).
    RngStream child(std::uint64_t sub) const;

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform();
    /// Standard normal via the inverse normal CDF of one uniform.
    double normal();
    /// Uniform integer in [0, n), n > 0.
    std::size_t uniform_index(std::size_t n);
    /// +1.0 or -1.0 with equal probability.
    double sign();

    void fill_normal(std::span<double> out);

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
};

/// d independent standard-normal draws; advances the stream by d.
Vector sample_gaussian(RngStream& rng, std::size_t d);

/// Inverse of the standard normal CDF (Wichura's AS241, ~1e-16 relative).
double normal_quantile(double p);
/// Standard normal CDF.
double normal_cdf(double x);

/// Philox4x32 with 10 rounds. Exposed for known-answer tests.
struct Philox4x32 {
    using Counter = std::uint32_t[4];
    using Key = std::uint32_t[2];
    static void apply(const Counter in, const Key key, Counter out);
};

}  // namespace bbarena
