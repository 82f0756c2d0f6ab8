#ifndef DDP_IO_HPP
#define DDP_IO_HPP

/// @file io.hpp
/// @brief Time-series CSV emission and the bit-exact binary checkpoint format.
///
/// Checkpoint layout (little-endian):
///   bytes 0..7    magic "DDPSIM1\0"
///   bytes 8..11   uint32 dim
///   bytes 12..15  uint32 cells per axis
///   bytes 16..47  float64 half_width, t, epsilon, alpha
///   then three float64 arrays (n, p, psi) of cells^dim values each,
///   row-major with x fastest.

#include "ddp/dynamics.hpp"
#include "ddp/entropy.hpp"

#include <string>
#include <vector>

namespace ddp {

/// CSV with the exact header
/// t,mass_n,mass_p,charge,linf_n,linf_p,l2_n,l2_p,entropy,dissipation,l1_dist_n,l1_dist_p
/// and floats at 17 significant digits (lossless double round trip).
void emit_timeseries(const std::vector<EntropyReport>& reports, const std::string& path);

struct CheckpointMeta {
    double epsilon = 1.0;
    double alpha = 0.0;
};

void checkpoint_save(const CarrierState& s, const CheckpointMeta& meta, const std::string& path);

struct Checkpoint {
    Grid grid;
    double t = 0.0;
    CheckpointMeta meta;
    ScalarField n, p, psi;
};

/// Throws on magic mismatch or truncated files. Grid compatibility with the
/// requesting run is the caller's check.
Checkpoint checkpoint_load(const std::string& path);

} // namespace ddp

#endif
