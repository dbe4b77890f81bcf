#pragma once

// "MFM1" container: little-endian, 4-byte magic, then
//   u32 kind (1 dataset, 2 model), u64 d, u64 n, u64 k, u32 variant, u32 flags
// (flags bit 0: ground truth follows, bit 1: labels are sign-flipped)
// followed by float64 payloads in column-major order.
//   dataset: X (d*n), y (n), and with flags&1 the ground truth:
//            w* (d), M* (d*d), sigma (k), u64 r, basis (d*r),
//            u64 c, left (d*c), right (d*c), u32 zero_diagonal
//   model:   w (d), u_bar (d*k), u64 v_cols, v (d*v_cols), u32 iteration

#include "mfm/model.hpp"
#include "mfm/solver.hpp"
#include "mfm/types.hpp"

#include <filesystem>
#include <optional>
#include <span>

namespace mfm::io {

struct Dataset {
  Batch batch;
  std::optional<GroundTruth> truth;
  bool labels_flipped = false;
};

void save_dataset(const std::filesystem::path& path, const Batch& batch,
                  const GroundTruth* truth = nullptr, bool labels_flipped = false);
Dataset load_dataset(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const ModelState& state);
ModelState load_model(const std::filesystem::path& path);

// Columns x0..x{d-1},y; one row per instance.
void export_csv(const std::filesystem::path& path, const Batch& batch);

// iteration,test_rmse,recovery_error,sin_theta,wall_ms
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRecord> trace,
                     bool zero_wall_time = false);

}  // namespace mfm::io
