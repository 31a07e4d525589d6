#pragma once

#include <ldinav/dataset.hpp>
#include <ldinav/ldi_build.hpp>
#include <ldinav/segment_container.hpp>
#include <ldinav/synthesis.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ldinav {

/// Luma PSNR in dB, +infinity for identical planes. Throws std::invalid_argument on a size
/// mismatch.
auto psnr(const ViewImage &a, const ViewImage &b) -> double;

/// Per-view PSNR is capped here so that averages stay finite.
inline constexpr double kPsnrCap = 100.0;

enum class Method : std::uint8_t { ExtendedLdi, Simulcast };

auto method_name(Method method) -> std::string;
auto parse_method(const std::string &name) -> Method;

struct RdPoint {
  Method method{Method::ExtendedLdi};
  double quality{0.0};
  std::uint64_t total_bits{0};
  double bpp{0.0}; // total bits per source-view pixel
  double mean_psnr{0.0};
  std::vector<double> view_psnr;

  friend auto operator==(const RdPoint &, const RdPoint &) -> bool = default;
};

// The whole dataset forms one navigation segment: its views are the originals and
// `viewpoints - views` interpolated poses are evaluated between them.
struct SegmentConfig {
  std::size_t viewpoints{15};
  std::optional<std::size_t> reference; // default: median view
  BuildOptions build;
  Preprocess preprocess{Preprocess::Fill};
  RenderOptions render;
  std::optional<std::filesystem::path> dump_root; // PNGs at out/<method>/q<q>/render_<pose>.png
  std::vector<double> dump_poses;
};

/// Ground truth for each segment viewpoint, computed from the original data only.
auto segment_ground_truth(const MultiviewDataset &dataset, const SegmentConfig &config)
    -> std::vector<ViewImage>;

auto rd_sweep_ldi(const MultiviewDataset &dataset, const SegmentConfig &config,
                  const std::vector<double> &qualities) -> std::vector<RdPoint>;
auto rd_sweep_simulcast(const MultiviewDataset &dataset, const SegmentConfig &config,
                        const std::vector<double> &qualities) -> std::vector<RdPoint>;

/// Bits of the simulcast coding of every view at quality q, and the decoded views.
struct SimulcastResult {
  std::uint64_t total_bits{0};
  MultiviewDataset decoded;
};
auto simulcast_code(const MultiviewDataset &dataset, const CoderQuality &quality)
    -> SimulcastResult;

/// CSV with columns method, quality, total_bits, bpp, mean_psnr, psnr_0 ... psnr_{n-1}.
/// Throws std::invalid_argument for an empty list.
auto report_csv(const std::vector<RdPoint> &points) -> std::string;
auto parse_report_csv(const std::string &csv) -> std::vector<RdPoint>;
/// Writes report_csv to `file`, creating parent directories.
void emit_report(const std::vector<RdPoint> &points, const std::filesystem::path &file);

/// "render_2.01.png"
auto render_file_name(double pose) -> std::string;

// Bits of `curve` at `psnrDb`, interpolated linearly between neighbouring points. Outside the
// curve's PSNR range the nearest end point is used if it lies within `tolerance` dB.
auto bits_at_psnr(const std::vector<RdPoint> &curve, double psnrDb, double tolerance = 0.5)
    -> std::optional<double>;

/// Number of `ldi` points needing strictly fewer bits than `simulcast` at the same PSNR.
auto count_rate_wins(const std::vector<RdPoint> &ldi, const std::vector<RdPoint> &simulcast,
                     double tolerance = 0.5) -> std::size_t;

} // namespace ldinav
