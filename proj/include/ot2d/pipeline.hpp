#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include <json.hpp>

#include "ot2d/json_io.hpp"
#include "ot2d/rebuild.hpp"

namespace ot2d {

/// Deterministic uniform double generator. The engine is the portable
/// mt19937_64; raw 64-bit draws are mapped to [0, 1) by an explicit shift
/// and scale so streams are bit-identical across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  double next_double() {  // uniform in [0, 1), 53-bit resolution
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * next_double(); }
  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

struct ToleranceConfig {
  double geometric = 1e-9;      // relative membership / face tolerance
  double lp = 1e-9;             // duality certificate tolerance
  double coord_tol_factor = 1e-9;  // fiber quantization = factor * diameter
  double zero_mass = 1e-13;     // plan entry drop threshold
};

enum class MassMode { kEqual, kRandom };

struct InstanceConfig {
  std::uint64_t seed = 0;
  int n = 1;
  int m = 1;
  MassMode mass_mode = MassMode::kEqual;
  std::array<double, 4> domain{0.0, 1.0, 0.0, 1.0};  // x1 lo, x1 hi, x2 lo, x2 hi
  std::optional<CostSpec> cost;
  ToleranceConfig tol;
  int threads = 1;
};

io::json config_to_json(const InstanceConfig& cfg);
InstanceConfig config_from_json(const io::json& j);

/// Draws both measures from the config: positions uniform in the domain box
/// (redrawn on exact duplicates), masses either exactly equal with the last
/// one compensated so the total is exactly 1, or random bounded away from 0.
std::pair<DiscreteMeasure, DiscreteMeasure> generate_instance(const InstanceConfig& cfg);

struct PipelineResult {
  SolveResult solution;
  DualityReport duality;
  std::optional<DecompositionStats> decomposition_stats;
  std::optional<FaceDecomposition> decomposition;
  std::optional<RebuildReport> rebuild;
  std::optional<DualityReport> duality_after_rebuild;
  std::optional<MapCheckReport> map_check;
  TransportPlan final_plan;
  bool strictly_convex_route = false;
  bool pass = false;
  double wall_seconds = 0.0;
};

/// Full chain on given data: solve, certify, then (by cost family)
/// decompose + rebuild + re-certify, or check the projection map formula,
/// or stop at the certificate for strictly convex unconstrained costs.
PipelineResult run_pipeline(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const CostSpec& cost, const ToleranceConfig& tol = {},
                            int threads = 1);

/// Generate + run in one call.
PipelineResult run_pipeline(const InstanceConfig& cfg);

/// Deterministic JSON summary of a pipeline run (plan, potentials, reports).
io::json pipeline_result_to_json(const PipelineResult& r, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu, const CostSpec& cost);

}  // namespace ot2d
