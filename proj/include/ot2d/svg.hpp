#pragma once

#include <optional>
#include <string>

#include "ot2d/decompose.hpp"

namespace ot2d::svg {

/// Renders an instance as a standalone SVG: source atoms as filled disks,
/// target atoms as hollow disks, one displacement arrow per plan entry
/// colored by its face (gray for rigid atoms, red for ambiguous ones), and,
/// for polyhedral costs, an inset of the unit ball with its faces in the
/// same colors.
std::string render_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const TransportPlan& plan, const CostSpec& cost,
                        const FaceDecomposition* decomp = nullptr);

void render_plan_to_file(const std::string& path, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu, const TransportPlan& plan,
                         const CostSpec& cost, const FaceDecomposition* decomp = nullptr);

}  // namespace ot2d::svg
