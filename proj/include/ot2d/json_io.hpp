#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ot2d/decompose.hpp"
#include "ot2d/rebuild.hpp"

namespace ot2d::io {

using nlohmann::json;

/// All value serialization is lossless: doubles are emitted with enough
/// digits to round-trip bit-exactly, keys are ordered, so equal inputs give
/// byte-identical files.

json to_json(const Vec2& v);
json to_json(const DiscreteMeasure& mu);
json to_json(const ConvexPolygon& p);
json to_json(const ConvexBody& K);
json to_json(const NormSpec& norm);
json to_json(const CostSpec& c);
json to_json(const TransportPlan& plan);
json to_json(const DualPotentials& pots);
json to_json(const DualityReport& r);
json to_json(const FaceDecomposition& d);
json to_json(const DecompositionStats& s);
json to_json(const RebuildReport& r);
json to_json(const MapCheckReport& r);

Vec2 vec2_from_json(const json& j);
DiscreteMeasure measure_from_json(const json& j);
ConvexPolygon polygon_from_json(const json& j);
ConvexBody body_from_json(const json& j);
NormSpec norm_from_json(const json& j);
CostSpec cost_from_json(const json& j);
TransportPlan plan_from_json(const json& j);
DualPotentials potentials_from_json(const json& j);

/// Serialize with sorted keys and round-trip-exact numbers.
std::string dump(const json& j, int indent = 2);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// CSV atom lists with header "x1,x2,mass". Parse errors carry the line number.
DiscreteMeasure measure_from_csv(std::istream& in, const std::string& origin = "<csv>");
DiscreteMeasure measure_from_csv_file(const std::string& path);
void measure_to_csv(const DiscreteMeasure& mu, std::ostream& out);
void measure_to_csv_file(const DiscreteMeasure& mu, const std::string& path);

/// Reads a measure from .csv or .json by extension.
DiscreteMeasure measure_from_file(const std::string& path);

/// A solved instance bundle (measures, cost, plan, potentials, value).
struct SolutionFile {
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  CostSpec cost;
  TransportPlan plan;
  DualPotentials potentials;
  double value = 0.0;
};

json to_json(const SolutionFile& s);
SolutionFile solution_from_json(const json& j);

}  // namespace ot2d::io
