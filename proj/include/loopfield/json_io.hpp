#pragma once

// JSON encodings for every externally visible type, plus file helpers.
// Objects serialize with sorted keys and shortest round-trip floats, so a
// fixed seed yields byte-identical output.

#include <json.hpp>

#include "loopfield/decomposition.hpp"
#include "loopfield/inversion.hpp"

namespace loopfield {

using nlohmann::json;

json to_json(const Grid& g);
json to_json(const PixelSet& p);
json to_json(const OrientedLoop& loop);
json to_json(const EdgeMeasure& m);
json to_json(const DipoleField& d);
json to_json(const Magnetization& m);
json to_json(const CellFunction& phi);
json to_json(const LoopDecomposition& d);
json to_json(const MeasurementSetup& s);
json to_json(const Reading& r);
json to_json(const EdgeSupport& s);
json to_json(const SolveOptions& o);
json to_json(const CertReport& c);
json to_json(const Solution& s);
json to_json(const KernelReport& k);
json to_json(const MinimalityReport& m);
json to_json(const Ep1Report& r);
json to_json(const VariationalReport& r);

Grid grid_from_json(const json& j);
PixelSet pixelset_from_json(const json& j);
OrientedLoop loop_from_json(const json& j);
EdgeMeasure edge_measure_from_json(const json& j);
DipoleField dipole_field_from_json(const json& j);
Magnetization magnetization_from_json(const json& j);
CellFunction cell_function_from_json(const json& j);
LoopDecomposition decomposition_from_json(const json& j);
MeasurementSetup setup_from_json(const json& j);
Reading reading_from_json(const json& j);
EdgeSupport support_from_json(const json& j);
SolveOptions solve_options_from_json(const json& j);

// Either a bare EdgeMeasure file or a Magnetization file.
Magnetization magnetization_from_measure_file(const json& j);

json load_json(const std::string& path);
void save_json(const json& j, const std::string& path);

}  // namespace loopfield
