#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lossbar/barcode.hpp"
#include "lossbar/diagram.hpp"
#include "lossbar/pathopt.hpp"
#include "lossbar/trainer.hpp"

namespace lossbar::io {

using Json = nlohmann::ordered_json;

// Numbers that may be infinite are written as the string "inf".
Json number(double v);
double read_number(const Json& j, const std::string& what);

Json minimum_to_json(const Minimum& m);
Minimum minimum_from_json(const Json& j);
Json minima_to_json(const std::vector<Minimum>& minima);
std::vector<Minimum> minima_from_json(const Json& j);

Json path_config_to_json(const PathConfig& c);

// {"essential":{"birth"}, "segments":[{"birth","death","minimum_id"}], "meta":...}
Json barcode_to_json(const Barcode& b, const Json& meta = Json::object());
Barcode barcode_from_json(const Json& j);  // validates; ValidationError / ParseError

// Barcode schema per dimension, with an added "dimension" field.
Json diagrams_to_json(const std::vector<PersistenceDiagram>& diagrams, const Json& meta = Json::object());

Json path_to_json(const PathState& path);
PathState path_from_json(const Json& j);

// epoch,max_loss,mean_orth_norm,mean_tang_norm
std::string trace_csv(const PathTrace& trace);

Json read_json(const std::filesystem::path& path);  // ParseError on bad syntax
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace lossbar::io
