#include "artsep/script.hpp"

#include <fstream>

#include <json.hpp>

#include "artsep/common.hpp"

namespace artsep {

std::vector<ScriptLine> load_script_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open script file: " + path);
  nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw DataError("malformed script file: " + path);
  std::vector<ScriptLine> lines;
  lines.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("start_s") || !e.contains("end_s") || !e.contains("text"))
      throw DataError(path + ": line " + std::to_string(i) +
                      " must have start_s, end_s and text");
    ScriptLine l;
    l.start_s = e.at("start_s").get<double>();
    l.end_s = e.at("end_s").get<double>();
    l.text = e.at("text").get<std::string>();
    l.line_id = static_cast<int>(i);
    lines.push_back(std::move(l));
  }
  return lines;
}

void save_script_json(const std::string& path, const std::vector<ScriptLine>& lines) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& l : lines)
    j.push_back({{"start_s", l.start_s}, {"end_s", l.end_s}, {"text", l.text}});
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create script file: " + path);
  f << j.dump(2) << "\n";
}

void validate_script(std::vector<ScriptLine>& lines, double clip_seconds,
                     const std::string& context) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ScriptLine& l = lines[i];
    l.line_id = static_cast<int>(i);
    if (!(l.start_s >= 0.0 && l.start_s < l.end_s && l.end_s <= clip_seconds + 1e-9))
      throw DataError(context + ": script line " + std::to_string(i) + " has invalid span [" +
                      std::to_string(l.start_s) + ", " + std::to_string(l.end_s) + "]");
  }
}

}  // namespace artsep
