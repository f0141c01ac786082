#pragma once

#include <string>
#include <vector>

namespace artsep {

// One transcript line with its on-screen time span.
struct ScriptLine {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
  int line_id = 0;

  bool operator==(const ScriptLine&) const = default;
};

// script.json: array of {start_s, end_s, text}; line ids are array positions.
std::vector<ScriptLine> load_script_json(const std::string& path);
void save_script_json(const std::string& path, const std::vector<ScriptLine>& lines);

// Validates 0 <= start < end <= clip length and assigns sequential ids.
void validate_script(std::vector<ScriptLine>& lines, double clip_seconds,
                     const std::string& context);

}  // namespace artsep
