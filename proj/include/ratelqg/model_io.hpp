#pragma once

#include <iosfwd>
#include <string>

#include "ratelqg/lqr.hpp"
#include "ratelqg/sensor.hpp"

namespace rlqg {

// 12 significant digits, locale independent, shortest general form.
std::string fmt_double(double v);

// Plant description: sections A, B, W, Q, R, P0, each followed by rows of
// whitespace-separated decimals. '#' starts a comment, blank lines are
// ignored. Structural problems raise ParseError carrying a line number.
PlantModel parse_model(const std::string& path);
PlantModel parse_model_text(const std::string& text);
std::string format_model(const PlantModel& model);

// Synthesized design: sections C, V, Delta, L, K in the same row format.
struct DesignFile {
  Mat C;
  Vec V_diag;
  Vec Delta;
  Mat L;
  Mat K;
};

std::string format_design(const LoopSynthesis& syn);
void write_design(const std::string& path, const LoopSynthesis& syn);
DesignFile parse_design_text(const std::string& text);
DesignFile parse_design(const std::string& path);

}  // namespace rlqg
