#pragma once

#include <string>
#include <vector>

namespace fastrl::embed {

// F: frame embedding only. FT: frame embedding concatenated with the text
// embedding before scaling.
enum class RepMode { F, FT };

std::string to_string(RepMode mode);
RepMode rep_mode_from_string(const std::string& s);

struct TaskRepresentation {
  RepMode mode = RepMode::F;
  std::vector<double> values;  // entries in [0, 1] after scaling

  bool operator==(const TaskRepresentation& o) const {
    return mode == o.mode && values == o.values;
  }
};

// Per-vector min-max scaling into [0, 1]; constant vectors map to all 0.5.
std::vector<double> min_max_scale(std::vector<double> v);

TaskRepresentation build_representation(const std::vector<double>& frame_emb,
                                        const std::vector<double>* text_emb,
                                        RepMode mode);

// u.v / (|u||v|). Throws ShapeMismatch on length mismatch, ZeroVector when
// either norm vanishes.
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);
double cosine_similarity(const TaskRepresentation& u, const TaskRepresentation& v);

}  // namespace fastrl::embed
