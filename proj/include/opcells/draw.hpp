#pragma once

// SVG pictures of cacti cells (one circle per lobe, base point dot) and of bar
// cells (one cactus cluster per vertex of the nested tree, joined by edges).

#include "metatree.hpp"

#include <string>
#include <vector>

namespace opcells {

struct DrawStyle {
  double radius = 40;     // root lobe radius
  double shrink = 0.62;   // child lobe radius relative to its parent
  double font = 12;
  double base_dot = 4;
  double base_shift = 0.08;  // base dot offset into the positive direction, in radians
  int max_k = 12;
};

/** t: optional arc lengths, one per letter; equal arcs when empty. */
std::string draw_cactus(const Cell& c, const DrawStyle& st = {}, const std::vector<double>& t = {});
std::string draw_bar_cell(const TreeCell& c, const DrawStyle& st = {});

}  // namespace opcells
