// Mollify a smooth field on the unit disk with the boundary atlas and watch
// the W^{1,2} error shrink as the scale halves.

#include <cstdio>
#include <iostream>

#include "cnsaudit/atlas.hpp"
#include "cnsaudit/flow_gen.hpp"
#include "cnsaudit/mollify.hpp"

using namespace cnsaudit;

int main() {
  const auto disk = Domain<2>::disk({0.0, 0.0}, 1.0);
  const auto grid = make_grid(Grid<2>::covering(disk, 121, 31, 0.0, 0.6));
  const auto u = manufactured_field<2>("trig(1)", grid).second;

  const auto atlas = build_atlas(disk, 8);
  std::printf("%zu boundary charts, largest usable scale %.4f\n", atlas.size(), atlas.max_scale());

  std::cout << convergence_study(u, 2.0, {0.16, 0.08, 0.04}, atlas).csv().str();
}
