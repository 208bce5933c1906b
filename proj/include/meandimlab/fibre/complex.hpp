// Copyright 2026 The meandimlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small simplicial complexes realized as cell spaces (sup metric), used to
// calibrate map constructions whose fiber widths are known.

#pragma once

#include <string>
#include <vector>

#include "meandimlab/errors.hpp"
#include "meandimlab/widim/cell_space.hpp"

namespace meandimlab::fibre {

using widim::Axis;
using widim::CellSpace;
using widim::Index;

// A single edge, [0, 1].
inline CellSpace edge_complex(int cells_per_unit = 40) {
  return CellSpace::grid({Axis{0.0, 1.0, cells_per_unit}});
}

// Path graph with `edges` unit edges, isometric to [0, edges].
inline CellSpace path_complex(int edges = 3, int cells_per_unit = 40) {
  return CellSpace::grid({Axis{0.0, static_cast<double>(edges), edges * cells_per_unit}});
}

// The 2-simplex {x, y >= 0, x + y <= 1}, atoms meeting it in positive area.
inline CellSpace triangle_complex(int cells_per_unit = 24) {
  std::vector<Index> atoms;
  for (int i = 0; i < cells_per_unit; ++i) {
    for (int j = 0; i + j < cells_per_unit; ++j) atoms.push_back({i, j});
  }
  return CellSpace({Axis{0.0, 1.0, cells_per_unit}, Axis{0.0, 1.0, cells_per_unit}}, std::move(atoms));
}

// Square subdivided as a 2x2 grid of unit squares, [0, 2]^2.
inline CellSpace grid_complex(int cells_per_unit = 12) {
  return CellSpace::grid({Axis{0.0, 2.0, 2 * cells_per_unit}, Axis{0.0, 2.0, 2 * cells_per_unit}});
}

struct NamedComplex {
  std::string name;
  CellSpace space;
};

inline std::vector<NamedComplex> calibration_complexes() {
  return {{"edge", edge_complex()},
          {"path", path_complex()},
          {"triangle", triangle_complex()},
          {"grid2x2", grid_complex()}};
}

}  // namespace meandimlab::fibre
