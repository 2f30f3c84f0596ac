#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "iflab/ising.hpp"
#include "iflab/lattice.hpp"

namespace iflab {

// The face set separating plus from minus cells, restricted to the faces of
// the region. Outside the region the separating set is exactly the flat plane
// L0, so the restriction loses nothing; helpers that need the flat collar
// (classification, wall floors) re-attach it internally.
struct Interface {
  Region region;
  std::vector<P3> faces;  // sorted by midpoint

  int size() const { return int(faces.size()); }
  bool contains(const P3& f) const {
    return std::binary_search(faces.begin(), faces.end(), f);
  }
  friend bool operator==(const Interface&, const Interface&) = default;
};

Interface flat_interface(const Region& r);

// Separating faces of the configuration extended by the split boundary rule,
// flood-filled from the flat plane outside the region, restricted to F(region).
// Detached bubbles contribute nothing.
Interface extract_interface(const SpinConfig& cfg);

// The unique bubble-free configuration whose interface is I: a cell is plus
// exactly when an odd number of horizontal I-faces lie strictly above it in
// its column. extract_interface(two_phase_config(I)) == I.
SpinConfig two_phase_config(const Interface& I, double beta = 1.0);

// ---- walls and ceilings --------------------------------------------------

// A ceiling face is horizontal with no second I-face in its column; all other
// faces are wall faces. Walls/ceilings are maximal *-connected sets of their
// class. Every ceiling is flat, so it carries a single height.
struct Ceiling {
  std::vector<P3> faces;  // sorted; restricted to F(region)
  int height = 0;
};

struct Wall {
  std::vector<P3> faces;  // sorted
  P3 index{};             // minimal L0 face hugging the projection (see wall_index_face)
  int floor_height = 0;   // height of the adjacent ceiling on the outside
  bool clipped = false;   // touches the region's side or top/bottom planes
};

struct Classification {
  std::vector<Wall> walls;        // ordered by index
  std::vector<Ceiling> ceilings;  // ordered by minimal face
};

Classification classify(const Interface& I);

// Minimal L0 face that shares an edge with rho(W) and lies in the projection's
// face set or in a finite component of its complement.
P3 wall_index_face(const std::vector<P3>& wall_faces);

// True when the L0 face or edge u is not in the infinite component of the
// complement of the wall's projection (elements of the projection count as
// interior).
bool interior_to(const P3& u, const std::vector<P3>& wall_faces);

// ---- standard wall representation ------------------------------------------

struct StandardWall {
  std::vector<P3> faces;  // sorted; floor at height 0
  P3 index{};
  bool clipped = false;
};

struct WallCollection {
  Region region;
  std::vector<StandardWall> walls;  // sorted by index
};

// Standardize all walls (translate each so its floor sits at height 0).
WallCollection standard_wall_representation(const Interface& I);

// Rebuild the unique interface with the given representation, inserting the
// standard walls innermost outward: drop the horizontal faces under each
// wall's projection, lift everything over its interior components by their
// ceiling heights, then lay in the wall's faces. Throws std::runtime_error on
// an inadmissible or malformed collection, naming the violation.
Interface reconstruct(const WallCollection& coll);

// ---- groups of walls ---------------------------------------------------------

// Walls W1, W2 are close if some u1 in rho(W1), u2 in rho(W2) satisfy
// |u1-u2| <= sqrt(N(u1)) + sqrt(N(u2)), where N(u) counts the faces of the
// wall projecting onto u. Groups are the maximal components under closeness.
struct GroupOfWalls {
  std::vector<int> wall_ids;  // positions in the collection, sorted by index
  P3 index{};                 // minimal wall index in the group
};

std::vector<GroupOfWalls> groups_of_walls(const WallCollection& coll);

// Walls of the collection whose interior contains the L0 face or edge u
// (the nested sequence of u), ordered innermost to outermost.
std::vector<int> nested_walls(const P3& u, const WallCollection& coll);

// ---- excess area -------------------------------------------------------------

// m(I; ref) = |I| - |ref|
inline int excess_area(const Interface& I, const Interface& ref) {
  return I.size() - ref.size();
}

// m(W) = |W| - |F(rho(W))|, counting distinct projected faces
int wall_excess(const std::vector<P3>& wall_faces);

// distinct projected faces / edges of a wall
int projection_face_count(const std::vector<P3>& wall_faces);
int projection_edge_count(const std::vector<P3>& wall_faces);

// largest height reached by the closure of any face of the set, in half units
// (doubled z of the top of the face); 0 for an empty set
int top_height2(const std::vector<P3>& faces);

// JSON export of an interface and its classification, with deterministic
// ordering (for diffable fixtures)
std::string interface_json(const Interface& I, const Classification& cls);

}  // namespace iflab
