#include "iflab/lattice.hpp"

#include <algorithm>
#include <unordered_map>

namespace iflab {

std::vector<Key> sorted_keys(const std::vector<P3>& ps) {
  std::vector<Key> out;
  out.reserve(ps.size());
  for (const P3& p : ps) out.push_back(key_of(p));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool sorted_contains(const std::vector<Key>& keys, const P3& p) {
  return std::binary_search(keys.begin(), keys.end(), key_of(p));
}

std::vector<std::vector<P3>> star_components(const std::vector<P3>& faces) {
  std::vector<P3> fs = faces;
  std::sort(fs.begin(), fs.end());
  fs.erase(std::unique(fs.begin(), fs.end()), fs.end());

  std::unordered_map<Key, std::vector<int>, KeyHash> by_corner;
  by_corner.reserve(fs.size() * 4);
  for (int i = 0; i < int(fs.size()); ++i)
    for (const P3& v : face_corners(fs[i])) by_corner[key_of(v)].push_back(i);

  std::vector<int> comp(fs.size(), -1);
  int ncomp = 0;
  std::vector<int> stack;
  for (int s = 0; s < int(fs.size()); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = ncomp;
    stack.assign(1, s);
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (const P3& v : face_corners(fs[i]))
        for (int j : by_corner[key_of(v)])
          if (comp[j] < 0) {
            comp[j] = ncomp;
            stack.push_back(j);
          }
    }
    ++ncomp;
  }

  std::vector<std::vector<P3>> out(ncomp);
  for (int i = 0; i < int(fs.size()); ++i) out[comp[i]].push_back(fs[i]);
  // fs is sorted, so each component is sorted and components are ordered by
  // their minimal face already
  return out;
}

}  // namespace iflab
