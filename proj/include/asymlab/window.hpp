#pragma once
//
// asymlab/window.hpp -- contiguous integer index windows [lo, hi].
//
// Truncations of sequence spaces are indexed by windows; every vector and
// operator in asymlab carries one so that shape errors surface as structured
// exceptions instead of silent misalignment.

#include <sstream>
#include <string>

namespace asymlab {

struct IndexWindow {
  int lo = 0;
  int hi = -1;  // default-constructed window is empty

  int size() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(int n) const { return n >= lo && n <= hi; }

  // Position of index n inside the window's coordinate vector.
  int offset(int n) const { return n - lo; }

  bool operator==(const IndexWindow& o) const {
    return lo == o.lo && hi == o.hi;
  }
  bool operator!=(const IndexWindow& o) const { return !(*this == o); }

  std::string describe() const {
    std::ostringstream os;
    os << "[" << lo << ", " << hi << "]";
    return os.str();
  }
};

}  // namespace asymlab
