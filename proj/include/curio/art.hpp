#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace curio::art {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class PrimitiveKind { segment, circle, arc };

/// Which construction rule produced a primitive.
enum class Rule {
  frame,           // square side or frame circle
  grid_line,       // face: line joining two boundary grid points
  bisector,        // face: line equidistant to two neighbouring parallels
  leftmost,        // circles: equal circle centred on the frame's leftmost point
  equal_at_point,  // circles: equal circle centred where two equal circles meet
  half_at_point,   // circles: half-size circle centred where two equal circles meet
  arc_between,     // circles: arc between consecutive meeting points
};

std::string to_string(Rule r);

struct Provenance {
  Rule rule = Rule::frame;
  /// Construction round: bisection round for faces, recursion depth for circles.
  unsigned round = 0;
  /// Face lines: index of the slope family (0..5) and the line offset n.p.
  int family = -1;
  double offset = 0.0;
  /// Indices of the primitives this one was derived from.
  std::vector<std::size_t> parents;
};

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::segment;
  Point a, b;           // segment endpoints
  Point center;         // circle / arc
  double radius = 0.0;  // circle / arc
  double start_angle = 0.0, end_angle = 0.0;  // arc, radians, counter-clockwise
  std::size_t circle = 0;                    // arc: index of its circle
  std::optional<Provenance> provenance;
};

struct Drawing {
  std::string procedure;  // "face_grid", "fractal_circles" or empty
  unsigned depth = 0;
  std::vector<Primitive> primitives;
  /// Trace bits spent on explicit bisection picks (0 for the default rule).
  double explicit_trace_bits = 0.0;
  /// Set once a selection mask has been applied; the scaffold itself is kept.
  std::optional<std::vector<bool>> selection;

  bool has_provenance() const;
  bool visible(std::size_t i) const;
  /// Visible primitives of a kind.
  std::size_t count(PrimitiveKind k) const;
};

// Face grid.

inline constexpr unsigned kGridIntervals = 16;
inline constexpr double kVerticalScale = 15.0 / 16.0;

/// A pick bisects the pair (index, index + 1) of a family's lines sorted by offset.
struct BisectionPick {
  unsigned family = 0;
  unsigned index = 0;
};

struct FaceGridSpec {
  unsigned bisection_depth = 0;
  /// One entry per round. Empty means every adjacent pair in every family.
  std::vector<std::vector<BisectionPick>> rounds;
};

/// Slope of each family before compression: +1, -1, +8, -8, +1/8, -1/8.
double family_slope(unsigned family);

Drawing face_grid(const FaceGridSpec& spec);
inline Drawing face_grid(unsigned bisection_depth) { return face_grid(FaceGridSpec{bisection_depth, {}}); }

/// Lengths of the intervals cut on each side of the (compressed) square by the
/// frame and the round-0 grid lines; order is bottom, right, top, left.
std::vector<std::vector<double>> side_intervals(const Drawing& face);

// Fractal circles.

struct FractalSpec {
  unsigned depth = 0;
  double radius = 1.0;
  /// Only place new centres inside the closed frame disc.
  bool clip_to_frame = true;
};

/// Circle counts grow roughly 2, 6, 12, 54, 506 per round; beyond this depth
/// the scaffold no longer fits in memory.
inline constexpr unsigned kMaxFractalDepth = 4;

Drawing fractal_circles(const FractalSpec& spec);
inline Drawing fractal_circles(unsigned depth) { return fractal_circles(FractalSpec{depth}); }

/// Touch/intersection points of two circles (0, 1 or 2 of them).
std::vector<Point> circle_meets(Point c1, double r1, Point c2, double r2);

// Checks and encodings.

inline constexpr double kTolerance = 1e-9;
inline constexpr unsigned kNaiveCoordinateBits = 10;

/// Every failed construction check, empty when the drawing is sound.
std::vector<std::string> verify_provenance(const Drawing& d);

struct EncodingReport {
  double naive_bits = 0.0;
  std::optional<double> programmatic_bits;
  /// Set when programmatic encoding was impossible.
  bool provenance_missing = false;
};

/// Bits of the Elias gamma code of n >= 1.
unsigned elias_gamma_bits(std::uint64_t n);

EncodingReport encoding_report(const Drawing& d);

/// Mask syntax: one index or inclusive range "a-b" per line, '#' comments.
std::vector<bool> parse_selection_mask(std::istream& in, std::size_t primitive_count);
Drawing apply_selection(const Drawing& d, const std::vector<bool>& mask);

void write_svg(const Drawing& d, std::ostream& out);
/// Structured sidecar with primitive counts and both bit estimates.
void write_report_json(const Drawing& d, std::ostream& out);

}  // namespace curio::art
