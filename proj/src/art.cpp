#include "curio/art.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>
#include <tuple>

#include <json.hpp>

#include "curio/errors.hpp"
#include "curio/textio.hpp"

namespace curio::art {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

using PointKey = std::pair<long long, long long>;
using CircleKey = std::tuple<long long, long long, long long>;

long long snap(double v) { return std::llround(v / kTolerance); }
PointKey point_key(Point p) { return {snap(p.x), snap(p.y)}; }
CircleKey circle_key(Point c, double r) { return {snap(c.x), snap(c.y), snap(r)}; }

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Distance from p to the infinite line through a and b.
double line_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  return std::abs(dx * (p.y - a.y) - dy * (p.x - a.x)) / std::hypot(dx, dy);
}

unsigned index_bits(std::size_t n) {
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

// ---- face grid ----------------------------------------------------------

constexpr std::array<double, 6> kSlopes = {1.0, -1.0, 8.0, -8.0, 1.0 / 8.0, -1.0 / 8.0};

// Round-0 offsets in sixteenths, inclusive. Every such line meets the square
// boundary at two grid points.
constexpr std::array<std::pair<int, int>, 6> kBaseOffsets = {
    {{-15, 15}, {1, 31}, {-1, 15}, {1, 17}, {-1, 15}, {1, 17}}};

bool steep(unsigned family) { return std::abs(kSlopes[family]) > 1.0; }

// Shallow lines: y - m x = c. Steep lines: x - y / m = c.
std::optional<std::pair<Point, Point>> clip_line(unsigned family, double c) {
  const double m = kSlopes[family];
  Point p0, d;
  if (steep(family)) {
    p0 = {c, 0.0};
    d = {1.0 / m, 1.0};
  } else {
    p0 = {0.0, c};
    d = {1.0, m};
  }
  double lo = -1e300, hi = 1e300;
  auto bound = [&](double p, double dp) {
    // 0 <= p + t dp <= 1
    if (dp == 0.0) {
      if (p < -kTolerance || p > 1.0 + kTolerance) lo = 1.0, hi = 0.0;
      return;
    }
    double t1 = (0.0 - p) / dp, t2 = (1.0 - p) / dp;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  };
  bound(p0.x, d.x);
  bound(p0.y, d.y);
  if (hi - lo <= kTolerance) return std::nullopt;
  return std::pair{Point{p0.x + lo * d.x, p0.y + lo * d.y}, Point{p0.x + hi * d.x, p0.y + hi * d.y}};
}

bool on_grid(double v) {
  const double s = v * kGridIntervals;
  return std::abs(s - std::round(s)) <= kTolerance * kGridIntervals && v >= -kTolerance &&
         v <= 1.0 + kTolerance;
}

bool on_square_boundary(Point p) {
  const bool inside = p.x >= -kTolerance && p.x <= 1.0 + kTolerance && p.y >= -kTolerance &&
                      p.y <= 1.0 + kTolerance;
  const bool edge = std::abs(p.x) <= kTolerance || std::abs(p.x - 1.0) <= kTolerance ||
                    std::abs(p.y) <= kTolerance || std::abs(p.y - 1.0) <= kTolerance;
  return inside && edge;
}

Point unscale(Point p) { return {p.x, p.y / kVerticalScale}; }

void check_face_primitive(const Drawing& d, std::size_t i, std::vector<std::string>& out) {
  const Primitive& p = d.primitives[i];
  const Provenance& pv = *p.provenance;
  auto fail = [&](const std::string& what) {
    out.push_back("primitive " + std::to_string(i) + " (" + to_string(pv.rule) + "): " + what);
  };
  if (p.kind != PrimitiveKind::segment) return fail("face drawings hold only segments");
  const Point a = unscale(p.a), b = unscale(p.b);
  if (!on_square_boundary(a) || !on_square_boundary(b)) return fail("endpoint off the square boundary");
  if (pv.rule == Rule::frame) {
    const bool horizontal = std::abs(a.y - b.y) <= kTolerance;
    const bool vertical = std::abs(a.x - b.x) <= kTolerance;
    if (!(horizontal || vertical)) fail("frame side is not axis-parallel");
    return;
  }
  if (pv.family < 0 || pv.family >= 6) return fail("bad family");
  const unsigned f = static_cast<unsigned>(pv.family);
  const double m = kSlopes[f];
  const double dx = b.x - a.x, dy = b.y - a.y;
  // Compare direction against the family slope without dividing by a tiny dx.
  if (std::abs(dy - m * dx) > kTolerance * std::max(1.0, std::abs(m))) fail("slope differs from family");
  const double post_dy = p.b.y - p.a.y;
  if (std::abs(post_dy - kVerticalScale * m * dx) > kTolerance * std::max(1.0, std::abs(m)))
    fail("compressed slope is not 15/16 of the family slope");
  const double offset = steep(f) ? a.x - a.y / m : a.y - m * a.x;
  if (std::abs(offset - pv.offset) > kTolerance) fail("offset does not match geometry");
  if (pv.rule == Rule::grid_line) {
    if (pv.round != 0) fail("grid line outside round 0");
    if (!on_grid(a.x) || !on_grid(a.y) || !on_grid(b.x) || !on_grid(b.y)) fail("endpoint is not a grid point");
    return;
  }
  if (pv.rule != Rule::bisector) return fail("unexpected rule");
  if (pv.parents.size() != 2) return fail("bisector needs two parents");
  const Primitive& l = d.primitives.at(pv.parents[0]);
  const Primitive& r = d.primitives.at(pv.parents[1]);
  if (!l.provenance || !r.provenance || l.provenance->family != pv.family || r.provenance->family != pv.family)
    return fail("parents are not of the same family");
  if (l.provenance->round >= pv.round || r.provenance->round >= pv.round) fail("parent is not older");
  for (Point q : {p.a, p.b}) {
    const double dl = line_distance(q, l.a, l.b), dr = line_distance(q, r.a, r.b);
    if (std::abs(dl - dr) > kTolerance) fail("not equidistant from its parents");
    if (dl <= kTolerance) fail("coincides with a parent");
  }
}

// ---- fractal circles ----------------------------------------------------

void check_circle_primitive(const Drawing& d, std::size_t i, std::vector<std::string>& out) {
  const Primitive& p = d.primitives[i];
  const Provenance& pv = *p.provenance;
  auto fail = [&](const std::string& what) {
    out.push_back("primitive " + std::to_string(i) + " (" + to_string(pv.rule) + "): " + what);
  };
  auto parent = [&](std::size_t k) -> const Primitive& { return d.primitives.at(pv.parents.at(k)); };
  switch (pv.rule) {
    case Rule::frame:
      if (p.kind != PrimitiveKind::circle || i != 0) fail("frame must be the first circle");
      return;
    case Rule::leftmost: {
      if (pv.parents.size() != 1) return fail("needs the frame as parent");
      const Primitive& f = parent(0);
      if (std::abs(p.radius - f.radius) > kTolerance) fail("radius differs from the frame");
      if (dist(p.center, Point{f.center.x - f.radius, f.center.y}) > kTolerance)
        fail("centre is not the frame's leftmost point");
      return;
    }
    case Rule::equal_at_point:
    case Rule::half_at_point: {
      if (pv.parents.size() != 2) return fail("needs two parents");
      const Primitive& u = parent(0);
      const Primitive& v = parent(1);
      if (std::abs(u.radius - v.radius) > kTolerance) fail("parents differ in size");
      if (std::abs(dist(p.center, u.center) - u.radius) > kTolerance ||
          std::abs(dist(p.center, v.center) - v.radius) > kTolerance)
        fail("centre is not a meeting point of its parents");
      const double want = pv.rule == Rule::equal_at_point ? u.radius : u.radius / 2.0;
      if (std::abs(p.radius - want) > kTolerance) fail("wrong radius");
      if (u.provenance->round >= pv.round || v.provenance->round >= pv.round) fail("parent is not older");
      return;
    }
    case Rule::arc_between: {
      if (pv.parents.size() != 3) return fail("needs its circle and two meeting circles");
      const Primitive& c = parent(0);
      if (dist(c.center, p.center) > kTolerance || std::abs(c.radius - p.radius) > kTolerance)
        fail("arc does not lie on its circle");
      const Point s{p.center.x + p.radius * std::cos(p.start_angle), p.center.y + p.radius * std::sin(p.start_angle)};
      const Point e{p.center.x + p.radius * std::cos(p.end_angle), p.center.y + p.radius * std::sin(p.end_angle)};
      if (std::abs(dist(s, c.center) - c.radius) > kTolerance || std::abs(dist(e, c.center) - c.radius) > kTolerance)
        fail("endpoint off its circle");
      if (std::abs(dist(s, parent(1).center) - parent(1).radius) > kTolerance ||
          std::abs(dist(e, parent(2).center) - parent(2).radius) > kTolerance)
        fail("endpoint is not a meeting point");
      return;
    }
    default:
      fail("unexpected rule");
  }
}

}  // namespace

std::string to_string(Rule r) {
  switch (r) {
    case Rule::frame: return "frame";
    case Rule::grid_line: return "grid_line";
    case Rule::bisector: return "bisector";
    case Rule::leftmost: return "leftmost";
    case Rule::equal_at_point: return "equal_at_point";
    case Rule::half_at_point: return "half_at_point";
    case Rule::arc_between: return "arc_between";
  }
  return "?";
}

bool Drawing::has_provenance() const {
  return !procedure.empty() &&
         std::all_of(primitives.begin(), primitives.end(), [](const Primitive& p) { return p.provenance.has_value(); });
}

bool Drawing::visible(std::size_t i) const { return !selection || (*selection)[i]; }

std::size_t Drawing::count(PrimitiveKind k) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < primitives.size(); ++i)
    if (primitives[i].kind == k && visible(i)) ++n;
  return n;
}

double family_slope(unsigned family) {
  if (family >= kSlopes.size()) throw DomainError("face grid family " + std::to_string(family) + " does not exist");
  return kSlopes[family];
}

Drawing face_grid(const FaceGridSpec& spec) {
  if (!spec.rounds.empty() && spec.rounds.size() != spec.bisection_depth)
    throw DomainError("face grid: " + std::to_string(spec.rounds.size()) + " pick lists for " +
                      std::to_string(spec.bisection_depth) + " rounds");
  Drawing d;
  d.procedure = "face_grid";
  d.depth = spec.bisection_depth;

  auto add_segment = [&](Point a, Point b, Provenance pv) {
    Primitive p;
    p.kind = PrimitiveKind::segment;
    p.a = a;
    p.b = b;
    p.provenance = std::move(pv);
    d.primitives.push_back(std::move(p));
    return d.primitives.size() - 1;
  };

  const std::array<Point, 4> corners = {Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}};
  for (int s = 0; s < 4; ++s) add_segment(corners[s], corners[(s + 1) % 4], Provenance{Rule::frame, 0, -1, 0.0, {}});

  // Per family: (offset, primitive index), kept sorted by offset.
  std::array<std::vector<std::pair<double, std::size_t>>, 6> families;
  for (unsigned f = 0; f < 6; ++f) {
    for (int k = kBaseOffsets[f].first; k <= kBaseOffsets[f].second; ++k) {
      const double c = static_cast<double>(k) / kGridIntervals;
      const auto seg = clip_line(f, c);
      if (!seg) continue;
      families[f].emplace_back(c, add_segment(seg->first, seg->second,
                                              Provenance{Rule::grid_line, 0, static_cast<int>(f), c, {}}));
    }
  }

  for (unsigned round = 1; round <= spec.bisection_depth; ++round) {
    std::vector<BisectionPick> picks;
    if (spec.rounds.empty()) {
      for (unsigned f = 0; f < 6; ++f)
        for (unsigned i = 0; i + 1 < families[f].size(); ++i) picks.push_back({f, i});
    } else {
      picks = spec.rounds[round - 1];
      d.explicit_trace_bits += elias_gamma_bits(picks.size() + 1);
      for (const auto& pk : picks) {
        if (pk.family >= 6 || pk.index + 1 >= families[pk.family].size())
          throw DomainError("face grid round " + std::to_string(round) + ": no neighbour pair (" +
                            std::to_string(pk.family) + ", " + std::to_string(pk.index) + ")");
        d.explicit_trace_bits += index_bits(6) + index_bits(families[pk.family].size() - 1);
      }
    }
    std::set<std::pair<unsigned, unsigned>> seen;
    std::array<std::vector<std::pair<double, std::size_t>>, 6> added;
    for (const auto& pk : picks) {
      if (!seen.insert({pk.family, pk.index}).second) continue;
      const auto& lo = families[pk.family][pk.index];
      const auto& hi = families[pk.family][pk.index + 1];
      const double c = 0.5 * (lo.first + hi.first);
      const auto seg = clip_line(pk.family, c);
      if (!seg) continue;
      added[pk.family].emplace_back(
          c, add_segment(seg->first, seg->second,
                         Provenance{Rule::bisector, round, static_cast<int>(pk.family), c, {lo.second, hi.second}}));
    }
    for (unsigned f = 0; f < 6; ++f) {
      families[f].insert(families[f].end(), added[f].begin(), added[f].end());
      std::sort(families[f].begin(), families[f].end());
    }
  }

  for (auto& p : d.primitives) {
    p.a.y *= kVerticalScale;
    p.b.y *= kVerticalScale;
  }
  return d;
}

std::vector<std::vector<double>> side_intervals(const Drawing& face) {
  const double h = kVerticalScale;
  // Bottom, right, top, left: coordinate along the side for points on it.
  std::array<std::vector<double>, 4> along;
  for (const auto& p : face.primitives) {
    if (p.kind != PrimitiveKind::segment || !p.provenance || p.provenance->round != 0) continue;
    for (Point q : {p.a, p.b}) {
      if (std::abs(q.y) <= kTolerance) along[0].push_back(q.x);
      if (std::abs(q.x - 1.0) <= kTolerance) along[1].push_back(q.y);
      if (std::abs(q.y - h) <= kTolerance) along[2].push_back(q.x);
      if (std::abs(q.x) <= kTolerance) along[3].push_back(q.y);
    }
  }
  std::vector<std::vector<double>> out;
  for (auto& v : along) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) <= kTolerance; }), v.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < v.size(); ++i) gaps.push_back(v[i] - v[i - 1]);
    out.push_back(std::move(gaps));
  }
  return out;
}

std::vector<Point> circle_meets(Point c1, double r1, Point c2, double r2) {
  const double dd = dist(c1, c2);
  if (dd <= kTolerance) return {};  // concentric: no isolated meeting points
  if (dd > r1 + r2 + kTolerance || dd < std::abs(r1 - r2) - kTolerance) return {};
  const double a = (dd * dd + r1 * r1 - r2 * r2) / (2.0 * dd);
  const double h2 = r1 * r1 - a * a;
  const double ux = (c2.x - c1.x) / dd, uy = (c2.y - c1.y) / dd;
  const Point base{c1.x + a * ux, c1.y + a * uy};
  const double h = h2 > 0.0 ? std::sqrt(h2) : 0.0;
  if (h <= kTolerance) return {base};
  return {Point{base.x - h * uy, base.y + h * ux}, Point{base.x + h * uy, base.y - h * ux}};
}

Drawing fractal_circles(const FractalSpec& spec) {
  if (!(spec.radius > 0.0)) throw DomainError("fractal circles: radius must be positive");
  if (spec.depth > kMaxFractalDepth)
    throw DomainError("fractal circles: depth " + std::to_string(spec.depth) + " exceeds " +
                      std::to_string(kMaxFractalDepth));
  Drawing d;
  d.procedure = "fractal_circles";
  d.depth = spec.depth;
  const double R = spec.radius;
  std::map<CircleKey, std::size_t> index;

  auto add_circle = [&](Point c, double r, Provenance pv) {
    if (!index.emplace(circle_key(c, r), d.primitives.size()).second) return;
    Primitive p;
    p.kind = PrimitiveKind::circle;
    p.center = c;
    p.radius = r;
    p.provenance = std::move(pv);
    d.primitives.push_back(std::move(p));
  };

  add_circle({0.0, 0.0}, R, Provenance{Rule::frame, 0, -1, 0.0, {}});
  add_circle({-R, 0.0}, R, Provenance{Rule::leftmost, 0, -1, 0.0, {0}});

  std::set<CircleKey> spawned;  // (meeting point, size) already used as a centre
  std::size_t fresh_from = 0;
  for (unsigned round = 1; round <= spec.depth; ++round) {
    const std::size_t n = d.primitives.size();
    for (std::size_t j = fresh_from; j < n; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const Primitive& u = d.primitives[i];
        const Primitive& v = d.primitives[j];
        if (std::abs(u.radius - v.radius) > kTolerance) continue;
        const double r = u.radius;
        for (Point q : circle_meets(u.center, r, v.center, r)) {
          if (spec.clip_to_frame && std::hypot(q.x, q.y) > R + kTolerance) continue;
          if (!spawned.insert(circle_key(q, r)).second) continue;
          add_circle(q, r, Provenance{Rule::equal_at_point, round, -1, 0.0, {i, j}});
          add_circle(q, r / 2.0, Provenance{Rule::half_at_point, round, -1, 0.0, {i, j}});
        }
      }
    }
    fresh_from = n;
  }

  // Arcs between consecutive meeting points on every circle.
  const std::size_t circles = d.primitives.size();
  for (std::size_t i = 0; i < circles; ++i) {
    const Point c = d.primitives[i].center;
    const double r = d.primitives[i].radius;
    std::map<PointKey, std::pair<double, std::size_t>> points;  // key -> (angle, other circle)
    for (std::size_t j = 0; j < circles; ++j) {
      if (j == i) continue;
      for (Point q : circle_meets(c, r, d.primitives[j].center, d.primitives[j].radius)) {
        double a = std::atan2(q.y - c.y, q.x - c.x);
        if (a < 0.0) a += kTwoPi;
        points.emplace(point_key(q), std::pair{a, j});
      }
    }
    if (points.empty()) continue;
    std::vector<std::pair<double, std::size_t>> ring;
    for (const auto& [k, v] : points) ring.push_back(v);
    std::sort(ring.begin(), ring.end());
    const unsigned round = d.primitives[i].provenance->round;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const auto& s = ring[k];
      const auto& e = ring[(k + 1) % ring.size()];
      Primitive arc;
      arc.kind = PrimitiveKind::arc;
      arc.center = c;
      arc.radius = r;
      arc.circle = i;
      arc.start_angle = s.first;
      arc.end_angle = k + 1 < ring.size() ? e.first : e.first + kTwoPi;
      arc.provenance = Provenance{Rule::arc_between, round, -1, 0.0, {i, s.second, e.second}};
      d.primitives.push_back(std::move(arc));
    }
  }
  return d;
}

std::vector<std::string> verify_provenance(const Drawing& d) {
  std::vector<std::string> out;
  if (!d.has_provenance()) {
    out.push_back("drawing has no construction trace");
    return out;
  }
  for (std::size_t i = 0; i < d.primitives.size(); ++i) {
    try {
      if (d.procedure == "face_grid") {
        check_face_primitive(d, i, out);
      } else if (d.procedure == "fractal_circles") {
        check_circle_primitive(d, i, out);
      } else {
        out.push_back("unknown procedure " + d.procedure);
        break;
      }
    } catch (const std::out_of_range&) {
      out.push_back("primitive " + std::to_string(i) + ": parent index out of range");
    }
  }
  return out;
}

unsigned elias_gamma_bits(std::uint64_t n) {
  if (n == 0) throw DomainError("Elias gamma code needs n >= 1");
  unsigned floor_log = 0;
  while (n >> (floor_log + 1)) ++floor_log;
  return 2 * floor_log + 1;
}

EncodingReport encoding_report(const Drawing& d) {
  EncodingReport rep;
  std::size_t visible = 0;
  for (std::size_t i = 0; i < d.primitives.size(); ++i) {
    if (!d.visible(i)) continue;
    ++visible;
    switch (d.primitives[i].kind) {
      case PrimitiveKind::segment: rep.naive_bits += 4.0 * kNaiveCoordinateBits; break;
      case PrimitiveKind::circle: rep.naive_bits += 3.0 * kNaiveCoordinateBits; break;
      case PrimitiveKind::arc: rep.naive_bits += 5.0 * kNaiveCoordinateBits; break;
    }
  }
  if (visible == 0) {
    rep.programmatic_bits = 0.0;
    return rep;
  }
  if (!d.has_provenance()) {
    rep.provenance_missing = true;
    return rep;
  }
  // Procedure choice, then one continue/stop bit per construction level. The
  // face grid adds a bit saying whether bisection picks are explicit.
  double bits = 1.0 + (d.depth + 1) + d.explicit_trace_bits;
  if (d.procedure == "face_grid") bits += 1.0;
  if (d.selection) {
    // Flag bit, then the cheaper of a bitmap and an index list.
    const std::size_t n = d.primitives.size();
    const double list = elias_gamma_bits(visible + 1) + static_cast<double>(visible) * index_bits(n);
    bits += 1.0 + std::min(static_cast<double>(n), list);
  }
  rep.programmatic_bits = bits;
  return rep;
}

std::vector<bool> parse_selection_mask(std::istream& in, std::size_t primitive_count) {
  std::vector<bool> mask(primitive_count, false);
  std::string line;
  std::size_t lineno = 0;
  auto parse_index = [&](const std::string& s) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "not an index: '" + s + "'");
    }
    if (pos != s.size()) throw ParseError(lineno, "not an index: '" + s + "'");
    if (v >= primitive_count)
      throw ParseError(lineno, "index " + s + " beyond " + std::to_string(primitive_count) + " primitives");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto dash = line.find('-');
    if (dash == std::string::npos) {
      mask[parse_index(line)] = true;
      continue;
    }
    const std::size_t a = parse_index(trim(line.substr(0, dash))), b = parse_index(trim(line.substr(dash + 1)));
    if (a > b) throw ParseError(lineno, "empty range " + line);
    for (std::size_t i = a; i <= b; ++i) mask[i] = true;
  }
  return mask;
}

Drawing apply_selection(const Drawing& d, const std::vector<bool>& mask) {
  if (mask.size() != d.primitives.size())
    throw DomainError("selection mask covers " + std::to_string(mask.size()) + " of " +
                      std::to_string(d.primitives.size()) + " primitives");
  Drawing out = d;
  out.selection = mask;
  return out;
}

void write_svg(const Drawing& d, std::ostream& out) {
  double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
  auto grow = [&](double x0, double y0, double x1, double y1) {
    minx = std::min(minx, x0);
    miny = std::min(miny, y0);
    maxx = std::max(maxx, x1);
    maxy = std::max(maxy, y1);
  };
  for (std::size_t i = 0; i < d.primitives.size(); ++i) {
    if (!d.visible(i)) continue;
    const auto& p = d.primitives[i];
    if (p.kind == PrimitiveKind::segment) {
      grow(std::min(p.a.x, p.b.x), std::min(p.a.y, p.b.y), std::max(p.a.x, p.b.x), std::max(p.a.y, p.b.y));
    } else {
      grow(p.center.x - p.radius, p.center.y - p.radius, p.center.x + p.radius, p.center.y + p.radius);
    }
  }
  if (minx > maxx) minx = miny = 0.0, maxx = maxy = 1.0;
  const double span = std::max(maxx - minx, maxy - miny);
  const double margin = 0.02 * span;
  const double w = maxx - minx + 2 * margin, h = maxy - miny + 2 * margin;
  const long height_px = std::lround(800.0 * h / w);
  auto X = [](double v) { return format_fixed(v, 6); };
  auto Y = [](double v) { return format_fixed(-v, 6); };  // SVG y grows downwards

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" << height_px << "\" viewBox=\""
      << X(minx - margin) << ' ' << Y(maxy + margin) << ' ' << X(w) << ' ' << X(h) << "\">\n";
  out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << X(0.002 * span) << "\">\n";
  for (std::size_t i = 0; i < d.primitives.size(); ++i) {
    if (!d.visible(i)) continue;
    const auto& p = d.primitives[i];
    switch (p.kind) {
      case PrimitiveKind::segment:
        out << "<line x1=\"" << X(p.a.x) << "\" y1=\"" << Y(p.a.y) << "\" x2=\"" << X(p.b.x) << "\" y2=\""
            << Y(p.b.y) << "\"/>\n";
        break;
      case PrimitiveKind::circle:
        out << "<circle cx=\"" << X(p.center.x) << "\" cy=\"" << Y(p.center.y) << "\" r=\"" << X(p.radius)
            << "\"/>\n";
        break;
      case PrimitiveKind::arc: {
        // A full turn cannot be one SVG arc command; split it in halves.
        const double sweep = p.end_angle - p.start_angle;
        const int pieces = sweep > kTwoPi - kTolerance ? 2 : 1;
        out << "<path d=\"M " << X(p.center.x + p.radius * std::cos(p.start_angle)) << ' '
            << Y(p.center.y + p.radius * std::sin(p.start_angle));
        for (int k = 1; k <= pieces; ++k) {
          const double a = p.start_angle + sweep * k / pieces;
          const int large = sweep / pieces > std::numbers::pi ? 1 : 0;
          out << " A " << X(p.radius) << ' ' << X(p.radius) << " 0 " << large << " 0 "
              << X(p.center.x + p.radius * std::cos(a)) << ' ' << Y(p.center.y + p.radius * std::sin(a));
        }
        out << "\"/>\n";
        break;
      }
    }
  }
  out << "</g>\n</svg>\n";
}

void write_report_json(const Drawing& d, std::ostream& out) {
  const EncodingReport rep = encoding_report(d);
  nlohmann::ordered_json j;
  j["procedure"] = d.procedure;
  j["depth"] = d.depth;
  j["scaffold_primitives"] = d.primitives.size();
  j["selected"] = d.selection.has_value();
  j["segments"] = d.count(PrimitiveKind::segment);
  j["circles"] = d.count(PrimitiveKind::circle);
  j["arcs"] = d.count(PrimitiveKind::arc);
  j["naive_coordinate_bits"] = kNaiveCoordinateBits;
  j["naive_bits"] = rep.naive_bits;
  if (rep.programmatic_bits) {
    j["programmatic_bits"] = *rep.programmatic_bits;
  } else {
    j["programmatic_bits"] = nullptr;
  }
  j["provenance_missing"] = rep.provenance_missing;
  j["provenance_failures"] = verify_provenance(d);
  out << j.dump(2) << '\n';
}

}  // namespace curio::art
