#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <map>
#include <numeric>
#include <sstream>

#include "curio/art.hpp"
#include "curio/errors.hpp"

using namespace curio;
using namespace curio::art;

namespace {

// Lines of slope p/q that join two boundary grid points of the unit square,
// counted by brute force over all pairs of grid points on the boundary.
std::size_t brute_force_lines(int p, int q) {
  std::vector<std::pair<int, int>> pts;
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j <= 16; ++j) {
      if (i == 0 || j == 0 || i == 16 || j == 16) pts.emplace_back(i, j);
    }
  }
  std::size_t n = 0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const int dx = pts[b].first - pts[a].first, dy = pts[b].second - pts[a].second;
      if (dx != 0 && dy * q == dx * p) ++n;
    }
  }
  return n;
}

double slope_before_compression(const Primitive& s) {
  return (s.b.y - s.a.y) / kVerticalScale / (s.b.x - s.a.x);
}

std::string svg_of(const Drawing& d) {
  std::ostringstream out;
  write_svg(d, out);
  return out.str();
}

}  // namespace

TEST_SUITE("art") {
  TEST_CASE("face grid round-0 lines match a brute-force count") {
    const Drawing d = face_grid(0);
    const std::pair<int, int> slopes[] = {{1, 1}, {-1, 1}, {8, 1}, {-8, 1}, {1, 8}, {-1, 8}};
    std::map<int, std::size_t> per_family;
    for (const auto& p : d.primitives) {
      if (p.provenance->rule == Rule::grid_line) ++per_family[p.provenance->family];
    }
    std::size_t total = 0;
    for (int f = 0; f < 6; ++f) {
      CHECK(family_slope(f) == doctest::Approx(static_cast<double>(slopes[f].first) / slopes[f].second));
      CHECK(per_family[f] == brute_force_lines(slopes[f].first, slopes[f].second));
      total += per_family[f];
    }
    CHECK(d.count(PrimitiveKind::segment) == total + 4);
  }

  TEST_CASE("face grid boundary intervals") {
    for (unsigned depth : {0u, 2u}) {
      const auto sides = side_intervals(face_grid(depth));
      REQUIRE(sides.size() == 4);
      for (std::size_t s = 0; s < 4; ++s) {
        CHECK(sides[s].size() == kGridIntervals);
        const double expected = (s % 2 == 0 ? 1.0 : kVerticalScale) / kGridIntervals;
        for (double g : sides[s]) CHECK(g == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("face grid slopes and compression") {
    const Drawing d = face_grid(2);
    for (const auto& p : d.primitives) {
      CHECK(p.a.y <= kVerticalScale + kTolerance);
      CHECK(p.b.y <= kVerticalScale + kTolerance);
      if (p.provenance->rule == Rule::frame) continue;
      const double m = slope_before_compression(p);
      CHECK(std::abs(m - family_slope(p.provenance->family)) < 1e-9);
    }
  }

  TEST_CASE("default bisection doubles the lines of every family") {
    for (unsigned depth = 0; depth <= 4; ++depth) {
      // 130 round-0 lines in 6 families; each round puts one line between neighbours
      CHECK(face_grid(depth).primitives.size() == 10 + 124 * (std::size_t{1} << depth));
    }
  }

  TEST_CASE("explicit bisection picks") {
    FaceGridSpec spec;
    spec.bisection_depth = 2;
    spec.rounds = {{{0, 3}, {4, 0}}, {{0, 3}}};
    const Drawing d = face_grid(spec);
    CHECK(d.primitives.size() == 134 + 3);
    CHECK(d.explicit_trace_bits > 0.0);
    CHECK(verify_provenance(d).empty());
    CHECK(encoding_report(d).programmatic_bits > encoding_report(face_grid(2)).programmatic_bits.value() - 1.0);
    spec.rounds = {{{7, 0}}, {}};
    CHECK_THROWS_AS(face_grid(spec), DomainError);
    spec.rounds = {{}};
    CHECK_THROWS_AS(face_grid(spec), DomainError);
  }

  TEST_CASE("circle meeting points") {
    auto two = circle_meets({0, 0}, 1, {1, 0}, 1);
    REQUIRE(two.size() == 2);
    for (const auto& p : two) {
      CHECK(p.x == doctest::Approx(0.5));
      CHECK(std::abs(p.y) == doctest::Approx(std::sqrt(3.0) / 2));
    }
    const auto touch = circle_meets({0, 0}, 1, {2, 0}, 1);
    REQUIRE(touch.size() == 1);
    CHECK(touch[0].x == doctest::Approx(1.0));
    const auto inner = circle_meets({0, 0}, 1, {0.5, 0}, 0.5);
    REQUIRE(inner.size() == 1);
    CHECK(inner[0].x == doctest::Approx(1.0));
    CHECK(circle_meets({0, 0}, 1, {3, 0}, 1).empty());
    CHECK(circle_meets({0, 0}, 1, {0, 0}, 1).empty());
    CHECK(circle_meets({0, 0}, 1, {0.1, 0}, 0.2).empty());
  }

  TEST_CASE("fractal circles at depth 0") {
    const Drawing d = fractal_circles(FractalSpec{0, 2.0});
    REQUIRE(d.count(PrimitiveKind::circle) == 2);
    const auto& frame = d.primitives[0];
    const auto& second = d.primitives[1];
    CHECK(frame.radius == second.radius);
    // centred on the leftmost point of the frame circle
    CHECK(second.center.x == doctest::Approx(frame.center.x - frame.radius));
    CHECK(second.center.y == doctest::Approx(frame.center.y));
    CHECK(second.provenance->rule == Rule::leftmost);
    CHECK(d.count(PrimitiveKind::arc) == 4);
    CHECK(verify_provenance(d).empty());
  }

  TEST_CASE("fractal circle growth") {
    const std::size_t circles[] = {2, 6, 12, 54};
    for (unsigned depth = 0; depth <= 3; ++depth) {
      const Drawing d = fractal_circles(depth);
      CHECK(d.count(PrimitiveKind::circle) == circles[depth]);
      CHECK(verify_provenance(d).empty());
      for (const auto& p : d.primitives) {
        if (p.kind != PrimitiveKind::circle) continue;
        // every centre stays within the frame disc
        CHECK(std::hypot(p.center.x, p.center.y) <= 1.0 + kTolerance);
      }
    }
    CHECK_THROWS_AS(fractal_circles(kMaxFractalDepth + 1), DomainError);
    CHECK_THROWS_AS(fractal_circles(FractalSpec{0, -1.0}), DomainError);
  }

  TEST_CASE("tampered drawings fail verification") {
    Drawing d = fractal_circles(1);
    d.primitives[3].center.x += 1e-3;
    CHECK_FALSE(verify_provenance(d).empty());

    Drawing f = face_grid(1);
    f.primitives.back().a.x += 1e-3;
    CHECK_FALSE(verify_provenance(f).empty());

    Drawing bare = face_grid(0);
    bare.primitives[10].provenance.reset();
    const auto rep = encoding_report(bare);
    CHECK(rep.provenance_missing);
    CHECK_FALSE(rep.programmatic_bits.has_value());
    CHECK(rep.naive_bits > 0.0);
  }

  TEST_CASE("encoding costs") {
    CHECK(elias_gamma_bits(1) == 1);
    CHECK(elias_gamma_bits(2) == 3);
    CHECK(elias_gamma_bits(4) == 5);
    CHECK(elias_gamma_bits(15) == 7);
    CHECK(elias_gamma_bits(16) == 9);
    CHECK_THROWS_AS(elias_gamma_bits(0), DomainError);

    const auto r0 = encoding_report(fractal_circles(0));
    CHECK(r0.naive_bits == 2 * 30 + 4 * 50);
    CHECK(r0.programmatic_bits == 2.0);

    Drawing empty;
    const auto re = encoding_report(empty);
    CHECK(re.naive_bits == 0.0);
    CHECK(re.programmatic_bits == 0.0);

    // deeper constructions compress ever better relative to the naive cost
    for (auto make : {+[](unsigned k) { return face_grid(k); }, +[](unsigned k) { return fractal_circles(k); }}) {
      double last_ratio = INFINITY;
      for (unsigned depth = 0; depth <= 3; ++depth) {
        const auto rep = encoding_report(make(depth));
        REQUIRE(rep.programmatic_bits);
        const double ratio = *rep.programmatic_bits / rep.naive_bits;
        CHECK(ratio < 1.0);
        CHECK(ratio < last_ratio);
        last_ratio = ratio;
      }
    }
  }

  TEST_CASE("selection masks") {
    const Drawing d = face_grid(0);
    std::istringstream in("# eyes\n0\n5-7\n\n  9  \n");
    const auto mask = parse_selection_mask(in, d.primitives.size());
    CHECK(std::count(mask.begin(), mask.end(), true) == 5);
    CHECK(mask[6]);
    const Drawing sel = apply_selection(d, mask);
    CHECK(sel.primitives.size() == d.primitives.size());
    CHECK(sel.count(PrimitiveKind::segment) == 5);
    const auto rep = encoding_report(sel);
    CHECK(rep.naive_bits == 5 * 40);
    CHECK(*rep.programmatic_bits > *encoding_report(d).programmatic_bits);
    CHECK(svg_of(sel).size() < svg_of(d).size());

    for (const char* bad : {"3-1\n", "x\n", "4 5\n", "134\n", "-2\n"}) {
      std::istringstream b(bad);
      CHECK_THROWS_AS(parse_selection_mask(b, d.primitives.size()), ParseError);
    }
    std::istringstream third("0\n\n# ok\n2-x\n");
    try {
      parse_selection_mask(third, d.primitives.size());
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(apply_selection(d, std::vector<bool>(3, true)), DomainError);
  }

  TEST_CASE("outputs are byte-identical across reruns") {
    CHECK(svg_of(face_grid(2)) == svg_of(face_grid(2)));
    CHECK(svg_of(fractal_circles(2)) == svg_of(fractal_circles(2)));
    const std::string svg = svg_of(fractal_circles(1));
    CHECK(svg.find("<svg xmlns") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    std::ostringstream a, b;
    write_report_json(face_grid(1), a);
    write_report_json(face_grid(1), b);
    CHECK(a.str() == b.str());
    const auto j = nlohmann::json::parse(a.str());
    CHECK(j["procedure"] == "face_grid");
    CHECK(j["segments"] == 258);
    CHECK(j["provenance_failures"].empty());
    CHECK(j["programmatic_bits"].get<double>() < j["naive_bits"].get<double>());
  }
}
