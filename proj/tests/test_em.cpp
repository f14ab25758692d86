#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rfray/dual.hpp"
#include "rfray/em.hpp"
#include "rfray/rng.hpp"

using namespace rfray;

namespace {

std::string scene_path(const char* name) {
  return std::string(RFRAY_SCENES_DIR) + "/" + name;
}

V3 random_unit(SplitMix64& rng) {
  GaussStream g(rng.fork(rng.next_u64()));
  return normalized(V3{g.next(), g.next(), g.next()});
}

double vec_mag(const std::array<Cd, 2>& e) {
  return std::sqrt(abs2(e[0]) + abs2(e[1]));
}

// Scalar channel coefficient: RX pattern dotted against the arrival field.
Cd rx_projected(const std::array<Cd, 2>& e, Pattern rx_pattern, const V3& u_arr) {
  const auto c = pattern_field(rx_pattern, u_arr);
  return c[0] * e[0] + c[1] * e[1];
}

// Rigid transform that respects the antenna model: polarization references
// the global z axis, so the symmetry group is rotation about z + translation.
Scene transformed_scene(const Scene& s, double yaw, const V3& shift) {
  const double c = std::cos(yaw), sn = std::sin(yaw);
  const Mat3 r{{{c, -sn, 0.0}, {sn, c, 0.0}, {0.0, 0.0, 1.0}}};
  Scene out = s;
  for (auto& o : out.objects) {
    for (auto& v : o.mesh.vertices) v = r.apply(v) + shift;
    compute_normals(o.mesh);
    o.offset = r.apply(o.offset);
  }
  out.tx.array.origin = r.apply(out.tx.array.origin) + shift;
  out.tx.array.axis = r.apply(out.tx.array.axis);
  out.rx.array.origin = r.apply(out.rx.array.origin) + shift;
  out.rx.array.axis = r.apply(out.rx.array.axis);
  return out;
}

}  // namespace

TEST_CASE("complex permittivity sign and limits") {
  const Cd a = complex_permittivity(5.24, 0.0, 5e9);
  REQUIRE(a.re == 5.24);
  REQUIRE(a.im == 0.0);

  const Cd b = complex_permittivity(5.24, 0.1, 5e9);
  REQUIRE(b.im < 0.0);
  const Cd c = complex_permittivity(5.24, 0.1, 50e9);
  REQUIRE(std::abs(c.im) < std::abs(b.im));  // loss term shrinks with f
  // Exact value: sigma / (2 pi f eps0).
  const double expect = 0.1 / (2.0 * kPi * 5e9 * kVacuumPermittivity);
  REQUIRE(b.im == Catch::Approx(-expect).epsilon(1e-12));

  REQUIRE_THROWS_AS(complex_permittivity(5.24, 0.1, 0.0), NumericError);
}

TEST_CASE("fresnel coefficients at the pinned points") {
  SECTION("normal incidence on eta = 4") {
    const auto [rs, rp] = fresnel(1.0, Cd{4.0, 0.0});
    REQUIRE(rs.re == Catch::Approx(-1.0 / 3.0).margin(1e-12));
    REQUIRE(rs.im == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(rp.re == Catch::Approx(1.0 / 3.0).margin(1e-12));
    REQUIRE(rp.im == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("grazing incidence is a perfect mirror") {
    for (const Cd eta : {Cd{4.0, 0.0}, Cd{5.24, -2.0}, Cd{1.5, -0.01}}) {
      const auto [rs, rp] = fresnel(0.0, eta);
      REQUIRE(abs(rs - Cd{-1.0, 0.0}) < 1e-12);
      REQUIRE(abs(rp - Cd{-1.0, 0.0}) < 1e-12);
    }
  }
  SECTION("index-matched medium reflects nothing") {
    for (double c : {0.1, 0.5, 0.9, 1.0}) {
      const auto [rs, rp] = fresnel(c, Cd{1.0, 0.0});
      REQUIRE(abs(rs) < 1e-12);
      REQUIRE(abs(rp) < 1e-12);
    }
  }
  SECTION("passivity over random lossy draws") {
    SplitMix64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
      const double eps = 1.0 + 9.0 * rng.next_double();
      const double sig = rng.next_double();
      const double c = rng.next_double();
      const auto eta = complex_permittivity(eps, sig, 5e9);
      const auto [rs, rp] = fresnel(c, eta);
      REQUIRE(abs(rs) <= 1.0 + 1e-12);
      REQUIRE(abs(rp) <= 1.0 + 1e-12);
    }
  }
  SECTION("cosine domain is enforced") {
    REQUIRE_THROWS_AS(fresnel(1.5, Cd{4.0, 0.0}), NumericError);
    REQUIRE_THROWS_AS(fresnel(-0.2, Cd{4.0, 0.0}), NumericError);
  }
}

TEST_CASE("spherical basis is orthonormal and matches the closed form") {
  SECTION("generic direction") {
    const double t = 1.1, p = 2.3;
    const V3 d{std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
    const auto [et, ep] = spherical_basis(d);
    const V3 et_ref{std::cos(t) * std::cos(p), std::cos(t) * std::sin(p), -std::sin(t)};
    const V3 ep_ref{-std::sin(p), std::cos(p), 0.0};
    REQUIRE(norm(et - et_ref) < 1e-12);
    REQUIRE(norm(ep - ep_ref) < 1e-12);
  }
  SECTION("poles use the phi = 0 limit") {
    const auto [et_up, ep_up] = spherical_basis(V3{0, 0, 1});
    REQUIRE(norm(et_up - V3{1, 0, 0}) < 1e-15);
    REQUIRE(norm(ep_up - V3{0, 1, 0}) < 1e-15);
    const auto [et_dn, ep_dn] = spherical_basis(V3{0, 0, -1});
    REQUIRE(norm(et_dn - V3{-1, 0, 0}) < 1e-15);
    REQUIRE(norm(ep_dn - V3{0, 1, 0}) < 1e-15);
  }
  SECTION("orthonormality over random directions") {
    SplitMix64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const V3 d = random_unit(rng);
      const auto [et, ep] = spherical_basis(d);
      REQUIRE(std::abs(norm(et) - 1.0) < 1e-12);
      REQUIRE(std::abs(norm(ep) - 1.0) < 1e-12);
      REQUIRE(std::abs(dot(et, ep)) < 1e-12);
      REQUIRE(std::abs(dot(et, d)) < 1e-12);
      REQUIRE(std::abs(dot(ep, d)) < 1e-12);
    }
  }
}

TEST_CASE("antenna patterns") {
  REQUIRE(pattern_field(Pattern::IsotropicVertical, V3{0.3, 0.4, std::sqrt(0.75)})[0] == 1.0);
  REQUIRE(pattern_field(Pattern::IsotropicVertical, V3{1, 0, 0})[1] == 0.0);
  // Short dipole: sin(theta) on the theta component, null along z.
  REQUIRE(pattern_field(Pattern::ShortDipole, V3{0, 0, 1})[0] == 0.0);
  REQUIRE(pattern_field(Pattern::ShortDipole, V3{1, 0, 0})[0] == 1.0);
  const double s = std::sqrt(0.5);
  REQUIRE(pattern_field(Pattern::ShortDipole, V3{s, 0, s})[0] == Catch::Approx(s).margin(1e-12));
}

TEST_CASE("basis rotation") {
  const V3 n{0, 0, 1};
  const double s = 1.0 / std::sqrt(2.0);
  const V3 d{s, 0, -s};
  const V3 perp = perp_axis(d, n);
  const V3 par = cross(perp, d);

  SECTION("aligned frames give the identity") {
    const auto m = basis_rotation(d, n, perp, par);
    REQUIRE(m[0] == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(m[1] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(m[2] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(m[3] == Catch::Approx(1.0).margin(1e-15));
  }
  SECTION("a quarter turn of the current basis") {
    const auto m = basis_rotation(d, n, -1.0 * par, perp);
    REQUIRE(m[0] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(m[1] == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(m[2] == Catch::Approx(-1.0).margin(1e-15));
    REQUIRE(m[3] == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("orthogonality over random geometry") {
    SplitMix64 rng(99);
    for (int i = 0; i < 1000; ++i) {
      const V3 din = random_unit(rng);
      V3 nn = random_unit(rng);
      if (norm(cross(din, nn)) < 1e-6) continue;
      // Random orthonormal transverse basis.
      V3 u = normalized(cross(din, random_unit(rng)));
      const V3 w = cross(din, u);
      const double a = 2.0 * kPi * rng.next_double();
      const V3 es = std::cos(a) * u + std::sin(a) * w;
      const V3 ep = cross(din, es);
      const auto m = basis_rotation(din, nn, es, ep);
      REQUIRE(m[0] * m[0] + m[1] * m[1] == Catch::Approx(1.0).margin(1e-12));
      REQUIRE(m[2] * m[2] + m[3] * m[3] == Catch::Approx(1.0).margin(1e-12));
      REQUIRE(m[0] * m[2] + m[1] * m[3] == Catch::Approx(0.0).margin(1e-12));
      const double det = m[0] * m[3] - m[1] * m[2];
      REQUIRE(std::abs(det) == Catch::Approx(1.0).margin(1e-12));
    }
  }
  SECTION("normal incidence falls back to the projected horizontal axis") {
    const V3 down{0, 0, -1};
    REQUIRE(norm(perp_axis(down, V3{0, 0, 1}) - V3{1, 0, 0}) < 1e-15);
    // Direction along x: horizontal fallback shifts to the y axis.
    REQUIRE(norm(perp_axis(V3{1, 0, 0}, V3{-1, 0, 0}) - V3{0, 1, 0}) < 1e-15);
  }
}

TEST_CASE("line-of-sight transfer reproduces free-space spreading") {
  for (double d : {2.0, 4.0, 6.0}) {
    Scene s = load_scene(scene_path("free_space.json"));
    s.rx.array.origin = V3{d, 0.0, 1.2};
    const auto paths = trace_paths(s, 0, 0);
    REQUIRE(paths.size() == 1);
    const double f = 5e9;
    const auto e = path_transfer(paths[0], s, f);
    const double expect = (kSpeedOfLight / f) / (4.0 * kPi * d);
    REQUIRE(vec_mag(e) == Catch::Approx(expect).epsilon(1e-9));
    // Vertical launch arrives on the theta component with positive sign.
    REQUIRE(e[0].re == Catch::Approx(expect).epsilon(1e-9));
    REQUIRE(std::abs(e[0].im) < 1e-15);
    REQUIRE(abs(e[1]) < 1e-15);
  }
  // Magnitude at 4 m and 5 GHz, pinned by hand: ~1.193e-3.
  Scene s = load_scene(scene_path("free_space.json"));
  const auto paths = trace_paths(s, 0, 0);
  REQUIRE(vec_mag(path_transfer(paths[0], s, 5e9)) == Catch::Approx(1.193e-3).epsilon(1e-3));
}

TEST_CASE("vertical bounce off an eta = 4 floor scales by one third and flips") {
  // Hand-built degenerate path: straight down 1 m, reflect, straight up 1 m.
  SolvedPath<double> sp;
  sp.key = {0};
  sp.points = {V3{0, 0, 1}, V3{0, 0, 0}, V3{0, 0, 1}};
  sp.seg_dirs = {V3{0, 0, -1}, V3{0, 0, 1}};
  sp.hop_normals = {V3{0, 0, 1}};
  sp.cos_inc = {1.0};
  sp.materials = {0};
  sp.length = 2.0;
  sp.tau = 2.0 / kSpeedOfLight;
  sp.v = 1.0;

  const double f = 5e9;
  const std::vector<double> eps{4.0}, sig{0.0};
  const auto e = path_field(sp, Pattern::IsotropicVertical, eps, sig, f);
  const double a_los = (kSpeedOfLight / f) / (4.0 * kPi * 2.0);
  REQUIRE(vec_mag(e) == Catch::Approx(a_los / 3.0).epsilon(1e-12));
  REQUIRE(e[0].re == Catch::Approx(-a_los / 3.0).epsilon(1e-12));  // sign flip
  REQUIRE(abs(e[1]) < 1e-15);
}

TEST_CASE("occluded path transfers nothing") {
  SolvedPath<double> sp;
  sp.key = {};
  sp.points = {V3{0, 0, 1}, V3{4, 0, 1}};
  sp.seg_dirs = {V3{1, 0, 0}};
  sp.length = 4.0;
  sp.tau = 4.0 / kSpeedOfLight;
  sp.v = 0.0;
  const auto e = path_field(sp, Pattern::IsotropicVertical, {}, {}, 5e9);
  REQUIRE(abs(e[0]) == 0.0);
  REQUIRE(abs(e[1]) == 0.0);
}

TEST_CASE("per-path transfer magnitude never exceeds the spreading bound") {
  const Scene s = load_scene(scene_path("shoebox.json"));
  const auto paths = trace_paths(s, 0, 0);
  REQUIRE(paths.size() >= 9);
  for (const auto& p : paths) {
    const double f = 5e9;
    const double bound = (kSpeedOfLight / f) / (4.0 * kPi * p.tau * kSpeedOfLight);
    REQUIRE(vec_mag(path_transfer(p, s, f)) <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("yawing and shifting the whole scene preserves transfer magnitudes") {
  const Scene s = load_scene(scene_path("shoebox.json"));
  const Scene sr = transformed_scene(s, 1.2345, V3{1.5, -0.7, 0.25});

  const auto pa = trace_paths(s, 0, 0);
  const auto pb = trace_paths(sr, 0, 0);

  // Compare per-key magnitudes on the common key set; first-order keys and
  // the LoS must be present in both.
  std::size_t compared = 0;
  for (const auto& a : pa) {
    const PathRecord* match = nullptr;
    for (const auto& b : pb)
      if (b.key == a.key) {
        match = &b;
        break;
      }
    if (a.key.size() <= 1) REQUIRE(match != nullptr);
    if (!match) continue;
    const auto ea = path_transfer(a, s, 5e9);
    const auto eb = path_transfer(*match, sr, 5e9);
    REQUIRE(vec_mag(eb) == Catch::Approx(vec_mag(ea)).epsilon(1e-9));
    ++compared;
  }
  REQUIRE(compared >= 9);
}

TEST_CASE("swapping the antennas preserves the scalar coefficient") {
  Scene s = load_scene(scene_path("shoebox.json"));
  s.tx.array.count = 1;  // single element on both sides
  Scene sw = s;
  std::swap(sw.tx, sw.rx);

  const auto fwd = trace_paths(s, 0, 0);
  const auto rev = trace_paths(sw, 0, 0);

  // Depth <= 1 keys must pair exactly; deeper prefixes are enumerated from
  // opposite endpoints so they are compared whenever both sides found them.
  std::size_t compared = 0;
  for (const auto& a : fwd) {
    PathKey want = a.key;
    std::reverse(want.begin(), want.end());
    const PathRecord* match = nullptr;
    for (const auto& b : rev)
      if (b.key == want) {
        match = &b;
        break;
      }
    if (a.key.size() <= 1) REQUIRE(match != nullptr);
    if (!match) continue;
    const V3 ua = normalized(a.points[a.points.size() - 2] - a.points.back());
    const V3 ub = normalized(match->points[match->points.size() - 2] - match->points.back());
    const Cd ha = rx_projected(path_transfer(a, s, 5e9), s.rx.pattern, ua);
    const Cd hb = rx_projected(path_transfer(*match, sw, 5e9), sw.rx.pattern, ub);
    REQUIRE(abs(hb) == Catch::Approx(abs(ha)).epsilon(1e-9));
    ++compared;
  }
  REQUIRE(compared >= 9);
}

TEST_CASE("transfer is continuous in the material parameters") {
  const Scene s = load_scene(scene_path("shoebox.json"));
  const auto paths = trace_paths(s, 0, 0);
  const PathRecord* bounce = nullptr;
  for (const auto& p : paths)
    if (p.key.size() == 1) {
      bounce = &p;
      break;
    }
  REQUIRE(bounce != nullptr);

  Scene s2 = s;
  const double h = 1e-7;
  for (auto& m : s2.materials) m.eps_r += h;
  const auto e1 = path_transfer(*bounce, s, 5e9);
  const auto e2 = path_transfer(*bounce, s2, 5e9);
  const double delta = std::sqrt(abs2(e2[0] - e1[0]) + abs2(e2[1] - e1[1]));
  REQUIRE(delta > 0.0);        // permittivity actually enters
  REQUIRE(delta < 1e-7);       // and smoothly
}

TEST_CASE("dual arithmetic differentiates the transfer against finite differences") {
  // Floor-bounce scene; derivative of |E| with respect to the material eps_r.
  Scene s = load_scene(scene_path("shoebox.json"));
  const auto world = build_world(s);
  const auto pd = current_params(s);
  const auto keys = discover_keys(world, pd.tx_element(s, 0), s.sim);

  auto params = SceneParams<Dual2>::from_scene(s);
  seed_param(s, params, {ParamKind::MaterialEps, "concrete"}, 0);
  const auto solved = replay_keys(s, params, keys, 0, 0);
  REQUIRE(solved.size() >= 9);

  const double f = 5e9;
  int checked = 0;
  for (const auto& sp : solved) {
    if (sp.key.empty()) continue;  // LoS has no material dependence
    const auto e = path_field(sp, Pattern::IsotropicVertical, params.eps_r, params.sigma, f);
    const Dual2 mag = sqrt(abs2(e[0]) + abs2(e[1]));

    // Central finite difference through the double pipeline.
    const double h = 1e-6;
    auto eval = [&](double deps) {
      Scene sc = s;
      set_material(sc, "concrete", sc.materials[std::size_t(sc.material_index("concrete"))].eps_r + deps,
                   0.0);
      auto ps = SceneParams<double>::from_scene(sc);
      auto sv = replay_keys(sc, ps, keys, 0, 0);
      for (const auto& q : sv)
        if (q.key == sp.key) {
          const auto eq = path_field(q, Pattern::IsotropicVertical, ps.eps_r, ps.sigma, f);
          return std::sqrt(abs2(eq[0]) + abs2(eq[1]));
        }
      return -1.0;
    };
    const double lo = eval(-h), hi = eval(h);
    REQUIRE(lo >= 0.0);
    REQUIRE(hi >= 0.0);
    const double fd = (hi - lo) / (2.0 * h);
    REQUIRE(mag.d[0] == Catch::Approx(fd).margin(std::abs(fd) * 1e-5 + 1e-12));
    ++checked;
  }
  REQUIRE(checked >= 8);
}
