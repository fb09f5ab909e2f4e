// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one PASS/FAIL line per criterion, each with its
// measured runtime against the budget. Takes the CLI binary as argv[1].
#include <array>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <Eigen/Geometry>

#include "meshtri/fitting.hpp"
#include "meshtri/metrics.hpp"
#include "meshtri/scene.hpp"
#include "meshtri/volumetric.hpp"

using namespace meshtri;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do v = {n(rng), n(rng), n(rng)};
  while (v.norm() < 1e-6);
  return v.normalized();
}

const BodyModel& toy() {
  static const BodyModel m = make_toy_model(0, 1500);
  return m;
}

const TriMesh& toy_template() {
  static const TriMesh t{toy().template_verts, toy().faces};
  return t;
}

std::string run_capture(const std::string& cmd, int* status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    *status = -1;
    return out;
  }
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) out += buf.data();
  *status = pclose(p);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ‖g_a − g_n‖ / ‖g_n‖ with central differences of step h.
double gradient_error(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
                      const std::vector<double>& analytic, double h) {
  double diff2 = 0.0, num2 = 0.0;
  std::vector<double> y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    const double n = (fp - fm) / (2.0 * h);
    num2 += n * n;
    diff2 += (analytic[i] - n) * (analytic[i] - n);
  }
  return std::sqrt(diff2 / std::max(num2, 1e-300));
}

Outcome memory_arithmetic(const std::string& cli) {
  int s1 = 0, s2 = 0;
  const std::string a = run_capture("\"" + cli + "\" memory-report --res 16 --n 6890", &s1);
  const std::string b = run_capture("\"" + cli + "\" memory-report --res 64 --n 108", &s2);
  const bool ok = s1 == 0 && s2 == 0 && a.rfind("112.9 MB", 0) == 0 && b.rfind("113.2 MB", 0) == 0;
  std::string first = a.substr(0, a.find('\n')), second = b.substr(0, b.find('\n'));
  return {ok, "16^3 x 6890 -> \"" + first + "\", 64^3 x 108 -> \"" + second + "\""};
}

Outcome angular_suite() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double phi = n == 0 ? 0.0 : n == 1 ? 180.0 : uniform(rng, 0.0, 180.0);
    const Rotation r(Eigen::AngleAxisd(phi * M_PI / 180.0, random_unit(rng)).toRotationMatrix());
    worst = std::max(worst, std::abs(angular_distance(Rotation::identity(), r) - phi));
  }
  return {worst <= 1e-9, fmt("max |d - phi| = %.3g deg over 1000 draws", worst)};
}

Outcome aggregation_algebra() {
  std::mt19937_64 rng(3);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 8);
  double sum_err = 0.0, ident_err = 0.0;
  for (int c = 1; c <= 5; ++c) {
    std::vector<Volume> views;
    for (int v = 0; v < c; ++v) {
      Volume vol(g, 4);
      for (double& x : vol.values) x = uniform(rng, -10.0, 10.0);
      views.push_back(std::move(vol));
    }
    const Aggregation a = aggregate_softmax(views);
    for (std::size_t i = 0; i < views[0].values.size(); ++i) {
      double s = 0.0;
      for (int v = 0; v < c; ++v) s += a.weights[static_cast<std::size_t>(v)].values[i];
      sum_err = std::max(sum_err, std::abs(s - 1.0));
    }
    const Aggregation same = aggregate_softmax(std::vector<Volume>(static_cast<std::size_t>(c), views[0]));
    for (std::size_t i = 0; i < views[0].values.size(); ++i)
      ident_err = std::max(ident_err, std::abs(same.aggregate.values[i] - views[0].values[i]));
  }
  Volume zero(g, 4), ln3(g, 4);
  std::fill(ln3.values.begin(), ln3.values.end(), std::log(3.0));
  const Aggregation two = aggregate_softmax({zero, ln3});
  const double w_err = std::abs(two.weights[1].values[0] - 0.75);
  const bool ok = sum_err <= 1e-9 && ident_err <= 1e-12 && w_err <= 1e-12;
  return {ok, fmt("weight-sum err %.2g, identity err %.2g, {0, ln 3} weight err %.2g", sum_err, ident_err, w_err)};
}

Outcome soft_argmax_recovery() {
  const SubsamplingOperator op = decimate(toy_template(), 108).op;
  double worst = 0.0, total = 0.0;
  std::size_t counted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene s = gen_scene(toy(), op, seed);
    const VoxelGrid grid = scene_grid(s, 64);
    const double sigma = 1.5 * grid.pitch();
    const double inner = grid.side() / 2.0 - 3.0 * sigma;
    // Channels are independent, so render in blocks to bound memory.
    constexpr Eigen::Index kBlock = 12;
    for (Eigen::Index b = 0; b < s.gt_sub.rows(); b += kBlock) {
      const Eigen::Index n = std::min(kBlock, s.gt_sub.rows() - b);
      const Points verts = s.gt_sub.middleRows(b, n);
      const Points m = soft_argmax(heatmap_normalize(render_gaussian_heatmaps(verts, grid, sigma)));
      for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Vector3d v = verts.row(r).transpose();
        if ((v - grid.center()).cwiseAbs().maxCoeff() > inner) continue;
        const double e = 1000.0 * (m.row(r) - verts.row(r)).norm();
        worst = std::max(worst, e);
        total += e;
        ++counted;
      }
    }
  }
  const double mean = counted ? total / static_cast<double>(counted) : 0.0;
  const bool ok = counted > 0 && worst <= 15.6 && mean <= 3.0;
  return {ok, fmt("%.0f interior vertices, max %.4f mm, mean %.4f mm", static_cast<double>(counted), worst, mean)};
}

Outcome gradient_oracle() {
  std::mt19937_64 rng(5);
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;

  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 8);
  for (int trial = 0; trial < 10; ++trial) {
    Volume logits(g, 2);
    for (double& x : logits.values) x = uniform(rng, -2.0, 2.0);
    Points w(2, 3);
    for (Eigen::Index i = 0; i < 6; ++i) w.data()[i] = uniform(rng, -1.0, 1.0);
    const Volume h = heatmap_normalize(logits);
    const Volume grad = soft_argmax_backward(h, soft_argmax(h), w);
    auto f = [&](const std::vector<double>& x) {
      Volume v = logits;
      v.values = x;
      return soft_argmax(heatmap_normalize(v)).cwiseProduct(w).sum();
    };
    worst_a = std::max(worst_a, gradient_error(f, logits.values, grad.values, 1e-5));
  }

  const BodyModel& m = toy();
  std::vector<int> all(static_cast<std::size_t>(m.num_vertices()));
  for (int v = 0; v < m.num_vertices(); ++v) all[static_cast<std::size_t>(v)] = v;
  std::vector<double> w(all.size() * 3);
  for (double& x : w) x = uniform(rng, -1.0, 1.0);
  auto lbs_sum = [&](const auto* x, auto* verts) {
    using T = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
    const auto skel = lbs::pose_skeleton(m, x, rot::from_6d(x + kPoseDims), x + kPoseDims + 6);
    lbs::skin_vertices(m, skel, x + kPoseDims + 6, x + kPoseDims + 6 + kNumBetas, std::span<const int>(all), verts);
    T s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * verts[i];
    return s;
  };
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(kPoseDims + 6 + kNumBetas + 3));
    for (int i = 0; i < kPoseDims; ++i) x[static_cast<std::size_t>(i)] = uniform(rng, -0.5, 0.5);
    const Rotation r(Eigen::AngleAxisd(uniform(rng, 0.0, M_PI), random_unit(rng)).toRotationMatrix());
    const auto r6 = matrix_to_rot6d(r);
    std::copy(r6.begin(), r6.end(), x.begin() + kPoseDims);
    for (std::size_t i = kPoseDims + 6; i < x.size(); ++i) x[i] = uniform(rng, -1.0, 1.0);
    ad::Tape tape;
    std::vector<ad::Var> xv;
    for (double v : x) xv.push_back(tape.variable(v));
    std::vector<ad::Var> verts(w.size());
    const auto adj = tape.gradient(lbs_sum(xv.data(), verts.data()));
    std::vector<double> analytic;
    for (const auto& v : xv) analytic.push_back(adj[static_cast<std::size_t>(v.idx)]);
    auto f = [&](const std::vector<double>& y) {
      std::vector<double> out(w.size());
      return lbs_sum(y.data(), out.data());
    };
    worst_b = std::max(worst_b, gradient_error(f, x, analytic, 1e-6));
  }

  const SubsamplingOperator op = decimate(toy_template(), 108).op;
  const Scene s = gen_scene(m, op, 5);
  const FitConfig cfg;
  const FitObjective obj(m, s.gt_sub, op, cfg);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(obj.dims()));
    for (double& v : x) v = uniform(rng, -0.4, 0.4);
    x[kPoseDims] += 1.0;
    x[kPoseDims + 4] += 1.0;
    std::vector<double> grad;
    obj.evaluate(x, &grad);
    worst_c = std::max(worst_c, gradient_error([&](const std::vector<double>& y) { return obj.evaluate(y, nullptr).total; },
                                               x, grad, 1e-6));
  }
  const bool ok = worst_a < 1e-4 && worst_b < 1e-4 && worst_c < 1e-4;
  return {ok, fmt("max relative error: soft-argmax %.2g, lbs %.2g, E_fit %.2g", worst_a, worst_b, worst_c)};
}

Outcome fitting_recovery() {
  // Densest preset: the sub-vertex data term then constrains every limb.
  const SubsamplingOperator op = decimate(toy_template(), 431).op;
  const FitConfig cfg;  // lr 6e-2, 500 iterations, λ_w 6e-2, λ_z 2e-6, λ_β 5e-6, λ_α 5e-5
  int passed = 0, noreg_ok = 0;
  std::string per_scene;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = gen_scene(toy(), op, seed);
    const FitResult r = fit(toy(), s.gt_sub, op, cfg);
    const MetricReport rep = evaluate_fit(r, s, cfg);
    const bool good = rep.mpve <= 10.0 && rep.mean_angular <= 2.0;
    passed += good;
    const FitResult nr = fit(toy(), s.gt_sub, op, cfg.without_regularizers());
    noreg_ok += nr.terms.data <= r.terms.data;
    per_scene += fmt("\n    seed %2.0f: MPVE %6.3f mm, angular %5.3f deg", static_cast<double>(seed), rep.mpve,
                     rep.mean_angular) +
                 (good ? "" : "  <- over threshold") +
                 fmt(", E_data reg %.3g vs w/o reg %.3g", r.terms.data, nr.terms.data);
  }
  const bool ok = passed >= 18 && noreg_ok == 20;
  return {ok, fmt("%.0f/20 scenes within 10 mm and 2 deg, w/o-reg E_data <= regularized in %.0f/20", passed, noreg_ok) +
                  per_scene};
}

TriMesh random_mesh(std::mt19937_64& rng) {
  const int nv = std::uniform_int_distribution<int>(20, 250)(rng);
  const int nf = std::uniform_int_distribution<int>(10, 500)(rng);
  TriMesh m;
  m.vertices.resize(nv, 3);
  for (Eigen::Index i = 0; i < m.vertices.size(); ++i) m.vertices.data()[i] = uniform(rng, -1.0, 1.0);
  m.faces.resize(nf, 3);
  std::uniform_int_distribution<int> pick(0, nv - 1);
  for (int f = 0; f < nf; ++f) {
    int a = pick(rng), b, c;
    do b = pick(rng);
    while (b == a);
    do c = pick(rng);
    while (c == a || c == b);
    m.faces.row(f) << a, b, c;
  }
  return m;
}

Outcome visibility_equivalence() {
  std::mt19937_64 rng(7);
  std::size_t agree = 0, total = 0;
  for (int mesh = 0; mesh < 50; ++mesh) {
    const TriMesh m = random_mesh(rng);
    for (int c = 0; c < 8; ++c) {
      const Eigen::Vector3d eye = random_unit(rng) * uniform(rng, 1.8, 5.0);
      const Eigen::Vector3d target(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3));
      const CameraCalib cam = look_at_camera(eye, target, 1000, 1000, 1000);
      const VisibilityMap a = visibility(m, cam), b = visibility_bruteforce(m, cam);
      for (std::size_t v = 0; v < a.size(); ++v) agree += a[v] == b[v];
      total += a.size();
    }
  }
  return {agree == total, fmt("%.0f/%.0f vertex decisions agree", static_cast<double>(agree), static_cast<double>(total))};
}

Outcome decimation_presets() {
  bool ok = true;
  std::string detail;
  for (int n : kSubsamplePresets) {
    const DecimateResult a = decimate(toy_template(), n);
    const DecimateResult b = decimate(toy_template(), n);
    const Points g = apply_subsample(a.op, toy_template().vertices);
    const bool exact = a.mesh.num_vertices() == n;
    const bool bitwise = g.rows() == a.mesh.vertices.rows() &&
                         std::memcmp(g.data(), a.mesh.vertices.data(), sizeof(double) * 3 * g.rows()) == 0;
    const bool same = a.op.kept_indices == b.op.kept_indices && a.mesh.faces == b.mesh.faces;
    ok = ok && exact && bitwise && same;
    detail += fmt("%.0f", n) + (exact && bitwise && same ? " ok; " : " MISMATCH; ");
  }
  return {ok, detail + fmt("template V = %.0f", toy_template().num_vertices())};
}

Outcome metric_cases() {
  Points gt = Points::Zero(17, 3), pred = gt;
  pred.col(0).array() += 0.003;
  pred.col(1).array() += 0.004;
  const double m = mpjpe(pred, gt);
  Points g2 = Points::Zero(2, 3), p2 = g2;
  p2(0, 0) = 0.010;
  p2(1, 0) = 0.200;
  const double pck = pck3d(p2, g2, 150.0);
  Points g1 = Points::Zero(1, 3), p1 = g1;
  p1(0, 2) = 0.075;
  const double a = auc(p1, g1);
  const bool ok = std::abs(m - 5.0) < 1e-9 && pck == 50.0 && std::abs(a - 50.0) <= 100.0 * 5.0 / 150.0;
  return {ok, fmt("MPJPE %.9f mm, PCK@150 %.1f%%, AUC(75 mm step) %.4f", m, pck, a)};
}

Outcome end_to_end_determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / ("meshtri_acceptance_" + std::to_string(std::random_device{}()));
  int s1 = 0, s2 = 0;
  run_capture("\"" + cli + "\" pipeline --seed 7 --out \"" + (root / "a").string() + "\"", &s1);
  run_capture("\"" + cli + "\" pipeline --seed 7 --out \"" + (root / "b").string() + "\"", &s2);
  const std::string a = slurp(root / "a" / "report_seed7.json"), b = slurp(root / "b" / "report_seed7.json");
  std::error_code ec;
  fs::remove_all(root, ec);
  const bool ok = s1 == 0 && s2 == 0 && !a.empty() && a == b;
  return {ok, fmt("exit codes %.0f/%.0f, report %.0f bytes, ", s1, s2, static_cast<double>(a.size())) +
                  (a == b ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-meshtri-cli>\n");
    return 2;
  }
#if defined(__GLIBC__)
  // Keep the large volume buffers on the heap between blocks instead of
  // returning them to the kernel and faulting them back in.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  const std::string cli = argv[1];
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "memory arithmetic", 1.0, [&] { return memory_arithmetic(cli); }},
      {2, "angular distance suite", 1.0, angular_suite},
      {3, "aggregation algebra", 5.0, aggregation_algebra},
      {4, "soft-argmax recovery", 120.0, soft_argmax_recovery},
      {5, "gradient oracle", 60.0, gradient_oracle},
      {6, "fitting recovery", 600.0, fitting_recovery},
      {7, "visibility oracle equivalence", 60.0, visibility_equivalence},
      {8, "decimation presets", 30.0, decimation_presets},
      {9, "metric unit cases", 1.0, metric_cases},
      {10, "end-to-end determinism", 300.0, [&] { return end_to_end_determinism(cli); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %2d %-30s %s  [%.2f s / %.0f s budget%s] %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                c.budget_s, in_time ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
