// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fail.
// Usage: infervar_acceptance <path-to-infervar-cli> <scratch-dir>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "infervar/bound.hpp"
#include "infervar/estimate.hpp"
#include "infervar/metrics.hpp"
#include "infervar/serialization.hpp"
#include "infervar/tensor_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace infervar;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

fs::path g_cli;
fs::path g_work;

// ---------------------------------------------------------------------------

Outcome transform_round_trip() {
  PhiloxEngine rng(RandomStream{2024, 1});
  std::size_t failures = 0, non_square = 0;
  for (int n = 0; n < 100; ++n) {
    const std::size_t h = 1 + rng.next_u32() % 40;
    const std::size_t w = n % 2 == 0 ? h : 1 + rng.next_u32() % 40;
    const std::size_t c = 1 + rng.next_u32() % 3;
    non_square += h != w;
    const ImageTensor x = oracle::random_tensor(Shape{h, w, c}, 1000 + static_cast<std::uint64_t>(n), -1e3, 1e3);
    for (const Transform& t : all_transforms())
      if (!bit_equal(invert_transform(apply_transform(x, t), t), x)) ++failures;
  }
  return {failures == 0, "800 round trips, " + std::to_string(non_square) + " non-square images, " +
                             std::to_string(failures) + " mismatches"};
}

Outcome variance_oracle() {
  SampleSet pair;
  pair.samples = {ImageTensor(Shape{1, 1, 1}, 0.0), ImageTensor(Shape{1, 1, 1}, 2.0)};
  const double two_point = variance_map(pair).variance.at(0, 0);
  double worst = 0.0;
  PhiloxEngine rng(RandomStream{77, 2});
  for (int trial = 0; trial < 200; ++trial) {
    SampleSet set;
    const std::size_t n = 2 + rng.next_u32() % 31;
    const double offset = 100.0 * (rng.next_unit() - 0.5), spread = 0.01 + 10.0 * rng.next_unit();
    for (std::size_t k = 0; k < n; ++k)
      set.samples.push_back(oracle::random_tensor(Shape{3, 4, 2}, 5000 * static_cast<std::uint64_t>(trial) + k,
                                                  offset - spread, offset + spread));
    const UncertaintyMap u = variance_map(set);
    for (std::size_t i = 0; i < u.variance.size(); ++i) {
      std::vector<double> column;
      for (const auto& s : set.samples) column.push_back(s.values()[i]);
      const double expected = oracle::two_pass_variance(column);
      worst = std::max(worst, std::abs(u.variance.values()[i] - expected) / expected);
    }
  }
  const bool pass = two_point == 1.0 && worst <= 1e-12;
  return {pass, "var{0,2}=" + fmt(two_point, 17) + ", max relative error vs two-pass " + fmt(worst, 3)};
}

// Shared by the two analytic-model criteria.
struct AnalyticRun {
  std::vector<double> z;
  double y = 0.0;
};

const AnalyticRun& analytic_run() {
  static const AnalyticRun run = [] {
    const AnalyticLinearModel model = AnalyticLinearModel::from_affine(3.0, 0.0);
    const ImageTensor x(Shape{1, 1, 1}, 0.4);
    const SampleSet set = sample(model, x, noise_spec("hidden", 0.1, 100000, 31337));
    AnalyticRun r;
    for (const ImageTensor& s : set.samples) r.z.push_back(s.at(0, 0));
    r.y = model.forward(x).at(0, 0) + 0.05;
    return r;
  }();
  return run;
}

Outcome analytic_tail_bound() {
  const AnalyticRun& run = analytic_run();
  const double n = static_cast<double>(run.z.size());
  const std::vector<double> probe;
  const BoundCurve stats = bound_curve(run.z, run.y, probe);
  const std::vector<double> grid = linear_grid(stats.c + 0.01, stats.c + 6.0 * 0.3, 50);
  const BoundCurve curve = bound_curve(run.z, run.y, grid);
  std::size_t violations = 0;
  double worst_margin = INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = curve.empirical[i];
    const double se = std::sqrt(p * (1.0 - p) / n);
    const double allowed = *curve.bound[i] + 3.0 * se;
    worst_margin = std::min(worst_margin, allowed - p);
    if (p > allowed) ++violations;
  }
  return {violations == 0, "N=" + std::to_string(run.z.size()) + ", C=" + fmt(curve.c) + ", V=" + fmt(curve.variance) +
                               ", 50 t values, violations " + std::to_string(violations) +
                               ", min slack " + fmt(worst_margin)};
}

Outcome analytic_output_std() {
  const AnalyticRun& run = analytic_run();
  const double sd = std::sqrt(oracle::two_pass_variance(run.z));
  const double rel = std::abs(sd - 0.3) / 0.3;
  return {rel <= 0.02, "std " + fmt(sd, 6) + " vs |a2|*sigma 0.3, relative deviation " + fmt(rel, 3)};
}

Outcome dropout_mean() {
  const ImageTensor ones(Shape{1000, 1000, 1}, 1.0);
  const double m = mean(inject_dropout(ones, 0.5, RandomStream{99, 0}).values());
  return {std::abs(m - 1.0) <= 0.005, "mean " + fmt(m, 6) + " over 1e6 elements"};
}

Outcome exhaustive_ause() {
  constexpr std::size_t n = 5;
  std::vector<std::vector<double>> maps;
  for (unsigned code = 0; code < 1024; ++code) {
    std::vector<double> v(n);
    unsigned c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 4) v[i] = 1.0 + static_cast<double>(c % 4);
    maps.push_back(v);
  }
  const std::vector<double> fr = oracle::default_fractions();
  std::vector<std::size_t> ks;
  for (double f : fr) ks.push_back(oracle::removed(f, n));

  // Per error map: best achievable remaining mean for each removal count.
  std::vector<std::array<double, n>> best(maps.size());
  std::vector<double> totals(maps.size());
  for (std::size_t e = 0; e < maps.size(); ++e) {
    double total = 0.0;
    for (double v : maps[e]) total += v;
    totals[e] = total / n;
    for (std::size_t k = 0; k < n; ++k) best[e][k] = oracle::best_remaining_mean(maps[e], k) / totals[e];
  }
  std::vector<std::vector<std::size_t>> orders;
  for (const auto& u : maps) orders.push_back(oracle::selection_order(u));

  double worst = 0.0;
  std::size_t agreeing = 0, agree_nonzero = 0;
  for (std::size_t ui = 0; ui < maps.size(); ++ui) {
    for (std::size_t ei = 0; ei < maps.size(); ++ei) {
      const auto& err = maps[ei];
      const auto& order = orders[ui];
      std::array<double, n> method{};
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t r = k; r < n; ++r) s += err[order[r]];
        method[k] = s / static_cast<double>(n - k) / totals[ei];
      }
      double expected = 0.0;
      for (std::size_t i = 0; i + 1 < fr.size(); ++i) {
        const double d0 = method[ks[i]] - best[ei][ks[i]], d1 = method[ks[i + 1]] - best[ei][ks[i + 1]];
        expected += (fr[i + 1] - fr[i]) * (d0 + d1) / 2.0;
      }
      const double got = ause(*sparsification(maps[ui], err));
      worst = std::max(worst, std::abs(got - expected));

      bool agree = true;
      for (std::size_t r = 0; r + 1 < n; ++r) agree = agree && err[order[r]] >= err[order[r + 1]];
      if (agree) {
        ++agreeing;
        if (got != 0.0) ++agree_nonzero;
      }
    }
  }
  return {worst <= 1e-12 && agree_nonzero == 0,
          "1048576 pairs, max |AUSE - brute force| " + fmt(worst, 3) + ", " + std::to_string(agreeing) +
              " agreeing orderings with " + std::to_string(agree_nonzero) + " non-zero AUSE"};
}

Outcome singleton_block_patch() {
  PhiloxEngine rng(RandomStream{5150, 3});
  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    const std::size_t h = 2 + rng.next_u32() % 30, w = 2 + rng.next_u32() % 30;
    const ImageTensor v = oracle::random_tensor(Shape{h, w, 1}, 10 * static_cast<std::uint64_t>(pair) + 1);
    const ImageTensor e = oracle::random_tensor(Shape{h, w, 1}, 10 * static_cast<std::uint64_t>(pair) + 2);
    const UncertaintyMap u{v, v, 8};
    const ErrorMap em{e, LossKind::l1};
    const double px = *pixel_correlation(u, em);
    worst = std::max(worst, std::abs(*block_correlation(u, em, singleton_labels(h, w)) - px));
    worst = std::max(worst, std::abs(*patch_correlation(u, em, h, w) - px));
  }
  return {worst <= 1e-12, "50 pairs, max deviation from pixel correlation " + fmt(worst, 3)};
}

// ---------------------------------------------------------------------------
// Sweep on the toy upsampler.

struct SweepRow {
  double mean_c = 0.0;
  std::optional<double> corr_pixel;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// key: method -> tap -> strength -> row
using SweepTable = std::map<std::string, std::map<std::string, std::map<double, SweepRow>>>;

SweepTable run_sweep(std::uint64_t seed, const std::vector<double>& strengths) {
  nlohmann::json cfg{{"model", {{"name", "toy_upsampler"}, {"seed", seed}}},
                     {"synthetic", {{"count", 1}, {"height", 24}, {"width", 24}, {"seed", seed}}},
                     {"perturbation", {{"seed", seed}}},
                     {"sweep", {{"taps", {"loc0", "loc1", "loc2", "loc3"}}, {"sigmas", strengths}, {"rates", strengths}, {"samples", 8}}},
                     {"output_dir", (g_work / ("sweep_" + std::to_string(seed))).string()}};
  const cli::RunConfig config = cli::config_from_json(cfg);
  std::ostringstream log;
  cli::cmd_sweep(config, log);
  std::ifstream in(config.output_dir / "sweep.csv");
  std::string line;
  std::getline(in, line);
  SweepTable table;
  while (std::getline(in, line)) {
    const auto c = split(line);
    SweepRow row;
    row.mean_c = std::stod(c.at(3));
    if (!c.at(4).empty()) row.corr_pixel = std::stod(c.at(4));
    table[c.at(0)][c.at(1)][std::stod(c.at(2))] = row;
  }
  return table;
}

std::pair<Outcome, Outcome> sweep_criteria() {
  const std::vector<double> strengths{0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
  const std::vector<std::string> taps{"loc0", "loc1", "loc2", "loc3"};
  const std::vector<std::string> methods{"gaussian_noise", "dropout"};
  std::vector<SweepTable> tables;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) tables.push_back(run_sweep(seed, strengths));

  // Monotonicity: paired increments over seeds must not be significantly negative.
  std::size_t checks = 0, decreasing = 0;
  double worst_t = INFINITY;
  for (const auto& m : methods)
    for (const auto& tap : taps)
      for (std::size_t k = 0; k + 1 < strengths.size(); ++k) {
        std::vector<double> d;
        for (const auto& t : tables)
          d.push_back(t.at(m).at(tap).at(strengths[k + 1]).mean_c - t.at(m).at(tap).at(strengths[k]).mean_c);
        double mu = 0.0;
        for (double x : d) mu += x;
        mu /= static_cast<double>(d.size());
        double ss = 0.0;
        for (double x : d) ss += (x - mu) * (x - mu);
        const double se = std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
        ++checks;
        if (se > 0.0) worst_t = std::min(worst_t, mu / se);
        if (mu < -2.0 * se) ++decreasing;
      }
  Outcome mono{decreasing == 0, std::to_string(checks) + " (method, tap, step) checks over 10 seeds, " +
                                    std::to_string(decreasing) + " significantly decreasing, min t-stat " +
                                    fmt(worst_t, 3)};

  // Tap selection: smallest mean-C increase should carry the best pixel correlation.
  std::string detail;
  bool pass = true;
  for (const auto& m : methods) {
    std::size_t hits = 0;
    std::map<std::string, std::size_t> chosen;
    for (const auto& t : tables) {
      std::string least_tap, best_tap;
      double least = INFINITY, best = -INFINITY;
      for (const auto& tap : taps) {
        const auto& rows = t.at(m).at(tap);
        const double base = rows.at(0.0).mean_c;
        double inc = 0.0, corr = -INFINITY;
        for (std::size_t k = 1; k < strengths.size(); ++k) {
          const SweepRow& r = rows.at(strengths[k]);
          inc += r.mean_c - base;
          if (r.corr_pixel) corr = std::max(corr, *r.corr_pixel);
        }
        inc /= static_cast<double>(strengths.size() - 1);
        if (inc < least) least = inc, least_tap = tap;
        if (corr > best) best = corr, best_tap = tap;
      }
      ++chosen[least_tap];
      if (least_tap == best_tap) ++hits;
    }
    pass = pass && hits >= 8;
    detail += m + " " + std::to_string(hits) + "/10 (least-increase tap:";
    for (const auto& [tap, count] : chosen) detail += " " + tap + "x" + std::to_string(count);
    detail += ") ";
  }
  detail.pop_back();
  return {mono, Outcome{pass, detail}};
}

Outcome bound_gap_growth() {
  const ToyUpsamplerModel model(11);
  const ImagePair pair = synthetic_pair(model, 16, 16, 1, 11);
  const std::vector<double> rates{0.01, 0.05, 0.1, 0.2, 0.3, 0.5};
  std::vector<SampleSet> sets;
  for (double r : rates) sets.push_back(sample(model, pair.input, dropout_spec("loc1", r, 2000, 4242)));

  PhiloxEngine rng(RandomStream{8, 8});
  std::vector<PixelCoord> pixels;
  for (int k = 0; k < 10; ++k)
    pixels.push_back(PixelCoord{rng.next_u32() % pair.ground_truth.height(), rng.next_u32() % pair.ground_truth.width(), 0});

  std::vector<double> areas(rates.size(), 0.0);
  const std::vector<double> probe;
  for (const PixelCoord& p : pixels) {
    const double y = pair.ground_truth.at(p.row, p.col);
    const BoundCurve widest = bound_curve(sets.back(), y, p, probe);
    const std::vector<double> grid = linear_grid(0.0, widest.c + 6.0 * std::sqrt(widest.variance), 50);
    for (std::size_t r = 0; r < rates.size(); ++r)
      areas[r] += bound_gap_area(bound_curve(sets[r], y, p, grid)) / static_cast<double>(pixels.size());
  }
  bool strictly = true;
  std::string detail = "mean gap area by rate:";
  for (std::size_t r = 0; r < rates.size(); ++r) {
    detail += " " + fmt(rates[r], 2) + "->" + fmt(areas[r]);
    if (r > 0 && !(areas[r] > areas[r - 1])) strictly = false;
  }
  return {strictly && areas.back() > areas.front(), detail};
}

Outcome nll_closed_forms() {
  const ImageTensor y = oracle::random_tensor(Shape{8, 8, 1}, 3);
  UncertaintyMap u{ImageTensor(y.shape(), 1.0 / (2.0 * std::numbers::pi)), y, 8};
  const double zero = nll(u, y);
  u.variance = ImageTensor(y.shape(), 1.0);
  const double half_log = nll(u, y);
  const double target = 0.5 * std::log(2.0 * std::numbers::pi);
  return {std::abs(zero) <= 1e-12 && std::abs(half_log - target) <= 1e-12,
          "nll(1/2pi)=" + fmt(zero, 3) + ", nll(1)-ln(2pi)/2=" + fmt(half_log - target, 3)};
}

// ---------------------------------------------------------------------------
// CLI determinism.

int run_cli(const std::string& args) {
  const std::string cmd = g_cli.string() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[fs::relative(entry.path(), dir).string()] = s.str();
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path base = g_work / "determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  // Inputs for `evaluate` come from one estimate run.
  const fs::path seed_dir = base / "seed_estimate";
  if (run_cli("estimate --set synthetic.count=2 --set synthetic.height=12 --set synthetic.width=12 "
              "--set perturbation.method=transform_set --out " + seed_dir.string()) != 0)
    return {false, "could not produce evaluate inputs"};
  nlohmann::json eval_cfg{{"ground_truth", {(seed_dir / "ground_truth_000.ten").string(), (seed_dir / "ground_truth_001.ten").string()}},
                          {"evaluate",
                           {{"uncertainty", {(seed_dir / "variance_000.ten").string(), (seed_dir / "variance_001.ten").string()}},
                            {"predictions", {(seed_dir / "prediction_000.ten").string(), (seed_dir / "prediction_001.ten").string()}},
                            {"means", {(seed_dir / "mean_000.ten").string(), (seed_dir / "mean_001.ten").string()}}}}};
  std::ofstream(base / "evaluate.json") << eval_cfg.dump();

  const std::string small = "--set synthetic.height=10 --set synthetic.width=10 ";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"estimate", small + "--set synthetic.count=2 --set perturbation.method=gaussian_noise --set perturbation.tap=loc2 "
                           "--set perturbation.sigma=0.2 --set perturbation.samples=16"},
      {"evaluate", "--config " + (base / "evaluate.json").string()},
      {"sweep", small + "--set 'sweep.taps=[\"loc1\",\"loc3\"]' --set sweep.sigmas=[0.1] --set sweep.rates=[0.3] "
                        "--set sweep.samples=6"},
      {"bound", small + "--set perturbation.method=dropout --set perturbation.tap=loc1 --set perturbation.rate=0.2 "
                        "--set perturbation.samples=64 --set 'bound.pixels=[[3,4],[10,2]]'"},
      {"report", small + "--set synthetic.count=2 --set perturbation.method=dropout --set perturbation.tap=loc3 "
                         "--set perturbation.rate=0.1 --set perturbation.samples=8"},
  };
  std::string failed;
  for (const auto& [name, args] : commands) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (int threads : {1, 1, 8, 8}) {
      const fs::path out = base / (name + "_" + std::to_string(threads) + "_" + std::to_string(outputs.size()));
      if (run_cli(name + " " + args + " --seed 17 --threads " + std::to_string(threads) + " --out " + out.string()) != 0) {
        failed += " " + name + "(exit)";
        break;
      }
      outputs.push_back(snapshot(out));
    }
    if (outputs.size() != 4) continue;
    if (outputs[0].empty()) failed += " " + name + "(no output)";
    for (std::size_t k = 1; k < outputs.size(); ++k)
      if (outputs[k] != outputs[0]) {
        failed += " " + name + "(differs)";
        break;
      }
  }
  return {failed.empty(), failed.empty() ? "5 commands x {1,1,8,8} threads byte-identical" : "failures:" + failed};
}

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
  double limit_seconds;  // <= 0: no per-criterion limit
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <infervar-cli> <scratch-dir>\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_work = argv[2];
  fs::create_directories(g_work);

  // Criteria 8a/8b share one sweep run.
  std::optional<std::pair<Outcome, Outcome>> sweep;
  const auto sweep_part = [&](bool second) {
    if (!sweep) sweep = sweep_criteria();
    return second ? sweep->second : sweep->first;
  };

  const std::vector<Criterion> criteria{
      {"C1  transform round-trip bit-exact on 100 images", transform_round_trip, 1.0},
      {"C2  Welford variance vs two-pass oracle", variance_oracle, 1.0},
      {"C3  analytic model tail within V/(t-C)^2 + 3 SE", analytic_tail_bound, 10.0},
      {"C4  analytic model output std = |a2| sigma (2%)", analytic_output_std, 10.0},
      {"C5  inverted dropout preserves the mean", dropout_mean, 0.0},
      {"C6  exhaustive 5-pixel AUSE vs brute force", exhaustive_ause, 0.0},
      {"C7  singleton blocks and 1x1 patches equal pixel correlation", singleton_block_patch, 0.0},
      {"C8a sweep: mean C non-decreasing in strength at every tap", [&] { return sweep_part(false); }, 0.0},
      {"C8b sweep: least-increase tap has best pixel correlation", [&] { return sweep_part(true); }, 0.0},
      {"C9  bound gap area grows with dropout rate", bound_gap_growth, 0.0},
      {"C10 NLL closed forms", nll_closed_forms, 0.0},
      {"C11 CLI byte-identical across runs and thread counts", cli_determinism, 0.0},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += " [over time limit " + fmt(c.limit_seconds, 3) + " s]";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %-62s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
