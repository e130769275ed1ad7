// Command-line front end: declare a layered contraction system, then probe
// it (cutsets, covers, measure samples, dimension estimates, separation
// diagnostics) or replay a canned reproduction target against its fixtures.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "moranifs/attractor.hpp"
#include "moranifs/dimension.hpp"
#include "moranifs/families.hpp"
#include "moranifs/io.hpp"
#include "moranifs/kernels.hpp"
#include "moranifs/parallel.hpp"
#include "moranifs/separation.hpp"
#include "moranifs/words.hpp"

using namespace moran;
using moran::io::json;

namespace {

constexpr double kLn2 = 0.6931471805599453094;

struct SystemArgs {
  std::string config;
  std::string family;
  std::vector<std::string> params;
  std::string ambient;  // "lo1,lo2:hi1,hi2"
};

void add_system_flags(CLI::App* cmd, SystemArgs* args) {
  cmd->add_option("--config", args->config,
                  "system declaration file (JSON; see docs/schema.md)");
  cmd->add_option("--family", args->family,
                  "built-in family name (constant, ex51, ex53, ...)");
  cmd->add_option("--param", args->params,
                  "family parameter key=value (repeatable)");
  cmd->add_option("--ambient", args->ambient,
                  "override ambient box, lo[,lo..]:hi[,hi..]");
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string cell = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(std::stod(cell));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

io::Declaration resolve_system(const SystemArgs& args) {
  if (!args.config.empty()) return io::load_system_file(args.config);
  if (args.family.empty())
    throw Error("pass either --config or --family (see --help)");
  FamilyParams fp;
  for (const std::string& kv : args.params) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error("--param expects key=value, got: " + kv);
    std::string key = kv.substr(0, eq);
    std::string val = kv.substr(eq + 1);
    if (key == "translations") {
      fp.translations = parse_csv_doubles(val);
      continue;
    }
    try {
      std::size_t used = 0;
      double num = std::stod(val, &used);
      if (used == val.size()) {
        fp.nums[key] = num;
        continue;
      }
    } catch (...) {
    }
    fp.strs[key] = val;
  }
  std::optional<Box> ambient;
  if (!args.ambient.empty()) {
    std::size_t colon = args.ambient.find(':');
    if (colon == std::string::npos)
      throw Error("--ambient expects lo...:hi...");
    std::vector<double> lo = parse_csv_doubles(args.ambient.substr(0, colon));
    std::vector<double> hi = parse_csv_doubles(args.ambient.substr(colon + 1));
    Box b;
    for (std::size_t a = 0; a < lo.size() && a < kMaxDim; ++a) b.lo[a] = lo[a];
    for (std::size_t a = 0; a < hi.size() && a < kMaxDim; ++a) b.hi[a] = hi[a];
    ambient = b;
  }
  io::Declaration d;
  d.system = make_family(args.family, fp, ambient);
  return d;
}

std::vector<double> resolve_bgrid(const LayerSystem& sys,
                                  const std::string& spec,
                                  std::uint64_t default_depth) {
  if (spec.empty() || spec == "auto")
    return natural_log_b_grid(sys, default_depth);
  if (spec.rfind("auto:", 0) == 0)
    return natural_log_b_grid(sys, std::stoull(spec.substr(5)));
  std::vector<double> grid;
  if (spec.rfind("log:", 0) == 0) {
    grid = parse_csv_doubles(spec.substr(4));
  } else {
    for (double b : parse_csv_doubles(spec)) {
      if (!(b > 0.0 && b < 1.0)) throw Error("grid values must lie in (0,1)");
      grid.push_back(std::log(b));
    }
  }
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  return grid;
}

Vec resolve_anchor(const LayerSystem& sys, const std::string& spec) {
  if (spec.empty()) return sys.ambient().center(sys.dim());
  std::vector<double> v = parse_csv_doubles(spec);
  Vec a = vec0();
  for (std::size_t i = 0; i < v.size() && i < kMaxDim; ++i) a[i] = v[i];
  return a;
}

void emit_json(const json& j, const std::string& path) {
  std::string text = j.dump(2);
  text.push_back('\n');
  if (path.empty() || path == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    io::write_text_file(path, text);
  }
}

json gamma_json(const GammaSamples& g) {
  json j;
  j["verdict"] = verdict_name(g.verdict);
  j["note"] = g.note;
  j["sup"] = g.sup_value;
  json samples = json::array();
  for (std::size_t i = 0; i < g.log_b.size(); ++i) {
    json s;
    s["log_b"] = g.log_b[i];
    s["value"] = g.value[i];
    if (i < g.pair_count.size()) s["pairs_within_theta"] = g.pair_count[i];
    if (i < g.intersecting_count.size())
      s["pairs_intersecting"] = g.intersecting_count[i];
    if (i < g.min_gap.size() && std::isfinite(g.min_gap[i]))
      s["min_gap"] = g.min_gap[i];
    samples.push_back(s);
  }
  j["samples"] = samples;
  return j;
}

json dim_report_json(const LayerSystem& sys, const DimensionReport& rep) {
  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["system"] = sys.describe();
  json h;
  json seq = json::array();
  for (const auto& [k, s] : rep.hausdorff.s_seq) seq.push_back({k, s});
  h["s_seq"] = seq;
  h["dimH_est"] = rep.hausdorff.dimH_est;
  h["window_lo_k"] = rep.hausdorff.window_lo_k;
  h["trend_slope"] = rep.hausdorff.trend_slope;
  h["root_exceeds_dim"] = rep.hausdorff.root_exceeds_dim;
  j["hausdorff"] = h;
  if (rep.box) {
    json b;
    b["lower"] = rep.box->lower;
    b["upper"] = rep.box->upper;
    b["complete"] = rep.box->complete;
    json samples = json::array();
    for (const auto& s : rep.box->samples) {
      json e;
      e["neg_log_b"] = s.neg_log_b;
      e["log_count"] = s.log_count;
      e["ratio"] = s.ratio;
      e["closed_form"] = s.closed_form;
      e["dedup_verified"] = s.dedup_verified;
      samples.push_back(e);
    }
    b["samples"] = samples;
    j["box"] = b;
  }
  if (rep.measure) {
    json m;
    m["s"] = rep.measure->s;
    m["class"] = measure_class_name(rep.measure->verdict);
    m["slope_n"] = rep.measure->slope_n;
    m["slope_log_n"] = rep.measure->slope_log_n;
    m["final_log_value"] = rep.measure->final_value;
    json w = json::array();
    for (const auto& [n, v] : rep.measure->witness) w.push_back({n, v});
    m["witness_log_products"] = w;
    j["measure"] = m;
  }
  json d;
  d["r0_positive_observed"] = rep.diagnostics.r0_positive_observed;
  d["r0_observed"] = rep.diagnostics.r0_observed;
  d["r0_suspected_zero"] = rep.diagnostics.r0_suspected_zero;
  d["equal_ratio_per_layer"] = rep.diagnostics.equal_ratio_per_layer;
  d["contra_ra_last"] = rep.diagnostics.contra_ra_last;
  d["contra_ra_observed"] = rep.diagnostics.contra_ra_observed;
  d["checked_depth"] = rep.diagnostics.checked_depth;
  j["diagnostics"] = d;
  return j;
}

// ---------------------------------------------------------------------------
// Reproduction targets: canonical pipelines compared against the fixtures
// file. Comparison ops: approx (|obs-want| <= tol), min (obs >= want),
// max (obs <= want), equals (string match).

json run_repro_target(const std::string& id) {
  json obs;
  auto family = [&](const std::string& name,
                    std::initializer_list<std::pair<const char*, double>> nums =
                        {},
                    std::initializer_list<std::pair<const char*, const char*>>
                        strs = {}) {
    FamilyParams p;
    for (auto& [k, v] : nums) p.nums[k] = v;
    for (auto& [k, v] : strs) p.strs[k] = v;
    return make_family(name, p);
  };

  if (id == "cantor") {
    auto sys = family("constant", {{"r", 1.0 / 3.0}, {"N", 2}});
    obs["s_100"] = solve_sk(sys, 100);
    BoxDimEstimate box =
        box_dim_formula(sys, natural_log_b_grid(sys, 64), 1 << 22);
    obs["box_lower"] = box.lower;
    obs["box_upper"] = box.upper;
    obs["measure_class"] =
        measure_class_name(measure_class(sys, solve_sk(sys, 100)).verdict);
  } else if (id == "ex51") {
    auto sys = family("ex51");
    std::vector<double> grid;
    for (int n = 1; n <= 12; ++n) grid.push_back(-n * kLn2);
    GammaSamples g2 = gamma2_mwhp(sys, grid, 1 << 22);
    GammaSamples g3 = gamma3_mbdp(sys, 12);
    double min_step2 = HUGE_VAL, min_step3 = HUGE_VAL;
    for (std::size_t i = 1; i < g2.value.size(); ++i)
      min_step2 = std::min(min_step2, g2.value[i] / g2.value[i - 1]);
    for (std::size_t i = 1; i < g3.value.size(); ++i)
      min_step3 = std::min(min_step3, g3.value[i] / g3.value[i - 1]);
    obs["gamma2_min_step"] = min_step2;
    obs["gamma3_min_step"] = min_step3;
    obs["gamma3_at_12"] = g3.value.back();
  } else if (id.rfind("ex53-rho", 0) == 0) {
    double rho = id == "ex53-rho1" ? 1.0 : (id == "ex53-rho05" ? 0.5 : 0.25);
    FamilyParams p;
    p.nums["rho"] = rho;
    p.strs["form"] = "psi";
    auto sys = make_family("ex53", p);
    DimHEstimate h = hausdorff_dim(sys, 100000);
    obs["dimH_est"] = h.dimH_est;
  } else if (id == "ex53-overlap") {
    FamilyParams p;
    p.nums["rho"] = 0.5;
    p.strs["form"] = "phi";
    auto sys = make_family("ex53", p);
    MoscResult mosc = check_mosc(sys, BoxSequence::family_default(), 40);
    obs["mosc_verdict"] = verdict_name(mosc.verdict);
    obs["mosc_inf_measure"] = mosc.inf_measure;
    obs["mosc_bounded_away"] = mosc.measure_bounded_away;
    const double s = 0.5;  // ln2/(ln2 - ln rho) at rho = 1/2
    double min_ratio = HUGE_VAL;
    for (int n = 1; n <= 12; ++n) {
      double theta = 1.0 / (2.0 * n * s + 1.0);
      GammaSamples ni =
          near_identity_gap(sys, {-2.0 * n * kLn2}, 1u << 26, theta);
      double need = static_cast<double>(n) * (1.0 - s) / 2.0;
      min_ratio = std::min(
          min_ratio, static_cast<double>(ni.pair_count[0]) / need);
    }
    obs["near_id_min_count_ratio"] = min_ratio;
  } else if (id == "ex54") {
    auto sys = family("ex54");
    MoscResult mosc = check_mosc(sys, BoxSequence::family_default(), 32);
    obs["mosc_verdict"] = verdict_name(mosc.verdict);
    obs["mosc_bounded_away"] = mosc.measure_bounded_away;
    obs["s_20"] = solve_sk(sys, 20);  // unit per-layer s-sums: root = d = 2
  } else if (id.rfind("ex55-", 0) == 0) {
    const char* rule = id == "ex55-zero"
                           ? "divergent"
                           : (id == "ex55-infinite" ? "vanishing"
                                                    : "convergent");
    auto sys = family("ex55", {}, {{"a_rule", rule}});
    DimHEstimate h = hausdorff_dim(sys, 200000);
    obs["dimH_est"] = h.dimH_est;
    obs["measure_class"] = measure_class_name(
        measure_class(sys, kLn2 / std::log(3.0)).verdict);
  } else if (id == "ex56") {
    auto sys = family("ex56");
    std::vector<double> grid;
    double lf = 0.0;
    for (int n = 2; n <= 4; ++n) {
      lf += std::log(static_cast<double>(n - 1));
      grid.push_back(-(n * kLn2 + lf));
    }
    GammaSamples g2 = gamma2_mwhp(sys, grid, 1 << 24);
    double min_ratio = HUGE_VAL;
    for (std::size_t i = 0; i < g2.value.size(); ++i)
      min_ratio =
          std::min(min_ratio, g2.value[i] / static_cast<double>(i + 2));
    obs["gamma2_min_over_n"] = min_ratio;
  } else if (id == "ex57") {
    auto sys = family("ex57");
    BoxDimEstimate box =
        box_dim_formula(sys, natural_log_b_grid(sys, 1 << 14), 1u << 22);
    obs["box_lower"] = box.lower;
    obs["box_upper"] = box.upper;
    // window [kmax/2, kmax] must contain a thirds-block end 2^(2k+1)-1
    DimHEstimate h = hausdorff_dim(sys, 1 << 15);
    obs["dimH_est"] = h.dimH_est;
  } else if (id == "ex58-full") {
    auto sys = family("ex58", {}, {{"digits", "full"}});
    std::vector<double> grid;
    for (int n = 1; n <= 3; ++n) {
      grid.push_back(-(std::pow(2.0, n) - 1.0) * kLn2);
      grid.push_back(-(std::pow(2.0, n + 1) - 2.0) * kLn2);
    }
    std::sort(grid.begin(), grid.end(), std::greater<double>());
    BoxDimEstimate box = box_dim_formula(sys, grid, 1 << 20);
    double sup = 0.0;
    for (const auto& s : box.samples) sup = std::max(sup, s.ratio);
    obs["formula_sup_ratio"] = sup;

    PointCloud pc = cover(sys, std::pow(2.0, -14),
                          sys.ambient().center(1), 1 << 20);
    std::vector<double> deltas;
    for (int k = 1; k <= 7; ++k) deltas.push_back(std::pow(2.0, -k));
    obs["empirical_slope"] = box_count_empirical(pc, deltas).slope;

    GammaSamples g4 = gamma4_neighbors(
        sys,
        {-2.0 * kLn2, -6.0 * kLn2, -14.0 * kLn2},
        1 << 20, true);
    double mx = 0.0;
    for (double v : g4.value) mx = std::max(mx, v);
    obs["gamma4_max"] = mx;
  } else if (id == "ex58-endpoints") {
    auto sys = family("ex58", {}, {{"digits", "endpoints"}});
    DimHEstimate h = hausdorff_dim(sys, 40);
    obs["dimH_est"] = h.dimH_est;
  } else if (id == "ex59") {
    // b_n inside [2^-n, 2^-(n-1)) puts the whole coarse-prefix fan
    // 0^{n-1} j into one cutset; padding X inflates its neighbor counts.
    FamilyParams p;
    p.nums["pad"] = 0.5;
    auto sys = make_family("ex59", p);
    std::vector<double> grid;
    for (int n = 3; n <= 12; ++n)
      grid.push_back(std::log(1.9) - n * kLn2);
    GammaSamples g4 = gamma4_neighbors(sys, grid, 1 << 22, false);
    obs["gamma4_growth"] = g4.value.back() / g4.value.front();
    auto tight = make_family("ex59", {});
    GammaSamples t4 = gamma4_neighbors(tight, grid, 1 << 22, false);
    obs["gamma4_tight_max"] =
        *std::max_element(t4.value.begin(), t4.value.end());
  } else {
    throw Error("unknown repro target: " + id);
  }
  return obs;
}

const std::vector<std::string> kReproTargets = {
    "cantor",        "ex51",          "ex53-rho1",    "ex53-rho05",
    "ex53-rho025",   "ex53-overlap",  "ex54",         "ex55-zero",
    "ex55-infinite", "ex55-finite",   "ex56",         "ex57",
    "ex58-full",     "ex58-endpoints", "ex59"};

int compare_with_fixture(const std::string& id, const json& observed,
                         const json& fixtures, json* report) {
  if (!fixtures.contains(id)) {
    std::fprintf(stderr, "error: no fixture entry for %s\n", id.c_str());
    return 1;
  }
  const json& expect = fixtures[id]["expect"];
  int failures = 0;
  json checks = json::array();
  for (auto it = expect.begin(); it != expect.end(); ++it) {
    const std::string& key = it.key();
    const json& rule = it.value();
    json check;
    check["key"] = key;
    if (!observed.contains(key)) {
      check["status"] = "missing";
      ++failures;
      checks.push_back(check);
      continue;
    }
    std::string op = rule.value("op", "approx");
    bool ok = false;
    if (op == "equals") {
      ok = observed[key] == rule["value"];
    } else {
      double obs = observed[key].get<double>();
      double want = rule["value"].get<double>();
      if (op == "approx")
        ok = std::abs(obs - want) <= rule.value("tol", 0.0);
      else if (op == "min")
        ok = obs >= want;
      else if (op == "max")
        ok = obs <= want;
    }
    check["status"] = ok ? "pass" : "fail";
    check["observed"] = observed[key];
    check["expect"] = rule;
    if (!ok) ++failures;
    checks.push_back(check);
  }
  (*report)["id"] = id;
  (*report)["observed"] = observed;
  (*report)["checks"] = checks;
  (*report)["ok"] = failures == 0;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "layered (Moran-type) contraction systems: attractors, invariant "
      "measures, dimension estimates, separation diagnostics"};
  app.require_subcommand(1);

  unsigned threads = 0;
  app.add_option("--threads", threads, "worker cap (0 = hardware)");
  std::string simd = "auto";
  app.add_option("--simd", simd, "kernel backend: auto|scalar|avx2");

  SystemArgs sys_args;

  // info
  auto* cmd_info = app.add_subcommand("info", "system summary + checks");
  add_system_flags(cmd_info, &sys_args);
  std::string info_json;
  cmd_info->add_option("--json", info_json, "write report here (- = stdout)");

  // cutset
  auto* cmd_cutset = app.add_subcommand("cutset", "scale cutset of words");
  add_system_flags(cmd_cutset, &sys_args);
  double cutset_b = 0.1;
  std::uint64_t cutset_limit = 1 << 22;
  bool cutset_words = false;
  std::string cutset_out;
  cmd_cutset->add_option("--b", cutset_b, "scale in (0,1)")->required();
  cmd_cutset->add_option("--limit", cutset_limit, "word budget");
  cmd_cutset->add_flag("--words", cutset_words, "include the word list");
  cmd_cutset->add_option("--out", cutset_out, "output path (- = stdout)");

  // cover
  auto* cmd_cover = app.add_subcommand("cover", "deterministic point cover");
  add_system_flags(cmd_cover, &sys_args);
  double cover_b = 0.01;
  std::string cover_anchor, cover_out, cover_format = "csv";
  std::uint64_t cover_limit = 1 << 22;
  cmd_cover->add_option("--b", cover_b, "scale in (0,1)")->required();
  cmd_cover->add_option("--anchor", cover_anchor, "anchor point x[,y[,z]]");
  cmd_cover->add_option("--out", cover_out, "output path")->required();
  cmd_cover->add_option("--format", cover_format, "csv|bin");
  cmd_cover->add_option("--limit", cover_limit, "word budget");

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "invariant-measure samples");
  add_system_flags(cmd_sample, &sys_args);
  std::uint64_t sample_count = 10000, sample_seed = 1;
  double sample_eps = 1e-6;
  std::string sample_anchor, sample_out, sample_format = "csv";
  cmd_sample->add_option("--count", sample_count, "number of points")
      ->required();
  cmd_sample->add_option("--eps", sample_eps, "depth scale in (0,1)");
  cmd_sample->add_option("--seed", sample_seed, "stream seed");
  cmd_sample->add_option("--anchor", sample_anchor, "anchor point");
  cmd_sample->add_option("--out", sample_out, "output path")->required();
  cmd_sample->add_option("--format", sample_format, "csv|bin");

  // render
  auto* cmd_render = app.add_subcommand("render", "rasterize a cloud");
  std::string render_in, render_out;
  io::RenderOptions ropt;
  cmd_render->add_option("--in", render_in, "cloud CSV")->required();
  cmd_render->add_option("--out", render_out, "output .ppm or .svg")
      ->required();
  cmd_render->add_option("--width", ropt.width, "pixels");
  cmd_render->add_option("--height", ropt.height, "pixels");
  cmd_render->add_option("--gamma", ropt.gamma, "intensity gamma");

  // dim
  auto* cmd_dim = app.add_subcommand("dim", "dimension report");
  add_system_flags(cmd_dim, &sys_args);
  std::uint64_t dim_kmax = 4096;
  std::string dim_bgrid, dim_json = "-";
  double dim_s = HUGE_VAL;
  std::uint64_t dim_limit = 1 << 22;
  cmd_dim->add_option("--kmax", dim_kmax, "depth for the root sequence");
  cmd_dim->add_option("--bgrid", dim_bgrid,
                      "auto | auto:DEPTH | b1,b2,... | log:l1,l2,...");
  cmd_dim->add_option("--s", dim_s, "exponent for the measure classifier");
  cmd_dim->add_option("--limit", dim_limit, "cutset word budget");
  cmd_dim->add_option("--json", dim_json, "report path (- = stdout)");

  // check-sep
  auto* cmd_sep = app.add_subcommand("check-sep", "separation diagnostics");
  add_system_flags(cmd_sep, &sys_args);
  std::string sep_cond, sep_vfile, sep_bgrid, sep_json = "-";
  std::uint64_t sep_depth = 16, sep_limit = 1 << 22;
  double sep_theta = -1.0;
  cmd_sep
      ->add_option("--cond", sep_cond,
                   "mosc|mwsc|mssc|mwhp|mbdp|gamma4|gamma4p|near-id")
      ->required();
  cmd_sep->add_option("--V", sep_vfile, "box-sequence declaration file");
  cmd_sep->add_option("--bgrid", sep_bgrid, "grid (as for dim)");
  cmd_sep->add_option("--depth", sep_depth, "layer depth for mosc/mssc/mbdp");
  cmd_sep->add_option("--theta", sep_theta, "near-identity threshold");
  cmd_sep->add_option("--limit", sep_limit, "cutset word budget");
  cmd_sep->add_option("--json", sep_json, "report path (- = stdout)");
  double sep_eps = 1e-3;
  cmd_sep->add_option("--eps", sep_eps, "refinement scale for mssc");

  // repro
  auto* cmd_repro = app.add_subcommand("repro", "replay a canned target");
  std::string repro_id, repro_fixtures, repro_json;
  bool repro_list = false;
  cmd_repro->add_option("id", repro_id, "target id (see --list)");
  cmd_repro->add_flag("--list", repro_list, "list targets");
  cmd_repro->add_option("--fixtures", repro_fixtures, "fixtures JSON path");
  cmd_repro->add_option("--json", repro_json, "write the comparison report");

  CLI11_PARSE(app, argc, argv);

  try {
    set_thread_cap(threads);
    if (simd == "scalar") kernels::set_backend(kernels::Backend::Scalar);
    else if (simd == "avx2") kernels::set_backend(kernels::Backend::Avx2);
    else if (simd != "auto") throw Error("--simd must be auto|scalar|avx2");

    if (cmd_info->parsed()) {
      io::Declaration d = resolve_system(sys_args);
      emit_json(io::system_info_json(d.system, d.system.check_ambient()),
                info_json.empty() ? "-" : info_json);
      return 0;
    }

    if (cmd_cutset->parsed()) {
      io::Declaration d = resolve_system(sys_args);
      Cutset cs = cutset(d.system, cutset_b, cutset_limit);
      json j;
      j["schema_version"] = io::kSchemaVersion;
      j["b"] = cs.b;
      j["count_words"] = cs.words.size();
      j["count_maps"] = cs.maps.size();
      std::size_t mn = SIZE_MAX, mx = 0;
      for (const Word& w : cs.words) {
        mn = std::min(mn, w.length());
        mx = std::max(mx, w.length());
      }
      j["min_len"] = cs.words.empty() ? 0 : mn;
      j["max_len"] = mx;
      if (cutset_words) {
        json words = json::array();
        for (const Word& w : cs.words) {
          json e;
          e["digits"] = w.digits;
          e["logR"] = w.logR;
          e["logr"] = w.logr;
          words.push_back(e);
        }
        j["words"] = words;
      }
      emit_json(j, cutset_out.empty() ? "-" : cutset_out);
      return 0;
    }

    if (cmd_cover->parsed()) {
      io::Declaration d = resolve_system(sys_args);
      PointCloud pc = cover(d.system, cover_b,
                            resolve_anchor(d.system, cover_anchor),
                            cover_limit);
      if (cover_format == "bin")
        io::write_binary(pc, cover_out);
      else
        io::write_csv(pc, cover_out);
      std::fprintf(stderr, "wrote %zu points to %s\n", pc.size(),
                   cover_out.c_str());
      return 0;
    }

    if (cmd_sample->parsed()) {
      io::Declaration d = resolve_system(sys_args);
      PointCloud pc = sample_measure(d.system, d.weights, sample_count,
                                     sample_eps, sample_seed,
                                     resolve_anchor(d.system, sample_anchor));
      if (sample_format == "bin")
        io::write_binary(pc, sample_out);
      else
        io::write_csv(pc, sample_out);
      std::fprintf(stderr, "wrote %zu points to %s\n", pc.size(),
                   sample_out.c_str());
      return 0;
    }

    if (cmd_render->parsed()) {
      PointCloud pc = io::read_csv(render_in);
      if (render_out.size() >= 4 &&
          render_out.substr(render_out.size() - 4) == ".svg")
        io::render_svg(pc, render_out, ropt);
      else
        io::render_ppm(pc, render_out, ropt);
      return 0;
    }

    if (cmd_dim->parsed()) {
      io::Declaration d = resolve_system(sys_args);
      DimensionReport rep;
      rep.hausdorff = hausdorff_dim(d.system, dim_kmax);
      if (!dim_bgrid.empty()) {
        rep.box = box_dim_formula(
            d.system, resolve_bgrid(d.system, dim_bgrid, 256), dim_limit);
      }
      if (std::isfinite(dim_s)) rep.measure = measure_class(d.system, dim_s);
      rep.diagnostics = dimension_diagnostics(d.system);
      emit_json(dim_report_json(d.system, rep), dim_json);
      return 0;
    }

    if (cmd_sep->parsed()) {
      io::Declaration d = resolve_system(sys_args);
      BoxSequence V = sep_vfile.empty()
                          ? BoxSequence::family_default()
                          : io::load_box_sequence_file(sep_vfile);
      json j;
      j["schema_version"] = io::kSchemaVersion;
      j["system"] = d.system.describe();
      j["cond"] = sep_cond;
      if (sep_cond == "mosc") {
        MoscResult r = check_mosc(d.system, V, sep_depth);
        j["verdict"] = verdict_name(r.verdict);
        j["inf_measure"] = r.inf_measure;
        j["measure_bounded_away"] = r.measure_bounded_away;
        j["measures"] = r.measures;
        if (r.witness) {
          j["witness"] = {{"layer", r.witness->layer},
                          {"map_i", r.witness->map_i},
                          {"map_j", r.witness->map_j},
                          {"note", r.witness->note}};
        }
      } else if (sep_cond == "mssc") {
        MsscResult r = check_mssc(d.system, sep_depth, sep_eps, sep_limit);
        j["verdict"] = verdict_name(r.verdict);
        if (r.witness) {
          j["witness"] = {{"layer", r.witness->layer},
                          {"word_i", r.witness->word_i},
                          {"word_j", r.witness->word_j},
                          {"note", r.witness->note}};
        }
      } else if (sep_cond == "mwhp") {
        j["gamma2"] = gamma_json(gamma2_mwhp(
            d.system, resolve_bgrid(d.system, sep_bgrid, 16), sep_limit));
      } else if (sep_cond == "mbdp") {
        j["gamma3"] = gamma_json(gamma3_mbdp(d.system, sep_depth));
      } else if (sep_cond == "gamma4" || sep_cond == "gamma4p") {
        j["gamma4"] = gamma_json(gamma4_neighbors(
            d.system, resolve_bgrid(d.system, sep_bgrid, 16), sep_limit,
            sep_cond == "gamma4"));
      } else if (sep_cond == "mwsc") {
        MwscResult r = check_mwsc(d.system, V,
                                  resolve_bgrid(d.system, sep_bgrid, 16),
                                  sep_limit);
        j["verdict"] = verdict_name(r.verdict);
        j["gamma1"] = gamma_json(r.gamma1);
        j["inf_measure"] = r.inf_measure;
      } else if (sep_cond == "near-id") {
        double theta = sep_theta > 0.0
                           ? sep_theta
                           : default_near_identity_theta(d.system);
        j["theta"] = theta;
        j["near_id"] = gamma_json(near_identity_gap(
            d.system, resolve_bgrid(d.system, sep_bgrid, 16), sep_limit,
            theta));
      } else {
        throw Error("unknown condition: " + sep_cond);
      }
      emit_json(j, sep_json);
      return 0;
    }

    if (cmd_repro->parsed()) {
      if (repro_list) {
        for (const auto& t : kReproTargets) std::printf("%s\n", t.c_str());
        return 0;
      }
      if (repro_id.empty()) throw Error("repro needs a target id or --list");
      std::string fx_path = repro_fixtures.empty()
                                ? std::string(MORANIFS_SOURCE_DIR) +
                                      "/data/repro_fixtures.json"
                                : repro_fixtures;
      std::ifstream in(fx_path);
      if (!in) throw Error("cannot open fixtures: " + fx_path);
      json fixtures;
      in >> fixtures;
      json observed = run_repro_target(repro_id);
      json report;
      int rc = compare_with_fixture(repro_id, observed, fixtures, &report);
      emit_json(report, repro_json.empty() ? "-" : repro_json);
      return rc;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (!e.pointer.empty())
      std::fprintf(stderr, "pointer: %s\n", e.pointer.c_str());
    return 2;
  } catch (const LimitExceeded& e) {
    std::fprintf(stderr, "error: %s (count reached: %llu)\n", e.what(),
                 static_cast<unsigned long long>(e.count_reached));
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
