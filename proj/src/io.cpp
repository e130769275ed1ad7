#include "moranifs/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace moran::io {

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& msg) {
  throw ValidationError(msg + " (at " + pointer + ")", pointer);
}

double need_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  return j.get<double>();
}

Vec parse_vec(const json& j, int dim, const std::string& ptr) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(ptr, "expected an array of length " + std::to_string(dim));
  Vec v = vec0();
  for (int a = 0; a < dim; ++a)
    v[a] = need_number(j[a], ptr + "/" + std::to_string(a));
  return v;
}

Box parse_box(const json& j, int dim, const std::string& ptr) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
    fail(ptr, "expected an object with lo/hi arrays");
  Box b;
  b.lo = parse_vec(j["lo"], dim, ptr + "/lo");
  b.hi = parse_vec(j["hi"], dim, ptr + "/hi");
  for (int a = 0; a < dim; ++a)
    if (!(b.lo[a] < b.hi[a])) fail(ptr, "box must satisfy lo < hi per axis");
  return b;
}

ContractionMap parse_map(const json& j, int dim, const std::string& ptr) {
  if (!j.is_object()) fail(ptr, "expected a map object");
  std::string kind = j.value("kind", "similarity");
  Vec translation = vec0();
  if (j.contains("translation"))
    translation = parse_vec(j["translation"], dim, ptr + "/translation");
  try {
    if (kind == "similarity") {
      if (!j.contains("ratio")) fail(ptr + "/ratio", "similarity needs ratio");
      double r = need_number(j["ratio"], ptr + "/ratio");
      if (!(r > 0.0 && r < 1.0))
        fail(ptr + "/ratio", "ratio must lie in (0,1)");
      Mat O = mat_identity();
      if (j.contains("angle")) {
        if (dim != 2) fail(ptr + "/angle", "angle sugar needs dimension 2");
        O = mat_rotation2d(need_number(j["angle"], ptr + "/angle"));
      } else if (j.contains("orthogonal")) {
        const json& m = j["orthogonal"];
        if (!m.is_array() || static_cast<int>(m.size()) != dim)
          fail(ptr + "/orthogonal", "expected a d x d matrix");
        for (int r0 = 0; r0 < dim; ++r0) {
          if (!m[r0].is_array() || static_cast<int>(m[r0].size()) != dim)
            fail(ptr + "/orthogonal", "expected a d x d matrix");
          for (int c = 0; c < dim; ++c)
            O[r0 * 3 + c] = need_number(
                m[r0][c], ptr + "/orthogonal/" + std::to_string(r0) + "/" +
                              std::to_string(c));
        }
      }
      return ContractionMap::similarity(dim, r, translation, O);
    }
    if (kind == "diagonal") {
      if (!j.contains("diag")) fail(ptr + "/diag", "diagonal map needs diag");
      Vec d = parse_vec(j["diag"], dim, ptr + "/diag");
      return ContractionMap::diagonal(dim, d, translation);
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    fail(ptr, e.what());
  }
  fail(ptr + "/kind", "kind must be similarity or diagonal");
}

std::vector<Layer> parse_layers(const json& j, int dim,
                                const std::string& ptr) {
  std::vector<Layer> out;
  if (!j.is_array()) fail(ptr, "expected an array of layers");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& lj = j[i];
    std::string lptr = ptr + "/" + std::to_string(i);
    if (!lj.is_array() || lj.size() < 2)
      fail(lptr, "a layer needs at least 2 maps");
    std::vector<ContractionMap> maps;
    for (std::size_t m = 0; m < lj.size(); ++m)
      maps.push_back(parse_map(lj[m], dim, lptr + "/" + std::to_string(m)));
    try {
      out.push_back(make_layer(i + 1, std::move(maps)));
    } catch (const Error& e) {
      fail(lptr, e.what());
    }
  }
  return out;
}

}  // namespace

Declaration parse_system(const json& doc) {
  if (!doc.is_object()) fail("", "declaration must be a JSON object");
  if (!doc.contains("dimension")) fail("/dimension", "missing field");
  if (!doc["dimension"].is_number_integer())
    fail("/dimension", "expected an integer");
  int dim = doc["dimension"].get<int>();
  if (dim < 1 || dim > 3) fail("/dimension", "dimension must be 1, 2 or 3");

  std::string provider = doc.value("provider", "");
  if (provider != "explicit" && provider != "family")
    fail("/provider", "provider must be explicit or family");

  std::optional<Box> ambient;
  if (doc.contains("ambient")) ambient = parse_box(doc["ambient"], dim, "/ambient");

  Declaration out;
  if (provider == "explicit") {
    if (!ambient) fail("/ambient", "explicit provider needs an ambient box");
    std::vector<Layer> prefix;
    if (doc.contains("layers"))
      prefix = parse_layers(doc["layers"], dim, "/layers");
    if (!doc.contains("cycle")) fail("/cycle", "explicit provider needs a cycle");
    std::vector<Layer> cycle = parse_layers(doc["cycle"], dim, "/cycle");
    try {
      out.system =
          make_explicit_periodic(dim, *ambient, std::move(prefix),
                                 std::move(cycle));
    } catch (const Error& e) {
      fail("/cycle", e.what());
    }
  } else {
    if (!doc.contains("family")) fail("/family", "missing field");
    const json& fj = doc["family"];
    if (!fj.is_object() || !fj.contains("name"))
      fail("/family/name", "missing family name");
    std::string name = fj["name"].get<std::string>();
    if (!is_known_family(name)) fail("/family/name", "unknown family " + name);
    FamilyParams params;
    if (fj.contains("params")) {
      const json& pj = fj["params"];
      if (!pj.is_object()) fail("/family/params", "expected an object");
      for (auto it = pj.begin(); it != pj.end(); ++it) {
        std::string pptr = "/family/params/" + it.key();
        if (it.key() == "translations") {
          if (!it.value().is_array()) fail(pptr, "expected an array");
          for (std::size_t i = 0; i < it.value().size(); ++i)
            params.translations.push_back(need_number(
                it.value()[i], pptr + "/" + std::to_string(i)));
        } else if (it.value().is_number()) {
          params.nums[it.key()] = it.value().get<double>();
        } else if (it.value().is_string()) {
          params.strs[it.key()] = it.value().get<std::string>();
        } else {
          fail(pptr, "expected a number or string");
        }
      }
    }
    try {
      out.system = make_family(name, params, ambient);
    } catch (const Error& e) {
      fail("/family/params", e.what());
    }
    int fdim = out.system.dim();
    if (fdim != dim)
      fail("/dimension", "family " + name + " has dimension " +
                             std::to_string(fdim));
  }

  if (doc.contains("weights")) {
    const json& wj = doc["weights"];
    if (!wj.is_object()) fail("/weights", "expected an object");
    std::string kind = wj.value("kind", "uniform");
    if (kind == "uniform") {
      out.weights = WeightSequence::uniform();
    } else if (kind == "ratio_power") {
      if (!wj.contains("s")) fail("/weights/s", "ratio_power needs s");
      out.weights =
          WeightSequence::ratio_power(need_number(wj["s"], "/weights/s"));
    } else if (kind == "explicit") {
      auto rows = [&](const char* key) {
        std::vector<std::vector<double>> rs;
        if (!wj.contains(key)) return rs;
        const json& a = wj[key];
        std::string ptr = std::string("/weights/") + key;
        if (!a.is_array()) fail(ptr, "expected an array");
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (!a[i].is_array())
            fail(ptr + "/" + std::to_string(i), "expected an array");
          std::vector<double> row;
          for (std::size_t k = 0; k < a[i].size(); ++k)
            row.push_back(need_number(
                a[i][k],
                ptr + "/" + std::to_string(i) + "/" + std::to_string(k)));
          rs.push_back(std::move(row));
        }
        return rs;
      };
      auto prefix = rows("layers");
      auto cycle = rows("cycle");
      if (cycle.empty()) fail("/weights/cycle", "explicit weights need a cycle");
      try {
        out.weights = WeightSequence::explicit_periodic(std::move(prefix),
                                                        std::move(cycle));
      } catch (const Error& e) {
        fail("/weights", e.what());
      }
    } else {
      fail("/weights/kind", "kind must be uniform, explicit or ratio_power");
    }
  }
  return out;
}

Declaration load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what(), "");
  }
  return parse_system(doc);
}

BoxSequence parse_box_sequence(const json& doc) {
  if (!doc.is_object()) fail("", "box sequence must be a JSON object");
  std::string kind = doc.value("kind", "family");
  if (!doc.contains("dimension")) fail("/dimension", "missing field");
  int dim = doc["dimension"].get<int>();
  auto boxes_of = [&](const json& a, const std::string& ptr) {
    std::vector<Box> bs;
    if (!a.is_array() || a.empty()) fail(ptr, "expected a nonempty array");
    for (std::size_t i = 0; i < a.size(); ++i)
      bs.push_back(parse_box(a[i], dim, ptr + "/" + std::to_string(i)));
    return bs;
  };
  if (kind == "constant") {
    if (!doc.contains("boxes")) fail("/boxes", "missing field");
    return BoxSequence::constant(boxes_of(doc["boxes"], "/boxes"));
  }
  if (kind == "periodic") {
    std::vector<std::vector<Box>> prefix, cycle;
    if (doc.contains("prefix")) {
      const json& p = doc["prefix"];
      for (std::size_t i = 0; i < p.size(); ++i)
        prefix.push_back(boxes_of(p[i], "/prefix/" + std::to_string(i)));
    }
    if (!doc.contains("cycle")) fail("/cycle", "missing field");
    const json& c = doc["cycle"];
    for (std::size_t i = 0; i < c.size(); ++i)
      cycle.push_back(boxes_of(c[i], "/cycle/" + std::to_string(i)));
    return BoxSequence::explicit_periodic(std::move(prefix), std::move(cycle));
  }
  if (kind == "family") return BoxSequence::family_default();
  fail("/kind", "kind must be constant, periodic or family");
}

BoxSequence load_box_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what(), "");
  }
  return parse_box_sequence(doc);
}

json system_info_json(const LayerSystem& sys, const AmbientCheck& check) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["system"] = sys.describe();
  j["dimension"] = sys.dim();
  json amb;
  amb["lo"] = json::array();
  amb["hi"] = json::array();
  for (int a = 0; a < sys.dim(); ++a) {
    amb["lo"].push_back(sys.ambient().lo[a]);
    amb["hi"].push_back(sys.ambient().hi[a]);
  }
  j["ambient"] = amb;
  json layers = json::array();
  for (std::uint64_t n = 1; n <= 8; ++n) {
    LayerSummary s = sys.layer_summary(n);
    json lj;
    lj["n"] = n;
    lj["maps"] = s.map_count;
    lj["log_c1"] = s.log_c1;
    lj["log_c2"] = s.log_c2;
    lj["similarity"] = s.all_similarity;
    if (s.uniform_log_ratio) lj["uniform_log_ratio"] = *s.uniform_log_ratio;
    layers.push_back(lj);
  }
  j["layers_head"] = layers;
  json chk;
  chk["containment_ok"] = check.containment_ok;
  chk["checked_depth"] = check.checked_depth;
  chk["epsilon_c"] = check.epsilon_c;
  if (!check.containment_ok) {
    chk["failed_layer"] = check.failed_layer;
    chk["failed_map"] = check.failed_map;
  }
  j["ambient_check"] = chk;
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const PointCloud& pc, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (int a = 0; a < pc.dim; ++a) {
      std::fprintf(f, "%s%.17g", a ? "," : "", pc.axes[a][i]);
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void write_binary(const PointCloud& pc, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path + " for writing");
  std::vector<double> rows = pc.to_rows();
  // Little-endian layout is the file contract.
  static_assert(std::endian::native == std::endian::little,
                "binary writer assumes a little-endian host");
  std::fwrite(rows.data(), sizeof(double), rows.size(), f);
  std::fclose(f);
}

PointCloud read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  PointCloud pc;
  pc.dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int a = 0;
    while (std::getline(ls, cell, ',')) {
      if (a >= kMaxDim) throw Error("too many columns in " + path);
      pc.axes[a].push_back(std::stod(cell));
      ++a;
    }
    if (pc.dim == 0) pc.dim = a;
    if (a != pc.dim) throw Error("ragged rows in " + path);
  }
  if (pc.dim == 0) throw Error("empty cloud file " + path);
  return pc;
}

namespace {

struct Raster {
  int w, h;
  std::vector<double> acc;
  double xmin, xmax, ymin, ymax;
};

Raster rasterize(const PointCloud& pc, int w, int h) {
  Raster r{w, h, std::vector<double>(static_cast<std::size_t>(w) * h, 0.0),
           0, 1, 0, 1};
  r.xmin = HUGE_VAL;
  r.xmax = -HUGE_VAL;
  r.ymin = 0.0;
  r.ymax = 1.0;
  for (double v : pc.axes[0]) {
    r.xmin = std::min(r.xmin, v);
    r.xmax = std::max(r.xmax, v);
  }
  if (pc.dim >= 2) {
    r.ymin = HUGE_VAL;
    r.ymax = -HUGE_VAL;
    for (double v : pc.axes[1]) {
      r.ymin = std::min(r.ymin, v);
      r.ymax = std::max(r.ymax, v);
    }
  }
  double xr = r.xmax > r.xmin ? r.xmax - r.xmin : 1.0;
  double yr = r.ymax > r.ymin ? r.ymax - r.ymin : 1.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    double fx = (pc.axes[0][i] - r.xmin) / xr;
    double fy = pc.dim >= 2 ? (pc.axes[1][i] - r.ymin) / yr : 0.5;
    int px = std::min(w - 1, std::max(0, static_cast<int>(fx * w)));
    int py = std::min(h - 1, std::max(0, static_cast<int>((1.0 - fy) * h)));
    if (pc.dim == 1) {
      for (int yy = 0; yy < h; ++yy)
        r.acc[static_cast<std::size_t>(yy) * w + px] += 1.0;
    } else {
      r.acc[static_cast<std::size_t>(py) * w + px] += 1.0;
    }
  }
  return r;
}

}  // namespace

void render_ppm(const PointCloud& pc, const std::string& path,
                const RenderOptions& opt) {
  if (pc.dim > 2) throw Error("render supports 1D and 2D clouds");
  Raster r = rasterize(pc, opt.width, opt.height);
  double mx = 0.0;
  for (double v : r.acc) mx = std::max(mx, v);
  if (mx <= 0.0) mx = 1.0;
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path + " for writing");
  std::fprintf(f, "P6\n%d %d\n255\n", r.w, r.h);
  std::vector<unsigned char> row(static_cast<std::size_t>(r.w) * 3);
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      double v = r.acc[static_cast<std::size_t>(y) * r.w + x] / mx;
      double lum = std::pow(v, 1.0 / opt.gamma);
      unsigned char c = static_cast<unsigned char>(
          std::min(255.0, std::max(0.0, lum * 255.0 + 0.5)));
      row[static_cast<std::size_t>(x) * 3 + 0] = c;
      row[static_cast<std::size_t>(x) * 3 + 1] = c;
      row[static_cast<std::size_t>(x) * 3 + 2] = c;
    }
    std::fwrite(row.data(), 1, row.size(), f);
  }
  std::fclose(f);
}

void render_svg(const PointCloud& pc, const std::string& path,
                const RenderOptions& opt) {
  if (pc.dim > 2) throw Error("render supports 1D and 2D clouds");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path + " for writing");
  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = 0.0, ymax = 1.0;
  for (double v : pc.axes[0]) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  if (pc.dim >= 2) {
    ymin = HUGE_VAL;
    ymax = -HUGE_VAL;
    for (double v : pc.axes[1]) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  double xr = xmax > xmin ? xmax - xmin : 1.0;
  double yr = ymax > ymin ? ymax - ymin : 1.0;
  std::fprintf(f,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
               "width=\"%d\" height=\"%d\">\n<rect width=\"100%%\" "
               "height=\"100%%\" fill=\"white\"/>\n",
               opt.width, opt.height);
  double rad = std::max(0.4, std::min(opt.width, opt.height) /
                                 (4.0 * std::sqrt(static_cast<double>(
                                            std::max<std::size_t>(
                                                1, pc.size())))));
  for (std::size_t i = 0; i < pc.size(); ++i) {
    double fx = (pc.axes[0][i] - xmin) / xr;
    double fy = pc.dim >= 2 ? (pc.axes[1][i] - ymin) / yr : 0.5;
    std::fprintf(f, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\"/>\n",
                 fx * opt.width, (1.0 - fy) * opt.height, rad);
  }
  std::fprintf(f, "</svg>\n");
  std::fclose(f);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
}

}  // namespace moran::io
