#include "driver/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace morphopt::driver {

namespace pt = boost::property_tree;
using problems::ProblemKind;

RunConfig default_config(ProblemKind kind) {
  RunConfig c;
  c.kind = kind;
  switch (kind) {
    case ProblemKind::Bernoulli:
      c.j_ref = 28.306941614057237;
      break;
    case ProblemKind::Model:
      c.circle = {Point2(0.0, 0.0), 0.4};
      c.spline_width = 1.8 / 4.0;
      c.max_iterations = 20;
      break;
    case ProblemKind::Stokes:
      c.circle = {Point2(0.0, 0.0), 0.5};
      c.outer = c.params.channel;
      c.n_theta = 48;
      c.n_r = 12;
      c.grading = 1.25;
      c.fe_degree = 2;
      c.box = c.params.channel;
      c.spline_width = 0.5;
      c.max_iterations = 600;
      // The penalty curvature limits stable steps to about 1e-3.
      c.steps = {0.0, 1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 0.01, 0.02, 0.05, 0.1};
      break;
    case ProblemKind::Elasticity:
      c.curved = false;
      c.outer = {0.0, 2.0, 0.0, 1.0};
      c.fe_degree = 1;
      c.isoparametric = true;
      c.box = {0.25, 1.9, -0.25, 1.25};
      c.spline_width = 0.15;
      c.max_iterations = 200;
      // Scaled to the compliance: |A| stays well below 1% of the area.
      c.params.mu0 = 20.0;
      break;
  }
  return c;
}

int spline_cells(double extent, double width) {
  if (!(width > 0.0) || !(extent > 0.0)) throw ConfigError("spline width and box extent must be positive");
  return static_cast<int>(std::ceil(extent / width - 1e-9));
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(d)) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return d;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("key '" + key + "': empty list entry");
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

mesh::TagDictionary to_tags(const std::string& key, const std::string& v) {
  mesh::TagDictionary out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("key '" + key + "': expected id:name pairs");
    std::string name = item.substr(colon + 1);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    out[to_int(key, item.substr(0, colon).erase(0, item.find_first_not_of(" \t")))] = name;
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"problem",
       {
           {"kind", [](RunConfig&, const std::string&, const std::string&) {}},
           {"j_ref", [](RunConfig& c, auto& k, auto& v) { c.j_ref = v == "none" ? NAN : to_double(k, v); }},
           {"g", [](RunConfig& c, auto& k, auto& v) { c.params.g = to_double(k, v); }},
           {"target_radius", [](RunConfig& c, auto& k, auto& v) { c.params.target.radius = to_double(k, v); }},
           {"target_x", [](RunConfig& c, auto& k, auto& v) { c.params.target.center.x() = to_double(k, v); }},
           {"target_y", [](RunConfig& c, auto& k, auto& v) { c.params.target.center.y() = to_double(k, v); }},
           {"inflow", [](RunConfig& c, auto& k, auto& v) { c.params.inflow = to_double(k, v); }},
           {"youngs", [](RunConfig& c, auto& k, auto& v) { c.params.youngs = to_double(k, v); }},
           {"poisson", [](RunConfig& c, auto& k, auto& v) { c.params.poisson = to_double(k, v); }},
           {"plane",
            [](RunConfig& c, auto& k, auto& v) {
              if (v != "stress" && v != "strain") throw ConfigError("key '" + k + "': expected stress or strain");
              c.params.plane_stress = v == "stress";
            }},
           {"load_x", [](RunConfig& c, auto& k, auto& v) { c.params.load.x() = to_double(k, v); }},
           {"load_y", [](RunConfig& c, auto& k, auto& v) { c.params.load.y() = to_double(k, v); }},
           {"mu0", [](RunConfig& c, auto& k, auto& v) { c.params.mu0 = to_double(k, v); }},
           {"mu1", [](RunConfig& c, auto& k, auto& v) { c.params.mu1 = to_double(k, v); }},
           {"mu2", [](RunConfig& c, auto& k, auto& v) { c.params.mu2 = to_double(k, v); }},
           {"penalty_area", [](RunConfig& c, auto& k, auto& v) { c.params.penalty_area = to_double(k, v); }},
       }},
      {"mesh",
       {
           {"file", [](RunConfig& c, auto&, auto& v) { c.mesh_file = v; }},
           {"tags", [](RunConfig& c, auto& k, auto& v) { c.mesh_tags = to_tags(k, v); }},
           {"circle_x", [](RunConfig& c, auto& k, auto& v) { c.circle.center.x() = to_double(k, v); }},
           {"circle_y", [](RunConfig& c, auto& k, auto& v) { c.circle.center.y() = to_double(k, v); }},
           {"circle_r", [](RunConfig& c, auto& k, auto& v) { c.circle.radius = to_double(k, v); }},
           {"curved", [](RunConfig& c, auto& k, auto& v) { c.curved = to_bool(k, v); }},
           {"xmin", [](RunConfig& c, auto& k, auto& v) { c.outer.xmin = to_double(k, v); }},
           {"xmax", [](RunConfig& c, auto& k, auto& v) { c.outer.xmax = to_double(k, v); }},
           {"ymin", [](RunConfig& c, auto& k, auto& v) { c.outer.ymin = to_double(k, v); }},
           {"ymax", [](RunConfig& c, auto& k, auto& v) { c.outer.ymax = to_double(k, v); }},
           {"n_theta", [](RunConfig& c, auto& k, auto& v) { c.n_theta = to_int(k, v); }},
           {"n_r", [](RunConfig& c, auto& k, auto& v) { c.n_r = to_int(k, v); }},
           {"grading", [](RunConfig& c, auto& k, auto& v) { c.grading = to_double(k, v); }},
           {"nx", [](RunConfig& c, auto& k, auto& v) { c.nx = to_int(k, v); }},
           {"ny", [](RunConfig& c, auto& k, auto& v) { c.ny = to_int(k, v); }},
           {"clamp_length", [](RunConfig& c, auto& k, auto& v) { c.clamp_length = to_double(k, v); }},
           {"load_length", [](RunConfig& c, auto& k, auto& v) { c.load_length = to_double(k, v); }},
           {"refinements", [](RunConfig& c, auto& k, auto& v) { c.refinements = to_int(k, v); }},
       }},
      {"fem",
       {
           {"degree", [](RunConfig& c, auto& k, auto& v) { c.fe_degree = to_int(k, v); }},
           {"isoparametric", [](RunConfig& c, auto& k, auto& v) { c.isoparametric = to_bool(k, v); }},
       }},
      {"spline",
       {
           {"degree", [](RunConfig& c, auto& k, auto& v) { c.spline_degree = to_int(k, v); }},
           {"width", [](RunConfig& c, auto& k, auto& v) { c.spline_width = to_double(k, v); }},
           {"level", [](RunConfig& c, auto& k, auto& v) { c.spline_width = 1.8 * std::ldexp(1.0, -to_int(k, v)); }},
           {"xmin", [](RunConfig& c, auto& k, auto& v) { c.box.xmin = to_double(k, v); }},
           {"xmax", [](RunConfig& c, auto& k, auto& v) { c.box.xmax = to_double(k, v); }},
           {"ymin", [](RunConfig& c, auto& k, auto& v) { c.box.ymin = to_double(k, v); }},
           {"ymax", [](RunConfig& c, auto& k, auto& v) { c.box.ymax = to_double(k, v); }},
       }},
      {"optimizer",
       {
           {"max_iterations", [](RunConfig& c, auto& k, auto& v) { c.max_iterations = to_int(k, v); }},
           {"steps", [](RunConfig& c, auto& k, auto& v) { c.steps = to_list(k, v); }},
           {"det_threshold", [](RunConfig& c, auto& k, auto& v) { c.det_threshold = to_double(k, v); }},
           {"grad_tol", [](RunConfig& c, auto& k, auto& v) { c.grad_tol = to_double(k, v); }},
           {"threads", [](RunConfig& c, auto& k, auto& v) { c.threads = to_int(k, v); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, auto&, auto& v) { c.out_dir = v; }},
           {"vtk", [](RunConfig& c, auto& k, auto& v) { c.write_vtk = to_bool(k, v); }},
       }},
  };
  return s;
}

void validate(const RunConfig& c) {
  if (c.fe_degree != 1 && c.fe_degree != 2) throw ConfigError("fem.degree must be 1 or 2");
  if (c.spline_degree < 1 || c.spline_degree > 3) throw ConfigError("spline.degree must be 1, 2 or 3");
  if (c.max_iterations < 0) throw ConfigError("optimizer.max_iterations must be >= 0");
  if (c.refinements < 0) throw ConfigError("mesh.refinements must be >= 0");
  if (!(c.det_threshold > 0.0)) throw ConfigError("optimizer.det_threshold must be positive");
  for (double s : c.steps) {
    if (s < 0.0 || s > 1.0) throw ConfigError("optimizer.steps must lie in [0, 1]");
  }
  if (!(c.box.width() > 0.0 && c.box.height() > 0.0)) throw ConfigError("spline box is empty");
  if (!(c.spline_width > 0.0)) throw ConfigError("spline.width must be positive");
  if (c.kind == ProblemKind::Stokes && c.fe_degree != 2) throw ConfigError("stokes requires fem.degree = 2");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  const auto& sch = schema();
  std::string kind_name;
  if (auto p = tree.get_child_optional("problem"); p && p->count("kind")) kind_name = p->get<std::string>("kind");
  if (kind_name.empty()) throw ConfigError("missing required key problem.kind");
  RunConfig c = default_config(problems::parse_kind(kind_name));

  for (const auto& [section, body] : tree) {
    auto sit = sch.find(section);
    if (sit == sch.end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      auto kit = sit->second.find(key);
      if (kit == sit->second.end()) throw ConfigError("unknown key '" + section + "." + key + "'");
      kit->second(c, section + "." + key, node.get_value<std::string>());
    }
  }
  for (const auto& [section, keys] : sch) {
    for (const auto& [key, setter] : keys) {
      if (section == "spline" && key == "level") continue;
      const auto child = tree.get_child_optional(section);
      if (!child || !child->count(key)) c.notices.push_back(section + "." + key + " not set; using the default");
    }
  }
  validate(c);
  return c;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

}  // namespace morphopt::driver
