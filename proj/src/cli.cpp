#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "latgamma/cli.hpp"
#include "latgamma/coarsegrain.hpp"
#include "latgamma/energy.hpp"
#include "latgamma/parallel.hpp"

namespace latgamma {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(what + ": '" + s + "' is not a real number");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(what + ": '" + s + "' is not an integer");
  }
}

}  // namespace

std::map<std::string, std::string> RunConfig::load_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, std::string> out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      out[section] = body.data();
      continue;
    }
    for (const auto& [key, value] : body) out[section + "." + key] = value.data();
  }
  return out;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::real(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_real(it->second, key);
}

std::optional<double> RunConfig::maybe_real(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  return parse_real(it->second, key);
}

std::int64_t RunConfig::integer(const std::string& key, std::int64_t fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_int(it->second, key);
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  const auto it = values.find(key);
  if (it == values.end()) return out;
  for (const auto& part : split(it->second, ',')) out.push_back(parse_real(part, key));
  return out;
}

Kernel kernel_from_descriptor(const std::string& desc, int d) {
  const auto parts = split(desc, ':');
  try {
    if (parts.empty()) throw ConfigError("empty kernel descriptor");
    if (parts[0] == "ball") {
      if (parts.size() > 2) throw ConfigError("kernel 'ball' takes one parameter");
      return Kernel::ball(d, parts.size() == 2 ? parse_real(parts[1], "kernel radius") : 1.0);
    }
    if (parts[0] == "exp") {
      if (parts.size() != 3) throw ConfigError("kernel 'exp' needs rate and cutoff");
      return Kernel::exponential(d, parse_real(parts[1], "kernel rate"), parse_real(parts[2], "kernel cutoff"));
    }
    if (parts[0] == "table") {
      if (parts.size() < 2) throw ConfigError("kernel 'table' needs a path");
      return Kernel::load_table(d, desc.substr(desc.find(':') + 1));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  throw ConfigError("unknown kernel '" + desc + "' (expected ball:r, exp:rate:cutoff or table:path)");
}

Kernel kernel_from_config(const RunConfig& c, int d) {
  if (c.has("kernel.spec")) return kernel_from_descriptor(c.text("kernel.spec", ""), d);
  const std::string kind = c.text("kernel.kind", "ball");
  if (kind == "ball") return kernel_from_descriptor("ball:" + c.text("kernel.radius", "1"), d);
  if (kind == "exp") {
    return kernel_from_descriptor("exp:" + c.text("kernel.rate", "1") + ":" + c.text("kernel.cutoff", "1"), d);
  }
  if (kind == "table") {
    if (!c.has("kernel.table")) throw ConfigError("kernel.table path is required for tabulated kernels");
    return kernel_from_descriptor("table:" + c.text("kernel.table", ""), d);
  }
  throw ConfigError("unknown kernel.kind '" + kind + "'");
}

Schedule schedule_from_config(const RunConfig& c) {
  try {
    const auto eps_cli = c.maybe_real("cli.eps");
    const auto eta_cli = c.maybe_real("cli.eta");
    if (eps_cli && eta_cli) return Schedule::explicit_steps({{*eps_cli, *eta_cli}});
    const std::string rule = c.text("schedule.rule", "sqrt-halving");
    if (rule == "sqrt-halving") {
      const double eps0 = eps_cli ? *eps_cli : c.real("schedule.eps0", 1.0 / 256.0);
      return Schedule::sqrt_halving(eps0, static_cast<int>(c.integer("schedule.steps", 5)));
    }
    if (rule == "sqrt-ratios") {
      auto ratios = c.reals("schedule.ratios");
      if (ratios.empty()) ratios = {16, 24, 32, 48, 64};
      return Schedule::sqrt_ratios(ratios);
    }
    if (rule == "explicit") {
      const auto eps = c.reals("schedule.eps");
      const auto eta = c.reals("schedule.eta");
      if (eps.size() != eta.size() || eps.empty()) {
        throw ConfigError("schedule.eps and schedule.eta must be equally long non-empty lists");
      }
      std::vector<ScheduleStep> steps;
      for (std::size_t i = 0; i < eps.size(); ++i) steps.push_back({eps[i], eta[i]});
      return Schedule::explicit_steps(std::move(steps));
    }
    throw ConfigError("unknown schedule.rule '" + rule + "'");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

namespace {

Point point_from(const RunConfig& c, const std::string& key, int d, const Point& fallback) {
  if (!c.has(key)) return fallback;
  const auto v = c.reals(key);
  if (static_cast<int>(v.size()) != d) {
    throw ConfigError(key + " needs " + std::to_string(d) + " components");
  }
  Point p{};
  for (int i = 0; i < d; ++i) p[i] = v[static_cast<std::size_t>(i)];
  return p;
}

Point unit_axis(int k) {
  Point p{};
  p[static_cast<std::size_t>(k)] = 1.0;
  return p;
}

int dimension_of(const RunConfig& c) {
  const auto d = c.integer("lattice.d", 2);
  if (d < 1 || d > 3) throw ConfigError("lattice.d must be 1, 2 or 3");
  return static_cast<int>(d);
}

}  // namespace

TargetSet target_from_config(const RunConfig& c, int d) {
  const std::string kind = c.text("target.kind", "halfspace");
  try {
    TargetSet set = TargetSet::whole(d);
    if (kind == "halfspace") {
      set = TargetSet::half_space(d, normalized(point_from(c, "target.nu", d, unit_axis(0)), d),
                                  c.real("target.offset", 0.0));
    } else if (kind == "box") {
      Point lo{};
      Point hi{};
      for (int i = 0; i < d; ++i) hi[i] = 1.0;
      set = TargetSet::box(d, point_from(c, "target.lo", d, lo), point_from(c, "target.hi", d, hi));
    } else if (kind == "ball") {
      set = TargetSet::ball(d, point_from(c, "target.center", d, Point{}), c.real("target.radius", 0.25));
    } else if (kind == "perforated") {
      set = TargetSet::perforated(d, static_cast<int>(c.integer("target.N", 2)));
    } else if (kind == "whole") {
      set = TargetSet::whole(d);
    } else if (kind == "empty") {
      set = TargetSet::whole(d).complement();
    } else {
      throw ConfigError("unknown target.kind '" + kind + "'");
    }
    return c.flag("target.complement", false) ? set.complement() : set;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }
}

PeriodicLattice lattice_from_config(const RunConfig& c, int d) {
  if (!c.has("lattice.offsets")) return PeriodicLattice::cubic(d);
  std::vector<Point> offsets;
  for (const auto& part : split(c.text("lattice.offsets", ""), ';')) {
    const auto comps = split(part, ',');
    if (static_cast<int>(comps.size()) != d) throw ConfigError("lattice.offsets entries need d components");
    Point p{};
    for (int i = 0; i < d; ++i) p[i] = parse_real(comps[static_cast<std::size_t>(i)], "lattice.offsets");
    offsets.push_back(p);
  }
  try {
    return PeriodicLattice(d, std::move(offsets));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  }
}

namespace {

nlohmann::json error_line(const std::string& kind, const std::string& message) {
  return {{"error", kind}, {"message", message}};
}

SpinField generate_field(const RunConfig& c) {
  const int d = dimension_of(c);
  const PeriodicLattice lattice = lattice_from_config(c, d);
  const double eps = c.has("cli.eps") ? c.real("cli.eps", 0.0) : c.real("field.eps", 1.0 / 64.0);
  Site extent{1, 1, 1};
  Site origin{0, 0, 0};
  const auto ext = c.reals("field.extent");
  const auto org = c.reals("field.origin");
  for (int i = 0; i < d; ++i) {
    extent[i] = ext.empty() ? 64 : static_cast<std::int64_t>(ext.size() == 1 ? ext[0] : ext.at(static_cast<std::size_t>(i)));
    origin[i] = org.empty() ? -extent[i] / 2 : static_cast<std::int64_t>(org.size() == 1 ? org[0] : org.at(static_cast<std::size_t>(i)));
  }
  Window w;
  try {
    w = Window::make(d, origin, extent, boundary_from_string(c.text("field.boundary", "restricted")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field: ") + e.what());
  }
  if (c.text("target.kind", "") == "random") {
    const double density = c.real("target.density", 0.5);
    if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("target.density must lie in [0, 1]");
    std::mt19937_64 rng(c.seed);
    std::bernoulli_distribution coin(density);
    std::vector<std::uint8_t> v(static_cast<std::size_t>(w.cell_count()) * lattice.offset_count());
    for (auto& x : v) x = coin(rng) ? 1 : 0;
    return SpinField(lattice, eps, w, std::move(v));
  }
  return SpinField::sample(target_from_config(c, d), lattice, eps, w);
}

SpinField load_or_generate(const RunConfig& c) {
  if (c.has("field.path")) return read_spin(std::filesystem::path(c.text("field.path", "")));
  return generate_field(c);
}

double eta_for(const RunConfig& c) {
  if (const auto v = c.maybe_real("cli.eta")) return *v;
  if (const auto v = c.maybe_real("energy.eta")) return *v;
  throw ConfigError("eta is required (--eta or [energy] eta)");
}

EnergyParams energy_params(const RunConfig& c, const SpinField& f) {
  EnergyParams p(f.eps(), eta_for(c), kernel_from_config(c, f.dimension()));
  const std::string mask = c.text("energy.mask", "full");
  if (mask.rfind("perforation:", 0) == 0) {
    p.mask = CoefficientMask::perforation(static_cast<int>(parse_int(mask.substr(12), "energy.mask")));
  } else if (mask != "full") {
    throw ConfigError("unknown energy.mask '" + mask + "'");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

void emit_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << nlohmann::json{{"warning", w}}.dump() << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  if (!out) throw IoError("failed writing " + path.string());
}

int cmd_energy(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const SpinField f = load_or_generate(c);
  const EnergyParams p = energy_params(c, f);
  emit_warnings(energy_warnings(f, p), err);
  const std::string method = c.text("energy.method", "fft");
  double e = 0.0;
  if (method == "fft") {
    e = energy_fft(f, p);
  } else if (method == "direct") {
    e = energy_direct(f, p);
  } else {
    throw ConfigError("unknown energy.method '" + method + "'");
  }
  out << format_real(e) << '\n';
  return 0;
}

int cmd_coarse(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const SpinField f = load_or_generate(c);
  const EnergyParams p = energy_params(c, f);
  CoarseGrainParams cg;
  try {
    cg = CoarseGrainParams::from(p, c.real("run.delta", 0.5));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto r = classify(f, cg);
  emit_warnings(r.warnings, err);
  const std::string body = to_json(r) + "\n";
  if (c.out_given) {
    write_text(c.out_dir / "coarse_grain.json", body);
  } else {
    out << body;
  }
  return 0;
}

std::vector<Point> sample_directions(int d, std::int64_t n) {
  std::vector<Point> dirs;
  for (std::int64_t j = 0; j < n; ++j) {
    Point p{};
    if (d == 1) {
      p[0] = j % 2 == 0 ? 1.0 : -1.0;
    } else if (d == 2) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      p[0] = std::cos(t);
      p[1] = std::sin(t);
    } else {
      // Golden-angle spiral on the sphere.
      const double z = 1.0 - (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = static_cast<double>(j) * std::numbers::pi * (3.0 - std::sqrt(5.0));
      p[0] = r * std::cos(t);
      p[1] = r * std::sin(t);
      p[2] = z;
    }
    dirs.push_back(normalized(p, d));
  }
  return dirs;
}

int cmd_phi(const RunConfig& c, std::ostream& out, std::ostream&) {
  const int d = dimension_of(c);
  const Kernel k = kernel_from_config(c, d);
  const auto n = c.integer("phi.directions", 16);
  if (n < 1) throw ConfigError("phi.directions must be positive");
  QuadratureSpec q = k.default_quadrature();
  if (c.has("phi.cells")) q.cells = c.integer("phi.cells", q.cells);
  if (q.cells < 1) throw ConfigError("phi.cells must be positive");
  const auto closed = closed_form_phi(k);
  std::ostringstream csv;
  csv << "index";
  for (int i = 0; i < d; ++i) csv << ",nu" << i + 1;
  csv << ",phi,reference,rel_diff\n";
  const auto dirs = sample_directions(d, n);
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const Point& nu = dirs[j];
    const double value = phi(k, nu, q);
    const double ref = closed ? *closed : value;
    csv << j;
    for (int i = 0; i < d; ++i) csv << ',' << format_real(nu[i]);
    csv << ',' << format_real(value) << ',' << format_real(ref) << ',' << format_real((value - ref) / ref) << '\n';
  }
  if (c.out_given) {
    write_text(c.out_dir / "phi.csv", csv.str());
  } else {
    out << csv.str();
  }
  return 0;
}

void finish_report(const RunConfig& c, const std::string& stem, const ConvergenceReport& r, std::ostream& out,
                   std::ostream& err) {
  for (const auto& rec : r.records) emit_warnings(rec.warnings, err);
  write_report(c.out_dir, stem, r);
  out << (c.out_dir / (stem + ".csv")).string() << '\n';
}

int cmd_halfspace(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const int d = dimension_of(c);
  const Kernel k = kernel_from_config(c, d);
  const Schedule s = schedule_from_config(c);
  HalfspaceOptions opt;
  opt.delta = c.real("run.delta", 0.5);
  opt.normal_side_eta = c.real("target.window_eta", 8.0);
  opt.tangential_side = c.real("target.tangential_side", 0.0);
  opt.line_bound = c.flag("energy.line_bound", true);
  opt.method = c.text("energy.method", "fft") == "direct" ? EnergyMethod::Direct : EnergyMethod::Fft;
  Point nu = point_from(c, "target.nu", d, unit_axis(0));
  try {
    nu = normalized(nu, d);
    if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  finish_report(c, "halfspace", halfspace_experiment(k, nu, s, opt), out, err);
  return 0;
}

int cmd_polytope(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const int d = dimension_of(c);
  const Kernel k = kernel_from_config(c, d);
  const Schedule s = schedule_from_config(c);
  RunConfig cc = c;
  if (!cc.has("target.kind")) cc.values["target.kind"] = "box";
  const TargetSet A = target_from_config(cc, d);
  if (!A.is_polytope()) throw ConfigError("polytope command needs a box or half-space target");
  PolytopeOptions opt;
  opt.delta = c.real("run.delta", 0.5);
  opt.margin_eta = c.real("target.margin_eta", 0.0);
  opt.method = c.text("energy.method", "fft") == "direct" ? EnergyMethod::Direct : EnergyMethod::Fft;
  ConvergenceReport r;
  try {
    r = polytope_experiment(k, A, s, opt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  finish_report(c, "polytope", r, out, err);
  return 0;
}

int cmd_counterexample(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const int d = dimension_of(c);
  const Kernel k = kernel_from_config(c, d);
  const Schedule s = schedule_from_config(c);
  CounterexampleOptions opt;
  opt.delta = c.real("run.delta", 0.9);
  const auto n = c.integer("target.N", 2);
  ConvergenceReport r;
  try {
    r = perforation_counterexample(static_cast<int>(n), d, k, s, opt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  finish_report(c, "counterexample", r, out, err);
  return 0;
}

int cmd_field_gen(const RunConfig& c, std::ostream& out, std::ostream&) {
  const SpinField f = generate_field(c);
  const std::filesystem::path path =
      c.has("field.path") ? std::filesystem::path(c.text("field.path", "")) : c.out_dir / "field.spin1";
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  write_spin(path, f);
  out << path.string() << '\n';
  return 0;
}

int cmd_field_info(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (!c.has("field.path")) throw ConfigError("field info needs --field PATH");
  const SpinField f = read_spin(std::filesystem::path(c.text("field.path", "")));
  const Window& w = f.window();
  nlohmann::json j;
  j["dimension"] = f.dimension();
  j["extents"] = std::vector<std::int64_t>(w.extent.begin(), w.extent.begin() + f.dimension());
  j["origin"] = std::vector<std::int64_t>(w.origin.begin(), w.origin.begin() + f.dimension());
  std::vector<std::string> b;
  for (int i = 0; i < f.dimension(); ++i) b.push_back(to_string(w.boundary[i]));
  j["boundary"] = b;
  j["eps"] = f.eps();
  j["offsets"] = f.offset_count();
  j["sites"] = f.site_count();
  j["ones"] = f.ones();
  out << j.dump() << '\n';
  return 0;
}

struct Overrides {
  std::string eps, eta, delta, nu, N, d, kernel, steps, field;
};

void add_overrides(CLI::App* sub, Overrides& o) {
  sub->add_option("--eps", o.eps, "lattice spacing (or first schedule eps)");
  sub->add_option("--eta", o.eta, "interaction range");
  sub->add_option("--delta", o.delta, "coarse-graining threshold in (0,1)");
  sub->add_option("--nu", o.nu, "direction x,y[,z]");
  sub->add_option("--N", o.N, "perforation period");
  sub->add_option("--d", o.d, "dimension");
  sub->add_option("--kernel", o.kernel, "ball:r | exp:rate:cutoff | table:path");
  sub->add_option("--steps", o.steps, "schedule length");
  sub->add_option("--field", o.field, "SPIN1 field path");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Long-range lattice spin energies, coarse-graining and surface-tension experiments", "latgamma"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir;
  std::int64_t threads = -1;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--seed", seed, "seed for random fields");

  Overrides o;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"energy", "evaluate the energy of one field"},
           {"coarse-grain", "classify cubes and print the JSON result"},
           {"phi", "tabulate phi over sampled directions"},
           {"halfspace", "half-space convergence report"},
           {"polytope", "polytope convergence report"},
           {"counterexample", "perforation counterexample report"}}) {
    subs[name] = app.add_subcommand(name, help);
    add_overrides(subs[name], o);
  }
  CLI::App* field = app.add_subcommand("field", "SPIN1 field generation and inspection");
  field->require_subcommand(1);
  CLI::App* gen = field->add_subcommand("gen", "sample a target set into a SPIN1 file");
  CLI::App* info = field->add_subcommand("info", "summarize a SPIN1 file");
  add_overrides(gen, o);
  add_overrides(info, o);

  const auto fail = [&](const std::string& kind, const std::string& msg, int code) {
    err << error_line(kind, msg).dump() << '\n';
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("config", e.what(), 2);
  }

  try {
    RunConfig c;
    if (!config_path.empty()) c.values = RunConfig::load_ini(config_path);
    const std::pair<const char*, std::string*> keyed[] = {
        {"cli.eps", &o.eps},     {"cli.eta", &o.eta},       {"run.delta", &o.delta},
        {"target.nu", &o.nu},    {"target.N", &o.N},        {"lattice.d", &o.d},
        {"kernel.spec", &o.kernel}, {"schedule.steps", &o.steps}, {"field.path", &o.field}};
    for (const auto& [key, value] : keyed) {
      if (!value->empty()) c.values[key] = *value;
    }
    if (!out_dir.empty()) {
      c.out_dir = out_dir;
      c.out_given = true;
    } else if (c.has("run.out")) {
      c.out_dir = c.text("run.out", ".");
      c.out_given = true;
    }
    if (app.count("--seed") > 0) {
      c.seed = seed;
    } else {
      c.seed = static_cast<std::uint64_t>(c.integer("run.seed", 0));
    }
    std::int64_t nthreads = threads;
    if (nthreads < 0 && c.has("run.threads")) nthreads = c.integer("run.threads", 0);
    if (nthreads < 0) {
      if (const char* env = std::getenv("LATGAMMA_THREADS")) nthreads = parse_int(env, "LATGAMMA_THREADS");
    }
    if (nthreads < 0) nthreads = 0;
    set_thread_count(static_cast<std::size_t>(nthreads));
    c.threads = thread_count();

    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      c.command = name;
      if (name == "energy") return cmd_energy(c, out, err);
      if (name == "coarse-grain") return cmd_coarse(c, out, err);
      if (name == "phi") return cmd_phi(c, out, err);
      if (name == "halfspace") return cmd_halfspace(c, out, err);
      if (name == "polytope") return cmd_polytope(c, out, err);
      if (name == "counterexample") return cmd_counterexample(c, out, err);
    }
    if (gen->parsed()) {
      c.command = "field gen";
      return cmd_field_gen(c, out, err);
    }
    if (info->parsed()) {
      c.command = "field info";
      return cmd_field_info(c, out, err);
    }
    return fail("config", "no command given", 2);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const NumericalFailure& e) {
    return fail("numeric", e.what(), 3);
  } catch (const IoError& e) {
    return fail("io", e.what(), 4);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), 4);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace latgamma
