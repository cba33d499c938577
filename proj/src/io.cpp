#include "dsinv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dsinv/exact.hpp"
#include "dsinv/textio.hpp"

namespace dsinv {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct KvLine {
  int number = 0;
  std::string section;
  std::string key;
  std::string value;
};

// Shared reader for `key = value` documents with [section] headers and
// # comments. `stop` (e.g. "table:") ends header parsing.
std::vector<KvLine> read_kv(std::istream& in, const std::string& origin,
                            const std::string& stop = {},
                            int* stop_line = nullptr) {
  std::vector<KvLine> out;
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!stop.empty() && t == stop) {
      if (stop_line) *stop_line = number;
      return out;
    }
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(number) +
                               ": expected 'key = value', got '" + t + "'");
    out.push_back(
        {number, section, trim(t.substr(0, eq)), trim(t.substr(eq + 1))});
  }
  if (!stop.empty())
    throw std::runtime_error(origin + ": missing '" + stop + "' block");
  return out;
}

[[noreturn]] void bad_line(const std::string& origin, const KvLine& line,
                           const std::string& what) {
  throw std::runtime_error(origin + ":" + std::to_string(line.number) + ": " +
                           what + " ('" + line.key + "')");
}

}  // namespace

double backorder_from_fill_rate(double holding_cost, double fill_rate) {
  if (!(fill_rate > 0.0) || !(fill_rate < 1.0))
    throw std::invalid_argument("fill rate must lie in (0, 1)");
  return holding_cost * fill_rate / (1.0 - fill_rate);
}

Instance parse_instance(std::istream& in, const std::string& origin) {
  Instance inst;
  bool have_var_c = false, have_var_a = false, have_b = false;
  double fill_rate = -1.0;
  std::map<std::string, bool> seen;
  for (const KvLine& l : read_kv(in, origin)) {
    if (seen[l.section + "." + l.key])
      bad_line(origin, l, "duplicate key");
    seen[l.section + "." + l.key] = true;
    if (l.section == "meta") {
      if (l.key == "name")
        inst.meta.name = l.value;
      else if (l.key == "description")
        inst.meta.description = l.value;
      else if (l.key == "provenance")
        inst.meta.provenance = l.value;
      else
        bad_line(origin, l, "unknown meta key");
      continue;
    }
    if (l.section != "params")
      bad_line(origin, l, "unknown section '" + l.section + "'");
    InstanceParams& p = inst.params;
    try {
      if (l.key == "n")
        p.installed_base = static_cast<int>(parse_long(l.value));
      else if (l.key == "s_max")
        p.max_in_system = static_cast<int>(parse_long(l.value));
      else if (l.key == "mu_c")
        p.mu_cm = parse_double(l.value);
      else if (l.key == "mu_a")
        p.mu_am = parse_double(l.value);
      else if (l.key == "var_c") {
        p.var_cm = parse_double(l.value);
        have_var_c = true;
      } else if (l.key == "var_a") {
        p.var_am = parse_double(l.value);
        have_var_a = true;
      } else if (l.key == "l_c")
        p.lead_cm = static_cast<int>(parse_long(l.value));
      else if (l.key == "l_a")
        p.lead_am = static_cast<int>(parse_long(l.value));
      else if (l.key == "c_c")
        p.price_cm = parse_double(l.value);
      else if (l.key == "c_a")
        p.price_am = parse_double(l.value);
      else if (l.key == "k_c")
        p.order_cost_cm = parse_double(l.value);
      else if (l.key == "k_a")
        p.order_cost_am = parse_double(l.value);
      else if (l.key == "q_c")
        p.batch_cm = static_cast<int>(parse_long(l.value));
      else if (l.key == "m")
        p.maint_cost = parse_double(l.value);
      else if (l.key == "h")
        p.holding_cost = parse_double(l.value);
      else if (l.key == "b") {
        p.backorder_cost = parse_double(l.value);
        have_b = true;
      } else if (l.key == "fill_rate")
        fill_rate = parse_double(l.value);
      else if (l.key == "demand_family")
        p.family = demand_family_from_string(l.value);
      else
        bad_line(origin, l, "unknown parameter key");
    } catch (const std::runtime_error& e) {
      bad_line(origin, l, e.what());
    }
  }
  InstanceParams& p = inst.params;
  if (p.family == DemandFamily::kPoisson) {
    if (!have_var_c) p.var_cm = p.mu_cm;
    if (!have_var_a) p.var_am = p.mu_am;
  } else if (!have_var_c || !have_var_a) {
    throw std::runtime_error(origin +
                             ": var_c/var_a required unless demand_family is "
                             "poisson");
  }
  if (fill_rate >= 0.0) {
    if (have_b)
      throw std::runtime_error(origin + ": give either b or fill_rate");
    p.backorder_cost = backorder_from_fill_rate(p.holding_cost, fill_rate);
  } else if (!have_b) {
    throw std::runtime_error(origin + ": missing backorder cost (b)");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  return inst;
}

void write_instance(std::ostream& out, const Instance& inst) {
  const InstanceParams& p = inst.params;
  out << "# dsinv instance v1\n";
  out << "[meta]\n";
  out << "name = " << inst.meta.name << "\n";
  if (!inst.meta.description.empty())
    out << "description = " << inst.meta.description << "\n";
  if (!inst.meta.provenance.empty())
    out << "provenance = " << inst.meta.provenance << "\n";
  out << "[params]\n";
  out << "n = " << p.installed_base << "\n";
  out << "s_max = " << p.max_in_system << "\n";
  out << "mu_c = " << format_double(p.mu_cm) << "\n";
  out << "mu_a = " << format_double(p.mu_am) << "\n";
  if (p.family != DemandFamily::kPoisson) {
    out << "var_c = " << format_double(p.var_cm) << "\n";
    out << "var_a = " << format_double(p.var_am) << "\n";
  }
  out << "l_c = " << p.lead_cm << "\n";
  out << "l_a = " << p.lead_am << "\n";
  out << "c_c = " << format_double(p.price_cm) << "\n";
  out << "c_a = " << format_double(p.price_am) << "\n";
  out << "k_c = " << format_double(p.order_cost_cm) << "\n";
  out << "k_a = " << format_double(p.order_cost_am) << "\n";
  out << "q_c = " << p.batch_cm << "\n";
  out << "m = " << format_double(p.maint_cost) << "\n";
  out << "h = " << format_double(p.holding_cost) << "\n";
  out << "b = " << format_double(p.backorder_cost) << "\n";
  out << "demand_family = " << to_string(p.family) << "\n";
}

namespace {

InstanceParams synthetic_instance(int idx) {
  // Columns for the ten bundled instances.
  static const double c_c[] = {5000, 5000, 5000, 5000, 1000,
                               1000, 1000, 1000, 2000, 2000};
  static const double k_c[] = {2000, 2000, 2000, 2000, 750,
                               750,  750,  750,  2000, 1000};
  static const double mu_c[] = {0.01,  0.01,  0.01,  0.01,  0.025,
                                0.025, 0.025, 0.025, 0.01,  0.025};
  static const double var_c[] = {0.02, 0.02, 0.02, 0.02, 0.05,
                                 0.05, 0.05, 0.05, 0.02, 0.05};
  static const int l_c[] = {8, 8, 8, 8, 4, 4, 4, 4, 10, 6};
  static const double c_a[] = {10000, 10000, 7500, 7500, 2000,
                               2000,  1500,  1500, 3000, 2400};
  static const double mu_a[] = {0.02, 0.02, 0.015,  0.015,  0.05,
                                0.05, 0.0375, 0.0375, 0.015, 0.125};
  static const double var_a[] = {0.04, 0.04, 0.045,  0.045,  0.1,
                                 0.1,  0.1125, 0.1125, 0.03,  0.375};
  static const int l_a[] = {2, 2, 4, 4, 1, 1, 2, 2, 1, 1};
  static const double m[] = {5000, 1250, 5000, 1250, 1000,
                             250,  1000, 250,  500,  2000};
  static const double h[] = {29, 19, 29, 19, 6, 4, 6, 4, 12, 12};
  static const double b[] = {5725, 1899, 5725, 1899, 1145,
                             380,  1145, 380,  2290, 2290};
  static const int q_c[] = {5, 5, 5, 5, 7, 7, 7, 7, 5, 7};
  static const int s_cap[] = {8, 7, 8, 7, 10, 9, 10, 9, 6, 11};

  InstanceParams p;
  p.installed_base = 7;
  p.max_in_system = s_cap[idx];
  p.mu_cm = mu_c[idx];
  p.mu_am = mu_a[idx];
  p.var_cm = var_c[idx];
  p.var_am = var_a[idx];
  p.lead_cm = l_c[idx];
  p.lead_am = l_a[idx];
  p.price_cm = c_c[idx];
  p.price_am = c_a[idx];
  p.order_cost_cm = k_c[idx];
  p.order_cost_am = 0.0;
  p.batch_cm = q_c[idx];
  p.maint_cost = m[idx];
  p.holding_cost = h[idx];
  p.backorder_cost = b[idx];
  p.family = DemandFamily::kNegativeBinomial;
  return p;
}

std::vector<Instance> build_library() {
  std::vector<Instance> lib;
  for (int i = 0; i < 10; ++i) {
    Instance inst;
    inst.params = synthetic_instance(i);
    char name[32];
    std::snprintf(name, sizeof name, "synthetic-%02d", i + 1);
    inst.meta.name = name;
    inst.meta.description =
        "Stylised slow-mover, installed base of 7, two supply modes";
    inst.meta.provenance = "bundled";
    lib.push_back(std::move(inst));
  }
  // Larger-installed-base variants of the first two instances; the system
  // cap follows the pipeline-tail rule since no published value exists.
  for (int i = 0; i < 2; ++i) {
    Instance inst;
    inst.params = synthetic_instance(i);
    inst.params.installed_base = 20;
    inst.params.max_in_system = determine_S(inst.params, 1e-4);
    char name[32];
    std::snprintf(name, sizeof name, "synthetic-%02d", 11 + i);
    inst.meta.name = name;
    inst.meta.description =
        "Installed base of 20; exact solving is impractical at this size";
    inst.meta.provenance = "bundled";
    lib.push_back(std::move(inst));
  }
  return lib;
}

const std::vector<Instance>& library() {
  static const std::vector<Instance> lib = build_library();
  return lib;
}

}  // namespace

std::vector<std::string> bundled_instance_names() {
  std::vector<std::string> names;
  for (const auto& inst : library()) names.push_back(inst.meta.name);
  names.push_back("energy-template");
  return names;
}

Instance load_instance(const std::string& name_or_path) {
  if (name_or_path == "energy-template")
    throw std::runtime_error(
        "energy-template is a ratio sheet, not a loadable instance: absolute "
        "values are confidential. Provide a base price and expand it with "
        "generate_energy_grid (CLI: energy-grid --base-price ...)");
  for (const auto& inst : library())
    if (inst.meta.name == name_or_path) return inst;
  namespace fs = std::filesystem;
  std::vector<fs::path> candidates{fs::path(name_or_path)};
  if (const char* env = std::getenv(kLibraryPathEnv))
    candidates.push_back(fs::path(env) / name_or_path);
  for (const auto& path : candidates) {
    if (!fs::exists(path)) continue;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_instance(in, path.string());
  }
  throw std::runtime_error("unknown instance '" + name_or_path +
                           "' (not bundled, not a file)");
}

EnergyTemplate energy_template() {
  EnergyTemplate t;
  t.items = {
      {"item-1", 3, 1.00, 1.00, 1.00, 4.06, 0.26, 1.09, 1.00},
      {"item-2", 2, 1.62, 0.98, 1.90, 1.64, 0.31, 0.67, 6.11},
      {"item-3", 6, 15.30, 0.69, 0.31, 0.19, 0.38, 0.07, 63.15},
      {"item-4", 1, 27.69, 1.09, 1.13, 1.00, 0.36, 0.04, 122.64},
      {"item-5", 4, 1.09, 0.79, 0.28, 4.23, 0.33, 1.01, 8.76},
  };
  return t;
}

std::vector<Instance> generate_energy_grid(const EnergyTemplate& tmpl,
                                           const EnergyBase& base,
                                           const EnergyVariations& vars) {
  if (!(base.price_cm > 0.0))
    throw std::invalid_argument(
        "energy grid needs a base cm piece price (> 0) for item 1");
  if (vars.platforms.empty() || vars.price_am_level.empty() ||
      vars.lead_am_level.empty() || vars.fail_am_level.empty() ||
      vars.backorder_level.empty())
    throw std::invalid_argument("every variation needs at least one level");
  const double b_anchor =
      base.backorder > 0.0 ? base.backorder : base.price_cm;
  std::vector<Instance> out;
  for (const EnergyItem& item : tmpl.items) {
    const double price_cm = base.price_cm * item.price_cm_ratio;
    const int lead_cm = std::max(
        1, static_cast<int>(std::llround(base.lead_cm * item.lead_cm_ratio)));
    const double mu_cm = base.mu_cm * item.fail_cm_ratio;
    const int lead_am_orig = std::max(
        1, static_cast<int>(std::llround(lead_cm * item.lead_am_ratio)));
    int counter = 0;
    for (int platforms : vars.platforms)
      for (double ca : vars.price_am_level)
        for (double la : vars.lead_am_level)
          for (double mua : vars.fail_am_level)
            for (double bl : vars.backorder_level) {
              InstanceParams p;
              p.installed_base = platforms * item.parts_per_valve;
              p.max_in_system = tmpl.max_in_system;
              p.mu_cm = mu_cm;
              p.mu_am = mu_cm * mua;
              p.var_cm = p.mu_cm;
              p.var_am = p.mu_am;
              p.lead_cm = lead_cm;
              p.lead_am = std::max(
                  1, static_cast<int>(std::llround(lead_am_orig * la)));
              p.price_cm = price_cm;
              p.price_am = price_cm * item.price_am_ratio * ca;
              p.order_cost_cm = tmpl.order_cost_of_price * price_cm;
              p.order_cost_am = tmpl.order_cost_of_price * price_cm;
              p.batch_cm = 1;
              p.maint_cost = price_cm * item.maint_ratio;
              p.holding_cost = tmpl.holding_of_price_per_year * price_cm /
                               tmpl.periods_per_year;
              p.backorder_cost = b_anchor * item.backorder_ratio * bl;
              p.family = DemandFamily::kPoisson;
              p.validate();
              Instance inst;
              inst.params = p;
              char name[64];
              std::snprintf(name, sizeof name, "%s-v%03d", item.name.c_str(),
                            counter++);
              inst.meta.name = name;
              inst.meta.provenance = "energy-grid";
              out.push_back(std::move(inst));
            }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policy artifacts.

void save_policy(std::ostream& out, const Policy& policy) {
  policy.save(out);
}

namespace {

std::map<std::string, std::string> kv_map(const std::vector<KvLine>& lines) {
  std::map<std::string, std::string> m;
  for (const auto& l : lines) m[l.key] = l.value;
  return m;
}

std::vector<double> parse_vector(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok));
  return out;
}

const std::string& need(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end())
    throw std::runtime_error("policy artifact missing key '" + key + "'");
  return it->second;
}

std::vector<Decision> read_table(std::istream& in, std::size_t n) {
  std::vector<Decision> out;
  out.reserve(n);
  int bc = 0, ia = 0;
  while (out.size() < n && (in >> bc >> ia)) out.push_back({bc, ia});
  if (out.size() != n)
    throw std::runtime_error("policy table truncated");
  return out;
}

FeatureSpec spec_from(const std::map<std::string, std::string>& kv) {
  FeatureSpec spec;
  spec.slots_cm = static_cast<int>(parse_long(need(kv, "slots_cm")));
  spec.slots_am = static_cast<int>(parse_long(need(kv, "slots_am")));
  spec.theta_dim = static_cast<int>(parse_long(need(kv, "theta_dim")));
  if (spec.theta_dim > 0) {
    spec.theta_min = parse_vector(need(kv, "theta_min"));
    spec.theta_max = parse_vector(need(kv, "theta_max"));
    if (static_cast<int>(spec.theta_min.size()) != spec.theta_dim ||
        static_cast<int>(spec.theta_max.size()) != spec.theta_dim)
      throw std::runtime_error("theta bounds size mismatch");
  }
  return spec;
}

}  // namespace

std::shared_ptr<Policy> load_policy(std::istream& in,
                                    const InstanceParams& context) {
  // Tabular types end their header with a "table:" line; the others do not.
  // Read header lines until either marker or EOF.
  std::vector<KvLine> lines;
  std::string line;
  bool has_table = false;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t == "table:") {
      has_table = true;
      break;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("policy artifact line " +
                               std::to_string(number) + ": expected key = value");
    lines.push_back({number, "", trim(t.substr(0, eq)), trim(t.substr(eq + 1))});
  }
  const auto kv = kv_map(lines);
  const std::string type = need(kv, "type");

  if (type == "never-order") return std::make_shared<NeverOrderPolicy>();

  if (type == "tabular" || type == "pooled-tabular") {
    if (!has_table) throw std::runtime_error("missing policy table");
    const auto n = static_cast<std::size_t>(parse_long(need(kv, "states")));
    auto table = read_table(in, n);
    const double g = parse_double(need(kv, "g"));
    const auto kind =
        type == "tabular" ? ModelKind::kFull : ModelKind::kSimplified;
    auto space =
        std::make_shared<StateSpace>(StateSpace::enumerate(context, kind));
    if (space->size() != n)
      throw std::runtime_error(
          "policy table does not match the instance's state space");
    if (type == "tabular")
      return std::make_shared<TabularPolicy>(space, std::move(table), g,
                                             need(kv, "instance"));
    return std::make_shared<PooledTabularPolicy>(space, std::move(table), g,
                                                 need(kv, "instance"));
  }

  if (type == "base-stock") {
    const std::string source = need(kv, "source");
    if (source != "cm" && source != "am")
      throw std::runtime_error("unknown base-stock source: " + source);
    return std::make_shared<BaseStockPolicy>(
        source == "cm" ? Source::kCm : Source::kAm,
        static_cast<int>(parse_long(need(kv, "level"))));
  }

  if (type == "dual-index") {
    DualIndexParams di;
    di.expedite_level = static_cast<int>(parse_long(need(kv, "expedite_level")));
    di.spread = static_cast<int>(parse_long(need(kv, "spread")));
    return std::make_shared<DualIndexPolicy>(di);
  }

  if (type == "vfa-greedy") {
    LinearVfa vfa;
    vfa.spec = spec_from(kv);
    vfa.weights = parse_vector(need(kv, "weights"));
    if (static_cast<int>(vfa.weights.size()) != vfa.spec.dim() + 1)
      throw std::runtime_error("vfa weight count mismatch");
    return std::make_shared<VfaPolicy>(std::move(vfa),
                                       parse_double(need(kv, "discount")));
  }

  if (type == "classifier") {
    FeatureSpec spec = spec_from(kv);
    const auto layer_vals = parse_vector(need(kv, "layers"));
    std::vector<int> dims;
    for (double v : layer_vals) dims.push_back(static_cast<int>(v));
    Mlp net(dims, 0);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const auto w = parse_vector(need(kv, "w" + std::to_string(l)));
      const auto b = parse_vector(need(kv, "b" + std::to_string(l)));
      if (w.size() != net.weights()[l].size() ||
          b.size() != net.biases()[l].size())
        throw std::runtime_error("classifier layer shape mismatch");
      for (std::size_t i = 0; i < w.size(); ++i)
        net.weights()[l][i] = static_cast<float>(w[i]);
      for (std::size_t i = 0; i < b.size(); ++i)
        net.biases()[l][i] = static_cast<float>(b[i]);
    }
    DecisionGrid grid = DecisionGrid::build(
        static_cast<int>(parse_long(need(kv, "grid_budget"))),
        static_cast<int>(parse_long(need(kv, "grid_batch"))));
    return std::make_shared<ClassifierPolicy>(std::move(spec), std::move(net),
                                              std::move(grid));
  }

  throw std::runtime_error("unknown policy type: " + type);
}

std::shared_ptr<Policy> load_policy_file(const std::string& path,
                                         const InstanceParams& context) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file " + path);
  return load_policy(in, context);
}

// ---------------------------------------------------------------------------
// CSV writers.

void write_gaps_csv(std::ostream& out, const std::vector<GapRow>& rows) {
  out << "# dsinv gaps v1\n";
  out << "instance,policy,mean_cost,half_width,gap_pct\n";
  for (const auto& r : rows)
    out << r.instance << "," << r.policy << "," << format_double(r.mean_cost)
        << "," << format_double(r.half_width) << ","
        << format_double(r.gap_pct) << "\n";
}

void write_breakdown_csv(std::ostream& out,
                         const std::vector<BreakdownCsvRow>& rows) {
  out << "# dsinv breakdown v1\n";
  out << "instance,policy,purchase,holding,backorder,maintenance,am_fraction\n";
  for (const auto& r : rows)
    out << r.instance << "," << r.policy << ","
        << format_double(r.data.purchase.mean) << ","
        << format_double(r.data.holding.mean) << ","
        << format_double(r.data.backorder.mean) << ","
        << format_double(r.data.maintenance.mean) << ","
        << format_double(r.data.am_fraction) << "\n";
}

void write_orders_csv(std::ostream& out,
                      const std::vector<BreakdownCsvRow>& rows) {
  out << "# dsinv orders v1\n";
  out << "instance,policy,source,order_size,frequency\n";
  for (const auto& r : rows) {
    for (std::size_t size = 1; size < r.data.order_freq_cm.size(); ++size)
      if (r.data.order_freq_cm[size] > 0.0)
        out << r.instance << "," << r.policy << ",cm," << size << ","
            << format_double(r.data.order_freq_cm[size]) << "\n";
    for (std::size_t size = 1; size < r.data.order_freq_am.size(); ++size)
      if (r.data.order_freq_am[size] > 0.0)
        out << r.instance << "," << r.policy << ",am," << size << ","
            << format_double(r.data.order_freq_am[size]) << "\n";
  }
}

void write_iwa_trace_csv(std::ostream& out,
                         const std::vector<IwaTraceRow>& rows) {
  out << "# dsinv iwa-trace v1\n";
  out << "instance,iteration,gamma,rho,cost\n";
  for (const auto& r : rows)
    out << r.instance << "," << r.iteration << "," << format_double(r.gamma)
        << "," << format_double(r.rho) << "," << format_double(r.cost)
        << "\n";
}

// ---------------------------------------------------------------------------
// Experiment configuration.

void ExperimentConfig::validate() const {
  if (instances.empty())
    throw std::invalid_argument("config names no instances");
  if (replications < 1 || periods <= warmup || warmup < 0)
    throw std::invalid_argument("bad evaluation protocol");
  if (!(epsilon_cap > 0.0) || !(epsilon_cap < 1.0))
    throw std::invalid_argument("epsilon_cap must lie in (0,1)");
  if (avi.samples < 1 || avi.horizon < 1 || avi.epsilon < 0.0 ||
      avi.epsilon > 1.0 || avi.discount <= 0.0 || avi.discount >= 1.0)
    throw std::invalid_argument("bad avi hyperparameters");
  if (rollout.n_iterations < 1 || rollout.n_samples < 1 ||
      rollout.scenarios < 1 || rollout.horizon < 1 || rollout.warmup < 0)
    throw std::invalid_argument("bad rollout hyperparameters");
  if (iwa.threshold <= 0.0 || iwa.threshold >= 1.0 || iwa.max_iterations < 1)
    throw std::invalid_argument("bad iwa hyperparameters");
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg;
  for (const KvLine& l : read_kv(in, origin)) {
    try {
      if (l.section == "experiment" || l.section.empty()) {
        if (l.key == "instances") {
          cfg.instances.clear();
          std::istringstream ss(l.value);
          std::string tok;
          while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) cfg.instances.push_back(tok);
          }
        } else if (l.key == "policy")
          cfg.policy = l.value;
        else if (l.key == "seed")
          cfg.seed = static_cast<std::uint64_t>(parse_long(l.value));
        else if (l.key == "replications")
          cfg.replications = static_cast<int>(parse_long(l.value));
        else if (l.key == "periods")
          cfg.periods = parse_long(l.value);
        else if (l.key == "warmup")
          cfg.warmup = parse_long(l.value);
        else if (l.key == "out")
          cfg.out_dir = l.value;
        else if (l.key == "threads")
          cfg.threads = static_cast<int>(parse_long(l.value));
        else if (l.key == "epsilon_cap")
          cfg.epsilon_cap = parse_double(l.value);
        else
          bad_line(origin, l, "unknown experiment key");
      } else if (l.section == "avi") {
        if (l.key == "samples")
          cfg.avi.samples = static_cast<int>(parse_long(l.value));
        else if (l.key == "horizon")
          cfg.avi.horizon = static_cast<int>(parse_long(l.value));
        else if (l.key == "epsilon")
          cfg.avi.epsilon = parse_double(l.value);
        else if (l.key == "discount")
          cfg.avi.discount = parse_double(l.value);
        else
          bad_line(origin, l, "unknown avi key");
      } else if (l.section == "dcl") {
        if (l.key == "iterations")
          cfg.rollout.n_iterations = static_cast<int>(parse_long(l.value));
        else if (l.key == "samples")
          cfg.rollout.n_samples = static_cast<int>(parse_long(l.value));
        else if (l.key == "scenarios")
          cfg.rollout.scenarios = static_cast<int>(parse_long(l.value));
        else if (l.key == "horizon")
          cfg.rollout.horizon = static_cast<int>(parse_long(l.value));
        else if (l.key == "warmup")
          cfg.rollout.warmup = static_cast<int>(parse_long(l.value));
        else if (l.key == "hidden") {
          cfg.net.hidden.clear();
          for (double v : parse_vector(l.value))
            cfg.net.hidden.push_back(static_cast<int>(v));
        } else if (l.key == "batch")
          cfg.net.adam.batch = static_cast<int>(parse_long(l.value));
        else if (l.key == "epochs")
          cfg.net.adam.epochs = static_cast<int>(parse_long(l.value));
        else if (l.key == "lr")
          cfg.net.adam.lr = parse_double(l.value);
        else
          bad_line(origin, l, "unknown dcl key");
      } else if (l.section == "iwa") {
        if (l.key == "threshold")
          cfg.iwa.threshold = parse_double(l.value);
        else if (l.key == "max_iterations")
          cfg.iwa.max_iterations = static_cast<int>(parse_long(l.value));
        else
          bad_line(origin, l, "unknown iwa key");
      } else {
        bad_line(origin, l, "unknown section");
      }
    } catch (const std::runtime_error& e) {
      bad_line(origin, l, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace dsinv
