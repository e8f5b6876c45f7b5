#include "ddmiqo/hull.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ddmiqo/errors.hpp"

namespace ddmiqo {

HullFormat parse_hull_format(const std::string& name) {
  if (name == "json") return HullFormat::kJson;
  if (name == "cone-text" || name == "text") return HullFormat::kConeText;
  throw InputError("unsupported hull format '" + name + "' (use json or cone-text)");
}

std::string HullFormulation::variable_name(std::int64_t v) const {
  auto name = [](const char* base, std::int64_t i) { return std::string(base) + "[" + std::to_string(i) + "]"; };
  if (v < arcs) return name("r", v);
  if (v < 2 * arcs) return name("w", v - arcs);
  if (v < 3 * arcs) return name("s", v - 2 * arcs);
  if (v < 3 * arcs + n) return name("x", v - 3 * arcs);
  if (v < 3 * arcs + 2 * n) return name("z", v - 3 * arcs - n);
  return "x0";
}

HullFormulation build_hull(const Diagram& d) {
  HullFormulation h;
  h.n = d.n;
  h.arcs = d.arc_count();
  if (!d.exact_hull()) h.flags.push_back("inexact_hull");

  // Flow balance at every node strictly between root and terminal layers.
  std::vector<std::vector<std::pair<std::int64_t, double>>> node_terms(static_cast<std::size_t>(d.node_count()));
  for (std::int64_t a = 0; a < h.arcs; ++a) {
    const Arc& arc = d.arcs[static_cast<std::size_t>(a)];
    node_terms[static_cast<std::size_t>(arc.head)].emplace_back(h.r(a), 1.0);
  }
  for (std::int64_t a = 0; a < h.arcs; ++a) {
    const Arc& arc = d.arcs[static_cast<std::size_t>(a)];
    node_terms[static_cast<std::size_t>(arc.tail)].emplace_back(h.r(a), -1.0);
  }
  for (int l = 1; l < d.n; ++l) {
    for (std::int32_t v = d.layer_begin[static_cast<std::size_t>(l)]; v < d.layer_begin[static_cast<std::size_t>(l) + 1]; ++v) {
      h.rows.push_back({"flow", v, std::move(node_terms[static_cast<std::size_t>(v)]), '=', 0.0});
    }
  }
  LinearRow source{"source", 0, {}, '=', 1.0};
  LinearRow sink{"sink", 0, {}, '=', 1.0};
  for (std::int64_t a = 0; a < h.arcs; ++a) {
    const Arc& arc = d.arcs[static_cast<std::size_t>(a)];
    if (arc.layer == 0) source.terms.emplace_back(h.r(a), 1.0);
    if (arc.layer == d.n - 1) sink.terms.emplace_back(h.r(a), 1.0);
  }
  h.rows.push_back(std::move(source));
  h.rows.push_back(std::move(sink));

  // x = sum_a u_a w_a and z = sum_{nu_a = 1} e_{layer(a)} r_a.
  std::vector<LinearRow> xrows(static_cast<std::size_t>(d.n));
  std::vector<LinearRow> zrows(static_cast<std::size_t>(d.n));
  for (int i = 0; i < d.n; ++i) {
    xrows[static_cast<std::size_t>(i)] = {"coupling_x", i, {{h.x(i), 1.0}}, '=', 0.0};
    zrows[static_cast<std::size_t>(i)] = {"coupling_z", i, {{h.z(i), 1.0}}, '=', 0.0};
  }
  for (std::int64_t a = 0; a < h.arcs; ++a) {
    const Arc& arc = d.arcs[static_cast<std::size_t>(a)];
    if (arc.nu == 0) continue;
    const auto sup = d.u_support(a);
    const auto val = d.u_values(a);
    for (std::size_t t = 0; t < sup.size(); ++t) xrows[static_cast<std::size_t>(sup[t])].terms.emplace_back(h.w(a), -val[t]);
    zrows[static_cast<std::size_t>(arc.layer)].terms.emplace_back(h.r(a), -1.0);
  }
  for (auto& row : xrows) h.rows.push_back(std::move(row));
  for (auto& row : zrows) h.rows.push_back(std::move(row));

  LinearRow epi{"epigraph", 0, {}, '<', 0.0};
  for (std::int64_t a = 0; a < h.arcs; ++a) {
    epi.terms.emplace_back(h.s(a), 1.0);
    h.cones.push_back({a, h.w(a), h.r(a), h.s(a)});
  }
  epi.terms.emplace_back(h.x0(), -1.0);
  h.rows.push_back(std::move(epi));
  return h;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(const Diagram& d, const HullFormulation& h, std::ostream& out) {
  using nlohmann::json;
  json vars = json::object();
  vars["r"] = {{"offset", h.r(0)}, {"count", h.arcs}};
  vars["w"] = {{"offset", h.w(0)}, {"count", h.arcs}};
  vars["s"] = {{"offset", h.s(0)}, {"count", h.arcs}};
  vars["x"] = {{"offset", h.x(0)}, {"count", h.n}};
  vars["z"] = {{"offset", h.z(0)}, {"count", h.n}};
  vars["x0"] = {{"offset", h.x0()}, {"count", 1}};
  vars["total"] = h.variable_count();
  vars["nonnegative"] = {"r", "s", "x0"};
  auto row_json = [](const LinearRow& row) {
    json terms = json::array();
    for (const auto& [v, c] : row.terms) terms.push_back(json::array({v, c}));
    return json{{"family", row.family}, {"index", row.index}, {"terms", std::move(terms)},
                {"sense", std::string(1, row.sense == '=' ? '=' : '<')}, {"rhs", row.rhs}};
  };
  json flow = json::array();
  json coupling = json::array();
  json epigraph;
  for (const auto& row : h.rows) {
    if (row.family == "flow" || row.family == "source" || row.family == "sink") {
      flow.push_back(row_json(row));
    } else if (row.family == "epigraph") {
      epigraph = row_json(row);
    } else {
      coupling.push_back(row_json(row));
    }
  }
  json cones = json::array();
  for (const auto& c : h.cones) cones.push_back({{"arc", c.arc}, {"w", c.w}, {"r", c.r}, {"s", c.s}});
  json arcs = json::array();
  for (const Arc& a : d.arcs) arcs.push_back({{"tail", a.tail}, {"head", a.head}, {"layer", a.layer}, {"nu", a.nu}});
  json doc = {{"format", "ddmiqo-hull-1"},
              {"cone_encoding", "w_a^2 <= s_a * r_a per arc, sum_a s_a <= x0, 0/0 = 0"},
              {"describes", "closed convex hull"},
              {"n", h.n},
              {"arc_count", h.arcs},
              {"mode", to_string(d.mode)},
              {"vars", std::move(vars)},
              {"arcs", std::move(arcs)},
              {"flow_rows", std::move(flow)},
              {"coupling_rows", std::move(coupling)},
              {"epigraph_row", std::move(epigraph)},
              {"cones", std::move(cones)},
              {"flags", h.flags}};
  out << doc.dump() << '\n';
}

void write_text(const Diagram& d, const HullFormulation& h, std::ostream& out) {
  out << "# ddmiqo hull formulation v1: closed convex hull, mode " << to_string(d.mode) << "\n";
  out << "# cones: w[a]^2 <= s[a] * r[a] per arc; epigraph: sum s[a] - x0 <= 0; 0/0 = 0\n";
  for (const auto& f : h.flags) out << "FLAG " << f << "\n";
  out << "VARS " << h.variable_count() << " r " << h.arcs << " w " << h.arcs << " s " << h.arcs << " x " << h.n
      << " z " << h.n << " x0 1\n";
  for (const auto& row : h.rows) {
    out << "ROW " << row.family << ' ' << row.index << ':';
    for (const auto& [v, c] : row.terms) out << ' ' << g17(c) << ' ' << h.variable_name(v);
    out << (row.sense == '=' ? " = " : " <= ") << g17(row.rhs) << "\n";
  }
  for (const auto& c : h.cones) {
    out << "CONE " << c.arc << ": " << h.variable_name(c.w) << "^2 <= " << h.variable_name(c.s) << " * "
        << h.variable_name(c.r) << "\n";
  }
  out << "BOUND r >= 0\nBOUND s >= 0\nBOUND x0 >= 0\n";
}

}  // namespace

void export_hull(const Diagram& d, HullFormat format, std::ostream& out) {
  const HullFormulation h = build_hull(d);
  if (format == HullFormat::kJson) {
    write_json(d, h, out);
  } else {
    write_text(d, h, out);
  }
}

std::string export_hull(const Diagram& d, HullFormat format) {
  std::ostringstream os;
  export_hull(d, format, os);
  return os.str();
}

std::map<std::string, double> hull_residuals(const HullFormulation& h, std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(h.variable_count())) throw InputError("hull point has the wrong length");
  std::map<std::string, double> res{{"flow", 0.0}, {"coupling_x", 0.0}, {"coupling_z", 0.0},
                                    {"epigraph", 0.0}, {"cone", 0.0}, {"nonnegative", 0.0}};
  for (const auto& row : h.rows) {
    double lhs = 0.0;
    for (const auto& [v, c] : row.terms) lhs += c * p[static_cast<std::size_t>(v)];
    const double viol = row.sense == '=' ? std::abs(lhs - row.rhs) : std::max(0.0, lhs - row.rhs);
    const std::string family = (row.family == "source" || row.family == "sink") ? "flow" : row.family;
    res[family] = std::max(res[family], viol);
  }
  for (const auto& c : h.cones) {
    const double w = p[static_cast<std::size_t>(c.w)];
    const double r = p[static_cast<std::size_t>(c.r)];
    const double s = p[static_cast<std::size_t>(c.s)];
    res["cone"] = std::max(res["cone"], std::max(0.0, w * w - s * r));
    res["nonnegative"] = std::max({res["nonnegative"], -r, -s});
  }
  res["nonnegative"] = std::max(res["nonnegative"], -p[static_cast<std::size_t>(h.x0())]);
  return res;
}

double HullWitness::max_residual() const {
  double m = 0.0;
  for (const auto& [k, v] : residuals) m = std::max(m, v);
  return m;
}

HullWitness evaluate_witness(const HullFormulation& h, std::vector<double> point, const Instance& inst) {
  inst.validate(h.n);
  HullWitness w;
  w.residuals = hull_residuals(h, point);
  double cz = 0.0;
  double dx = 0.0;
  for (int i = 0; i < h.n; ++i) {
    cz += inst.c[static_cast<std::size_t>(i)] * point[static_cast<std::size_t>(h.z(i))];
    dx += inst.d[static_cast<std::size_t>(i)] * point[static_cast<std::size_t>(h.x(i))];
  }
  const double x0 = point[static_cast<std::size_t>(h.x0())];
  w.reduced_objective = cz - 0.5 * x0;
  w.objective = cz + dx + 0.5 * x0;
  w.point = std::move(point);
  return w;
}

HullWitness certify_path_feasible(const Diagram& d, std::span<const std::int64_t> path, const Instance& inst) {
  inst.validate(d.n);
  const HullFormulation h = build_hull(d);
  std::vector<double> p(static_cast<std::size_t>(h.variable_count()), 0.0);
  double length = 0.0;
  for (std::int64_t a : path) {
    const Arc& arc = d.arcs.at(static_cast<std::size_t>(a));
    const double wa = arc.nu != 0 ? -d.u_dot(a, inst.d) : 0.0;
    p[static_cast<std::size_t>(h.r(a))] = 1.0;
    p[static_cast<std::size_t>(h.w(a))] = wa;
    p[static_cast<std::size_t>(h.s(a))] = wa * wa;  // w^2 / r with r = 1
    length += arc.nu != 0 ? inst.c[static_cast<std::size_t>(arc.layer)] - 0.5 * wa * wa : 0.0;
  }
  const Solution sol = recover_solution(d, path, inst, d.q);
  for (int i = 0; i < d.n; ++i) {
    p[static_cast<std::size_t>(h.x(i))] = sol.x[static_cast<std::size_t>(i)];
    p[static_cast<std::size_t>(h.z(i))] = sol.z[static_cast<std::size_t>(i)];
  }
  p[static_cast<std::size_t>(h.x0())] = sol.x0;
  HullWitness w = evaluate_witness(h, std::move(p), inst);
  w.path_length = length;
  return w;
}

}  // namespace ddmiqo
