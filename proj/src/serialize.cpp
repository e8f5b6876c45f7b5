#include "ddmiqo/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "ddmiqo/errors.hpp"

namespace ddmiqo {

namespace {

constexpr char kMagic[4] = {'D', 'D', 'Q', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int b = 0; b < bytes; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffU);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() {
    const std::uint32_t len = u32();
    if (len > (1U << 20)) throw InputError("corrupt diagram: string too long");
    std::string s(len, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(len));
    if (!in_) throw InputError("corrupt diagram: truncated string");
    return s;
  }

 private:
  std::uint64_t le(int bytes) {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), bytes);
    if (!in_) throw InputError("corrupt diagram: unexpected end of data");
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
  }
  std::istream& in_;
};

DiagramMode mode_from(int raw) {
  if (raw < 0 || raw > 2) throw InputError("corrupt diagram: unknown mode " + std::to_string(raw));
  return static_cast<DiagramMode>(raw);
}

DiagramMode mode_from(const std::string& name) {
  for (auto m : {DiagramMode::kExact, DiagramMode::kEpsExact, DiagramMode::kTruncated}) {
    if (to_string(m) == name) return m;
  }
  throw InputError("unknown diagram mode '" + name + "'");
}

// Rebuilds derived fields (arc layers, stats counts, out_begin) and validates ids.
void finish(Diagram& d) {
  const std::int32_t nodes = d.node_count();
  if (static_cast<std::int32_t>(d.node_constraint.size()) != nodes) {
    throw InputError("corrupt diagram: node table size mismatch");
  }
  if (d.layer_size(0) != 1) throw InputError("corrupt diagram: layer 0 must hold exactly the root");
  for (int l = 0; l <= d.n; ++l) {
    d.stats[static_cast<std::size_t>(l)].nodes = d.layer_size(l);
    d.stats[static_cast<std::size_t>(l)].arcs_out = 0;
  }
  std::int32_t prev_tail = -1;
  for (Arc& a : d.arcs) {
    if (a.tail < 0 || a.tail >= nodes || a.head < 0 || a.head >= nodes || a.nu > 1) {
      throw InputError("corrupt diagram: arc endpoint out of range");
    }
    a.layer = d.node_layer(a.tail);
    if (a.layer >= d.n || d.node_layer(a.head) != a.layer + 1 || a.tail < prev_tail) {
      throw InputError("corrupt diagram: arcs must join consecutive layers in tail order");
    }
    prev_tail = a.tail;
    ++d.stats[static_cast<std::size_t>(a.layer)].arcs_out;
  }
  for (std::size_t a = 0; a < d.arcs.size(); ++a) {
    for (std::int32_t idx : d.u_support(static_cast<std::int64_t>(a))) {
      if (idx < 0 || idx > d.arcs[a].layer) throw InputError("corrupt diagram: transition index out of range");
    }
  }
  d.out_begin.assign(static_cast<std::size_t>(nodes) + 1, 0);
  for (const Arc& a : d.arcs) ++d.out_begin[static_cast<std::size_t>(a.tail) + 1];
  for (std::size_t v = 1; v < d.out_begin.size(); ++v) d.out_begin[v] += d.out_begin[v - 1];
}

Diagram read_binary(std::istream& in) {
  Reader r(in);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InputError("not a DDQ1 diagram");
  if (const auto v = r.u32(); v != kVersion) throw InputError("unsupported diagram version " + std::to_string(v));
  Diagram d;
  d.n = r.i32();
  const int k = r.i32();
  d.mode = mode_from(r.u8());
  d.epsilon = r.f64();
  d.truncation = r.i32();
  d.automaton_kind = r.str();
  d.automaton_parameter = r.i32();
  if (d.n <= 0 || d.n > (1 << 24) || k < 0 || k > d.n) {  // from_bands checks the rest
    throw InputError("corrupt diagram: bad dimensions");
  }
  std::vector<std::vector<double>> bands(static_cast<std::size_t>(k) + 1);
  for (int b = 0; b <= k; ++b) {
    bands[static_cast<std::size_t>(b)].resize(static_cast<std::size_t>(d.n - b));
    for (double& v : bands[static_cast<std::size_t>(b)]) v = r.f64();
  }
  d.q = BandedMatrix::from_bands(d.n, k, std::move(bands));
  d.layer_begin.push_back(0);
  for (int l = 0; l <= d.n; ++l) {
    const std::int32_t count = r.i32();
    if (count < 0) throw InputError("corrupt diagram: negative layer size");
    for (std::int32_t v = 0; v < count; ++v) d.node_constraint.push_back(r.i32());
    d.layer_begin.push_back(d.layer_begin.back() + count);
  }
  d.stats.assign(static_cast<std::size_t>(d.n) + 1, LayerStats{});
  for (auto& st : d.stats) {
    st.merges = r.i64();
    st.max_merge_distance = r.f64();
  }
  const std::int64_t arcs = r.i64();
  if (arcs < 0) throw InputError("corrupt diagram: negative arc count");
  d.u_begin.push_back(0);
  for (std::int64_t a = 0; a < arcs; ++a) {
    Arc arc;
    arc.tail = r.i32();
    arc.head = r.i32();
    arc.nu = r.u8();
    const std::int32_t nnz = r.i32();
    if (nnz < 0 || nnz > d.n) throw InputError("corrupt diagram: bad transition size");
    for (std::int32_t t = 0; t < nnz; ++t) {
      d.u_index.push_back(r.i32());
      d.u_value.push_back(r.f64());
    }
    d.u_begin.push_back(static_cast<std::int64_t>(d.u_index.size()));
    d.arcs.push_back(arc);
  }
  finish(d);
  return d;
}

Diagram read_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    Diagram d;
    d.n = j.at("n").get<int>();
    d.mode = mode_from(j.at("mode").get<std::string>());
    d.epsilon = j.at("epsilon").get<double>();
    d.truncation = j.at("truncation").get<int>();
    d.automaton_kind = j.at("automaton").at("kind").get<std::string>();
    d.automaton_parameter = j.at("automaton").at("parameter").get<int>();
    d.q = matrix_from_json(j.at("matrix"));
    if (d.q.size() != d.n) throw InputError("diagram matrix dimension does not match n");
    const auto& layers = j.at("layers");
    if (layers.size() != static_cast<std::size_t>(d.n) + 1) throw InputError("diagram must list n+1 layers");
    d.layer_begin.push_back(0);
    d.stats.assign(static_cast<std::size_t>(d.n) + 1, LayerStats{});
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& cs = layers[l].at("constraint_states");
      for (const auto& v : cs) d.node_constraint.push_back(v.get<std::int32_t>());
      d.layer_begin.push_back(d.layer_begin.back() + static_cast<std::int32_t>(cs.size()));
      d.stats[l].merges = layers[l].at("merges").get<std::int64_t>();
      d.stats[l].max_merge_distance = layers[l].at("max_merge_distance").get<double>();
    }
    d.u_begin.push_back(0);
    for (const auto& a : j.at("arcs")) {
      Arc arc;
      arc.tail = a.at("tail").get<std::int32_t>();
      arc.head = a.at("head").get<std::int32_t>();
      arc.nu = a.at("nu").get<std::uint8_t>();
      const auto& idx = a.at("u_index");
      const auto& val = a.at("u_value");
      if (idx.size() != val.size()) throw InputError("arc u_index and u_value lengths differ");
      for (std::size_t t = 0; t < idx.size(); ++t) {
        d.u_index.push_back(idx[t].get<std::int32_t>());
        d.u_value.push_back(val[t].get<double>());
      }
      d.u_begin.push_back(static_cast<std::int64_t>(d.u_index.size()));
      d.arcs.push_back(arc);
    }
    finish(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed diagram JSON: ") + e.what());
  }
}

}  // namespace

void write_diagram_binary(const Diagram& d, std::ostream& out) {
  Writer w(out);
  out.write(kMagic, 4);
  w.u32(kVersion);
  w.i32(d.n);
  w.i32(d.q.bandwidth());
  w.u8(static_cast<std::uint8_t>(d.mode));
  w.f64(d.epsilon);
  w.i32(d.truncation);
  w.str(d.automaton_kind);
  w.i32(d.automaton_parameter);
  for (const auto& band : d.q.bands()) {
    for (double v : band) w.f64(v);
  }
  for (int l = 0; l <= d.n; ++l) {
    w.i32(d.layer_size(l));
    for (std::int32_t v = d.layer_begin[static_cast<std::size_t>(l)]; v < d.layer_begin[static_cast<std::size_t>(l) + 1]; ++v) {
      w.i32(d.node_constraint[static_cast<std::size_t>(v)]);
    }
  }
  for (const auto& st : d.stats) {
    w.i64(st.merges);
    w.f64(st.max_merge_distance);
  }
  w.i64(d.arc_count());
  for (std::int64_t a = 0; a < d.arc_count(); ++a) {
    const Arc& arc = d.arcs[static_cast<std::size_t>(a)];
    w.i32(arc.tail);
    w.i32(arc.head);
    w.u8(arc.nu);
    const auto s = d.u_support(a);
    const auto v = d.u_values(a);
    w.i32(static_cast<std::int32_t>(s.size()));
    for (std::size_t t = 0; t < s.size(); ++t) {
      w.i32(s[t]);
      w.f64(v[t]);
    }
  }
  if (!out) throw InputError("failed to write diagram");
}

void write_diagram_json(const Diagram& d, std::ostream& out) {
  nlohmann::json j;
  j["format"] = "DDQ1-json";
  j["n"] = d.n;
  j["mode"] = to_string(d.mode);
  j["epsilon"] = d.epsilon;
  j["truncation"] = d.truncation;
  j["automaton"] = {{"kind", d.automaton_kind}, {"parameter", d.automaton_parameter}};
  j["matrix"] = matrix_to_json(d.q);
  auto layers = nlohmann::json::array();
  for (int l = 0; l <= d.n; ++l) {
    std::vector<std::int32_t> cs(d.node_constraint.begin() + d.layer_begin[static_cast<std::size_t>(l)],
                                 d.node_constraint.begin() + d.layer_begin[static_cast<std::size_t>(l) + 1]);
    const auto& st = d.stats[static_cast<std::size_t>(l)];
    layers.push_back({{"constraint_states", cs},
                      {"merges", st.merges},
                      {"max_merge_distance", st.max_merge_distance}});
  }
  j["layers"] = std::move(layers);
  auto arcs = nlohmann::json::array();
  for (std::int64_t a = 0; a < d.arc_count(); ++a) {
    const Arc& arc = d.arcs[static_cast<std::size_t>(a)];
    const auto s = d.u_support(a);
    const auto v = d.u_values(a);
    arcs.push_back({{"tail", arc.tail},
                    {"head", arc.head},
                    {"nu", arc.nu},
                    {"u_index", std::vector<std::int32_t>(s.begin(), s.end())},
                    {"u_value", std::vector<double>(v.begin(), v.end())}});
  }
  j["arcs"] = std::move(arcs);
  out << j.dump() << '\n';
  if (!out) throw InputError("failed to write diagram");
}

Diagram read_diagram(std::istream& in) {
  const int first = in.peek();
  if (first == kMagic[0]) return read_binary(in);
  return read_json(in);
}

void save_diagram(const Diagram& d, const std::string& path, DiagramFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  if (format == DiagramFormat::kBinary) {
    write_diagram_binary(d, out);
  } else {
    write_diagram_json(d, out);
  }
}

Diagram load_diagram(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open diagram file '" + path + "'");
  return read_diagram(in);
}

nlohmann::json matrix_to_json(const BandedMatrix& q) {
  return {{"n", q.size()}, {"k", q.bandwidth()}, {"bands", q.bands()}};
}

BandedMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    return BandedMatrix::from_bands(j.at("n").get<int>(), j.at("k").get<int>(),
                                    j.at("bands").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed matrix JSON: ") + e.what());
  }
}

BandedMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("matrix file '" + path + "' is not valid JSON: " + e.what());
  }
  return matrix_from_json(j);
}

void save_matrix(const BandedMatrix& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << matrix_to_json(q).dump() << '\n';
}

}  // namespace ddmiqo
