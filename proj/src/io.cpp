#include "mkdv/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mkdv {

using nlohmann::json;

double parse_number_token(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    if (s.find('/', slash + 1) != std::string::npos)
      throw config_error("cannot parse number '" + s + "'");
    const double num = parse_number_token(s.substr(0, slash));
    const double den = parse_number_token(s.substr(slash + 1));
    if (den == 0.0)
      throw config_error("zero denominator in rational '" + s + "'");
    return num / den;
  }
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw config_error("cannot parse number '" + s + "'");
  return v;
}

namespace {

double num_field(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return parse_number_token(v.get<std::string>());
    } catch (const config_error& e) {
      throw config_error(path + ": " + e.what());
    }
  }
  throw config_error(path + ": expected a number or numeric string");
}

std::vector<double> list_field(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw config_error(path + ": expected a nonempty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(num_field(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Mat mat_field(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw config_error(path + ": expected a nonempty array of rows");
  if (!v[0].is_array())
    throw config_error(path + ": expected nested arrays (rows of numbers)");
  const std::size_t rows = v.size(), cols = v[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& r = v[i];
    if (!r.is_array() || r.size() != cols)
      throw config_error(path + ": row " + std::to_string(i) +
                         " has inconsistent length");
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = num_field(r[j], path + "[" + std::to_string(i) + "][" +
                                    std::to_string(j) + "]");
  }
  return m;
}

// B may be nested (p x 1) or a flat list; either way it becomes a column.
Mat col_field(const json& v, const std::string& path) {
  if (v.is_array() && !v.empty() && !v[0].is_array())
    return Mat::col_vec(list_field(v, path));
  return mat_field(v, path);
}

Mat row_field(const json& v, const std::string& path) {
  if (v.is_array() && !v.empty() && !v[0].is_array())
    return Mat::row_vec(list_field(v, path));
  return mat_field(v, path);
}

const json& need(const json& obj, const std::string& key,
                 const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw config_error(path + "." + key + ": missing");
  return obj.at(key);
}

Triplet triplet_from_config(const json& j) {
  if (j.contains("triplet")) {
    const json& t = j.at("triplet");
    Mat a = mat_field(need(t, "A", "triplet"), "triplet.A");
    Mat b = col_field(need(t, "B", "triplet"), "triplet.B");
    Mat c = row_field(need(t, "C", "triplet"), "triplet.C");
    try {
      return Triplet(std::move(a), std::move(b), std::move(c));
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("triplet: ") + e.what());
    }
  }
  if (j.contains("blocks")) {
    const json& bl = j.at("blocks");
    if (!bl.is_array() || bl.empty())
      throw config_error("blocks: expected a nonempty array");
    std::vector<BlockSpec> blocks;
    for (std::size_t i = 0; i < bl.size(); ++i) {
      const std::string path = "blocks[" + std::to_string(i) + "]";
      const json& b = bl[i];
      const json& ty = need(b, "type", path);
      if (!ty.is_string())
        throw config_error(path + ".type: expected \"real\" or \"complex\"");
      const std::string type = ty.get<std::string>();
      if (type == "real") {
        RealBlock rb;
        rb.omega = num_field(need(b, "omega", path), path + ".omega");
        rb.c = list_field(need(b, "c", path), path + ".c");
        blocks.emplace_back(std::move(rb));
      } else if (type == "complex") {
        ComplexBlock cb;
        cb.alpha = num_field(need(b, "alpha", path), path + ".alpha");
        cb.beta = num_field(need(b, "beta", path), path + ".beta");
        cb.gamma = list_field(need(b, "gamma", path), path + ".gamma");
        cb.epsilon = list_field(need(b, "epsilon", path), path + ".epsilon");
        blocks.emplace_back(std::move(cb));
      } else {
        throw config_error(path + ".type: unknown type '" + type + "'");
      }
    }
    try {
      return assemble_canonical(blocks);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("blocks: ") + e.what());
    }
  }
  throw config_error("config: need a 'triplet' (raw A,B,C) or 'blocks' entry");
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw config_error("config: top level must be a JSON object");

  Triplet trip = triplet_from_config(j);

  std::optional<GridSpec> grid;
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    GridSpec gs;
    gs.x_min = num_field(need(g, "x_min", "grid"), "grid.x_min");
    gs.x_max = num_field(need(g, "x_max", "grid"), "grid.x_max");
    const json& xc = need(g, "x_count", "grid");
    if (!xc.is_number_integer() && !xc.is_number_unsigned())
      throw config_error("grid.x_count: expected a positive integer");
    const long long n = xc.get<long long>();
    if (n < 1) throw config_error("grid.x_count: expected a positive integer");
    gs.x_count = std::size_t(n);
    const json& tv = need(g, "t_values", "grid");
    if (!tv.is_array()) throw config_error("grid.t_values: expected an array");
    for (std::size_t i = 0; i < tv.size(); ++i)
      gs.t_values.push_back(
          num_field(tv[i], "grid.t_values[" + std::to_string(i) + "]"));
    if (!(gs.x_min <= gs.x_max) ||
        (gs.x_count > 1 && !(gs.x_min < gs.x_max)))
      throw config_error("grid: needs x_min < x_max");
    grid = std::move(gs);
  }

  std::map<std::string, double> tols;
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object())
      throw config_error("tolerances: expected an object of name -> number");
    for (const auto& [key, val] : t.items())
      tols[key] = num_field(val, "tolerances." + key);
  }

  return RunConfig{std::move(trip), std::move(grid), std::move(tols)};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string grid_to_csv(const std::vector<GridRow>& rows) {
  std::string out = "x,t,u,v,u_minus_v,pde_residual,status\n";
  for (const auto& r : rows) {
    out += format_double(r.x);
    out += ',';
    out += format_double(r.t);
    out += ',';
    out += format_double(r.u);
    out += ',';
    out += format_double(r.v);
    out += ',';
    out += format_double(r.u_minus_v);
    out += ',';
    out += format_double(r.pde_residual);
    out += ',';
    out += r.ok ? "ok" : "overflow";
    out += '\n';
  }
  return out;
}

std::string grid_to_json(const std::vector<GridRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json o;
    o["x"] = r.x;
    o["t"] = r.t;
    o["u"] = r.u;
    o["v"] = r.v;
    o["u_minus_v"] = r.u_minus_v;
    o["pde_residual"] = r.pde_residual;
    o["status"] = r.ok ? "ok" : "overflow";
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string triplet_to_json(const Triplet& t) {
  // Hand-formatted so each matrix row stays on one line; the result is a
  // ready-to-use config document.
  const auto mat_lines = [](const Mat& m, const std::string& indent) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out += i == 0 ? "[" : (",\n" + indent + " [");
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j) out += ", ";
        out += format_double(m(i, j));
      }
      out += "]";
    }
    return out + "]";
  };
  std::string out = "{\n  \"triplet\": {\n";
  out += "    \"A\": " + mat_lines(t.A, "         ") + ",\n";
  out += "    \"B\": " + mat_lines(t.B, "         ") + ",\n";
  out += "    \"C\": " + mat_lines(t.C, "         ") + "\n";
  out += "  }\n}\n";
  return out;
}

std::string validation_to_json(const ValidationReport& r) {
  json j;
  j["observability_rank"] = r.observability_rank;
  j["controllability_rank"] = r.controllability_rank;
  j["minimal"] = r.minimal;
  j["positive_stable"] = r.positive_stable;
  j["sylvester_solvable"] = r.sylvester_solvable;
  j["admissible"] = r.all_ok();
  j["messages"] = r.messages;
  return j.dump(2) + "\n";
}

std::string validation_to_text(const ValidationReport& r) {
  std::ostringstream os;
  os << "observability_rank: " << r.observability_rank << "\n"
     << "controllability_rank: " << r.controllability_rank << "\n"
     << "minimal: " << (r.minimal ? "true" : "false") << "\n"
     << "positive_stable: " << (r.positive_stable ? "true" : "false") << "\n"
     << "sylvester_solvable: " << (r.sylvester_solvable ? "true" : "false")
     << "\n"
     << "admissible: " << (r.all_ok() ? "true" : "false") << "\n";
  for (const auto& m : r.messages) os << "note: " << m << "\n";
  return os.str();
}

namespace {

void print_mat(std::ostringstream& os, const char* name, const Mat& m) {
  os << name << " =\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << " ";
    for (std::size_t j = 0; j < m.cols(); ++j)
      os << " " << format_double(m(i, j));
    os << "\n";
  }
}

struct StructureResiduals {
  double sylvester_p, lyapunov_q, lyapunov_n;
};

StructureResiduals residuals_of(const Triplet& t, const MarchenkoSolutions& s) {
  const Mat at = transpose(t.A);
  return {norm_inf(t.A * s.P + s.P * t.A - t.B * t.C),
          norm_inf(at * s.Q + s.Q * t.A - transpose(t.C) * t.C),
          norm_inf(t.A * s.N + s.N * at - t.B * transpose(t.B))};
}

}  // namespace

std::string solutions_to_json(const Triplet& t, const MarchenkoSolutions& s) {
  const auto res = residuals_of(t, s);
  json j;
  j["P"] = mat_to_json(s.P);
  j["Q"] = mat_to_json(s.Q);
  j["N"] = mat_to_json(s.N);
  j["residuals"]["sylvester_P"] = res.sylvester_p;
  j["residuals"]["lyapunov_Q"] = res.lyapunov_q;
  j["residuals"]["lyapunov_N"] = res.lyapunov_n;
  return j.dump(2) + "\n";
}

std::string solutions_to_text(const Triplet& t, const MarchenkoSolutions& s) {
  const auto res = residuals_of(t, s);
  std::ostringstream os;
  print_mat(os, "P", s.P);
  print_mat(os, "Q", s.Q);
  print_mat(os, "N", s.N);
  os << "residual inf-norm A P + P A - B C: " << format_double(res.sylvester_p)
     << "\n"
     << "residual inf-norm A^T Q + Q A - C^T C: "
     << format_double(res.lyapunov_q) << "\n"
     << "residual inf-norm A N + N A^T - B B^T: "
     << format_double(res.lyapunov_n) << "\n";
  return os.str();
}

std::string invariants_to_json(const InvariantReport& r) {
  json arr = json::array();
  for (const auto& c : r.records) {
    json o;
    o["name"] = c.name;
    o["max_residual"] = c.max_residual;
    o["tolerance"] = c.tolerance;  // infinite tolerances dump as null
    o["pass"] = c.pass;
    o["location"] = c.location;
    arr.push_back(std::move(o));
  }
  json j;
  j["pass"] = r.all_pass();
  j["checks"] = std::move(arr);
  return j.dump(2) + "\n";
}

}  // namespace mkdv
