#include "gwpam/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gwpam {

double r_frak(double t, double rho) {
  if (!(t > std::exp(1.0))) throw std::invalid_argument("r_frak: t must exceed e");
  if (!(rho > 0.0)) throw std::invalid_argument("r_frak: rho must be positive");
  return rho * t / std::log(std::log(t));
}

double u_star_log(double t, double rho, double theta, double chi_tilde) {
  return rho * std::log(theta * r_frak(t, rho)) - rho - chi_tilde;
}

double F_ct(double r, double c, double t, double rho, double theta) {
  const double x = theta * r;
  if (!(x > 1.0)) throw std::invalid_argument("F_ct: theta r must exceed 1");
  return rho * std::log(x) - (r / t) * (std::log(std::log(x)) - c);
}

FMaximizer f_maximizer(double c, double t, double rho, double theta) {
  if (!(t > std::exp(1.0)) || !(rho > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("f_maximizer: need t > e, rho > 0, theta > 0");
  auto g = [&](double r) { return r * std::log(std::log(r)) - c * r + r / std::log(r) - rho * t; };
  // log log r >= c on the whole bracket
  double lo = std::max(std::exp(1.0) * (1.0 + 1e-12), std::exp(std::exp(c)));
  if (g(lo) >= 0.0) throw std::invalid_argument("f_maximizer: t too small for this c (no sign change)");
  double hi = 2.0 * lo;
  int widen = 0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++widen > 2000 || !std::isfinite(hi)) throw std::runtime_error("f_maximizer: no root in bracket");
  }
  FMaximizer out;
  for (; out.bisections < 400 && hi - lo > 1e-14 * hi; ++out.bisections) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  out.r_star = 0.5 * (lo + hi);
  out.F_value = F_ct(out.r_star, c, t, rho, theta);
  out.r_frak = r_frak(t, rho);
  out.ratio = out.r_star / out.r_frak;
  return out;
}

nlohmann::json DegreeProductReport::to_json() const {
  return {{"L", L},
          {"delta_L", delta_L},
          {"log_threshold", log_threshold},
          {"count", count},
          {"passing", passing},
          {"min_log_product", min_log_product},
          {"max_log_product", max_log_product},
          {"frequency", frequency}};
}

DegreeProductReport degree_product_diagnostic(const RootedGraph& g, int L, double delta_L) {
  if (L < 1) throw std::invalid_argument("degree_product_diagnostic: L must be positive");
  if (!g.is_tree()) throw std::invalid_argument("degree_product_diagnostic: tree required");
  if (g.max_depth() <= L) throw std::invalid_argument("degree_product_diagnostic: tree must extend past depth L");
  DegreeProductReport out;
  out.L = L;
  const double logL = std::log(static_cast<double>(L));
  const bool defined = logL > 0.0 && std::log(logL) > 0.0;
  const bool automatic = delta_L <= 0.0;
  if (automatic) delta_L = defined ? 1.0 / std::log(logL) : 0.0;
  out.delta_L = delta_L;
  // threshold 0 for L = 1, and for the automatic delta while it is undefined
  out.log_threshold = logL > 0.0 && (defined || !automatic) ? -delta_L * L * std::log(logL)
                                                            : -std::numeric_limits<double>::infinity();

  // log of the product along the root path, accumulated in BFS order
  std::vector<double> acc(g.size(), 0.0);
  out.min_log_product = std::numeric_limits<double>::infinity();
  out.max_log_product = -std::numeric_limits<double>::infinity();
  for (Vertex v = 1; v < static_cast<Vertex>(g.size()); ++v) {
    if (g.depth(v) > L) break;
    Vertex parent = -1;
    for (Vertex w : g.neighbors(v))
      if (g.depth(w) + 1 == g.depth(v)) parent = w;
    acc[static_cast<std::size_t>(v)] = acc[static_cast<std::size_t>(parent)] - std::log(static_cast<double>(g.degree(v)));
    if (g.depth(v) != L) continue;
    const double lp = acc[static_cast<std::size_t>(v)];
    ++out.count;
    if (lp >= out.log_threshold) ++out.passing;
    out.min_log_product = std::min(out.min_log_product, lp);
    out.max_log_product = std::max(out.max_log_product, lp);
  }
  out.frequency = out.count ? static_cast<double>(out.passing) / static_cast<double>(out.count) : 0.0;
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return nlohmann::json(x).dump();
}

namespace {

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_null()) return "nan";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

}  // namespace

void Table::add(std::vector<nlohmann::json> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("Table::add: row width does not match columns");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

nlohmann::json Table::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[columns[i]] = row[i];
    rows_json.push_back(std::move(obj));
  }
  return {{"columns", columns}, {"rows", std::move(rows_json)}};
}

std::vector<std::string> Table::write(const std::string& dir, const std::string& stem) const {
  std::filesystem::create_directories(dir);
  const std::string csv = (std::filesystem::path(dir) / (stem + ".csv")).string();
  const std::string json = (std::filesystem::path(dir) / (stem + ".json")).string();
  std::ofstream(csv, std::ios::binary) << to_csv();
  std::ofstream(json, std::ios::binary) << to_json().dump(2) << '\n';
  return {csv, json};
}

}  // namespace gwpam
