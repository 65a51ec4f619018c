#include "crossdiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace crossdiff {

Grid RunConfig::make_grid() const {
  if (dim == 1) return Grid::make_1d(n, length);
  const int ny_eff = ny > 0 ? ny : n;
  const double ly_eff = length_y > 0.0 ? length_y : length;
  return Grid::make_2d(n, ny_eff, length, ly_eff);
}

SchemeConfig RunConfig::make_scheme() const {
  SchemeConfig cfg;
  cfg.final_time = final_time;
  cfg.steps = steps;
  cfg.newton_tol = newton_tol;
  return cfg;
}

namespace {

double parse_double(const std::string& key, const std::string& token) {
  try {
    size_t pos = 0;
    const double value = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for key '" + key + "': " + token);
  }
}

long parse_long(const std::string& key, const std::string& token) {
  try {
    size_t pos = 0;
    const long value = std::stol(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer value for key '" + key + "': " + token);
  }
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, double*> param_keys{
      {"d_u", &cfg.params.d_u},       {"d_v", &cfg.params.d_v},
      {"d_alpha", &cfg.params.d_alpha}, {"d_beta", &cfg.params.d_beta},
      {"d_gamma", &cfg.params.d_gamma}, {"r_u", &cfg.params.r_u},
      {"r_v", &cfg.params.r_v},       {"r_a", &cfg.params.r_a},
      {"r_b", &cfg.params.r_b},       {"r_c", &cfg.params.r_c},
      {"r_d", &cfg.params.r_d},       {"a", &cfg.params.a},
      {"b", &cfg.params.b},           {"c", &cfg.params.c},
      {"d", &cfg.params.d},           {"alpha", &cfg.params.alpha},
      {"beta", &cfg.params.beta},     {"gamma", &cfg.params.gamma},
      {"length", &cfg.length},        {"length_y", &cfg.length_y},
      {"T", &cfg.final_time},         {"newton_tol", &cfg.newton_tol}};

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value;
    if (!(ls >> value)) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' has no value");
    }
    std::string extra;
    if (ls >> extra) {
      throw ConfigError("line " + std::to_string(line_no) + ": trailing token '" +
                        extra + "'");
    }
    if (auto it = param_keys.find(key); it != param_keys.end()) {
      *it->second = parse_double(key, value);
    } else if (key == "dim") {
      cfg.dim = static_cast<int>(parse_long(key, value));
      if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("dim must be 1 or 2");
    } else if (key == "n") {
      cfg.n = static_cast<int>(parse_long(key, value));
    } else if (key == "ny") {
      cfg.ny = static_cast<int>(parse_long(key, value));
    } else if (key == "N") {
      cfg.steps = static_cast<int>(parse_long(key, value));
    } else if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(parse_long(key, value));
    } else if (key == "strict_validation") {
      cfg.params.strict_validation = parse_long(key, value) != 0;
    } else if (key == "u_init") {
      cfg.u_init = value;
    } else if (key == "v_init") {
      cfg.v_init = value;
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (cfg.steps < 1) throw ConfigError("N must be >= 1");
  if (!(cfg.final_time > 0.0)) throw ConfigError("T must be > 0");
  return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config_text(buffer.str());
}

Field make_initial_field(const std::string& spec, const Grid& grid, uint64_t run_seed) {
  const size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  Field f(grid);
  if (kind == "constant") {
    const double value = parse_double("constant preset", args);
    for (double& x : f.values) x = value;
    return f;
  }
  if (kind == "cosine_bump") {
    const double amp = parse_double("cosine_bump preset", args);
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        double mode = std::cos(M_PI * grid.x(i) / grid.lx);
        if (grid.dim == 2) mode *= std::cos(M_PI * grid.y(j) / grid.ly);
        f[grid.index(i, j)] = 1.0 + amp * mode;
      }
    }
    return f;
  }
  if (kind == "random") {
    std::istringstream as(args);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(as, tok, ',')) parts.push_back(tok);
    if (parts.size() != 3) {
      throw ConfigError("random preset needs <seed>,<lo>,<hi>: " + spec);
    }
    const uint64_t preset_seed = static_cast<uint64_t>(parse_long("random seed", parts[0]));
    const double lo = parse_double("random lo", parts[1]);
    const double hi = parse_double("random hi", parts[2]);
    if (!(hi >= lo)) throw ConfigError("random preset needs hi >= lo");
    std::mt19937_64 rng(preset_seed ^ run_seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& x : f.values) x = dist(rng);
    return f;
  }
  if (kind == "file") {
    Field loaded = read_field_csv(args);
    if (!loaded.grid.same_shape(grid)) {
      throw ConfigError("field file grid does not match run grid: " + args);
    }
    return loaded;
  }
  throw ConfigError("unknown initial-data preset: " + spec);
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  std::ofstream out(path);
  if (!out.is_open()) throw ConfigError("cannot write field file: " + path.string());
  const Grid& g = field.grid;
  if (g.dim == 1) {
    out << "index,x,value\n";
    for (int i = 0; i < g.nx; ++i) {
      out << i << ',' << format_double(g.x(i)) << ',' << format_double(field[i]) << '\n';
    }
  } else {
    out << "index,j,x,y,value\n";
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        out << i << ',' << j << ',' << format_double(g.x(i)) << ','
            << format_double(g.y(j)) << ',' << format_double(field[g.index(i, j)])
            << '\n';
      }
    }
  }
  if (!out.good()) throw ConfigError("write failed: " + path.string());
}

Field read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw ConfigError("cannot open field file: " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("empty field file: " + path.string());
  const bool two_d = header.find(",j,") != std::string::npos;
  std::vector<double> xs, ys, values;
  std::vector<int> is, js;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ls, tok, ',')) parts.push_back(tok);
    const size_t expected = two_d ? 5 : 3;
    if (parts.size() != expected) {
      throw ConfigError("malformed field row: " + line);
    }
    is.push_back(static_cast<int>(parse_long("index", parts[0])));
    size_t base = 1;
    if (two_d) {
      js.push_back(static_cast<int>(parse_long("j", parts[1])));
      base = 2;
    }
    xs.push_back(parse_double("x", parts[base]));
    if (two_d) ys.push_back(parse_double("y", parts[base + 1]));
    values.push_back(parse_double("value", parts[base + (two_d ? 2 : 1)]));
  }
  if (values.empty()) throw ConfigError("field file has no rows: " + path.string());
  int nx = 0, ny = 1;
  for (int i : is) nx = std::max(nx, i + 1);
  if (two_d) {
    for (int j : js) ny = std::max(ny, j + 1);
  }
  // The first cell center sits at h/2, which recovers the spacing.
  const double hx = 2.0 * xs[0] / (2.0 * is[0] + 1.0);
  Grid grid;
  if (two_d) {
    const double hy = 2.0 * ys[0] / (2.0 * js[0] + 1.0);
    grid = Grid::make_2d(nx, ny, hx * nx, hy * ny);
  } else {
    grid = Grid::make_1d(nx, hx * nx);
  }
  Field f(grid);
  if (static_cast<int>(values.size()) != grid.cells()) {
    throw ConfigError("field file row count does not fill the grid: " + path.string());
  }
  for (size_t r = 0; r < values.size(); ++r) {
    const int idx = two_d ? grid.index(is[r], js[r]) : is[r];
    f[idx] = values[r];
  }
  return f;
}

void write_monitor_csv(const std::filesystem::path& path, const MonitorSeries& series) {
  std::ofstream out(path);
  if (!out.is_open()) throw ConfigError("cannot write monitor file: " + path.string());
  out << "step,time,value,bound,margin,pass\n";
  const bool has_bounds = !series.bound.empty();
  for (size_t r = 0; r < series.value.size(); ++r) {
    out << series.step[r] << ',' << format_double(series.time[r]) << ','
        << format_double(series.value[r]) << ',';
    if (has_bounds) {
      out << format_double(series.bound[r]) << ',' << format_double(series.margin[r])
          << ',' << (series.pass[r] ? 1 : 0);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  if (!out.good()) throw ConfigError("write failed: " + path.string());
}

}  // namespace crossdiff
