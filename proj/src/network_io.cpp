#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/io.hpp"
#include "coevo/rng.hpp"
#include "io_common.hpp"

namespace coevo::io {
namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line + 1) + ": "; }

Network finish(int n, std::vector<double> weights, bool normalise) {
  return normalise ? Network::normalised(n, std::move(weights)) : Network(n, std::move(weights));
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

NetworkFormat parse_network_format(std::string_view name) {
  if (name == "edge-list") return NetworkFormat::edge_list;
  if (name == "dense-csv") return NetworkFormat::dense_csv;
  throw ValidationError("unknown network format '" + std::string(name) +
                        "' (expected edge-list or dense-csv)");
}

Network parse_edge_list(std::string_view text, bool normalise, std::optional<int> node_count) {
  struct Edge {
    int i, j;
    double w;
  };
  std::vector<Edge> edges;
  int max_id = 0;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t", start);
      tokens.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
      pos = end == std::string_view::npos ? line.size() : end;
    }
    if (tokens.size() != 3) {
      throw ValidationError(at_line(ln) + "expected 'i j w', got " +
                            std::to_string(tokens.size()) + " fields");
    }
    const auto i = detail::parse_int(tokens[0]);
    const auto j = detail::parse_int(tokens[1]);
    const auto w = detail::parse_double(tokens[2]);
    if (!i || !j || *i < 1 || *j < 1) {
      throw ValidationError(at_line(ln) + "node ids must be integers >= 1");
    }
    if (!w || !std::isfinite(*w)) throw ValidationError(at_line(ln) + "weight is not a number");
    if (*w < 0.0) throw ValidationError(at_line(ln) + "negative weight " + std::string(tokens[2]));
    if (*i > 1'000'000 || *j > 1'000'000) throw ValidationError(at_line(ln) + "node id too large");
    edges.push_back({static_cast<int>(*i) - 1, static_cast<int>(*j) - 1, *w});
    max_id = std::max({max_id, static_cast<int>(*i), static_cast<int>(*j)});
  }
  const int n = node_count.value_or(max_id);
  if (n < 1) throw ValidationError("edge list contains no edges");
  if (max_id > n) {
    throw ValidationError("edge list references node " + std::to_string(max_id) +
                          " but the network has " + std::to_string(n) + " nodes");
  }
  std::vector<double> weights(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  for (const Edge& e : edges) weights[static_cast<std::size_t>(e.i) * n + e.j] += e.w;
  return finish(n, std::move(weights), normalise);
}

Network parse_dense_csv(std::string_view text, bool normalise) {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = detail::trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    for (std::string_view cell : detail::split(line, ',')) {
      const auto v = detail::parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        throw ValidationError(at_line(ln) + "'" + std::string(detail::trim(cell)) +
                              "' is not a number");
      }
      if (*v < 0.0) throw ValidationError(at_line(ln) + "negative weight");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError(at_line(ln) + "ragged matrix: " + std::to_string(row.size()) +
                            " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    row_lines.push_back(ln);
  }
  if (rows.empty()) throw ValidationError("dense CSV contains no rows");
  const int n = static_cast<int>(rows.size());
  if (rows.front().size() != rows.size()) {
    throw ValidationError("dense CSV has " + std::to_string(rows.size()) + " rows of " +
                          std::to_string(rows.front().size()) + " columns; must be square");
  }
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!normalise) {
      double sum = 0.0;
      for (double v : rows[r]) sum += v;
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw ValidationError(at_line(row_lines[r]) + "row " + std::to_string(r + 1) +
                              " sums to " + format_real(sum) + ", must sum to 1");
      }
    }
    flat.insert(flat.end(), rows[r].begin(), rows[r].end());
  }
  return finish(n, std::move(flat), normalise);
}

Network load_network(const std::filesystem::path& path, NetworkFormat format, bool normalise,
                     std::optional<int> node_count) {
  const std::string text = read_file(path);
  try {
    return format == NetworkFormat::edge_list ? parse_edge_list(text, normalise, node_count)
                                              : parse_dense_csv(text, normalise);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_network(const Network& net, NetworkFormat format) {
  std::ostringstream os;
  const int n = net.n();
  if (format == NetworkFormat::edge_list) {
    os << "# i j w (1-indexed), " << n << " nodes\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (net.weight(i, j) > 0.0) {
          os << i + 1 << ' ' << j + 1 << ' ' << format_real(net.weight(i, j)) << '\n';
        }
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) os << (j ? "," : "") << format_real(net.weight(i, j));
      os << '\n';
    }
  }
  return os.str();
}

void write_network(const Network& net, const std::filesystem::path& path, NetworkFormat format) {
  write_file_atomic(path, format_network(net, format));
}

// ---------------------------------------------------------------------------
// Generators

Network complete_network(int n) {
  if (n < 2) throw ValidationError("complete network needs n >= 2");
  std::vector<double> w(static_cast<std::size_t>(n) * n, 1.0 / (n - 1));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i) * n + i] = 0.0;
  return Network(n, std::move(w));
}

Network ring_network(int n) {
  if (n < 2) throw ValidationError("ring network needs n >= 2");
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int next = (i + 1) % n;
    const int prev = (i + n - 1) % n;
    w[static_cast<std::size_t>(i) * n + next] += 0.5;
    w[static_cast<std::size_t>(i) * n + prev] += 0.5;
  }
  return Network(n, std::move(w));
}

Network grid_network(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw ValidationError("grid network needs at least 2 nodes");
  }
  const int n = rows * cols;
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (r > 0) w[static_cast<std::size_t>(i) * n + i - cols] = 1.0;
      if (r + 1 < rows) w[static_cast<std::size_t>(i) * n + i + cols] = 1.0;
      if (c > 0) w[static_cast<std::size_t>(i) * n + i - 1] = 1.0;
      if (c + 1 < cols) w[static_cast<std::size_t>(i) * n + i + 1] = 1.0;
    }
  }
  return Network::normalised(n, std::move(w));
}

Network random_network(int n, double p, std::uint64_t seed, RandomWeighting weighting,
                       bool require_connected, int max_retries) {
  if (n < 2) throw ValidationError("random network needs n >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("edge probability must lie in [0, 1]");
  const auto nn = static_cast<std::size_t>(n);
  for (int attempt = 0; attempt <= std::max(max_retries, 0); ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<char> adj(nn * nn, 0);
    std::vector<int> degree(nn, 0);
    for (std::size_t i = 0; i < nn; ++i) {
      for (std::size_t j = i + 1; j < nn; ++j) {
        if (rng.bernoulli(p)) {
          adj[i * nn + j] = adj[j * nn + i] = 1;
          ++degree[i];
          ++degree[j];
        }
      }
    }
    std::vector<double> w(nn * nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
      if (weighting == RandomWeighting::row) {
        if (degree[i] == 0) {
          w[i * nn + i] = 1.0;
          continue;
        }
        for (std::size_t j = 0; j < nn; ++j) {
          if (adj[i * nn + j]) w[i * nn + j] = 1.0 / degree[i];
        }
      } else {
        double off = 0.0;
        for (std::size_t j = 0; j < nn; ++j) {
          if (adj[i * nn + j]) {
            w[i * nn + j] = 1.0 / (1.0 + std::max(degree[i], degree[j]));
            off += w[i * nn + j];
          }
        }
        w[i * nn + i] = 1.0 - off;
      }
    }
    Network net(n, std::move(w));
    if (!require_connected || net.is_irreducible()) return net;
  }
  throw ValidationError("no connected G(" + std::to_string(n) + ", " + format_real(p) +
                        ") draw after " + std::to_string(max_retries) + " retries");
}

}  // namespace coevo::io
