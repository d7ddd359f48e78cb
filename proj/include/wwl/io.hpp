#ifndef WWL_IO_HPP
#define WWL_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wwl/kernels.hpp"
#include "wwl/wl.hpp"

namespace wwl {

using json = nlohmann::json;

/// Writes through a sibling temp file and a rename, so readers never see a
/// half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string matrix_to_csv(const Matrix& M) {
  std::string s;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) s += ',';
      s += format_number(M(i, j));
    }
    s += '\n';
  }
  return s;
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  Matrix M(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

/// LIBSVM precomputed-kernel rows: "label 0:serial 1:K_i1 ... n:K_in", serial from 1.
inline std::string matrix_to_libsvm(const Matrix& K, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(K.rows()) != labels.size())
    throw std::invalid_argument("matrix_to_libsvm: one label per row required");
  std::string s;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    s += std::to_string(labels[static_cast<std::size_t>(i)]) + " 0:" + std::to_string(i + 1);
    for (Eigen::Index j = 0; j < K.cols(); ++j) s += ' ' + std::to_string(j + 1) + ':' + format_number(K(i, j));
    s += '\n';
  }
  return s;
}

inline json refinement_to_json(const WLRefinement& r) {
  json j;
  j["H"] = r.iterations();
  json alphabets = json::array();
  for (int h = 1; h <= r.iterations(); ++h) {
    json keys = json::array();
    const auto& a = r.alphabet(h);
    for (std::size_t id = 0; id < a.size(); ++id) keys.push_back(a.key(static_cast<int>(id)).str());
    alphabets.push_back(std::move(keys));
  }
  j["alphabets"] = std::move(alphabets);
  json graphs = json::array();
  for (std::size_t g = 0; g < r.num_graphs(); ++g) {
    json rows = json::array();
    for (std::size_t v = 0; v < r.num_nodes(g); ++v) {
      auto row = r.row(g, v);
      rows.push_back(std::vector<int>(row.begin(), row.end()));
    }
    graphs.push_back({{"initial", r.initial_labels(g)}, {"labels", std::move(rows)}});
  }
  j["graphs"] = std::move(graphs);
  return j;
}

/// Parses "(p,[a,b,...])".
inline WLSignature parse_signature(const std::string& s) {
  WLSignature sig;
  const auto open = s.find('['), close = s.rfind(']');
  if (s.size() < 5 || s.front() != '(' || open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("bad WL pattern key: " + s);
  sig.parent = std::stoi(s.substr(1, open - 2));
  std::stringstream ss(s.substr(open + 1, close - open - 1));
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) sig.neighbors.push_back(std::stoi(tok));
  return sig;
}

inline WLRefinement refinement_from_json(const json& j) {
  const int H = j.at("H").get<int>();
  std::vector<WLAlphabet> alphabets(static_cast<std::size_t>(H));
  const auto& a = j.at("alphabets");
  if (a.size() != static_cast<std::size_t>(H)) throw std::invalid_argument("refinement json: one alphabet per iteration");
  for (std::size_t h = 0; h < a.size(); ++h)
    for (const auto& key : a[h]) {
      const auto id = alphabets[h].intern(parse_signature(key.get<std::string>()));
      if (static_cast<std::size_t>(id) + 1 != alphabets[h].size())
        throw std::invalid_argument("refinement json: duplicate pattern key");
    }
  std::vector<std::vector<int>> initial, emb;
  for (const auto& g : j.at("graphs")) {
    initial.push_back(g.at("initial").get<std::vector<int>>());
    std::vector<int> flat;
    for (const auto& row : g.at("labels")) {
      auto v = row.get<std::vector<int>>();
      if (v.size() != static_cast<std::size_t>(H)) throw std::invalid_argument("refinement json: row length != H");
      flat.insert(flat.end(), v.begin(), v.end());
    }
    emb.push_back(std::move(flat));
  }
  return WLRefinement::restore(H, std::move(alphabets), std::move(initial), std::move(emb));
}

/// {offset, radii, weights: [{h, label, key, weight}, ...]}
inline json weights_to_json(const WeightVector& W, const WLRefinement& r) {
  json j;
  j["offset"] = W.offset();
  j["radii"] = W.radii();
  json entries = json::array();
  for (int h = 1; h <= W.iterations(); ++h) {
    const auto& w = W.block(h);
    for (std::size_t l = 0; l < w.size(); ++l)
      entries.push_back({{"h", h},
                         {"label", l},
                         {"key", r.alphabet(h).key(static_cast<int>(l)).str()},
                         {"weight", w[l]}});
  }
  j["weights"] = std::move(entries);
  return j;
}

inline WeightVector weights_from_json(const json& j, const WLRefinement& r) {
  WeightVector W(r.alphabet_sizes(), j.at("radii").get<std::vector<double>>(), j.at("offset").get<double>());
  for (const auto& e : j.at("weights")) {
    const int h = e.at("h").get<int>();
    const auto l = e.at("label").get<std::size_t>();
    auto& block = W.block(h);
    if (l >= block.size()) throw std::invalid_argument("weights json: label outside the alphabet");
    block[l] = e.at("weight").get<double>();
  }
  return W;
}

}  // namespace wwl

#endif  // WWL_IO_HPP
