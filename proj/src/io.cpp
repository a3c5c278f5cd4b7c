#include "ratekit/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ratekit/error.hpp"

namespace ratekit::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, std::size_t line_no) {
  const std::string s = trim(field);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InvalidInput("csv line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a finite number");
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols, const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows) {
    throw InvalidInput(std::string("model json: bad row count for ") + what);
  }
  Matrix m(expect_rows, expect_cols);
  for (Eigen::Index i = 0; i < expect_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols) {
      throw InvalidInput(std::string("model json: bad column count for ") + what);
    }
    for (Eigen::Index j = 0; j < expect_cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& arr, Eigen::Index expect, const char* what) {
  const auto values = arr.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != expect) {
    throw InvalidInput(std::string("model json: bad length for ") + what);
  }
  return Eigen::Map<const Vector>(values.data(), expect);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::string out;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    out += data.feature_names.empty() ? "f" + std::to_string(j + 1) : data.feature_names[static_cast<std::size_t>(j)];
    out += ',';
  }
  out += "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      out += format_double(data.x(i, j));
      out += ',';
    }
    out += format_double(data.y(i));
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("dataset csv: empty file");
  std::vector<std::string> header = split_csv_line(trim(line));
  for (auto& h : header) h = trim(h);
  if (header.size() < 2 || header.back() != "y") {
    throw InvalidInput("dataset csv: header must list feature columns followed by 'y'");
  }
  const std::size_t p = header.size() - 1;
  Dataset d;
  d.feature_names.assign(header.begin(), header.end() - 1);

  std::vector<double> values;
  std::size_t line_no = 1, rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(trim(line));
    if (fields.size() != header.size()) {
      throw InvalidInput("dataset csv line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) values.push_back(parse_double(f, line_no));
    ++rows;
  }
  if (rows == 0) throw InvalidInput("dataset csv: no data rows");
  d.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  d.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (p + 1) + j];
    }
    d.y(static_cast<Eigen::Index>(i)) = values[i * (p + 1) + p];
  }
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return dataset_from_csv(read_text(path)); }

json mask_to_json(const std::vector<bool>& mask, std::uint64_t seed) {
  json doc;
  doc["causal_mask"] = mask;
  doc["seed"] = seed;
  return doc;
}

std::vector<bool> mask_from_json(const json& doc) {
  if (!doc.contains("causal_mask")) throw InvalidInput("mask json: missing 'causal_mask'");
  return doc.at("causal_mask").get<std::vector<bool>>();
}

json network_to_json(const Network& net) {
  json doc;
  doc["format"] = "ratekit-model";
  doc["version"] = kModelFormatVersion;
  doc["seed"] = net.seed;
  const auto& cfg = net.config;
  doc["config"] = {{"input_dim", cfg.input_dim},       {"hidden_sizes", cfg.hidden_sizes},
                   {"link", to_string(cfg.link)},       {"n_classes", cfg.n_classes},
                   {"prior_scale", cfg.prior_scale},    {"noise_variance", cfg.noise_variance}};
  json layers = json::array();
  for (const auto& l : net.hidden) {
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"weight", matrix_to_json(l.weight)},
                      {"bias", vector_to_json(l.bias)}});
  }
  doc["hidden"] = std::move(layers);
  doc["output"] = {{"k", net.k()},
                   {"c", net.c()},
                   {"mean", matrix_to_json(net.mean)},
                   {"log_var", matrix_to_json(net.log_var)},
                   {"bias", vector_to_json(net.out_bias)}};
  return doc;
}

Network network_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "ratekit-model") throw InvalidInput("model json: not a ratekit model");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw InvalidInput("model json: unsupported version " + doc.at("version").dump());
    }
    Network net;
    net.seed = doc.at("seed").get<std::uint64_t>();
    const json& cfg = doc.at("config");
    net.config.input_dim = cfg.at("input_dim").get<int>();
    net.config.hidden_sizes = cfg.at("hidden_sizes").get<std::vector<int>>();
    net.config.link = link_from_string(cfg.at("link").get<std::string>());
    net.config.n_classes = cfg.at("n_classes").get<int>();
    net.config.prior_scale = cfg.at("prior_scale").get<double>();
    net.config.noise_variance = cfg.at("noise_variance").get<double>();
    net.config.validate();

    const json& layers = doc.at("hidden");
    if (layers.size() != net.config.hidden_sizes.size()) throw InvalidInput("model json: layer count mismatch");
    int fan_in = net.config.input_dim;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const int width = net.config.hidden_sizes[l];
      DenseLayer layer;
      layer.weight = matrix_from_json(layers[l].at("weight"), fan_in, width, "hidden weight");
      layer.bias = vector_from_json(layers[l].at("bias"), width, "hidden bias");
      net.hidden.push_back(std::move(layer));
      fan_in = width;
    }
    const json& out = doc.at("output");
    const int k = net.config.last_hidden(), c = net.config.n_classes;
    net.mean = matrix_from_json(out.at("mean"), k, c, "output mean");
    net.log_var = matrix_from_json(out.at("log_var"), k, c, "output log_var");
    net.out_bias = vector_from_json(out.at("bias"), c, "output bias");
    return net;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("model json: ") + e.what());
  }
}

json report_to_json(const std::vector<ImportanceReport>& reports) {
  json items = json::array();
  const bool multi = reports.size() > 1;
  for (const auto& report : reports) {
    for (const auto& item : report.items) {
      json entry = {{"name", item.name}, {"kld", item.kld}, {"rate", item.rate}};
      if (report.is_group) {
        entry["members"] = item.members;
      } else {
        entry["sign"] = item.sign;
        entry["mi"] = item.mi.value_or(0.0);
      }
      entry["significant"] = item.significant;
      if (multi) entry["class"] = report.cls;
      items.push_back(std::move(entry));
    }
  }
  return items;
}

std::string report_to_csv(const std::vector<ImportanceReport>& reports) {
  const bool group = !reports.empty() && reports.front().is_group;
  std::string out = group ? "class,name,kld,rate,significant,members\n" : "class,name,kld,rate,sign,mi,significant\n";
  for (const auto& report : reports) {
    for (const auto& item : report.items) {
      out += std::to_string(report.cls) + ',' + item.name + ',' + format_double(item.kld) + ',' +
             format_double(item.rate) + ',';
      if (group) {
        out += item.significant ? "1," : "0,";
        for (std::size_t m = 0; m < item.members.size(); ++m) {
          if (m) out += ';';
          out += std::to_string(item.members[m]);
        }
      } else {
        out += std::to_string(item.sign) + ',' + format_double(item.mi.value_or(0.0)) + ',' +
               (item.significant ? "1" : "0");
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<double> rates_from_report_json(const json& doc) {
  if (!doc.is_array() || doc.empty()) throw InvalidInput("report json: expected a non-empty array");
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& entry : doc) {
    const auto name = entry.at("name").get<std::string>();
    auto [it, inserted] = acc.try_emplace(name, 0.0, 0);
    if (inserted) order.push_back(name);
    it->second.first += entry.at("rate").get<double>();
    it->second.second += 1;
  }
  std::vector<double> rates;
  for (const auto& name : order) rates.push_back(acc[name].first / acc[name].second);
  return rates;
}

std::string esa_to_csv(const EffectSizePosterior& esa) {
  std::string out = "feature,class,mu,omega_diag\n";
  for (int c = 0; c < esa.c(); ++c) {
    const auto idx = static_cast<std::size_t>(c);
    const Vector diag = esa.factor[idx].rowwise().squaredNorm();
    for (int j = 0; j < esa.p(); ++j) {
      out += esa.feature_names[static_cast<std::size_t>(j)] + ',' + std::to_string(c) + ',' +
             format_double(esa.mu[idx](j)) + ',' + format_double(diag(j)) + '\n';
    }
  }
  return out;
}

std::string roc_to_csv(const RocCurve& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
    out += format_double(roc.thresholds[i]) + ',' + format_double(roc.fpr[i]) + ',' + format_double(roc.tpr[i]) + '\n';
  }
  return out;
}

GroupMap groups_from_csv(const std::string& text, const std::vector<std::string>& feature_names) {
  std::map<std::string, int> index;
  for (std::size_t j = 0; j < feature_names.size(); ++j) index[feature_names[j]] = static_cast<int>(j);

  GroupMap groups;
  std::map<std::string, std::size_t> slot;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw InvalidInput("group file line " + std::to_string(line_no) + ": expected group_name,feature_name");
    }
    const std::string group = trim(fields[0]), feature = trim(fields[1]);
    if (line_no == 1 && ((group == "group" && feature == "feature") ||
                         (group == "group_name" && feature == "feature_name"))) {
      continue;
    }
    const auto it = index.find(feature);
    if (it == index.end()) {
      throw InvalidInput("group file line " + std::to_string(line_no) + ": unknown feature '" + feature + "'");
    }
    auto [pos, inserted] = slot.try_emplace(group, groups.size());
    if (inserted) groups.add(group, {});
    groups.members[pos->second].push_back(it->second);
  }
  if (groups.size() == 0) throw InvalidInput("group file: no groups");
  return groups;
}

}  // namespace ratekit::io
