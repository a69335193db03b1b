#include "mlo/config.hpp"

#include "mlo/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pt = boost::property_tree;

namespace mlo {
namespace {

// ptree drops line numbers, so recover them from the raw text for messages.
class LineIndex {
public:
  explicit LineIndex(const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    for (int n = 1; std::getline(in, line); ++n) {
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] == ';' || line[b] == '#') continue;
      if (line[b] == '[') {
        const auto e = line.find(']', b);
        section = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
        lines_.emplace(section, n);
        continue;
      }
      const auto eq = line.find('=', b);
      auto key = line.substr(b, eq == std::string::npos ? std::string::npos : eq - b);
      key.erase(key.find_last_not_of(" \t") + 1);
      lines_.emplace(section + "." + key, n);
    }
  }
  int line(const std::string& path) const {
    const auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

private:
  std::map<std::string, int> lines_;
};

std::string trim_quotes(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    v = v.substr(1, v.size() - 2);
  return v;
}

template <typename T>
T parse_value(const std::string& raw, const std::string& where) {
  std::istringstream in(trim_quotes(raw));
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof())
    throw ConfigError(fmt::format("{}: invalid value '{}'", where, raw));
  return v;
}

} // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& origin) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const LineIndex index(text);

  pt::ptree tree;
  try {
    std::istringstream s(text);
    pt::read_ini(s, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
  }

  ScenarioConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto integer = [](int& field) -> Setter {
    return [&field](const std::string& v, const std::string& w) { field = parse_value<int>(v, w); };
  };
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& v, const std::string& w) { field = parse_value<double>(v, w); };
  };
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"scenario",
       {{"n_mld", integer(cfg.n_mld)},
        {"n_sld", integer(cfg.n_sld)},
        {"links", integer(cfg.links)},
        {"gamma",
         [&cfg](const std::string& v, const std::string& w) {
           if (trim_quotes(v) == "auto")
             cfg.gamma.reset();
           else
             cfg.gamma = parse_value<double>(v, w);
         }}}},
      {"backoff", {{"w0", integer(cfg.backoff.w0)}, {"m", integer(cfg.backoff.m)},
                   {"cw_min_sld", integer(cfg.backoff.cw_min_sld)}}},
      {"phy",
       {{"t_phy", real(cfg.phy.t_phy)},
        {"sigma", real(cfg.phy.sigma)},
        {"r_su", real(cfg.phy.r_su)},
        {"n_a", integer(cfg.phy.n_a)},
        {"l_d", integer(cfg.phy.l_d)},
        {"mpdu_overhead", integer(cfg.phy.mpdu_overhead)},
        {"sifs", real(cfg.phy.sifs)},
        {"t_ack", real(cfg.phy.t_ack)},
        {"t_empty", real(cfg.phy.t_empty)}}},
  };

  for (const auto& [section, body] : tree) {
    const auto sec = schema.find(section);
    if (sec == schema.end()) {
      const int ln = index.line(section);
      throw ConfigError(ln > 0 ? fmt::format("{}:{}: unknown section [{}]", origin, ln, section)
                               : fmt::format("{}: key '{}' outside any section", origin, section));
    }
    for (const auto& [key, node] : body) {
      const std::string path = section + "." + key;
      const std::string where = fmt::format("{}:{}: {}", origin, index.line(path), path);
      const auto field = sec->second.find(key);
      if (field == sec->second.end()) throw ConfigError(fmt::format("{}: unknown key", where));
      field->second(node.data(), where);
    }
  }

  try {
    cfg.validate();
  } catch (const ModelError& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config", path));
  return parse_config(in, path);
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  out << "[scenario]\n"
      << "n_mld = " << c.n_mld << "\n"
      << "n_sld = " << c.n_sld << "\n"
      << "gamma = " << (c.gamma ? fmt::format("{}", *c.gamma) : std::string("auto")) << "\n"
      << "links = " << c.links << "\n\n"
      << "[backoff]\n"
      << "w0 = " << c.backoff.w0 << "\n"
      << "m = " << c.backoff.m << "\n"
      << "cw_min_sld = " << c.backoff.cw_min_sld << "\n\n"
      << "[phy]\n"
      << fmt::format("t_phy = {}\nsigma = {}\nr_su = {}\nn_a = {}\nl_d = {}\nmpdu_overhead = {}\n"
                     "sifs = {}\nt_ack = {}\nt_empty = {}\n",
                     c.phy.t_phy, c.phy.sigma, c.phy.r_su, c.phy.n_a, c.phy.l_d, c.phy.mpdu_overhead,
                     c.phy.sifs, c.phy.t_ack, c.phy.t_empty);
}

} // namespace mlo
