#include "dvqr/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dvqr {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// FNV-1a over the serialized sample values; cheap corruption check
std::string sample_digest(const std::vector<double>& sample) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : sample) {
    for (char c : fmt17(x)) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= ',';
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

void write_margin(std::ostream& os, const KernelMargin& m,
                  const std::string& indent) {
  os << "{\n" << indent << "  \"digest\": \"" << sample_digest(m.sample())
     << "\",\n" << indent << "  \"bandwidth\": " << fmt17(m.bandwidth())
     << ",\n" << indent << "  \"sample\": [";
  const auto& s = m.sample();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << fmt17(s[i]);
  }
  os << "]\n" << indent << "}";
}

}  // namespace

std::string save_model(const QuantRegModel& m) {
  std::ostringstream os;
  os << "{\n  \"version\": 1,\n";
  os << "  \"response\": \"" << json_escape(m.response_name) << "\",\n";
  os << "  \"covariates\": [";
  for (std::size_t i = 0; i < m.covariate_names.size(); ++i) {
    if (i) os << ", ";
    os << '"' << json_escape(m.covariate_names[i]) << '"';
  }
  os << "],\n";
  os << "  \"response_margin\": ";
  write_margin(os, m.response_margin, "  ");
  os << ",\n  \"covariate_margins\": [";
  for (std::size_t i = 0; i < m.covariate_margins.size(); ++i) {
    os << (i ? ", " : "") << "\n    ";
    write_margin(os, m.covariate_margins[i], "    ");
  }
  os << "\n  ],\n";
  os << "  \"vine\": {\n    \"order\": [";
  for (std::size_t i = 0; i < m.vine.order.size(); ++i) {
    if (i) os << ", ";
    os << m.vine.order[i];
  }
  os << "],\n    \"criterion\": \"" << criterion_name(m.vine.criterion)
     << "\",\n    \"cll_path\": [";
  for (std::size_t i = 0; i < m.vine.cll_path.size(); ++i) {
    if (i) os << ", ";
    os << fmt17(m.vine.cll_path[i]);
  }
  os << "],\n    \"pairs\": [";
  for (std::size_t t = 0; t < m.vine.pairs.size(); ++t) {
    os << (t ? "," : "") << "\n      [";
    for (std::size_t e = 0; e < m.vine.pairs[t].size(); ++e) {
      const BiCop& c = m.vine.pairs[t][e];
      os << (e ? ",\n       " : "");
      os << "{\"family\": \"" << family_name(c.family)
         << "\", \"rotation\": " << static_cast<int>(c.rotation)
         << ", \"parameters\": [";
      for (std::size_t p = 0; p < c.params.size(); ++p) {
        if (p) os << ", ";
        os << fmt17(c.params[p]);
      }
      os << "]}";
    }
    os << "]";
  }
  os << "\n    ]\n  }\n}\n";
  return os.str();
}

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ModelParseError(std::string("model document: missing field '") + key +
                          "' in " + where);
  return *it;
}

KernelMargin parse_margin(const json& j, const std::string& where) {
  const json& samples = need(j, "sample", where.c_str());
  std::vector<double> sample;
  for (const auto& x : samples) sample.push_back(x.get<double>());
  const double h = need(j, "bandwidth", where.c_str()).get<double>();
  KernelMargin m(std::move(sample), h);
  const std::string digest = need(j, "digest", where.c_str()).get<std::string>();
  if (digest != sample_digest(m.sample()))
    throw ModelParseError("model document: sample digest mismatch in " + where);
  return m;
}

}  // namespace

QuantRegModel load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelParseError(std::string("model document: ") + e.what());
  }
  const int version = need(doc, "version", "root").get<int>();
  if (version != 1)
    throw ModelParseError("model document: unsupported version " +
                          std::to_string(version));

  const std::string response =
      need(doc, "response", "root").get<std::string>();
  std::vector<std::string> cov_names;
  for (const auto& n : need(doc, "covariates", "root"))
    cov_names.push_back(n.get<std::string>());

  KernelMargin ym = parse_margin(need(doc, "response_margin", "root"),
                                 "response_margin");
  std::vector<KernelMargin> cms;
  const json& jcms = need(doc, "covariate_margins", "root");
  for (std::size_t i = 0; i < jcms.size(); ++i)
    cms.push_back(parse_margin(jcms[i], "covariate_margins[" +
                                            std::to_string(i) + "]"));
  if (cms.size() != cov_names.size())
    throw ModelParseError(
        "model document: covariate margin count does not match names");

  const json& jv = need(doc, "vine", "root");
  DVineRegression vine;
  for (const auto& o : need(jv, "order", "vine")) {
    const int idx = o.get<int>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= cov_names.size())
      throw ModelParseError("model document: vine order index out of range");
    vine.order.push_back(idx);
  }
  vine.criterion =
      criterion_from_name(need(jv, "criterion", "vine").get<std::string>());
  for (const auto& x : need(jv, "cll_path", "vine"))
    vine.cll_path.push_back(x.get<double>());
  for (const auto& tree : need(jv, "pairs", "vine")) {
    std::vector<BiCop> edges;
    for (const auto& jp : tree) {
      const std::string fname =
          need(jp, "family", "vine.pairs").get<std::string>();
      FamilyId fam;
      try {
        fam = family_from_name(fname);
      } catch (const std::invalid_argument& e) {
        throw ModelParseError(std::string("model document: ") + e.what());
      }
      const int rot = need(jp, "rotation", "vine.pairs").get<int>();
      std::vector<double> params;
      for (const auto& x : need(jp, "parameters", "vine.pairs"))
        params.push_back(x.get<double>());
      try {
        edges.emplace_back(fam, rotation_from_degrees(rot), std::move(params));
      } catch (const std::exception& e) {
        throw ModelParseError(std::string("model document: ") + e.what());
      }
    }
    vine.pairs.push_back(std::move(edges));
  }
  try {
    vine.check_shape();
  } catch (const std::exception& e) {
    throw ModelParseError(std::string("model document: ") + e.what());
  }
  return QuantRegModel{response, std::move(cov_names), std::move(ym),
                       std::move(cms), std::move(vine)};
}

void save_model_file(const QuantRegModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << save_model(m);
}

QuantRegModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

}  // namespace dvqr
