//
// Copyright 2026 The WPFL Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "wpfl/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace wpfl {
namespace {

namespace pt = boost::property_tree;

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string JoinList(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, Policy>) {
      out += PolicyName(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Reads typed values from a two-level tree and remembers which keys were
// consumed so that leftovers can be reported.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  const std::string* Raw(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return nullptr;
    const auto node = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!node) return nullptr;
    return &node->data();
  }

  void Str(const std::string& s, const std::string& k, std::string& out) {
    if (const std::string* v = Raw(s, k)) out = *v;
  }

  template <typename T>
  void Num(const std::string& s, const std::string& k, T& out) {
    const std::string* v = Raw(s, k);
    if (!v) return;
    try {
      std::size_t pos = 0;
      if constexpr (std::is_floating_point_v<T>) {
        out = std::stod(*v, &pos);
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v->empty() && v->front() == '-') throw std::invalid_argument("");
        out = static_cast<T>(std::stoull(*v, &pos));
      } else {
        out = static_cast<T>(std::stoll(*v, &pos));
      }
      if (pos != v->size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value '" + *v + "' for " + s + "." + k);
    }
  }

  void Bool(const std::string& s, const std::string& k, bool& out) {
    const std::string* v = Raw(s, k);
    if (!v) return;
    if (*v == "true" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "0") {
      out = false;
    } else {
      throw ConfigError("bad boolean '" + *v + "' for " + s + "." + k);
    }
  }

  // "auto" or absent leaves the optional empty.
  void OptNum(const std::string& s, const std::string& k,
              std::optional<double>& out) {
    const std::string* v = Raw(s, k);
    if (!v || *v == "auto") return;
    double d = 0;
    used_.erase(s + "." + k);
    Num(s, k, d);
    out = d;
  }

  void CheckAllUsed() const {
    for (const auto& [section, sec] : tree_) {
      if (sec.empty() && !sec.data().empty())
        throw ConfigError("key '" + section + "' outside any section");
      for (const auto& [key, node] : sec) {
        (void)node;
        if (!used_.count(section + "." + key))
          throw ConfigError("unknown config key " + section + "." + key);
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

ExperimentConfig FromTree(const pt::ptree& tree) {
  std::string profile = "mlr";
  if (const auto sec = tree.get_child_optional("experiment"))
    profile = sec->get<std::string>("profile", "mlr");
  ExperimentConfig cfg = ProfileDefaults(profile);
  Reader r(tree);
  std::string scratch;

  r.Str("experiment", "profile", scratch);
  if (const std::string* v = r.Raw("experiment", "seeds")) {
    cfg.seeds.clear();
    for (const auto& s : SplitList(*v)) {
      try {
        cfg.seeds.push_back(std::stoull(s));
      } catch (const std::exception&) {
        throw ConfigError("bad seed '" + s + "'");
      }
    }
  }
  if (const std::string* v = r.Raw("experiment", "policy"))
    cfg.engine.policy = ParsePolicy(*v);
  if (const std::string* v = r.Raw("experiment", "dp_mode"))
    cfg.engine.dp_mode = ParseDpMode(*v);
  if (const std::string* v = r.Raw("experiment", "compare_policies")) {
    cfg.compare_policies.clear();
    for (const auto& s : SplitList(*v)) cfg.compare_policies.push_back(ParsePolicy(s));
  }
  if (const std::string* v = r.Raw("experiment", "t0_list")) {
    cfg.t0_list.clear();
    for (const auto& s : SplitList(*v)) {
      try {
        cfg.t0_list.push_back(std::stoi(s));
      } catch (const std::exception&) {
        throw ConfigError("bad T0 value '" + s + "'");
      }
    }
  }
  r.Str("experiment", "output", cfg.output);
  r.Num("experiment", "max_rounds", cfg.engine.max_rounds);

  DataConfig& d = cfg.data;
  if (const std::string* v = r.Raw("data", "source")) {
    if (*v == "synthetic") {
      d.source = DataSource::kSynthetic;
    } else if (*v == "idx") {
      d.source = DataSource::kIdx;
    } else {
      throw ConfigError("unknown data source '" + *v + "'");
    }
  }
  r.Str("data", "idx_images", d.idx_images);
  r.Str("data", "idx_labels", d.idx_labels);
  r.Num("data", "max_samples", d.max_samples);
  r.Num("data", "synthetic_samples", d.synthetic.n_samples);
  r.Num("data", "synthetic_dim", d.synthetic.dim);
  r.Num("data", "synthetic_classes", d.synthetic.n_classes);
  r.Num("data", "synthetic_separation", d.synthetic.separation);
  r.Num("data", "synthetic_noise_std", d.synthetic.noise_std);
  r.Num("data", "labels_per_client", d.labels_per_client);
  r.Num("data", "test_fraction", d.test_fraction);

  EngineConfig& e = cfg.engine;
  if (const std::string* v = r.Raw("model", "kind")) e.model.kind = ParseModelKind(*v);
  r.Num("model", "hidden_dim", e.model.hidden_dim);
  r.Num("model", "mu", e.mu);
  r.Num("model", "lsmooth", e.lsmooth);
  r.Bool("model", "estimate_curvature", e.estimate_curvature);
  r.Num("model", "curvature_pairs", e.curvature_pairs);
  r.Num("model", "curvature_scale", e.curvature_scale);

  PrivacySpec& p = e.privacy;
  r.Num("privacy", "epsilon_q", p.epsilon_q);
  r.Num("privacy", "delta_q", p.delta_q_target);
  r.Num("privacy", "t0", p.t0);
  r.Num("privacy", "clip_c", p.clip_c);
  r.Num("privacy", "r_bits", p.r_bits);
  r.Num("privacy", "q_sample", p.q_sample);
  r.OptNum("privacy", "sigma_dp", p.sigma_dp);

  RadioConfig& rc = e.radio;
  r.Num("radio", "n_clients", rc.n_clients);
  r.Num("radio", "n_subchannels", rc.n_subchannels);
  r.Num("radio", "subchannel_bandwidth_hz", rc.subchannel_bandwidth_hz);
  r.Num("radio", "noise_density_dbm_hz", rc.noise_density_dbm_hz);
  r.Num("radio", "client_power_max_dbm", rc.client_power_max_dbm);
  r.Num("radio", "bs_power_dbm", rc.bs_power_dbm);
  r.Num("radio", "modulation_order", rc.modulation_order);
  r.Num("radio", "pathloss_ref_db", rc.pathloss_ref_db);
  r.Num("radio", "pathloss_exponent", rc.pathloss_exponent);
  r.Num("radio", "cell_radius_m", rc.cell_radius_m);
  r.Num("radio", "min_distance_m", rc.min_distance_m);
  r.Num("radio", "tau_max_s", rc.tau_max_s);
  r.Bool("radio", "ideal_channel", e.ideal_channel);

  r.Num("learning", "default_eta_f", e.default_eta_f);
  r.Num("learning", "default_eta_p", e.default_eta_p);
  r.Num("learning", "default_lambda", e.default_lambda);
  r.OptNum("learning", "eps_p", e.eps_p);
  r.Num("learning", "phi1", e.free.phi1);
  r.Num("learning", "phi2", e.free.phi2);
  r.Num("learning", "varphi1", e.free.varphi1);
  r.Num("learning", "varphi2", e.free.varphi2);
  r.Num("learning", "warmup_rounds", e.warmup_rounds);
  r.Num("learning", "g0_margin", e.g0_margin);
  r.Num("learning", "batch_size", e.batch_size);

  r.CheckAllUsed();
  cfg.Validate();
  return cfg;
}

pt::ptree ToTree(const ExperimentConfig& cfg) {
  pt::ptree t;
  auto put = [&t](const std::string& s, const std::string& k,
                  const std::string& v) {
    t.put(pt::ptree::path_type(s + "." + k, '.'), v);
  };
  auto num = [&put](const std::string& s, const std::string& k, double v) {
    put(s, k, FormatDouble(v));
  };
  auto integer = [&put](const std::string& s, const std::string& k,
                        long long v) { put(s, k, std::to_string(v)); };
  const EngineConfig& e = cfg.engine;
  const DataConfig& d = cfg.data;

  put("experiment", "profile", cfg.profile);
  put("experiment", "seeds", JoinList(cfg.seeds));
  put("experiment", "policy", PolicyName(e.policy));
  put("experiment", "dp_mode", DpModeName(e.dp_mode));
  put("experiment", "compare_policies", JoinList(cfg.compare_policies));
  put("experiment", "t0_list", JoinList(cfg.t0_list));
  put("experiment", "output", cfg.output);
  integer("experiment", "max_rounds", e.max_rounds);

  put("data", "source", d.source == DataSource::kIdx ? "idx" : "synthetic");
  put("data", "idx_images", d.idx_images);
  put("data", "idx_labels", d.idx_labels);
  integer("data", "max_samples", static_cast<long long>(d.max_samples));
  integer("data", "synthetic_samples", static_cast<long long>(d.synthetic.n_samples));
  integer("data", "synthetic_dim", static_cast<long long>(d.synthetic.dim));
  integer("data", "synthetic_classes", d.synthetic.n_classes);
  num("data", "synthetic_separation", d.synthetic.separation);
  num("data", "synthetic_noise_std", d.synthetic.noise_std);
  integer("data", "labels_per_client", d.labels_per_client);
  num("data", "test_fraction", d.test_fraction);

  put("model", "kind", ModelKindName(e.model.kind));
  integer("model", "hidden_dim", static_cast<long long>(e.model.hidden_dim));
  num("model", "mu", e.mu);
  num("model", "lsmooth", e.lsmooth);
  put("model", "estimate_curvature", e.estimate_curvature ? "true" : "false");
  integer("model", "curvature_pairs", e.curvature_pairs);
  num("model", "curvature_scale", e.curvature_scale);

  const PrivacySpec& p = e.privacy;
  num("privacy", "epsilon_q", p.epsilon_q);
  num("privacy", "delta_q", p.delta_q_target);
  integer("privacy", "t0", p.t0);
  num("privacy", "clip_c", p.clip_c);
  integer("privacy", "r_bits", p.r_bits);
  num("privacy", "q_sample", p.q_sample);
  put("privacy", "sigma_dp", p.sigma_dp ? FormatDouble(*p.sigma_dp) : "auto");

  const RadioConfig& rc = e.radio;
  integer("radio", "n_clients", rc.n_clients);
  integer("radio", "n_subchannels", rc.n_subchannels);
  num("radio", "subchannel_bandwidth_hz", rc.subchannel_bandwidth_hz);
  num("radio", "noise_density_dbm_hz", rc.noise_density_dbm_hz);
  num("radio", "client_power_max_dbm", rc.client_power_max_dbm);
  num("radio", "bs_power_dbm", rc.bs_power_dbm);
  integer("radio", "modulation_order", rc.modulation_order);
  num("radio", "pathloss_ref_db", rc.pathloss_ref_db);
  num("radio", "pathloss_exponent", rc.pathloss_exponent);
  num("radio", "cell_radius_m", rc.cell_radius_m);
  num("radio", "min_distance_m", rc.min_distance_m);
  num("radio", "tau_max_s", rc.tau_max_s);
  put("radio", "ideal_channel", e.ideal_channel ? "true" : "false");

  num("learning", "default_eta_f", e.default_eta_f);
  num("learning", "default_eta_p", e.default_eta_p);
  num("learning", "default_lambda", e.default_lambda);
  put("learning", "eps_p", e.eps_p ? FormatDouble(*e.eps_p) : "auto");
  num("learning", "phi1", e.free.phi1);
  num("learning", "phi2", e.free.phi2);
  num("learning", "varphi1", e.free.varphi1);
  num("learning", "varphi2", e.free.varphi2);
  integer("learning", "warmup_rounds", e.warmup_rounds);
  num("learning", "g0_margin", e.g0_margin);
  integer("learning", "batch_size", static_cast<long long>(e.batch_size));
  return t;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (compare_policies.empty())
    throw ConfigError("compare_policies must not be empty");
  for (int t0 : t0_list)
    if (t0 < 1) throw ConfigError("T0 values must be >= 1");
  if (data.source == DataSource::kIdx &&
      (data.idx_images.empty() || data.idx_labels.empty()))
    throw ConfigError("idx source needs idx_images and idx_labels");
  if (data.labels_per_client < 1)
    throw ConfigError("labels_per_client must be >= 1");
  if (!(data.test_fraction >= 0 && data.test_fraction < 1))
    throw ConfigError("test_fraction must lie in [0, 1)");
  engine.Validate();
}

ExperimentConfig ProfileDefaults(const std::string& profile) {
  ExperimentConfig cfg;
  cfg.profile = profile;
  EngineConfig& e = cfg.engine;
  if (profile == "mlr") {
    e.model.kind = ModelKind::kMlr;
    e.privacy.clip_c = 3.0;
    e.radio.tau_max_s = 0.01;
    e.mu = 0.13;
    e.lsmooth = 0.43;
  } else if (profile == "mlp") {
    e.model.kind = ModelKind::kMlp;
    e.privacy.clip_c = 7.0;
    e.radio.tau_max_s = 0.1;
    e.mu = 0.27;
    e.lsmooth = 1.32;
    // 0.01 leaves eps_f above 1 at this (mu, L).
    e.free = FreeConstants{0.001, 0.001, 0.001, 0.001};
  } else {
    throw ConfigError("unknown profile '" + profile + "' (mlr or mlp)");
  }
  e.privacy.delta_q_target = 1e-3;
  return cfg;
}

ExperimentConfig ParseConfigIni(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ptree_error& err) {
    throw ParseError(std::string("config: ") + err.what());
  }
  return FromTree(tree);
}

ExperimentConfig ParseConfigJson(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_json(in, tree);
  } catch (const pt::ptree_error& err) {
    throw ParseError(std::string("config: ") + err.what());
  }
  return FromTree(tree);
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const bool json =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? ParseConfigJson(ss.str()) : ParseConfigIni(ss.str());
}

std::string SerializeConfigIni(const ExperimentConfig& cfg) {
  std::ostringstream out;
  pt::write_ini(out, ToTree(cfg));
  return out.str();
}

std::string SerializeConfigJson(const ExperimentConfig& cfg) {
  std::ostringstream out;
  pt::write_json(out, ToTree(cfg));
  return out.str();
}

}  // namespace wpfl
