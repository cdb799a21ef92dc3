// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/encoder.hpp"

#include <cmath>
#include <cstring>

#include "json.hpp"
#include "pocketscreen/errors.hpp"
#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen {

int element_index(const std::string& element) {
  for (std::size_t i = 0; i < kElementVocab.size(); ++i)
    if (element == kElementVocab[i]) return static_cast<int>(i);
  return static_cast<int>(kElementVocab.size()) - 1;  // X
}

double LossParams::t() const { return std::exp(t_log); }

EncoderParams init_encoder(const EncoderSizes& sz, Rng& rng) {
  EncoderParams p;
  p.d_e = sz.d_e;
  p.K = sz.K;
  p.h = sz.h;
  p.D = sz.D;
  p.r_max = sz.r_max;
  p.rbf_width = sz.rbf_width;

  p.rbf_centers.resize(static_cast<std::size_t>(p.K));
  for (int k = 0; k < p.K; ++k)
    p.rbf_centers[k] = p.K > 1 ? p.r_max * k / (p.K - 1) : 0.0;

  auto fill_normal = [&rng](std::vector<double>& v, std::size_t n, double scale) {
    v.resize(n);
    for (double& x : v) x = scale * rng.normal();
  };
  int in = p.in_dim();
  fill_normal(p.element_table, kElementVocab.size() * p.d_e, 1.0);
  fill_normal(p.w1, static_cast<std::size_t>(p.h) * in, 1.0 / std::sqrt(in));
  p.b1.assign(static_cast<std::size_t>(p.h), 0.0);
  fill_normal(p.w2, static_cast<std::size_t>(p.D) * p.h, 1.0 / std::sqrt(p.h));
  p.b2.assign(static_cast<std::size_t>(p.D), 0.0);
  return p;
}

ModelParams init_model(const EncoderSizes& sz, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams m;
  m.pocket_encoder = init_encoder(sz, rng);
  m.ligand_encoder = init_encoder(sz, rng);
  m.adapter.projection.assign(static_cast<std::size_t>(sz.D) * sz.D, 0.0);
  for (int i = 0; i < sz.D; ++i)
    m.adapter.projection[static_cast<std::size_t>(i) * sz.D + i] = 1.0;
  m.adapter.bias.assign(static_cast<std::size_t>(sz.D), 0.0);
  return m;
}

Embedding encode(const EncoderParams& p, std::span<const Atom> atoms,
                 const Vec3& reference_center, EncodeCache* cache) {
  if (atoms.empty()) throw DataError("encode: empty atom list");
  const auto& ker = simd::kernels();
  std::size_t n = atoms.size();
  int in = p.in_dim();

  EncodeCache local;
  EncodeCache& c = cache ? *cache : local;
  c.n_atoms = n;
  c.elem_idx.resize(n);
  c.feats.assign(n * static_cast<std::size_t>(in), 0.0);
  c.hact.assign(n * static_cast<std::size_t>(p.h), 0.0);

  double inv_two_w2 = 1.0 / (2.0 * p.rbf_width * p.rbf_width);
  for (std::size_t a = 0; a < n; ++a) {
    int e = element_index(atoms[a].element);
    c.elem_idx[a] = e;
    double* f = &c.feats[a * in];
    std::memcpy(f, &p.element_table[static_cast<std::size_t>(e) * p.d_e],
                sizeof(double) * static_cast<std::size_t>(p.d_e));
    double d = dist(atoms[a].position, reference_center);
    for (int k = 0; k < p.K; ++k) {
      double dd = d - p.rbf_centers[k];
      f[p.d_e + k] = std::exp(-dd * dd * inv_two_w2);
    }
    double* ha = &c.hact[a * p.h];
    for (int j = 0; j < p.h; ++j) {
      double z = p.b1[j] + ker.dot(&p.w1[static_cast<std::size_t>(j) * in], f,
                                   static_cast<std::size_t>(in));
      ha[j] = std::tanh(z);
    }
  }

  c.pooled.assign(static_cast<std::size_t>(p.h), 0.0);
  double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < n; ++a)
    ker.axpy(inv_n, &c.hact[a * p.h], c.pooled.data(),
             static_cast<std::size_t>(p.h));

  c.y.resize(static_cast<std::size_t>(p.D));
  for (int i = 0; i < p.D; ++i)
    c.y[i] = p.b2[i] + ker.dot(&p.w2[static_cast<std::size_t>(i) * p.h],
                               c.pooled.data(), static_cast<std::size_t>(p.h));

  double n2 = ker.dot(c.y.data(), c.y.data(), c.y.size());
  if (!(n2 > 1e-24))
    throw NumericalError("encode: pre-normalization output has vanishing norm");
  c.inv_norm = 1.0 / std::sqrt(n2);
  c.emb.v.resize(c.y.size());
  for (std::size_t i = 0; i < c.y.size(); ++i) c.emb.v[i] = c.y[i] * c.inv_norm;
  return c.emb;
}

void encode_backward(const EncoderParams& p, const EncodeCache& c,
                     const std::vector<double>& d_emb, EncoderParams& g) {
  const auto& ker = simd::kernels();
  std::size_t D = static_cast<std::size_t>(p.D);
  if (d_emb.size() != D) throw ConfigError("encode_backward: d_emb size mismatch");

  // e = y / ||y||  =>  dy = (de - e (e . de)) * inv_norm
  double e_dot = ker.dot(c.emb.v.data(), d_emb.data(), D);
  std::vector<double> dy(D);
  for (std::size_t i = 0; i < D; ++i)
    dy[i] = (d_emb[i] - c.emb.v[i] * e_dot) * c.inv_norm;

  std::vector<double> dpooled(static_cast<std::size_t>(p.h), 0.0);
  for (int i = 0; i < p.D; ++i) {
    ker.axpy(dy[i], c.pooled.data(), &g.w2[static_cast<std::size_t>(i) * p.h],
             static_cast<std::size_t>(p.h));
    g.b2[i] += dy[i];
    ker.axpy(dy[i], &p.w2[static_cast<std::size_t>(i) * p.h], dpooled.data(),
             static_cast<std::size_t>(p.h));
  }

  int in = p.in_dim();
  double inv_n = 1.0 / static_cast<double>(c.n_atoms);
  std::vector<double> da1(static_cast<std::size_t>(p.h));
  std::vector<double> dfeat(static_cast<std::size_t>(in));
  for (std::size_t a = 0; a < c.n_atoms; ++a) {
    const double* ha = &c.hact[a * p.h];
    const double* f = &c.feats[a * in];
    for (int j = 0; j < p.h; ++j)
      da1[j] = dpooled[j] * inv_n * (1.0 - ha[j] * ha[j]);
    std::fill(dfeat.begin(), dfeat.end(), 0.0);
    for (int j = 0; j < p.h; ++j) {
      if (da1[j] == 0.0) continue;
      ker.axpy(da1[j], f, &g.w1[static_cast<std::size_t>(j) * in],
               static_cast<std::size_t>(in));
      g.b1[j] += da1[j];
      ker.axpy(da1[j], &p.w1[static_cast<std::size_t>(j) * in], dfeat.data(),
               static_cast<std::size_t>(in));
    }
    // Only the element-embedding slice of the feature vector is a parameter;
    // the RBF slice is a fixed function of geometry.
    ker.axpy(1.0, dfeat.data(),
             &g.element_table[static_cast<std::size_t>(c.elem_idx[a]) * p.d_e],
             static_cast<std::size_t>(p.d_e));
  }
}

namespace {

struct Block {
  const char* name;
  double* data;
  std::size_t n;
};

std::vector<Block> blocks_of(ModelParams& p) {
  EncoderParams& pe = p.pocket_encoder;
  EncoderParams& le = p.ligand_encoder;
  return {
      {"pocket.element_table", pe.element_table.data(), pe.element_table.size()},
      {"pocket.w1", pe.w1.data(), pe.w1.size()},
      {"pocket.b1", pe.b1.data(), pe.b1.size()},
      {"pocket.w2", pe.w2.data(), pe.w2.size()},
      {"pocket.b2", pe.b2.data(), pe.b2.size()},
      {"ligand.element_table", le.element_table.data(), le.element_table.size()},
      {"ligand.w1", le.w1.data(), le.w1.size()},
      {"ligand.b1", le.b1.data(), le.b1.size()},
      {"ligand.w2", le.w2.data(), le.w2.size()},
      {"ligand.b2", le.b2.data(), le.b2.size()},
      {"loss.t_log", &p.loss.t_log, 1},
      {"loss.b", &p.loss.b, 1},
      {"adapter.projection", p.adapter.projection.data(), p.adapter.projection.size()},
      {"adapter.bias", p.adapter.bias.data(), p.adapter.bias.size()},
  };
}

}  // namespace

void visit_params(ModelParams& p, const ParamVisitor& visit) {
  for (const Block& b : blocks_of(p)) visit(b.name, b.data, b.n);
}

std::size_t param_count(ModelParams& p) {
  std::size_t n = 0;
  visit_params(p, [&n](const char*, double*, std::size_t k) { n += k; });
  return n;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  fill_zero(z);
  return z;
}

void fill_zero(ModelParams& p) {
  visit_params(p, [](const char*, double* d, std::size_t n) {
    std::fill(d, d + n, 0.0);
  });
}

namespace {

nlohmann::json arch_json(const ModelParams& p) {
  const EncoderParams& e = p.pocket_encoder;
  nlohmann::json a;
  a["d_e"] = e.d_e;
  a["rbf_k"] = e.K;
  a["r_max"] = e.r_max;
  a["rbf_width"] = e.rbf_width;
  a["hidden"] = e.h;
  a["embed_dim"] = e.D;
  a["elements"] = kElementVocab;
  a["adapter_temperature"] = p.adapter.T;
  a["rbf_centers"] = e.rbf_centers;
  return a;
}

}  // namespace

std::string checkpoint_to_json(const ModelParams& params) {
  ModelParams& p = const_cast<ModelParams&>(params);  // visitation is read-only here
  nlohmann::json j;
  j["schema_version"] = 1;
  j["arch"] = arch_json(params);
  nlohmann::json& sect = j["params"] = nlohmann::json::object();
  visit_params(p, [&sect](const char* name, double* d, std::size_t n) {
    sect[name] = std::vector<double>(d, d + n);
  });
  return j.dump(1);
}

ModelParams checkpoint_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw ConfigError("checkpoint: unsupported schema version");
  const auto& a = j.at("arch");
  EncoderSizes sz;
  sz.d_e = a.at("d_e").get<int>();
  sz.K = a.at("rbf_k").get<int>();
  sz.h = a.at("hidden").get<int>();
  sz.D = a.at("embed_dim").get<int>();
  sz.r_max = a.at("r_max").get<double>();
  sz.rbf_width = a.at("rbf_width").get<double>();

  ModelParams p = init_model(sz, 0);
  p.adapter.T = a.at("adapter_temperature").get<double>();
  p.pocket_encoder.rbf_centers = a.at("rbf_centers").get<std::vector<double>>();
  p.ligand_encoder.rbf_centers = p.pocket_encoder.rbf_centers;
  if (p.pocket_encoder.rbf_centers.size() != static_cast<std::size_t>(sz.K))
    throw ConfigError("checkpoint: rbf_centers length mismatch");

  const auto& sect = j.at("params");
  visit_params(p, [&sect](const char* name, double* d, std::size_t n) {
    if (!sect.contains(name))
      throw ConfigError(std::string("checkpoint: missing section ") + name);
    const auto& v = sect.at(name);
    if (v.size() != n)
      throw ConfigError(std::string("checkpoint: shape mismatch in ") + name);
    for (std::size_t i = 0; i < n; ++i) d[i] = v[i].get<double>();
  });
  return p;
}

std::string checkpoint_hash(const ModelParams& p) {
  std::string s = checkpoint_to_json(p);
  return std::to_string(fnv1a64(s.data(), s.size()));
}

std::string encoder_loss_hash(const ModelParams& params) {
  ModelParams& p = const_cast<ModelParams&>(params);
  nlohmann::json sect;
  visit_params(p, [&sect](const char* name, double* d, std::size_t n) {
    std::string s(name);
    if (s.rfind("adapter", 0) == 0) return;
    sect[s] = std::vector<double>(d, d + n);
  });
  std::string s = sect.dump();
  return std::to_string(fnv1a64(s.data(), s.size()));
}

}  // namespace pocketscreen
