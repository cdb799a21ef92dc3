// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pocketscreen/geom.hpp"
#include "pocketscreen/moldata.hpp"
#include "pocketscreen/rng.hpp"

namespace pocketscreen {

// Element vocabulary of the encoders; anything else maps to X.
inline constexpr std::array<const char*, 7> kElementVocab = {"C", "N", "O", "S",
                                                            "H", "P", "X"};
int element_index(const std::string& element);

// Two-layer invariant set encoder. Per-atom features are the element embedding
// row concatenated with Gaussian RBFs of the distance to a reference center,
// so the embedding is invariant to rigid motions (applied jointly with the
// center) and to atom order (mean pooling).
struct EncoderParams {
  int d_e = 8;   // element embedding width
  int K = 16;    // RBF count
  int h = 64;    // hidden width
  int D = 64;    // output width
  double r_max = 12.0;
  double rbf_width = 1.0;

  std::vector<double> element_table;  // |vocab| x d_e, row-major
  std::vector<double> rbf_centers;    // K fixed values spanning [0, r_max]
  std::vector<double> w1;             // h x (d_e+K), row-major (row = output)
  std::vector<double> b1;             // h
  std::vector<double> w2;             // D x h, row-major
  std::vector<double> b2;             // D

  int in_dim() const { return d_e + K; }
};

struct LossParams {
  double t_log = 2.302585092994045684;  // log 10; temperature t = exp(t_log)
  double b = -10.0;

  double t() const;
};

struct AdapterParams {
  std::vector<double> projection;  // D x D, row-major; init identity
  std::vector<double> bias;        // D; init zero
  double T = 5.0;                  // attention softmax temperature, fixed
};

// All trainable state. The single pocket_encoder serves both the holo-pocket
// and the cavity encoding paths; cavity_encoder() returning the same object is
// the weight-sharing guarantee.
struct ModelParams {
  EncoderParams pocket_encoder;
  EncoderParams ligand_encoder;
  LossParams loss;
  AdapterParams adapter;

  const EncoderParams& cavity_encoder() const { return pocket_encoder; }
};

struct Embedding {
  std::vector<double> v;  // D values, L2-normalized
};

struct EncoderSizes {
  int d_e = 8, K = 16, h = 64, D = 64;
  double r_max = 12.0, rbf_width = 1.0;
};

EncoderParams init_encoder(const EncoderSizes& sz, Rng& rng);
ModelParams init_model(const EncoderSizes& sz, std::uint64_t seed);

// Intermediate activations retained for the backward pass.
struct EncodeCache {
  std::vector<int> elem_idx;    // per atom
  std::vector<double> feats;    // n x in_dim
  std::vector<double> hact;     // n x h, tanh applied
  std::vector<double> pooled;   // h
  std::vector<double> y;        // D, pre-normalization
  double inv_norm = 0.0;
  Embedding emb;
  std::size_t n_atoms = 0;
};

Embedding encode(const EncoderParams& p, std::span<const Atom> atoms,
                 const Vec3& reference_center, EncodeCache* cache = nullptr);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(embedding).
void encode_backward(const EncoderParams& p, const EncodeCache& cache,
                     const std::vector<double>& d_emb, EncoderParams& grads);

// Uniform parameter traversal in a fixed order; the flat concatenation of the
// visited blocks defines the optimizer state layout and the checkpoint schema.
using ParamVisitor = std::function<void(const char* name, double* data, std::size_t n)>;
void visit_params(ModelParams& p, const ParamVisitor& visit);
std::size_t param_count(ModelParams& p);

ModelParams zeros_like(const ModelParams& p);
void fill_zero(ModelParams& p);  // zeroes visited blocks only

// JSON checkpoint: {schema_version, arch, params}. Loading validates shapes.
std::string checkpoint_to_json(const ModelParams& p);
ModelParams checkpoint_from_json(const std::string& text);
std::string checkpoint_hash(const ModelParams& p);

// Fingerprint of the encoder + loss sections only; phase-2 training must keep
// this unchanged.
std::string encoder_loss_hash(const ModelParams& p);

}  // namespace pocketscreen
