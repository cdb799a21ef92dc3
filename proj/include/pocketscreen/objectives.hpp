// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pocketscreen/adam.hpp"
#include "pocketscreen/encoder.hpp"
#include "pocketscreen/pocketlabel.hpp"

namespace pocketscreen {

// One thing to encode: an atom cloud plus the reference center the encoder
// measures distances against (pocket/cavity center, or ligand centroid).
struct EncItem {
  std::vector<Atom> atoms;
  Vec3 center;
};

struct ObjectiveConfig {
  double lambda = 1.0;           // KL weight in the aggregation objective
  int batch_size = 48;
  double complex_mix_ratio = 0.5;  // fraction of complex-origin samples, phase 2
  int max_epochs = 200;
  int patience = 10;
  std::uint64_t seed = 1;
  double lr = 1e-3;
};

// Generalized pairwise-sigmoid loss softplus(-z * (t*dot + b)), z in {+1,-1}.
double pair_loss(double dot, int z, const LossParams& lp);
struct PairGrad {
  double d_dot = 0, d_t_log = 0, d_b = 0;
};
double pair_loss_grad(double dot, int z, const LossParams& lp, PairGrad& g);

// ---- Alignment objective (phase 1) ------------------------------------------

// Batch at the embedding level; exposed so the loss assembly can be tested
// against closed forms without running the encoders.
struct AlignEmbBatch {
  std::vector<Embedding> ligand, holo;            // size B each
  std::vector<std::optional<Embedding>> positive; // positive cavity, if any
  std::vector<std::vector<Embedding>> negatives;  // hard-negative cavities
};

struct AlignEmbGrads {
  std::vector<std::vector<double>> d_ligand, d_holo, d_positive;
  std::vector<std::vector<std::vector<double>>> d_negatives;
  double d_t_log = 0, d_b = 0;
};

// Mean over: the BxB (holo, ligand) grid; the PxP (positive cavity, ligand)
// and (positive cavity, holo) grids restricted to complexes owning a positive;
// and two z=-1 terms per hard negative, against the owning complex's ligand
// and holo pocket. Diagonals carry z=+1, everything else z=-1.
double align_loss_core(const AlignEmbBatch& batch, const LossParams& lp,
                       AlignEmbGrads* grads = nullptr);

struct AlignBatchItem {
  const EncItem* ligand = nullptr;
  const EncItem* holo = nullptr;
  const EncItem* positive = nullptr;  // optional
  std::vector<const EncItem*> negatives;
};

// Encodes every distinct item once, assembles align_loss_core, and backprops
// into the encoder/loss parameter gradients when `grads` is given.
double align_loss(const std::vector<AlignBatchItem>& batch, const ModelParams& params,
                  ModelParams* grads = nullptr);

// ---- Adapter objective (phase 2) --------------------------------------------

enum class SupervisionKind { one_hot, soft };
struct SupervisionTarget {
  std::vector<double> s;  // simplex over the cavity list
  SupervisionKind kind = SupervisionKind::one_hot;
};

enum class ExampleOrigin { complex_origin, activity_origin };

struct AggExample {
  Embedding ligand;                         // frozen phase-1 embedding
  const std::vector<Embedding>* cavities;   // frozen cavity embeddings
  SupervisionTarget supervision;
  ExampleOrigin origin = ExampleOrigin::complex_origin;
};

struct Attention {
  std::vector<double> weights;     // softmax(dot(query, cavity)/T)
  std::vector<double> aggregated;  // sum_s weights[s] * cavity[s]; not renormalized
};
Attention attention(const std::vector<double>& query,
                    const std::vector<Embedding>& cavities, const AdapterParams& ap);

// projection * e + bias; identity at initialization.
std::vector<double> project_ligand(const Embedding& e, const AdapterParams& ap);

// sum_i s_i log(s_i / a_i); zero-mass target entries contribute nothing.
double kl_loss(const SupervisionTarget& s, const std::vector<double>& a);

// softmax over cavities of the frozen model's score t*dot + b.
SupervisionTarget soft_labels_from_frozen_model(const Embedding& ligand,
                                                const std::vector<Embedding>& cavities,
                                                const LossParams& lp);

// L_CL' (BxB grid over aggregated-cavity/projected-ligand pairs, shared t,b)
// plus lambda * mean KL between supervision and attention weights. Encoder
// inputs are frozen embeddings, so only the adapter and t,b receive nonzero
// gradients.
double agg_loss(const std::vector<AggExample>& batch, const ModelParams& params,
                const ObjectiveConfig& cfg, ModelParams* grads = nullptr);

// ---- Training loops ----------------------------------------------------------

struct CavityEntry {
  CavityLabel label = CavityLabel::ignore;
  double iou = 0.0;
  long size_score = 0;
  int rank = 0;        // detector order
  bool usable = false; // residue-level pocket non-empty (encodable as training pair)
  EncItem crop;
  Vec3 center;
};

struct TargetBundle {
  std::string target_id;
  EncItem holo_crop;
  std::vector<CavityEntry> cavities;
};

struct ComplexExample {
  int bundle = 0;  // index into AlignDataset::bundles
  EncItem ligand;
};

struct AlignDataset {
  std::vector<TargetBundle> bundles;
  std::vector<ComplexExample> train, val;
};

struct EpochStats {
  double train_loss = 0, val_loss = 0;
};
struct TrainTrace {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;    // 1-based; -1 if no epoch ran
  double best_loss = 0;   // best monitored loss: validation in phase 1, training in phase 2
};

// Phase 1: seeded shuffling, per-step positive/negative cavity resampling,
// Adam on encoders + t,b; early stopping on validation loss; the returned
// params are the best-validation snapshot.
TrainTrace train_align(const AlignDataset& data, ModelParams& params,
                       const ObjectiveConfig& cfg, const LabelConfig& label_cfg);

struct AdapterExample {
  Embedding ligand;
  int bundle = 0;                // index into AdapterDataset::bundle_cavities
  SupervisionTarget one_hot;     // complex-origin supervision
  SupervisionTarget soft;        // activity-origin supervision
};

struct AdapterDataset {
  std::vector<std::vector<Embedding>> bundle_cavities;
  std::vector<AdapterExample> train, val;
};

// Phase 2: encoders and t,b frozen (Adam restricted to adapter blocks); each
// batch slot draws complex-origin supervision with probability
// complex_mix_ratio, activity-origin otherwise. Runs to a training-loss
// plateau (patience epochs without improvement) and returns the final
// parameters; per-epoch validation loss, computed with complex-origin
// supervision, is recorded in the trace.
TrainTrace train_adapter(const AdapterDataset& data, ModelParams& params,
                         const ObjectiveConfig& cfg);

}  // namespace pocketscreen
