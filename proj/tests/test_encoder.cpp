// SPDX-License-Identifier: Apache-2.0
//
// Set-encoder invariances, analytic gradients vs finite differences,
// optimizer behavior, and checkpoint round-trips.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pocketscreen/adam.hpp"
#include "pocketscreen/encoder.hpp"
#include "pocketscreen/errors.hpp"
#include "pocketscreen/geom.hpp"
#include "pocketscreen/rng.hpp"

using namespace pocketscreen;

namespace {

std::vector<Atom> random_atoms(Rng& rng, std::size_t n) {
  const char* elems[] = {"C", "N", "O", "S", "H", "P", "X"};
  std::vector<Atom> atoms(n);
  for (auto& a : atoms) {
    a.element = elems[rng.below(7)];
    a.position = {rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-6, 6)};
  }
  return atoms;
}

Mat3 rotation_about_axes(double ax, double ay, double az) {
  double ca = std::cos(ax), sa = std::sin(ax);
  double cb = std::cos(ay), sb = std::sin(ay);
  double cc = std::cos(az), sc = std::sin(az);
  Mat3 rx, ry, rz;
  rx = Mat3{{1, 0, 0, 0, ca, -sa, 0, sa, ca}};
  ry = Mat3{{cb, 0, sb, 0, 1, 0, -sb, 0, cb}};
  rz = Mat3{{cc, -sc, 0, sc, cc, 0, 0, 0, 1}};
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double ryz = 0;
      for (int k = 0; k < 3; ++k) {
        double rv = 0;
        for (int l = 0; l < 3; ++l) rv += ry.m[3 * k + l] * rz.m[3 * l + j];
        ryz += rx.m[3 * i + k] * rv;
      }
      out.m[3 * i + j] = ryz;
    }
  return out;
}

double norm_of(const Embedding& e) {
  double s = 0;
  for (double v : e.v) s += v * v;
  return std::sqrt(s);
}

double max_abs_diff(const Embedding& a, const Embedding& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace

TEST_CASE("embeddings are unit-norm") {
  Rng rng(1);
  ModelParams p = init_model(EncoderSizes{}, 7);
  for (int rep = 0; rep < 20; ++rep) {
    auto atoms = random_atoms(rng, 1 + rng.below(40));
    Embedding e = encode(p.pocket_encoder, atoms, centroid(atoms));
    CHECK(std::abs(norm_of(e) - 1.0) <= 1e-12);
  }
}

TEST_CASE("encoding is invariant to atom order") {
  Rng rng(2);
  ModelParams p = init_model(EncoderSizes{}, 7);
  auto atoms = random_atoms(rng, 25);
  Vec3 c = centroid(atoms);
  Embedding base = encode(p.pocket_encoder, atoms, c);
  for (int rep = 0; rep < 10; ++rep) {
    auto shuffled = atoms;
    rng.shuffle(shuffled);
    Embedding e = encode(p.pocket_encoder, shuffled, c);
    CHECK(max_abs_diff(base, e) <= 1e-12);
  }
}

TEST_CASE("encoding is invariant to rigid motions of atoms and center") {
  Rng rng(3);
  ModelParams p = init_model(EncoderSizes{}, 7);
  auto atoms = random_atoms(rng, 30);
  Vec3 c = centroid(atoms);
  Embedding base = encode(p.pocket_encoder, atoms, c);
  for (int rep = 0; rep < 25; ++rep) {
    Mat3 r = rotation_about_axes(rng.uniform(0, 6.28), rng.uniform(0, 6.28),
                                 rng.uniform(0, 6.28));
    Vec3 t{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30)};
    auto moved = atoms;
    for (auto& a : moved) a.position = r.apply(a.position) + t;
    Embedding e = encode(p.pocket_encoder, moved, r.apply(c) + t);
    CHECK(max_abs_diff(base, e) <= 1e-6);
  }
}

TEST_CASE("encode rejects empty input and init is seed-deterministic") {
  ModelParams p = init_model(EncoderSizes{}, 7);
  CHECK_THROWS_AS(encode(p.pocket_encoder, std::span<const Atom>{}, Vec3{}),
                  DataError);

  ModelParams q = init_model(EncoderSizes{}, 7);
  CHECK(checkpoint_hash(p) == checkpoint_hash(q));
  ModelParams r = init_model(EncoderSizes{}, 8);
  CHECK(checkpoint_hash(p) != checkpoint_hash(r));
}

TEST_CASE("the cavity encoder is the pocket encoder") {
  ModelParams p = init_model(EncoderSizes{}, 1);
  CHECK(&p.cavity_encoder() == &p.pocket_encoder);
}

TEST_CASE("encode_backward matches finite differences") {
  // Scalar probe loss: dot(embedding, u) for a fixed direction u.
  Rng rng(11);
  ModelParams p = init_model(EncoderSizes{}, 13);
  auto atoms = random_atoms(rng, 9);
  Vec3 c = centroid(atoms);
  std::vector<double> u(static_cast<std::size_t>(p.pocket_encoder.D));
  for (auto& x : u) x = rng.uniform(-1, 1);

  auto loss_at = [&](const EncoderParams& enc) {
    Embedding e = encode(enc, atoms, c);
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += e.v[i] * u[i];
    return s;
  };

  EncodeCache cache;
  encode(p.pocket_encoder, atoms, c, &cache);
  EncoderParams grads = p.pocket_encoder;
  auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
  zero(grads.element_table);
  zero(grads.w1);
  zero(grads.b1);
  zero(grads.w2);
  zero(grads.b2);
  encode_backward(p.pocket_encoder, cache, u, grads);

  struct Probe {
    std::vector<double> EncoderParams::*block;
    const char* name;
  };
  const Probe probes[] = {{&EncoderParams::element_table, "element_table"},
                          {&EncoderParams::w1, "w1"},
                          {&EncoderParams::b1, "b1"},
                          {&EncoderParams::w2, "w2"},
                          {&EncoderParams::b2, "b2"}};
  const double h = 1e-6;
  for (const Probe& probe : probes) {
    INFO(probe.name);
    std::vector<double>& block = p.pocket_encoder.*(probe.block);
    const std::vector<double>& g = grads.*(probe.block);
    for (int rep = 0; rep < 12; ++rep) {
      std::size_t i = rng.below(block.size());
      double saved = block[i];
      block[i] = saved + h;
      double up = loss_at(p.pocket_encoder);
      block[i] = saved - h;
      double dn = loss_at(p.pocket_encoder);
      block[i] = saved;
      double fd = (up - dn) / (2 * h);
      double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-5});
      CHECK(std::abs(fd - g[i]) / denom <= 1e-4);
    }
  }
}

TEST_CASE("adam takes the textbook first step") {
  ModelParams p = init_model(EncoderSizes{}, 3);
  double before = p.loss.b;
  ModelParams g = zeros_like(p);
  // Unit gradient on a single scalar parameter.
  g.loss.b = 1.0;
  AdamState st;
  AdamConfig cfg;
  adam_step(p, g, st, cfg, {"loss."});
  // Bias-corrected first step: -lr * 1 / (1 + eps).
  double expect = before - cfg.lr / (1.0 + cfg.eps);
  CHECK(p.loss.b == expect);
  CHECK(p.loss.b == doctest::Approx(before - 0.000999999990000000099).epsilon(1e-15));
}

TEST_CASE("adam leaves non-trainable blocks bit-identical") {
  ModelParams p = init_model(EncoderSizes{}, 4);
  std::string enc_before = encoder_loss_hash(p);
  ModelParams g = zeros_like(p);
  // Nonzero gradients everywhere; only adapter blocks may change.
  visit_params(g, [](const char*, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) data[i] = 0.25 + 0.001 * i;
  });
  AdamState st;
  AdamConfig cfg;
  adam_step(p, g, st, cfg, {"adapter."});
  CHECK(encoder_loss_hash(p) == enc_before);

  // And with zero gradients nothing at all moves.
  ModelParams q = init_model(EncoderSizes{}, 4);
  std::string full_before = checkpoint_hash(q);
  ModelParams zg = zeros_like(q);
  AdamState st2;
  adam_step(q, zg, st2, cfg);
  CHECK(checkpoint_hash(q) == full_before);
}

TEST_CASE("checkpoints round-trip through JSON") {
  ModelParams p = init_model(EncoderSizes{}, 99);
  std::string text = checkpoint_to_json(p);
  ModelParams back = checkpoint_from_json(text);
  CHECK(checkpoint_hash(back) == checkpoint_hash(p));
  CHECK(checkpoint_to_json(back) == text);

  // Tampering with a shape must be rejected.
  std::string bad = text;
  auto pos = bad.find("\"hidden\": 64");
  REQUIRE(pos != std::string::npos);
  bad.replace(pos, 12, "\"hidden\": 63");
  CHECK_THROWS_AS(checkpoint_from_json(bad), ConfigError);
  CHECK_THROWS_AS(checkpoint_from_json("{not json"), ParseError);
}

TEST_CASE("visit_params order starts with the pocket encoder and is stable") {
  ModelParams p = init_model(EncoderSizes{}, 5);
  std::vector<std::string> names;
  visit_params(p, [&](const char* name, double*, std::size_t) {
    names.push_back(name);
  });
  REQUIRE(names.size() >= 4);
  CHECK(names.front() == "pocket.element_table");
  CHECK(names[names.size() - 4] == "loss.t_log");
  CHECK(names[names.size() - 3] == "loss.b");
  CHECK(names[names.size() - 2] == "adapter.projection");
  CHECK(names.back() == "adapter.bias");
}
