#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ddmt/graph.hpp"
#include "ddmt/rng.hpp"
#include "testutil.hpp"

using namespace ddmt;

TEST_CASE("square function: value and gradient") {
  Graph g;
  const int x = g.parameter("x", Tensor::scalar(3.0));
  g.set_output(g.mul(x, x));
  const auto res = evaluate_and_backprop(g, {});
  CHECK(res.value.data[0] == doctest::Approx(9.0));
  CHECK(res.grads.at("x").data[0] == doctest::Approx(6.0));
}

TEST_CASE("sum gradient is all ones") {
  Rng rng(7);
  Graph g;
  const int x = g.parameter("x", Tensor::uniform(3, 5, 2.0, rng));
  g.set_output(g.sum(x));
  const auto res = evaluate_and_backprop(g, {});
  for (double v : res.grads.at("x").data) CHECK(v == 1.0);
}

static Graph random_mlp(Rng& rng, int in_dim, int hidden, int out_dim) {
  Graph g;
  const int x = g.input("x", 1, in_dim);
  const int w1 = g.parameter("w1", Tensor::uniform(in_dim, hidden, 0.7, rng));
  const int b1 = g.parameter("b1", Tensor::uniform(1, hidden, 0.5, rng));
  const int w2 = g.parameter("w2", Tensor::uniform(hidden, hidden, 0.7, rng));
  const int b2 = g.parameter("b2", Tensor::uniform(1, hidden, 0.5, rng));
  const int w3 = g.parameter("w3", Tensor::uniform(hidden, out_dim, 0.7, rng));
  const int b3 = g.parameter("b3", Tensor::uniform(1, out_dim, 0.5, rng));
  const int target = g.input("target", 1, out_dim);
  int h = g.relu(g.add_row(g.matmul(x, w1), b1));
  h = g.relu(g.add_row(g.matmul(h, w2), b2));
  h = g.add_row(g.matmul(h, w3), b3);
  g.set_output(g.mse(h, target));
  return g;
}

TEST_CASE("3-layer MLP gradients match central finite differences") {
  Rng rng(11);
  Graph g = random_mlp(rng, 4, 6, 3);
  NamedTensors inputs;
  inputs.emplace("x", Tensor::uniform(1, 4, 1.0, rng));
  inputs.emplace("target", Tensor::uniform(1, 3, 1.0, rng));
  CHECK(testutil::finite_diff_max_rel_err(g, inputs) < 1e-4);
}

TEST_CASE("gradients for every primitive match finite differences") {
  Rng rng(13);
  // One graph exercising matmul, matmul_nt, transpose, add, mul, scale,
  // add_row, relu, layer_norm, masked_softmax, sum and mse together.
  Graph g;
  const int a = g.parameter("a", Tensor::uniform(3, 4, 0.8, rng));
  const int b = g.parameter("b", Tensor::uniform(4, 3, 0.8, rng));
  const int gain = g.parameter("gain", Tensor::uniform(1, 3, 0.5, rng));
  const int bias = g.parameter("bias", Tensor::uniform(1, 3, 0.5, rng));
  const int mask = g.input("mask", 3, 3);

  const int prod = g.matmul(a, b);                      // 3x3
  const int sym = g.add(prod, g.transpose(prod));       // 3x3
  const int nt = g.matmul_nt(a, a);                     // 3x3
  const int mixed = g.add(g.mul(sym, nt), g.scale(nt, 0.3));
  const int normed = g.layer_norm(mixed, gain, bias, 1e-5);
  const int soft = g.masked_softmax(normed, mask);
  const int act = g.relu(g.add_row(soft, bias));
  g.set_output(g.add(g.sum(act), g.mse(soft, nt)));

  Tensor mask01(3, 3);
  mask01.at(0, 1) = 1.0;  // block one entry; rows keep visible columns
  mask01.at(2, 0) = 1.0;
  mask01.at(2, 2) = 1.0;
  NamedTensors inputs;
  inputs.emplace("mask", mask01);
  CHECK(testutil::finite_diff_max_rel_err(g, inputs) < 1e-4);
}

TEST_CASE("masked softmax: uniform logits give uniform weights") {
  Graph g;
  const int logits = g.input("logits", 1, 4);
  const int mask = g.input("mask", 1, 4);
  const int soft = g.masked_softmax(logits, mask);
  g.set_output(g.sum(soft));
  Workspace ws;
  NamedTensors in;
  in.emplace("logits", Tensor::full(1, 4, 1.7));
  in.emplace("mask", Tensor(1, 4));
  graph_forward(g, in, ws);
  for (double v : ws.val[soft].data) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("masked softmax: two-entry closed form") {
  Graph g;
  const int logits = g.input("logits", 1, 2);
  const int mask = g.input("mask", 1, 2);
  const int soft = g.masked_softmax(logits, mask);
  g.set_output(g.sum(soft));
  Workspace ws;
  NamedTensors in;
  in.emplace("logits", Tensor::row({0.0, std::log(2.0)}));
  in.emplace("mask", Tensor(1, 2));
  graph_forward(g, in, ws);
  CHECK(ws.val[soft].data[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(ws.val[soft].data[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("masked softmax excludes blocked columns") {
  Graph g;
  const int logits = g.input("logits", 1, 3);
  const int mask = g.input("mask", 1, 3);
  const int soft = g.masked_softmax(logits, mask);
  g.set_output(g.sum(soft));
  Workspace ws;
  NamedTensors in;
  in.emplace("logits", Tensor::row({5.0, 1.0, 2.0}));
  Tensor m(1, 3);
  m.data[0] = 1.0;
  in.emplace("mask", m);
  graph_forward(g, in, ws);
  // Direct softmax over the visible columns {1, 2}.
  const double e1 = std::exp(1.0), e2 = std::exp(2.0);
  CHECK(ws.val[soft].data[0] == 0.0);
  CHECK(ws.val[soft].data[1] == doctest::Approx(e1 / (e1 + e2)).epsilon(1e-12));
  CHECK(ws.val[soft].data[2] == doctest::Approx(e2 / (e1 + e2)).epsilon(1e-12));
}

TEST_CASE("masked softmax: rows sum to one and all-false mask equals plain softmax") {
  Rng rng(17);
  Graph g;
  const int logits = g.input("logits", 6, 6);
  const int mask = g.input("mask", 6, 6);
  const int soft = g.masked_softmax(logits, mask);
  g.set_output(g.sum(soft));

  const Tensor x = Tensor::uniform(6, 6, 3.0, rng);
  NamedTensors in;
  in.emplace("logits", x);
  in.emplace("mask", Tensor(6, 6));
  Workspace ws;
  graph_forward(g, in, ws);
  const Tensor unmasked = ws.val[soft];

  for (int r = 0; r < 6; ++r) {
    double s = 0.0;
    for (int c = 0; c < 6; ++c) s += unmasked.at(r, c);
    CHECK(std::fabs(s - 1.0) < 1e-12);
  }

  // Plain softmax computed directly.
  for (int r = 0; r < 6; ++r) {
    double mx = x.at(r, 0);
    for (int c = 1; c < 6; ++c) mx = std::max(mx, x.at(r, c));
    double denom = 0.0;
    for (int c = 0; c < 6; ++c) denom += std::exp(x.at(r, c) - mx);
    for (int c = 0; c < 6; ++c) {
      CHECK(unmasked.at(r, c) == doctest::Approx(std::exp(x.at(r, c) - mx) / denom).epsilon(1e-14));
    }
  }
}

TEST_CASE("masked softmax rejects a fully masked row") {
  Graph g;
  const int logits = g.input("logits", 2, 2);
  const int mask = g.input("mask", 2, 2);
  g.set_output(g.sum(g.masked_softmax(logits, mask)));
  NamedTensors in;
  in.emplace("logits", Tensor::full(2, 2, 1.0));
  Tensor m(2, 2);
  m.at(1, 0) = 1.0;
  m.at(1, 1) = 1.0;
  in.emplace("mask", m);
  Workspace ws;
  CHECK_THROWS_AS(graph_forward(g, in, ws), std::invalid_argument);
}

TEST_CASE("layer norm closed forms") {
  Graph g;
  const int x = g.input("x", 1, 3);
  const int gain = g.constant(Tensor::full(1, 3, 1.0));
  const int bias = g.constant(Tensor(1, 3));
  const int ln = g.layer_norm(x, gain, bias, 1e-5);
  g.set_output(g.sum(ln));
  Workspace ws;

  SUBCASE("constant vector maps to zeros") {
    NamedTensors in;
    in.emplace("x", Tensor::full(1, 3, 4.2));
    graph_forward(g, in, ws);
    for (double v : ws.val[ln].data) CHECK(v == doctest::Approx(0.0));
  }

  SUBCASE("x = [1,2,3] against the direct formula") {
    NamedTensors in;
    in.emplace("x", Tensor::row({1.0, 2.0, 3.0}));
    graph_forward(g, in, ws);
    const double var = 2.0 / 3.0;  // population variance
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    CHECK(ws.val[ln].data[0] == doctest::Approx(-inv).epsilon(1e-12));
    CHECK(ws.val[ln].data[1] == doctest::Approx(0.0));
    CHECK(ws.val[ln].data[2] == doctest::Approx(inv).epsilon(1e-12));
    CHECK(ws.val[ln].data[2] == doctest::Approx(1.2247).epsilon(1e-3));
  }
}

TEST_CASE("layer norm of [1,-1] with tiny eps is the identity") {
  Graph g;
  const int x = g.input("x", 1, 2);
  const int gain = g.constant(Tensor::full(1, 2, 1.0));
  const int bias = g.constant(Tensor(1, 2));
  const int ln = g.layer_norm(x, gain, bias, 1e-14);
  g.set_output(g.sum(ln));
  Workspace ws;
  NamedTensors in;
  in.emplace("x", Tensor::row({1.0, -1.0}));
  graph_forward(g, in, ws);
  CHECK(ws.val[ln].data[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ws.val[ln].data[1] == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("layer norm: normalized rows have zero mean and variance at most one") {
  Rng rng(23);
  Graph g;
  const int x = g.input("x", 8, 16);
  const int gain = g.constant(Tensor::full(1, 16, 1.0));
  const int bias = g.constant(Tensor(1, 16));
  const int ln = g.layer_norm(x, gain, bias, 1e-5);
  g.set_output(g.sum(ln));
  Workspace ws;
  NamedTensors in;
  in.emplace("x", Tensor::uniform(8, 16, 5.0, rng));
  graph_forward(g, in, ws);
  const Tensor& y = ws.val[ln];
  for (int r = 0; r < 8; ++r) {
    double mean = 0.0;
    for (int c = 0; c < 16; ++c) mean += y.at(r, c);
    mean /= 16.0;
    double var = 0.0;
    for (int c = 0; c < 16; ++c) var += (y.at(r, c) - mean) * (y.at(r, c) - mean);
    var /= 16.0;
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(var <= 1.0 + 1e-12);
  }
}

TEST_CASE("sgd step arithmetic") {
  NamedTensors params, grads;
  params.emplace("p", Tensor::scalar(1.0));
  grads.emplace("p", Tensor::scalar(2.0));
  sgd_step(params, grads, 0.5);
  CHECK(params.at("p").data[0] == doctest::Approx(0.0));

  SUBCASE("zero gradient is a fixed point") {
    NamedTensors p2, g2;
    p2.emplace("w", Tensor::row({1.0, -2.0, 3.0}));
    g2.emplace("w", Tensor(1, 3));
    const auto before = p2.at("w").data;
    sgd_step(p2, g2, 0.1);
    CHECK(p2.at("w").data == before);
  }

  SUBCASE("vector update") {
    NamedTensors p2, g2;
    p2.emplace("w", Tensor::row({1.0, 1.0}));
    g2.emplace("w", Tensor::row({10.0, -10.0}));
    sgd_step(p2, g2, 1e-4);
    CHECK(p2.at("w").data[0] == doctest::Approx(0.999));
    CHECK(p2.at("w").data[1] == doctest::Approx(1.001));
  }
}

TEST_CASE("sgd step rejects mismatched names and shapes") {
  NamedTensors params, grads;
  params.emplace("p", Tensor::scalar(1.0));
  grads.emplace("q", Tensor::scalar(1.0));
  CHECK_THROWS_AS(sgd_step(params, grads, 0.1), std::invalid_argument);

  NamedTensors g2;
  g2.emplace("p", Tensor(1, 2));
  CHECK_THROWS_AS(sgd_step(params, g2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(params, params, 0.0), std::invalid_argument);
}

TEST_CASE("repeated evaluation is bit-identical") {
  Rng rng(31);
  Graph g = random_mlp(rng, 5, 7, 2);
  NamedTensors inputs;
  inputs.emplace("x", Tensor::uniform(1, 5, 1.0, rng));
  inputs.emplace("target", Tensor::uniform(1, 2, 1.0, rng));
  const auto r1 = evaluate_and_backprop(g, inputs);
  const auto r2 = evaluate_and_backprop(g, inputs);
  CHECK(r1.value.data == r2.value.data);
  for (const auto& [name, t] : r1.grads) CHECK(t.data == r2.grads.at(name).data);
}

TEST_CASE("graph rejects invalid uses") {
  SUBCASE("non-scalar output with gradients requested") {
    Graph g;
    const int x = g.parameter("x", Tensor::full(2, 2, 1.0));
    g.set_output(g.relu(x));
    CHECK_THROWS_AS(evaluate_and_backprop(g, {}), std::invalid_argument);
  }

  SUBCASE("input shape mismatch names the node") {
    Graph g;
    const int x = g.input("x", 2, 2);
    g.set_output(g.sum(x));
    NamedTensors in;
    in.emplace("x", Tensor(3, 2));
    try {
      evaluate_and_backprop(g, in, false);
      FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("node 0") != std::string::npos);
    }
  }

  SUBCASE("mismatched matmul shapes are rejected at build time") {
    Graph g;
    const int a = g.parameter("a", Tensor(2, 3));
    const int b = g.parameter("b", Tensor(2, 3));
    CHECK_THROWS_AS(g.matmul(a, b), std::invalid_argument);
  }

  SUBCASE("unused parameter is rejected") {
    Graph g;
    const int x = g.parameter("x", Tensor::scalar(1.0));
    g.parameter("dangling", Tensor::scalar(2.0));
    g.set_output(g.mul(x, x));
    CHECK_THROWS_AS(evaluate_and_backprop(g, {}), std::invalid_argument);
  }
}
