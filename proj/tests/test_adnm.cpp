#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ddmt/adnm.hpp"
#include "ddmt/rng.hpp"
#include "ddmt/synthetic.hpp"
#include "testutil.hpp"

using namespace ddmt;

namespace {

// Independent Pearson implementation for oracle checks.
double ref_pearson(const std::vector<double>& u, const std::vector<double>& v) {
  const int n = static_cast<int>(u.size());
  double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double suu = 0, svv = 0, suv = 0;
  for (int i = 0; i < n; ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    svv += (v[i] - mv) * (v[i] - mv);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  if (suu == 0 || svv == 0) return 0.0;
  return suv / std::sqrt(suu * svv);
}

std::vector<double> window_row(const Tensor& w, int i) {
  std::vector<double> r(w.cols);
  for (int c = 0; c < w.cols; ++c) r[c] = w.at(i, c);
  return r;
}

// Exhaustive reference mask builder: checks every neighbor distance directly
// instead of expanding incrementally.
MaskMatrix ref_build_mask(const std::vector<double>& errors, const Tensor& window, double ratio,
                          double rho, int cap) {
  const int W = static_cast<int>(errors.size());
  MaskMatrix m = MaskMatrix::all_visible(W);
  if (ratio == 0.0) return m;
  const int n_seeds = static_cast<int>(std::ceil(ratio * W - 1e-9));

  // Seeds: the n largest errors, ties to the lower index.
  std::vector<int> idx(W);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return errors[a] != errors[b] ? errors[a] > errors[b] : a < b;
  });
  m.seeds.assign(idx.begin(), idx.begin() + n_seeds);
  std::sort(m.seeds.begin(), m.seeds.end());

  for (int i : m.seeds) {
    int scale;
    if (window.cols < 2) {
      scale = cap;
    } else {
      // reach = largest k such that all of 1..k pass on that side
      int left = 0;
      for (int k = 1; k <= cap && i - k >= 0; ++k) {
        bool all = true;
        for (int j = 1; j <= k; ++j) {
          if (!(ref_pearson(window_row(window, i), window_row(window, i - j)) > rho)) all = false;
        }
        if (all) left = k;
      }
      int right = 0;
      for (int k = 1; k <= cap && i + k < W; ++k) {
        bool all = true;
        for (int j = 1; j <= k; ++j) {
          if (!(ref_pearson(window_row(window, i), window_row(window, i + j)) > rho)) all = false;
        }
        if (all) right = k;
      }
      scale = std::max(left, right);
    }
    m.scales[i] = scale;
    for (int j = 0; j < W; ++j) {
      if (std::abs(j - i) <= scale) m.blocked.set(i, j, true);
    }
    bool full = true;
    for (int j = 0; j < W; ++j) {
      if (!m.blocked.at(i, j)) full = false;
    }
    if (full) m.blocked.set(i, (W - 1 - i) > i ? W - 1 : 0, false);
  }
  return m;
}

WindowBatch zero_batch(int n_windows, int W, int C) {
  WindowBatch b;
  b.window = W;
  b.channels = C;
  for (int w = 0; w < n_windows; ++w) {
    b.windows.emplace_back(W, C);
    b.offsets.push_back(w * W);
  }
  return b;
}

}  // namespace

TEST_CASE("autoencoder drives constant-zero data to zero error") {
  const auto batch = zero_batch(45, 100, 1);
  const auto params = train_autoencoder(batch, {}, 3);
  for (double e : reconstruction_error(params, batch.windows[0])) CHECK(e < 1e-8);
}

TEST_CASE("autoencoder training is deterministic") {
  auto s = generate_synthetic(3, 600, 0.0, {}, 21);
  const auto batch = slice_windows(s, 50, SliceMode::kTrain);
  const auto a = train_autoencoder(batch, {}, 9);
  const auto b = train_autoencoder(batch, {}, 9);
  CHECK(a.enc_w.data == b.enc_w.data);
  CHECK(a.enc_b.data == b.enc_b.data);
  CHECK(a.dec_w.data == b.dec_w.data);
  CHECK(a.dec_b.data == b.dec_b.data);
}

TEST_CASE("autoencoder training reduces dataset mse on sinusoid data") {
  auto s = generate_synthetic(4, 1000, 0.0, {}, 33);
  fit_and_normalize(s, {});
  const auto batch = slice_windows(s, 100, SliceMode::kTrain);
  AETrainOptions init_only;
  init_only.epochs = 0;
  const auto initial = train_autoencoder(batch, init_only, 17);
  const auto trained = train_autoencoder(batch, {}, 17);
  CHECK(ae_dataset_mse(trained, batch) < ae_dataset_mse(initial, batch));
}

TEST_CASE("reconstruction error closed forms") {
  // h = 1 identity on duplicated channels: enc picks channel 0, dec copies it.
  AEParams p;
  p.channels = 2;
  p.hidden = 1;
  p.enc_w = Tensor(2, 1, {1.0, 0.0});
  p.enc_b = Tensor(1, 1);
  p.dec_w = Tensor(1, 2, {1.0, 1.0});
  p.dec_b = Tensor(1, 2);

  Tensor window(3, 2);
  for (int i = 0; i < 3; ++i) {
    window.at(i, 0) = 1.0 + i;
    window.at(i, 1) = 1.0 + i;
  }

  SUBCASE("perfect reconstruction gives zeros") {
    for (double e : reconstruction_error(p, window)) CHECK(e == doctest::Approx(0.0));
  }

  SUBCASE("one channel off by d at one timestamp") {
    const double d = 0.7;
    window.at(1, 1) += d;
    const auto err = reconstruction_error(p, window);
    CHECK(err[0] == doctest::Approx(0.0));
    CHECK(err[1] == doctest::Approx(d * d / 2.0));
    CHECK(err[2] == doctest::Approx(0.0));
  }
}

TEST_CASE("reconstruction error matches a direct recomputation") {
  Rng rng(55);
  AEParams p;
  p.channels = 4;
  p.hidden = 2;
  p.enc_w = Tensor::uniform(4, 2, 0.8, rng);
  p.enc_b = Tensor::uniform(1, 2, 0.5, rng);
  p.dec_w = Tensor::uniform(2, 4, 0.8, rng);
  p.dec_b = Tensor::uniform(1, 4, 0.5, rng);
  const Tensor window = Tensor::uniform(6, 4, 1.5, rng);

  const auto err = reconstruction_error(p, window);
  for (int i = 0; i < 6; ++i) {
    // Recompute e_i from the formula.
    std::vector<double> h(2);
    for (int j = 0; j < 2; ++j) {
      double s = p.enc_b.data[j];
      for (int c = 0; c < 4; ++c) s += window.at(i, c) * p.enc_w.at(c, j);
      h[j] = std::max(0.0, s);
    }
    double e = 0.0;
    for (int c = 0; c < 4; ++c) {
      double xh = p.dec_b.data[c];
      for (int j = 0; j < 2; ++j) xh += h[j] * p.dec_w.at(j, c);
      e += (window.at(i, c) - xh) * (window.at(i, c) - xh);
    }
    CHECK(err[i] == doctest::Approx(e / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("pearson closed forms") {
  std::vector<double> u{1.0, 2.0, 3.0};

  SUBCASE("identical vectors") {
    CHECK(pearson(u.data(), u.data(), 3) == doctest::Approx(1.0));
  }

  SUBCASE("anti-correlated") {
    std::vector<double> v{4.0, 3.0, 2.0};  // -u + 5
    CHECK(pearson(u.data(), v.data(), 3) == doctest::Approx(-1.0));
  }

  SUBCASE("known value") {
    std::vector<double> v{1.0, 2.0, 4.0};
    CHECK(pearson(u.data(), v.data(), 3) == doctest::Approx(std::sqrt(27.0 / 28.0)).epsilon(1e-12));
    CHECK(pearson(u.data(), v.data(), 3) == doctest::Approx(0.9820).epsilon(1e-4));
  }

  SUBCASE("zero variance returns 0") {
    std::vector<double> v{2.0, 2.0, 2.0};
    CHECK(pearson(u.data(), v.data(), 3) == 0.0);
    CHECK(pearson(v.data(), v.data(), 3) == 0.0);
  }
}

TEST_CASE("build_mask basics") {
  SUBCASE("zero ratio leaves vanilla attention") {
    Tensor window(8, 3);
    const auto m = build_mask(std::vector<double>(8, 0.1), window, 0.0, 0.6, 5);
    CHECK_FALSE(m.blocked.any());
    CHECK(m.seeds.empty());
  }

  SUBCASE("seed count is the ceiling of ratio * W") {
    Rng rng(5);
    Tensor window = Tensor::uniform(100, 3, 1.0, rng);
    std::vector<double> errors(100);
    for (auto& e : errors) e = rng.uniform();
    const auto m = build_mask(errors, window, 0.042, 0.6, 5);
    CHECK(m.seeds.size() == 5);  // ceil(4.2)
  }

  SUBCASE("ties break toward the lower index") {
    Tensor window(4, 2);
    std::vector<double> errors{0.5, 0.5, 0.5, 0.5};
    const auto m = build_mask(errors, window, 0.5, 0.6, 0);
    CHECK(m.seeds == std::vector<int>{0, 1});
  }

  SUBCASE("boundary seed clips to the window") {
    // Identical non-constant rows: every neighbor correlation is 1 > rho.
    Tensor window(6, 3);
    for (int i = 0; i < 6; ++i) {
      for (int c = 0; c < 3; ++c) window.at(i, c) = c;
    }
    std::vector<double> errors{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    const auto m = build_mask(errors, window, 0.1, 0.6, 2);
    REQUIRE(m.seeds == std::vector<int>{0});
    CHECK(m.scales[0] == 2);
    for (int j = 0; j < 6; ++j) CHECK(m.blocked.at(0, j) == (j <= 2));
  }

  SUBCASE("seed always blocks itself even at scale 0") {
    Tensor window(5, 2);  // constant rows: pearson = 0, nothing expands
    std::vector<double> errors{0.0, 0.9, 0.0, 0.0, 0.0};
    const auto m = build_mask(errors, window, 0.2, 0.6, 5);
    REQUIRE(m.seeds == std::vector<int>{1});
    CHECK(m.scales[1] == 0);
    CHECK(m.blocked.at(1, 1));
    CHECK_FALSE(m.blocked.at(1, 0));
    CHECK_FALSE(m.blocked.at(1, 2));
  }

  SUBCASE("single-channel windows fall back to the cap") {
    Tensor window(10, 1);
    std::vector<double> errors(10, 0.0);
    errors[4] = 1.0;
    const auto m = build_mask(errors, window, 0.1, 0.6, 3);
    CHECK(m.scales[4] == 3);
    for (int j = 0; j < 10; ++j) CHECK(m.blocked.at(4, j) == (std::abs(j - 4) <= 3));
  }

  SUBCASE("all-seed windows are rejected") {
    Tensor window(4, 2);
    CHECK_THROWS_AS(build_mask(std::vector<double>(4, 1.0), window, 0.99, 0.6, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("mask scale never exceeds the cap and rho >= 1 blocks only the seed") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int W = 10 + static_cast<int>(rng.uniform_int(30));
    Tensor window = Tensor::uniform(W, 3, 1.0, rng);
    std::vector<double> errors(W);
    for (auto& e : errors) e = rng.uniform();
    const int cap = static_cast<int>(rng.uniform_int(7));
    const auto m = build_mask(errors, window, 0.1, 0.5, cap);
    for (int s : m.scales) CHECK(s <= cap);

    const auto strict = build_mask(errors, window, 0.1, 1.0, cap);
    for (int s : strict.scales) CHECK(s == 0);
    for (int i : strict.seeds) {
      for (int j = 0; j < W; ++j) CHECK(strict.blocked.at(i, j) == (i == j));
    }
  }
}

TEST_CASE("raising rho never grows any mask scale") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const int W = 12 + static_cast<int>(rng.uniform_int(20));
    // Smooth window so neighbor correlations vary.
    Tensor window(W, 4);
    for (int i = 0; i < W; ++i) {
      for (int c = 0; c < 4; ++c) {
        window.at(i, c) = std::sin(0.3 * i + 1.7 * c) + 0.2 * rng.gaussian();
      }
    }
    std::vector<double> errors(W);
    for (auto& e : errors) e = rng.uniform();
    const double rho_lo = rng.uniform(0.1, 0.5);
    const double rho_hi = rho_lo + rng.uniform(0.05, 0.4);
    const auto lo = build_mask(errors, window, 0.15, rho_lo, 5);
    const auto hi = build_mask(errors, window, 0.15, rho_hi, 5);
    REQUIRE(lo.seeds == hi.seeds);
    for (int i = 0; i < W; ++i) CHECK(hi.scales[i] <= lo.scales[i]);
  }
}

TEST_CASE("every mask row keeps a visible column, even with huge caps") {
  Rng rng(303);
  for (int trial = 0; trial < 40; ++trial) {
    const int W = 3 + static_cast<int>(rng.uniform_int(10));
    Tensor window(W, 3);
    for (int i = 0; i < W; ++i) {
      for (int c = 0; c < 3; ++c) window.at(i, c) = std::sin(0.1 * i + c);
    }
    std::vector<double> errors(W);
    for (auto& e : errors) e = rng.uniform();
    const auto m = build_mask(errors, window, 0.3, 0.2, W + 3);
    for (int i = 0; i < W; ++i) {
      bool visible = false;
      for (int j = 0; j < W; ++j) {
        if (!m.blocked.at(i, j)) visible = true;
      }
      CHECK(visible);
    }
  }
}

TEST_CASE("build_mask agrees with the exhaustive reference on small windows") {
  Rng rng(999);
  for (int trial = 0; trial < 300; ++trial) {
    const int W = 3 + static_cast<int>(rng.uniform_int(10));  // 3..12
    const int C = 1 + static_cast<int>(rng.uniform_int(4));
    Tensor window(W, C);
    for (auto& v : window.data) v = std::sin(rng.uniform(0.0, 6.0)) + rng.gaussian() * 0.3;
    std::vector<double> errors(W);
    for (auto& e : errors) e = rng.uniform();
    const double ratio = rng.uniform(0.0, 0.9 * (W - 1.0) / W);
    const double rho = rng.uniform(0.05, 0.95);
    const int cap = static_cast<int>(rng.uniform_int(W + 2));

    const auto got = build_mask(errors, window, ratio, rho, cap);
    const auto want = ref_build_mask(errors, window, ratio, rho, cap);
    REQUIRE(got.seeds == want.seeds);
    CHECK(got.scales == want.scales);
    CHECK(got.blocked.cells == want.blocked.cells);
  }
}
